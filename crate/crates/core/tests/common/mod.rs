//! Test-side oracles and fixtures, written against plain string sets so they
//! share no code with the library under test.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use symplanner::strips::{Atom, GroundAction};
use symplanner::State;

pub type Atoms = BTreeSet<String>;

#[derive(Debug, Clone)]
pub struct RefAction {
    pub name: &'static str,
    pub args: Vec<String>,
    pub pre: Atoms,
    pub add: Atoms,
    pub del: Atoms,
}

fn set(items: &[String]) -> Atoms {
    items.iter().cloned().collect()
}

/// Textbook blocksworld operators. With `self_stack` the x = y groundings of
/// stack/unstack are included as well (n + n + n² + n² actions).
pub fn ref_actions(blocks: &[&str], self_stack: bool) -> Vec<RefAction> {
    let mut out = Vec::new();
    let he = "handempty".to_string();
    for &x in blocks {
        let (cl, ot, ho) = (format!("clear({x})"), format!("ontable({x})"), format!("holding({x})"));
        out.push(RefAction {
            name: "pickup",
            args: vec![x.into()],
            pre: set(&[cl.clone(), ot.clone(), he.clone()]),
            add: set(std::slice::from_ref(&ho)),
            del: set(&[cl.clone(), ot.clone(), he.clone()]),
        });
        out.push(RefAction {
            name: "putdown",
            args: vec![x.into()],
            pre: set(std::slice::from_ref(&ho)),
            add: set(&[cl.clone(), ot.clone(), he.clone()]),
            del: set(std::slice::from_ref(&ho)),
        });
        for &y in blocks {
            if x == y && !self_stack {
                continue;
            }
            let (on, cy) = (format!("on({x},{y})"), format!("clear({y})"));
            out.push(RefAction {
                name: "stack",
                args: vec![x.into(), y.into()],
                pre: set(&[ho.clone(), cy.clone()]),
                add: set(&[on.clone(), cl.clone(), he.clone()]),
                del: set(&[ho.clone(), cy.clone()]),
            });
            out.push(RefAction {
                name: "unstack",
                args: vec![x.into(), y.into()],
                pre: set(&[on.clone(), cl.clone(), he.clone()]),
                add: set(&[ho.clone(), cy.clone()]),
                del: set(&[on.clone(), cl.clone(), he.clone()]),
            });
        }
    }
    out
}

pub fn ref_applicable(s: &Atoms, a: &RefAction) -> bool {
    a.pre.is_subset(s)
}

pub fn ref_apply(s: &Atoms, a: &RefAction) -> Atoms {
    s.difference(&a.del).chain(a.add.iter()).cloned().collect()
}

/// The library's representation of a reference action. Built through the
/// generic constructor, so self-stacks exist too.
pub fn to_library(a: &RefAction) -> GroundAction {
    let atoms = |s: &Atoms| s.iter().map(|t| t.parse::<Atom>().unwrap()).collect::<Vec<_>>();
    GroundAction::new(a.name, a.args.clone(), atoms(&a.pre), atoms(&a.add), atoms(&a.del)).unwrap()
}

pub fn atoms_of(s: &State) -> Atoms {
    s.iter().map(ToString::to_string).collect()
}

pub fn to_state(s: &Atoms) -> State {
    State::parse(s.iter().map(String::as_str)).unwrap()
}

pub fn all_on_table(blocks: &[&str]) -> Atoms {
    let mut s: Atoms = blocks
        .iter()
        .flat_map(|b| [format!("clear({b})"), format!("ontable({b})")])
        .collect();
    s.insert("handempty".into());
    s
}

/// Breadth-first closure of `init` under `actions`, in discovery order.
pub fn ref_reachable(init: &Atoms, actions: &[RefAction]) -> Vec<Atoms> {
    let mut seen: BTreeSet<Atoms> = BTreeSet::from([init.clone()]);
    let mut order = vec![init.clone()];
    let mut queue = VecDeque::from([init.clone()]);
    while let Some(s) = queue.pop_front() {
        for a in actions.iter().filter(|a| ref_applicable(&s, a)) {
            let t = ref_apply(&s, a);
            if seen.insert(t.clone()) {
                order.push(t.clone());
                queue.push_back(t);
            }
        }
    }
    order
}

pub fn ref_bfs_len(init: &Atoms, goal: &Atoms, actions: &[RefAction]) -> Option<usize> {
    let mut dist: HashMap<Atoms, usize> = HashMap::from([(init.clone(), 0)]);
    let mut queue = VecDeque::from([init.clone()]);
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        if goal.is_subset(&s) {
            return Some(d);
        }
        for a in actions.iter().filter(|a| ref_applicable(&s, a)) {
            let t = ref_apply(&s, a);
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    None
}

fn dls(s: &Atoms, goal: &Atoms, actions: &[RefAction], depth: usize, path: &mut Vec<Atoms>) -> bool {
    if goal.is_subset(s) {
        return true;
    }
    if depth == 0 {
        return false;
    }
    for a in actions.iter().filter(|a| ref_applicable(s, a)) {
        let t = ref_apply(s, a);
        if path.contains(&t) {
            continue;
        }
        path.push(t.clone());
        let found = dls(&t, goal, actions, depth - 1, path);
        path.pop();
        if found {
            return true;
        }
    }
    false
}

/// Iterative-deepening depth-first search; `None` past `max_depth`.
pub fn iddfs_len(init: &Atoms, goal: &Atoms, actions: &[RefAction], max_depth: usize) -> Option<usize> {
    (0..=max_depth).find(|&d| dls(init, goal, actions, d, &mut vec![init.clone()]))
}

/// `"Key": "value"` pairs of one worked example in a prompt template.
pub fn example_fields(template: &str, header: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut inside = false;
    for line in template.lines() {
        if line.starts_with("### ") || line.starts_with("## ") {
            inside = line.trim() == header;
            continue;
        }
        if !inside {
            continue;
        }
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('"') {
            if let Some((key, value)) = rest.split_once("\": ") {
                out.push((key.to_string(), value.trim().trim_matches('"').to_string()));
            }
        }
    }
    out
}

/// Everything a section of a template holds, up to the next header.
pub fn section_body(template: &str, header: &str) -> String {
    let mut out = Vec::new();
    let mut inside = false;
    for line in template.lines() {
        if line.starts_with("### ") || line.starts_with("## ") {
            if inside {
                break;
            }
            inside = line.trim() == header;
            continue;
        }
        if inside {
            out.push(line);
        }
    }
    out.join("\n").trim().to_string()
}

pub enum Reply {
    Content(String),
    Status(u16),
    /// A 200 response with this exact body.
    Raw(String),
    /// Close the connection without answering.
    Hangup,
}

type Responder = Box<dyn Fn(&serde_json::Value) -> Reply + Send + Sync>;

/// Minimal chat-completions endpoint on a loopback port. Every request body
/// is recorded; each connection carries one request.
pub struct MockServer {
    pub base_url: String,
    requests: Arc<Mutex<Vec<serde_json::Value>>>,
}

impl MockServer {
    pub fn start(responder: impl Fn(&serde_json::Value) -> Reply + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}/v1", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&requests);
        let responder: Arc<Responder> = Arc::new(Box::new(responder));
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let log = Arc::clone(&log);
                let responder = Arc::clone(&responder);
                thread::spawn(move || serve(stream, &log, &responder));
            }
        });
        Self { base_url, requests }
    }

    pub fn requests(&self) -> Vec<serde_json::Value> {
        self.requests.lock().unwrap().clone()
    }

    pub fn prompts(&self) -> Vec<String> {
        self.requests()
            .iter()
            .map(|r| r["messages"][0]["content"].as_str().unwrap_or_default().to_string())
            .collect()
    }
}

fn serve(stream: TcpStream, log: &Mutex<Vec<serde_json::Value>>, responder: &Responder) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let json: serde_json::Value = serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null);
    log.lock().unwrap().push(json.clone());
    let (status, payload) = match responder(&json) {
        Reply::Content(text) => (
            200,
            serde_json::json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": text}}]})
                .to_string(),
        ),
        Reply::Status(code) => (code, "{\"error\":\"scripted\"}".to_string()),
        Reply::Raw(body) => (200, body),
        Reply::Hangup => return,
    };
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} Scripted\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
    let _ = stream.flush();
}
