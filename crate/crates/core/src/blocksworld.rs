//! The four-operator blocksworld and its closed-class natural-language surface.
//!
//! Parsing is rule based. The accepted phrasings are the ones used by the
//! planning prompts: optional articles, "on" / "on top of" / "onto", and an
//! optional trailing "on the table" after "put down".

use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;

use crate::strips::{is_identifier, Atom, Goal, GroundAction, ModelError, Problem, State};

pub const DOMAIN_NAME: &str = "blocksworld";

/// Block names used by every prompt example.
pub const DEFAULT_BLOCKS: [&str; 4] = ["red", "blue", "orange", "yellow"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("expected exactly one hand fact, found {0}")]
    HandFacts(usize),
    #[error("block `{0}` is held but also placed")]
    HeldAndPlaced(String),
    #[error("block `{0}` has no support")]
    Unsupported(String),
    #[error("block `{0}` has more than one support")]
    MultiplySupported(String),
    #[error("block `{0}` has more than one block on top")]
    MultiplyCovered(String),
    #[error("clear({0}) does not match the blocks above it")]
    ClearMismatch(String),
    #[error("on-relation has a cycle through `{0}`")]
    Cycle(String),
    #[error("atom `{0}` is not a blocksworld fact")]
    UnknownFact(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlocksworldError {
    #[error("unrecognized action phrasing: `{0}`")]
    MalformedAction(String),
    #[error("unrecognized clause: `{0}`")]
    MalformedClause(String),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("cannot stack or unstack `{0}` onto itself")]
    SelfStack(String),
    #[error("blocksworld needs at least 2 blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("malformed state: {0}")]
    Structural(#[from] StructuralError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The block names an instance may mention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    blocks: BTreeSet<String>,
}

impl Vocabulary {
    pub fn new<I, S>(blocks: I) -> Result<Self, BlocksworldError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for b in blocks {
            let b = b.as_ref().trim().to_ascii_lowercase();
            if !is_identifier(&b) {
                return Err(ModelError::BadIdentifier(b).into());
            }
            set.insert(b);
        }
        Ok(Self { blocks: set })
    }

    pub fn from_problem(p: &Problem) -> Self {
        Self {
            blocks: p.objects().clone(),
        }
    }

    pub fn default_colors() -> Self {
        Self::new(DEFAULT_BLOCKS).expect("static names")
    }

    pub fn blocks(&self) -> &BTreeSet<String> {
        &self.blocks
    }

    pub fn contains(&self, b: &str) -> bool {
        self.blocks.contains(b)
    }

    fn check(&self, b: &str) -> Result<String, BlocksworldError> {
        if self.blocks.contains(b) {
            Ok(b.to_string())
        } else {
            Err(BlocksworldError::UnknownBlock(b.to_string()))
        }
    }
}

fn on(x: &str, y: &str) -> Atom {
    Atom::of("on", &[x, y])
}
fn ontable(x: &str) -> Atom {
    Atom::of("ontable", &[x])
}
fn clear(x: &str) -> Atom {
    Atom::of("clear", &[x])
}
fn holding(x: &str) -> Atom {
    Atom::of("holding", &[x])
}
fn handempty() -> Atom {
    Atom::of("handempty", &[])
}

pub fn pickup(x: &str) -> GroundAction {
    GroundAction::new(
        "pickup",
        vec![x.into()],
        [clear(x), ontable(x), handempty()],
        [holding(x)],
        [clear(x), ontable(x), handempty()],
    )
    .expect("pickup effects are disjoint")
}

pub fn putdown(x: &str) -> GroundAction {
    GroundAction::new(
        "putdown",
        vec![x.into()],
        [holding(x)],
        [clear(x), ontable(x), handempty()],
        [holding(x)],
    )
    .expect("putdown effects are disjoint")
}

/// `stack(x, y)`; `x == y` has no grounding and yields `SelfStack`.
pub fn stack(x: &str, y: &str) -> Result<GroundAction, BlocksworldError> {
    if x == y {
        return Err(BlocksworldError::SelfStack(x.into()));
    }
    Ok(GroundAction::new(
        "stack",
        vec![x.into(), y.into()],
        [holding(x), clear(y)],
        [on(x, y), clear(x), handempty()],
        [holding(x), clear(y)],
    )?)
}

pub fn unstack(x: &str, y: &str) -> Result<GroundAction, BlocksworldError> {
    if x == y {
        return Err(BlocksworldError::SelfStack(x.into()));
    }
    Ok(GroundAction::new(
        "unstack",
        vec![x.into(), y.into()],
        [on(x, y), clear(x), handempty()],
        [holding(x), clear(y)],
        [on(x, y), clear(x), handempty()],
    )?)
}

/// All groundings of the four operators: n + n + n(n−1) + n(n−1) actions.
pub fn build_domain<I, S>(blocks: I) -> Result<Vec<GroundAction>, BlocksworldError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let vocab = Vocabulary::new(blocks)?;
    let n = vocab.blocks.len();
    if n < 2 {
        return Err(BlocksworldError::TooFewBlocks(n));
    }
    let mut out = Vec::with_capacity(2 * n * n);
    for x in &vocab.blocks {
        out.push(pickup(x));
        out.push(putdown(x));
        for y in vocab.blocks.iter().filter(|y| *y != x) {
            out.push(stack(x, y)?);
            out.push(unstack(x, y)?);
        }
    }
    Ok(out)
}

/// A blocksworld problem over `blocks` with the full grounded library.
pub fn problem<S: AsRef<str>>(
    blocks: &[S],
    init: State,
    goal: Goal,
) -> Result<Problem, BlocksworldError> {
    let actions = build_domain(blocks.iter().map(AsRef::as_ref))?;
    let objects = blocks.iter().map(|b| b.as_ref().to_ascii_lowercase());
    Ok(Problem::new(DOMAIN_NAME, objects, actions, init, goal)?)
}

/// Name and arguments of a parsed action, before grounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCall {
    pub name: String,
    pub args: Vec<String>,
}

fn normalize(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .map(|c| match c {
            '"' | '\'' | '`' | '*' => ' ',
            c => c.to_ascii_lowercase(),
        })
        .collect();
    let joined = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    joined.trim_end_matches(['.', ';', ':']).trim().to_string()
}

static PICKUP_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^pick ?up (?:the )?([a-z0-9_-]+) block$").unwrap());
static PUTDOWN_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^put ?down (?:the )?([a-z0-9_-]+) block(?: on(?:to)? (?:the )?table)?$").unwrap()
});
static STACK_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^stack (?:the )?([a-z0-9_-]+) block (?:on top of|onto|on) (?:the )?([a-z0-9_-]+) block$",
    )
    .unwrap()
});
static UNSTACK_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^unstack (?:the )?([a-z0-9_-]+) block (?:from )?(?:on top of |off of |off )?(?:the )?([a-z0-9_-]+) block$",
    )
    .unwrap()
});

/// Recognizes the phrasing only; block names are checked against `vocab`.
pub fn parse_action_call(text: &str, vocab: &Vocabulary) -> Result<ActionCall, BlocksworldError> {
    let t = normalize(text);
    let call = |name: &str, caps: regex::Captures<'_>| -> Result<ActionCall, BlocksworldError> {
        let args = caps
            .iter()
            .skip(1)
            .flatten()
            .map(|m| vocab.check(m.as_str()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ActionCall {
            name: name.to_string(),
            args,
        })
    };
    if let Some(c) = PICKUP_RE.captures(&t) {
        call("pickup", c)
    } else if let Some(c) = PUTDOWN_RE.captures(&t) {
        call("putdown", c)
    } else if let Some(c) = STACK_RE.captures(&t) {
        call("stack", c)
    } else if let Some(c) = UNSTACK_RE.captures(&t) {
        call("unstack", c)
    } else {
        Err(BlocksworldError::MalformedAction(text.trim().to_string()))
    }
}

/// Parses one natural-language action into its ground operator.
pub fn parse_action(text: &str, vocab: &Vocabulary) -> Result<GroundAction, BlocksworldError> {
    let call = parse_action_call(text, vocab)?;
    let a = &call.args;
    match call.name.as_str() {
        "pickup" => Ok(pickup(&a[0])),
        "putdown" => Ok(putdown(&a[0])),
        "stack" => stack(&a[0], &a[1]),
        "unstack" => unstack(&a[0], &a[1]),
        _ => unreachable!("parse_action_call only yields the four operators"),
    }
}

/// Canonical phrasing; `parse_action` inverts it.
pub fn render_action(a: &GroundAction) -> String {
    let args = a.args();
    match (a.name(), args) {
        ("pickup", [x]) => format!("pick up the {x} block"),
        ("putdown", [x]) => format!("put down the {x} block"),
        ("stack", [x, y]) => format!("stack the {x} block on top of the {y} block"),
        ("unstack", [x, y]) => format!("unstack the {x} block from on top of the {y} block"),
        _ => a.signature(),
    }
}

static SUBJECT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:the )?([a-z0-9_-]+) block (?:is )?(.*)$").unwrap());
static ON_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:on top of|on) (?:the )?([a-z0-9_-]+) block$").unwrap()
});
static HOLDING_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:the )?hand is holding (?:the )?([a-z0-9_-]+) block$").unwrap()
});
static AND_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r",|\band\b").unwrap());

fn parse_clauses(
    text: &str,
    vocab: &Vocabulary,
    allow_hand: bool,
) -> Result<BTreeSet<Atom>, BlocksworldError> {
    let t = normalize(text);
    let mut atoms = BTreeSet::new();
    // Elliptical clauses ("... is clear and on the table") reuse the last subject.
    let mut subject: Option<String> = None;
    for raw in AND_RE.split(&t) {
        let clause = raw.trim();
        if clause.is_empty() {
            continue;
        }
        let malformed = || BlocksworldError::MalformedClause(clause.to_string());
        if clause == "the hand is empty" || clause == "hand is empty" {
            if !allow_hand {
                return Err(malformed());
            }
            atoms.insert(handempty());
            subject = None;
            continue;
        }
        if let Some(c) = HOLDING_RE.captures(clause) {
            if !allow_hand {
                return Err(malformed());
            }
            atoms.insert(holding(&vocab.check(&c[1])?));
            subject = None;
            continue;
        }
        let (block, predicate) = match SUBJECT_RE.captures(clause) {
            Some(c) => (vocab.check(&c[1])?, c[2].to_string()),
            None => {
                let rest = clause.strip_prefix("is ").unwrap_or(clause);
                (subject.clone().ok_or_else(malformed)?, rest.to_string())
            }
        };
        let predicate = predicate.trim();
        if predicate == "clear" {
            atoms.insert(clear(&block));
        } else if predicate == "on the table" || predicate == "on table" {
            atoms.insert(ontable(&block));
        } else if let Some(c) = ON_RE.captures(predicate) {
            let below = vocab.check(&c[1])?;
            if below == block {
                return Err(BlocksworldError::SelfStack(block));
            }
            atoms.insert(on(&block, &below));
        } else {
            return Err(malformed());
        }
        subject = Some(block);
    }
    Ok(atoms)
}

/// Parses a comma/"and"-separated list of state clauses.
pub fn parse_state(text: &str, vocab: &Vocabulary) -> Result<State, BlocksworldError> {
    parse_clauses(text, vocab, true).map(State::new)
}

/// Like [`parse_state`] but only `on`, `ontable` and `clear` clauses; empty
/// text is an error.
pub fn parse_goal(text: &str, vocab: &Vocabulary) -> Result<Goal, BlocksworldError> {
    let atoms = parse_clauses(text, vocab, false)?;
    if atoms.is_empty() {
        return Err(BlocksworldError::MalformedClause(text.trim().to_string()));
    }
    Ok(Goal::new(atoms))
}

/// Checks the hand, support, clear and acyclicity invariants.
///
/// Blocks are all objects mentioned by `s` plus `blocks`.
pub fn check_well_formed(s: &State, blocks: &BTreeSet<String>) -> Result<(), StructuralError> {
    let mut all: BTreeSet<&str> = blocks.iter().map(String::as_str).collect();
    let mut held = Vec::new();
    let mut hand_empty = false;
    let mut below: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut above: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut on_table = BTreeSet::new();
    let mut clear_set = BTreeSet::new();
    for a in s.iter() {
        match (a.predicate(), a.args()) {
            ("handempty", []) => hand_empty = true,
            ("holding", [x]) => held.push(x.as_str()),
            ("ontable", [x]) => {
                on_table.insert(x.as_str());
            }
            ("clear", [x]) => {
                clear_set.insert(x.as_str());
            }
            ("on", [x, y]) => {
                below.entry(x).or_default().push(y);
                above.entry(y).or_default().push(x);
            }
            _ => return Err(StructuralError::UnknownFact(a.to_string())),
        }
        all.extend(a.args().iter().map(String::as_str));
    }
    let hand_facts = held.len() + usize::from(hand_empty);
    if hand_facts != 1 {
        return Err(StructuralError::HandFacts(hand_facts));
    }
    for &x in &all {
        let supports = below.get(x).map_or(0, Vec::len) + usize::from(on_table.contains(x));
        let is_held = held.contains(&x);
        if is_held {
            if supports > 0 {
                return Err(StructuralError::HeldAndPlaced(x.into()));
            }
        } else if supports == 0 {
            return Err(StructuralError::Unsupported(x.into()));
        } else if supports > 1 {
            return Err(StructuralError::MultiplySupported(x.into()));
        }
        let covered = above.get(x).map_or(0, Vec::len);
        if covered > 1 {
            return Err(StructuralError::MultiplyCovered(x.into()));
        }
        let should_be_clear = !is_held && covered == 0;
        if clear_set.contains(x) != should_be_clear {
            return Err(StructuralError::ClearMismatch(x.into()));
        }
    }
    // Every block has at most one support, so following `below` either
    // reaches the table/hand or loops.
    for &start in &all {
        let mut cur = start;
        let mut steps = 0;
        while let Some(next) = below.get(cur).and_then(|v| v.first()) {
            cur = next;
            steps += 1;
            if steps > all.len() {
                return Err(StructuralError::Cycle(start.into()));
            }
        }
    }
    Ok(())
}

/// Renders a well-formed state: clear facts, hand fact, on facts (by top
/// block), ontable facts; each group alphabetical, joined by ", ".
pub fn render_state(s: &State) -> Result<String, BlocksworldError> {
    check_well_formed(s, &BTreeSet::new())?;
    let mut clears = Vec::new();
    let mut hand = String::new();
    let mut ons = Vec::new();
    let mut tables = Vec::new();
    for a in s.iter() {
        match (a.predicate(), a.args()) {
            ("clear", [x]) => clears.push(format!("the {x} block is clear")),
            ("handempty", []) => hand = "the hand is empty".into(),
            ("holding", [x]) => hand = format!("the hand is holding the {x} block"),
            ("on", [x, y]) => ons.push(format!("the {x} block is on top of the {y} block")),
            ("ontable", [x]) => tables.push(format!("the {x} block is on the table")),
            _ => unreachable!("checked by check_well_formed"),
        }
    }
    let mut parts = clears;
    parts.push(hand);
    parts.extend(ons);
    parts.extend(tables);
    Ok(parts.join(", "))
}

/// Goal clauses in sorted atom order, the last joined with " and ".
pub fn render_goal(g: &Goal) -> String {
    let clauses: Vec<String> = g
        .atoms()
        .iter()
        .map(|a| match (a.predicate(), a.args()) {
            ("clear", [x]) => format!("the {x} block is clear"),
            ("on", [x, y]) => format!("the {x} block is on top of the {y} block"),
            ("ontable", [x]) => format!("the {x} block is on the table"),
            _ => a.to_string(),
        })
        .collect();
    match clauses.split_last() {
        None => String::new(),
        Some((last, [])) => last.clone(),
        Some((last, rest)) => format!("{} and {}", rest.join(", "), last),
    }
}

/// Number of hand-empty configurations of `n` blocks (sets of ordered
/// stacks).
fn configuration_count(n: usize) -> f64 {
    let mut a = vec![1.0f64; n + 1];
    for m in 1..=n {
        // Condition on the size k of the stack holding one fixed block.
        a[m] = (1..=m)
            .map(|k| binomial(m - 1, k - 1) * factorial(k) * a[m - k])
            .sum();
    }
    a[n]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// A uniformly random well-formed hand-empty configuration: the blocks are
/// partitioned into stacks, each configuration equally likely.
pub fn random_configuration<R: rand::Rng + ?Sized>(blocks: &[String], rng: &mut R) -> State {
    use rand::seq::SliceRandom;
    let mut rest: Vec<&String> = blocks.iter().collect();
    rest.sort();
    let mut atoms = vec![handempty()];
    while let Some(first) = rest.first().copied() {
        let m = rest.len();
        let total = configuration_count(m);
        let mut u = rng.gen::<f64>() * total;
        let mut k = m;
        for size in 1..=m {
            let w = binomial(m - 1, size - 1) * factorial(size) * configuration_count(m - size);
            if u < w {
                k = size;
                break;
            }
            u -= w;
        }
        let mut others: Vec<&String> = rest[1..].to_vec();
        others.shuffle(rng);
        let mut stack: Vec<&String> = others[..k - 1].to_vec();
        stack.push(first);
        stack.shuffle(rng);
        atoms.push(ontable(stack[0]));
        for w in stack.windows(2) {
            atoms.push(on(w[1], w[0]));
        }
        atoms.push(clear(stack[k - 1]));
        rest.retain(|b| !stack.contains(b));
    }
    State::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::default_colors()
    }

    fn st(atoms: &[&str]) -> State {
        State::parse(atoms).unwrap()
    }

    #[test]
    fn action_counts_follow_formula() {
        for n in 2..=6 {
            let names: Vec<String> = (0..n).map(|i| format!("b{i}")).collect();
            assert_eq!(build_domain(&names).unwrap().len(), 2 * n + 2 * n * (n - 1));
        }
        assert_eq!(build_domain(["red", "blue"]).unwrap().len(), 8);
        assert_eq!(
            build_domain(["red"]).unwrap_err(),
            BlocksworldError::TooFewBlocks(1)
        );
    }

    #[test]
    fn parses_prompt_phrasings() {
        let v = vocab();
        let cases = [
            ("pick up the orange block", "pickup(orange)"),
            ("Pickup the red block", "pickup(red)"),
            ("put down the red block", "putdown(red)"),
            ("Put down the orange block on the table", "putdown(orange)"),
            ("stack the red block on top of the yellow block", "stack(red,yellow)"),
            ("Stack the blue block onto the orange block", "stack(blue,orange)"),
            ("Stack the blue block on the orange block.", "stack(blue,orange)"),
            ("unstack the blue block from on top of the red block", "unstack(blue,red)"),
            ("Unstack the orange block from the blue block", "unstack(orange,blue)"),
        ];
        for (text, sig) in cases {
            assert_eq!(parse_action(text, &v).unwrap().signature(), sig, "{text}");
        }
    }

    #[test]
    fn action_parse_errors() {
        let v = vocab();
        assert!(matches!(
            parse_action("juggle the red block", &v),
            Err(BlocksworldError::MalformedAction(_))
        ));
        assert_eq!(
            parse_action("pick up the green block", &v),
            Err(BlocksworldError::UnknownBlock("green".into()))
        );
        assert_eq!(
            parse_action("stack the red block on the red block", &v),
            Err(BlocksworldError::SelfStack("red".into()))
        );
        assert!(parse_action("   ", &v).is_err());
    }

    #[test]
    fn render_action_inverts_parse() {
        let v = vocab();
        for a in build_domain(DEFAULT_BLOCKS).unwrap() {
            assert_eq!(parse_action(&render_action(&a), &v).unwrap(), a);
        }
    }

    #[test]
    fn parses_example_state() {
        let text = "The orange block is clear, the red block is clear, the hand is empty, the orange block is on the blue block, the blue block is on the table, the red block is on the table";
        assert_eq!(
            parse_state(text, &vocab()).unwrap(),
            st(&[
                "clear(orange)",
                "clear(red)",
                "handempty",
                "on(orange,blue)",
                "ontable(blue)",
                "ontable(red)"
            ])
        );
        assert_eq!(
            parse_state("the hand is empty", &vocab()).unwrap(),
            st(&["handempty"])
        );
    }

    #[test]
    fn elliptical_clause_reuses_subject() {
        let s = parse_state(
            "the hand is empty, and the orange block is clear and on the table",
            &vocab(),
        )
        .unwrap();
        assert_eq!(s, st(&["clear(orange)", "handempty", "ontable(orange)"]));
        assert!(matches!(
            parse_state("on the table", &vocab()),
            Err(BlocksworldError::MalformedClause(_))
        ));
    }

    #[test]
    fn goal_grammar() {
        let v = vocab();
        assert_eq!(
            parse_goal("The blue block is on the orange block", &v).unwrap(),
            Goal::parse(["on(blue,orange)"]).unwrap()
        );
        assert_eq!(
            parse_goal(
                "the blue block is on top of the red block and the yellow block is on top of the orange block",
                &v
            )
            .unwrap(),
            Goal::parse(["on(blue,red)", "on(yellow,orange)"]).unwrap()
        );
        assert!(matches!(
            parse_goal("", &v),
            Err(BlocksworldError::MalformedClause(_))
        ));
        assert!(matches!(
            parse_goal("the hand is empty", &v),
            Err(BlocksworldError::MalformedClause(_))
        ));
        assert_eq!(
            parse_goal("the pink block is clear", &v),
            Err(BlocksworldError::UnknownBlock("pink".into()))
        );
    }

    #[test]
    fn render_state_golden() {
        let s = st(&[
            "clear(blue)",
            "clear(red)",
            "holding(orange)",
            "ontable(blue)",
            "ontable(red)",
        ]);
        assert_eq!(
            render_state(&s).unwrap(),
            "the blue block is clear, the red block is clear, the hand is holding the orange block, the blue block is on the table, the red block is on the table"
        );
        assert_eq!(
            render_state(&st(&["handempty", "ontable(a)", "clear(a)"])).unwrap(),
            "the a block is clear, the hand is empty, the a block is on the table"
        );
    }

    #[test]
    fn render_rejects_malformed() {
        let cases: [(&[&str], StructuralError); 5] = [
            (&["ontable(a)", "clear(a)"], StructuralError::HandFacts(0)),
            (
                &["handempty", "holding(a)"],
                StructuralError::HandFacts(2),
            ),
            (
                &["handempty", "clear(a)"],
                StructuralError::Unsupported("a".into()),
            ),
            (
                &["handempty", "ontable(a)"],
                StructuralError::ClearMismatch("a".into()),
            ),
            (
                &["handempty", "ontable(a)", "on(a,b)", "clear(a)", "ontable(b)"],
                StructuralError::MultiplySupported("a".into()),
            ),
        ];
        for (atoms, expected) in cases {
            assert_eq!(
                render_state(&st(atoms)),
                Err(BlocksworldError::Structural(expected)),
                "{atoms:?}"
            );
        }
        let cyc = st(&["handempty", "on(a,b)", "on(b,a)", "clear(a)"]);
        assert!(check_well_formed(&cyc, &BTreeSet::new()).is_err());
        let cyc2 = st(&["handempty", "on(a,b)", "on(b,a)"]);
        assert!(matches!(
            check_well_formed(&cyc2, &BTreeSet::new()),
            Err(StructuralError::ClearMismatch(_) | StructuralError::Cycle(_))
        ));
    }

    #[test]
    fn goal_render_parses_back() {
        let g = Goal::parse(["on(blue,red)", "on(yellow,orange)", "ontable(red)"]).unwrap();
        assert_eq!(parse_goal(&render_goal(&g), &vocab()).unwrap(), g);
    }

    #[test]
    fn random_configurations_are_well_formed() {
        use rand::SeedableRng;
        let blocks: Vec<String> = DEFAULT_BLOCKS.iter().map(|s| s.to_string()).collect();
        let set: BTreeSet<String> = blocks.iter().cloned().collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let s = random_configuration(&blocks, &mut rng);
            check_well_formed(&s, &set).unwrap();
        }
    }
}
