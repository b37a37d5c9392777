//! Prompt templates and reply parsing for the remote agents.
//!
//! Each template is the verbatim instruction block (with its worked
//! examples) followed by a query block with `{{slot}}` placeholders.

use std::sync::LazyLock;

use regex::Regex;

use super::CandidateTrajectory;
use crate::blocksworld::{render_action, render_goal, render_state};
use crate::strips::{Problem, State};
use crate::agents::FailedAttempt;

pub const VERSION: &str = "v1";

pub const ACTION_STATE_GENERATION: &str = include_str!("../../prompts/v1/action_state_generation.txt");
pub const ACTION_PARSING: &str = include_str!("../../prompts/v1/action_parsing.txt");
pub const ITERATIVE_CORRECTION: &str = include_str!("../../prompts/v1/iterative_correction.txt");
pub const CONTRASTIVE_RANKING: &str = include_str!("../../prompts/v1/contrastive_ranking.txt");
pub const PLAN_RATING: &str = include_str!("../../prompts/v1/plan_rating.txt");

const GENERATION_QUERY: &str = include_str!("../../prompts/v1/action_state_generation.query.txt");
const PARSING_QUERY: &str = include_str!("../../prompts/v1/action_parsing.query.txt");
const CORRECTION_QUERY: &str = include_str!("../../prompts/v1/iterative_correction.query.txt");
const RANKING_QUERY: &str = include_str!("../../prompts/v1/contrastive_ranking.query.txt");
const RATING_QUERY: &str = include_str!("../../prompts/v1/plan_rating.query.txt");

/// Fills `{{name}}` slots. Unknown slots are left in place.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (name, value) in slots {
        out = out.replace(&format!("{{{{{name}}}}}"), value);
    }
    out
}

fn compose(instructions: &str, query: &str, slots: &[(&str, &str)]) -> String {
    format!("{}\n\n{}", instructions.trim_end(), fill(query, slots).trim_end())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

fn quote(s: &str) -> String {
    s.replace('"', "'")
}

/// State text for prompts; malformed predicted states fall back to the
/// canonical atom list.
pub fn state_text(s: &State) -> String {
    capitalize(&render_state(s).unwrap_or_else(|_| s.canonical().join(", ")))
}

fn goal_text(p: &Problem) -> String {
    capitalize(&render_goal(p.goal()))
}

/// `"Action k"` / `"State k"` lines for the first `upto` steps of `c`.
fn trajectory_lines(c: &CandidateTrajectory, upto: usize, sep: &str) -> String {
    let mut out = String::new();
    for (i, (a, s)) in c.plan.actions().iter().zip(&c.states).take(upto).enumerate() {
        let k = i + 1;
        out.push_str(&format!(
            "{sep}\n\"Action {k}\": \"{}\"{sep}\n\"State {k}\": \"{}\"",
            capitalize(&render_action(a)),
            quote(&state_text(s))
        ));
    }
    out
}

/// Generation request for the next action of `c`.
pub fn generation_prompt(p: &Problem, c: &CandidateTrajectory) -> String {
    let goal = goal_text(p);
    let init = state_text(p.init());
    let traj = trajectory_lines(c, c.plan.len(), "");
    compose(
        ACTION_STATE_GENERATION,
        GENERATION_QUERY,
        &[("goal", &goal), ("initial_state", &init), ("trajectory", &traj)],
    )
}

/// Correction request listing every failed attempt for the next step.
pub fn correction_prompt(p: &Problem, c: &CandidateTrajectory, failures: &[FailedAttempt]) -> String {
    let goal = goal_text(p);
    let init = state_text(p.init());
    let traj = trajectory_lines(c, c.plan.len(), "");
    let k = c.plan.len() + 1;
    let invalid: Vec<String> = failures
        .iter()
        .map(|f| format!("\"Action {k}\": \"{}\"", quote(f.text.trim())))
        .collect();
    let errors: Vec<String> = failures
        .iter()
        .map(|f| {
            format!(
                "\"Action {k}\": \"{}: {}\"",
                f.error.category,
                f.error.describe()
            )
        })
        .collect();
    let invalid = format!("{{{}}}", invalid.join(", "));
    let errors = format!("{{{}}}", errors.join(", "));
    compose(
        ITERATIVE_CORRECTION,
        CORRECTION_QUERY,
        &[
            ("goal", &goal),
            ("initial_state", &init),
            ("trajectory", &traj),
            ("invalid_actions", &invalid),
            ("errors", &errors),
        ],
    )
}

/// Pairwise comparison of two candidates. The shared plan prefix is shown
/// as history; the remainders are the options and their last states the
/// futures.
pub fn ranking_prompt(p: &Problem, a: &CandidateTrajectory, b: &CandidateTrajectory) -> String {
    let common = a
        .plan
        .actions()
        .iter()
        .zip(b.plan.actions())
        .take_while(|(x, y)| x == y)
        .count()
        // Keep at least one option step whenever both candidates have one.
        .min(a.plan.len().saturating_sub(1))
        .min(b.plan.len().saturating_sub(1));
    let goal = goal_text(p);
    let init = state_text(p.init());
    let traj = trajectory_lines(a, common, ",");
    let option = |i: usize, c: &CandidateTrajectory| {
        let steps: Vec<String> = c
            .plan
            .actions()
            .iter()
            .enumerate()
            .skip(common)
            .map(|(j, act)| format!("\"Action {}\": \"{}\"", j + 1, capitalize(&render_action(act))))
            .collect();
        format!("    \"Option {i}\": {{{}}}", steps.join(", "))
    };
    let future = |i: usize, c: &CandidateTrajectory| {
        let k = c.plan.len();
        let text = c
            .predicted_state_text
            .clone()
            .unwrap_or_else(|| state_text(&c.state));
        format!("    \"Future {i}\": {{\"State {k}\": \"{}\"}}", quote(&text))
    };
    let options = format!("{},\n{}", option(1, a), option(2, b));
    let futures = format!("{},\n{}", future(1, a), future(2, b));
    compose(
        CONTRASTIVE_RANKING,
        RANKING_QUERY,
        &[
            ("goal", &goal),
            ("initial_state", &init),
            ("trajectory", &traj),
            ("options", &options),
            ("futures", &futures),
        ],
    )
}

pub fn rating_prompt(p: &Problem, c: &CandidateTrajectory) -> String {
    let goal = goal_text(p);
    let init = state_text(p.init());
    let traj = trajectory_lines(c, c.plan.len(), "");
    compose(
        PLAN_RATING,
        RATING_QUERY,
        &[("goal", &goal), ("initial_state", &init), ("trajectory", &traj)],
    )
}

pub fn parsing_prompt(action: &str) -> String {
    compose(ACTION_PARSING, PARSING_QUERY, &[("action", action.trim())])
}

static KEYED_LINE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?m)"(Action|State)\s*(\d+)"\s*:\s*"?([^"\n]*)"?"#).unwrap()
});
static CONCLUSION_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?is)conclusion"?\s*:?\s*"?\s*option\s*(\d+)"#).unwrap());
static BARE_OPTION_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\W*option\s*(\d+)\W*$").unwrap());
static RATING_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)rating\W*?(-?\d+)").unwrap());
static INT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"-?\d+").unwrap());
static PARSED_LIST_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\]]*)\]").unwrap());

/// The action (and predicted state, if given) for step `k` of a
/// generation or correction reply.
///
/// Falls back to the first `"Action n"` line, then to the first non-empty
/// line, so that off-format replies still reach the parser and fail there
/// with a typed error.
pub fn parse_action_reply(reply: &str, k: usize) -> (String, Option<String>) {
    let mut actions: Vec<(usize, String)> = Vec::new();
    let mut states: Vec<(usize, String)> = Vec::new();
    for cap in KEYED_LINE_RE.captures_iter(reply) {
        let n: usize = cap[2].parse().unwrap_or(0);
        let text = cap[3].trim().trim_end_matches(',').trim().to_string();
        if &cap[1] == "Action" {
            actions.push((n, text));
        } else {
            states.push((n, text));
        }
    }
    let chosen = actions
        .iter()
        .find(|(n, _)| *n == k)
        .or_else(|| actions.first())
        .cloned();
    match chosen {
        Some((n, action)) => {
            let state = states.into_iter().find(|(m, _)| *m == n).map(|(_, s)| s);
            (action, state)
        }
        None => (
            reply
                .lines()
                .map(str::trim)
                .find(|l| !l.is_empty())
                .unwrap_or_default()
                .to_string(),
            None,
        ),
    }
}

/// The option number chosen in a ranking reply.
pub fn parse_conclusion(reply: &str) -> Option<usize> {
    CONCLUSION_RE
        .captures(reply)
        .or_else(|| BARE_OPTION_RE.captures(reply.trim()))
        .and_then(|c| c[1].parse().ok())
}

/// The score in a rating reply, before clamping.
pub fn parse_rating(reply: &str) -> Option<i64> {
    RATING_RE
        .captures(reply)
        .and_then(|c| c[1].parse().ok())
        .or_else(|| INT_RE.find(reply).and_then(|m| m.as_str().parse().ok()))
}

/// `['stack', 'red', 'yellow']` into its parts.
pub fn parse_action_list(reply: &str) -> Option<Vec<String>> {
    let inner = PARSED_LIST_RE.captures(reply)?;
    let parts: Vec<String> = inner[1]
        .split(',')
        .map(|p| p.trim().trim_matches(['\'', '"']).trim().to_ascii_lowercase())
        .filter(|p| !p.is_empty())
        .collect();
    (!parts.is_empty()).then_some(parts)
}
