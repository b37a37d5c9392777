//! The symbolic world model: single-step execution with typed failures,
//! whole-plan execution, and goal validation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::blocksworld::{self, BlocksworldError, Vocabulary};
use crate::strips::{self, Atom, GroundAction, Plan, Problem, State};

/// Why an action could not be executed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "args")]
pub enum ErrorCategory {
    HandNotEmpty,
    HandEmpty,
    NotClear(String),
    NotOnTable(String),
    NotHolding(String),
    NotOnTop(String, String),
    SelfStack(String),
    UnknownBlock(String),
    MalformedAction,
    /// A missing precondition outside the blocksworld vocabulary.
    Unsatisfied(String),
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HandNotEmpty => f.write_str("HandNotEmpty"),
            Self::HandEmpty => f.write_str("HandEmpty"),
            Self::NotClear(x) => write!(f, "NotClear({x})"),
            Self::NotOnTable(x) => write!(f, "NotOnTable({x})"),
            Self::NotHolding(x) => write!(f, "NotHolding({x})"),
            Self::NotOnTop(x, y) => write!(f, "NotOnTop({x},{y})"),
            Self::SelfStack(x) => write!(f, "SelfStack({x})"),
            Self::UnknownBlock(x) => write!(f, "UnknownBlock({x})"),
            Self::MalformedAction => f.write_str("MalformedAction"),
            Self::Unsatisfied(a) => write!(f, "Unsatisfied({a})"),
        }
    }
}

/// The offending proposal: a library action, or raw text that never
/// resolved to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum ActionRef {
    Ground(GroundAction),
    Text(String),
}

impl fmt::Display for ActionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ground(a) => write!(f, "{a}"),
            Self::Text(t) => write!(f, "{t:?}"),
        }
    }
}

/// Machine-readable failure fed back to the policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypedError {
    pub category: ErrorCategory,
    pub action: ActionRef,
    /// Pre(a) ∖ s; empty for errors raised before grounding.
    pub missing: Vec<Atom>,
}

impl TypedError {
    pub fn malformed(text: impl Into<String>) -> Self {
        Self {
            category: ErrorCategory::MalformedAction,
            action: ActionRef::Text(text.into()),
            missing: Vec::new(),
        }
    }

    /// Short human-readable explanation used in correction prompts.
    pub fn describe(&self) -> String {
        match &self.category {
            ErrorCategory::HandNotEmpty => "the hand is not empty".into(),
            ErrorCategory::HandEmpty => "the hand is empty".into(),
            ErrorCategory::NotClear(x) => format!("the {x} block is not clear"),
            ErrorCategory::NotOnTable(x) => format!("the {x} block is not on the table"),
            ErrorCategory::NotHolding(x) => format!("the hand is not holding the {x} block"),
            ErrorCategory::NotOnTop(x, y) => {
                format!("the {x} block is not on top of the {y} block")
            }
            ErrorCategory::SelfStack(x) => format!("the {x} block cannot be stacked on itself"),
            ErrorCategory::UnknownBlock(x) => format!("there is no {x} block"),
            ErrorCategory::MalformedAction => "the action is not recognized".into(),
            ErrorCategory::Unsatisfied(a) => format!("precondition {a} does not hold"),
        }
    }
}

impl fmt::Display for TypedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} for {}", self.category, self.action)
    }
}

/// Outcome of one simulated action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(State),
    Failure(TypedError),
}

impl StepResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, Self::Next(_))
    }

    pub fn state(&self) -> Option<&State> {
        match self {
            Self::Next(s) => Some(s),
            Self::Failure(_) => None,
        }
    }
}

/// Picks the category from the missing preconditions.
///
/// Priority: hand occupied, then nothing/wrong thing held, then table
/// support, then on-relation, then clearness (first argument before second).
fn classify(s: &State, a: &GroundAction, missing: &[Atom]) -> ErrorCategory {
    let has = |pred: &str| missing.iter().find(|m| m.predicate() == pred);
    if has("handempty").is_some() {
        return ErrorCategory::HandNotEmpty;
    }
    if let Some(h) = has("holding") {
        let x = h.arg(0).unwrap_or_default().to_string();
        let empty = s.contains(&Atom::of("handempty", &[]));
        return if empty {
            ErrorCategory::HandEmpty
        } else {
            ErrorCategory::NotHolding(x)
        };
    }
    if let Some(t) = has("ontable") {
        return ErrorCategory::NotOnTable(t.arg(0).unwrap_or_default().into());
    }
    if let Some(o) = has("on") {
        return ErrorCategory::NotOnTop(
            o.arg(0).unwrap_or_default().into(),
            o.arg(1).unwrap_or_default().into(),
        );
    }
    let clears: Vec<&Atom> = missing.iter().filter(|m| m.predicate() == "clear").collect();
    if !clears.is_empty() {
        // Report the clear precondition on the earliest action argument.
        let pick = a
            .args()
            .iter()
            .find_map(|arg| clears.iter().find(|c| c.arg(0) == Some(arg.as_str())))
            .unwrap_or(&clears[0]);
        return ErrorCategory::NotClear(pick.arg(0).unwrap_or_default().into());
    }
    ErrorCategory::Unsatisfied(missing.first().map(ToString::to_string).unwrap_or_default())
}

/// Executes `a` in `s`; inapplicable actions always fail with a typed error.
pub fn step(s: &State, a: &GroundAction) -> StepResult {
    let missing: Vec<Atom> = a.pre().iter().filter(|p| !s.contains(p)).cloned().collect();
    if missing.is_empty() {
        StepResult::Next(strips::apply(s, a))
    } else {
        StepResult::Failure(TypedError {
            category: classify(s, a, &missing),
            action: ActionRef::Ground(a.clone()),
            missing,
        })
    }
}

/// Resolves an action against the library, then steps it. Actions whose
/// arguments are not problem objects fail with `UnknownBlock`; anything
/// else outside the library is `MalformedAction`.
pub fn step_in(p: &Problem, s: &State, a: &GroundAction) -> StepResult {
    if let Some(x) = a.args().iter().find(|x| !p.objects().contains(*x)) {
        return StepResult::Failure(TypedError {
            category: ErrorCategory::UnknownBlock(x.clone()),
            action: ActionRef::Ground(a.clone()),
            missing: Vec::new(),
        });
    }
    match p.find_action(a.name(), a.args()) {
        Some(lib) if lib == a => step(s, lib),
        _ => StepResult::Failure(TypedError {
            category: if a.args().len() == 2 && a.args()[0] == a.args()[1] {
                ErrorCategory::SelfStack(a.args()[0].clone())
            } else {
                ErrorCategory::MalformedAction
            },
            action: ActionRef::Ground(a.clone()),
            missing: Vec::new(),
        }),
    }
}

/// Maps a parser failure onto the typed-error channel.
pub fn parse_failure(text: &str, err: &BlocksworldError) -> TypedError {
    let category = match err {
        BlocksworldError::UnknownBlock(x) => ErrorCategory::UnknownBlock(x.clone()),
        BlocksworldError::SelfStack(x) => ErrorCategory::SelfStack(x.clone()),
        _ => ErrorCategory::MalformedAction,
    };
    TypedError {
        category,
        action: ActionRef::Text(text.to_string()),
        missing: Vec::new(),
    }
}

/// Parses natural-language `text` against the problem's objects and
/// resolves it to a library action.
pub fn resolve_text(p: &Problem, text: &str) -> Result<GroundAction, TypedError> {
    let vocab = Vocabulary::from_problem(p);
    let parsed = blocksworld::parse_action(text, &vocab).map_err(|e| parse_failure(text, &e))?;
    p.find_action(parsed.name(), parsed.args())
        .cloned()
        .ok_or_else(|| TypedError::malformed(text))
}

/// Parses and steps one natural-language action.
pub fn step_text(p: &Problem, s: &State, text: &str) -> Result<(GroundAction, State), TypedError> {
    let a = resolve_text(p, text)?;
    match step(s, &a) {
        StepResult::Next(next) => Ok((a, next)),
        StepResult::Failure(e) => Err(e),
    }
}

/// Resolves one plan-file line: a canonical signature such as
/// `stack(red,blue)`, or natural-language action text.
pub fn resolve_line(p: &Problem, line: &str) -> Result<GroundAction, TypedError> {
    let Ok(sig) = line.parse::<Atom>() else {
        return resolve_text(p, line);
    };
    if let Some(a) = p.find_action(sig.predicate(), sig.args()) {
        return Ok(a.clone());
    }
    if sig.args().is_empty() {
        return resolve_text(p, line);
    }
    let text = line.trim().to_string();
    let category = if let Some(x) = sig.args().iter().find(|x| !p.objects().contains(*x)) {
        ErrorCategory::UnknownBlock(x.clone())
    } else if matches!(sig.predicate(), "stack" | "unstack") && sig.arg(0) == sig.arg(1) {
        ErrorCategory::SelfStack(sig.args()[0].clone())
    } else {
        ErrorCategory::MalformedAction
    };
    Err(TypedError {
        category,
        action: ActionRef::Text(text),
        missing: Vec::new(),
    })
}

/// Builds a plan from non-empty lines; the first unresolvable line is
/// reported with its 0-based action index.
pub fn plan_from_lines<'a>(
    p: &Problem,
    lines: impl IntoIterator<Item = &'a str>,
) -> Result<Plan, (usize, TypedError)> {
    let mut plan = Plan::default();
    for line in lines.into_iter().map(str::trim).filter(|l| !l.is_empty()) {
        let a = resolve_line(p, line).map_err(|e| (plan.len(), e))?;
        plan.push(a);
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Completed(State),
    Failed { index: usize, error: TypedError },
}

/// Folds `step` over the plan, stopping at the first failure.
pub fn run_plan(s0: &State, plan: &Plan) -> RunResult {
    let mut s = s0.clone();
    for (index, a) in plan.actions().iter().enumerate() {
        match step(&s, a) {
            StepResult::Next(next) => s = next,
            StepResult::Failure(error) => return RunResult::Failed { index, error },
        }
    }
    RunResult::Completed(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    ValidAndGoal,
    ValidNotGoal,
    Invalid { index: usize, error: TypedError },
}

impl Verdict {
    pub fn is_success(&self) -> bool {
        matches!(self, Self::ValidAndGoal)
    }
}

/// VAL-style check: every step executable from `p.init` (against the
/// library) and the final state entails the goal.
pub fn validate(p: &Problem, plan: &Plan) -> Verdict {
    let mut s = p.init().clone();
    for (index, a) in plan.actions().iter().enumerate() {
        match step_in(p, &s, a) {
            StepResult::Next(next) => s = next,
            StepResult::Failure(error) => return Verdict::Invalid { index, error },
        }
    }
    if strips::entails(&s, p.goal()) {
        Verdict::ValidAndGoal
    } else {
        Verdict::ValidNotGoal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocksworld::{pickup, putdown, stack, unstack};
    use crate::strips::Goal;

    fn st(atoms: &[&str]) -> State {
        State::parse(atoms).unwrap()
    }

    fn example1_problem() -> Problem {
        blocksworld::problem(
            &["red", "blue", "orange"],
            st(&[
                "clear(orange)",
                "clear(red)",
                "handempty",
                "on(orange,blue)",
                "ontable(blue)",
                "ontable(red)",
            ]),
            Goal::parse(["on(blue,orange)"]).unwrap(),
        )
        .unwrap()
    }

    fn example1_plan() -> Plan {
        Plan::new(vec![
            unstack("orange", "blue").unwrap(),
            putdown("orange"),
            pickup("blue"),
            stack("blue", "orange").unwrap(),
        ])
    }

    #[test]
    fn unstack_of_covered_block_is_not_clear() {
        let s = st(&[
            "clear(orange)",
            "clear(yellow)",
            "handempty",
            "on(blue,red)",
            "on(orange,blue)",
            "ontable(red)",
            "ontable(yellow)",
        ]);
        match step(&s, &unstack("blue", "red").unwrap()) {
            StepResult::Failure(e) => {
                assert_eq!(e.category, ErrorCategory::NotClear("blue".into()));
                assert_eq!(e.missing, vec![Atom::of("clear", &["blue"])]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pickup_while_holding_is_hand_not_empty() {
        let s = st(&[
            "clear(blue)",
            "clear(red)",
            "holding(orange)",
            "ontable(blue)",
            "ontable(red)",
        ]);
        let StepResult::Failure(e) = step(&s, &pickup("red")) else {
            panic!("should fail")
        };
        assert_eq!(e.category, ErrorCategory::HandNotEmpty);
    }

    #[test]
    fn sussman_first_unstack() {
        let s = st(&[
            "clear(b)",
            "clear(c)",
            "handempty",
            "on(c,a)",
            "ontable(a)",
            "ontable(b)",
        ]);
        assert_eq!(
            step(&s, &unstack("c", "a").unwrap()),
            StepResult::Next(st(&[
                "clear(a)",
                "clear(b)",
                "holding(c)",
                "ontable(a)",
                "ontable(b)"
            ]))
        );
    }

    #[test]
    fn run_plan_cases() {
        let p = example1_problem();
        match run_plan(p.init(), &example1_plan()) {
            RunResult::Completed(s) => assert!(strips::entails(&s, p.goal())),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            run_plan(p.init(), &Plan::default()),
            RunResult::Completed(p.init().clone())
        );
        let twice = Plan::new(vec![pickup("red"), pickup("red")]);
        match run_plan(p.init(), &twice) {
            RunResult::Failed { index, error } => {
                assert_eq!(index, 1);
                assert_eq!(error.category, ErrorCategory::HandNotEmpty);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validate_verdicts() {
        let p = example1_problem();
        let plan = example1_plan();
        assert_eq!(validate(&p, &plan), Verdict::ValidAndGoal);
        let truncated = Plan::new(plan.actions()[..3].to_vec());
        assert_eq!(validate(&p, &truncated), Verdict::ValidNotGoal);
        let mut swapped = plan.actions().to_vec();
        swapped.swap(2, 3);
        match validate(&p, &Plan::new(swapped)) {
            Verdict::Invalid { index, error } => {
                assert_eq!(index, 2);
                assert_eq!(error.category, ErrorCategory::HandEmpty);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stack_while_holding_other_is_not_holding() {
        let s = st(&["clear(red)", "holding(blue)", "ontable(red)"]);
        let StepResult::Failure(e) = step(&s, &stack("red", "blue").unwrap()) else {
            panic!()
        };
        assert_eq!(e.category, ErrorCategory::NotHolding("red".into()));
    }

    #[test]
    fn library_resolution_errors() {
        let p = example1_problem();
        let s = p.init().clone();
        let foreign = pickup("green");
        let StepResult::Failure(e) = step_in(&p, &s, &foreign) else {
            panic!()
        };
        assert_eq!(e.category, ErrorCategory::UnknownBlock("green".into()));

        assert_eq!(
            step_text(&p, &s, "juggle the red block").unwrap_err().category,
            ErrorCategory::MalformedAction
        );
        assert_eq!(
            step_text(&p, &s, "stack the red block on the red block")
                .unwrap_err()
                .category,
            ErrorCategory::SelfStack("red".into())
        );
        assert_eq!(
            step_text(&p, &s, "pick up the yellow block")
                .unwrap_err()
                .category,
            ErrorCategory::UnknownBlock("yellow".into())
        );
        let (a, _) = step_text(&p, &s, "Pick up the red block").unwrap();
        assert_eq!(a, pickup("red"));
    }

    #[test]
    fn plan_lines_mix_signatures_and_text() {
        let p = example1_problem();
        let plan = plan_from_lines(&p, ["unstack(red,blue)", "", "put down the red block"]).unwrap();
        assert_eq!(plan.signatures(), vec!["unstack(red,blue)", "putdown(red)"]);
        let (i, e) = plan_from_lines(&p, ["pickup(red)", "stack(red,red)"]).unwrap_err();
        assert_eq!((i, e.category), (1, ErrorCategory::SelfStack("red".into())));
        let (_, e) = plan_from_lines(&p, ["pickup(green)"]).unwrap_err();
        assert_eq!(e.category, ErrorCategory::UnknownBlock("green".into()));
    }

    #[test]
    fn pickup_from_stack_is_not_on_table() {
        let p = example1_problem();
        let StepResult::Failure(e) = step(p.init(), &pickup("orange")) else {
            panic!()
        };
        assert_eq!(e.category, ErrorCategory::NotOnTable("orange".into()));
        let StepResult::Failure(e) = step(p.init(), &unstack("red", "blue").unwrap()) else {
            panic!()
        };
        assert_eq!(
            e.category,
            ErrorCategory::NotOnTop("red".into(), "blue".into())
        );
    }
}
