//! Fixtures shared by the benchmarks.

use symplanner::blocksworld;
use symplanner::{Goal, Problem, State};

/// The Sussman anomaly: C on A; goal A on B on C.
pub fn sussman() -> Problem {
    blocksworld::problem(
        &["a", "b", "c"],
        State::parse(["on(c,a)", "ontable(a)", "ontable(b)", "clear(c)", "clear(b)", "handempty"])
            .expect("valid atoms"),
        Goal::parse(["on(a,b)", "on(b,c)"]).expect("valid atoms"),
    )
    .expect("valid problem")
}

/// Six blocks in one tower, to be reversed.
pub fn tower_reversal() -> Problem {
    let names = ["a", "b", "c", "d", "e", "f"];
    let mut init = vec!["handempty".to_string(), "ontable(a)".into(), "clear(f)".into()];
    let mut goal = Vec::new();
    for w in names.windows(2) {
        init.push(format!("on({},{})", w[1], w[0]));
        goal.push(format!("on({},{})", w[0], w[1]));
    }
    blocksworld::problem(
        &names,
        State::parse(init).expect("valid atoms"),
        Goal::parse(goal).expect("valid atoms"),
    )
    .expect("valid problem")
}
