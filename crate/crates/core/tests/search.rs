mod common;

use std::sync::Arc;

use common::*;
use symplanner::agents::{prompts, GoalCountDisc, OracleDistanceDisc, OracleNoisy, Replay};
use symplanner::blocksworld::{self, Vocabulary};
use symplanner::harness::{generate, report, run_suite, GenerationConfig, SuiteConfig};
use symplanner::search::{self, StopReason};
use symplanner::*;

fn correction_example() -> (Problem, Vec<String>) {
    let fields = example_fields(prompts::ITERATIVE_CORRECTION, "### Example Input 1:");
    let get = |k: &str| fields.iter().find(|(key, _)| key == k).unwrap().1.clone();
    let vocab = Vocabulary::new(["red", "blue", "orange"]).unwrap();
    let init = blocksworld::parse_state(&get("Initial state"), &vocab).unwrap();
    let goal = blocksworld::parse_goal(&get("Goal"), &vocab).unwrap();
    let p = blocksworld::problem(&["red", "blue", "orange"], init, goal).unwrap();
    let invalid = get("Previous invalid actions");
    let invalid = invalid.rsplit("\": \"").next().unwrap().trim_end_matches(['"', '}']).to_string();
    let fix = example_fields(prompts::ITERATIVE_CORRECTION, "### Example Output 1:")[0].1.clone();
    let script = vec![
        get("Action 1"),
        invalid,
        fix,
        "Pick up the blue block".into(),
        "Stack the blue block onto the orange block".into(),
    ];
    (p, script)
}

fn single_beam(seed: u64) -> SearchConfig {
    SearchConfig {
        proposals: 1,
        beam_width: 1,
        seed,
        ..SearchConfig::default()
    }
}

#[test]
fn correction_example_is_repaired_by_the_loop() {
    let (p, script) = correction_example();
    let mut policy = Replay::new(script);
    let mut disc = GoalCountDisc;
    let out = search::run(&p, &mut policy, &mut disc, &single_beam(0)).unwrap();
    let best = out.best.expect("solved");
    assert_eq!(
        best.signatures(),
        ["unstack(orange,blue)", "putdown(orange)", "pickup(blue)", "stack(blue,orange)"]
    );
    assert_eq!(out.repairs, 1);
    assert_eq!(out.pruned, 0);

    let mut buf = Vec::new();
    out.trace.write_jsonl(&mut buf).unwrap();
    let events: Vec<serde_json::Value> = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(events.iter().enumerate().all(|(i, e)| e["id"] == i as u64));
    let failed = events
        .iter()
        .find(|e| e["event"] == "step_result" && e.get("error").is_some())
        .expect("the scripted invalid action is rejected");
    assert_eq!(failed["error"]["category"]["kind"], "HandNotEmpty");
    let repair = events.iter().find(|e| e["event"] == "repair").unwrap();
    assert_eq!(repair["text"], "Put down the orange block");
    assert_eq!(events.last().unwrap()["event"], "stop");
}

#[test]
fn without_correction_the_branch_dies() {
    let (p, script) = correction_example();
    let mut policy = Replay::new(script);
    let cfg = SearchConfig { ic_enabled: false, ..single_beam(0) };
    let out = search::run(&p, &mut policy, &mut GoalCountDisc, &cfg).unwrap();
    assert!(out.best.is_none());
    assert_eq!(out.repairs, 0);
    assert_eq!(out.stop, StopReason::OpenEmpty);
}

#[test]
fn noisy_oracle_solves_the_sussman_anomaly_optimally() {
    let p = blocksworld::problem(
        &["a", "b", "c"],
        State::parse(["on(c,a)", "ontable(a)", "ontable(b)", "clear(c)", "clear(b)", "handempty"]).unwrap(),
        Goal::parse(["on(a,b)", "on(b,c)"]).unwrap(),
    )
    .unwrap();
    let oracle = Arc::new(Oracle::new(&p).unwrap());
    let mut solved = 0;
    for seed in 0..20 {
        let mut policy = OracleNoisy::new(Arc::clone(&oracle), 0.3);
        let mut disc = OracleDistanceDisc::new(Arc::clone(&oracle));
        let out = search::run(&p, &mut policy, &mut disc, &SearchConfig { seed, ..Default::default() }).unwrap();
        if let Some(best) = out.best {
            assert!(validate(&p, &best).is_success());
            assert!(best.len() >= 6);
            solved += 1;
        }
    }
    assert!(solved >= 18, "{solved}/20");
}

/// Seeded statistical direction on the desk suite: correction and contrastive
/// ranking never hurt.
#[test]
fn components_do_not_degrade_success() {
    let cfg = GenerationConfig {
        blocks: vec![4, 5, 6],
        buckets: vec![2, 4, 6, 8, 10, 12],
        per_bucket: 20,
        seed: 2025,
        ..Default::default()
    };
    let instances = generate(&cfg).unwrap();
    let total = |policy_disc: (PolicySpec, DiscSpec), edit: &dyn Fn(&mut SearchConfig)| {
        let mut search = SearchConfig { seed: 3, ..Default::default() };
        edit(&mut search);
        let suite = SuiteConfig::new(policy_disc.0, policy_disc.1, search);
        report(&run_suite(&instances, &suite, None).unwrap(), None).unwrap().total
    };
    let noisy = PolicySpec::OracleNoisy(0.5);
    let ic_on = total((noisy.clone(), DiscSpec::GoalCount), &|_| {});
    let ic_off = total((noisy.clone(), DiscSpec::GoalCount), &|c| c.ic_enabled = false);
    assert!(ic_on >= ic_off, "IC {ic_on} vs {ic_off}");
    let cr = total((noisy.clone(), DiscSpec::Oracle), &|_| {});
    let rated = total((noisy, DiscSpec::Random), &|c| c.cr_enabled = false);
    assert!(cr >= rated, "CR {cr} vs random ratings {rated}");
}
