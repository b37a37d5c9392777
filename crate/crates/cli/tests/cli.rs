use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symplanner"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const SUSSMAN: &str = r#"{"domain":"blocksworld","objects":["a","b","c"],
"init":["on(c,a)","ontable(a)","ontable(b)","clear(c)","clear(b)","handempty"],
"goal":["on(a,b)","on(b,c)"]}"#;

fn workdir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.json"), SUSSMAN).unwrap();
    dir
}

#[test]
fn validate_exit_codes_follow_the_verdict() {
    let dir = workdir();
    let d = dir.path();
    fs::write(
        d.join("good.txt"),
        "unstack(c,a)\nput down the c block\npickup(b)\nstack(b,c)\npickup(a)\nstack(a,b)\n",
    )
    .unwrap();
    fs::write(d.join("short.json"), r#"["unstack(c,a)", "putdown(c)"]"#).unwrap();
    fs::write(d.join("bad.txt"), "pick up the a block\n").unwrap();
    fs::write(d.join("junk.txt"), "dance with the a block\n").unwrap();

    let out = run(&["validate", "--problem", "p.json", "--plan", "good.txt"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["verdict"], "ValidAndGoal");

    let out = run(&["validate", "--problem", "p.json", "--plan", "short.json"], d);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["verdict"], "ValidNotGoal");

    let out = run(&["validate", "--problem", "p.json", "--plan", "bad.txt"], d);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "Invalid");
    assert_eq!(v["error"]["category"]["kind"], "NotClear");

    let out = run(&["validate", "--problem", "p.json", "--plan", "junk.txt"], d);
    assert_eq!(stdout_json(&out)["error"]["category"]["kind"], "MalformedAction");

    let out = run(&["validate", "--problem", "missing.json", "--plan", "good.txt"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_and_plan_agree_on_sussman() {
    let dir = workdir();
    let d = dir.path();
    let out = run(&["oracle", "--problem", "p.json"], d);
    assert_eq!(stdout_json(&out)["length"], 6);

    let out = run(
        &["plan", "--problem", "p.json", "--policy", "oracle", "--disc", "oracle", "--trace", "t.jsonl"],
        d,
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["success"], true);
    assert_eq!(v["plan"].as_array().unwrap().len(), 6);

    let trace = fs::read_to_string(d.join("t.jsonl")).unwrap();
    let ids: Vec<u64> = trace
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_u64().unwrap())
        .collect();
    assert!(!ids.is_empty());
    assert!(ids.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn plan_flags_reach_the_search() {
    let dir = workdir();
    let d = dir.path();
    let out = run(
        &[
            "plan", "--problem", "p.json", "--policy", "oracle-noisy:0.5", "--disc", "goalcount",
            "--no-ic", "--no-cr", "--no-symbolic", "--steps", "4", "--seed", "9",
        ],
        d,
    );
    let v = stdout_json(&out);
    assert_eq!(v["repairs"], 0);
    assert!(v["steps_used"].as_u64().unwrap() <= 4);
    // Six actions cannot fit in four steps.
    assert_eq!(v["success"], false);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_bench_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(
        &["gen", "--blocks", "4", "--buckets", "2,4", "--per-bucket", "2", "--seed", "3", "--out", "inst.jsonl"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(d.join("inst.jsonl")).unwrap().lines().count(), 4);

    let bench = |out_file: &str| {
        run(
            &[
                "bench", "--instances", "inst.jsonl", "--policy", "oracle-noisy:0.3", "--disc",
                "goalcount", "--seed", "5", "--out", out_file,
            ],
            d,
        )
    };
    assert!(bench("a.jsonl").status.success());
    assert!(bench("b.jsonl").status.success());
    let strip = |name: &str| -> Vec<serde_json::Value> {
        fs::read_to_string(d.join(name))
            .unwrap()
            .lines()
            .map(|l| {
                let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("wall_time_ms");
                v
            })
            .collect()
    };
    assert_eq!(strip("a.jsonl"), strip("b.jsonl"));

    let out = run(&["report", "--in", "a.jsonl", "--format", "json"], d);
    let v = stdout_json(&out);
    assert_eq!(v["count"], 4);
    assert_eq!(v["buckets"].as_array().unwrap().len(), 2);
    let out = run(&["report", "--in", "a.jsonl"], d);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Step Count"));

    let out = run(
        &[
            "bench", "--instances", "inst.jsonl", "--policy", "oracle", "--disc", "oracle", "--ablations",
            "--out", "abl", "--format", "json",
        ],
        d,
    );
    assert!(out.status.success());
    let rows = stdout_json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 4);
    assert_eq!(fs::read_dir(d.join("abl")).unwrap().count(), 4);
}

#[test]
fn bad_specs_are_usage_errors() {
    let dir = workdir();
    let out = run(&["plan", "--problem", "p.json", "--policy", "telepathy"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("telepathy"));
}
