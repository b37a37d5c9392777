use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{report, Bootstrap, ReportTable};
use super::{derive_seed, read_jsonl, HarnessError, InstanceSpec};
use crate::agents::{build_agents, DiscSpec, PolicySpec, RemoteConfig};
use crate::search::{self, SearchConfig, StopReason};
use crate::simulator::{self, Verdict};

/// How every instance of one suite is run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub label: String,
    pub policy: PolicySpec,
    pub disc: DiscSpec,
    /// `seed` is the master seed; instances get derived seeds.
    pub search: SearchConfig,
    pub remote: Option<RemoteConfig>,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    /// Per-instance trace files go here when set.
    pub trace_dir: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(policy: PolicySpec, disc: DiscSpec, search: SearchConfig) -> Self {
        Self {
            label: "full".into(),
            policy,
            disc,
            search,
            remote: None,
            threads: 0,
            trace_dir: None,
        }
    }
}

/// Config snapshot stored with every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub label: String,
    pub policy: String,
    pub disc: String,
    pub search: SearchConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub bucket: usize,
    pub n_blocks: usize,
    pub optimal_length: usize,
    pub config: RunConfig,
    /// The final plan validated to ValidAndGoal.
    pub success: bool,
    pub verdict: Option<String>,
    pub plan: Option<Vec<String>>,
    pub plan_length: Option<usize>,
    pub steps_used: usize,
    pub policy_calls: usize,
    pub discriminator_calls: usize,
    pub done_count: usize,
    pub repairs: usize,
    pub pruned: usize,
    pub false_completions: usize,
    pub stop: Option<StopReason>,
    pub error: Option<String>,
    pub trace_file: Option<String>,
    pub wall_time_ms: f64,
}

impl RunRecord {
    fn empty(inst: &InstanceSpec, config: RunConfig) -> Self {
        Self {
            id: inst.id.clone(),
            bucket: inst.bucket,
            n_blocks: inst.n_blocks,
            optimal_length: inst.optimal_length,
            config,
            success: false,
            verdict: None,
            plan: None,
            plan_length: None,
            steps_used: 0,
            policy_calls: 0,
            discriminator_calls: 0,
            done_count: 0,
            repairs: 0,
            pruned: 0,
            false_completions: 0,
            stop: None,
            error: None,
            trace_file: None,
            wall_time_ms: 0.0,
        }
    }

    /// The record with timing zeroed, for content comparisons.
    pub fn without_wall_time(&self) -> Self {
        Self {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }
}

fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::ValidAndGoal => "ValidAndGoal".into(),
        Verdict::ValidNotGoal => "ValidNotGoal".into(),
        Verdict::Invalid { index, error } => format!("Invalid({index}, {})", error.category),
    }
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect::<String>()
        .split('-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

/// Runs one instance; every failure becomes a record, never an error.
pub fn run_instance(inst: &InstanceSpec, cfg: &SuiteConfig) -> RunRecord {
    let started = Instant::now();
    let search_cfg = SearchConfig {
        seed: derive_seed(cfg.search.seed, &inst.id),
        ..cfg.search.clone()
    };
    let mut rec = RunRecord::empty(
        inst,
        RunConfig {
            label: cfg.label.clone(),
            policy: cfg.policy.to_string(),
            disc: cfg.disc.to_string(),
            search: search_cfg.clone(),
        },
    );
    let result = (|| -> Result<_, String> {
        let p = inst.problem().map_err(|e| e.to_string())?;
        let (mut policy, mut disc) = build_agents(&p, &cfg.policy, cfg.disc, cfg.remote.as_ref())
            .map_err(|e| e.to_string())?;
        let out = search::run(&p, policy.as_mut(), disc.as_mut(), &search_cfg)
            .map_err(|e| e.to_string())?;
        Ok((p, out))
    })();
    match result {
        Ok((p, out)) => {
            if let Some(best) = &out.best {
                let v = simulator::validate(&p, best);
                rec.success = v.is_success();
                rec.verdict = Some(verdict_label(&v));
                rec.plan = Some(best.signatures());
                rec.plan_length = Some(best.len());
            }
            rec.steps_used = out.steps_used;
            rec.policy_calls = out.policy_calls;
            rec.discriminator_calls = out.discriminator_calls;
            rec.done_count = out.done_count();
            rec.repairs = out.repairs;
            rec.pruned = out.pruned;
            rec.false_completions = out.false_completions;
            rec.stop = Some(out.stop);
            if let Some(dir) = &cfg.trace_dir {
                let path = dir.join(format!("{}-{}.jsonl", slug(&cfg.label), inst.id));
                let written = fs::create_dir_all(dir)
                    .and_then(|_| fs::File::create(&path))
                    .and_then(|f| out.trace.write_jsonl(std::io::BufWriter::new(f)));
                match written {
                    Ok(()) => rec.trace_file = Some(path.display().to_string()),
                    Err(e) => warn!("could not write trace {}: {e}", path.display()),
                }
            }
        }
        Err(e) => {
            warn!("instance {} failed: {e}", inst.id);
            rec.error = Some(e);
        }
    }
    rec.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    rec
}

/// Runs every instance not already recorded in `out`, appending records in
/// instance order. Returns one record per instance.
pub fn run_suite(
    instances: &[InstanceSpec],
    cfg: &SuiteConfig,
    out: Option<&Path>,
) -> Result<Vec<RunRecord>, HarnessError> {
    let mut existing: HashMap<String, RunRecord> = HashMap::new();
    if let Some(path) = out.filter(|p| p.exists()) {
        for r in read_jsonl::<RunRecord>(path)? {
            existing.insert(r.id.clone(), r);
        }
    }
    let todo: Vec<&InstanceSpec> = instances
        .iter()
        .filter(|i| !existing.contains_key(&i.id))
        .collect();
    info!(
        "suite {}: {} instances, {} already recorded",
        cfg.label,
        instances.len(),
        instances.len() - todo.len()
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::BadRequest(e.to_string()))?;
    let mut writer = match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            }
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| HarnessError::io(path, e))?;
            Some((path, f))
        }
        None => None,
    };
    let chunk = pool.current_num_threads().max(1) * 2;
    for batch in todo.chunks(chunk) {
        let records: Vec<RunRecord> =
            pool.install(|| batch.par_iter().map(|i| run_instance(i, cfg)).collect());
        for r in records {
            if let Some((path, f)) = writer.as_mut() {
                let mut line = serde_json::to_string(&r).expect("record serializes");
                line.push('\n');
                f.write_all(line.as_bytes())
                    .and_then(|_| f.flush())
                    .map_err(|e| HarnessError::io(path, e))?;
            }
            existing.insert(r.id.clone(), r);
        }
    }
    Ok(instances
        .iter()
        .filter_map(|i| existing.remove(&i.id))
        .collect())
}

/// Full configuration plus the three single-component ablations. The
/// rating ablation uses `cr_disc` for its scores.
pub fn ablation_configs(base: &SuiteConfig, cr_disc: DiscSpec) -> Vec<SuiteConfig> {
    let with = |label: &str, f: &dyn Fn(&mut SuiteConfig)| {
        let mut c = base.clone();
        c.label = label.into();
        f(&mut c);
        c
    };
    vec![
        with("full", &|_| {}),
        with("w/o symbolic", &|c| c.search.symbolic_state = false),
        with("w/o IC", &|c| c.search.ic_enabled = false),
        with("w/o CR", &|c| {
            c.search.cr_enabled = false;
            c.disc = cr_disc;
        }),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub config: SuiteConfig,
    pub table: ReportTable,
    pub records: Vec<RunRecord>,
}

/// Runs each ablation configuration on the same instances and seeds.
pub fn ablation_matrix(
    instances: &[InstanceSpec],
    base: &SuiteConfig,
    cr_disc: DiscSpec,
    out_dir: Option<&Path>,
    bootstrap: Option<Bootstrap>,
) -> Result<Vec<AblationRow>, HarnessError> {
    ablation_configs(base, cr_disc)
        .into_iter()
        .map(|config| {
            let out = out_dir.map(|d| d.join(format!("runs-{}.jsonl", slug(&config.label))));
            let records = run_suite(instances, &config, out.as_deref())?;
            let mut table = report(&records, bootstrap)?;
            table.label = config.label.clone();
            Ok(AblationRow {
                config,
                table,
                records,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate_instances;

    fn oracle_suite() -> SuiteConfig {
        SuiteConfig {
            threads: 2,
            ..SuiteConfig::new(PolicySpec::OracleNoisy(0.0), DiscSpec::Oracle, SearchConfig::default())
        }
    }

    #[test]
    fn oracle_suite_succeeds_and_resumes() {
        let inst = generate_instances(4, &[2, 4], 2, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("runs.jsonl");
        let recs = run_suite(&inst, &oracle_suite(), Some(&out)).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.success && r.plan_length == Some(r.optimal_length)));
        let before = fs::read_to_string(&out).unwrap();
        let again = run_suite(&inst, &oracle_suite(), Some(&out)).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), before);
        assert_eq!(again, recs);
    }

    #[test]
    fn failing_policy_records_failures() {
        let inst = generate_instances(4, &[2], 3, 5).unwrap();
        let cfg = SuiteConfig {
            search: SearchConfig {
                ic_retries: 0,
                ..Default::default()
            },
            ..SuiteConfig::new(
                PolicySpec::replay_lines(["pick up the purple block"]),
                DiscSpec::GoalCount,
                SearchConfig::default(),
            )
        };
        let recs = run_suite(&inst, &cfg, None).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| !r.success && r.error.is_none()));
    }

    #[test]
    fn ablations_share_instances() {
        let inst = generate_instances(4, &[2], 2, 9).unwrap();
        let rows = ablation_matrix(&inst, &oracle_suite(), DiscSpec::Random, None, None).unwrap();
        let labels: Vec<&str> = rows.iter().map(|r| r.table.label.as_str()).collect();
        assert_eq!(labels, ["full", "w/o symbolic", "w/o IC", "w/o CR"]);
        for r in &rows {
            assert_eq!(r.table.buckets.len(), 1);
            assert_eq!(r.records.len(), 2);
        }
        // An always-valid policy never triggers IC.
        let strip = |rs: &[RunRecord]| -> Vec<Option<Vec<String>>> {
            rs.iter().map(|r| r.plan.clone()).collect()
        };
        assert_eq!(strip(&rows[0].records), strip(&rows[2].records));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("w/o IC"), "w-o-ic");
        assert_eq!(slug("full"), "full");
    }
}
