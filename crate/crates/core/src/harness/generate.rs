use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{derive_seed, HarnessError};
use crate::blocksworld;
use crate::oracle::{self, ForwardDistances, MAX_OBJECTS};
use crate::strips::{Atom, Goal, Problem, ProblemFile};

/// Block names; the first four match the prompt examples.
pub const PALETTE: [&str; 6] = ["red", "blue", "orange", "yellow", "green", "purple"];

pub fn block_names(n: usize) -> Vec<String> {
    PALETTE.iter().take(n).map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub id: String,
    pub n_blocks: usize,
    pub problem: ProblemFile,
    pub optimal_length: usize,
    pub bucket: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn problem(&self) -> Result<Problem, HarnessError> {
        Ok(self.problem.clone().into_problem()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    /// Block counts to draw from, uniformly per sampled initial state.
    pub blocks: Vec<usize>,
    pub buckets: Vec<usize>,
    pub per_bucket: usize,
    pub seed: u64,
    /// Total (init, goal) pairs tried before giving up.
    pub sample_cap: usize,
    /// Goals tried against each sampled initial state.
    pub goals_per_init: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            blocks: vec![4],
            buckets: vec![2, 4, 6, 8, 10, 12],
            per_bucket: 20,
            seed: 0,
            sample_cap: 200_000,
            goals_per_init: 16,
        }
    }
}

/// Goal: a random non-empty subset of the `on`/`ontable` atoms of a second
/// random configuration.
fn sample_goal(names: &[String], rng: &mut ChaCha8Rng) -> Goal {
    let target = blocksworld::random_configuration(names, rng);
    let pool: Vec<&Atom> = target
        .iter()
        .filter(|a| matches!(a.predicate(), "on" | "ontable"))
        .collect();
    loop {
        let picked: Vec<Atom> = pool
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|a| (*a).clone())
            .collect();
        if !picked.is_empty() {
            return Goal::new(picked);
        }
    }
}

/// Single block count convenience over [`generate`].
pub fn generate_instances(
    n_blocks: usize,
    buckets: &[usize],
    per_bucket: usize,
    seed: u64,
) -> Result<Vec<InstanceSpec>, HarnessError> {
    generate(&GenerationConfig {
        blocks: vec![n_blocks],
        buckets: buckets.to_vec(),
        per_bucket,
        seed,
        ..Default::default()
    })
}

/// Rejection-samples random (init, goal) pairs and keeps those whose
/// optimal length fills a requested bucket. Output is grouped by bucket in
/// request order.
pub fn generate(cfg: &GenerationConfig) -> Result<Vec<InstanceSpec>, HarnessError> {
    if cfg.blocks.is_empty() || cfg.blocks.iter().any(|n| !(2..=MAX_OBJECTS).contains(n)) {
        return Err(HarnessError::BadRequest(format!(
            "block counts must lie in 2..={MAX_OBJECTS}, got {:?}",
            cfg.blocks
        )));
    }
    if let Some(&b) = cfg.buckets.iter().find(|&&b| !(1..=16).contains(&b)) {
        return Err(HarnessError::BadRequest(format!("bucket {b} outside 1..=16")));
    }
    let mut buckets: Vec<usize> = Vec::new();
    for &b in &cfg.buckets {
        if !buckets.contains(&b) {
            buckets.push(b);
        }
    }
    if cfg.per_bucket == 0 || buckets.is_empty() {
        return Ok(Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found: BTreeMap<usize, Vec<(usize, Problem)>> = BTreeMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut samples = 0;
    let full = |found: &BTreeMap<usize, Vec<(usize, Problem)>>, b: usize| {
        found.get(&b).map_or(0, Vec::len) >= cfg.per_bucket
    };
    while !buckets.iter().all(|&b| full(&found, b)) {
        if samples >= cfg.sample_cap {
            let bucket = buckets.iter().copied().find(|&b| !full(&found, b)).unwrap_or(0);
            return Err(HarnessError::GenerationExhausted { bucket, samples });
        }
        let n = *cfg.blocks.choose(&mut rng).expect("non-empty");
        let names = block_names(n);
        let init = blocksworld::random_configuration(&names, &mut rng);
        let base = blocksworld::problem(&names, init.clone(), Goal::default())
            .map_err(|e| HarnessError::BadRequest(e.to_string()))?;
        let forward = ForwardDistances::new(&base)?;
        for _ in 0..cfg.goals_per_init.max(1) {
            samples += 1;
            let goal = sample_goal(&names, &mut rng);
            let Some(len) = forward.optimal_length(&goal) else {
                continue;
            };
            if !buckets.contains(&len) || full(&found, len) {
                continue;
            }
            let goal_key = goal
                .atoms()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",");
            if !seen.insert((init.key(), goal_key)) {
                continue;
            }
            let p = base.with_init_goal(init.clone(), goal)?;
            found.entry(len).or_default().push((n, p));
        }
    }

    let mut out = Vec::new();
    for b in buckets {
        for (i, (n, p)) in found.remove(&b).unwrap_or_default().into_iter().enumerate() {
            let id = format!("b{b:02}-{i:03}");
            out.push(InstanceSpec {
                seed: derive_seed(cfg.seed, &id),
                id,
                n_blocks: n,
                problem: p.to_file(),
                optimal_length: b,
                bucket: b,
            });
        }
    }
    Ok(out)
}

/// Re-solves every instance from scratch and checks the recorded length.
pub fn verify_instances(instances: &[InstanceSpec]) -> Result<(), HarnessError> {
    for inst in instances {
        let p = inst.problem()?;
        let found = oracle::solve_optimal(&p)?.map(|plan| plan.len());
        if found != Some(inst.optimal_length) || inst.bucket != inst.optimal_length {
            return Err(HarnessError::Verification {
                id: inst.id.clone(),
                recorded: inst.optimal_length,
                found,
            });
        }
    }
    Ok(())
}
