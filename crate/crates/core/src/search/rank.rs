//! Contrastive (pairwise tournament) ranking and its rating-based ablation.

use std::collections::BTreeMap;

use log::warn;
use rand::seq::SliceRandom;

use super::trace::{EventKind, Trace};
use crate::agents::{AgentRng, CandidateTrajectory, Discriminator, PreferenceLogit};
use crate::strips::Problem;

/// Rating assigned when the discriminator fails to score a candidate.
pub const NEUTRAL_RATING: u8 = 5;

/// Result of a ranking pass: kept indices in rank order plus every
/// candidate's score.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
    pub queries: usize,
    pub degraded: usize,
}

/// Round-robin opponents over a permutation: candidate `perm[p]` faces the
/// next `k` candidates in the permutation (cyclically).
pub fn opponents_from_permutation(perm: &[usize], k: usize) -> Vec<Vec<usize>> {
    let m = perm.len();
    let k = k.min(m.saturating_sub(1));
    let mut out = vec![Vec::new(); m];
    for (p, &i) in perm.iter().enumerate() {
        out[i] = (1..=k).map(|d| perm[(p + d) % m]).collect();
    }
    out
}

/// Opponent sets for `m` candidates; with `k >= m - 1` everyone faces
/// everyone, otherwise the round-robin follows a seeded shuffle.
pub fn sample_opponents(m: usize, k: usize, rng: &mut AgentRng) -> Vec<Vec<usize>> {
    if k + 1 >= m {
        return (0..m)
            .map(|i| (0..m).filter(|&j| j != i).collect())
            .collect();
    }
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(rng);
    opponents_from_permutation(&perm, k)
}

/// score(i) = Σ_{j ∈ opponents(i)} ℓ_ij, where `logit(i, j)` is only asked
/// for `i < j` and ℓ_ji = 1 − ℓ_ij.
pub fn tournament_scores(
    opponents: &[Vec<usize>],
    mut logit: impl FnMut(usize, usize) -> f64,
) -> Vec<f64> {
    let mut cache: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut get = |i: usize, j: usize| -> f64 {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let l = *cache.entry((lo, hi)).or_insert_with(|| logit(lo, hi));
        if i < j {
            l
        } else {
            1.0 - l
        }
    };
    opponents
        .iter()
        .enumerate()
        .map(|(i, ops)| ops.iter().map(|&j| get(i, j)).sum())
        .collect()
}

/// Indices sorted by descending score; ties by insertion index, then by the
/// lexicographic plan.
fn top_by_score(cands: &[CandidateTrajectory], scores: &[f64], b: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..cands.len()).collect();
    idx.sort_by(|&x, &y| {
        scores[y]
            .total_cmp(&scores[x])
            .then(x.cmp(&y))
            .then_with(|| cands[x].plan.signatures().cmp(&cands[y].plan.signatures()))
    });
    idx.truncate(b);
    idx
}

/// Pairwise tournament over `k` sampled opponents per candidate; returns
/// the `b` best. Discriminator failures count as ties.
#[allow(clippy::too_many_arguments)]
pub fn cr_rank(
    problem: &Problem,
    cands: &[CandidateTrajectory],
    disc: &mut dyn Discriminator,
    b: usize,
    k: usize,
    rng: &mut AgentRng,
    mut trace: Option<(&mut Trace, usize)>,
) -> Ranking {
    let m = cands.len();
    if m <= 1 {
        return Ranking {
            order: (0..m.min(b)).collect(),
            scores: vec![0.0; m],
            queries: 0,
            degraded: 0,
        };
    }
    let opponents = sample_opponents(m, k, rng);
    let mut queries = 0;
    let mut degraded = 0;
    let scores = tournament_scores(&opponents, |i, j| {
        queries += 1;
        let (logit, failed) = match disc.prefer(problem, &cands[i], &cands[j], rng) {
            Ok(l) => (l, false),
            Err(e) => {
                warn!("pairwise query ({i}, {j}) failed: {e}; treating as a tie");
                degraded += 1;
                (PreferenceLogit::TIE, true)
            }
        };
        if let Some((t, step)) = trace.as_mut() {
            t.push(
                *step,
                EventKind::PairwiseQuery {
                    i,
                    j,
                    logit: logit.value(),
                    degraded: failed,
                },
            );
        }
        logit.value()
    });
    Ranking {
        order: top_by_score(cands, &scores, b),
        scores,
        queries,
        degraded,
    }
}

/// Independent 1..=10 ratings instead of pairwise comparisons.
pub fn rating_rank(
    problem: &Problem,
    cands: &[CandidateTrajectory],
    disc: &mut dyn Discriminator,
    b: usize,
    rng: &mut AgentRng,
    mut trace: Option<(&mut Trace, usize)>,
) -> Ranking {
    let mut degraded = 0;
    let scores: Vec<f64> = cands
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (score, failed) = match disc.rate(problem, c, rng) {
                Ok(s) => (s, false),
                Err(e) => {
                    warn!("rating of candidate {i} failed: {e}; using neutral score");
                    degraded += 1;
                    (NEUTRAL_RATING, true)
                }
            };
            if let Some((t, step)) = trace.as_mut() {
                t.push(
                    *step,
                    EventKind::Rating {
                        i,
                        score,
                        degraded: failed,
                    },
                );
            }
            f64::from(score)
        })
        .collect();
    Ranking {
        order: top_by_score(cands, &scores, b),
        scores,
        queries: cands.len(),
        degraded,
    }
}
