use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{HarnessError, RunRecord};

/// Percentile bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub resamples: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self {
            resamples: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub bucket: usize,
    pub count: usize,
    pub successes: usize,
    /// Percent in [0, 100].
    pub rate: f64,
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub label: String,
    pub buckets: Vec<BucketRow>,
    pub count: usize,
    pub successes: usize,
    pub total: f64,
    pub total_ci: Option<(f64, f64)>,
}

fn percent(successes: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * successes as f64 / n as f64
    }
}

/// 95% percentile interval of the resampled success rate.
fn bootstrap_ci(flags: &[bool], b: Bootstrap, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let n = flags.len();
    if n == 0 || b.resamples == 0 {
        return (0.0, 0.0);
    }
    let mut rates: Vec<f64> = (0..b.resamples)
        .map(|_| {
            let hits = (0..n).filter(|_| flags[rng.gen_range(0..n)]).count();
            percent(hits, n)
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    let at = |q: f64| rates[((q * (rates.len() - 1) as f64).round() as usize).min(rates.len() - 1)];
    (at(0.025), at(0.975))
}

/// Per-bucket success rates and the overall mean over all records.
pub fn report(records: &[RunRecord], bootstrap: Option<Bootstrap>) -> Result<ReportTable, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::EmptyRecords);
    }
    let mut by_bucket: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    for r in records {
        by_bucket.entry(r.bucket).or_default().push(r.success);
    }
    let mut rng = bootstrap.map(|b| ChaCha8Rng::seed_from_u64(b.seed));
    let buckets = by_bucket
        .iter()
        .map(|(&bucket, flags)| {
            let successes = flags.iter().filter(|&&f| f).count();
            BucketRow {
                bucket,
                count: flags.len(),
                successes,
                rate: percent(successes, flags.len()),
                ci: bootstrap
                    .zip(rng.as_mut())
                    .map(|(b, rng)| bootstrap_ci(flags, b, rng)),
            }
        })
        .collect();
    let flags: Vec<bool> = records.iter().map(|r| r.success).collect();
    let successes = flags.iter().filter(|&&f| f).count();
    let total_ci = bootstrap
        .zip(rng.as_mut())
        .map(|(b, rng)| bootstrap_ci(&flags, b, rng));
    Ok(ReportTable {
        label: records[0].config.label.clone(),
        buckets,
        count: records.len(),
        successes,
        total: percent(successes, records.len()),
        total_ci,
    })
}

fn cell(rate: f64, ci: Option<(f64, f64)>) -> String {
    match ci {
        Some((lo, hi)) => format!("{rate:.1} ({lo:.1}, {hi:.1})"),
        None => format!("{rate:.1}"),
    }
}

impl ReportTable {
    /// Aligned text table with one row.
    pub fn render(&self) -> String {
        render_comparison(std::slice::from_ref(self))
    }
}

/// One row per table; bucket columns are the union over all tables.
pub fn render_comparison(tables: &[ReportTable]) -> String {
    let mut cols: Vec<usize> = tables
        .iter()
        .flat_map(|t| t.buckets.iter().map(|b| b.bucket))
        .collect();
    cols.sort_unstable();
    cols.dedup();

    let mut header = vec!["Step Count".to_string()];
    header.extend(cols.iter().map(|c| c.to_string()));
    header.push("Total".into());
    let mut rows = vec![header];
    for t in tables {
        let mut row = vec![t.label.clone()];
        for c in &cols {
            row.push(
                t.buckets
                    .iter()
                    .find(|b| b.bucket == *c)
                    .map_or_else(|| "-".into(), |b| cell(b.rate, b.ci)),
            );
        }
        row.push(cell(t.total, t.total_ci));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (n, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", line.join(" | ").trim_end());
        if n == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("-+-"));
        }
    }
    out
}
