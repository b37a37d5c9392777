//! Instance generation, suite execution and reporting.

mod generate;
mod report;
mod suite;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::agents::SpecError;
use crate::oracle::OracleError;
use crate::strips::ModelError;

pub use generate::{
    block_names, generate, generate_instances, verify_instances, GenerationConfig, InstanceSpec,
    PALETTE,
};
pub use report::{render_comparison, report, BucketRow, Bootstrap, ReportTable};
pub use suite::{
    ablation_configs, ablation_matrix, run_instance, run_suite, AblationRow, RunConfig, RunRecord,
    SuiteConfig,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Json {
        path: String,
        line: usize,
        message: String,
    },
    #[error("could not generate instances for bucket {bucket} within {samples} samples")]
    GenerationExhausted { bucket: usize, samples: usize },
    #[error("bad generation request: {0}")]
    BadRequest(String),
    #[error("instance {id}: recorded optimal length {recorded}, re-solved {found:?}")]
    Verification {
        id: String,
        recorded: usize,
        found: Option<usize>,
    },
    #[error("report needs at least one record")]
    EmptyRecords,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// 64-bit FNV-1a over the master seed and an instance id.
pub fn derive_seed(master: u64, id: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    master
        .to_le_bytes()
        .iter()
        .chain(id.as_bytes())
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Reads one JSON value per non-empty line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line).map_err(|e| HarnessError::Json {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Writes (truncating) one JSON value per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| HarnessError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
