use std::io::{self, Write};

use serde::Serialize;

use crate::simulator::TypedError;

/// One search event. `id` increases monotonically within a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub id: u64,
    pub step: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Proposal {
        candidate: usize,
        text: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        predicted_state: Option<String>,
    },
    StepResult {
        candidate: usize,
        text: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        action: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        state: Option<Vec<String>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<TypedError>,
    },
    Repair {
        candidate: usize,
        attempt: usize,
        text: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        error: Option<TypedError>,
    },
    Pruned {
        candidate: usize,
        failures: usize,
    },
    Dropped {
        candidate: usize,
        text: String,
        reason: String,
    },
    PolicyError {
        candidate: usize,
        message: String,
    },
    PairwiseQuery {
        i: usize,
        j: usize,
        logit: f64,
        degraded: bool,
    },
    Rating {
        i: usize,
        score: u8,
        degraded: bool,
    },
    Rank {
        candidates: usize,
        kept: Vec<usize>,
        scores: Vec<f64>,
    },
    Completion {
        plan: Vec<String>,
    },
    FalseCompletion {
        plan: Vec<String>,
        verdict: String,
    },
    Stop {
        reason: String,
    },
}

/// Append-only event log for one search.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    pub fn push(&mut self, step: usize, kind: EventKind) {
        let id = self.events.len() as u64;
        self.events.push(TraceEvent { id, step, kind });
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}
