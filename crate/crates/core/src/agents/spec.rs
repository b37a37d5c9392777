use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::remote::{ChatClient, RemoteConfig, RemoteError};
use super::{
    Discriminator, GoalCountDisc, GoalCountGreedy, OracleDistanceDisc, OracleNoisy, Policy,
    RandomDisc, RandomValid, RemoteDiscriminator, RemotePolicy, Replay,
};
use crate::oracle::{Oracle, OracleError};
use crate::strips::Problem;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("unknown agent spec `{0}`")]
    Unknown(String),
    #[error("bad noise level in `{0}` (expected a number in [0, 1])")]
    BadNoise(String),
    #[error("cannot read replay script {path}: {reason}")]
    Replay { path: String, reason: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

/// Which policy to build, as written on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PolicySpec {
    Random,
    Greedy,
    OracleNoisy(f64),
    /// Replay script lines; `path` is kept for display.
    Replay { path: String, lines: Vec<String> },
    Remote,
}

impl PolicySpec {
    pub fn replay_lines<I, S>(lines: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::Replay {
            path: "<inline>".into(),
            lines: lines.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Self::Remote)
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Random => f.write_str("random"),
            Self::Greedy => f.write_str("greedy"),
            Self::OracleNoisy(eps) => write!(f, "oracle-noisy:{eps}"),
            Self::Replay { path, .. } => write!(f, "replay:{path}"),
            Self::Remote => f.write_str("remote"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "random" => return Ok(Self::Random),
            "greedy" => return Ok(Self::Greedy),
            "oracle" => return Ok(Self::OracleNoisy(0.0)),
            "remote" => return Ok(Self::Remote),
            _ => {}
        }
        if let Some(eps) = s.strip_prefix("oracle-noisy:") {
            let eps: f64 = eps.parse().map_err(|_| SpecError::BadNoise(s.into()))?;
            if !(0.0..=1.0).contains(&eps) {
                return Err(SpecError::BadNoise(s.into()));
            }
            return Ok(Self::OracleNoisy(eps));
        }
        if let Some(path) = s.strip_prefix("replay:") {
            let text = std::fs::read_to_string(path).map_err(|e| SpecError::Replay {
                path: path.into(),
                reason: e.to_string(),
            })?;
            let lines = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect();
            return Ok(Self::Replay {
                path: path.into(),
                lines,
            });
        }
        Err(SpecError::Unknown(s.into()))
    }
}

impl From<PolicySpec> for String {
    fn from(p: PolicySpec) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for PolicySpec {
    type Error = SpecError;

    /// Replay specs are not re-read from disk when deserialized from a
    /// record; they come back with an empty script.
    fn try_from(s: String) -> Result<Self, Self::Error> {
        match s.strip_prefix("replay:") {
            Some(path) => Ok(Self::Replay {
                path: path.into(),
                lines: Vec::new(),
            }),
            None => s.parse(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscSpec {
    Oracle,
    GoalCount,
    Random,
    Remote,
}

impl fmt::Display for DiscSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Oracle => "oracle",
            Self::GoalCount => "goalcount",
            Self::Random => "random",
            Self::Remote => "remote",
        })
    }
}

impl FromStr for DiscSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "oracle" => Ok(Self::Oracle),
            "goalcount" => Ok(Self::GoalCount),
            "random" => Ok(Self::Random),
            "remote" => Ok(Self::Remote),
            other => Err(SpecError::Unknown(other.into())),
        }
    }
}

/// Instantiates both agents for one problem. Oracle-backed agents share a
/// single distance table; remote agents share one client.
pub fn build_agents(
    problem: &Problem,
    policy: &PolicySpec,
    disc: DiscSpec,
    remote: Option<&RemoteConfig>,
) -> Result<(Box<dyn Policy>, Box<dyn Discriminator>), SpecError> {
    let needs_oracle = matches!(policy, PolicySpec::OracleNoisy(_)) || disc == DiscSpec::Oracle;
    let oracle = if needs_oracle {
        Some(Arc::new(Oracle::new(problem)?))
    } else {
        None
    };
    let needs_client = matches!(policy, PolicySpec::Remote) || disc == DiscSpec::Remote;
    let client = if needs_client {
        let cfg = remote.cloned().unwrap_or_else(RemoteConfig::from_env);
        Some(Arc::new(ChatClient::new(cfg)?))
    } else {
        None
    };
    let p: Box<dyn Policy> = match policy {
        PolicySpec::Random => Box::new(RandomValid),
        PolicySpec::Greedy => Box::new(GoalCountGreedy),
        PolicySpec::OracleNoisy(eps) => Box::new(OracleNoisy::new(
            oracle.clone().expect("oracle built above"),
            *eps,
        )),
        PolicySpec::Replay { lines, .. } => Box::new(Replay::new(lines.clone())),
        PolicySpec::Remote => Box::new(RemotePolicy::new(client.clone().expect("client built"))),
    };
    let d: Box<dyn Discriminator> = match disc {
        DiscSpec::Oracle => Box::new(OracleDistanceDisc::new(oracle.expect("oracle built above"))),
        DiscSpec::GoalCount => Box::new(GoalCountDisc),
        DiscSpec::Random => Box::new(RandomDisc),
        DiscSpec::Remote => Box::new(RemoteDiscriminator::new(client.expect("client built"))),
    };
    Ok((p, d))
}
