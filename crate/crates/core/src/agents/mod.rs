//! Proposal policies and pairwise discriminators.
//!
//! Policies emit natural-language action text; the search layer parses and
//! validates it. Built-in agents are deterministic given the explicit random
//! stream passed to every call. The remote agents drive an
//! OpenAI-compatible chat endpoint with the bundled prompt templates.

mod discriminator;
mod policy;
pub mod prompts;
pub mod remote;
mod remote_agents;
mod spec;

use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::strips::{GroundAction, Plan, Problem, State};
use crate::simulator::TypedError;

pub use discriminator::{GoalCountDisc, OracleDistanceDisc, RandomDisc};
pub use policy::{GoalCountGreedy, OracleNoisy, RandomValid, Replay};
pub use remote::{ChatClient, ChatMessage, ChatParams, RemoteConfig, RemoteError};
pub use remote_agents::{RemoteDiscriminator, RemotePolicy};
pub use spec::{build_agents, DiscSpec, PolicySpec, SpecError};

/// The random stream handed to agents on every call.
pub type AgentRng = ChaCha8Rng;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("remote call failed: {0}")]
    Remote(#[from] RemoteError),
    #[error("no proposal available")]
    NoProposal,
    #[error("unparseable reply: {0}")]
    Unparseable(String),
    #[error("{0}")]
    Precondition(String),
}

/// A partial plan with the states it passes through.
///
/// In symbolic mode `states[i]` is the simulator state after action `i`; in
/// the model-predicted ablation it is whatever the world model predicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateTrajectory {
    pub state: State,
    pub plan: Plan,
    pub states: Vec<State>,
    pub predicted_state_text: Option<String>,
}

impl CandidateTrajectory {
    pub fn root(init: &State) -> Self {
        Self {
            state: init.clone(),
            plan: Plan::default(),
            states: Vec::new(),
            predicted_state_text: None,
        }
    }

    pub fn extended(&self, action: GroundAction, next: State, text: Option<String>) -> Self {
        let mut states = self.states.clone();
        states.push(next.clone());
        Self {
            state: next,
            plan: self.plan.extended(action),
            states,
            predicted_state_text: text,
        }
    }

    /// A finished plan as a candidate (used for the final selection).
    pub fn from_plan(init: &State, plan: &Plan) -> Self {
        let mut c = Self::root(init);
        for a in plan.actions() {
            let next = crate::strips::apply_unchecked(&c.state, a);
            c = c.extended(a.clone(), next, None);
        }
        c
    }
}

/// A proposal that failed to execute, with the simulator's explanation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailedAttempt {
    pub text: String,
    /// The library action the text resolved to, if it did.
    pub action: Option<GroundAction>,
    pub error: TypedError,
}

/// Everything a policy sees when asked for the next action.
#[derive(Debug, Clone, Copy)]
pub struct ProposalContext<'a> {
    pub problem: &'a Problem,
    pub candidate: &'a CandidateTrajectory,
    pub failure_history: &'a [FailedAttempt],
}

impl<'a> ProposalContext<'a> {
    pub fn new(problem: &'a Problem, candidate: &'a CandidateTrajectory) -> Self {
        Self {
            problem,
            candidate,
            failure_history: &[],
        }
    }

    pub fn with_failures(self, failure_history: &'a [FailedAttempt]) -> Self {
        Self {
            failure_history,
            ..self
        }
    }

    pub fn state(&self) -> &'a State {
        &self.candidate.state
    }

    pub(crate) fn failed(&self, a: &GroundAction) -> bool {
        self.failure_history
            .iter()
            .any(|f| f.action.as_ref() == Some(a))
    }
}

/// One proposed action, optionally with the policy's own prediction of the
/// next state (natural-language text).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposal {
    pub action: String,
    pub predicted_state: Option<String>,
}

impl Proposal {
    pub fn text(action: impl Into<String>) -> Self {
        Self {
            action: action.into(),
            predicted_state: None,
        }
    }
}

pub trait Policy: Send {
    fn name(&self) -> String;

    /// Up to `n` candidate next actions.
    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
        n: usize,
        rng: &mut AgentRng,
    ) -> Result<Vec<Proposal>, AgentError>;

    /// One corrected action given a non-empty failure history.
    fn repair(
        &mut self,
        ctx: &ProposalContext<'_>,
        rng: &mut AgentRng,
    ) -> Result<Proposal, AgentError>;
}

/// Probability in [0, 1] that the first candidate is preferred.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PreferenceLogit(f64);

impl PreferenceLogit {
    pub const TIE: Self = Self(0.5);

    /// Clamps into [0, 1]; NaN becomes a tie.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            Self::TIE
        } else {
            Self(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Self {
        Self(1.0 - self.0)
    }
}

pub trait Discriminator: Send {
    fn name(&self) -> String;

    fn prefer(
        &mut self,
        problem: &Problem,
        a: &CandidateTrajectory,
        b: &CandidateTrajectory,
        rng: &mut AgentRng,
    ) -> Result<PreferenceLogit, AgentError>;

    /// Independent 1..=10 score.
    fn rate(
        &mut self,
        problem: &Problem,
        c: &CandidateTrajectory,
        rng: &mut AgentRng,
    ) -> Result<u8, AgentError>;
}

/// Maps the satisfied goal fraction onto 1..=10; the empty goal scores 10.
pub fn goal_fraction_rating(problem: &Problem, s: &State) -> u8 {
    let g = problem.goal();
    if g.is_empty() {
        return 10;
    }
    let frac = g.satisfied_count(s) as f64 / g.len() as f64;
    (1.0 + (9.0 * frac).round()) as u8
}
