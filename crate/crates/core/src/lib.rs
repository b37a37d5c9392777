//! STRIPS blocksworld planning with a policy/discriminator loop around a
//! symbolic simulator.

pub mod agents;
pub mod blocksworld;
pub mod harness;
pub mod oracle;
pub mod search;
pub mod simulator;
pub mod strips;

pub use agents::{
    build_agents, AgentRng, CandidateTrajectory, DiscSpec, Discriminator, Policy, PolicySpec,
    PreferenceLogit, Proposal,
};
pub use oracle::Oracle;
pub use search::{SearchConfig, SearchOutcome};
pub use simulator::{validate, ErrorCategory, TypedError, Verdict};
pub use strips::{Atom, Goal, GroundAction, Plan, Problem, ProblemFile, State};
