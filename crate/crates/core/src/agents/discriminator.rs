use std::cmp::Ordering;
use std::sync::Arc;

use rand::Rng;

use super::{
    goal_fraction_rating, AgentError, AgentRng, CandidateTrajectory, Discriminator,
    PreferenceLogit,
};
use crate::oracle::Oracle;
use crate::strips::Problem;

/// 1 if `a` is closer, 0 if `b` is closer, 0.5 on ties.
fn logit_from(order: Ordering) -> PreferenceLogit {
    match order {
        Ordering::Less => PreferenceLogit::new(1.0),
        Ordering::Greater => PreferenceLogit::new(0.0),
        Ordering::Equal => PreferenceLogit::TIE,
    }
}

/// Prefers the candidate with the smaller true distance to the goal;
/// unreachable states count as infinitely far.
#[derive(Debug, Clone)]
pub struct OracleDistanceDisc {
    oracle: Arc<Oracle>,
}

impl OracleDistanceDisc {
    pub fn new(oracle: Arc<Oracle>) -> Self {
        Self { oracle }
    }

    fn dist(&self, c: &CandidateTrajectory) -> usize {
        self.oracle.distance(&c.state).unwrap_or(usize::MAX)
    }
}

impl Discriminator for OracleDistanceDisc {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn prefer(
        &mut self,
        _problem: &Problem,
        a: &CandidateTrajectory,
        b: &CandidateTrajectory,
        _rng: &mut AgentRng,
    ) -> Result<PreferenceLogit, AgentError> {
        Ok(logit_from(self.dist(a).cmp(&self.dist(b))))
    }

    fn rate(
        &mut self,
        problem: &Problem,
        c: &CandidateTrajectory,
        _rng: &mut AgentRng,
    ) -> Result<u8, AgentError> {
        Ok(goal_fraction_rating(problem, &c.state))
    }
}

/// Prefers the candidate satisfying more goal atoms.
#[derive(Debug, Clone, Default)]
pub struct GoalCountDisc;

impl Discriminator for GoalCountDisc {
    fn name(&self) -> String {
        "goalcount".into()
    }

    fn prefer(
        &mut self,
        problem: &Problem,
        a: &CandidateTrajectory,
        b: &CandidateTrajectory,
        _rng: &mut AgentRng,
    ) -> Result<PreferenceLogit, AgentError> {
        let g = problem.goal();
        // More satisfied atoms is better, hence the reversed comparison.
        Ok(logit_from(
            g.satisfied_count(&b.state).cmp(&g.satisfied_count(&a.state)),
        ))
    }

    fn rate(
        &mut self,
        problem: &Problem,
        c: &CandidateTrajectory,
        _rng: &mut AgentRng,
    ) -> Result<u8, AgentError> {
        Ok(goal_fraction_rating(problem, &c.state))
    }
}

/// Uniform logits and ratings from the seeded stream.
#[derive(Debug, Clone, Default)]
pub struct RandomDisc;

impl Discriminator for RandomDisc {
    fn name(&self) -> String {
        "random".into()
    }

    fn prefer(
        &mut self,
        _problem: &Problem,
        _a: &CandidateTrajectory,
        _b: &CandidateTrajectory,
        rng: &mut AgentRng,
    ) -> Result<PreferenceLogit, AgentError> {
        Ok(PreferenceLogit::new(rng.gen::<f64>()))
    }

    fn rate(
        &mut self,
        _problem: &Problem,
        _c: &CandidateTrajectory,
        rng: &mut AgentRng,
    ) -> Result<u8, AgentError> {
        Ok(rng.gen_range(1..=10))
    }
}
