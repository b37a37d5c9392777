use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{AgentError, AgentRng, Policy, Proposal, ProposalContext};
use crate::blocksworld::render_action;
use crate::oracle::Oracle;
use crate::strips::{self, applicable_actions, GroundAction};

fn say(a: &GroundAction) -> Proposal {
    Proposal::text(render_action(a))
}

fn pick<'a>(options: &[&'a GroundAction], rng: &mut AgentRng) -> Option<&'a GroundAction> {
    options.choose(rng).copied()
}

fn untried<'a>(ctx: &ProposalContext<'a>) -> Vec<&'a GroundAction> {
    applicable_actions(ctx.state(), ctx.problem)
        .into_iter()
        .filter(|a| !ctx.failed(a))
        .collect()
}

/// Uniform over the applicable actions.
#[derive(Debug, Default, Clone)]
pub struct RandomValid;

impl Policy for RandomValid {
    fn name(&self) -> String {
        "random".into()
    }

    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
        n: usize,
        rng: &mut AgentRng,
    ) -> Result<Vec<Proposal>, AgentError> {
        let options = applicable_actions(ctx.state(), ctx.problem);
        Ok((0..n).filter_map(|_| pick(&options, rng)).map(say).collect())
    }

    fn repair(
        &mut self,
        ctx: &ProposalContext<'_>,
        rng: &mut AgentRng,
    ) -> Result<Proposal, AgentError> {
        pick(&untried(ctx), rng)
            .map(say)
            .ok_or(AgentError::NoProposal)
    }
}

/// One-step lookahead on the number of satisfied goal atoms, ties broken at
/// random.
#[derive(Debug, Default, Clone)]
pub struct GoalCountGreedy;

impl GoalCountGreedy {
    fn best<'a>(
        ctx: &ProposalContext<'_>,
        options: &[&'a GroundAction],
        rng: &mut AgentRng,
    ) -> Option<&'a GroundAction> {
        let goal = ctx.problem.goal();
        let scored: Vec<(usize, &GroundAction)> = options
            .iter()
            .map(|a| (goal.satisfied_count(&strips::apply(ctx.state(), a)), *a))
            .collect();
        let top = scored.iter().map(|(s, _)| *s).max()?;
        let ties: Vec<&GroundAction> = scored
            .into_iter()
            .filter(|(s, _)| *s == top)
            .map(|(_, a)| a)
            .collect();
        pick(&ties, rng)
    }
}

impl Policy for GoalCountGreedy {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
        n: usize,
        rng: &mut AgentRng,
    ) -> Result<Vec<Proposal>, AgentError> {
        let options = applicable_actions(ctx.state(), ctx.problem);
        Ok((0..n)
            .filter_map(|_| Self::best(ctx, &options, rng))
            .map(say)
            .collect())
    }

    fn repair(
        &mut self,
        ctx: &ProposalContext<'_>,
        rng: &mut AgentRng,
    ) -> Result<Proposal, AgentError> {
        Self::best(ctx, &untried(ctx), rng)
            .map(say)
            .ok_or(AgentError::NoProposal)
    }
}

/// The oracle's next optimal action with probability `1 - noise`; otherwise
/// a uniform draw from the whole grounded library, which is mostly
/// inapplicable and so stands in for a hallucinating proposer.
#[derive(Debug, Clone)]
pub struct OracleNoisy {
    oracle: Arc<Oracle>,
    noise: f64,
}

impl OracleNoisy {
    pub fn new(oracle: Arc<Oracle>, noise: f64) -> Self {
        Self {
            oracle,
            noise: noise.clamp(0.0, 1.0),
        }
    }

    /// Best applicable action not yet tried: minimal successor distance,
    /// canonical order among equals.
    fn best<'a>(&'a self, ctx: &ProposalContext<'_>) -> Option<&'a GroundAction> {
        self.oracle
            .successor_distances(ctx.state())
            .into_iter()
            .filter(|(a, _)| !ctx.failed(a))
            .min_by_key(|(_, d)| d.unwrap_or(usize::MAX))
            .map(|(a, _)| a)
    }

    fn noisy<'a>(&'a self, ctx: &ProposalContext<'_>, rng: &mut AgentRng) -> Option<&'a GroundAction> {
        let pool: Vec<&GroundAction> = self
            .oracle
            .problem()
            .actions()
            .iter()
            .filter(|a| !ctx.failed(a))
            .collect();
        pick(&pool, rng)
    }

    fn draw(&self, ctx: &ProposalContext<'_>, rng: &mut AgentRng) -> Option<Proposal> {
        // Always consume one draw so the stream does not depend on the branch.
        let roll: f64 = rng.gen();
        if roll < self.noise {
            self.noisy(ctx, rng).map(say)
        } else {
            self.best(ctx).or_else(|| self.noisy(ctx, rng)).map(say)
        }
    }
}

impl Policy for OracleNoisy {
    fn name(&self) -> String {
        format!("oracle-noisy:{}", self.noise)
    }

    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
        n: usize,
        rng: &mut AgentRng,
    ) -> Result<Vec<Proposal>, AgentError> {
        Ok((0..n).filter_map(|_| self.draw(ctx, rng)).collect())
    }

    fn repair(
        &mut self,
        ctx: &ProposalContext<'_>,
        rng: &mut AgentRng,
    ) -> Result<Proposal, AgentError> {
        self.draw(ctx, rng).ok_or(AgentError::NoProposal)
    }
}

/// Scripted action texts, consumed in order by both proposals and repairs.
#[derive(Debug, Clone, Default)]
pub struct Replay {
    script: Vec<String>,
    cursor: usize,
    cycle: bool,
}

impl Replay {
    pub fn new<I, S>(script: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            script: script.into_iter().map(Into::into).collect(),
            cursor: 0,
            cycle: false,
        }
    }

    /// Restart from the top when the script runs out.
    pub fn cycling(mut self) -> Self {
        self.cycle = true;
        self
    }

    fn next_line(&mut self) -> Option<String> {
        if self.cursor >= self.script.len() {
            if !self.cycle || self.script.is_empty() {
                return None;
            }
            self.cursor = 0;
        }
        let line = self.script[self.cursor].clone();
        self.cursor += 1;
        Some(line)
    }
}

impl Policy for Replay {
    fn name(&self) -> String {
        "replay".into()
    }

    fn propose(
        &mut self,
        _ctx: &ProposalContext<'_>,
        n: usize,
        _rng: &mut AgentRng,
    ) -> Result<Vec<Proposal>, AgentError> {
        Ok((0..n)
            .map_while(|_| self.next_line())
            .map(Proposal::text)
            .collect())
    }

    fn repair(
        &mut self,
        _ctx: &ProposalContext<'_>,
        _rng: &mut AgentRng,
    ) -> Result<Proposal, AgentError> {
        self.next_line()
            .map(Proposal::text)
            .ok_or(AgentError::NoProposal)
    }
}
