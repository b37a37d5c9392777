//! Pooled beam search: expand every open candidate, repair invalid
//! proposals with typed feedback, rank survivors pairwise, and collect
//! goal-reaching plans until the beam is spent.

mod rank;
mod trace;

use std::collections::HashSet;

use log::{debug, warn};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{
    AgentError, AgentRng, CandidateTrajectory, Discriminator, FailedAttempt, Policy, Proposal,
    ProposalContext,
};
use crate::blocksworld::{self, Vocabulary};
use crate::simulator::{self, TypedError, Verdict};
use crate::strips::{self, GroundAction, Plan, Problem};

pub use rank::{
    cr_rank, opponents_from_permutation, rating_rank, sample_opponents, tournament_scores,
    Ranking, NEUTRAL_RATING,
};
pub use trace::{EventKind, Trace, TraceEvent};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub step_limit: usize,
    pub proposals: usize,
    pub beam_width: usize,
    pub ic_retries: usize,
    pub cr_opponents: usize,
    pub seed: u64,
    pub ic_enabled: bool,
    /// Pairwise ranking; otherwise independent ratings.
    pub cr_enabled: bool,
    /// Simulator states; otherwise the agent's believed (predicted) states.
    pub symbolic_state: bool,
    /// Cap on total policy calls (each requested proposal counts as one).
    pub policy_budget: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            step_limit: 16,
            proposals: 3,
            beam_width: 3,
            ic_retries: 3,
            cr_opponents: 1,
            seed: 0,
            ic_enabled: true,
            cr_enabled: true,
            symbolic_state: true,
            policy_budget: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |what: &str| Err(SearchError::Config(format!("{what} must be at least 1")));
        if self.step_limit == 0 {
            return bad("step limit");
        }
        if self.proposals == 0 {
            return bad("proposals per candidate");
        }
        if self.beam_width == 0 {
            return bad("beam width");
        }
        if self.cr_opponents == 0 {
            return bad("opponent count");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error("policy failed: {0}")]
    Policy(#[from] AgentError),
}

/// Frontier and completed plans.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pools {
    pub open: Vec<CandidateTrajectory>,
    pub done: Vec<Plan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GoalAtInit,
    BeamSpent,
    OpenEmpty,
    StepLimit,
    PolicyBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: Option<Plan>,
    pub done: Vec<Plan>,
    pub steps_used: usize,
    pub policy_calls: usize,
    pub discriminator_calls: usize,
    pub repairs: usize,
    pub pruned: usize,
    pub false_completions: usize,
    /// Largest open pool seen after any ranking pass.
    pub max_open: usize,
    pub stop: StopReason,
    pub trace: Trace,
}

impl SearchOutcome {
    pub fn done_count(&self) -> usize {
        self.done.len()
    }
}

/// Result of an IC loop.
#[derive(Debug, Clone, PartialEq)]
pub enum Repair {
    Valid(CandidateTrajectory),
    Pruned(Vec<FailedAttempt>),
}

/// One search's mutable state: agents, the random stream, counters, trace.
pub struct Searcher<'a> {
    problem: &'a Problem,
    policy: &'a mut dyn Policy,
    disc: &'a mut dyn Discriminator,
    cfg: SearchConfig,
    vocab: Vocabulary,
    rng: AgentRng,
    step: usize,
    policy_calls: usize,
    disc_calls: usize,
    repairs: usize,
    pruned: usize,
    trace: Trace,
}

impl<'a> Searcher<'a> {
    pub fn new(
        problem: &'a Problem,
        policy: &'a mut dyn Policy,
        disc: &'a mut dyn Discriminator,
        cfg: SearchConfig,
    ) -> Result<Self, SearchError> {
        cfg.validate()?;
        Ok(Self {
            problem,
            policy,
            disc,
            vocab: Vocabulary::from_problem(problem),
            rng: AgentRng::seed_from_u64(cfg.seed),
            cfg,
            step: 0,
            policy_calls: 0,
            disc_calls: 0,
            repairs: 0,
            pruned: 0,
            trace: Trace::default(),
        })
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn policy_calls(&self) -> usize {
        self.policy_calls
    }

    fn budget_left(&self) -> usize {
        self.cfg
            .policy_budget
            .map_or(usize::MAX, |cap| cap.saturating_sub(self.policy_calls))
    }

    /// Turns proposal text into a successor. The action is checked against
    /// the candidate's state. In symbolic mode that state is the
    /// simulator's; otherwise it is the agent's own belief, and the next
    /// belief is the policy's predicted state when it gave a parseable one.
    fn attempt(
        &self,
        c: &CandidateTrajectory,
        p: &Proposal,
    ) -> Result<(GroundAction, CandidateTrajectory), FailedAttempt> {
        let failed = |action: Option<GroundAction>, error: TypedError| FailedAttempt {
            text: p.action.clone(),
            action,
            error,
        };
        let a = simulator::resolve_text(self.problem, &p.action).map_err(|e| failed(None, e))?;
        let next = match simulator::step(&c.state, &a) {
            simulator::StepResult::Next(next) => next,
            simulator::StepResult::Failure(e) => return Err(failed(Some(a), e)),
        };
        if self.cfg.symbolic_state {
            let succ = c.extended(a.clone(), next, None);
            return Ok((a, succ));
        }
        let predicted = p
            .predicted_state
            .as_deref()
            .and_then(|t| blocksworld::parse_state(t, &self.vocab).ok())
            .unwrap_or(next);
        let succ = c.extended(a.clone(), predicted, p.predicted_state.clone());
        Ok((a, succ))
    }

    fn log_result(&mut self, candidate: usize, p: &Proposal, r: &Result<(GroundAction, CandidateTrajectory), FailedAttempt>) {
        let kind = match r {
            Ok((a, succ)) => EventKind::StepResult {
                candidate,
                text: p.action.clone(),
                action: Some(a.signature()),
                state: Some(succ.state.canonical()),
                error: None,
            },
            Err(f) => EventKind::StepResult {
                candidate,
                text: p.action.clone(),
                action: f.action.as_ref().map(GroundAction::signature),
                state: None,
                error: Some(f.error.clone()),
            },
        };
        self.trace.push(self.step, kind);
    }

    /// Asks for N proposals from candidate `ci` and steps each one. Invalid
    /// proposals come back as `Err` entries for IC.
    pub fn expand(
        &mut self,
        ci: usize,
        c: &CandidateTrajectory,
    ) -> Result<Vec<(Proposal, Result<CandidateTrajectory, FailedAttempt>)>, SearchError> {
        let n = self.cfg.proposals.min(self.budget_left());
        if n == 0 {
            return Ok(Vec::new());
        }
        self.policy_calls += n;
        let ctx = ProposalContext::new(self.problem, c);
        let proposals = self.policy.propose(&ctx, n, &mut self.rng)?;
        let mut out = Vec::with_capacity(proposals.len());
        for p in proposals.into_iter().take(n) {
            self.trace.push(
                self.step,
                EventKind::Proposal {
                    candidate: ci,
                    text: p.action.clone(),
                    predicted_state: p.predicted_state.clone(),
                },
            );
            let r = self.attempt(c, &p);
            self.log_result(ci, &p, &r);
            out.push((p, r.map(|(_, succ)| succ)));
        }
        Ok(out)
    }

    /// Up to R error-conditioned repairs of one failed proposal; each
    /// failure extends that proposal's own history.
    pub fn ic_loop(&mut self, ci: usize, c: &CandidateTrajectory, first: FailedAttempt) -> Repair {
        let mut history = vec![first];
        for attempt in 1..=self.cfg.ic_retries {
            if self.budget_left() == 0 {
                break;
            }
            self.policy_calls += 1;
            let ctx = ProposalContext::new(self.problem, c).with_failures(&history);
            let proposal = match self.policy.repair(&ctx, &mut self.rng) {
                Ok(p) => p,
                Err(e) => {
                    warn!("repair call failed: {e}");
                    self.trace.push(
                        self.step,
                        EventKind::PolicyError {
                            candidate: ci,
                            message: e.to_string(),
                        },
                    );
                    continue;
                }
            };
            match self.attempt(c, &proposal) {
                Ok((_, succ)) => {
                    self.trace.push(
                        self.step,
                        EventKind::Repair {
                            candidate: ci,
                            attempt,
                            text: proposal.action,
                            error: None,
                        },
                    );
                    self.repairs += 1;
                    return Repair::Valid(succ);
                }
                Err(f) => {
                    self.trace.push(
                        self.step,
                        EventKind::Repair {
                            candidate: ci,
                            attempt,
                            text: proposal.action,
                            error: Some(f.error.clone()),
                        },
                    );
                    history.push(f);
                }
            }
        }
        self.trace.push(
            self.step,
            EventKind::Pruned {
                candidate: ci,
                failures: history.len(),
            },
        );
        self.pruned += 1;
        Repair::Pruned(history)
    }

    /// Ranks to width `b` with the configured scheme.
    pub fn rank(&mut self, cands: &[CandidateTrajectory], b: usize) -> Ranking {
        let r = if self.cfg.cr_enabled {
            cr_rank(
                self.problem,
                cands,
                self.disc,
                b,
                self.cfg.cr_opponents,
                &mut self.rng,
                Some((&mut self.trace, self.step)),
            )
        } else {
            rating_rank(
                self.problem,
                cands,
                self.disc,
                b,
                &mut self.rng,
                Some((&mut self.trace, self.step)),
            )
        };
        self.disc_calls += r.queries;
        r
    }

    pub fn run(mut self) -> Result<SearchOutcome, SearchError> {
        let p = self.problem;
        let mut pools = Pools {
            open: vec![CandidateTrajectory::root(p.init())],
            done: Vec::new(),
        };
        let mut b = self.cfg.beam_width;
        let mut steps_used = 0;
        let mut false_completions = 0;
        let mut max_open = 1;

        let mut stop = StopReason::StepLimit;
        if strips::entails(p.init(), p.goal()) {
            self.trace.push(0, EventKind::Completion { plan: Vec::new() });
            pools.done.push(Plan::default());
            pools.open.clear();
            stop = StopReason::GoalAtInit;
        }

        for t in 1..=self.cfg.step_limit {
            if stop == StopReason::GoalAtInit {
                break;
            }
            if b == 0 {
                stop = StopReason::BeamSpent;
                break;
            }
            if pools.open.is_empty() {
                stop = StopReason::OpenEmpty;
                break;
            }
            if self.budget_left() == 0 {
                stop = StopReason::PolicyBudget;
                break;
            }
            self.step = t;
            steps_used = t;

            let open = std::mem::take(&mut pools.open);
            let mut successors: Vec<CandidateTrajectory> = Vec::new();
            let mut seen: HashSet<(String, usize)> = HashSet::new();
            let mut admit = |succ: CandidateTrajectory, out: &mut Vec<CandidateTrajectory>| {
                if seen.insert((succ.state.key(), succ.plan.len())) {
                    out.push(succ);
                }
            };
            for (ci, c) in open.iter().enumerate() {
                for (prop, r) in self.expand(ci, c)? {
                    match r {
                        Ok(succ) => admit(succ, &mut successors),
                        Err(f) if self.cfg.ic_enabled => {
                            if let Repair::Valid(succ) = self.ic_loop(ci, c, f) {
                                admit(succ, &mut successors);
                            }
                        }
                        Err(f) => {
                            self.trace.push(
                                t,
                                EventKind::Dropped {
                                    candidate: ci,
                                    text: prop.action,
                                    reason: f.error.to_string(),
                                },
                            );
                        }
                    }
                }
            }
            debug_assert!(successors.len() <= open.len() * self.cfg.proposals);

            // Survivors that already fit the beam keep insertion order and
            // skip the discriminator.
            let order: Vec<usize> = if successors.len() <= b {
                (0..successors.len()).collect()
            } else {
                self.rank(&successors, b).order
            };
            self.trace.push(
                t,
                EventKind::Rank {
                    candidates: successors.len(),
                    kept: order.clone(),
                    scores: Vec::new(),
                },
            );

            let mut slots: Vec<Option<CandidateTrajectory>> =
                successors.into_iter().map(Some).collect();
            for i in order {
                let succ = slots[i].take().expect("rank indices are distinct");
                if !strips::entails(&succ.state, p.goal()) {
                    pools.open.push(succ);
                    continue;
                }
                b = b.saturating_sub(1);
                let plan = succ.plan;
                match simulator::validate(p, &plan) {
                    Verdict::ValidAndGoal => {
                        self.trace.push(
                            t,
                            EventKind::Completion {
                                plan: plan.signatures(),
                            },
                        );
                        pools.done.push(plan);
                    }
                    verdict => {
                        debug_assert!(
                            !self.cfg.symbolic_state,
                            "simulator-checked plan failed validation"
                        );
                        debug!("predicted completion does not validate: {verdict:?}");
                        self.trace.push(
                            t,
                            EventKind::FalseCompletion {
                                plan: plan.signatures(),
                                verdict: serde_json::to_string(&verdict)
                                    .unwrap_or_else(|_| format!("{verdict:?}")),
                            },
                        );
                        false_completions += 1;
                    }
                }
            }
            max_open = max_open.max(pools.open.len());
            debug_assert!(pools.open.len() <= b);
        }
        if stop == StopReason::StepLimit {
            if b == 0 {
                stop = StopReason::BeamSpent;
            } else if pools.open.is_empty() && steps_used < self.cfg.step_limit {
                stop = StopReason::OpenEmpty;
            }
        }
        self.trace.push(
            steps_used,
            EventKind::Stop {
                reason: serde_json::to_value(stop)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
            },
        );

        let best = match pools.done.len() {
            0 => None,
            1 => Some(pools.done[0].clone()),
            _ => {
                let cands: Vec<CandidateTrajectory> = pools
                    .done
                    .iter()
                    .map(|plan| CandidateTrajectory::from_plan(p.init(), plan))
                    .collect();
                let r = self.rank(&cands, 1);
                Some(pools.done[r.order[0]].clone())
            }
        };
        Ok(SearchOutcome {
            best,
            done: pools.done,
            steps_used,
            policy_calls: self.policy_calls,
            discriminator_calls: self.disc_calls,
            repairs: self.repairs,
            pruned: self.pruned,
            false_completions,
            max_open,
            stop,
            trace: self.trace,
        })
    }
}

/// Runs one search to completion.
pub fn run(
    problem: &Problem,
    policy: &mut dyn Policy,
    disc: &mut dyn Discriminator,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    Searcher::new(problem, policy, disc, cfg.clone())?.run()
}
