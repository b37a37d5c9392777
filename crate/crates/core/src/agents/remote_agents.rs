use std::sync::Arc;

use log::warn;

use super::prompts;
use super::remote::{ChatClient, ChatMessage};
use super::{
    AgentError, AgentRng, CandidateTrajectory, Discriminator, Policy, PreferenceLogit, Proposal,
    ProposalContext,
};
use crate::blocksworld::{self, Vocabulary};
use crate::strips::Problem;

/// Policy backed by a chat model using the generation and correction
/// prompts.
#[derive(Debug, Clone)]
pub struct RemotePolicy {
    client: Arc<ChatClient>,
}

impl RemotePolicy {
    pub fn new(client: Arc<ChatClient>) -> Self {
        Self { client }
    }

    fn ask(&self, prompt: String) -> Result<String, AgentError> {
        let params = self.client.default_params();
        Ok(self.client.chat(&[ChatMessage::user(prompt)], &params)?)
    }

    /// Rule-based parsing first; optionally the parsing prompt for phrasings
    /// the rules reject. The result is re-rendered canonically.
    fn normalize_action(&self, problem: &Problem, text: String) -> String {
        let vocab = Vocabulary::from_problem(problem);
        if !self.client.config().llm_parse_fallback
            || blocksworld::parse_action_call(&text, &vocab).is_ok()
        {
            return text;
        }
        match self.ask(prompts::parsing_prompt(&text)) {
            Ok(reply) => prompts::parse_action_list(&reply)
                .and_then(|parts| canonical_from_parts(&parts))
                .unwrap_or(text),
            Err(e) => {
                warn!("action-parse fallback failed: {e}");
                text
            }
        }
    }

    fn proposal_from(&self, problem: &Problem, reply: &str, k: usize) -> Proposal {
        let (action, predicted_state) = prompts::parse_action_reply(reply, k);
        Proposal {
            action: self.normalize_action(problem, action),
            predicted_state,
        }
    }
}

fn canonical_from_parts(parts: &[String]) -> Option<String> {
    match parts {
        [op, x] if op == "pickup" => Some(format!("pick up the {x} block")),
        [op, x] if op == "putdown" => Some(format!("put down the {x} block")),
        [op, x, y] if op == "stack" => Some(format!("stack the {x} block on top of the {y} block")),
        [op, x, y] if op == "unstack" => {
            Some(format!("unstack the {x} block from on top of the {y} block"))
        }
        _ => None,
    }
}

impl Policy for RemotePolicy {
    fn name(&self) -> String {
        format!("remote:{}", self.client.config().model)
    }

    fn propose(
        &mut self,
        ctx: &ProposalContext<'_>,
        n: usize,
        _rng: &mut AgentRng,
    ) -> Result<Vec<Proposal>, AgentError> {
        let k = ctx.candidate.plan.len() + 1;
        let prompt = prompts::generation_prompt(ctx.problem, ctx.candidate);
        (0..n)
            .map(|_| {
                let reply = self.ask(prompt.clone())?;
                Ok(self.proposal_from(ctx.problem, &reply, k))
            })
            .collect()
    }

    fn repair(
        &mut self,
        ctx: &ProposalContext<'_>,
        _rng: &mut AgentRng,
    ) -> Result<Proposal, AgentError> {
        if ctx.failure_history.is_empty() {
            return Err(AgentError::Precondition(
                "repair needs a non-empty failure history".into(),
            ));
        }
        let k = ctx.candidate.plan.len() + 1;
        let reply = self.ask(prompts::correction_prompt(
            ctx.problem,
            ctx.candidate,
            ctx.failure_history,
        ))?;
        let proposal = self.proposal_from(ctx.problem, &reply, k);
        let repeated = ctx.failure_history.iter().any(|f| {
            f.text.trim().eq_ignore_ascii_case(proposal.action.trim())
        });
        if repeated {
            warn!("remote repair repeated a failed action: {}", proposal.action);
        }
        Ok(proposal)
    }
}

/// Discriminator backed by the ranking and rating prompts.
#[derive(Debug, Clone)]
pub struct RemoteDiscriminator {
    client: Arc<ChatClient>,
}

impl RemoteDiscriminator {
    pub fn new(client: Arc<ChatClient>) -> Self {
        Self { client }
    }

    fn ask_parsed<T>(
        &self,
        prompt: String,
        parse: impl Fn(&str) -> Option<T>,
    ) -> Result<T, AgentError> {
        let params = self.client.default_params();
        let messages = [ChatMessage::user(prompt)];
        let mut last = String::new();
        for _ in 0..=self.client.config().disc_retries {
            let reply = self.client.chat(&messages, &params)?;
            if let Some(v) = parse(&reply) {
                return Ok(v);
            }
            warn!("unparseable discriminator reply: {reply:?}");
            last = reply;
        }
        Err(AgentError::Unparseable(last))
    }
}

impl Discriminator for RemoteDiscriminator {
    fn name(&self) -> String {
        format!("remote:{}", self.client.config().model)
    }

    fn prefer(
        &mut self,
        problem: &Problem,
        a: &CandidateTrajectory,
        b: &CandidateTrajectory,
        _rng: &mut AgentRng,
    ) -> Result<PreferenceLogit, AgentError> {
        let choice = self.ask_parsed(prompts::ranking_prompt(problem, a, b), |r| {
            prompts::parse_conclusion(r).filter(|&o| o == 1 || o == 2)
        })?;
        Ok(PreferenceLogit::new(if choice == 1 { 1.0 } else { 0.0 }))
    }

    fn rate(
        &mut self,
        problem: &Problem,
        c: &CandidateTrajectory,
        _rng: &mut AgentRng,
    ) -> Result<u8, AgentError> {
        let raw = self.ask_parsed(prompts::rating_prompt(problem, c), prompts::parse_rating)?;
        if !(1..=10).contains(&raw) {
            warn!("rating {raw} out of range, clamping");
        }
        Ok(raw.clamp(1, 10) as u8)
    }
}
