//! Finite state machines implementing the four test-time length-control
//! strategies over any step-wise token generator.
//!
//! - Budget forcing (BF): a maximum thinking budget; the end-of-thinking
//!   delimiter is forcibly inserted when the budget is reached.
//! - Exact control (EC): thinking is forced to a fixed length; premature
//!   delimiters are removed and one is forced at the target.
//! - Prompt control (PC): a soft constraint carried only in the prompt.
//! - Auto: unrestricted pass-through.
//!
//! The delimiter token is counted in neither segment, so
//! `total_len = thinking_len + solution_len` always refers to content
//! tokens. The terminating EOS token is counted in the phase that emitted
//! it, which makes the geometric stopping-time oracle (`mean length = 1/p`)
//! hold exactly for static generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logits::{sample_token, scale_eos, softmax, EosTemperature, LogitVector};
use crate::reward::level_prompt;
use crate::trace::{Level, Trace};

/// Consecutive suppressions allowed before a run is declared stuck. Only
/// reachable with degenerate configs that force the delimiter with
/// probability ~1 under exact control.
const SUPPRESSION_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    BudgetForcing,
    ExactControl,
    PromptControl,
    Auto,
}

/// Immutable per-run policy configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Thinking-token cap (budget forcing). Tokens.
    pub thinking_budget: Option<u64>,
    /// Exact thinking length (exact control). Tokens.
    pub thinking_target: Option<u64>,
    /// Token count quoted in the prompt (prompt control). Tokens.
    pub prompt_token_hint: Option<u64>,
    /// Hard cap on emitted tokens across both segments. Tokens.
    pub max_total: u64,
    /// Optional floor: EOS / end-of-thinking proposals below it trigger a
    /// wait append instead. Tokens.
    pub min_thinking: Option<u64>,
    /// Text injected by a wait append. Counted as one thinking token.
    pub wait_text: String,
    /// Cap on wait appends per run, so a floor can never loop forever.
    pub max_wait_appends: u64,
}

impl PolicyConfig {
    fn base(kind: PolicyKind, max_total: u64) -> Self {
        Self {
            kind,
            thinking_budget: None,
            thinking_target: None,
            prompt_token_hint: None,
            max_total,
            min_thinking: None,
            wait_text: "Wait".into(),
            max_wait_appends: 4,
        }
    }

    pub fn auto(max_total: u64) -> Self {
        Self::base(PolicyKind::Auto, max_total)
    }

    pub fn budget_forcing(thinking_budget: u64, max_total: u64) -> Self {
        Self {
            thinking_budget: Some(thinking_budget),
            ..Self::base(PolicyKind::BudgetForcing, max_total)
        }
    }

    pub fn exact_control(thinking_target: u64, max_total: u64) -> Self {
        Self {
            thinking_target: Some(thinking_target),
            ..Self::base(PolicyKind::ExactControl, max_total)
        }
    }

    pub fn prompt_control(prompt_token_hint: u64, max_total: u64) -> Self {
        Self {
            prompt_token_hint: Some(prompt_token_hint),
            ..Self::base(PolicyKind::PromptControl, max_total)
        }
    }

    pub fn with_min_thinking(mut self, min: u64) -> Self {
        self.min_thinking = Some(min);
        self
    }

    pub fn with_wait_text(mut self, text: impl Into<String>) -> Self {
        self.wait_text = text.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_total == 0 {
            return Err(Error::Config("max_total must be positive".into()));
        }
        match self.kind {
            PolicyKind::BudgetForcing => {
                let budget = self
                    .thinking_budget
                    .ok_or_else(|| Error::Config("budget forcing requires thinking_budget".into()))?;
                if budget == 0 {
                    return Err(Error::Config("thinking_budget must be positive".into()));
                }
                if budget > self.max_total {
                    return Err(Error::Config(format!(
                        "thinking_budget {budget} exceeds max_total {}",
                        self.max_total
                    )));
                }
            }
            PolicyKind::ExactControl => {
                let target = self
                    .thinking_target
                    .ok_or_else(|| Error::Config("exact control requires thinking_target".into()))?;
                if target == 0 {
                    return Err(Error::Config("thinking_target must be positive".into()));
                }
                // A target at or above the cap could only be met by silent
                // truncation, so it is rejected outright.
                if target >= self.max_total {
                    return Err(Error::Config(format!(
                        "thinking_target {target} must be below max_total {}",
                        self.max_total
                    )));
                }
            }
            PolicyKind::PromptControl => {
                let hint = self
                    .prompt_token_hint
                    .ok_or_else(|| Error::Config("prompt control requires prompt_token_hint".into()))?;
                if hint == 0 {
                    return Err(Error::Config("prompt_token_hint must be positive".into()));
                }
            }
            PolicyKind::Auto => {}
        }
        if let Some(min) = self.min_thinking {
            if min > self.max_total {
                return Err(Error::Config("min_thinking exceeds max_total".into()));
            }
            if let (PolicyKind::BudgetForcing, Some(budget)) = (self.kind, self.thinking_budget) {
                if min > budget {
                    return Err(Error::Config("min_thinking exceeds thinking_budget".into()));
                }
            }
            if let (PolicyKind::ExactControl, Some(target)) = (self.kind, self.thinking_target) {
                if min > target {
                    return Err(Error::Config("min_thinking exceeds thinking_target".into()));
                }
            }
        }
        if self.wait_text.is_empty() {
            return Err(Error::Config("wait_text must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Thinking,
    Solution,
    Done,
}

/// Mutable per-run bookkeeping. Single-stream; never share across runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyState {
    pub phase: Phase,
    pub thinking_emitted: u64,
    pub solution_emitted: u64,
    pub forced_end_think: bool,
    pub suppressed_end_think: u64,
    pub wait_appends: u64,
}

impl PolicyState {
    pub fn new() -> Self {
        Self {
            phase: Phase::Thinking,
            thinking_emitted: 0,
            solution_emitted: 0,
            forced_end_think: false,
            suppressed_end_think: 0,
            wait_appends: 0,
        }
    }

    pub fn total_emitted(&self) -> u64 {
        self.thinking_emitted + self.solution_emitted
    }

    /// True when the run never suppressed, forced, or injected anything.
    pub fn pass_through(&self) -> bool {
        !self.forced_end_think && self.suppressed_end_think == 0 && self.wait_appends == 0
    }
}

impl Default for PolicyState {
    fn default() -> Self {
        Self::new()
    }
}

/// Decision for one proposed token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Append the token to the current segment.
    Emit(usize),
    /// Discard the proposal and resample.
    SuppressAndContinue,
    /// Insert the end-of-thinking delimiter and move to the solution phase.
    ForceEndThink,
    /// Inject the configured wait text into the thinking segment.
    AppendWait,
    /// Terminate the run at the total-token cap.
    Stop,
}

/// Pure decision function: one proposal in, one action out. State is not
/// mutated here; [`run_policy`] applies the chosen action.
pub fn policy_step(
    state: &PolicyState,
    cfg: &PolicyConfig,
    proposed: usize,
    logits: &LogitVector,
) -> Result<Action> {
    if state.phase == Phase::Done {
        return Err(Error::PolicyState("policy stepped after completion".into()));
    }
    if state.phase == Phase::Thinking && state.solution_emitted > 0 {
        return Err(Error::PolicyState(
            "solution tokens recorded while still thinking".into(),
        ));
    }
    if state.total_emitted() >= cfg.max_total {
        return Ok(Action::Stop);
    }
    if state.phase == Phase::Solution {
        return Ok(Action::Emit(proposed));
    }

    let is_end_think = logits.end_think_index() == Some(proposed);
    let is_eos = proposed == logits.eos_index();

    if let Some(min) = cfg.min_thinking {
        if state.thinking_emitted < min
            && (is_eos || is_end_think)
            && state.wait_appends < cfg.max_wait_appends
        {
            return Ok(Action::AppendWait);
        }
    }

    match cfg.kind {
        PolicyKind::BudgetForcing => {
            let budget = cfg.thinking_budget.expect("validated config");
            if state.thinking_emitted >= budget && !is_end_think {
                return Ok(Action::ForceEndThink);
            }
            // A delimiter proposed exactly at the boundary is the model's
            // own token: accepted, not forced.
            Ok(Action::Emit(proposed))
        }
        PolicyKind::ExactControl => {
            let target = cfg.thinking_target.expect("validated config");
            if state.thinking_emitted >= target {
                return Ok(Action::ForceEndThink);
            }
            if is_end_think || is_eos {
                // Premature stopping tokens are removed; generation
                // continues until the target is reached.
                return Ok(Action::SuppressAndContinue);
            }
            Ok(Action::Emit(proposed))
        }
        // Pass-through by construction: soft or no control.
        PolicyKind::PromptControl | PolicyKind::Auto => Ok(Action::Emit(proposed)),
    }
}

/// Renders the question with the policy's prompt-side controls applied:
/// a level prefix when a level is requested, and the token hint suffix
/// under prompt control. Other policies leave the question unchanged.
pub fn render_prompt(question: &str, cfg: &PolicyConfig, level: Level) -> String {
    let mut prompt = match level {
        Level::None => question.to_string(),
        level => format!("{} {question}", level_prompt(level).expect("concrete level")),
    };
    if cfg.kind == PolicyKind::PromptControl {
        let hint = cfg.prompt_token_hint.unwrap_or(0);
        prompt.push_str(&format!(" Think for up to {hint} tokens."));
    }
    prompt
}

/// A step-wise token source the policy driver can run against.
///
/// `next_logits` returns `None` once the source's own step budget is
/// exhausted; the driver then marks the trace truncated. `on_token` reports
/// every token appended to the stream; `counted` mirrors whether the token
/// entered a segment count (the end-of-thinking delimiter does not).
pub trait StepGenerator {
    fn next_logits(&mut self) -> Result<Option<LogitVector>>;
    fn on_token(&mut self, token: usize, counted: bool);
    /// Rendering of one token as text.
    fn render(&self, token: usize) -> String;
    /// Token id fed back to the source when wait text is injected.
    fn wait_token(&self) -> usize;
}

/// Wraps a generator so every step's logits pass through EOS temperature
/// scaling before sampling.
pub struct TempScaled<G> {
    inner: G,
    temp: EosTemperature,
}

impl<G> TempScaled<G> {
    pub fn new(inner: G, temp: EosTemperature) -> Self {
        Self { inner, temp }
    }

    pub fn into_inner(self) -> G {
        self.inner
    }
}

impl<G: StepGenerator> StepGenerator for TempScaled<G> {
    fn next_logits(&mut self) -> Result<Option<LogitVector>> {
        Ok(self.inner.next_logits()?.map(|l| scale_eos(&l, self.temp)))
    }

    fn on_token(&mut self, token: usize, counted: bool) {
        self.inner.on_token(token, counted);
    }

    fn render(&self, token: usize) -> String {
        self.inner.render(token)
    }

    fn wait_token(&self) -> usize {
        self.inner.wait_token()
    }
}

/// Identifying metadata attached to the produced trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub id: String,
    pub prompt: String,
    pub level: Level,
    pub model: String,
    pub dataset: String,
}

impl Default for RunMeta {
    fn default() -> Self {
        Self {
            id: "run-0".into(),
            prompt: String::new(),
            level: Level::None,
            model: "sim".into(),
            dataset: "sim".into(),
        }
    }
}

/// A completed run: the trace plus the final machine state.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub trace: Trace,
    pub state: PolicyState,
}

/// Drives `policy_step` to completion over a generator: sample a proposal,
/// decide, apply. Deterministic given the generator and the caller's seeded
/// RNG. Generator failures propagate with their step index.
pub fn run_policy<G, R>(
    generator: &mut G,
    cfg: &PolicyConfig,
    rng: &mut R,
    meta: &RunMeta,
) -> Result<RunOutcome>
where
    G: StepGenerator,
    R: Rng + ?Sized,
{
    cfg.validate()?;
    let mut state = PolicyState::new();
    let mut thinking_words: Vec<String> = Vec::new();
    let mut solution_words: Vec<String> = Vec::new();
    let mut truncated = false;
    let mut run_of_suppressions = 0u64;

    while state.phase != Phase::Done {
        let Some(logits) = generator.next_logits()? else {
            truncated = true;
            break;
        };
        let probs = softmax(&logits);
        let proposed = sample_token(&probs, rng)?;
        match policy_step(&state, cfg, proposed, &logits)? {
            Action::Stop => {
                truncated = true;
                state.phase = Phase::Done;
            }
            Action::Emit(token) => {
                run_of_suppressions = 0;
                if token == logits.eos_index() {
                    // counted in the phase that emitted it, not rendered
                    match state.phase {
                        Phase::Thinking => state.thinking_emitted += 1,
                        Phase::Solution => state.solution_emitted += 1,
                        Phase::Done => unreachable!(),
                    }
                    generator.on_token(token, true);
                    state.phase = Phase::Done;
                } else if state.phase == Phase::Thinking
                    && logits.end_think_index() == Some(token)
                {
                    // natural delimiter: counted in neither segment
                    generator.on_token(token, false);
                    state.phase = Phase::Solution;
                } else {
                    match state.phase {
                        Phase::Thinking => {
                            thinking_words.push(generator.render(token));
                            state.thinking_emitted += 1;
                        }
                        Phase::Solution => {
                            solution_words.push(generator.render(token));
                            state.solution_emitted += 1;
                        }
                        Phase::Done => unreachable!(),
                    }
                    generator.on_token(token, true);
                }
            }
            Action::SuppressAndContinue => {
                state.suppressed_end_think += 1;
                run_of_suppressions += 1;
                if run_of_suppressions > SUPPRESSION_LIMIT {
                    return Err(Error::PolicyState(format!(
                        "{SUPPRESSION_LIMIT} consecutive suppressions; \
                         generator cannot produce a continuation token"
                    )));
                }
            }
            Action::ForceEndThink => {
                let delimiter = logits.end_think_index().ok_or_else(|| {
                    Error::PolicyState("generator exposes no end-of-thinking token".into())
                })?;
                generator.on_token(delimiter, false);
                state.forced_end_think = true;
                state.phase = Phase::Solution;
            }
            Action::AppendWait => {
                thinking_words.push(cfg.wait_text.clone());
                state.thinking_emitted += 1;
                state.wait_appends += 1;
                generator.on_token(generator.wait_token(), true);
            }
        }
    }

    let trace = Trace {
        id: meta.id.clone(),
        prompt: meta.prompt.clone(),
        level: meta.level,
        thinking_text: thinking_words.join(" "),
        solution_text: solution_words.join(" "),
        thinking_len: state.thinking_emitted,
        solution_len: state.solution_emitted,
        total_len: state.total_emitted(),
        correct: false,
        truncated,
        model: meta.model.clone(),
        dataset: meta.dataset.clone(),
    };
    Ok(RunOutcome { trace, state })
}
