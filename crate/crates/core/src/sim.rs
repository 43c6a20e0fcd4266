//! Seeded stochastic token generator standing in for a language model.
//!
//! Logits are static per step (so stopping times are geometric and admit
//! closed-form oracles) except inside an injected repetition loop, where the
//! block's next token is boosted to probability ~1. Tokens are opaque
//! integers rendered as `t<i>` words.
//!
//! Vocabulary layout: index 0 is EOS, 1 the end-of-thinking delimiter, 2 the
//! wait token, and 3.. are interchangeable body tokens. Sampling randomness
//! comes from a ChaCha8 generator seeded with the configured 64-bit seed;
//! run `k` of a batch draws from stream `k` of that same seed, so any
//! implementation of ChaCha8 with the same seed/stream split reproduces the
//! traces byte for byte.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logits::{EosTemperature, LogitVector};
use crate::policy::{run_policy, PolicyConfig, RunMeta, RunOutcome, StepGenerator, TempScaled};
use crate::trace::{Level, TraceSet, SCHEMA_VERSION};

pub const EOS_TOKEN: usize = 0;
pub const END_THINK_TOKEN: usize = 1;
pub const WAIT_TOKEN: usize = 2;
pub const FIRST_BODY_TOKEN: usize = 3;

/// Logit given to disabled special tokens; its exp underflows to exactly
/// zero mass after max-subtraction.
pub const DISABLED_LOGIT: f64 = -1e30;

/// Boost added to the loop block's next token while a loop is active.
pub const LOOP_BOOST: f64 = 20.0;

/// Injected verbatim repetition: from token `start` onward the tokens of
/// `block` are emitted cyclically for `cycles` full repetitions (forever
/// when `None`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopInject {
    pub start: u64,
    pub block: Vec<usize>,
    pub cycles: Option<u64>,
}

/// Simulator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Total vocabulary size, at least 4 (eos + delimiter + wait + 1 body).
    pub vocab_size: usize,
    pub eos_logit: f64,
    /// `None` disables natural end-of-thinking proposals; the token still
    /// exists so policies can force it.
    pub end_think_logit: Option<f64>,
    /// Shared logit of every body token.
    pub body_logit: f64,
    /// `None` disables natural wait-token proposals (the default).
    pub wait_logit: Option<f64>,
    pub loop_inject: Option<LoopInject>,
    pub seed: u64,
    /// Cap on generated (counted) tokens per run.
    pub max_steps: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            vocab_size: 16,
            eos_logit: 0.0,
            end_think_logit: None,
            body_logit: 0.0,
            wait_logit: None,
            loop_inject: None,
            seed: 0,
            max_steps: 4096,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 4 {
            return Err(Error::Config(format!(
                "vocab_size must be at least 4, got {}",
                self.vocab_size
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        for (name, v) in [
            ("eos_logit", Some(self.eos_logit)),
            ("end_think_logit", self.end_think_logit),
            ("body_logit", Some(self.body_logit)),
            ("wait_logit", self.wait_logit),
        ] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Config(format!("{name} must be finite")));
                }
            }
        }
        if let Some(li) = &self.loop_inject {
            if li.block.is_empty() {
                return Err(Error::Config("loop block must be non-empty".into()));
            }
            if li.cycles == Some(0) {
                return Err(Error::Config("loop cycles must be positive".into()));
            }
            if let Some(bad) = li.block.iter().find(|t| **t >= self.vocab_size) {
                return Err(Error::Config(format!(
                    "loop block token {bad} outside vocab of {}",
                    self.vocab_size
                )));
            }
        }
        Ok(())
    }
}

/// Visible generator state: how many counted tokens have been produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimState {
    pub step: u64,
}

fn active_loop_token(cfg: &SimConfig, step: u64) -> Option<usize> {
    let li = cfg.loop_inject.as_ref()?;
    if step < li.start {
        return None;
    }
    let offset = step - li.start;
    let block_len = li.block.len() as u64;
    if let Some(cycles) = li.cycles {
        if offset >= cycles * block_len {
            return None;
        }
    }
    Some(li.block[(offset % block_len) as usize])
}

/// Logits for the current step: static base scores, plus the loop boost on
/// the block's next token while a loop is active.
pub fn sim_logits(state: &SimState, cfg: &SimConfig) -> Result<LogitVector> {
    cfg.validate()?;
    if state.step >= cfg.max_steps {
        return Err(Error::Generator {
            step: state.step,
            message: format!("step budget of {} exhausted", cfg.max_steps),
        });
    }
    let mut scores = vec![cfg.body_logit; cfg.vocab_size];
    scores[EOS_TOKEN] = cfg.eos_logit;
    scores[END_THINK_TOKEN] = cfg.end_think_logit.unwrap_or(DISABLED_LOGIT);
    scores[WAIT_TOKEN] = cfg.wait_logit.unwrap_or(DISABLED_LOGIT);
    if let Some(token) = active_loop_token(cfg, state.step) {
        scores[token] += LOOP_BOOST;
    }
    LogitVector::new(scores, EOS_TOKEN, Some(END_THINK_TOKEN))
}

/// Expected stopping time of a geometric process with per-step success
/// probability `p_eos` (the terminating token counts as one step).
pub fn expected_length(p_eos: f64) -> Result<f64> {
    if !(p_eos.is_finite() && p_eos > 0.0 && p_eos <= 1.0) {
        return Err(Error::Validation(format!(
            "p_eos must be in (0, 1], got {p_eos}"
        )));
    }
    Ok(1.0 / p_eos)
}

/// Step-wise source over a [`SimConfig`].
#[derive(Debug, Clone)]
pub struct SimGenerator {
    cfg: SimConfig,
    state: SimState,
}

impl SimGenerator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            state: SimState::default(),
        })
    }

    pub fn state(&self) -> SimState {
        self.state
    }
}

impl StepGenerator for SimGenerator {
    fn next_logits(&mut self) -> Result<Option<LogitVector>> {
        if self.state.step >= self.cfg.max_steps {
            return Ok(None);
        }
        sim_logits(&self.state, &self.cfg).map(Some)
    }

    fn on_token(&mut self, _token: usize, counted: bool) {
        if counted {
            self.state.step += 1;
        }
    }

    fn render(&self, token: usize) -> String {
        format!("t{token}")
    }

    fn wait_token(&self) -> usize {
        WAIT_TOKEN
    }
}

fn run_one(
    cfg: &SimConfig,
    policy: &PolicyConfig,
    eos_temp: Option<EosTemperature>,
    run_index: u64,
) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run_index);
    let generator = SimGenerator::new(cfg.clone())?;
    // T = 1 divides by exactly 1.0, so the unified path is bit-identical
    // to not scaling at all.
    let temp = match eos_temp {
        Some(t) => t,
        None => EosTemperature::new(1.0)?,
    };
    let mut scaled = TempScaled::new(generator, temp);
    let meta = RunMeta {
        id: format!("sim-{:016x}-{run_index:05}", cfg.seed),
        prompt: String::new(),
        level: Level::None,
        model: "sim".into(),
        dataset: "sim".into(),
    };
    run_policy(&mut scaled, policy, &mut rng, &meta)
}

/// One seeded run: simulator logits, optional EOS temperature scaling,
/// policy control, inverse-CDF sampling. Deterministic per seed.
///
/// Simulated problems are never solved, so the trace's `correct` flag is
/// always false.
pub fn generate(
    cfg: &SimConfig,
    policy: &PolicyConfig,
    eos_temp: Option<EosTemperature>,
) -> Result<RunOutcome> {
    run_one(cfg, policy, eos_temp, 0)
}

/// A batch of independent runs; run `k` uses RNG stream `k`. The set's max
/// context is whichever cap binds first.
pub fn run_many(
    cfg: &SimConfig,
    policy: &PolicyConfig,
    eos_temp: Option<EosTemperature>,
    runs: u64,
) -> Result<TraceSet> {
    policy.validate()?;
    let mut traces = Vec::with_capacity(runs as usize);
    for run_index in 0..runs {
        traces.push(run_one(cfg, policy, eos_temp, run_index)?.trace);
    }
    Ok(TraceSet {
        schema_version: SCHEMA_VERSION.into(),
        max_context: cfg.max_steps.min(policy.max_total),
        tokenizer: "whitespace".into(),
        traces,
    })
}
