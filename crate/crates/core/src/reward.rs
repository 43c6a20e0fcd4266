//! Reward math for length-penalized training: base reward composition,
//! the linear sweet-spot penalty, the multi-level piecewise penalty, total
//! reward, level prompts/thresholds, and group-relative advantages.
//!
//! All operations are pure and stateless.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{Level, Trace, TraceSet};

/// Which length a penalty is computed over. Reported response lengths
/// usually include both segments, so `Total` is the default; `ThinkingOnly`
/// is exposed because the alternative reading is defensible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthBasis {
    #[default]
    Total,
    ThinkingOnly,
}

/// Penalty parameters. The reference operating point is
/// `alpha = 0.1, beta = 0.3, l_max = 4096`.
///
/// Deserializes from key-value config files; omitted keys take these
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyConfig {
    /// Strength of the linear penalty applied to wrong answers.
    pub alpha: f64,
    /// Flat penalty for correct answers that exceed their level threshold.
    pub beta: f64,
    /// Maximum response length in tokens.
    pub l_max: u64,
    pub length_basis: LengthBasis,
}

impl PenaltyConfig {
    pub fn new(alpha: f64, beta: f64, l_max: u64) -> Result<Self> {
        let cfg = Self {
            alpha,
            beta,
            l_max,
            length_basis: LengthBasis::Total,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::Config(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.l_max == 0 {
            return Err(Error::Config("l_max must be positive".into()));
        }
        Ok(())
    }
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.3,
            l_max: 4096,
            length_basis: LengthBasis::Total,
        }
    }
}

/// Weighted combination of the accuracy and format rewards:
/// `0.9 * r_acc + 0.1 * r_format`.
pub fn base_reward(r_acc: f64, r_format: f64) -> Result<f64> {
    for (name, v) in [("r_acc", r_acc), ("r_format", r_format)] {
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(Error::Validation(format!("{name} must be in [0, 1], got {v}")));
        }
    }
    Ok(0.9 * r_acc + 0.1 * r_format)
}

/// Linear length penalty `alpha * L / l_max`.
pub fn sweet_spot_penalty(length: u64, cfg: &PenaltyConfig) -> Result<f64> {
    cfg.validate()?;
    if length > cfg.l_max {
        return Err(Error::Validation(format!(
            "length {length} exceeds l_max {}; lengths beyond max context are producer bugs",
            cfg.l_max
        )));
    }
    Ok(cfg.alpha * length as f64 / cfg.l_max as f64)
}

/// Exact level-prompt strings paired with each penalty level.
pub fn level_prompt(level: Level) -> Result<&'static str> {
    match level {
        Level::Short => Ok("[Response Length: SHORT] Provide only the essential steps."),
        Level::Moderate => Ok("[Response Length: MODERATE] Provide a concise but clear solution."),
        Level::Long => Ok("[Response Length: LONG] Provide a detailed step-by-step solution."),
        Level::None => Err(Error::Validation("no prompt for level NONE".into())),
    }
}

/// Length threshold for a level: `floor(l_max/4)`, `floor(l_max/2)`, or
/// `l_max` for SHORT, MODERATE, LONG.
pub fn level_threshold(level: Level, cfg: &PenaltyConfig) -> Result<u64> {
    match level {
        Level::Short => Ok(cfg.l_max / 4),
        Level::Moderate => Ok(cfg.l_max / 2),
        Level::Long => Ok(cfg.l_max),
        Level::None => Err(Error::Validation("no threshold for level NONE".into())),
    }
}

/// Piecewise multi-level penalty:
/// 0 for correct answers at or below their level threshold, `beta` for
/// correct answers above it, and the linear penalty for wrong answers.
pub fn multilevel_penalty(level: Level, length: u64, correct: bool, cfg: &PenaltyConfig) -> Result<f64> {
    if level == Level::None {
        return Err(Error::Validation(
            "multi-level penalty requires a concrete level".into(),
        ));
    }
    if !correct {
        return sweet_spot_penalty(length, cfg);
    }
    cfg.validate()?;
    if length > cfg.l_max {
        return Err(Error::Validation(format!(
            "length {length} exceeds l_max {}",
            cfg.l_max
        )));
    }
    let threshold = level_threshold(level, cfg)?;
    Ok(if length <= threshold { 0.0 } else { cfg.beta })
}

/// Final reward `r = r_hat - penalty`.
pub fn total_reward(r_hat: f64, penalty: f64) -> f64 {
    r_hat - penalty
}

/// Group-relative advantages `(r_i - mean) / (std + epsilon)` with the
/// population standard deviation. An all-equal group yields all zeros.
pub fn group_advantages(rewards: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    if rewards.len() < 2 {
        return Err(Error::Validation(format!(
            "advantage group needs at least 2 rewards, got {}",
            rewards.len()
        )));
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(Error::Validation("rewards must be finite".into()));
    }
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Validation(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Ok(vec![0.0; rewards.len()]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / (std + epsilon)).collect())
}

/// One GRPO group: raw rewards and their normalized advantages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl GroupSample {
    pub fn new(rewards: Vec<f64>, epsilon: f64) -> Result<Self> {
        let advantages = group_advantages(&rewards, epsilon)?;
        Ok(Self { rewards, advantages })
    }
}

/// Fully scored response: inputs, composed reward, penalty, and total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRecord {
    pub id: String,
    pub r_acc: f64,
    pub r_format: f64,
    pub r_hat: f64,
    pub penalty: f64,
    pub r_total: f64,
    pub length: u64,
    pub level: Level,
    pub correct: bool,
}

impl RewardRecord {
    /// Scores one response with the multi-level penalty.
    pub fn compute(
        id: impl Into<String>,
        r_acc: f64,
        r_format: f64,
        level: Level,
        length: u64,
        correct: bool,
        cfg: &PenaltyConfig,
    ) -> Result<Self> {
        let r_hat = base_reward(r_acc, r_format)?;
        let penalty = multilevel_penalty(level, length, correct, cfg)?;
        Ok(Self {
            id: id.into(),
            r_acc,
            r_format,
            r_hat,
            penalty,
            r_total: total_reward(r_hat, penalty),
            length,
            level,
            correct,
        })
    }
}

/// Length of a trace under the configured basis.
pub fn penalized_length(trace: &Trace, cfg: &PenaltyConfig) -> u64 {
    match cfg.length_basis {
        LengthBasis::Total => trace.total_len,
        LengthBasis::ThinkingOnly => trace.thinking_len,
    }
}

/// Scores every trace in a set. The accuracy reward is the correctness bit;
/// the format reward is 1 when the response reached a solution segment.
/// `level_override`, when given, wins over each trace's own level; a trace
/// without any level is an error.
pub fn score_traces(
    set: &TraceSet,
    cfg: &PenaltyConfig,
    level_override: Option<Level>,
) -> Result<Vec<RewardRecord>> {
    set.traces
        .iter()
        .map(|trace| {
            let level = match level_override {
                Some(level) => level,
                None => trace.level,
            };
            if level == Level::None {
                return Err(Error::Validation(format!(
                    "trace `{}` has no level; pass a level override",
                    trace.id
                )));
            }
            let r_acc = if trace.correct { 1.0 } else { 0.0 };
            let r_format = if trace.solution_len > 0 { 1.0 } else { 0.0 };
            RewardRecord::compute(
                trace.id.clone(),
                r_acc,
                r_format,
                level,
                penalized_length(trace, cfg),
                trace.correct,
                cfg,
            )
        })
        .collect()
}
