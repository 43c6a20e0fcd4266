//! Token-efficiency toolkit for reasoning-model response traces.
//!
//! Reasoning models trade accuracy against response length, and most of the
//! levers for that trade-off act on when generation *stops*. This crate
//! implements those levers and the measurement machinery around them:
//!
//! - [`logits`] — post-hoc temperature scaling of the EOS logit, softmax,
//!   and seeded inverse-CDF sampling.
//! - [`policy`] — the four decode-time stopping policies (budget forcing,
//!   exact control, prompt control, auto) as a state machine over any
//!   step-wise token source.
//! - [`reward`] — length-penalized reward shaping: base reward composition,
//!   the linear sweet-spot penalty, the piecewise multi-level penalty, and
//!   group-relative advantage normalization.
//! - [`sim`] — a seeded stochastic generator with closed-form stopping-time
//!   oracles and injectable repetition loops, used to verify everything
//!   else.
//! - [`trace`] — the response-trace data model and line-oriented file
//!   format.
//! - [`analytics`] — repeat rate over wrong answers, length distributions
//!   by correctness, thinking:solution ratios, step counting, and
//!   pareto-front extraction.
//! - [`fixtures`] — embedded tables of reported operating points for
//!   offline analytics checks.
//!
//! The `lenctl` binary exposes all of it as subcommands; see [`cli`]. The
//! crate's `examples/` directory has one runnable example per capability.

pub mod analytics;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod logits;
pub mod policy;
pub mod reward;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
