//! Trace-set statistics: repeat rate over wrong answers, length
//! distributions by correctness, thinking:solution ratios, step counting,
//! and pareto-front extraction.
//!
//! Everything here is a pure fold over an immutable [`TraceSet`].

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::trace::{Trace, TraceSet};

/// Default minimum repeated-block size in whitespace tokens. Long enough to
/// ignore short interjections, short enough to catch paragraph loops.
pub const DEFAULT_MIN_BLOCK_TOKENS: usize = 20;

/// Default number of occurrences that makes a block a repetition loop.
pub const DEFAULT_REPEAT_K: usize = 3;

/// Default histogram bin width in tokens.
pub const DEFAULT_BIN_WIDTH: u64 = 256;

/// Keywords whose occurrences are counted as reasoning steps.
pub const STEP_KEYWORDS: [&str; 10] = [
    "But",
    "Wait,",
    "Alternatively,",
    "Perhaps",
    "First,",
    "Okay,",
    "Given",
    "The",
    "Therefore,",
    "So,",
];

/// One histogram bin: `[start, start + bin_width)`. Empty bins are omitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub start: u64,
    pub count: u64,
}

/// Length distribution of a trace set, bucketed by correctness. Sums are
/// kept as integers so the weighted-mean identity is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub n_all: u64,
    pub n_correct: u64,
    pub n_wrong: u64,
    pub sum_all: u64,
    pub sum_correct: u64,
    pub sum_wrong: u64,
    pub mean_all: f64,
    /// Absent (not zero) when the bucket is empty.
    pub mean_correct: Option<f64>,
    pub mean_wrong: Option<f64>,
    pub bin_width: u64,
    pub histogram: Vec<HistogramBin>,
}

/// Length stats with the default bin width.
pub fn length_stats(set: &TraceSet) -> Result<LengthStats> {
    length_stats_binned(set, DEFAULT_BIN_WIDTH)
}

pub fn length_stats_binned(set: &TraceSet, bin_width: u64) -> Result<LengthStats> {
    if set.is_empty() {
        return Err(Error::Validation("length stats over an empty set".into()));
    }
    if bin_width == 0 {
        return Err(Error::Config("bin_width must be positive".into()));
    }
    let mut sum_correct = 0u64;
    let mut sum_wrong = 0u64;
    let mut n_correct = 0u64;
    let mut n_wrong = 0u64;
    let mut bins: HashMap<u64, u64> = HashMap::new();
    for trace in &set.traces {
        if trace.correct {
            n_correct += 1;
            sum_correct += trace.total_len;
        } else {
            n_wrong += 1;
            sum_wrong += trace.total_len;
        }
        *bins.entry(trace.total_len / bin_width * bin_width).or_insert(0) += 1;
    }
    let n_all = n_correct + n_wrong;
    let sum_all = sum_correct + sum_wrong;
    let mut histogram: Vec<HistogramBin> = bins
        .into_iter()
        .map(|(start, count)| HistogramBin { start, count })
        .collect();
    histogram.sort_by_key(|b| b.start);
    Ok(LengthStats {
        n_all,
        n_correct,
        n_wrong,
        sum_all,
        sum_correct,
        sum_wrong,
        mean_all: sum_all as f64 / n_all as f64,
        mean_correct: (n_correct > 0).then(|| sum_correct as f64 / n_correct as f64),
        mean_wrong: (n_wrong > 0).then(|| sum_wrong as f64 / n_wrong as f64),
        bin_width,
        histogram,
    })
}

/// Thinking tokens per solution token, with a guard for empty solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinkSolutionRatio {
    pub ratio: f64,
    pub zero_solution: bool,
}

pub fn think_solution_ratio(trace: &Trace) -> ThinkSolutionRatio {
    ThinkSolutionRatio {
        ratio: trace.thinking_len as f64 / (trace.solution_len.max(1)) as f64,
        zero_solution: trace.solution_len == 0,
    }
}

/// Total occurrences of the step keywords: case-sensitive substring
/// matches, each keyword counted independently.
pub fn count_steps(text: &str) -> u64 {
    STEP_KEYWORDS
        .iter()
        .map(|kw| text.matches(kw).count() as u64)
        .sum()
}

/// Evidence for a repetition verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatEvidence {
    /// SHA-256 (hex) of the repeated block's normalized text.
    pub block_hash: String,
    pub occurrences: u64,
    pub block_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatVerdict {
    pub trace_id: String,
    pub repetitive: bool,
    pub evidence: Option<RepeatEvidence>,
}

/// Deterministic repetition detector: a text is repetitive iff some
/// contiguous block of at least `min_block_tokens` whitespace tokens occurs
/// at least `k` times (exact match after whitespace normalization).
///
/// Blocks longer than the minimum are covered by their prefixes: if an
/// m'-token block repeats with m' > m, its m-token prefix repeats at the
/// same start positions.
pub fn detect_repeat(text: &str, min_block_tokens: usize, k: usize) -> Option<RepeatEvidence> {
    assert!(min_block_tokens > 0, "min_block_tokens must be positive");
    assert!(k > 0, "k must be positive");
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() < min_block_tokens {
        return None;
    }
    let mut seen: HashMap<String, (u64, usize)> = HashMap::new();
    for start in 0..=(tokens.len() - min_block_tokens) {
        let key = tokens[start..start + min_block_tokens].join(" ");
        let entry = seen.entry(key).or_insert((0, start));
        entry.0 += 1;
    }
    let best = seen
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))?;
    let (block, (occurrences, _)) = best;
    if occurrences < k as u64 {
        return None;
    }
    let hash = Sha256::digest(block.as_bytes());
    let block_hash: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    Some(RepeatEvidence {
        block_hash,
        occurrences,
        block_tokens: min_block_tokens as u64,
    })
}

fn trace_text(trace: &Trace) -> String {
    if trace.solution_text.is_empty() {
        trace.thinking_text.clone()
    } else {
        format!("{} {}", trace.thinking_text, trace.solution_text)
    }
}

/// Per-trace repetition verdicts over the whole set.
pub fn repeat_verdicts(set: &TraceSet, min_block_tokens: usize, k: usize) -> Vec<RepeatVerdict> {
    set.traces
        .iter()
        .map(|trace| {
            let evidence = detect_repeat(&trace_text(trace), min_block_tokens, k);
            RepeatVerdict {
                trace_id: trace.id.clone(),
                repetitive: evidence.is_some(),
                evidence,
            }
        })
        .collect()
}

/// Fraction of wrong answers flagged repetitive. Undefined (an error) when
/// the set contains no wrong answers.
pub fn repeat_rate(set: &TraceSet, min_block_tokens: usize, k: usize) -> Result<f64> {
    let wrong: Vec<&Trace> = set.traces.iter().filter(|t| !t.correct).collect();
    if wrong.is_empty() {
        return Err(Error::UndefinedRate(
            "the set contains no wrong answers".into(),
        ));
    }
    let flagged = wrong
        .iter()
        .filter(|t| detect_repeat(&trace_text(t), min_block_tokens, k).is_some())
        .count();
    Ok(flagged as f64 / wrong.len() as f64)
}

/// One operating point on the accuracy / mean-length plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub label: String,
    /// Percent, in [0, 100].
    pub accuracy: f64,
    /// Mean response length in tokens.
    pub mean_length: f64,
}

impl ParetoPoint {
    pub fn new(label: impl Into<String>, accuracy: f64, mean_length: f64) -> Self {
        Self {
            label: label.into(),
            accuracy,
            mean_length,
        }
    }
}

/// True when `other` dominates `point`: at least as accurate AND at most as
/// long, strictly better on one axis. Higher accuracy and lower length are
/// the better directions.
pub fn dominates(other: &ParetoPoint, point: &ParetoPoint) -> bool {
    other.accuracy >= point.accuracy
        && other.mean_length <= point.mean_length
        && (other.accuracy > point.accuracy || other.mean_length < point.mean_length)
}

/// Non-dominated subset, input order preserved.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p)))
        .cloned()
        .collect()
}

/// Reads points from CSV with a `label,accuracy,mean_length` header.
/// Extra columns are ignored.
pub fn read_pareto_csv<R: Read>(reader: R) -> Result<Vec<ParetoPoint>> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut points = Vec::new();
    for (idx, record) in csv_reader.deserialize::<ParetoPoint>().enumerate() {
        let point = record.map_err(|e| Error::Parse {
            line: idx + 2, // header is line 1
            message: e.to_string(),
        })?;
        if !point.accuracy.is_finite() || !point.mean_length.is_finite() {
            return Err(Error::InvalidRecord {
                line: idx + 2,
                message: "accuracy and mean_length must be finite".into(),
            });
        }
        points.push(point);
    }
    Ok(points)
}

/// Writes points as CSV with a `label,accuracy,mean_length` header.
pub fn write_pareto_csv<W: Write>(points: &[ParetoPoint], writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    for point in points {
        csv_writer
            .serialize(point)
            .map_err(|e| Error::Validation(format!("csv write: {e}")))?;
    }
    csv_writer
        .flush()
        .map_err(|e| Error::Validation(format!("csv flush: {e}")))?;
    Ok(())
}
