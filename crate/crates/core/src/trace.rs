//! Canonical data model for response traces and the line-oriented trace
//! file format.
//!
//! A trace file is UTF-8 JSON-lines: line 1 is a header object carrying
//! `schema_version`, `max_context`, and `tokenizer`; every following line is
//! one [`Trace`] object. All lengths are integer token counts supplied by
//! the producer — they are never recomputed from the text, because the
//! toolkit is tokenizer-agnostic. [`whitespace_token_count`] is the fallback
//! convention used by the built-in simulator only.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Current trace-file schema version.
pub const SCHEMA_VERSION: &str = "1";

/// Default delimiter separating the thinking segment from the solution.
pub const DEFAULT_DELIMITER: &str = "</think>";

/// Requested response-length level, carried in the prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Level {
    Short,
    Moderate,
    Long,
    /// No level requested (unconstrained runs).
    None,
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Level::Short => "SHORT",
            Level::Moderate => "MODERATE",
            Level::Long => "LONG",
            Level::None => "NONE",
        };
        f.write_str(s)
    }
}

/// One model response: prompt, segments, token counts, and outcome flags.
///
/// Field order is the wire order; serialization is byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub id: String,
    pub prompt: String,
    pub level: Level,
    pub thinking_text: String,
    pub solution_text: String,
    pub thinking_len: u64,
    pub solution_len: u64,
    pub total_len: u64,
    pub correct: bool,
    /// True when the run was cut off by a hard cap rather than ending
    /// naturally.
    pub truncated: bool,
    pub model: String,
    pub dataset: String,
}

impl Trace {
    /// Checks the per-record invariants against the file-level max context.
    pub fn validate(&self, max_context: u64) -> std::result::Result<(), String> {
        if self.total_len != self.thinking_len + self.solution_len {
            return Err(format!(
                "total_len {} != thinking_len {} + solution_len {}",
                self.total_len, self.thinking_len, self.solution_len
            ));
        }
        if self.truncated && self.total_len != max_context {
            return Err(format!(
                "truncated trace has total_len {} but max_context is {}",
                self.total_len, max_context
            ));
        }
        Ok(())
    }
}

/// File header: tokenization convention shared by every record in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub schema_version: String,
    pub max_context: u64,
    pub tokenizer: String,
}

/// An immutable, validated collection of traces from one file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub schema_version: String,
    pub max_context: u64,
    pub tokenizer: String,
    pub traces: Vec<Trace>,
}

impl TraceSet {
    pub fn header(&self) -> TraceHeader {
        TraceHeader {
            schema_version: self.schema_version.clone(),
            max_context: self.max_context,
            tokenizer: self.tokenizer.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }
}

/// Result of splitting a response at the end-of-thinking delimiter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitThinking<'a> {
    pub thinking: &'a str,
    pub solution: &'a str,
    /// False when the delimiter never occurred; the whole text is then
    /// the thinking segment.
    pub delimiter_found: bool,
}

/// Splits at the FIRST occurrence of `delimiter`; the delimiter belongs to
/// neither segment. Absence is a defined case, flagged in the result.
pub fn split_thinking<'a>(full_text: &'a str, delimiter: &str) -> SplitThinking<'a> {
    assert!(!delimiter.is_empty(), "delimiter must be non-empty");
    match full_text.find(delimiter) {
        Some(at) => SplitThinking {
            thinking: &full_text[..at],
            solution: &full_text[at + delimiter.len()..],
            delimiter_found: true,
        },
        None => SplitThinking {
            thinking: full_text,
            solution: "",
            delimiter_found: false,
        },
    }
}

/// Whitespace-token fallback counter. Used for simulator-produced text;
/// external producers supply their own counts.
pub fn whitespace_token_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

const REQUIRED_FIELDS: [&str; 12] = [
    "id",
    "prompt",
    "level",
    "thinking_text",
    "solution_text",
    "thinking_len",
    "solution_len",
    "total_len",
    "correct",
    "truncated",
    "model",
    "dataset",
];

/// Loads and validates a trace file. Records that fail invariants are
/// rejected with their line number.
pub fn load_traces<P: AsRef<Path>>(path: P, schema_version: &str) -> Result<TraceSet> {
    let file = File::open(path)?;
    read_traces(BufReader::new(file), schema_version)
}

/// Reader-based core of [`load_traces`].
pub fn read_traces<R: Read>(reader: R, schema_version: &str) -> Result<TraceSet> {
    let mut lines = BufReader::new(reader).lines().enumerate();

    let (_, header_line) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty file: missing header line".into(),
    })?;
    let header: TraceHeader =
        serde_json::from_str(&header_line?).map_err(|e| Error::Parse {
            line: 1,
            message: format!("bad header: {e}"),
        })?;
    if header.schema_version != schema_version {
        return Err(Error::SchemaVersion {
            expected: schema_version.to_string(),
            found: header.schema_version,
        });
    }

    let mut traces = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        traces.push(parse_record(&line, line_no, header.max_context)?);
    }

    Ok(TraceSet {
        schema_version: header.schema_version,
        max_context: header.max_context,
        tokenizer: header.tokenizer,
        traces,
    })
}

fn parse_record(line: &str, line_no: usize, max_context: u64) -> Result<Trace> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Parse {
        line: line_no,
        message: "record is not a JSON object".into(),
    })?;
    for field in REQUIRED_FIELDS {
        if !obj.contains_key(field) {
            return Err(Error::MissingField {
                line: line_no,
                field: field.to_string(),
            });
        }
    }
    // Length fields are validated as signed integers first so that a
    // negative count surfaces as an invariant violation, not a type error.
    for field in ["thinking_len", "solution_len", "total_len"] {
        let v = &obj[field];
        let n = v.as_i64().ok_or_else(|| Error::InvalidRecord {
            line: line_no,
            message: format!("`{field}` is not an integer token count"),
        })?;
        if n < 0 {
            return Err(Error::InvalidRecord {
                line: line_no,
                message: format!("`{field}` is negative ({n})"),
            });
        }
    }
    let trace: Trace = serde_json::from_value(value).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    trace.validate(max_context).map_err(|message| Error::InvalidRecord {
        line: line_no,
        message,
    })?;
    Ok(trace)
}

/// Writes a trace set in the line-oriented file format.
pub fn save_traces<P: AsRef<Path>>(set: &TraceSet, path: P) -> Result<()> {
    let mut file = File::create(path)?;
    write_traces(set, &mut file)
}

/// Writer-based core of [`save_traces`]. Output is byte-stable for a given
/// set: fixed field order, compact JSON, one record per line.
pub fn write_traces<W: Write>(set: &TraceSet, writer: &mut W) -> Result<()> {
    let header = serde_json::to_string(&set.header()).expect("header serializes");
    writeln!(writer, "{header}")?;
    for trace in &set.traces {
        let line = serde_json::to_string(trace).expect("trace serializes");
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// Renders a trace set to the file format in memory.
pub fn traces_to_string(set: &TraceSet) -> String {
    let mut buf = Vec::new();
    write_traces(set, &mut buf).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace(id: &str, thinking: u64, solution: u64, correct: bool) -> Trace {
        Trace {
            id: id.to_string(),
            prompt: "q".into(),
            level: Level::None,
            thinking_text: "a b".into(),
            solution_text: "c".into(),
            thinking_len: thinking,
            solution_len: solution,
            total_len: thinking + solution,
            correct,
            truncated: false,
            model: "m".into(),
            dataset: "d".into(),
        }
    }

    fn sample_set() -> TraceSet {
        TraceSet {
            schema_version: SCHEMA_VERSION.into(),
            max_context: 4096,
            tokenizer: "whitespace".into(),
            traces: vec![sample_trace("a", 10, 5, true), sample_trace("b", 3, 0, false)],
        }
    }

    #[test]
    fn round_trip_two_valid_lines() {
        let set = sample_set();
        let text = traces_to_string(&set);
        let loaded = read_traces(text.as_bytes(), SCHEMA_VERSION).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded, set);
        // serialize(load(file)) is byte-identical for files we wrote
        assert_eq!(traces_to_string(&loaded), text);
    }

    #[test]
    fn missing_correct_field_is_schema_error() {
        let set = sample_set();
        let mut lines: Vec<String> = traces_to_string(&set).lines().map(String::from).collect();
        let record: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
        let mut obj = record.as_object().unwrap().clone();
        obj.remove("correct");
        lines[1] = serde_json::to_string(&obj).unwrap();
        let text = lines.join("\n");
        let err = read_traces(text.as_bytes(), SCHEMA_VERSION).unwrap_err();
        match err {
            Error::MissingField { line, field } => {
                assert_eq!(line, 2);
                assert_eq!(field, "correct");
            }
            other => panic!("expected MissingField, got {other:?}"),
        }
    }

    #[test]
    fn negative_thinking_len_is_validation_error() {
        let set = sample_set();
        let mut lines: Vec<String> = traces_to_string(&set).lines().map(String::from).collect();
        lines[1] = lines[1].replace("\"thinking_len\":10", "\"thinking_len\":-1");
        let text = lines.join("\n");
        let err = read_traces(text.as_bytes(), SCHEMA_VERSION).unwrap_err();
        match err {
            Error::InvalidRecord { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("thinking_len"), "message: {message}");
            }
            other => panic!("expected InvalidRecord, got {other:?}"),
        }
    }

    #[test]
    fn total_len_mismatch_rejected_with_line() {
        let set = sample_set();
        let mut lines: Vec<String> = traces_to_string(&set).lines().map(String::from).collect();
        lines[2] = lines[2].replace("\"total_len\":3", "\"total_len\":7");
        let text = lines.join("\n");
        let err = read_traces(text.as_bytes(), SCHEMA_VERSION).unwrap_err();
        match err {
            Error::InvalidRecord { line, .. } => assert_eq!(line, 3),
            other => panic!("expected InvalidRecord, got {other:?}"),
        }
    }

    #[test]
    fn truncated_must_hit_max_context() {
        let mut set = sample_set();
        set.traces[0].truncated = true; // total_len 15 != max_context 4096
        let text = traces_to_string(&set);
        assert!(read_traces(text.as_bytes(), SCHEMA_VERSION).is_err());

        set.traces[0].thinking_len = 4096;
        set.traces[0].solution_len = 0;
        set.traces[0].total_len = 4096;
        let text = traces_to_string(&set);
        assert!(read_traces(text.as_bytes(), SCHEMA_VERSION).is_ok());
    }

    #[test]
    fn schema_version_mismatch() {
        let text = traces_to_string(&sample_set());
        let err = read_traces(text.as_bytes(), "2").unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { .. }));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut text = traces_to_string(&sample_set());
        text.push_str("{not json\n");
        let err = read_traces(text.as_bytes(), SCHEMA_VERSION).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn split_at_first_occurrence() {
        let s = split_thinking("abc</think>xyz", "</think>");
        assert_eq!((s.thinking, s.solution, s.delimiter_found), ("abc", "xyz", true));

        let s = split_thinking("a</think>b</think>c", "</think>");
        assert_eq!((s.thinking, s.solution), ("a", "b</think>c"));
    }

    #[test]
    fn split_absent_delimiter_flags_result() {
        let s = split_thinking("abc", "</think>");
        assert_eq!((s.thinking, s.solution, s.delimiter_found), ("abc", "", false));
    }

    #[test]
    fn split_first_occurrence_matches_scan_oracle() {
        // Scanning oracle: walk byte offsets until the delimiter matches.
        fn oracle<'a>(text: &'a str, d: &str) -> (&'a str, &'a str) {
            for i in 0..=text.len().saturating_sub(d.len()) {
                if text.is_char_boundary(i) && text[i..].starts_with(d) {
                    return (&text[..i], &text[i + d.len()..]);
                }
            }
            (text, "")
        }
        let cases = [
            ("a</think>b</think>c", "</think>"),
            ("</think>", "</think>"),
            ("xx</think>", "</think>"),
            ("no delimiter here", "</think>"),
            ("aaa", "aa"),
        ];
        for (text, d) in cases {
            let s = split_thinking(text, d);
            assert_eq!((s.thinking, s.solution), oracle(text, d), "text={text:?}");
        }
    }

    #[test]
    fn whitespace_counter() {
        assert_eq!(whitespace_token_count(""), 0);
        assert_eq!(whitespace_token_count("  a\tb \n c  "), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // split_thinking(x ++ d ++ y, d) = (x, y) whenever d does not occur in x
            #[test]
            fn split_recovers_parts(x in "[a-z ]{0,40}", y in "[a-z</>]{0,40}") {
                let d = "</think>";
                prop_assume!(!x.contains(d));
                let text = format!("{x}{d}{y}");
                let s = split_thinking(&text, d);
                prop_assert!(s.delimiter_found);
                prop_assert_eq!(s.thinking, x.as_str());
                prop_assert_eq!(s.solution, y.as_str());
            }

            #[test]
            fn file_round_trip(thinking in 0u64..500, solution in 0u64..500, correct in any::<bool>()) {
                let set = TraceSet {
                    schema_version: SCHEMA_VERSION.into(),
                    max_context: 4096,
                    tokenizer: "whitespace".into(),
                    traces: vec![Trace {
                        id: "t".into(),
                        prompt: String::new(),
                        level: Level::Short,
                        thinking_text: "w".repeat(3),
                        solution_text: String::new(),
                        thinking_len: thinking,
                        solution_len: solution,
                        total_len: thinking + solution,
                        correct,
                        truncated: false,
                        model: "m".into(),
                        dataset: "d".into(),
                    }],
                };
                let text = traces_to_string(&set);
                let loaded = read_traces(text.as_bytes(), SCHEMA_VERSION).unwrap();
                prop_assert_eq!(traces_to_string(&loaded), text);
            }
        }
    }
}
