//! Embedded reference tables: reported accuracy / mean-length operating
//! points used to exercise the analytics paths offline.
//!
//! These numbers come from published evaluations of real models; producing
//! them requires LLM training and inference, which this toolkit does not
//! do. They are shipped as data only — inputs for pareto extraction and
//! dominance checks, never computed outputs.

use crate::analytics::ParetoPoint;
use crate::trace::Level;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixturePoint {
    pub label: &'static str,
    /// Requested length level, when the evaluation was level-conditioned.
    pub level: Option<Level>,
    /// Percent.
    pub accuracy: f64,
    /// Mean response length in tokens.
    pub mean_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    /// Where the rows were transcribed from.
    pub source: &'static str,
    pub points: &'static [FixturePoint],
}

impl Fixture {
    /// Points with the level folded into the label, ready for
    /// [`crate::analytics::pareto_front`].
    pub fn pareto_points(&self) -> Vec<ParetoPoint> {
        self.points
            .iter()
            .map(|p| {
                let label = match p.level {
                    Some(level) => format!("{}/{level}", p.label),
                    None => p.label.to_string(),
                };
                ParetoPoint::new(label, p.accuracy, p.mean_length)
            })
            .collect()
    }

    /// CSV rendering with a `label,accuracy,mean_length,source` header,
    /// readable by the `pareto` tooling (the extra column is ignored).
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(["label", "accuracy", "mean_length", "source"])
            .expect("in-memory write");
        for point in self.pareto_points() {
            writer
                .write_record([
                    point.label.as_str(),
                    &point.accuracy.to_string(),
                    &point.mean_length.to_string(),
                    self.source,
                ])
                .expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("flushed")).expect("UTF-8")
    }
}

const fn pt(label: &'static str, accuracy: f64, mean_length: f64) -> FixturePoint {
    FixturePoint {
        label,
        level: None,
        accuracy,
        mean_length,
    }
}

const fn lpt(label: &'static str, level: Level, accuracy: f64, mean_length: f64) -> FixturePoint {
    FixturePoint {
        label,
        level: Some(level),
        accuracy,
        mean_length,
    }
}

static TS_MATH500: [FixturePoint; 9] = [
    pt("SFT-S1-7b/base", 77.00, 4842.68),
    pt("SFT-S1-7b/bf", 77.17, 3591.21),
    pt("SFT-S1-7b/ts", 77.01, 1983.93),
    pt("SFT-DeepSeek-1.5b/base", 80.60, 5869.60),
    pt("SFT-DeepSeek-1.5b/bf", 81.03, 3162.49),
    pt("SFT-DeepSeek-1.5b/ts", 81.09, 2615.66),
    pt("SFT-DeepSeek-7b/base", 88.17, 4078.26),
    pt("SFT-DeepSeek-7b/bf", 88.03, 2839.95),
    pt("SFT-DeepSeek-7b/ts", 88.95, 2547.42),
];

static SWEET_SPOT: [FixturePoint; 9] = [
    pt("Qwen2.5-Math-1.5B/base", 23.4, 1976.874),
    pt("Qwen2.5-Math-1.5B/rl", 68.2, 685.896),
    pt("Qwen2.5-Math-1.5B/rl_lp", 71.4, 495.842),
    pt("Qwen2.5-Math-7B/base", 57.2, 1109.13),
    pt("Qwen2.5-Math-7B/rl", 70.0, 671.58),
    pt("Qwen2.5-Math-7B/rl_lp", 71.2, 404.962),
    pt("DeepSeek-R1-Distill-Qwen-1.5B/base", 80.6, 5769.596),
    pt("DeepSeek-R1-Distill-Qwen-1.5B/rl", 77.2, 1929.208),
    pt("DeepSeek-R1-Distill-Qwen-1.5B/rl_lp", 80.4, 1104.748),
];

static ML_MATH500_1P5B_4K_NEW: [FixturePoint; 3] = [
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k-new", Level::Short, 62.4, 714.17),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k-new", Level::Moderate, 72.4, 927.476),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k-new", Level::Long, 78.4, 1285.882),
];

static ML_MATH500_4K: [FixturePoint; 27] = [
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k", Level::Short, 60.0, 650.08),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k", Level::Moderate, 65.0, 868.134),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k", Level::Long, 74.4, 1194.83),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k-new", Level::Short, 62.4, 714.17),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k-new", Level::Moderate, 72.4, 927.476),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-4k-new", Level::Long, 78.4, 1285.882),
    lpt("DeepSeek-R1-Distill-Qwen-7B-4k", Level::Short, 70.2, 351.828),
    lpt("DeepSeek-R1-Distill-Qwen-7B-4k", Level::Moderate, 74.4, 433.952),
    lpt("DeepSeek-R1-Distill-Qwen-7B-4k", Level::Long, 77.2, 673.16),
    lpt("DeepScaleR-1.5B-Preview-4k", Level::Short, 68.6, 577.702),
    lpt("DeepScaleR-1.5B-Preview-4k", Level::Moderate, 75.2, 706.082),
    lpt("DeepScaleR-1.5B-Preview-4k", Level::Long, 74.8, 857.298),
    lpt("L1-Qwen-1.5B-Max-4k", Level::Short, 70.4, 351.774),
    lpt("L1-Qwen-1.5B-Max-4k", Level::Moderate, 76.2, 656.242),
    lpt("L1-Qwen-1.5B-Max-4k", Level::Long, 80.2, 1353.576),
    lpt("S1-Qwen-1.5B-BudgetForcing-4k", Level::Short, 43.60, 876.31),
    lpt("S1-Qwen-1.5B-BudgetForcing-4k", Level::Moderate, 66.20, 1360.79),
    lpt("S1-Qwen-1.5B-BudgetForcing-4k", Level::Long, 76.80, 1936.26),
    lpt("S1-Qwen-7B-BudgetForcing-4k", Level::Short, 48.20, 871.75),
    lpt("S1-Qwen-7B-BudgetForcing-4k", Level::Moderate, 72.00, 1366.49),
    lpt("S1-Qwen-7B-BudgetForcing-4k", Level::Long, 83.00, 2044.31),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-prompt-4k", Level::Short, 32.20, 890.22),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-prompt-4k", Level::Moderate, 55.60, 1441.21),
    lpt("DeepSeek-R1-Distill-Qwen-1.5B-prompt-4k", Level::Long, 69.60, 2108.98),
    lpt("DeepSeek-R1-Distill-Qwen-7B-prompt-4k", Level::Short, 28.20, 918.25),
    lpt("DeepSeek-R1-Distill-Qwen-7B-prompt-4k", Level::Moderate, 51.20, 1480.86),
    lpt("DeepSeek-R1-Distill-Qwen-7B-prompt-4k", Level::Long, 76.40, 2153.89),
];

static FIXTURES: [Fixture; 4] = [
    Fixture {
        name: "ts_math500",
        description: "MATH500 accuracy/mean-length for SFT models decoded \
                      as-is (base), with budget forcing (bf), and with EOS \
                      temperature scaling (ts)",
        source: "transcribed reported results: post-hoc EOS temperature \
                 scaling vs budget forcing, MATH500",
        points: &TS_MATH500,
    },
    Fixture {
        name: "sweet_spot",
        description: "MATH500 accuracy/mean-length before RL (base), after \
                      GRPO (rl), and after GRPO with the linear length \
                      penalty (rl_lp)",
        source: "transcribed reported results: GRPO with and without the \
                 sweet-spot length penalty, MATH500",
        points: &SWEET_SPOT,
    },
    Fixture {
        name: "ml_math500_1p5b_4k_new",
        description: "MATH500 per-level points for the 1.5B model trained \
                      with the multi-level penalty (4096-token cap)",
        source: "transcribed reported results: multi-level length control, \
                 MATH500, 4096-token cap",
        points: &ML_MATH500_1P5B_4K_NEW,
    },
    Fixture {
        name: "ml_math500_4k",
        description: "MATH500 per-level points for every length-controlled \
                      system evaluated under a 4096-token cap",
        source: "transcribed reported results: multi-level length control, \
                 MATH500, 4096-token cap",
        points: &ML_MATH500_4K,
    },
];

/// Every embedded fixture.
pub fn all() -> &'static [Fixture] {
    &FIXTURES
}

/// Fixture lookup by name.
pub fn by_name(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// Names of all embedded fixtures, for error listings.
pub fn names() -> Vec<&'static str> {
    FIXTURES.iter().map(|f| f.name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{pareto_front, read_pareto_csv};

    #[test]
    fn lookup_and_listing() {
        assert_eq!(all().len(), 4);
        assert!(by_name("ts_math500").is_some());
        assert!(by_name("nope").is_none());
        assert_eq!(names().len(), 4);
    }

    #[test]
    fn ts_rows_match_transcription() {
        let f = by_name("ts_math500").unwrap();
        let base = f
            .points
            .iter()
            .find(|p| p.label == "SFT-DeepSeek-7b/base")
            .unwrap();
        assert_eq!((base.accuracy, base.mean_length), (88.17, 4078.26));
        let ts = f
            .points
            .iter()
            .find(|p| p.label == "SFT-DeepSeek-7b/ts")
            .unwrap();
        assert_eq!((ts.accuracy, ts.mean_length), (88.95, 2547.42));
    }

    #[test]
    fn sweet_spot_rows_match_transcription() {
        let f = by_name("sweet_spot").unwrap();
        let rows: Vec<_> = f
            .points
            .iter()
            .filter(|p| p.label.starts_with("Qwen2.5-Math-1.5B"))
            .collect();
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].accuracy, rows[0].mean_length), (23.4, 1976.874));
        assert_eq!((rows[1].accuracy, rows[1].mean_length), (68.2, 685.896));
        assert_eq!((rows[2].accuracy, rows[2].mean_length), (71.4, 495.842));
    }

    #[test]
    fn multilevel_rows_match_transcription() {
        let f = by_name("ml_math500_1p5b_4k_new").unwrap();
        let by_level: Vec<_> = f.points.iter().map(|p| (p.level, p.accuracy, p.mean_length)).collect();
        assert_eq!(
            by_level,
            vec![
                (Some(Level::Short), 62.4, 714.17),
                (Some(Level::Moderate), 72.4, 927.476),
                (Some(Level::Long), 78.4, 1285.882),
            ]
        );
    }

    #[test]
    fn csv_dump_is_pareto_readable() {
        let f = by_name("ml_math500_4k").unwrap();
        let csv = f.to_csv();
        let points = read_pareto_csv(csv.as_bytes()).unwrap();
        assert_eq!(points.len(), 27);
        let front = pareto_front(&points);
        assert!(!front.is_empty());
    }

    #[test]
    fn sources_are_present() {
        for f in all() {
            assert!(!f.source.is_empty(), "{} lacks a source", f.name);
            assert!(!f.description.is_empty());
            assert!(!f.points.is_empty());
        }
    }
}
