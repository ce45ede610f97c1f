//! JSON experiment configuration: a single versioned file describes the
//! experiment kind, the metric, the point sequence, and every numeric knob.

use serde::{Deserialize, Serialize};

use crate::asympt::MinimaPath;
use crate::heights::{AdelicMetric, MetricJson};
use crate::polyalg::SequenceSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Experiment kinds bound to the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Heights,
    OrbitMeasure,
    EquidistVerdict,
    AsymptoticMeasure,
    InvariantsChain,
    LatticeProperties,
    SemigroupHarness,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Heights => "heights",
            ExperimentKind::OrbitMeasure => "orbit-measure",
            ExperimentKind::EquidistVerdict => "equidist-verdict",
            ExperimentKind::AsymptoticMeasure => "asymptotic-measure",
            ExperimentKind::InvariantsChain => "invariants-chain",
            ExperimentKind::LatticeProperties => "lattice-properties",
            ExperimentKind::SemigroupHarness => "semigroup-harness",
        }
    }

    /// Kinds whose numeric path consumes randomness and therefore demand an
    /// explicit seed.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            ExperimentKind::InvariantsChain
                | ExperimentKind::LatticeProperties
                | ExperimentKind::SemigroupHarness
        )
    }

    pub fn needs_sequence(&self) -> bool {
        matches!(
            self,
            ExperimentKind::Heights
                | ExperimentKind::OrbitMeasure
                | ExperimentKind::EquidistVerdict
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MinimaPathConfig {
    #[default]
    Auto,
    ForceReduction,
    ForceExact,
}

impl From<MinimaPathConfig> for MinimaPath {
    fn from(c: MinimaPathConfig) -> MinimaPath {
        match c {
            MinimaPathConfig::Auto => MinimaPath::Auto,
            MinimaPathConfig::ForceReduction => MinimaPath::ForceReduction,
            MinimaPathConfig::ForceExact => MinimaPath::ForceExact,
        }
    }
}

/// One experiment: deserialized from a single JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minima_path: Option<MinimaPathConfig>,
}

/// Documented caps; exceeding one is exit status 3, not a schema error.
pub mod caps {
    pub const HORIZON: usize = 5000;
    pub const SEQUENCE_LEN: usize = 5000;
    pub const N_LIST_MAX: u32 = 24;
    pub const CAPACITY_N_MAX: u32 = 9;
    pub const DICTIONARY_DEGREE: u32 = 4;
    pub const MOMENT_DEGREE: u32 = 16;
    pub const MC_SAMPLES: usize = 10_000_000;
    pub const CASES: usize = 10_000;
}

/// A single validation finding; `is_cap` distinguishes resource caps (exit
/// 3) from schema violations (exit 2).
#[derive(Debug, Clone, Serialize)]
pub struct ValidationIssue {
    pub field: String,
    pub message: String,
    pub is_cap: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn metric(&self) -> crate::error::Result<AdelicMetric> {
        match &self.metric {
            Some(json) => AdelicMetric::from_json(json),
            None => Ok(AdelicMetric::canonical()),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-3)
    }

    pub fn precision(&self) -> f64 {
        self.precision.unwrap_or(crate::heights::DEFAULT_ROOT_TOL)
    }

    pub fn dictionary_degree(&self) -> u32 {
        self.dictionary_degree.unwrap_or(3)
    }

    pub fn moment_degree(&self) -> u32 {
        self.moment_degree.unwrap_or(8)
    }

    pub fn mc_samples(&self) -> usize {
        self.mc_samples.unwrap_or(20_000)
    }

    pub fn cases(&self) -> usize {
        self.cases.unwrap_or(match self.kind {
            ExperimentKind::SemigroupHarness => 50,
            _ => 100,
        })
    }

    pub fn minima_path(&self) -> MinimaPath {
        self.minima_path.unwrap_or_default().into()
    }

    /// Collects schema and cap findings without running anything.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        let schema = |field: &str, message: String| ValidationIssue {
            field: field.to_string(),
            message,
            is_cap: false,
        };
        let cap = |field: &str, message: String| ValidationIssue {
            field: field.to_string(),
            message,
            is_cap: true,
        };

        if self.schema_version != SCHEMA_VERSION {
            issues.push(schema(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if let Some(m) = &self.metric {
            if let Err(e) = AdelicMetric::from_json(m) {
                issues.push(schema("metric", e.to_string()));
            }
        }
        if self.kind.needs_sequence() {
            match &self.sequence {
                None => issues.push(schema(
                    "sequence",
                    format!("kind {} requires a sequence", self.kind.name()),
                )),
                Some(s) => {
                    if s.is_empty() {
                        issues.push(schema("sequence", "sequence is empty".into()));
                    }
                    if s.len() > caps::SEQUENCE_LEN {
                        issues.push(cap(
                            "sequence",
                            format!("length {} exceeds cap {}", s.len(), caps::SEQUENCE_LEN),
                        ));
                    }
                }
            }
        }
        if self.kind.is_stochastic() && self.seed.is_none() {
            issues.push(schema(
                "seed",
                format!(
                    "kind {} is stochastic and requires a seed",
                    self.kind.name()
                ),
            ));
        }
        if let Some(h) = self.horizon {
            if h == 0 {
                issues.push(schema("horizon", "horizon must be positive".into()));
            }
            if h > caps::HORIZON {
                issues.push(cap("horizon", format!("{h} exceeds cap {}", caps::HORIZON)));
            }
            if let Some(s) = &self.sequence {
                if h > s.len() {
                    issues.push(schema(
                        "horizon",
                        format!("horizon {h} exceeds the sequence length {}", s.len()),
                    ));
                }
            }
        }
        if let Some(w) = self.window {
            if w == 0 {
                issues.push(schema("window", "window must be at least 1".into()));
            }
            if let Some(h) = self.horizon {
                if w > h {
                    issues.push(schema("window", format!("window {w} exceeds horizon {h}")));
                }
            }
        }
        if let Some(list) = &self.n_list {
            if list.is_empty() {
                issues.push(schema("n_list", "n_list must be nonempty".into()));
            }
            if list.windows(2).any(|p| p[0] >= p[1]) {
                issues.push(schema(
                    "n_list",
                    "n_list must be strictly increasing".into(),
                ));
            }
            let max_allowed = if self.kind == ExperimentKind::InvariantsChain {
                caps::CAPACITY_N_MAX
            } else {
                caps::N_LIST_MAX
            };
            if let Some(&max) = list.iter().max() {
                if max > max_allowed {
                    issues.push(cap(
                        "n_list",
                        format!("max entry {max} exceeds cap {max_allowed}"),
                    ));
                }
            }
            if list.first() == Some(&0) {
                issues.push(schema("n_list", "n_list entries must be positive".into()));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                issues.push(schema("tol", "tol must be positive and finite".into()));
            }
        }
        if let Some(p) = self.precision {
            if !(p > 0.0 && p <= 1e-6) {
                issues.push(schema(
                    "precision",
                    "root precision must lie in (0, 1e-6]".into(),
                ));
            }
        }
        if let Some(d) = self.dictionary_degree {
            if d == 0 {
                issues.push(schema(
                    "dictionary_degree",
                    "degree must be positive".into(),
                ));
            }
            if d > caps::DICTIONARY_DEGREE {
                issues.push(cap(
                    "dictionary_degree",
                    format!("{d} exceeds cap {}", caps::DICTIONARY_DEGREE),
                ));
            }
        }
        if let Some(d) = self.moment_degree {
            if d > caps::MOMENT_DEGREE {
                issues.push(cap(
                    "moment_degree",
                    format!("{d} exceeds cap {}", caps::MOMENT_DEGREE),
                ));
            }
        }
        if let Some(s) = self.mc_samples {
            if s == 0 {
                issues.push(schema("mc_samples", "need at least one sample".into()));
            }
            if s > caps::MC_SAMPLES {
                issues.push(cap(
                    "mc_samples",
                    format!("{s} exceeds cap {}", caps::MC_SAMPLES),
                ));
            }
        }
        if let Some(c) = self.cases {
            if c == 0 {
                issues.push(schema("cases", "need at least one case".into()));
            }
            if c > caps::CASES {
                issues.push(cap("cases", format!("{c} exceeds cap {}", caps::CASES)));
            }
        }
        match self.kind {
            ExperimentKind::EquidistVerdict => {
                if self.horizon.is_none() && self.sequence.is_none() {
                    // covered by the sequence requirement
                } else if self.window.is_none()
                    && self.sequence.as_ref().is_some_and(|s| s.len() < 2)
                {
                    issues.push(schema("window", "sequence too short for a window".into()));
                }
            }
            ExperimentKind::AsymptoticMeasure | ExperimentKind::InvariantsChain => {
                if self.n_list.is_none() {
                    issues.push(schema(
                        "n_list",
                        format!("kind {} requires n_list", self.kind.name()),
                    ));
                }
            }
            _ => {}
        }
        issues
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn minimal_heights_config_validates() {
        let c = parse(
            r#"{"schema_version":1,"kind":"heights",
                "sequence":{"kind":"rational","values":[2]}}"#,
        );
        assert!(c.validate().is_empty());
    }

    #[test]
    fn missing_seed_on_stochastic_kind() {
        let c = parse(r#"{"schema_version":1,"kind":"lattice-properties"}"#);
        let issues = c.validate();
        assert!(issues.iter().any(|i| i.field == "seed" && !i.is_cap));
    }

    #[test]
    fn unknown_metric_base_is_a_parse_error() {
        let r = ExperimentConfig::from_json(
            r#"{"schema_version":1,"kind":"heights",
                "metric":{"base":"round"},
                "sequence":{"kind":"rational","values":[2]}}"#,
        );
        let err = r.unwrap_err().to_string();
        assert!(
            err.contains("canonical") || err.contains("unknown variant"),
            "{err}"
        );
    }

    #[test]
    fn unknown_fields_rejected() {
        let r =
            ExperimentConfig::from_json(r#"{"schema_version":1,"kind":"heights","frobnicate":1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn caps_are_flagged_as_caps() {
        let c = parse(r#"{"schema_version":1,"kind":"asymptotic-measure","n_list":[4,8,40]}"#);
        let issues = c.validate();
        assert!(issues.iter().any(|i| i.field == "n_list" && i.is_cap));
    }

    #[test]
    fn window_horizon_consistency() {
        let c = parse(
            r#"{"schema_version":1,"kind":"equidist-verdict",
                "sequence":{"kind":"cyclotomic","count":10},
                "horizon":10,"window":12}"#,
        );
        assert!(c.validate().iter().any(|i| i.field == "window"));
        let c = parse(
            r#"{"schema_version":1,"kind":"equidist-verdict",
                "sequence":{"kind":"cyclotomic","count":10},
                "horizon":20,"window":4}"#,
        );
        assert!(c.validate().iter().any(|i| i.field == "horizon"));
    }

    #[test]
    fn config_echo_roundtrips() {
        let text = r#"{"schema_version":1,"kind":"equidist-verdict","sequence":{"kind":"cyclotomic","count":95,"start":2,"conductors":"prime"},"horizon":95,"window":12,"tol":0.001}"#;
        let c = parse(text);
        let echoed = serde_json::to_string(&c).unwrap();
        let back = parse(&echoed);
        assert_eq!(serde_json::to_string(&back).unwrap(), echoed);
    }
}
