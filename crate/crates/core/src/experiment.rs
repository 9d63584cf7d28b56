//! JSON experiment configurations: a pipeline, a checkpoint schedule,
//! verdict tolerances and an output format.
//!
//! ```json
//! {
//!   "pipeline": "uniform(3, 42) | seven",
//!   "checkpoints": { "kind": "geometric", "max_n": 1000000 },
//!   "tolerances": { "mean": 0.01, "frequency": 0.01 },
//!   "format": "csv",
//!   "seed": 7,
//!   "include_counts": false
//! }
//! ```
//!
//! `checkpoints` may instead be `{ "kind": "paper-l", "n_max": 3, "p": 1.0 }`,
//! which places checkpoints where blocks `k_n` and `k*_n` of the
//! oscillating construction end.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dsl::{self, PipelineExpr};
use crate::error::Error;
use crate::generators::checkpoints;
use crate::stats::{
    asymptotic_mean_verdict, frequency_verdicts, geometric_checkpoints, run_stats, LimitVerdict, StatsTrace,
    MIN_VERDICT_CHECKPOINTS,
};
use crate::stream::DigitStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: String,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub include_counts: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CheckpointSpec {
    Geometric { max_n: u64 },
    PaperL { n_max: usize, #[serde(default = "default_p")] p: f64 },
}

fn default_p() -> f64 {
    1.0
}

impl Default for CheckpointSpec {
    fn default() -> Self {
        CheckpointSpec::Geometric { max_n: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol")]
    pub mean: f64,
    #[serde(default = "default_tol")]
    pub frequency: f64,
}

fn default_tol() -> f64 {
    0.01
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { mean: default_tol(), frequency: default_tol() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// One or more field-level problems with a configuration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError(pub Vec<FieldError>);

impl ConfigError {
    pub fn single(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError(vec![FieldError { field: field.into(), message: message.into() }])
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", e.field, e.message)?;
        }
        Ok(())
    }
}

/// A configuration whose pipeline resolved and whose checkpoints are known.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub pipeline: PipelineExpr,
    pub stream: DigitStream,
    /// Positions with a human-readable label (`n=…` or `l_2`, `l*_3`).
    pub checkpoints: Vec<(String, u64)>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::single("config", e.to_string()))
    }

    pub fn validate(&self) -> Result<Experiment, ConfigError> {
        let mut errors = Vec::new();
        let mut push = |field: &str, message: String| errors.push(FieldError { field: field.into(), message });

        for (field, tol) in [("tolerances.mean", self.tolerances.mean), ("tolerances.frequency", self.tolerances.frequency)] {
            if !(tol.is_finite() && tol > 0.0) {
                push(field, format!("must be a positive number, got {tol}"));
            }
        }

        if self.seed.is_some_and(|s| s > i64::MAX as u64) {
            push("seed", format!("must be at most {}", i64::MAX));
        }

        let checkpoints = match self.checkpoints {
            CheckpointSpec::Geometric { max_n: 0 } => {
                push("checkpoints.max_n", "must be at least 1".into());
                None
            }
            CheckpointSpec::Geometric { max_n } => {
                Some(geometric_checkpoints(max_n).into_iter().map(|n| (format!("n={n}"), n)).collect())
            }
            CheckpointSpec::PaperL { n_max: 0, .. } => {
                push("checkpoints.n_max", "must be at least 1".into());
                None
            }
            CheckpointSpec::PaperL { n_max, p } => match checkpoints(p, n_max) {
                Ok(c) => Some(c.positions().into_iter().map(|(fam, i, n)| (format!("{fam}_{i}"), n)).collect()),
                Err(Error::Overflow(what)) => {
                    push("checkpoints.n_max", format!("too large: overflow in {what}"));
                    None
                }
                Err(e) => {
                    push("checkpoints.p", e.to_string());
                    None
                }
            },
        };

        let resolved = match dsl::parse(&self.pipeline) {
            Err(e) => {
                push("pipeline", e.to_string());
                None
            }
            Ok(expr) => {
                let expr = match self.seed {
                    Some(seed) => expr.with_seed(seed),
                    None => expr,
                };
                match dsl::resolve(&expr) {
                    Ok(stream) => Some((expr, stream)),
                    Err(e) => {
                        push("pipeline", e.to_string());
                        None
                    }
                }
            }
        };

        match (resolved, checkpoints) {
            (Some((pipeline, stream)), Some(checkpoints)) if errors.is_empty() => {
                Ok(Experiment { config: self.clone(), pipeline, stream, checkpoints })
            }
            _ => Err(ConfigError(errors)),
        }
    }
}

/// Trace plus verdicts for one experiment.
pub struct Outcome {
    pub pipeline: String,
    pub labels: Vec<String>,
    pub trace: StatsTrace,
    /// `None` when there are too few checkpoints for a verdict.
    pub mean_verdict: Option<LimitVerdict>,
    pub frequency_verdicts: Option<Vec<LimitVerdict>>,
}

impl Experiment {
    pub fn run(&self) -> Result<Outcome, Error> {
        let positions: Vec<u64> = self.checkpoints.iter().map(|(_, n)| *n).collect();
        let trace = run_stats(&self.stream, &positions)?;
        let enough = trace.rows().len() >= MIN_VERDICT_CHECKPOINTS;
        let tol = self.config.tolerances;
        Ok(Outcome {
            pipeline: self.pipeline.to_string(),
            labels: self.checkpoints.iter().map(|(l, _)| l.clone()).collect(),
            mean_verdict: if enough { Some(asymptotic_mean_verdict(&trace, tol.mean)?) } else { None },
            frequency_verdicts: if enough { Some(frequency_verdicts(&trace, tol.frequency)?) } else { None },
            trace,
        })
    }
}

impl Outcome {
    pub fn render(&self, format: OutputFormat, include_counts: bool) -> String {
        match format {
            OutputFormat::Csv => self.trace.to_csv(include_counts),
            OutputFormat::Json => {
                let mut v = self.trace.to_json(include_counts);
                v["pipeline"] = json!(self.pipeline);
                v["labels"] = json!(self.labels);
                v["mean_verdict"] = json!(self.mean_verdict);
                v["frequency_verdicts"] = json!(self.frequency_verdicts);
                let mut text = serde_json::to_string_pretty(&v).expect("trace serializes");
                text.push('\n');
                text
            }
        }
    }

    /// One line per verdict.
    pub fn summary(&self) -> String {
        let mut out = format!("pipeline: {}\n", self.pipeline);
        let last = self.trace.last();
        out.push_str(&format!("final n = {}, r_n = {}\n", last.n, last.mean()));
        let line = |name: String, v: &LimitVerdict| {
            format!(
                "{name}: {} (estimate {:.6}, tail range [{:.6}, {:.6}])\n",
                if v.converged { "converged" } else { "not converged" },
                v.estimate,
                v.low,
                v.high
            )
        };
        match (&self.mean_verdict, &self.frequency_verdicts) {
            (Some(m), Some(f)) => {
                out.push_str(&line("r".into(), m));
                for (i, v) in f.iter().enumerate() {
                    out.push_str(&line(format!("v{i}"), v));
                }
            }
            _ => out.push_str(&format!("too few checkpoints for verdicts (need {MIN_VERDICT_CHECKPOINTS})\n")),
        }
        out
    }
}
