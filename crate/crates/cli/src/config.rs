//! Run configuration files.
//!
//! ```json
//! {
//!   "lambda": {"values": [0, 1, 2], "regime": "explicit"},
//!   "d": {"path": "d.json"},
//!   "regime": {"label": "conservation"},
//!   "window": 32,
//!   "steps": 31,
//!   "tolerances": {"gram": 1e-9},
//!   "output_dir": "out/run",
//!   "seed": 7
//! }
//! ```
//!
//! Sequence paths are resolved relative to the config file. Without an
//! `oracle` entry the operator is `diag(λ)`.

use std::path::{Path, PathBuf};

use carpenter::construct::persist::OracleRecord;
use carpenter::operators::EntryOracle;
use carpenter::sequences::io::{parse_regime, SequenceFile};
use carpenter::sequences::SequenceSpec;
use carpenter::verify::Tolerances;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSource {
    File { path: PathBuf },
    Inline(SequenceFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeOverride {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: SequenceSource,
    pub d: SequenceSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
    /// Replaces the regime declared in the `d` file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub window: Option<usize>,
    pub steps: Option<usize>,
    pub tol_gram: Option<f64>,
    pub tol_diag: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// A config with all sources loaded and overrides applied.
#[derive(Debug, Clone)]
pub struct Problem {
    pub lambda: SequenceSpec<f64>,
    pub d: SequenceSpec<f64>,
    pub oracle: EntryOracle<f64>,
    pub window: usize,
    pub steps: Option<usize>,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Format(m) => CliError::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Loads the sequences (relative to `base`) and applies `ov`.
    pub fn resolve(&self, base: &Path, ov: &Overrides) -> Result<Problem, CliError> {
        let lambda = load_source(&self.lambda, base, "lambda")?;
        let mut d = load_source(&self.d, base, "d")?;
        if let Some(r) = &self.regime {
            let regime = parse_regime(&r.label, r.alpha)
                .map_err(|e| CliError::Format(format!("regime: {e}")))?;
            d = d.with_regime(regime);
        }
        let oracle = match &self.oracle {
            Some(rec) => rec
                .to_oracle()
                .map_err(|e| CliError::Format(format!("oracle: {e}")))?,
            None => EntryOracle::from_spec(&lambda),
        };
        let avail = lambda.len().min(d.len()).min(oracle.window());
        let window = ov.window.or(self.window).unwrap_or(avail);
        let steps = ov.steps.or(self.steps);
        if window == 0 || window > avail {
            return Err(CliError::Format(format!(
                "window {window} outside 1..={avail} (the shortest of λ, d and the oracle)"
            )));
        }
        if let Some(s) = steps {
            if window < s + 1 {
                return Err(CliError::Format(format!(
                    "window {window} must be at least steps + 1 = {}",
                    s + 1
                )));
            }
        }
        let mut tolerances = self.tolerances.unwrap_or_default();
        if let Some(t) = ov.tol_gram {
            tolerances.gram = t;
        }
        if let Some(t) = ov.tol_diag {
            tolerances.diagonal = t;
        }
        let output_dir = ov
            .out
            .clone()
            .or_else(|| self.output_dir.as_ref().map(|p| base.join(p)));
        Ok(Problem {
            lambda,
            d,
            oracle,
            window,
            steps,
            tolerances,
            output_dir,
            seed: ov.seed.or(self.seed),
        })
    }

    /// The same problem with every sequence inlined.
    pub fn inlined(problem: &Problem) -> Self {
        Self {
            lambda: SequenceSource::Inline(SequenceFile::from_spec(&problem.lambda)),
            d: SequenceSource::Inline(SequenceFile::from_spec(&problem.d)),
            oracle: (!problem.oracle.is_diagonal())
                .then(|| OracleRecord::from_oracle(&problem.oracle)),
            regime: None,
            window: Some(problem.window),
            steps: problem.steps,
            tolerances: Some(problem.tolerances),
            output_dir: None,
            seed: problem.seed,
        }
    }
}

fn load_source(
    src: &SequenceSource,
    base: &Path,
    name: &str,
) -> Result<SequenceSpec<f64>, CliError> {
    let file = match src {
        SequenceSource::Inline(f) => f.clone(),
        SequenceSource::File { path } => {
            let full = base.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Format(format!("{}: {e}", full.display())))?
        }
    };
    file.into_spec(name)
        .map_err(|e| CliError::Format(format!("{name}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_overrides() {
        let cfg = RunConfig::parse(
            r#"{"lambda": {"values": [0, 1, 2, 3]}, "d": {"values": [0.5, 1, 2, 2.5], "regime": "conservation"},
                "window": 4, "steps": 3, "tolerances": {"gram": 1e-11}}"#,
        )
        .unwrap();
        let p = cfg
            .resolve(
                Path::new("."),
                &Overrides {
                    tol_diag: Some(1e-7),
                    window: Some(3),
                    steps: Some(2),
                    ..Default::default()
                },
            )
            .unwrap();
        assert_eq!(p.window, 3);
        assert_eq!(p.tolerances.gram, 1e-11);
        assert_eq!(p.tolerances.diagonal, 1e-7);
        assert_eq!(p.tolerances.ledger, Tolerances::default().ledger);
        assert_eq!(p.d.regime().label(), "conservation");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(RunConfig::parse("{"), Err(CliError::Format(_))));
        assert!(matches!(
            RunConfig::parse(r#"{"lambda": {"values": [0]}, "d": {"values": [0]}, "colour": 1}"#),
            Err(CliError::Format(_))
        ));
        let cfg = RunConfig::parse(
            r#"{"lambda": {"values": [0, 1]}, "d": {"values": [0, 1]}, "steps": 2}"#,
        )
        .unwrap();
        assert!(matches!(
            cfg.resolve(Path::new("."), &Overrides::default()),
            Err(CliError::Format(_))
        ));
        let cfg = RunConfig::parse(r#"{"lambda": {"path": "missing.json"}, "d": {"values": [0]}}"#)
            .unwrap();
        assert!(matches!(
            cfg.resolve(Path::new("."), &Overrides::default()),
            Err(CliError::Io(_))
        ));
    }
}
