//! JSON sequence files and profile CSV export.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::table::write_rows;

use super::{DeltaProfile, SequenceError, SequenceSpec, TailRegime};

/// On-disk form: `{"values": [...], "regime": "...", "alpha": x}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub values: Vec<f64>,
    #[serde(default = "default_regime")]
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn default_regime() -> String {
    "explicit".into()
}

pub fn parse_regime<T: Scalar>(
    label: &str,
    alpha: Option<f64>,
) -> Result<TailRegime<T>, SequenceError> {
    let need_alpha = || {
        let a = alpha
            .ok_or_else(|| SequenceError::Parse(format!("regime `{label}` needs \"alpha\"")))?;
        T::from_f64(a).ok_or_else(|| SequenceError::Parse(format!("alpha {a} not representable")))
    };
    Ok(match label {
        "explicit" => TailRegime::ExplicitOnly,
        "conservation" => TailRegime::ConservationOfMass,
        "eventually_above" => TailRegime::EventuallyAbove(need_alpha()?),
        "dips" => TailRegime::DipsInfinitelyOften(need_alpha()?),
        "pointwise" => TailRegime::PointwiseDominated,
        "zeros" => TailRegime::ZerosInfinitelyOften,
        other => return Err(SequenceError::Parse(format!("unknown regime `{other}`"))),
    })
}

impl SequenceFile {
    pub fn into_spec<T: Scalar>(
        self,
        default_name: &str,
    ) -> Result<SequenceSpec<T>, SequenceError> {
        let regime = parse_regime(&self.regime, self.alpha)?;
        let values = self
            .values
            .iter()
            .map(|&v| {
                if !v.is_finite() {
                    return Err(SequenceError::Parse(format!("non-finite value {v}")));
                }
                T::from_f64(v)
                    .ok_or_else(|| SequenceError::Parse(format!("value {v} not representable")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        SequenceSpec::new(
            values,
            regime,
            self.name.unwrap_or_else(|| default_name.into()),
        )
    }

    pub fn from_spec<T: Scalar>(spec: &SequenceSpec<T>) -> Self {
        Self {
            values: spec.values().iter().map(|v| v.to_f64_lossy()).collect(),
            regime: spec.regime().label().into(),
            alpha: spec.regime().alpha().map(|a| a.to_f64_lossy()),
            name: Some(spec.name().into()),
        }
    }
}

pub fn parse_sequence(json: &str, default_name: &str) -> Result<SequenceSpec<f64>, SequenceError> {
    let f: SequenceFile =
        serde_json::from_str(json).map_err(|e| SequenceError::Parse(e.to_string()))?;
    f.into_spec(default_name)
}

pub fn load_sequence(path: &Path) -> Result<SequenceSpec<f64>, SequenceError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SequenceError::Io(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sequence");
    parse_sequence(&text, stem)
}

/// `k,delta,is_zero,is_record,is_tail_min` with 0/1 flags; tail minima are
/// those certified with `guard`.
pub fn profile_csv<T: Scalar>(profile: &DeltaProfile<T>, guard: usize) -> String {
    let minima = super::running_tail_minima(profile, guard).unwrap_or_default();
    let flag = |b: bool| u8::from(b);
    let rows = (1..=profile.window()).map(|k| {
        (
            k,
            profile.delta(k).to_f64_lossy(),
            flag(profile.is_zero(k)),
            flag(profile.strict_decrease_records.binary_search(&k).is_ok()),
            flag(minima.binary_search(&k).is_ok()),
        )
    });
    write_rows(&["k", "delta", "is_zero", "is_record", "is_tail_min"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let s = parse_sequence(
            r#"{"values":[0,1,2.5],"regime":"eventually_above","alpha":1.5}"#,
            "x",
        )
        .unwrap();
        assert_eq!(s.values(), &[0.0, 1.0, 2.5]);
        assert_eq!(s.regime(), TailRegime::EventuallyAbove(1.5));
        let back: SequenceSpec<f64> = SequenceFile::from_spec(&s).into_spec("y").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_sequence(r#"{"values":[0,1],"regime":"dips"}"#, "x").is_err());
        assert!(parse_sequence(r#"{"values":[0,1],"regime":"sideways"}"#, "x").is_err());
        assert!(parse_sequence(r#"{"values":[2,1]}"#, "x").is_err());
        assert!(parse_sequence(r#"{"values":[1,2],"extra":0}"#, "x").is_err());
        assert!(parse_sequence("not json", "x").is_err());
    }

    #[test]
    fn csv_flags() {
        let p = DeltaProfile::from_deltas(vec![0.5, 0.0, 0.25]);
        let csv = profile_csv(&p, 0);
        assert_eq!(
            csv,
            "k,delta,is_zero,is_record,is_tail_min\n1,0.5,0,1,0\n2,0.0,1,1,1\n3,0.25,0,0,1\n"
        );
    }
}
