use std::fs;
use std::path::Path;

use carpenter::construct::persist::{self, OracleRecord, ProblemRecord};
use carpenter::construct::{d2d_dispatch, ConstructOptions, ConstructionResult};
use carpenter::operators::{neumann_model, sample_function, sine_in_cosine_coeffs, Flavor};
use carpenter::sequences::io::{profile_csv, SequenceFile};
use carpenter::sequences::{
    check_weak_majorization, delta_profile, DeltaProfile, TailRegime, Verdict,
};
use carpenter::table::write_rows;
use carpenter::verify::{verify_result, Tolerances, VerificationReport};
use log::info;
use serde_json::{json, Value};

use crate::config::{Overrides, Problem, RunConfig};
use crate::{CliError, Outcome};

pub const DEMOS: [&str; 2] = ["neumann-dirichlet", "sine-cosine-table"];
pub const DEFAULT_DEMO_WINDOW: usize = 64;
pub const DEFAULT_GRID: usize = 129;
const TABLE_SIZE: usize = 16;
const SAMPLED_VECTORS: usize = 8;
const GUARD: usize = 4;

fn domain(e: impl ToString) -> CliError {
    CliError::Domain(e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// The demo problem `diag((j−1)²)` → `j²` on `window` indices.
pub fn demo_problem(name: &str, ov: &Overrides) -> Result<Problem, CliError> {
    if name != "neumann-dirichlet" {
        return Err(domain(format!(
            "`{name}` is not a construction demo (expected neumann-dirichlet)"
        )));
    }
    let window = ov.window.unwrap_or(DEFAULT_DEMO_WINDOW);
    if window < 2 {
        return Err(CliError::Format(format!(
            "demo window must be at least 2, got {window}"
        )));
    }
    if let Some(s) = ov.steps {
        if window < s + 1 {
            return Err(CliError::Format(format!(
                "window {window} must be at least steps + 1 = {}",
                s + 1
            )));
        }
    }
    let demo = neumann_model::<f64>(window).map_err(domain)?;
    let mut tolerances = Tolerances::default();
    if let Some(t) = ov.tol_gram {
        tolerances.gram = t;
    }
    if let Some(t) = ov.tol_diag {
        tolerances.diagonal = t;
    }
    Ok(Problem {
        lambda: demo.lambda,
        d: demo.d,
        oracle: demo.oracle,
        window,
        steps: ov.steps,
        tolerances,
        output_dir: ov.out.clone(),
        seed: ov.seed,
    })
}

/// Checks the regime declared on `d` against what the window shows.
fn regime_consistency(problem: &Problem, p: &DeltaProfile<f64>) -> Result<(), String> {
    let w = p.window();
    let tol = p.zero_tol;
    match problem.d.regime() {
        TailRegime::ExplicitOnly if p.delta(w).abs() > tol => Err(format!(
            "explicit sequences need equal totals, but δ_{w} = {}",
            p.delta(w)
        )),
        TailRegime::ConservationOfMass if w > 1 && p.delta(w) >= p.delta(1) && p.delta(1) > tol => {
            Err(format!(
                "δ does not decay on the window: δ_1 = {}, δ_{w} = {}",
                p.delta(1),
                p.delta(w)
            ))
        }
        TailRegime::EventuallyAbove(a) if p.delta(w) < a - tol => Err(format!(
            "δ_{w} = {} lies below the declared α = {a}",
            p.delta(w)
        )),
        TailRegime::DipsInfinitelyOften(a) if !(w / 2 + 1..=w).any(|k| p.delta(k) < a) => Err(
            format!("δ never dips below α = {a} on the second half of the window"),
        ),
        TailRegime::PointwiseDominated => {
            match (1..=w).find(|&k| problem.lambda.at(k) > problem.d.at(k)) {
                Some(k) => Err(format!(
                    "λ_{k} = {} exceeds d_{k} = {}",
                    problem.lambda.at(k),
                    problem.d.at(k)
                )),
                None => Ok(()),
            }
        }
        TailRegime::ZerosInfinitelyOften if !(1..=w).any(|k| p.is_zero(k)) => {
            Err("δ has no zero on the window".into())
        }
        _ => Ok(()),
    }
}

/// Majorization and regime validation. Writes `delta_profile.csv` and
/// `verdict.json` when an output directory is set.
pub fn cmd_check(problem: &Problem) -> Result<Outcome, CliError> {
    let w = problem.window;
    let profile = delta_profile(&problem.lambda, &problem.d, w).map_err(domain)?;
    let verdict = check_weak_majorization(&problem.lambda, &problem.d, w).map_err(domain)?;
    let regime = regime_consistency(problem, &profile);
    let first = match verdict {
        Verdict::Ok => None,
        Verdict::Violation {
            first_violation_index,
        } => Some(first_violation_index),
    };
    let reason = match (first, &regime) {
        (Some(k), _) => Some(format!("first_violation_index={k}")),
        (None, Err(r)) => Some(format!("regime: {r}")),
        (None, Ok(())) => None,
    };
    let pass = reason.is_none();
    let out = json!({
        "command": "check",
        "pass": pass,
        "window": w,
        "regime": problem.d.regime().label(),
        "majorization": { "pass": first.is_none(), "first_violation_index": first },
        "regime_check": { "pass": regime.is_ok(), "reason": regime.err() },
        "reason": reason,
    });
    if let Some(dir) = &problem.output_dir {
        write_file(
            &dir.join("delta_profile.csv"),
            &profile_csv(&profile, GUARD),
        )?;
        write_file(&dir.join("verdict.json"), &pretty(&out))?;
    }
    info!("check: window {w}, pass {pass}");
    Ok(Outcome::new(pass, out))
}

/// Runs the dispatcher and the independent verification.
pub fn run_problem(
    problem: &Problem,
) -> Result<(ConstructionResult<f64>, VerificationReport), CliError> {
    let opts = ConstructOptions {
        window: Some(problem.window),
        max_steps: problem.steps,
        ..ConstructOptions::default()
    };
    let result =
        d2d_dispatch(&problem.oracle, &problem.lambda, &problem.d, &opts).map_err(domain)?;
    let report = verify_result(
        &problem.oracle,
        &result,
        problem.d.values(),
        &problem.tolerances,
    )
    .map_err(domain)?;
    Ok((result, report))
}

fn construct_summary(result: &ConstructionResult<f64>, v: &VerificationReport) -> Value {
    json!({
        "command": "construct",
        "pass": v.pass,
        "route": result.route,
        "window": result.window,
        "constructed": result.constructed.len(),
        "residuals": result.residuals.len(),
        "untouched": result.untouched.len(),
        "moves": result.move_count(),
        "gram_max_dev": v.gram.max_deviation,
        "diag_max_dev": v.diagonal.max_deviation,
        "ledger_dev": v.ledger.deviation,
        "ledger_scale": v.ledger.scale,
    })
}

fn write_result(
    dir: &Path,
    problem: &Problem,
    result: &ConstructionResult<f64>,
    v: &VerificationReport,
) -> Result<(), CliError> {
    let record = ProblemRecord {
        lambda: SequenceFile::from_spec(&problem.lambda),
        d: SequenceFile::from_spec(&problem.d),
        oracle: OracleRecord::from_oracle(&problem.oracle),
    };
    let report = persist::build_report(result, record, problem.seed, Some(v.clone()));
    persist::write_run(dir, result, &report).map_err(|e| CliError::Io(e.to_string()))
}

/// Constructs, verifies and (with an output directory) writes the result
/// directory.
pub fn cmd_construct(problem: &Problem) -> Result<Outcome, CliError> {
    let (result, v) = run_problem(problem)?;
    if let Some(dir) = &problem.output_dir {
        write_result(dir, problem, &result, &v)?;
    }
    info!(
        "construct: route {}, {} moves, ledger {:e} (scale {:e})",
        result.route.label(),
        result.move_count(),
        v.ledger.deviation,
        v.ledger.scale
    );
    Ok(Outcome::new(v.pass, construct_summary(&result, &v)))
}

/// Re-verifies a result directory against the problem's own `d`. The
/// refreshed report goes to `out` (default: the result directory).
pub fn cmd_verify(dir: &Path, ov: &Overrides) -> Result<Outcome, CliError> {
    let loaded = persist::load_run(dir).map_err(|e| match e {
        persist::PersistError::Io { .. } => CliError::Io(e.to_string()),
        persist::PersistError::Parse { .. } => CliError::Format(e.to_string()),
    })?;
    let d = loaded
        .report
        .problem
        .d
        .clone()
        .into_spec::<f64>("d")
        .map_err(|e| CliError::Format(format!("report.json: {e}")))?;
    let mut tol = loaded
        .report
        .verification
        .as_ref()
        .map(|v| v.tolerances)
        .unwrap_or_default();
    if let Some(t) = ov.tol_gram {
        tol.gram = t;
    }
    if let Some(t) = ov.tol_diag {
        tol.diagonal = t;
    }
    let v = verify_result(&loaded.oracle, &loaded.result, d.values(), &tol).map_err(domain)?;
    let mut report = loaded.report;
    report.verification = Some(v.clone());
    let target = ov.out.as_deref().unwrap_or(dir);
    fs::create_dir_all(target).map_err(|e| CliError::Io(format!("{}: {e}", target.display())))?;
    persist::write_report(target, &report).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(&target.join("defect_table.csv"), &persist::defect_csv(&v))?;
    let out = json!({
        "command": "verify",
        "pass": v.pass,
        "gram_max_dev": v.gram.max_deviation,
        "diag_max_dev": v.diagonal.max_deviation,
        "ledger_dev": v.ledger.deviation,
        "replay_max_dev": v.replay.max_deviation,
        "checks": {
            "gram": v.gram.pass,
            "diagonal": v.diagonal.pass,
            "ledger": v.ledger.pass,
            "replay": v.replay.pass,
        },
    });
    Ok(Outcome::new(v.pass, out))
}

/// `slot,x,value` samples of the first constructed vectors as functions on
/// `[0, π]` in the Neumann eigenbasis.
pub fn samples_csv(result: &ConstructionResult<f64>, grid: usize) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for c in result.constructed.iter().take(SAMPLED_VECTORS) {
        let samples = sample_function(&c.vector, Flavor::Neumann, grid).map_err(domain)?;
        rows.extend(samples.into_iter().map(|(x, y)| (c.slot, x, y)));
    }
    Ok(write_rows(&["slot", "x", "value"], rows))
}

/// `j,k,coefficient` for `∫_0^π sin(jx) cos(kx) dx`, `1 ≤ j ≤ 16`, `0 ≤ k ≤ 16`.
pub fn sine_cosine_table() -> String {
    let rows = (1..=TABLE_SIZE)
        .flat_map(|j| (0..=TABLE_SIZE).map(move |k| (j, k, sine_in_cosine_coeffs(j, k))));
    write_rows(&["j", "k", "coefficient"], rows)
}

pub fn cmd_demo(name: &str, grid: usize, ov: &Overrides) -> Result<Outcome, CliError> {
    match name {
        "sine-cosine-table" => {
            let table = sine_cosine_table();
            if let Some(dir) = &ov.out {
                write_file(&dir.join("sine_cosine_table.csv"), &table)?;
            }
            Ok(Outcome::new(
                true,
                json!({ "command": "demo", "demo": name, "pass": true, "rows": TABLE_SIZE * (TABLE_SIZE + 1) }),
            ))
        }
        "neumann-dirichlet" => {
            if grid < 2 {
                return Err(domain(format!(
                    "grid must have at least 2 points, got {grid}"
                )));
            }
            let problem = demo_problem(name, ov)?;
            let (result, v) = run_problem(&problem)?;
            let samples = samples_csv(&result, grid)?;
            if let Some(dir) = &problem.output_dir {
                write_result(dir, &problem, &result, &v)?;
                write_file(&dir.join("samples.csv"), &samples)?;
            }
            let mut out = construct_summary(&result, &v);
            out["command"] = json!("demo");
            out["demo"] = json!(name);
            out["grid"] = json!(grid);
            Ok(Outcome::new(v.pass, out))
        }
        other => Err(domain(format!(
            "unknown demo `{other}`; known demos: {}",
            DEMOS.join(", ")
        ))),
    }
}

/// A self-contained config (all sequences inline) for `problem`, written to
/// `out` or returned on stdout.
pub fn cmd_export(problem: &Problem, out: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = RunConfig::inlined(problem);
    if let Some(path) = out {
        write_file(path, &pretty(&cfg))?;
        return Ok(Outcome::new(
            true,
            json!({ "command": "export", "pass": true }),
        ));
    }
    Ok(Outcome::new(
        true,
        serde_json::to_value(&cfg).expect("serializable"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(lambda: &str, d: &str) -> Problem {
        RunConfig::parse(&format!(r#"{{"lambda": {lambda}, "d": {d}}}"#))
            .unwrap()
            .resolve(Path::new("."), &Overrides::default())
            .unwrap()
    }

    #[test]
    fn check_reports_first_violation() {
        let p = problem(r#"{"values": [1, 2]}"#, r#"{"values": [0, 5]}"#);
        let o = cmd_check(&p).unwrap();
        assert_eq!(o.code, 2);
        assert_eq!(o.json["majorization"]["first_violation_index"], 1);
        assert_eq!(o.json["reason"], "first_violation_index=1");
    }

    #[test]
    fn check_regimes() {
        let ok = problem(
            r#"{"values": [0, 1, 2]}"#,
            r#"{"values": [0.5, 0.75, 1.875], "regime": "conservation"}"#,
        );
        assert_eq!(cmd_check(&ok).unwrap().code, 0);
        let grow = problem(
            r#"{"values": [0, 1, 2]}"#,
            r#"{"values": [0.5, 1.5, 2.5], "regime": "conservation"}"#,
        );
        assert_eq!(cmd_check(&grow).unwrap().code, 2);
        let explicit = problem(r#"{"values": [0, 1, 2]}"#, r#"{"values": [0.5, 1, 2]}"#);
        assert_eq!(cmd_check(&explicit).unwrap().code, 2);
        let zeros = problem(
            r#"{"values": [0, 1, 2]}"#,
            r#"{"values": [0.5, 0.5, 2.5], "regime": "zeros"}"#,
        );
        assert_eq!(cmd_check(&zeros).unwrap().code, 0);
    }

    #[test]
    fn sine_cosine_entry() {
        let table = sine_cosine_table();
        assert!(table.lines().any(|l| l == "1,0,2.0"));
        assert_eq!(table.lines().count(), 1 + 16 * 17);
    }

    #[test]
    fn demo_errors() {
        assert_eq!(
            cmd_demo("nope", 10, &Overrides::default())
                .unwrap_err()
                .exit_code(),
            2
        );
        assert_eq!(
            cmd_demo("neumann-dirichlet", 1, &Overrides::default())
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
