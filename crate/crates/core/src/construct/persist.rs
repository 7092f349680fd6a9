//! Run directories: everything needed to re-verify a construction without
//! re-running it.
//!
//! ```text
//! report.json          problem, route, parameters, summaries, verification
//! vectors.csv          slot,target,index,coefficient
//! residuals.csv        slot,chain_id,index,coefficient
//! moves_chain_<id>.csv one move log per chain
//! transforms.json      sequence transforms and target assignments
//! defect_table.csv     j,defect,closed_form
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::moves::{FrameVector, MoveLog};
use crate::operators::{EntryOracle, OracleKind};
use crate::sequences::io::SequenceFile;
use crate::table::{read_rows, write_rows};
use crate::verify::VerificationReport;

use super::{ChainState, Constructed, ConstructionResult, Residual, Route, TransformRecord};

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleRecord {
    Diagonal { values: Vec<f64> },
    Dense { rows: Vec<Vec<f64>> },
}

impl OracleRecord {
    pub fn from_oracle(oracle: &EntryOracle<f64>) -> Self {
        match oracle.kind() {
            OracleKind::Diagonal(v) => OracleRecord::Diagonal { values: v.clone() },
            OracleKind::DenseSymmetric { n, .. } => OracleRecord::Dense {
                rows: (1..=*n)
                    .map(|i| {
                        (1..=*n)
                            .map(|j| oracle.entry(i, j).unwrap_or(f64::NAN))
                            .collect()
                    })
                    .collect(),
            },
        }
    }

    pub fn to_oracle(&self) -> Result<EntryOracle<f64>, String> {
        match self {
            OracleRecord::Diagonal { values } => Ok(EntryOracle::diagonal(values.clone())),
            OracleRecord::Dense { rows } => EntryOracle::dense(rows).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub lambda: SequenceFile,
    pub d: SequenceFile,
    pub oracle: OracleRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSummary {
    pub slot: usize,
    pub target: f64,
    pub achieved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub slot: usize,
    pub chain_id: usize,
    pub current_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub chain_id: usize,
    pub file: String,
    pub moves: usize,
    #[serde(default)]
    pub near_identity_steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub route: Route,
    pub window: usize,
    pub parameters: BTreeMap<String, Value>,
    pub problem: ProblemRecord,
    pub constructed: Vec<SlotSummary>,
    pub residuals: Vec<ResidualSummary>,
    pub untouched: Vec<usize>,
    pub chains: Vec<ChainState<f64>>,
    pub logs: Vec<LogSummary>,
    pub notes: Vec<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub verification: Option<VerificationReport>,
}

/// A run directory read back into memory.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub report: RunReport,
    pub oracle: EntryOracle<f64>,
    pub result: ConstructionResult<f64>,
}

fn io_err(path: &Path, e: impl ToString) -> PersistError {
    PersistError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn parse_err(path: &Path, e: impl ToString) -> PersistError {
    PersistError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write(path: &Path, text: &str) -> Result<(), PersistError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read(path: &Path) -> Result<String, PersistError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

pub fn log_file_name(chain_id: usize) -> String {
    format!("moves_chain_{chain_id}.csv")
}

const VECTORS_HEADER: [&str; 4] = ["slot", "target", "index", "coefficient"];
const RESIDUALS_HEADER: [&str; 4] = ["slot", "chain_id", "index", "coefficient"];

#[derive(Serialize, Deserialize)]
struct VectorRow {
    slot: usize,
    target: f64,
    index: usize,
    coefficient: f64,
}

#[derive(Serialize, Deserialize)]
struct ResidualRow {
    slot: usize,
    chain_id: usize,
    index: usize,
    coefficient: f64,
}

#[derive(Serialize)]
struct DefectRow {
    j: usize,
    defect: f64,
    closed_form: Option<f64>,
}

pub fn vectors_csv(result: &ConstructionResult<f64>) -> String {
    let rows = result.constructed.iter().flat_map(|c| {
        c.vector
            .entries()
            .iter()
            .map(|&(index, coefficient)| VectorRow {
                slot: c.slot,
                target: c.target,
                index,
                coefficient,
            })
    });
    write_rows(&VECTORS_HEADER, rows)
}

pub fn residuals_csv(result: &ConstructionResult<f64>) -> String {
    let rows = result.residuals.iter().flat_map(|r| {
        r.vector
            .entries()
            .iter()
            .map(|&(index, coefficient)| ResidualRow {
                slot: r.slot,
                chain_id: r.chain_id,
                index,
                coefficient,
            })
    });
    write_rows(&RESIDUALS_HEADER, rows)
}

/// `j,defect,closed_form`; the last column is empty where no closed form
/// applies.
pub fn defect_csv(report: &VerificationReport) -> String {
    let rows = report.defects.iter().map(|row| DefectRow {
        j: row.j,
        defect: row.defect,
        closed_form: row.closed_form,
    });
    write_rows(&["j", "defect", "closed_form"], rows)
}

pub fn build_report(
    result: &ConstructionResult<f64>,
    problem: ProblemRecord,
    seed: Option<u64>,
    verification: Option<VerificationReport>,
) -> RunReport {
    RunReport {
        route: result.route,
        window: result.window,
        parameters: result.parameters.clone(),
        problem,
        constructed: result
            .constructed
            .iter()
            .map(|c| SlotSummary {
                slot: c.slot,
                target: c.target,
                achieved: c.achieved,
            })
            .collect(),
        residuals: result
            .residuals
            .iter()
            .map(|r| ResidualSummary {
                slot: r.slot,
                chain_id: r.chain_id,
                current_value: r.current_value,
            })
            .collect(),
        untouched: result.untouched.clone(),
        chains: result.chains.clone(),
        logs: result
            .logs
            .iter()
            .map(|l| LogSummary {
                chain_id: l.chain_id,
                file: log_file_name(l.chain_id),
                moves: l.len(),
                near_identity_steps: l.near_identity_steps.clone(),
            })
            .collect(),
        notes: result.notes.clone(),
        seed,
        verification,
    }
}

/// Writes all artifacts of `result` into `dir` (created if missing).
pub fn write_run(
    dir: &Path,
    result: &ConstructionResult<f64>,
    report: &RunReport,
) -> Result<(), PersistError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write(&dir.join("vectors.csv"), &vectors_csv(result))?;
    write(&dir.join("residuals.csv"), &residuals_csv(result))?;
    for log in &result.logs {
        write(&dir.join(log_file_name(log.chain_id)), &log.to_csv())?;
    }
    let transforms =
        serde_json::to_string_pretty(&result.transforms_applied).map_err(|e| parse_err(dir, e))?;
    write(&dir.join("transforms.json"), &(transforms + "\n"))?;
    if let Some(v) = &report.verification {
        write(&dir.join("defect_table.csv"), &defect_csv(v))?;
    }
    write_report(dir, report)
}

pub fn write_report(dir: &Path, report: &RunReport) -> Result<(), PersistError> {
    let text = serde_json::to_string_pretty(report).map_err(|e| parse_err(dir, e))?;
    write(&dir.join("report.json"), &(text + "\n"))
}

/// Groups `(slot, tag, index, coefficient)` rows into one vector per slot;
/// the tag (target or chain id) must agree across a slot's rows.
fn group_vectors<G: PartialEq + Copy>(
    path: &Path,
    rows: impl IntoIterator<Item = (usize, G, usize, f64)>,
) -> Result<Vec<(usize, G, FrameVector<f64>)>, PersistError> {
    let mut slots: BTreeMap<usize, (G, Vec<(usize, f64)>)> = BTreeMap::new();
    for (slot, tag, j, x) in rows {
        let entry = slots.entry(slot).or_insert_with(|| (tag, Vec::new()));
        if entry.0 != tag {
            return Err(parse_err(
                path,
                format!("inconsistent rows for slot {slot}"),
            ));
        }
        entry.1.push((j, x));
    }
    Ok(slots
        .into_iter()
        .map(|(slot, (tag, entries))| {
            (
                slot,
                tag,
                FrameVector::from_entries(format!("e{slot}"), entries),
            )
        })
        .collect())
}

pub fn load_run(dir: &Path) -> Result<LoadedRun, PersistError> {
    let report_path = dir.join("report.json");
    let report: RunReport =
        serde_json::from_str(&read(&report_path)?).map_err(|e| parse_err(&report_path, e))?;
    let oracle = report
        .problem
        .oracle
        .to_oracle()
        .map_err(|e| parse_err(&report_path, e))?;

    let vpath = dir.join("vectors.csv");
    let achieved: BTreeMap<usize, f64> = report
        .constructed
        .iter()
        .map(|c| (c.slot, c.achieved))
        .collect();
    let rows: Vec<VectorRow> =
        read_rows(&read(&vpath)?, &VECTORS_HEADER).map_err(|e| parse_err(&vpath, e))?;
    let rows = rows
        .into_iter()
        .map(|r| (r.slot, r.target, r.index, r.coefficient));
    let mut constructed = Vec::new();
    for (slot, target, vector) in group_vectors(&vpath, rows)? {
        constructed.push(Constructed {
            slot,
            vector,
            target,
            achieved: achieved.get(&slot).copied().unwrap_or(f64::NAN),
        });
    }
    let rpath = dir.join("residuals.csv");
    let values: BTreeMap<usize, f64> = report
        .residuals
        .iter()
        .map(|r| (r.slot, r.current_value))
        .collect();
    let rows: Vec<ResidualRow> =
        read_rows(&read(&rpath)?, &RESIDUALS_HEADER).map_err(|e| parse_err(&rpath, e))?;
    let rows = rows
        .into_iter()
        .map(|r| (r.slot, r.chain_id, r.index, r.coefficient));
    let mut residuals = Vec::new();
    for (slot, chain_id, vector) in group_vectors(&rpath, rows)? {
        residuals.push(Residual {
            slot,
            vector,
            current_value: values.get(&slot).copied().unwrap_or(f64::NAN),
            chain_id,
        });
    }
    let mut logs = Vec::new();
    for s in &report.logs {
        let path = dir.join(&s.file);
        let mut log =
            MoveLog::from_csv(s.chain_id, &read(&path)?).map_err(|e| parse_err(&path, e))?;
        log.near_identity_steps = s.near_identity_steps.clone();
        logs.push(log);
    }
    let tpath = dir.join("transforms.json");
    let transforms: Vec<TransformRecord> =
        serde_json::from_str(&read(&tpath)?).map_err(|e| parse_err(&tpath, e))?;
    let result = ConstructionResult {
        route: report.route,
        window: report.window,
        parameters: report.parameters.clone(),
        constructed,
        residuals,
        untouched: report.untouched.clone(),
        logs,
        chains: report.chains.clone(),
        transforms_applied: transforms,
        notes: report.notes.clone(),
    };
    Ok(LoadedRun {
        report,
        oracle,
        result,
    })
}
