// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Everything that can go wrong inside the simulator and compiler.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AcamError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("programming did not converge after {iterations} pulses (best g = {best_g:.4e} S)")]
    ProgrammingFailure { best_g: f64, iterations: usize },

    #[error("inconsistent cell: lower bound {lo:.4} V exceeds upper bound {hi:.4} V")]
    InconsistentCell { lo: f64, hi: f64 },

    #[error("interval not achievable: {bound} bound {volts:.4} V lies outside [{min:.4}, {max:.4}] V")]
    OutOfWindow {
        bound: &'static str,
        volts: f64,
        min: f64,
        max: f64,
    },

    #[error("calibration failed: worst anchor residual {residual:.4} V exceeds {limit:.4} V")]
    CalibrationFailure { residual: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no matched point while sweeping row {row}, column {col}")]
    EmptyInterval { row: usize, col: usize },

    #[error("row {row} matches the stimulus, so the match line never crosses the sense threshold")]
    NoCrossing { row: usize },

    #[error("infeasible level packing: {0}")]
    InfeasiblePacking(String),

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("ambiguous lookup: {matches} rows matched")]
    Ambiguous { matches: usize },

    #[error("digit {digit} at row {row}, column {col} does not fit the level family")]
    LevelOverflow { row: usize, col: usize, digit: String },

    #[error("parse error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },
}

pub type Result<T> = std::result::Result<T, AcamError>;

impl AcamError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        AcamError::Domain(msg.into())
    }
}

impl From<serde_json::Error> for AcamError {
    fn from(e: serde_json::Error) -> Self {
        let line = (e.line() > 0).then_some(e.line());
        AcamError::Parse {
            line,
            msg: e.to_string(),
        }
    }
}
