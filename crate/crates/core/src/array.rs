// SPDX-License-Identifier: Apache-2.0

//! Array-level search. Every row is a lumped RC: the match line starts at
//! the precharge level (or at ground for the TS variant) and moves with the
//! summed conductance of the row's pull-down (pull-up) devices. The row
//! matches when the line is still on the right side of the sense level at
//! `t_sense`.

use std::f64::consts::LN_10;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::{
    achievable_window, bounds_from_conductance, conductance_from_bounds, gate_voltages, raw_bounds, CellConfig,
    VoltageInterval,
};
use crate::device::{program_memristor, pulldown_conductance, ts_conductance, DeviceParams, TsDeviceParams, TsState};
use crate::error::{AcamError, Result};

/// Pulse budget per device in [`ArraySpec::programmed`].
pub const PROGRAM_MAX_PULSES: usize = 100;

/// Step budget of [`ArraySpec::compensated_cell`].
pub const COMPENSATION_ITERS: usize = 8;

/// Edge error at which [`ArraySpec::compensated_cell`] stops.
pub const COMPENSATION_TOL: f64 = 1e-5;

/// Largest word length [`max_word_length`] reports.
pub const MAX_WORD_LENGTH: usize = 1 << 20;

/// Per-cell wire parasitics of the 16 nm layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parasitics {
    pub r_ml: f64,
    pub r_dl: f64,
    pub r_sl: f64,
    pub c_ml: f64,
    pub c_dl: f64,
    pub c_sl: f64,
}

impl Default for Parasitics {
    fn default() -> Self {
        Parasitics {
            r_ml: 1.91,
            r_dl: 2.27,
            r_sl: 0.85,
            c_ml: 0.227e-15,
            c_dl: 0.324e-15,
            c_sl: 0.454e-15,
        }
    }
}

/// Which device drives the match line on a mismatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Six-transistor cell, ML precharged high and pulled down on mismatch.
    #[default]
    TransistorPulldown,
    /// Threshold-switching cell, ML starts at ground and is pulled up on
    /// mismatch.
    TsPullup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<Vec<CellConfig>>,
    #[serde(default)]
    pub parasitics: Parasitics,
    pub v_precharge: f64,
    pub t_sense: f64,
    pub sense_frac: f64,
    /// Sense-node capacitance added to the per-cell ML capacitance.
    pub c_sense_fixed: f64,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub ts: TsDeviceParams,
}

impl ArraySpec {
    /// Array with default sensing (0.8 V precharge, 100 ps, half-rail
    /// threshold, 1 fF sense node).
    pub fn new(cells: Vec<Vec<CellConfig>>) -> Result<Self> {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        let spec = ArraySpec {
            rows,
            cols,
            cells,
            parasitics: Parasitics::default(),
            v_precharge: 0.8,
            t_sense: 100e-12,
            sense_frac: 0.5,
            c_sense_fixed: 1e-15,
            variant: Variant::TransistorPulldown,
            ts: TsDeviceParams::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `rows x cols` copies of one cell.
    pub fn uniform(rows: usize, cols: usize, cell: CellConfig) -> Result<Self> {
        ArraySpec::new(vec![vec![cell; cols]; rows])
    }

    /// Copy of the array with every memristor written by program-and-verify
    /// to within `tol` of its target. Each device draws from its own stream
    /// derived from `seed`, so the result does not depend on visit order.
    pub fn programmed(&self, seed: u64, tol: f64, p: &DeviceParams) -> Result<Self> {
        let mut out = self.clone();
        for (r, row) in out.cells.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                let base = seed ^ ((r as u64) << 32 | (c as u64) << 1);
                cell.g_m1 = program_memristor(cell.g_m1, base, tol, PROGRAM_MAX_PULSES, p)?.state.g;
                cell.g_m2 = program_memristor(cell.g_m2, base | 1, tol, PROGRAM_MAX_PULSES, p)?.state.g;
            }
        }
        Ok(out)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells.len() != self.rows {
            return Err(AcamError::DimensionMismatch {
                expected: self.rows,
                got: self.cells.len(),
            });
        }
        for row in &self.cells {
            if row.len() != self.cols {
                return Err(AcamError::DimensionMismatch {
                    expected: self.cols,
                    got: row.len(),
                });
            }
        }
        if !(self.sense_frac > 0.0 && self.sense_frac < 1.0) {
            return Err(AcamError::domain("sense_frac must lie in (0, 1)"));
        }
        if !(self.t_sense > 0.0 && self.v_precharge > 0.0 && self.c_sense_fixed >= 0.0) {
            return Err(AcamError::domain(
                "t_sense and v_precharge must be positive, c_sense_fixed non-negative",
            ));
        }
        let par = &self.parasitics;
        if [par.r_ml, par.r_dl, par.r_sl, par.c_ml, par.c_dl, par.c_sl]
            .iter()
            .any(|x| *x < 0.0)
        {
            return Err(AcamError::domain("parasitics must be non-negative"));
        }
        if self.variant == Variant::TsPullup {
            self.ts.validate()?;
        }
        Ok(())
    }

    /// Lumped match-line capacitance.
    pub fn c_ml_total(&self) -> f64 {
        self.cols as f64 * self.parasitics.c_ml + self.c_sense_fixed
    }

    /// Row conductance at which the match line lands exactly on the sense
    /// level at `t_sense`. Rows at or below it match.
    pub fn threshold_conductance(&self) -> f64 {
        self.c_ml_total() * (1.0 / self.sense_frac).ln() / self.t_sense
    }

    fn check_stimulus(&self, stimulus: &[f64]) -> Result<()> {
        if stimulus.len() != self.cols {
            return Err(AcamError::DimensionMismatch {
                expected: self.cols,
                got: stimulus.len(),
            });
        }
        if let Some(v) = stimulus.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(AcamError::domain(format!("stimulus {v} V outside [0, 1] V")));
        }
        Ok(())
    }

    /// Conductance one cell adds to its match line at DL voltage `v_dl`.
    #[inline]
    pub fn cell_conductance(&self, cell: &CellConfig, v_dl: f64, p: &DeviceParams) -> f64 {
        let (v_g1, v_g2) = gate_voltages(cell, v_dl, p);
        match self.variant {
            Variant::TransistorPulldown => {
                pulldown_conductance(v_g1, p) + pulldown_conductance(v_g2, p)
            }
            Variant::TsPullup => {
                // Level-shift so each TS device fires where the transistor
                // would have turned on.
                let shift = self.ts.v_threshold - p.v_th_ml;
                let (g1, _) = ts_conductance((v_g1 + shift).max(0.0), TsState::Off, &self.ts);
                let (g2, _) = ts_conductance((v_g2 + shift).max(0.0), TsState::Off, &self.ts);
                g1 + g2
            }
        }
    }

    /// Summed match-line conductance of one row.
    pub fn row_conductance(&self, row: usize, stimulus: &[f64], p: &DeviceParams) -> f64 {
        self.cells[row]
            .iter()
            .zip(stimulus)
            .map(|(c, &v)| self.cell_conductance(c, v, p))
            .sum()
    }

    /// DL voltages where a lone cell's conductance crosses this array's
    /// sense threshold, i.e. the interval it matches here when the rest of
    /// the row is silent.
    pub fn sensed_cell_bounds(&self, cell: &CellConfig, p: &DeviceParams) -> Result<VoltageInterval> {
        let limit = self.threshold_conductance();
        let g = |v: f64| self.cell_conductance(cell, v, p);
        let (lo, hi) = raw_bounds(*cell, p);
        let center = (0.5 * (lo + hi)).clamp(0.0, 1.0);
        if g(center) > limit {
            return Err(AcamError::EmptyInterval { row: 0, col: 0 });
        }
        let edge = |mut inside: f64, mut outside: f64| {
            if g(outside) <= limit {
                return outside;
            }
            for _ in 0..48 {
                let mid = 0.5 * (inside + outside);
                if g(mid) <= limit {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            inside
        };
        Ok(VoltageInterval {
            lo: edge(center, 0.0),
            hi: edge(center, 1.0),
        })
    }

    /// Conductances whose sensed interval in this array equals `target`.
    /// Edges on the achievable window are left where the device puts them.
    pub fn compensated_cell(&self, target: VoltageInterval, p: &DeviceParams) -> Result<CellConfig> {
        let window = achievable_window(p);
        let free_lo = target.lo <= window.lo + 1e-9;
        let free_hi = target.hi >= window.hi - 1e-9;
        let mut cell = conductance_from_bounds(target, p)?;
        if free_lo && free_hi {
            return Ok(cell);
        }
        let mut aim = target;
        for _ in 0..COMPENSATION_ITERS {
            let Ok(got) = self.sensed_cell_bounds(&cell, p) else {
                break;
            };
            let d_lo = if free_lo { 0.0 } else { target.lo - got.lo };
            let d_hi = if free_hi { 0.0 } else { target.hi - got.hi };
            if d_lo.abs() < COMPENSATION_TOL && d_hi.abs() < COMPENSATION_TOL {
                break;
            }
            let next = VoltageInterval {
                lo: (aim.lo + d_lo).clamp(window.lo, window.hi),
                hi: (aim.hi + d_hi).clamp(window.lo, window.hi),
            };
            if next.lo >= next.hi {
                break;
            }
            aim = next;
            cell = conductance_from_bounds(aim, p)?;
        }
        Ok(cell)
    }

    /// Match-line voltage at `t` for a total row conductance.
    pub fn ml_voltage(&self, g_row: f64, t: f64) -> f64 {
        let decay = (-g_row * t / self.c_ml_total()).exp();
        match self.variant {
            Variant::TransistorPulldown => self.v_precharge * decay,
            Variant::TsPullup => self.v_precharge * (1.0 - decay),
        }
    }

    /// Sense decision for a given ML voltage. Ties count as a match.
    pub fn is_match(&self, v_ml: f64) -> bool {
        match self.variant {
            Variant::TransistorPulldown => v_ml >= self.sense_frac * self.v_precharge,
            Variant::TsPullup => v_ml <= (1.0 - self.sense_frac) * self.v_precharge,
        }
    }

    /// Crossing time of the sense level: RC term plus the ML wire from the
    /// far end of the row to the sense node.
    pub fn crossing_time(&self, g_row: f64) -> Option<f64> {
        if g_row <= 0.0 {
            return None;
        }
        let r_wire = self.cols as f64 * self.parasitics.r_ml;
        Some(self.c_ml_total() * (1.0 / self.sense_frac).ln() * (1.0 / g_row + r_wire))
    }

    fn row_result(&self, g_row: f64) -> RowResult {
        let v_ml = self.ml_voltage(g_row, self.t_sense);
        let matched = self.is_match(v_ml);
        RowResult {
            matched,
            v_ml_at_sense: v_ml,
            latency: if matched { None } else { self.crossing_time(g_row) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowResult {
    pub matched: bool,
    pub v_ml_at_sense: f64,
    /// Time the ML crosses the sense level; `None` for matching rows.
    pub latency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub rows: Vec<RowResult>,
}

impl SearchResult {
    pub fn matched_rows(&self) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.matched.then_some(i))
            .collect()
    }
}

/// Search every row against one DL stimulus.
pub fn search(a: &ArraySpec, stimulus: &[f64], p: &DeviceParams) -> Result<SearchResult> {
    a.validate()?;
    a.check_stimulus(stimulus)?;
    let rows = (0..a.rows)
        .map(|r| a.row_result(a.row_conductance(r, stimulus, p)))
        .collect();
    Ok(SearchResult { rows })
}

/// Row-parallel [`search`] for large arrays.
pub fn search_par(a: &ArraySpec, stimulus: &[f64], p: &DeviceParams) -> Result<SearchResult> {
    a.validate()?;
    a.check_stimulus(stimulus)?;
    let rows = (0..a.rows)
        .into_par_iter()
        .map(|r| a.row_result(a.row_conductance(r, stimulus, p)))
        .collect();
    Ok(SearchResult { rows })
}

/// Indices of matching rows, stopping each row as soon as its conductance
/// passes the sense threshold. Same decisions as [`search`].
pub fn matching_rows(a: &ArraySpec, stimulus: &[f64], p: &DeviceParams) -> Result<Vec<usize>> {
    a.check_stimulus(stimulus)?;
    let limit = a.threshold_conductance();
    let mut out = Vec::new();
    for (r, row) in a.cells.iter().enumerate() {
        let mut g = 0.0;
        let mut over = false;
        for (c, &v) in row.iter().zip(stimulus) {
            g += a.cell_conductance(c, v, p);
            // 1e-9 relative slack leaves borderline rows to the exact test
            if g > limit * (1.0 + 1e-9) {
                over = true;
                break;
            }
        }
        if !over && a.is_match(a.ml_voltage(g, a.t_sense)) {
            out.push(r);
        }
    }
    Ok(out)
}

/// Stimulus that puts every column of `row` at the centre of its stored
/// interval.
pub fn center_bias(a: &ArraySpec, row: usize, p: &DeviceParams) -> Result<Vec<f64>> {
    a.cells[row]
        .iter()
        .map(|c| bounds_from_conductance(*c, p).map(|iv| iv.center()))
        .collect()
}

/// In-array match interval of one cell: hold the other columns at `bias`,
/// sweep column `col` over [0, 1] V in `step` increments, and return the
/// matched span with both edges refined by bisection.
pub fn effective_bounds_in_array(
    a: &ArraySpec,
    row: usize,
    col: usize,
    bias: &[f64],
    p: &DeviceParams,
    step: f64,
) -> Result<VoltageInterval> {
    a.validate()?;
    a.check_stimulus(bias)?;
    if row >= a.rows || col >= a.cols {
        return Err(AcamError::domain(format!(
            "cell ({row}, {col}) outside {}x{} array",
            a.rows, a.cols
        )));
    }
    if !(step > 0.0) {
        return Err(AcamError::domain("sweep step must be positive"));
    }
    let others: f64 = a.cells[row]
        .iter()
        .zip(bias)
        .enumerate()
        .filter(|(c, _)| *c != col)
        .map(|(_, (cell, &v))| a.cell_conductance(cell, v, p))
        .sum();
    let swept = a.cells[row][col];
    let matches = |v: f64| {
        let g = others + a.cell_conductance(&swept, v, p);
        a.is_match(a.ml_voltage(g, a.t_sense))
    };

    let n = (1.0 / step).floor() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    let hits: Vec<bool> = grid.par_iter().map(|&v| matches(v)).collect();
    let first = hits.iter().position(|&h| h);
    let last = hits.iter().rposition(|&h| h);
    let (Some(first), Some(last)) = (first, last) else {
        return Err(AcamError::EmptyInterval { row, col });
    };

    let refine = |mut inside: f64, mut outside: f64| {
        while (inside - outside).abs() > 1e-9 {
            let mid = 0.5 * (inside + outside);
            if matches(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = if first == 0 { grid[0] } else { refine(grid[first], grid[first - 1]) };
    let hi = if last == n { grid[n] } else { refine(grid[last], grid[last + 1]) };
    Ok(VoltageInterval { lo, hi })
}

/// Largest word length `N` with `g_on > ((margin - 1) N + 1) g_off`.
/// Returns [`MAX_WORD_LENGTH`] when the condition never binds.
pub fn max_word_length(p: &DeviceParams, margin_ratio: f64) -> usize {
    if p.g_off <= 0.0 || margin_ratio <= 1.0 {
        return MAX_WORD_LENGTH;
    }
    let bound = (p.g_on / p.g_off - 1.0) / (margin_ratio - 1.0);
    if bound <= 0.0 {
        return 0;
    }
    // strict inequality: an integer bound (up to rounding) is itself excluded
    let n = (bound * (1.0 - 1e-12)).floor();
    if n >= MAX_WORD_LENGTH as f64 {
        MAX_WORD_LENGTH
    } else {
        n.max(0.0) as usize
    }
}

/// First-order shift of a bound caused by `n_cols - 1` matching neighbours
/// each leaking `g_off`. The leak lowers the conductance the swept cell may
/// add before the row flips; dividing by the sub-threshold sensitivity
/// `G_th * ln10 / (alpha * swing)` at the sense point turns it into volts.
/// `G_th` is the row threshold of an `n_cols` array with default sensing.
pub fn analytic_range_shift(n_cols: usize, p: &DeviceParams) -> f64 {
    if n_cols <= 1 {
        return 0.0;
    }
    let cell = CellConfig::wildcard(p);
    let a = ArraySpec {
        rows: 1,
        cols: n_cols,
        cells: vec![vec![cell; n_cols]],
        ..ArraySpec::uniform(1, 1, cell).expect("1x1 array is valid")
    };
    analytic_range_shift_in(&a, p)
}

/// [`analytic_range_shift`] for the sensing parameters of `a`.
pub fn analytic_range_shift_in(a: &ArraySpec, p: &DeviceParams) -> f64 {
    if a.cols <= 1 {
        return 0.0;
    }
    let sensitivity = a.threshold_conductance() * LN_10 / (p.alpha * p.swing);
    (a.cols - 1) as f64 * p.g_off / sensitivity
}

/// Time for `row` to cross the sense level under `stimulus`.
pub fn discharge_latency(
    a: &ArraySpec,
    stimulus: &[f64],
    row: usize,
    p: &DeviceParams,
) -> Result<f64> {
    a.validate()?;
    a.check_stimulus(stimulus)?;
    if row >= a.rows {
        return Err(AcamError::domain(format!("row {row} outside array")));
    }
    let g = a.row_conductance(row, stimulus, p);
    let res = a.row_result(g);
    if res.matched {
        return Err(AcamError::NoCrossing { row });
    }
    res.latency.ok_or(AcamError::NoCrossing { row })
}

/// One sample of a DL sweep, as written to CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub v_dl: f64,
    pub row: usize,
    pub v_ml: f64,
    pub matched: bool,
}

/// Sweep column `col` over [0, 1] V with the other columns at `bias`,
/// recording the sensed ML voltage of every row.
pub fn sweep_column(
    a: &ArraySpec,
    col: usize,
    bias: &[f64],
    step: f64,
    p: &DeviceParams,
) -> Result<Vec<SweepPoint>> {
    a.validate()?;
    a.check_stimulus(bias)?;
    if col >= a.cols {
        return Err(AcamError::domain(format!("column {col} outside array")));
    }
    if !(step > 0.0) {
        return Err(AcamError::domain("sweep step must be positive"));
    }
    let n = (1.0 / step).floor() as usize;
    let points: Vec<Vec<SweepPoint>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            // rounded to the micro-volt so grid labels are stable
            let v = ((i as f64 * step).min(1.0) * 1e6).round() / 1e6;
            let mut stim = bias.to_vec();
            stim[col] = v;
            (0..a.rows)
                .map(|r| {
                    let res = a.row_result(a.row_conductance(r, &stim, p));
                    SweepPoint {
                        v_dl: v,
                        row: r,
                        v_ml: res.v_ml_at_sense,
                        matched: res.matched,
                    }
                })
                .collect()
        })
        .collect();
    Ok(points.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> DeviceParams {
        DeviceParams::calibrated()
    }

    #[test]
    fn single_cell_match_and_mismatch() {
        let p = p();
        let a = ArraySpec::uniform(1, 1, CellConfig::from_micro(40.0, 80.0)).unwrap();
        assert!(search(&a, &[0.4], &p).unwrap().rows[0].matched);
        assert!(!search(&a, &[0.3], &p).unwrap().rows[0].matched);
        assert!(!search(&a, &[0.5], &p).unwrap().rows[0].matched);
    }

    #[test]
    fn wildcard_rows_match_inside_window() {
        let p = p();
        let a = ArraySpec::uniform(3, 4, CellConfig::wildcard(&p)).unwrap();
        for v in [0.25, 0.33, 0.41, 0.55] {
            let res = search(&a, &[v; 4], &p).unwrap();
            assert!(res.rows.iter().all(|r| r.matched), "{v}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = p();
        let a = ArraySpec::uniform(2, 3, CellConfig::from_micro(40.0, 80.0)).unwrap();
        assert!(matches!(
            search(&a, &[0.4; 2], &p),
            Err(AcamError::DimensionMismatch { expected: 3, got: 2 })
        ));
        let mut bad = a.clone();
        bad.cells[1].pop();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn matching_rows_agrees_with_search() {
        let p = p();
        let cells = vec![
            vec![CellConfig::from_micro(40.0, 80.0), CellConfig::from_micro(20.0, 80.0)],
            vec![CellConfig::from_micro(20.0, 60.0), CellConfig::wildcard(&p)],
            vec![CellConfig::from_micro(60.0, 120.0), CellConfig::from_micro(40.0, 80.0)],
        ];
        let a = ArraySpec::new(cells).unwrap();
        for i in 0..=100 {
            for j in 0..=20 {
                let stim = [i as f64 * 0.01, 0.2 + j as f64 * 0.02];
                assert_eq!(
                    matching_rows(&a, &stim, &p).unwrap(),
                    search(&a, &stim, &p).unwrap().matched_rows()
                );
            }
        }
    }

    #[test]
    fn two_column_bounds_track_isolated_cell() {
        let p = p();
        let cell = CellConfig::from_micro(20.0, 80.0);
        let a = ArraySpec::uniform(1, 2, cell).unwrap();
        let iv = effective_bounds_in_array(&a, 0, 1, &[0.4, 0.4], &p, 1e-3).unwrap();
        let (lo, hi) = raw_bounds(cell, &p);
        assert_abs_diff_eq!(iv.lo, lo, epsilon = 0.002);
        assert_abs_diff_eq!(iv.hi, hi, epsilon = 0.002);
    }

    #[test]
    fn empty_sweep_errors() {
        let p = p();
        // M1 at the top of the window, M2 at the bottom: never matches
        let a = ArraySpec::uniform(1, 1, CellConfig::new(p.g_max, p.g_min)).unwrap();
        assert!(matches!(
            effective_bounds_in_array(&a, 0, 0, &[0.4], &p, 1e-3),
            Err(AcamError::EmptyInterval { .. })
        ));
    }

    #[test]
    fn word_length_limits() {
        let base = p();
        let p = DeviceParams { g_on: 1e-3, g_off: 1e-6, ..base };
        assert_eq!(max_word_length(&p, 2.0), 998);
        let p2 = DeviceParams { g_on: 2e-6, g_off: 1e-6, ..base };
        assert_eq!(max_word_length(&p2, 2.0), 0);
        assert_eq!(max_word_length(&p, 1.0 + 1e-15), MAX_WORD_LENGTH);
    }

    #[test]
    fn analytic_shift_basics() {
        let p = p();
        assert_eq!(analytic_range_shift(1, &p), 0.0);
        // hand-evaluated: 63 leaking neighbours against a 64-column threshold
        let c = 64.0 * 0.227e-15 + 1e-15;
        let g_th = c * 2f64.ln() / 100e-12;
        let expect = 63.0 * p.g_off * p.alpha * p.swing / (g_th * LN_10);
        assert_abs_diff_eq!(analytic_range_shift(64, &p), expect, epsilon = 1e-12);
        let typical = DeviceParams { alpha: 0.1, swing: 0.1, ..p };
        let mut prev = 0.0;
        for n in [2, 8, 16, 32, 64] {
            let s = analytic_range_shift(n, &typical);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn latency_scales_with_capacitance() {
        let p = p();
        let mut a = ArraySpec::uniform(1, 12, CellConfig::from_micro(20.0, 80.0)).unwrap();
        let mut stim = vec![0.4; 12];
        stim[0] = 0.7;
        a.parasitics.r_ml = 0.0;
        let t1 = discharge_latency(&a, &stim, 0, &p).unwrap();
        a.parasitics.c_ml *= 2.0;
        a.c_sense_fixed *= 2.0;
        let t2 = discharge_latency(&a, &stim, 0, &p).unwrap();
        assert_abs_diff_eq!(t2 / t1, 2.0, epsilon = 1e-12);
        assert!(matches!(
            discharge_latency(&a, &[0.4; 12], 0, &p),
            Err(AcamError::NoCrossing { row: 0 })
        ));
    }

    #[test]
    fn ts_variant_matches_same_interval() {
        let p = p();
        let a = ArraySpec::uniform(1, 1, CellConfig::from_micro(40.0, 80.0))
            .unwrap()
            .with_variant(Variant::TsPullup);
        assert!(search(&a, &[0.4], &p).unwrap().rows[0].matched);
        assert!(!search(&a, &[0.3], &p).unwrap().rows[0].matched);
        assert!(!search(&a, &[0.5], &p).unwrap().rows[0].matched);
        let iv = effective_bounds_in_array(&a, 0, 0, &[0.4], &p, 1e-3).unwrap();
        let (lo, hi) = raw_bounds(CellConfig::from_micro(40.0, 80.0), &p);
        assert_abs_diff_eq!(iv.lo, lo, epsilon = 0.001);
        assert_abs_diff_eq!(iv.hi, hi, epsilon = 0.001);
    }

    #[test]
    fn programming_is_seeded() {
        let p = p();
        let a = ArraySpec::uniform(2, 3, CellConfig::from_micro(40.0, 80.0)).unwrap();
        let x = a.programmed(5, 1e-6, &p).unwrap();
        assert_eq!(x, a.programmed(5, 1e-6, &p).unwrap());
        assert_ne!(x, a.programmed(6, 1e-6, &p).unwrap());
        for (row, orig) in x.cells.iter().zip(&a.cells) {
            for (c, o) in row.iter().zip(orig) {
                assert!((c.g_m1 - o.g_m1).abs() <= 1e-6 && (c.g_m2 - o.g_m2).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let a = ArraySpec::uniform(2, 2, CellConfig::from_micro(40.0, 80.0)).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let back: ArraySpec = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn compensation_puts_sensed_edges_on_target() {
        let p = p();
        let a = ArraySpec::uniform(1, 4, CellConfig::from_micro(20.0, 80.0)).unwrap();
        for (lo, hi) in [(0.5842, 0.62), (0.4246, 0.4473), (0.25, 0.26), (0.3, 0.4)] {
            let target = VoltageInterval::new(lo, hi).unwrap();
            let c = a.compensated_cell(target, &p).unwrap();
            let got = a.sensed_cell_bounds(&c, &p).unwrap();
            assert_abs_diff_eq!(got.lo, lo, epsilon = 2.0 * COMPENSATION_TOL);
            assert_abs_diff_eq!(got.hi, hi, epsilon = 2.0 * COMPENSATION_TOL);
        }
    }
}
