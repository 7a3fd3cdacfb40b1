// SPDX-License-Identifier: Apache-2.0

//! Energy, area and device-count accounting. Everything here is arithmetic
//! over published reference figures; nothing is derived from the circuit
//! model.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::compiler::{range_to_digits, range_to_ternary, RangeRule};
use crate::error::{AcamError, Result};

/// Array size the reference energy figures were measured on.
pub const REFERENCE_ROWS: usize = 86;
pub const REFERENCE_COLS: usize = 12;

/// Published per-bit search energies of digital baselines, in fJ.
pub const SRAM_TCAM_FJ_PER_BIT: f64 = 0.165;
pub const MEMRISTOR_TCAM_FJ_PER_BIT: f64 = 0.17;

/// How a reference energy component scales away from the reference array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    PerCell,
    PerRow,
    PerColumn,
    Fixed,
}

impl Scaling {
    pub fn factor(self, rows: usize, cols: usize) -> f64 {
        match self {
            Scaling::PerCell => (rows * cols) as f64 / (REFERENCE_ROWS * REFERENCE_COLS) as f64,
            Scaling::PerRow => rows as f64 / REFERENCE_ROWS as f64,
            Scaling::PerColumn => cols as f64 / REFERENCE_COLS as f64,
            Scaling::Fixed => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scaling::PerCell => "per-cell",
            Scaling::PerRow => "per-row",
            Scaling::PerColumn => "per-column",
            Scaling::Fixed => "fixed",
        }
    }
}

/// Per-search energy of the reference 86 x 12 array, by component, in fJ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    #[serde(rename = "e_ml_precharge_fJ")]
    pub e_ml_precharge: f64,
    #[serde(rename = "e_slhi_driver_fJ")]
    pub e_slhi_driver: f64,
    #[serde(rename = "e_other_fJ")]
    pub e_other: f64,
    #[serde(rename = "e_dac_fJ")]
    pub e_dac: f64,
    pub scaling_ml_precharge: Scaling,
    pub scaling_slhi_driver: Scaling,
    pub scaling_other: Scaling,
    pub scaling_dac: Scaling,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            e_ml_precharge: 102.9,
            e_slhi_driver: 298.5,
            e_other: 86.4,
            e_dac: 52.1,
            scaling_ml_precharge: Scaling::PerCell,
            scaling_slhi_driver: Scaling::PerCell,
            scaling_other: Scaling::PerCell,
            scaling_dac: Scaling::PerCell,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.e_ml_precharge, self.e_slhi_driver, self.e_other, self.e_dac];
        if all.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(AcamError::domain("energy components must be finite and >= 0"));
        }
        Ok(())
    }

    /// Analog-input mode: no DAC on the data lines.
    pub fn without_dac(self) -> Self {
        EnergyParams { e_dac: 0.0, ..self }
    }

    fn components(&self) -> [(&'static str, f64, Scaling); 4] {
        [
            ("ML precharge", self.e_ml_precharge, self.scaling_ml_precharge),
            ("SL_hi driver", self.e_slhi_driver, self.scaling_slhi_driver),
            ("Others", self.e_other, self.scaling_other),
            ("DAC", self.e_dac, self.scaling_dac),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaParams {
    #[serde(rename = "area_acam_cell_um2")]
    pub area_acam_cell: f64,
    #[serde(rename = "area_tcam_cell_um2")]
    pub area_tcam_cell: f64,
    pub transistors_per_acam_cell: usize,
    pub transistors_per_sram_tcam_cell: usize,
}

impl Default for AreaParams {
    fn default() -> Self {
        AreaParams {
            area_acam_cell: 0.52,
            area_tcam_cell: 0.70,
            transistors_per_acam_cell: 6,
            transistors_per_sram_tcam_cell: 16,
        }
    }
}

impl AreaParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_acam_cell > 0.0 && self.area_tcam_cell > 0.0)
            || self.transistors_per_acam_cell == 0
            || self.transistors_per_sram_tcam_cell == 0
        {
            return Err(AcamError::domain("area and transistor counts must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLine {
    pub component: String,
    pub scaling: Scaling,
    pub fj: f64,
}

/// Energy of one search on a `rows x cols` analog array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub rows: usize,
    pub cols: usize,
    pub cells: usize,
    pub breakdown: Vec<EnergyLine>,
    pub total_fj: f64,
    pub per_cell_fj: f64,
    /// Set when the array replaces a known number of TCAM cells.
    pub equivalent_tcam_bits: Option<usize>,
    pub per_tcam_bit_fj: Option<f64>,
    pub area_um2: f64,
    pub transistors: usize,
}

/// Per-search energy, area and device counts of a `rows x cols` array,
/// each energy component scaled from the reference array by its mode.
pub fn energy_per_search(rows: usize, cols: usize, ep: &EnergyParams, ap: &AreaParams) -> Result<CostReport> {
    if rows == 0 || cols == 0 {
        return Err(AcamError::domain("array needs at least one row and one column"));
    }
    ep.validate()?;
    ap.validate()?;
    let breakdown: Vec<EnergyLine> = ep
        .components()
        .into_iter()
        .map(|(name, fj, s)| EnergyLine {
            component: name.to_string(),
            scaling: s,
            fj: fj * s.factor(rows, cols),
        })
        .collect();
    let total_fj = breakdown.iter().map(|l| l.fj).sum();
    let cells = rows * cols;
    Ok(CostReport {
        rows,
        cols,
        cells,
        breakdown,
        total_fj,
        per_cell_fj: total_fj / cells as f64,
        equivalent_tcam_bits: None,
        per_tcam_bit_fj: None,
        area_um2: cells as f64 * ap.area_acam_cell,
        transistors: cells * ap.transistors_per_acam_cell,
    })
}

impl CostReport {
    /// Attach the TCAM cell count this array replaces.
    pub fn with_tcam_equivalent(mut self, tcam_bits: usize) -> Self {
        self.equivalent_tcam_bits = Some(tcam_bits);
        self.per_tcam_bit_fj = (tcam_bits > 0).then(|| self.total_fj / tcam_bits as f64);
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "array {} x {} ({} cells)", self.rows, self.cols, self.cells);
        let _ = writeln!(s, "{:<14} {:>11} {:>12}", "component", "scaling", "fJ/search");
        for l in &self.breakdown {
            let _ = writeln!(s, "{:<14} {:>11} {:>12.3}", l.component, l.scaling.name(), l.fj);
        }
        let _ = writeln!(s, "{:<14} {:>11} {:>12.3}", "total", "", self.total_fj);
        let _ = writeln!(s, "{:<26} {:>12.4}", "fJ/search/cell", self.per_cell_fj);
        let per_bit = self
            .per_tcam_bit_fj
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(s, "{:<26} {:>12}", "fJ/search/TCAM bit", per_bit);
        let _ = writeln!(s, "{:<26} {:>12.2}", "area um2", self.area_um2);
        let _ = writeln!(s, "{:<26} {:>12}", "transistors", self.transistors);
        s
    }
}

/// Cost of one way of storing a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Implementation {
    /// `None` for the ternary baseline.
    pub bits_per_cell: Option<u32>,
    pub rows: usize,
    pub cols: usize,
    pub cells: usize,
    pub transistors: usize,
    pub area_um2: f64,
    /// Search energy; only modelled for analog arrays.
    pub energy_fj: Option<f64>,
    pub per_tcam_bit_fj: Option<f64>,
    pub cell_reduction: f64,
    pub transistor_reduction: f64,
    pub area_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeComparison {
    pub rule: RangeRule,
    pub tcam: Implementation,
    pub analog: Vec<Implementation>,
}

fn analog_impl(
    bits: u32,
    rows: usize,
    cols: usize,
    tcam_cells: usize,
    ap: &AreaParams,
    ep: &EnergyParams,
) -> Result<Implementation> {
    let report = energy_per_search(rows, cols, ep, ap)?.with_tcam_equivalent(tcam_cells);
    let tcam_transistors = tcam_cells * ap.transistors_per_sram_tcam_cell;
    let tcam_area = tcam_cells as f64 * ap.area_tcam_cell;
    Ok(Implementation {
        bits_per_cell: Some(bits),
        rows,
        cols,
        cells: report.cells,
        transistors: report.transistors,
        area_um2: report.area_um2,
        energy_fj: Some(report.total_fj),
        per_tcam_bit_fj: report.per_tcam_bit_fj,
        cell_reduction: tcam_cells as f64 / report.cells as f64,
        transistor_reduction: tcam_transistors as f64 / report.transistors as f64,
        area_reduction: tcam_area / report.area_um2,
    })
}

/// Compile `r` as a ternary table and as multi-bit tables for every entry of
/// `bits_per_cell_options`, and compare each against the ternary baseline.
pub fn compare_range_implementations(
    r: &RangeRule,
    bits_per_cell_options: &[u32],
    ap: &AreaParams,
    ep: &EnergyParams,
) -> Result<RangeComparison> {
    r.validate()?;
    let tcam_rows = range_to_ternary(r).len();
    let tcam_cols = r.width_bits as usize;
    let tcam = tcam_baseline(tcam_rows, tcam_cols, ap);
    let analog = bits_per_cell_options
        .iter()
        .map(|&k| {
            let words = range_to_digits(r, k)?;
            let cols = words.first().map_or(0, |w| w.digits.len());
            analog_impl(k, words.len(), cols, tcam.cells, ap, ep)
        })
        .collect::<Result<_>>()?;
    Ok(RangeComparison {
        rule: r.clone(),
        tcam,
        analog,
    })
}

fn tcam_baseline(rows: usize, cols: usize, ap: &AreaParams) -> Implementation {
    let cells = rows * cols;
    Implementation {
        bits_per_cell: None,
        rows,
        cols,
        cells,
        transistors: cells * ap.transistors_per_sram_tcam_cell,
        area_um2: cells as f64 * ap.area_tcam_cell,
        energy_fj: None,
        per_tcam_bit_fj: None,
        cell_reduction: 1.0,
        transistor_reduction: 1.0,
        area_reduction: 1.0,
    }
}

impl RangeComparison {
    /// Same analog tables measured against a TCAM table of `tcam_rows` rows
    /// instead of the compiled one.
    pub fn rebased(&self, tcam_rows: usize, ap: &AreaParams, ep: &EnergyParams) -> Result<Self> {
        let tcam = tcam_baseline(tcam_rows, self.tcam.cols, ap);
        let analog = self
            .analog
            .iter()
            .map(|a| analog_impl(a.bits_per_cell.unwrap_or(1), a.rows, a.cols, tcam.cells, ap, ep))
            .collect::<Result<_>>()?;
        Ok(RangeComparison {
            rule: self.rule.clone(),
            tcam,
            analog,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "range [{}, {}] over {} bits",
            self.rule.lo, self.rule.hi, self.rule.width_bits
        );
        let _ = writeln!(
            s,
            "{:<10} {:>9} {:>6} {:>11} {:>10} {:>10} {:>12} {:>8} {:>8} {:>8}",
            "impl", "table", "cells", "transistors", "area um2", "fJ/search", "fJ/TCAM bit", "cells x", "trans x", "area x"
        );
        let na = |v: Option<f64>, prec: usize| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.prec$}"));
        for i in std::iter::once(&self.tcam).chain(&self.analog) {
            let name = i
                .bits_per_cell
                .map_or_else(|| "TCAM".to_string(), |k| format!("{k}-bit"));
            let _ = writeln!(
                s,
                "{:<10} {:>9} {:>6} {:>11} {:>10.2} {:>10} {:>12} {:>8.2} {:>8.2} {:>8.2}",
                name,
                format!("{}x{}", i.rows, i.cols),
                i.cells,
                i.transistors,
                i.area_um2,
                na(i.energy_fj, 3),
                na(i.per_tcam_bit_fj, 4),
                i.cell_reduction,
                i.transistor_reduction,
                i.area_reduction
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub name: String,
    pub fj_per_bit: f64,
    /// Baseline energy over ours; `None` when our per-bit figure is missing.
    pub advantage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub per_tcam_bit_fj: Option<f64>,
    pub baselines: Vec<Baseline>,
}

/// Put a per-bit figure next to published digital TCAM energies.
pub fn baseline_comparison(report: &CostReport) -> BaselineComparison {
    compare_to_baselines(
        report.per_tcam_bit_fj,
        &[
            ("SRAM TCAM", SRAM_TCAM_FJ_PER_BIT),
            ("memristor TCAM", MEMRISTOR_TCAM_FJ_PER_BIT),
        ],
    )
}

pub fn compare_to_baselines(per_bit: Option<f64>, baselines: &[(&str, f64)]) -> BaselineComparison {
    BaselineComparison {
        per_tcam_bit_fj: per_bit,
        baselines: baselines
            .iter()
            .map(|&(name, fj)| Baseline {
                name: name.to_string(),
                fj_per_bit: fj,
                advantage: per_bit.filter(|v| *v > 0.0).map(|v| fj / v),
            })
            .collect(),
    }
}

impl BaselineComparison {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for b in &self.baselines {
            let adv = b
                .advantage
                .map_or_else(|| "n/a".to_string(), |a| format!("{a:.2}x"));
            let _ = writeln!(s, "{:<16} {:>8.3} fJ/bit {:>9}", b.name, b.fj_per_bit, adv);
        }
        s
    }
}
