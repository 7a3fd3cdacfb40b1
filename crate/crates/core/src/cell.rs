// SPDX-License-Identifier: Apache-2.0

//! Single-cell semantics: conductance pair to match interval and back,
//! discrete level families, and the fit of the unknown transistor
//! constants to published anchor intervals.

use std::sync::OnceLock;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::device::{divider_node, inverter_output, DeviceParams};
use crate::error::{AcamError, Result};

/// Resolution of every bisection in this module.
pub const ROOT_TOL: f64 = 1e-9;

/// Worst anchor residual accepted by [`calibrate`].
pub const CALIBRATION_LIMIT: f64 = 0.015;

/// The two memristor conductances of one cell. `g_m1` sets the lower bound,
/// `g_m2` the upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    #[serde(rename = "g_m1_S")]
    pub g_m1: f64,
    #[serde(rename = "g_m2_S")]
    pub g_m2: f64,
}

impl CellConfig {
    pub fn new(g_m1: f64, g_m2: f64) -> Self {
        CellConfig { g_m1, g_m2 }
    }

    pub fn from_micro(g_m1_us: f64, g_m2_us: f64) -> Self {
        CellConfig::new(g_m1_us * 1e-6, g_m2_us * 1e-6)
    }

    /// The widest interval the cell can store.
    pub fn wildcard(p: &DeviceParams) -> Self {
        CellConfig::new(p.g_min, p.g_max)
    }
}

/// Closed analog match interval `[lo, hi]` in volts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageInterval {
    pub lo: f64,
    pub hi: f64,
}

impl VoltageInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > 1.0 || lo > hi {
            return Err(AcamError::domain(format!(
                "invalid interval [{lo}, {hi}] V"
            )));
        }
        Ok(VoltageInterval { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Generic decreasing-function bisection: finds `v` with `f(v) = target`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// DL voltage at which a divider holding `g` puts `node_target` on its
/// midpoint. Closed form while the root sits in triode, bisection otherwise.
pub fn divider_root(g: f64, node_target: f64, p: &DeviceParams) -> f64 {
    let closed = p.v_th + g * (p.v_slhi / node_target - 1.0) / p.beta;
    if closed - p.v_th >= p.triode_onset() {
        return closed;
    }
    bisect_decreasing(
        |v| divider_node(g, v, p),
        node_target,
        -1.0,
        p.v_th + p.triode_onset(),
    )
}

/// Lower bound set by M1: the DL voltage where the M1 divider lands on the
/// pull-down threshold.
pub fn lower_bound(g_m1: f64, p: &DeviceParams) -> f64 {
    divider_root(g_m1, p.v_th_ml, p)
}

/// Upper bound set by M2: the DL voltage where the M2 divider crosses the
/// inverter threshold.
pub fn upper_bound(g_m2: f64, p: &DeviceParams) -> f64 {
    divider_root(g_m2, p.v_th_inv, p)
}

/// Raw `(lo, hi)` pair for a cell, without interval validation.
pub fn raw_bounds(c: CellConfig, p: &DeviceParams) -> (f64, f64) {
    (lower_bound(c.g_m1, p), upper_bound(c.g_m2, p))
}

pub fn bounds_from_conductance(c: CellConfig, p: &DeviceParams) -> Result<VoltageInterval> {
    p.check_conductance(c.g_m1)?;
    p.check_conductance(c.g_m2)?;
    let (lo, hi) = raw_bounds(c, p);
    if lo > hi {
        return Err(AcamError::InconsistentCell { lo, hi });
    }
    Ok(VoltageInterval {
        lo: lo.clamp(0.0, 1.0),
        hi: hi.clamp(0.0, 1.0),
    })
}

/// The range of intervals reachable inside the conductance window.
pub fn achievable_window(p: &DeviceParams) -> VoltageInterval {
    VoltageInterval {
        lo: lower_bound(p.g_min, p).clamp(0.0, 1.0),
        hi: upper_bound(p.g_max, p).clamp(0.0, 1.0),
    }
}

fn invert_bound(
    target: f64,
    bound: &'static str,
    f: impl Fn(f64) -> f64,
    p: &DeviceParams,
) -> Result<f64> {
    let (v_min, v_max) = (f(p.g_min), f(p.g_max));
    if target < v_min - ROOT_TOL || target > v_max + ROOT_TOL {
        return Err(AcamError::OutOfWindow {
            bound,
            volts: target,
            min: v_min,
            max: v_max,
        });
    }
    // Bounds grow monotonically with conductance; search in log space.
    let (mut lo, mut hi) = (p.g_min.ln(), p.g_max.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp().clamp(p.g_min, p.g_max))
}

/// Programming targets for a desired interval.
pub fn conductance_from_bounds(iv: VoltageInterval, p: &DeviceParams) -> Result<CellConfig> {
    if iv.lo > iv.hi {
        return Err(AcamError::InconsistentCell { lo: iv.lo, hi: iv.hi });
    }
    let g_m1 = invert_bound(iv.lo, "lower", |g| lower_bound(g, p), p)?;
    let g_m2 = invert_bound(iv.hi, "upper", |g| upper_bound(g, p), p)?;
    Ok(CellConfig { g_m1, g_m2 })
}

/// Gate voltages of the two pull-downs of a cell at DL voltage `v_dl`.
#[inline]
pub fn gate_voltages(c: &CellConfig, v_dl: f64, p: &DeviceParams) -> (f64, f64) {
    let v_g1 = divider_node(c.g_m1, v_dl, p);
    let v_g2 = inverter_output(divider_node(c.g_m2, v_dl, p), p);
    (v_g1, v_g2)
}

/// One discrete level of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCode {
    pub n_levels: usize,
    pub index: usize,
    pub interval: VoltageInterval,
}

/// Evenly spaced levels over a voltage window with guard bands between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelFamily {
    pub n_levels: usize,
    pub window: VoltageInterval,
    pub guard: f64,
}

impl LevelFamily {
    pub fn new(n_levels: usize, window: VoltageInterval, guard: f64) -> Result<Self> {
        if n_levels < 2 {
            return Err(AcamError::InfeasiblePacking(format!(
                "need at least 2 levels, got {n_levels}"
            )));
        }
        if !(guard >= 0.0) {
            return Err(AcamError::InfeasiblePacking("guard must be >= 0".into()));
        }
        if n_levels as f64 * guard >= window.width() {
            return Err(AcamError::InfeasiblePacking(format!(
                "{n_levels} levels with {:.1} mV guard do not fit a {:.1} mV window",
                guard * 1e3,
                window.width() * 1e3
            )));
        }
        Ok(LevelFamily {
            n_levels,
            window,
            guard,
        })
    }

    /// 8 levels over 0.2-0.6 V with 10 mV guards.
    pub fn default_family() -> Self {
        LevelFamily::with_levels(8)
    }

    /// `n` levels over the default 0.2-0.6 V window. Guards are 10 mV, or
    /// 40 % of the pitch when levels are packed tighter than 25 mV.
    pub fn with_levels(n: usize) -> Self {
        let window = VoltageInterval { lo: 0.2, hi: 0.6 };
        let guard = (0.4 * window.width() / n as f64).min(0.010);
        LevelFamily::new(n, window, guard).expect("default window fits")
    }

    pub fn pitch(&self) -> f64 {
        self.window.width() / self.n_levels as f64
    }

    pub fn interval(&self, index: usize) -> VoltageInterval {
        let pitch = self.pitch();
        let base = self.window.lo + index as f64 * pitch;
        VoltageInterval {
            lo: base + 0.5 * self.guard,
            hi: base + pitch - 0.5 * self.guard,
        }
    }

    pub fn levels(&self) -> Vec<LevelCode> {
        (0..self.n_levels)
            .map(|index| LevelCode {
                n_levels: self.n_levels,
                index,
                interval: self.interval(index),
            })
            .collect()
    }

    /// Search voltage that encodes level `index`.
    pub fn encode(&self, index: usize) -> f64 {
        self.window.lo + (index as f64 + 0.5) * self.pitch()
    }

    /// Level whose interval holds `v`, if any.
    pub fn decode(&self, v: f64) -> Option<usize> {
        let raw = ((v - self.window.lo) / self.pitch()).floor();
        if raw < 0.0 || raw >= self.n_levels as f64 {
            return None;
        }
        let index = raw as usize;
        self.interval(index).contains(v).then_some(index)
    }

    /// One interval spanning levels `first..=last`, guard bands between them
    /// included.
    pub fn span(&self, first: usize, last: usize) -> VoltageInterval {
        VoltageInterval {
            lo: self.interval(first).lo,
            hi: self.interval(last).hi,
        }
    }
}

pub fn quantize_levels(
    n_levels: usize,
    window: VoltageInterval,
    guard: f64,
) -> Result<Vec<LevelCode>> {
    Ok(LevelFamily::new(n_levels, window, guard)?.levels())
}

/// A published or synthetic `(conductances, interval)` pair.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub g_m1_uS: f64,
    pub g_m2_uS: f64,
    pub lo_V: f64,
    pub hi_V: f64,
}

impl Anchor {
    pub fn cell(&self) -> CellConfig {
        CellConfig::from_micro(self.g_m1_uS, self.g_m2_uS)
    }
}

/// The two intervals reported for the 16 nm cell: (40, 80) µS matching
/// 0.37-0.42 V and (20, 80) µS matching 0.33-0.43 V.
pub fn reference_anchors() -> Vec<Anchor> {
    vec![
        Anchor {
            g_m1_uS: 40.0,
            g_m2_uS: 80.0,
            lo_V: 0.37,
            hi_V: 0.42,
        },
        Anchor {
            g_m1_uS: 20.0,
            g_m2_uS: 80.0,
            lo_V: 0.33,
            hi_V: 0.43,
        },
    ]
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorResidual {
    pub anchor: Anchor,
    pub lo_fit_V: f64,
    pub hi_fit_V: f64,
    pub lo_residual_V: f64,
    pub hi_residual_V: f64,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub params: DeviceParams,
    pub residuals: Vec<AnchorResidual>,
    pub max_residual_V: f64,
    pub iterations: usize,
}

const FIT_DIM: usize = 4;

fn pack(p: &DeviceParams) -> Vector4<f64> {
    // beta in mS/V keeps the four unknowns on comparable scales
    Vector4::new(p.v_th, p.v_th_ml, p.v_th_inv, p.beta * 1e3)
}

fn unpack(x: &Vector4<f64>, base: &DeviceParams) -> DeviceParams {
    let margin = 0.01;
    DeviceParams {
        v_th: x[0].clamp(0.0, 1.0),
        v_th_ml: x[1].clamp(margin, base.v_slhi - margin),
        v_th_inv: x[2].clamp(margin, base.v_slhi - margin),
        beta: (x[3] * 1e-3).max(1e-7),
        ..*base
    }
}

fn residuals(p: &DeviceParams, anchors: &[Anchor]) -> Vec<f64> {
    anchors
        .iter()
        .flat_map(|a| {
            let (lo, hi) = raw_bounds(a.cell(), p);
            [lo - a.lo_V, hi - a.hi_V]
        })
        .collect()
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

/// Least-squares fit of `v_th`, `v_th_ml`, `v_th_inv` and `beta` so that the
/// simulated bounds of each anchor cell match its interval.
///
/// Levenberg-Marquardt with a finite-difference Jacobian, started from
/// `base`. Also sets `alpha` to the DL-to-gate ratio of the fitted divider
/// at the first anchor's lower bound.
pub fn calibrate_from(base: &DeviceParams, anchors: &[Anchor]) -> Result<Calibration> {
    if anchors.len() < 2 {
        return Err(AcamError::domain(format!(
            "calibration needs at least 2 anchors, got {}",
            anchors.len()
        )));
    }
    let first = anchors[0].cell();
    if anchors.iter().all(|a| a.cell() == first) {
        return Err(AcamError::domain(
            "calibration anchors must use distinct conductances",
        ));
    }
    for a in anchors {
        base.check_conductance(a.cell().g_m1)?;
        base.check_conductance(a.cell().g_m2)?;
    }

    let mut x = pack(base);
    let mut r = residuals(&unpack(&x, base), anchors);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let h = 1e-7;
    for it in 0..500 {
        iterations = it + 1;
        if c < 1e-20 {
            break;
        }
        let m = r.len();
        let mut jac = vec![[0.0; FIT_DIM]; m];
        for k in 0..FIT_DIM {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let rp = residuals(&unpack(&xp, base), anchors);
            let rm = residuals(&unpack(&xm, base), anchors);
            for i in 0..m {
                jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for i in 0..m {
            for a in 0..FIT_DIM {
                jtr[a] += jac[i][a] * r[i];
                for b in 0..FIT_DIM {
                    jtj[(a, b)] += jac[i][a] * jac[i][b];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for d in 0..FIT_DIM {
                damped[(d, d)] += lambda * (jtj[(d, d)] + 1e-9);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = pack(&unpack(&(x + step), base));
            let rt = residuals(&unpack(&trial, base), anchors);
            let ct = cost(&rt);
            if ct < c {
                let converged = (c - ct) < 1e-18 || step.norm() < 1e-13;
                x = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !converged;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }

    let mut params = unpack(&x, base);
    params.alpha = dl_to_gate_ratio(first, &params);
    params.validate()?;

    let mut worst: f64 = 0.0;
    let residuals: Vec<AnchorResidual> = anchors
        .iter()
        .map(|a| {
            let (lo, hi) = raw_bounds(a.cell(), &params);
            worst = worst.max((lo - a.lo_V).abs()).max((hi - a.hi_V).abs());
            AnchorResidual {
                anchor: *a,
                lo_fit_V: lo,
                hi_fit_V: hi,
                lo_residual_V: lo - a.lo_V,
                hi_residual_V: hi - a.hi_V,
            }
        })
        .collect();
    if worst > CALIBRATION_LIMIT {
        return Err(AcamError::CalibrationFailure {
            residual: worst,
            limit: CALIBRATION_LIMIT,
        });
    }
    Ok(Calibration {
        params,
        residuals,
        max_residual_V: worst,
        iterations,
    })
}

pub fn calibrate(anchors: &[Anchor]) -> Result<Calibration> {
    calibrate_from(&DeviceParams::uncalibrated(), anchors)
}

/// `|dV_DL / dV_G|` of the lower-bound divider at its switching point.
pub fn dl_to_gate_ratio(c: CellConfig, p: &DeviceParams) -> f64 {
    let v = lower_bound(c.g_m1, p);
    let h = 1e-6;
    let slope = (divider_node(c.g_m1, v + h, p) - divider_node(c.g_m1, v - h, p)) / (2.0 * h);
    1.0 / slope.abs()
}

/// Calibration against [`reference_anchors`], computed once per process.
pub fn default_calibration() -> &'static Calibration {
    static CAL: OnceLock<Calibration> = OnceLock::new();
    CAL.get_or_init(|| {
        calibrate(&reference_anchors()).expect("reference anchors calibrate within limit")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p() -> DeviceParams {
        DeviceParams::calibrated()
    }

    #[test]
    fn reference_cells_land_on_their_intervals() {
        let p = p();
        let a = bounds_from_conductance(CellConfig::from_micro(40.0, 80.0), &p).unwrap();
        assert_abs_diff_eq!(a.lo, 0.37, epsilon = 0.010);
        assert_abs_diff_eq!(a.hi, 0.42, epsilon = 0.010);
        let b = bounds_from_conductance(CellConfig::from_micro(20.0, 80.0), &p).unwrap();
        assert_abs_diff_eq!(b.lo, 0.33, epsilon = 0.010);
        assert_abs_diff_eq!(b.hi, 0.43, epsilon = 0.010);
    }

    #[test]
    fn equal_conductances_offset_matches_closed_form() {
        let p = p();
        let g = 120e-6;
        let (lo, hi) = raw_bounds(CellConfig::new(g, g), &p);
        // both roots are in triode at 120 µS
        let offset = g * ((p.v_slhi / p.v_th_inv - 1.0) - (p.v_slhi / p.v_th_ml - 1.0)) / p.beta;
        assert_abs_diff_eq!(hi - lo, offset, epsilon = 1e-9);
        let res = bounds_from_conductance(CellConfig::new(g, g), &p);
        if offset < 0.0 {
            assert!(matches!(res, Err(AcamError::InconsistentCell { .. })));
        } else {
            assert_abs_diff_eq!(res.unwrap().width(), offset, epsilon = 1e-9);
        }
    }

    #[test]
    fn subthreshold_root_agrees_with_exponential_closed_form() {
        let p = p();
        let g = 2e-6;
        let lo = lower_bound(g, &p);
        // G_T(v) = beta*w*10^((v - v_th - w)/S) = g*(v_slhi/v_th_ml - 1)
        let w = p.triode_onset();
        let g_t = g * (p.v_slhi / p.v_th_ml - 1.0);
        let expected = p.v_th + w + p.swing * (g_t / (p.beta * w)).log10();
        assert_abs_diff_eq!(lo, expected, epsilon = 1e-8);
    }

    #[test]
    fn inverse_recovers_reference_conductances() {
        let p = p();
        let iv = bounds_from_conductance(CellConfig::from_micro(40.0, 80.0), &p).unwrap();
        let c = conductance_from_bounds(iv, &p).unwrap();
        assert_abs_diff_eq!(c.g_m1, 40e-6, epsilon = 1e-9);
        assert_abs_diff_eq!(c.g_m2, 80e-6, epsilon = 1e-9);
        let reference = VoltageInterval { lo: 0.37, hi: 0.42 };
        let c = conductance_from_bounds(reference, &p).unwrap();
        assert_abs_diff_eq!(c.g_m1 * 1e6, 40.0, epsilon = 6.0);
        assert_abs_diff_eq!(c.g_m2 * 1e6, 80.0, epsilon = 6.0);
    }

    #[test]
    fn unachievable_interval_names_bound() {
        let p = p();
        let w = achievable_window(&p);
        let err = conductance_from_bounds(VoltageInterval { lo: 0.3, hi: w.hi + 0.05 }, &p)
            .unwrap_err();
        assert!(matches!(err, AcamError::OutOfWindow { bound: "upper", .. }));
        let err = conductance_from_bounds(VoltageInterval { lo: w.lo - 0.05, hi: 0.4 }, &p)
            .unwrap_err();
        assert!(matches!(err, AcamError::OutOfWindow { bound: "lower", .. }));
    }

    #[test]
    fn default_family_fits_achievable_window() {
        let p = p();
        let w = achievable_window(&p);
        let fam = LevelFamily::default_family();
        assert!(w.lo <= fam.window.lo && fam.window.hi <= w.hi, "{w:?}");
    }

    #[test]
    fn level_geometry() {
        let window = VoltageInterval { lo: 0.2, hi: 0.6 };
        let levels = quantize_levels(8, window, 0.010).unwrap();
        assert_eq!(levels.len(), 8);
        for l in &levels {
            assert_abs_diff_eq!(l.interval.width(), 0.040, epsilon = 1e-12);
        }
        for pair in levels.windows(2) {
            assert!(pair[0].interval.hi < pair[1].interval.lo);
        }
        let two = quantize_levels(2, window, 0.0).unwrap();
        assert_abs_diff_eq!(two[0].interval.hi, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(two[1].interval.lo, 0.4, epsilon = 1e-12);

        let fam = LevelFamily::new(20, window, 0.019).unwrap();
        assert_abs_diff_eq!(fam.pitch(), 0.020, epsilon = 1e-12);
        assert!(LevelFamily::new(20, window, 0.020).is_err());
        assert!(LevelFamily::new(1, window, 0.0).is_err());
    }

    #[test]
    fn encode_decode_identity() {
        for n in [2, 8, 16, 20] {
            let fam = LevelFamily::with_levels(n);
            for i in 0..n {
                assert_eq!(fam.decode(fam.encode(i)), Some(i));
            }
        }
    }

    #[test]
    fn calibration_needs_two_distinct_anchors() {
        let a = reference_anchors();
        assert!(calibrate(&a[..1]).is_err());
        assert!(calibrate(&[a[0], a[0]]).is_err());
    }

    #[test]
    fn calibration_refits_synthetic_linear_anchors() {
        let truth = DeviceParams {
            v_th: 0.26,
            v_th_ml: 0.22,
            v_th_inv: 0.30,
            beta: 420e-6,
            ..DeviceParams::uncalibrated()
        };
        let k1 = (truth.v_slhi / truth.v_th_ml - 1.0) / truth.beta;
        let k2 = (truth.v_slhi / truth.v_th_inv - 1.0) / truth.beta;
        let anchors: Vec<Anchor> = [(30.0, 90.0), (50.0, 120.0), (70.0, 150.0)]
            .iter()
            .map(|&(g1, g2)| Anchor {
                g_m1_uS: g1,
                g_m2_uS: g2,
                lo_V: truth.v_th + g1 * 1e-6 * k1,
                hi_V: truth.v_th + g2 * 1e-6 * k2,
            })
            .collect();
        let cal = calibrate(&anchors).unwrap();
        assert!(cal.max_residual_V < 1e-6, "{}", cal.max_residual_V);
    }

    #[test]
    fn calibration_fails_on_contradictory_anchors() {
        let anchors = vec![
            Anchor { g_m1_uS: 40.0, g_m2_uS: 80.0, lo_V: 0.37, hi_V: 0.42 },
            Anchor { g_m1_uS: 40.0, g_m2_uS: 90.0, lo_V: 0.55, hi_V: 0.60 },
        ];
        assert!(matches!(
            calibrate(&anchors),
            Err(AcamError::CalibrationFailure { .. })
        ));
    }
}
