// SPDX-License-Identifier: Apache-2.0

//! Behavioral device models: the series divider transistor, the match-line
//! pull-down transistor, the volatile threshold-switching (TS) device and the
//! program-and-verify loop for the non-volatile memristors.
//!
//! All quantities are SI (volts, siemens, seconds). The JSON form of
//! [`DeviceParams`] uses unit-suffixed field names instead, see
//! [`DeviceParamsDoc`].

use std::f64::consts::LN_10;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{AcamError, Result};

/// Lowest conductance the pull-down model returns, relative to `g_off`.
pub const PULLDOWN_FLOOR_DECADES: f64 = 6.0;

/// Transistor, supply and memristor-window constants shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "DeviceParamsDoc", try_from = "DeviceParamsDoc")]
pub struct DeviceParams {
    /// Search supply on SL_hi.
    pub v_slhi: f64,
    /// Threshold of the divider transistors.
    pub v_th: f64,
    /// Threshold of the ML pull-down transistor.
    pub v_th_ml: f64,
    /// Switching threshold of the inverter in the upper-bound divider.
    pub v_th_inv: f64,
    /// Triode transconductance coefficient, dG_T/dV_DL.
    pub beta: f64,
    /// Pull-down conductance when fully on.
    pub g_on: f64,
    /// Pull-down leakage at the threshold voltage.
    pub g_off: f64,
    /// Sub-threshold swing in volts per decade.
    pub swing: f64,
    /// Ratio of DL-voltage change to gate-voltage change at the sense point.
    pub alpha: f64,
    pub g_min: f64,
    pub g_max: f64,
    /// Small-signal gain of the inverter driving the upper-bound pull-down.
    pub inverter_gain: f64,
    /// Width of the smooth turn-on region just below `v_th_ml`.
    pub blend_window: f64,
    /// Per-pulse programming error (standard deviation).
    pub sigma_prog: f64,
}

impl DeviceParams {
    /// Starting point for calibration. The four threshold/transconductance
    /// values here are guesses; everything else is a fixed assumption.
    pub fn uncalibrated() -> Self {
        DeviceParams {
            v_slhi: 0.5,
            v_th: 0.30,
            v_th_ml: 0.25,
            v_th_inv: 0.25,
            beta: 500e-6,
            g_on: 1e-3,
            g_off: 1e-6,
            swing: 0.100,
            alpha: 0.1,
            g_min: 1e-6,
            g_max: 200e-6,
            inverter_gain: 2.0,
            blend_window: 0.004,
            sigma_prog: 2e-6,
        }
    }

    /// Parameters fitted to the reference anchor intervals.
    pub fn calibrated() -> Self {
        crate::cell::default_calibration().params
    }

    pub fn validate(&self) -> Result<()> {
        let p = self;
        let checks: [(bool, &str); 9] = [
            (p.v_slhi > 0.0, "v_slhi must be positive"),
            (
                p.v_th_ml > 0.0 && p.v_th_ml < p.v_slhi,
                "v_th_ml must lie in (0, v_slhi)",
            ),
            (
                p.v_th_inv > 0.0 && p.v_th_inv < p.v_slhi,
                "v_th_inv must lie in (0, v_slhi)",
            ),
            (p.g_off >= 0.0 && p.g_off < p.g_on, "need 0 <= g_off < g_on"),
            (p.g_min > 0.0 && p.g_min < p.g_max, "need 0 < g_min < g_max"),
            (p.beta > 0.0, "beta must be positive"),
            (p.swing > 0.0, "swing must be positive"),
            (p.inverter_gain > 0.0, "inverter_gain must be positive"),
            (
                p.blend_window >= 0.0 && p.sigma_prog >= 0.0,
                "blend_window and sigma_prog must be non-negative",
            ),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(AcamError::domain(msg));
            }
        }
        Ok(())
    }

    /// Overdrive above `v_th` where the exponential branch hands over to the
    /// triode line with matching slope.
    pub fn triode_onset(&self) -> f64 {
        self.swing / LN_10
    }

    pub fn check_conductance(&self, g: f64) -> Result<()> {
        // Allow a hair of slack for values produced by root-finding.
        let slack = 1e-12;
        if !(g.is_finite() && g >= self.g_min - slack && g <= self.g_max + slack) {
            return Err(AcamError::domain(format!(
                "conductance {g:.4e} S outside window [{:.4e}, {:.4e}] S",
                self.g_min, self.g_max
            )));
        }
        Ok(())
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        DeviceParams::calibrated()
    }
}

/// JSON shape of [`DeviceParams`]: display units carried in the field names.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParamsDoc {
    pub v_slhi_V: f64,
    pub v_th_V: f64,
    pub v_th_ml_V: f64,
    pub v_th_inv_V: f64,
    pub beta_uS_per_V: f64,
    pub g_on_uS: f64,
    pub g_off_uS: f64,
    pub swing_mV_per_dec: f64,
    pub alpha: f64,
    pub g_min_uS: f64,
    pub g_max_uS: f64,
    pub inverter_gain: f64,
    pub blend_window_mV: f64,
    pub sigma_prog_uS: f64,
}

impl From<DeviceParams> for DeviceParamsDoc {
    fn from(p: DeviceParams) -> Self {
        DeviceParamsDoc {
            v_slhi_V: p.v_slhi,
            v_th_V: p.v_th,
            v_th_ml_V: p.v_th_ml,
            v_th_inv_V: p.v_th_inv,
            beta_uS_per_V: p.beta * 1e6,
            g_on_uS: p.g_on * 1e6,
            g_off_uS: p.g_off * 1e6,
            swing_mV_per_dec: p.swing * 1e3,
            alpha: p.alpha,
            g_min_uS: p.g_min * 1e6,
            g_max_uS: p.g_max * 1e6,
            inverter_gain: p.inverter_gain,
            blend_window_mV: p.blend_window * 1e3,
            sigma_prog_uS: p.sigma_prog * 1e6,
        }
    }
}

impl TryFrom<DeviceParamsDoc> for DeviceParams {
    type Error = AcamError;

    fn try_from(d: DeviceParamsDoc) -> Result<Self> {
        let p = DeviceParams {
            v_slhi: d.v_slhi_V,
            v_th: d.v_th_V,
            v_th_ml: d.v_th_ml_V,
            v_th_inv: d.v_th_inv_V,
            beta: d.beta_uS_per_V * 1e-6,
            g_on: d.g_on_uS * 1e-6,
            g_off: d.g_off_uS * 1e-6,
            swing: d.swing_mV_per_dec * 1e-3,
            alpha: d.alpha,
            g_min: d.g_min_uS * 1e-6,
            g_max: d.g_max_uS * 1e-6,
            inverter_gain: d.inverter_gain,
            blend_window: d.blend_window_mV * 1e-3,
            sigma_prog: d.sigma_prog_uS * 1e-6,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Channel conductance of a divider transistor with its gate on the DL.
///
/// Linear in overdrive in triode, exponential (slope `swing`) below the
/// hand-over point; value and slope are continuous at the join.
pub fn transistor_conductance(v_dl: f64, p: &DeviceParams) -> f64 {
    let onset = p.triode_onset();
    let overdrive = v_dl - p.v_th;
    if overdrive >= onset {
        p.beta * overdrive
    } else {
        p.beta * onset * 10f64.powf((overdrive - onset) / p.swing)
    }
}

/// Divider node voltage without range checks. Used in inner loops.
#[inline]
pub fn divider_node(g_m: f64, v_dl: f64, p: &DeviceParams) -> f64 {
    let g_t = transistor_conductance(v_dl, p);
    p.v_slhi * g_m / (g_m + g_t)
}

/// Voltage at the midpoint of a memristor/transistor divider.
pub fn divider_gate_voltage(g_m: f64, v_dl: f64, p: &DeviceParams) -> Result<f64> {
    p.check_conductance(g_m)?;
    if !(0.0..=1.0).contains(&v_dl) {
        return Err(AcamError::domain(format!(
            "DL voltage {v_dl} V outside [0, 1] V"
        )));
    }
    Ok(divider_node(g_m, v_dl, p))
}

/// Inverter between the upper-bound divider and its pull-down gate.
/// Output crosses `v_th_ml` exactly when the input crosses `v_th_inv`.
#[inline]
pub fn inverter_output(v_in: f64, p: &DeviceParams) -> f64 {
    (p.v_th_ml + p.inverter_gain * (p.v_th_inv - v_in)).clamp(0.0, p.v_slhi)
}

/// Match-line pull-down conductance for a given gate voltage.
///
/// Fully on at and above `v_th_ml`; `g_off * 10^((v_g - v_th_ml)/swing)`
/// below, floored six decades under `g_off`. Inside `blend_window` below the
/// threshold the log-conductance follows a monotone cubic from the
/// sub-threshold branch up to `g_on` so the turn-on is C1. With
/// `g_off == 0` the device is an ideal switch.
pub fn pulldown_conductance(v_g: f64, p: &DeviceParams) -> f64 {
    if v_g >= p.v_th_ml {
        return p.g_on;
    }
    if p.g_off <= 0.0 {
        return 0.0;
    }
    let floor = p.g_off * 10f64.powf(-PULLDOWN_FLOOR_DECADES);
    let knee = p.v_th_ml - p.blend_window;
    if p.blend_window <= 0.0 || v_g <= knee {
        return (p.g_off * 10f64.powf((v_g - p.v_th_ml) / p.swing)).max(floor);
    }
    // Cubic Hermite on log10(g): slope 1/swing at the knee, flat at the top.
    let w = p.blend_window;
    let y0 = p.g_off.log10() - w / p.swing;
    let m0 = w / p.swing;
    let y1 = p.g_on.log10();
    let t = (v_g - knee) / w;
    let t2 = t * t;
    let t3 = t2 * t;
    let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1;
    10f64.powf(y).max(floor)
}

/// Programmed memristor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemristorState {
    pub g: f64,
    pub sigma_prog: f64,
}

/// Outcome of a successful program-and-verify run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Programmed {
    pub state: MemristorState,
    pub iterations: usize,
}

/// Iterative program-and-verify: each pulse aims at `target` and lands with
/// Gaussian error `p.sigma_prog`; a read after every pulse stops the loop
/// once the device is within `tol`. Starts from the reset state `g_min`.
pub fn program_memristor(
    target: f64,
    seed: u64,
    tol: f64,
    max_iters: usize,
    p: &DeviceParams,
) -> Result<Programmed> {
    p.check_conductance(target)?;
    if !(tol > 0.0) {
        return Err(AcamError::domain("programming tolerance must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, p.sigma_prog.max(0.0))
        .map_err(|e| AcamError::domain(e.to_string()))?;
    let mut g = p.g_min;
    let mut best = g;
    for iteration in 1..=max_iters {
        g = (target + noise.sample(&mut rng)).clamp(p.g_min, p.g_max);
        if (g - target).abs() < (best - target).abs() {
            best = g;
        }
        if (g - target).abs() <= tol {
            return Ok(Programmed {
                state: MemristorState {
                    g,
                    sigma_prog: p.sigma_prog,
                },
                iterations: iteration,
            });
        }
    }
    Err(AcamError::ProgrammingFailure {
        best_g: best,
        iterations: max_iters,
    })
}

/// Hysteretic state of a volatile threshold-switching device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TsState {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsDeviceParams {
    pub v_threshold: f64,
    pub v_hold: f64,
    /// Volts per decade of the off-state transition.
    pub swing_ts: f64,
    pub g_ts_on: f64,
    pub g_ts_off: f64,
}

impl Default for TsDeviceParams {
    fn default() -> Self {
        TsDeviceParams {
            v_threshold: 0.4,
            v_hold: 0.1,
            swing_ts: 0.001,
            g_ts_on: 1e-3,
            g_ts_off: 1e-9,
        }
    }
}

impl TsDeviceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_hold < self.v_threshold) {
            return Err(AcamError::domain("TS device needs v_hold < v_threshold"));
        }
        if !(self.g_ts_off < self.g_ts_on && self.g_ts_off >= 0.0) {
            return Err(AcamError::domain("TS device needs 0 <= g_ts_off < g_ts_on"));
        }
        if !(self.swing_ts > 0.0) {
            return Err(AcamError::domain("TS swing must be positive"));
        }
        Ok(())
    }
}

/// Quasi-static TS device: fires at `v_threshold`, releases at `v_hold`,
/// and keeps its previous state in between.
pub fn ts_conductance(v: f64, prior: TsState, p: &TsDeviceParams) -> (f64, TsState) {
    let state = if v >= p.v_threshold {
        TsState::On
    } else if v <= p.v_hold {
        TsState::Off
    } else {
        prior
    };
    let g = match state {
        TsState::On => p.g_ts_on,
        TsState::Off => {
            let floor = p.g_ts_off * 10f64.powf(-PULLDOWN_FLOOR_DECADES);
            (p.g_ts_off * 10f64.powf((v - p.v_threshold).min(0.0) / p.swing_ts)).max(floor)
        }
    };
    (g, state)
}

/// Line biasing for cell programming and readout. Only the resulting
/// conductance is simulated; this table documents which lines are driven.
pub mod protocol {
    use serde::Serialize;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
    pub enum Level {
        Ground,
        Vset,
        Vreset,
        Vread,
        /// Gate bias that sets the compliance current during SET.
        VgSet,
        Vdd,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
    pub enum WriteOp {
        SetM1,
        ResetM1,
        SetM2,
        ResetM2,
        ReadM1,
        ReadM2,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
    pub struct LineBias {
        pub sl_hi: Level,
        pub sl_lo: Level,
        pub dl1: Level,
        pub dl2: Level,
    }

    impl WriteOp {
        pub const ALL: [WriteOp; 6] = [
            WriteOp::SetM1,
            WriteOp::ResetM1,
            WriteOp::SetM2,
            WriteOp::ResetM2,
            WriteOp::ReadM1,
            WriteOp::ReadM2,
        ];

        pub fn bias(self) -> LineBias {
            use Level::*;
            let (sl_hi, sl_lo, dl1, dl2) = match self {
                WriteOp::SetM1 => (Vset, Ground, VgSet, Ground),
                WriteOp::ResetM1 => (Ground, Vreset, Vdd, Ground),
                WriteOp::SetM2 => (Vset, Ground, Ground, VgSet),
                WriteOp::ResetM2 => (Ground, Vreset, Ground, Vdd),
                WriteOp::ReadM1 => (Vread, Ground, Vdd, Ground),
                WriteOp::ReadM2 => (Vread, Ground, Ground, Vdd),
            };
            LineBias {
                sl_hi,
                sl_lo,
                dl1,
                dl2,
            }
        }
    }
}
