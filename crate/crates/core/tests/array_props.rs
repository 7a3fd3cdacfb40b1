// SPDX-License-Identifier: Apache-2.0

use acam::array::{effective_bounds_in_array, search, ArraySpec};
use acam::cell::{
    achievable_window, bounds_from_conductance, conductance_from_bounds, lower_bound, upper_bound, CellConfig,
    VoltageInterval,
};
use acam::device::DeviceParams;
use proptest::prelude::*;

const MARGIN: f64 = 0.030;

fn p() -> DeviceParams {
    DeviceParams::calibrated()
}

/// Interval with both edges inside the achievable window and at least
/// `2 * MARGIN` wide.
fn interval() -> impl Strategy<Value = VoltageInterval> {
    let w = achievable_window(&p());
    (w.lo..w.hi - 2.0 * MARGIN, 2.0 * MARGIN..0.4).prop_map(move |(lo, width)| VoltageInterval {
        lo,
        hi: (lo + width).min(w.hi),
    })
}

/// A voltage at least MARGIN away from both edges of `iv`.
fn probe(iv: VoltageInterval, u: f64, inside: bool) -> Option<f64> {
    if inside {
        Some(iv.lo + MARGIN + u * (iv.width() - 2.0 * MARGIN))
    } else {
        let below = (0.0, iv.lo - MARGIN);
        let above = (iv.hi + MARGIN, 1.0);
        let span_b = (below.1 - below.0).max(0.0);
        let span_a = (above.1 - above.0).max(0.0);
        if span_a + span_b <= 0.0 {
            return None;
        }
        let t = u * (span_a + span_b);
        Some(if t < span_b { below.0 + t } else { above.0 + (t - span_b) })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn search_agrees_with_interval_containment(
        ivs in prop::collection::vec(interval(), 1..8),
        us in prop::collection::vec(0.0..1.0f64, 8),
        mask in prop::collection::vec(any::<bool>(), 8),
    ) {
        let p = p();
        let cells: Vec<CellConfig> = ivs.iter().map(|iv| conductance_from_bounds(*iv, &p).unwrap()).collect();
        let a = ArraySpec::new(vec![cells]).unwrap();
        let mut stimulus = Vec::new();
        let mut expect = true;
        for (i, iv) in ivs.iter().enumerate() {
            let v = probe(*iv, us[i], mask[i]).or_else(|| probe(*iv, us[i], true)).unwrap();
            expect &= iv.contains(v);
            stimulus.push(v);
        }
        let got = search(&a, &stimulus, &p).unwrap().rows[0].matched;
        prop_assert_eq!(got, expect, "stimulus {:?} intervals {:?}", stimulus, ivs);
    }

    #[test]
    fn rows_are_independent(
        ivs in prop::collection::vec(interval(), 3),
        other in prop::collection::vec(interval(), 3),
        us in prop::collection::vec(0.0..1.0f64, 3),
    ) {
        let p = p();
        let row = |v: &[VoltageInterval]| v.iter().map(|iv| conductance_from_bounds(*iv, &p).unwrap()).collect::<Vec<_>>();
        let alone = ArraySpec::new(vec![row(&ivs)]).unwrap();
        let paired = ArraySpec::new(vec![row(&ivs), row(&other)]).unwrap();
        let stimulus: Vec<f64> = ivs.iter().zip(&us).map(|(iv, u)| iv.lo + u * iv.width()).collect();
        let a = search(&alone, &stimulus, &p).unwrap();
        let b = search(&paired, &stimulus, &p).unwrap();
        prop_assert_eq!(&a.rows[0], &b.rows[0]);
    }

    #[test]
    fn bounds_rise_with_conductance(g1 in 1.0..199.0f64, dg in 0.01..1.0f64) {
        let p = p();
        prop_assert!(lower_bound((g1 + dg) * 1e-6, &p) > lower_bound(g1 * 1e-6, &p));
        prop_assert!(upper_bound((g1 + dg) * 1e-6, &p) > upper_bound(g1 * 1e-6, &p));
    }

    #[test]
    fn conductance_round_trip_within_1mv(iv in interval()) {
        let p = p();
        let c = conductance_from_bounds(iv, &p).unwrap();
        let back = bounds_from_conductance(c, &p).unwrap();
        prop_assert!((back.lo - iv.lo).abs() <= 1e-3 && (back.hi - iv.hi).abs() <= 1e-3);
    }

    #[test]
    fn lower_bound_ignores_upper_memristor(g1 in 5.0..60.0f64, g2a in 120.0..200.0f64, g2b in 120.0..200.0f64) {
        let p = p();
        let lo = |g2: f64| {
            let a = ArraySpec::uniform(1, 1, CellConfig::from_micro(g1, g2)).unwrap();
            effective_bounds_in_array(&a, 0, 0, &[0.0], &p, 1e-3).unwrap().lo
        };
        prop_assert!((lo(g2a) - lo(g2b)).abs() < 1e-4);
    }
}

#[test]
fn mid_triode_bounds_follow_the_affine_divider_law() {
    let p = p();
    let slope = (p.v_slhi / p.v_th_ml - 1.0) / p.beta;
    for g_us in [60.0, 80.0, 100.0, 120.0] {
        let g = g_us * 1e-6;
        let a = ArraySpec::uniform(1, 1, CellConfig::new(g, p.g_max)).unwrap();
        let sensed = effective_bounds_in_array(&a, 0, 0, &[0.0], &p, 1e-3).unwrap().lo;
        let affine = p.v_th + slope * g;
        assert!((sensed - affine).abs() < 5e-3, "{g_us} uS: sensed {sensed} affine {affine}");
    }
}
