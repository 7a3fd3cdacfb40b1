// SPDX-License-Identifier: Apache-2.0

//! Program memristors with write-verify pulses and show how the residual
//! conductance error moves the stored interval.

use acam::array::PROGRAM_MAX_PULSES;
use acam::cell::{bounds_from_conductance, CellConfig};
use acam::device::{program_memristor, DeviceParams};

fn main() -> acam::Result<()> {
    let p = DeviceParams::default();
    let (t1, t2) = (40e-6, 80e-6);
    let ideal = bounds_from_conductance(CellConfig::new(t1, t2), &p)?;
    println!("target [{:.4}, {:.4}] V", ideal.lo, ideal.hi);
    for tol_us in [4.0, 1.0, 0.25] {
        let tol = tol_us * 1e-6;
        for seed in 0..3u64 {
            let m1 = program_memristor(t1, 2 * seed, tol, PROGRAM_MAX_PULSES, &p)?;
            let m2 = program_memristor(t2, 2 * seed + 1, tol, PROGRAM_MAX_PULSES, &p)?;
            let iv = bounds_from_conductance(CellConfig::new(m1.state.g, m2.state.g), &p)?;
            println!(
                "tol {tol_us:>4} uS seed {seed}: {:>2}+{:>2} pulses, [{:.4}, {:.4}] V, shifts {:+.2}/{:+.2} mV",
                m1.iterations,
                m2.iterations,
                iv.lo,
                iv.hi,
                (iv.lo - ideal.lo) * 1e3,
                (iv.hi - ideal.hi) * 1e3
            );
        }
    }
    Ok(())
}
