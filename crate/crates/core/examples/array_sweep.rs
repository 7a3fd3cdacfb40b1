// SPDX-License-Identifier: Apache-2.0

//! Sweep one data line of a multi-column row and compare the matching band
//! inside the array with the isolated-cell interval as the word grows.

use acam::array::{analytic_range_shift, effective_bounds_in_array, ArraySpec, Variant};
use acam::cell::{bounds_from_conductance, CellConfig};
use acam::device::DeviceParams;

fn main() -> acam::Result<()> {
    let p = DeviceParams::default();
    let cell = CellConfig::from_micro(20.0, 80.0);
    let iso = bounds_from_conductance(cell, &p)?;
    println!("isolated cell [{:.4}, {:.4}] V", iso.lo, iso.hi);
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>12}", "cols", "lo mV", "hi mV", "ts lo mV", "ts hi mV", "analytic mV");
    for cols in [1, 2, 8, 16, 32, 64] {
        let a = ArraySpec::uniform(1, cols, cell)?;
        let bias = vec![0.4; cols];
        let m = effective_bounds_in_array(&a, 0, 0, &bias, &p, 1e-3)?;
        let ts = a.with_variant(Variant::TsPullup);
        let t = effective_bounds_in_array(&ts, 0, 0, &bias, &p, 1e-3)?;
        println!(
            "{cols:>5} {:>+10.3} {:>+10.3} {:>+10.3} {:>+10.3} {:>12.2}",
            (m.lo - iso.lo) * 1e3,
            (m.hi - iso.hi) * 1e3,
            (t.lo - iso.lo) * 1e3,
            (t.hi - iso.hi) * 1e3,
            analytic_range_shift(cols, &p) * 1e3
        );
    }
    Ok(())
}
