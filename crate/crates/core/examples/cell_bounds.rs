// SPDX-License-Identifier: Apache-2.0

//! Map memristor conductance pairs to the search interval a single cell
//! stores, then invert an interval back to conductances.

use acam::cell::{achievable_window, bounds_from_conductance, conductance_from_bounds, CellConfig, VoltageInterval};
use acam::device::DeviceParams;

fn main() -> acam::Result<()> {
    let p = DeviceParams::default();
    let w = achievable_window(&p);
    println!("achievable window [{:.4}, {:.4}] V", w.lo, w.hi);
    println!("{:>8} {:>8} {:>8} {:>8}", "G_M1 uS", "G_M2 uS", "lo V", "hi V");
    for (g1, g2) in [(10.0, 150.0), (20.0, 80.0), (40.0, 80.0), (80.0, 40.0), (150.0, 10.0)] {
        match bounds_from_conductance(CellConfig::from_micro(g1, g2), &p) {
            Ok(iv) => println!("{g1:>8.1} {g2:>8.1} {:>8.4} {:>8.4}", iv.lo, iv.hi),
            Err(e) => println!("{g1:>8.1} {g2:>8.1}   {e}"),
        }
    }
    let target = VoltageInterval::new(0.30, 0.45)?;
    let c = conductance_from_bounds(target, &p)?;
    let back = bounds_from_conductance(c, &p)?;
    println!(
        "[0.30, 0.45] V -> G_M1 {:.2} uS, G_M2 {:.2} uS -> [{:.4}, {:.4}] V",
        c.g_m1 * 1e6,
        c.g_m2 * 1e6,
        back.lo,
        back.hi
    );
    Ok(())
}
