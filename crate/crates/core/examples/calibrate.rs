// SPDX-License-Identifier: Apache-2.0

//! Fit the transistor constants to the reference anchor cells and print the
//! resulting parameter document plus per-anchor residuals.

use acam::cell::{achievable_window, calibrate, reference_anchors};

fn main() -> anyhow::Result<()> {
    let cal = calibrate(&reference_anchors())?;
    println!("{}", serde_json::to_string_pretty(&cal.params)?);
    for r in &cal.residuals {
        println!(
            "({:>5.1}, {:>5.1}) uS -> [{:.4}, {:.4}] V  residuals {:+.2} / {:+.2} mV",
            r.anchor.g_m1_uS,
            r.anchor.g_m2_uS,
            r.lo_fit_V,
            r.hi_fit_V,
            r.lo_residual_V * 1e3,
            r.hi_residual_V * 1e3
        );
    }
    let w = achievable_window(&cal.params);
    println!("achievable window [{:.4}, {:.4}] V after {} iterations", w.lo, w.hi, cal.iterations);
    Ok(())
}
