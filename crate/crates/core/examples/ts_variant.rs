// SPDX-License-Identifier: Apache-2.0

//! Compare the transistor pull-down match line with the threshold-switch
//! pull-up variant: in-array interval shift and mismatch latency.

use acam::array::{discharge_latency, effective_bounds_in_array, ArraySpec, Variant};
use acam::cell::CellConfig;
use acam::device::DeviceParams;

fn main() -> acam::Result<()> {
    let p = DeviceParams::default();
    let cell = CellConfig::from_micro(20.0, 80.0);
    for variant in [Variant::TransistorPulldown, Variant::TsPullup] {
        let a = ArraySpec::uniform(1, 32, cell)?.with_variant(variant);
        let bias = vec![0.4; 32];
        let iv = effective_bounds_in_array(&a, 0, 0, &bias, &p, 1e-3)?;
        let mut miss = bias.clone();
        miss[0] = 0.9;
        let t = discharge_latency(&a, &miss, 0, &p)?;
        println!("{variant:?}: in-array [{:.4}, {:.4}] V, mismatch latency {:.2} ps", iv.lo, iv.hi, t * 1e12);
    }
    Ok(())
}
