// SPDX-License-Identifier: Apache-2.0

//! Compile an integer range rule into ternary and multi-bit tables, search
//! the boundary keys on the simulated array, and print both grids.

use acam::compiler::{build_array, search_table, CamTable, RangeRule};
use acam::device::DeviceParams;

fn main() -> acam::Result<()> {
    let p = DeviceParams::default();
    let rule = RangeRule::new(385, 58630, 16, "port-range")?;
    let tcam = CamTable::ternary(std::slice::from_ref(&rule))?;
    println!("ternary: {} rows x {} cells", tcam.n_rows(), tcam.width());
    for k in [3, 4, 8] {
        let table = CamTable::digits(std::slice::from_ref(&rule), k)?;
        println!("\n{k}-bit cells: {} rows x {} cells", table.n_rows(), table.width());
        print!("{}", table.to_grid());
        let array = build_array(&table, &p)?;
        for key in [384.0, 385.0, 58630.0, 58631.0] {
            let hits = search_table(&table, &array, &[key], &p)?;
            println!("key {key:>7}: {} matching rows", hits.len());
        }
    }
    Ok(())
}
