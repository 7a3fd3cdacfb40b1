// SPDX-License-Identifier: Apache-2.0

//! Energy, area and transistor report for the reference array, with and
//! without the input DAC, against published TCAM energies.

use acam::cost::{baseline_comparison, energy_per_search, AreaParams, EnergyParams, REFERENCE_COLS, REFERENCE_ROWS};

fn main() -> acam::Result<()> {
    let ep = EnergyParams::default();
    let ap = AreaParams::default();
    let report = energy_per_search(REFERENCE_ROWS, REFERENCE_COLS, &ep, &ap)?;
    print!("{}", report.to_text());
    let digital = energy_per_search(REFERENCE_ROWS, REFERENCE_COLS, &ep.without_dac(), &ap)?;
    println!("without DAC: {:.1} fJ/search", digital.total_fj);
    let scaled = energy_per_search(6, 4, &ep, &ap)?.with_tcam_equivalent(320);
    println!();
    print!("{}", baseline_comparison(&scaled).to_text());
    Ok(())
}
