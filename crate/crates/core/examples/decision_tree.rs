// SPDX-License-Identifier: Apache-2.0

//! Compile a random decision tree into an analog CAM table and check that
//! the simulated array agrees with direct tree evaluation.

use acam::array::matching_rows;
use acam::compiler::build_array;
use acam::device::DeviceParams;
use acam::tree::{tree_to_cam, DecisionTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> acam::Result<()> {
    let p = DeviceParams::default();
    let tree = DecisionTree::random(11, 6, 4, 100);
    let table = tree_to_cam(&tree, &p)?;
    let array = build_array(&table, &p)?;
    println!("{} leaves, depth {} -> {} rows x {} cells", tree.root.n_leaves(), tree.root.depth(), table.n_rows(), table.width());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    let n = 2000;
    for _ in 0..n {
        let x: Vec<f64> = (0..4).map(|_| f64::from(rng.gen_range(0..=100u32))).collect();
        let rows = matching_rows(&array, &table.encode_input(&x)?, &p)?;
        if let [r] = rows.as_slice() {
            if table.label(*r) == Some(tree.predict(&x)?) {
                agree += 1;
            }
        }
    }
    println!("agreement {agree}/{n}");
    Ok(())
}
