// SPDX-License-Identifier: Apache-2.0

//! Decision trees and their one-row-per-path CAM tables.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cell::{achievable_window, VoltageInterval};
use crate::compiler::{CamRow, CamTable, TableKind};
use crate::device::DeviceParams;
use crate::error::{AcamError, Result};

/// Voltage window feature domains are mapped onto. It sits 10 mV inside
/// the 0.2-0.6 V level window so domain endpoints stay clear of the
/// full-window cells' edges.
pub const ENCODING_WINDOW: VoltageInterval = VoltageInterval { lo: 0.21, hi: 0.59 };

/// Distance between a split's encoded threshold and the edge shared by its
/// two rows. An input exactly at the threshold then sits inside the
/// right-hand (`>=`) row, clear of the sensing dead band around the edge.
pub const SPLIT_EDGE_OFFSET: f64 = 2e-3;

/// Gap between the left row's upper edge and the right row's lower edge.
pub const SPLIT_GAP: f64 = 1e-4;

/// Affine map from a feature's real domain `[min, max]` onto
/// [`ENCODING_WINDOW`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoding {
    pub min: f64,
    pub max: f64,
}

impl FeatureEncoding {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let e = FeatureEncoding { min, max };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(AcamError::MalformedTree(format!(
                "feature domain [{}, {}] is empty or not finite",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// DL voltage for feature value `x`, clamped to the window.
    pub fn encode(&self, x: f64) -> f64 {
        let t = ((x - self.min) / (self.max - self.min)).clamp(0.0, 1.0);
        ENCODING_WINDOW.lo + t * ENCODING_WINDOW.width()
    }
}

/// Internal nodes send `x[feature] < threshold` left and the rest right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        label: String,
    },
}

impl TreeNode {
    pub fn leaf(label: impl Into<String>) -> Self {
        TreeNode::Leaf {
            label: label.into(),
        }
    }

    pub fn split(feature: usize, threshold: f64, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Split {
            feature,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub encodings: Vec<FeatureEncoding>,
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn new(encodings: Vec<FeatureEncoding>, root: TreeNode) -> Result<Self> {
        let t = DecisionTree { encodings, root };
        t.validate()?;
        Ok(t)
    }

    pub fn n_features(&self) -> usize {
        self.encodings.len()
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.encodings {
            e.validate()?;
        }
        fn walk(n: &TreeNode, n_features: usize) -> Result<()> {
            if let TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } = n
            {
                if *feature >= n_features {
                    return Err(AcamError::MalformedTree(format!(
                        "feature {feature} has no encoding ({n_features} features)"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(AcamError::MalformedTree(format!(
                        "threshold {threshold} on feature {feature} is not finite"
                    )));
                }
                walk(left, n_features)?;
                walk(right, n_features)?;
            }
            Ok(())
        }
        walk(&self.root, self.n_features())
    }

    /// Label reached by walking the tree.
    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        if x.len() != self.n_features() {
            return Err(AcamError::DimensionMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label } => return Ok(label),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] < *threshold { left } else { right },
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: DecisionTree = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(AcamError::from)
    }

    /// Random tree over `n_features` integer domains `[0, domain)`. Split
    /// thresholds are integers strictly inside the region a node still
    /// covers, so no path is contradictory. Leaves are labelled by their
    /// index in depth-first order.
    pub fn random(seed: u64, max_depth: usize, n_features: usize, domain: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encodings = vec![FeatureEncoding { min: 0.0, max: f64::from(domain) }; n_features];
        let mut bounds = vec![(0u32, domain); n_features];
        let mut leaves = 0usize;
        fn grow(
            rng: &mut ChaCha8Rng,
            depth: usize,
            bounds: &mut Vec<(u32, u32)>,
            leaves: &mut usize,
        ) -> TreeNode {
            let splittable: Vec<usize> = (0..bounds.len())
                .filter(|&f| bounds[f].1 - bounds[f].0 >= 2)
                .collect();
            if depth == 0 || splittable.is_empty() || (depth < 6 && rng.gen_bool(0.15)) {
                *leaves += 1;
                return TreeNode::leaf(format!("c{}", *leaves - 1));
            }
            let f = splittable[rng.gen_range(0..splittable.len())];
            let (lo, hi) = bounds[f];
            let theta = rng.gen_range(lo + 1..hi);
            bounds[f] = (lo, theta);
            let left = grow(rng, depth - 1, bounds, leaves);
            bounds[f] = (theta, hi);
            let right = grow(rng, depth - 1, bounds, leaves);
            bounds[f] = (lo, hi);
            TreeNode::split(f, f64::from(theta), left, right)
        }
        let root = grow(&mut rng, max_depth, &mut bounds, &mut leaves);
        DecisionTree { encodings, root }
    }
}

/// Half-open feature-space box `[lo, hi)`; `None` is unbounded.
#[derive(Debug, Clone, Copy, Default)]
struct Constraint {
    lo: Option<f64>,
    hi: Option<f64>,
}

/// One continuous-mode row per root-to-leaf path. Along a path every
/// feature's thresholds intersect into one interval, features absent from
/// the path become full-window cells, and columns follow feature order.
pub fn tree_to_cam(t: &DecisionTree, p: &DeviceParams) -> Result<CamTable> {
    t.validate()?;
    let full = achievable_window(p);
    let mut table = CamTable {
        kind: TableKind::Analog,
        key_bits: None,
        bits_per_cell: None,
        level_family: None,
        encodings: t.encodings.clone(),
        rows: Vec::new(),
        labels: BTreeMap::new(),
        rules: Vec::new(),
    };

    fn walk(
        node: &TreeNode,
        path: &mut Vec<Constraint>,
        t: &DecisionTree,
        full: VoltageInterval,
        table: &mut CamTable,
    ) -> Result<()> {
        match node {
            TreeNode::Leaf { label } => {
                let row = path
                    .iter()
                    .zip(&t.encodings)
                    .enumerate()
                    .map(|(f, (c, e))| constraint_interval(f, c, e, full))
                    .collect::<Result<Vec<_>>>()?;
                table.push(CamRow::Analog(row), label);
                Ok(())
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let saved = path[*feature];
                let c = &mut path[*feature];
                c.hi = Some(c.hi.map_or(*threshold, |h| h.min(*threshold)));
                walk(left, path, t, full, table)?;
                path[*feature] = saved;
                let c = &mut path[*feature];
                c.lo = Some(c.lo.map_or(*threshold, |l| l.max(*threshold)));
                walk(right, path, t, full, table)?;
                path[*feature] = saved;
                Ok(())
            }
        }
    }

    let mut path = vec![Constraint::default(); t.n_features()];
    walk(&t.root, &mut path, t, full, &mut table)?;
    Ok(table)
}

fn constraint_interval(
    feature: usize,
    c: &Constraint,
    e: &FeatureEncoding,
    full: VoltageInterval,
) -> Result<VoltageInterval> {
    if let (Some(lo), Some(hi)) = (c.lo, c.hi) {
        if lo >= hi {
            return Err(AcamError::MalformedTree(format!(
                "path needs feature {feature} in [{lo}, {hi}), which is empty"
            )));
        }
    }
    let v_lo = c.lo.map_or(full.lo, |x| e.encode(x) - SPLIT_EDGE_OFFSET);
    let v_hi = c
        .hi
        .map_or(full.hi, |x| e.encode(x) - SPLIT_EDGE_OFFSET - SPLIT_GAP);
    if v_lo >= v_hi {
        return Err(AcamError::MalformedTree(format!(
            "feature {feature} interval [{v_lo:.4}, {v_hi:.4}] V is narrower than the encoding resolution"
        )));
    }
    Ok(VoltageInterval {
        lo: v_lo.max(full.lo),
        hi: v_hi.min(full.hi),
    })
}
