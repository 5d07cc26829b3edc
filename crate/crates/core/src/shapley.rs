//! Shapley attribution for tree ensembles.
//!
//! [`tree_shap`] is the polynomial-time path-dependent algorithm. The coalition
//! game it solves is spelled out by [`coalition_value`] in
//! [`CoalitionValue::TreeConditional`] mode, and [`exact_shapley`] evaluates
//! that game by full enumeration, so the two can be checked against each other.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::format_f64;
use crate::error::{Error, Result};
use crate::gbdt::{GbdtModel, NodeKind, Tree};
use crate::matrix::Matrix;

/// Largest feature count [`exact_shapley`] will enumerate.
pub const EXACT_MAX_FEATURES: usize = 15;

/// Per-row attributions. `base_value + row sum == prediction` for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapMatrix {
    pub feature_names: Vec<String>,
    pub values: Matrix,
    pub base_value: f64,
}

impl ShapMatrix {
    pub fn explained_rows(&self) -> usize {
        self.values.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.values.n_cols()
    }

    /// `base_value + Σφ` for row `r`.
    pub fn reconstructed(&self, r: usize) -> f64 {
        self.base_value + self.values.row(r).iter().sum::<f64>()
    }

    /// `row_index,<features...>,base_value,prediction`, one line per row.
    pub fn to_csv(&self, predictions: &[f64]) -> Result<String> {
        if predictions.len() != self.explained_rows() {
            return Err(Error::Shape {
                expected: self.explained_rows(),
                got: predictions.len(),
            });
        }
        let mut out = String::from("row_index");
        for name in &self.feature_names {
            out.push(',');
            out.push_str(name);
        }
        out.push_str(",base_value,prediction\n");
        let base = format_f64(self.base_value);
        for (r, p) in predictions.iter().enumerate() {
            out.push_str(&r.to_string());
            for v in self.values.row(r) {
                out.push(',');
                out.push_str(&format_f64(*v));
            }
            out.push(',');
            out.push_str(&base);
            out.push(',');
            out.push_str(&format_f64(*p));
            out.push('\n');
        }
        Ok(out)
    }
}

/// How features outside a coalition are marginalized.
#[derive(Debug, Clone, PartialEq)]
pub enum CoalitionValue {
    /// Cover-weighted descent: absent features take both branches in
    /// proportion to the training rows that went each way.
    TreeConditional,
    /// Mean prediction over background rows with coalition features
    /// overwritten by the explained row.
    Interventional { background: Matrix },
}

impl CoalitionValue {
    fn validate(&self, n_features: usize) -> Result<()> {
        match self {
            CoalitionValue::TreeConditional => Ok(()),
            CoalitionValue::Interventional { background } => {
                if background.n_rows() == 0 {
                    return Err(Error::InvalidParam("background set is empty".into()));
                }
                if background.n_cols() != n_features {
                    return Err(Error::Shape {
                        expected: n_features,
                        got: background.n_cols(),
                    });
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: usize,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

const NO_FEATURE: usize = usize::MAX;

impl Default for PathElement {
    fn default() -> Self {
        PathElement {
            feature: NO_FEATURE,
            zero_fraction: 0.0,
            one_fraction: 0.0,
            weight: 0.0,
        }
    }
}

fn extend_path(path: &mut [PathElement], depth: usize, zero: f64, one: f64, feature: usize) {
    path[depth] = PathElement {
        feature,
        zero_fraction: zero,
        one_fraction: one,
        weight: if depth == 0 { 1.0 } else { 0.0 },
    };
    let d1 = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / d1;
        path[i].weight = zero * path[i].weight * (depth - i) as f64 / d1;
    }
}

fn unwind_path(path: &mut [PathElement], depth: usize, index: usize) {
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * d1 / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (depth - i) as f64 / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

/// Total path weight with element `index` removed, without mutating the path.
fn unwound_sum(path: &[PathElement], depth: usize, index: usize) -> f64 {
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one * d1 / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (depth - i) as f64 / d1;
        } else if zero != 0.0 {
            total += path[i].weight / zero * d1 / (depth - i) as f64;
        }
    }
    total
}

struct TreeExplainer<'a> {
    tree: &'a Tree,
    row: &'a [f64],
    phi: &'a mut [f64],
    path: &'a mut [PathElement],
}

impl TreeExplainer<'_> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &mut self,
        node: usize,
        parent_start: usize,
        depth: usize,
        zero: f64,
        one: f64,
        feature: usize,
    ) {
        let start = parent_start + depth + 1;
        self.path
            .copy_within(parent_start..parent_start + depth + 1, start);
        let mut depth = depth;
        extend_path(&mut self.path[start..], depth, zero, one, feature);

        let nodes = self.tree.nodes();
        match nodes[node].kind {
            NodeKind::Leaf { value } => {
                let path = &self.path[start..];
                for i in 1..=depth {
                    let w = unwound_sum(path, depth, i);
                    let el = path[i];
                    self.phi[el.feature] += w * (el.one_fraction - el.zero_fraction) * value;
                }
            }
            NodeKind::Internal {
                feature: split,
                threshold,
                left,
                right,
            } => {
                let (hot, cold) = if self.row[split] < threshold {
                    (left, right)
                } else {
                    (right, left)
                };
                let cover = nodes[node].cover as f64;
                let hot_zero = nodes[hot].cover as f64 / cover;
                let cold_zero = nodes[cold].cover as f64 / cover;
                let mut incoming_zero = 1.0;
                let mut incoming_one = 1.0;
                let path = &mut self.path[start..];
                if let Some(k) = (0..=depth).find(|&k| path[k].feature == split) {
                    incoming_zero = path[k].zero_fraction;
                    incoming_one = path[k].one_fraction;
                    unwind_path(path, depth, k);
                    depth -= 1;
                }
                self.recurse(hot, start, depth + 1, hot_zero * incoming_zero, incoming_one, split);
                self.recurse(cold, start, depth + 1, cold_zero * incoming_zero, 0.0, split);
            }
        }
    }
}

/// Adds one tree's (unscaled) attributions for `row` into `phi`.
fn tree_shap_row(
    tree: &Tree,
    max_depth: usize,
    row: &[f64],
    phi: &mut [f64],
    path: &mut Vec<PathElement>,
) {
    let d = max_depth + 2;
    let need = d * (d + 1) / 2 + d;
    if path.len() < need {
        path.resize(need, PathElement::default());
    }
    let mut ex = TreeExplainer {
        tree,
        row,
        phi,
        path,
    };
    // the root is seeded at depth 0 from a virtual parent occupying slot 0
    ex.recurse(0, 0, 0, 1.0, 1.0, NO_FEATURE);
}

/// Leaf tables are used when a tree needs at most this many table entries.
const TABLE_BUDGET: usize = 1 << 18;

/// Attribution tables for one tree.
///
/// Within a tree the game is `v(S) = Σ_leaf value · Π_j (j ∈ S ? o_j : z_j)`
/// over the distinct features `j` on the leaf's path, where `z_j` is the cover
/// fraction of the path and `o_j ∈ {0, 1}` says whether the row follows it. So
/// a leaf's contribution depends on the row only through which path features
/// it follows, and can be tabulated once per pattern.
struct TreeTable {
    /// Per node: bit of its split feature among the path's distinct features.
    bit: Vec<u32>,
    /// Per node: index into `leaves` for leaf nodes.
    leaf_of: Vec<usize>,
    leaves: Vec<LeafTable>,
}

struct LeafTable {
    features: Vec<usize>,
    /// `contrib[pattern * d + k]` for `d = features.len()`.
    contrib: Vec<f64>,
}

impl TreeTable {
    /// `None` when the tables would exceed [`TABLE_BUDGET`] entries.
    fn build(tree: &Tree) -> Option<TreeTable> {
        let nodes = tree.nodes();
        let mut bit = vec![0u32; nodes.len()];
        let mut leaf_of = vec![usize::MAX; nodes.len()];
        let mut leaves = Vec::new();
        let mut budget = TABLE_BUDGET;
        // (node, distinct path features, their cover fractions)
        let mut stack: Vec<(usize, Vec<usize>, Vec<f64>)> = vec![(0, Vec::new(), Vec::new())];
        while let Some((id, mut feats, mut zeros)) = stack.pop() {
            match nodes[id].kind {
                NodeKind::Leaf { value } => {
                    let d = feats.len();
                    let size = (1usize << d) * d;
                    if size > budget {
                        return None;
                    }
                    budget -= size;
                    leaf_of[id] = leaves.len();
                    leaves.push(LeafTable {
                        contrib: leaf_contributions(value, &zeros),
                        features: feats,
                    });
                }
                NodeKind::Internal {
                    feature,
                    left,
                    right,
                    ..
                } => {
                    let k = match feats.iter().position(|&f| f == feature) {
                        Some(k) => k,
                        None => {
                            feats.push(feature);
                            zeros.push(1.0);
                            feats.len() - 1
                        }
                    };
                    if k >= 32 {
                        return None;
                    }
                    bit[id] = 1 << k;
                    let cover = nodes[id].cover as f64;
                    for child in [left, right] {
                        let mut z = zeros.clone();
                        z[k] *= nodes[child].cover as f64 / cover;
                        stack.push((child, feats.clone(), z));
                    }
                }
            }
        }
        Some(TreeTable { bit, leaf_of, leaves })
    }

    /// Adds this tree's (unscaled) attributions for `row` into `phi`.
    fn explain(&self, tree: &Tree, row: &[f64], phi: &mut [f64], mask: &mut Vec<u32>) {
        let nodes = tree.nodes();
        mask.clear();
        mask.resize(nodes.len(), 0);
        mask[0] = u32::MAX;
        // children always have larger ids than their parent
        for (id, node) in nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (hot, cold) = if row[feature] < threshold {
                        (left, right)
                    } else {
                        (right, left)
                    };
                    mask[hot] = mask[id];
                    mask[cold] = mask[id] & !self.bit[id];
                }
                NodeKind::Leaf { .. } => {
                    let leaf = &self.leaves[self.leaf_of[id]];
                    let d = leaf.features.len();
                    if d == 0 {
                        continue;
                    }
                    let pattern = (mask[id] & ((1u32 << d) - 1)) as usize;
                    let c = &leaf.contrib[pattern * d..(pattern + 1) * d];
                    for (&f, &v) in leaf.features.iter().zip(c) {
                        phi[f] += v;
                    }
                }
            }
        }
    }
}

/// Shapley values of the single-leaf game for every pattern of followed
/// features. `zeros[k]` is the cover fraction of distinct feature `k`.
fn leaf_contributions(value: f64, zeros: &[f64]) -> Vec<f64> {
    let d = zeros.len();
    let mut out = vec![0.0; (1 << d) * d];
    if d == 0 {
        return out;
    }
    // weight of a coalition of size s among the other d-1 players
    let mut w = vec![0.0; d];
    w[0] = 1.0 / d as f64;
    for s in 1..d {
        w[s] = w[s - 1] * s as f64 / (d - s) as f64;
    }
    let mut e = vec![0.0; d];
    for pattern in 0..1usize << d {
        for i in 0..d {
            // elementary symmetric polynomials of z over followed features != i;
            // features not followed can only sit outside the coalition
            e.iter_mut().for_each(|v| *v = 0.0);
            e[0] = 1.0;
            let mut n_followed = 0;
            let mut outside = 1.0;
            for (k, &z) in zeros.iter().enumerate() {
                if k == i {
                    continue;
                }
                if pattern >> k & 1 == 1 {
                    n_followed += 1;
                    for j in (1..=n_followed).rev() {
                        e[j] += z * e[j - 1];
                    }
                } else {
                    outside *= z;
                }
            }
            // Σ_{S ⊆ followed} w(|S|) Π_{followed \ S} z
            let mut total = 0.0;
            for s in 0..=n_followed {
                total += w[s] * e[n_followed - s];
            }
            let o_i = (pattern >> i & 1) as f64;
            out[pattern * d + i] = value * (o_i - zeros[i]) * outside * total;
        }
    }
    out
}

/// Path-dependent attributions for every row of `rows`.
pub fn tree_shap(model: &GbdtModel, rows: &Matrix) -> Result<ShapMatrix> {
    explain_rows(model, rows, true)
}

/// [`tree_shap`] through the per-row path recursion only. Slower; kept as a
/// cross-check for the tabulated path.
pub fn tree_shap_recursive(model: &GbdtModel, rows: &Matrix) -> Result<ShapMatrix> {
    explain_rows(model, rows, false)
}

fn explain_rows(model: &GbdtModel, rows: &Matrix, tables: bool) -> Result<ShapMatrix> {
    model.validate()?;
    model.check_width(rows.n_cols())?;
    let m = model.n_features();
    let lr = model.learning_rate();
    let base_value =
        model.base_score() + lr * model.trees().iter().map(Tree::expected_value).sum::<f64>();
    let mut values = Matrix::zeros(rows.n_rows(), m);
    let mut path = Vec::new();
    let mut mask = Vec::new();
    for tree in model.trees() {
        match TreeTable::build(tree).filter(|_| tables) {
            Some(table) => {
                for (r, row) in rows.iter_rows().enumerate() {
                    table.explain(tree, row, values.row_mut(r), &mut mask);
                }
            }
            None => {
                let depth = tree.max_depth();
                for (r, row) in rows.iter_rows().enumerate() {
                    tree_shap_row(tree, depth, row, values.row_mut(r), &mut path);
                }
            }
        }
    }
    for r in 0..rows.n_rows() {
        for v in values.row_mut(r) {
            *v *= lr;
        }
    }
    Ok(ShapMatrix {
        feature_names: model.feature_names().to_vec(),
        values,
        base_value,
    })
}

fn conditional_expectation(tree: &Tree, id: usize, row: &[f64], present: &[bool]) -> f64 {
    let nodes = tree.nodes();
    match nodes[id].kind {
        NodeKind::Leaf { value } => value,
        NodeKind::Internal {
            feature,
            threshold,
            left,
            right,
        } => {
            if present[feature] {
                let next = if row[feature] < threshold { left } else { right };
                conditional_expectation(tree, next, row, present)
            } else {
                let c = nodes[id].cover as f64;
                (nodes[left].cover as f64 * conditional_expectation(tree, left, row, present)
                    + nodes[right].cover as f64 * conditional_expectation(tree, right, row, present))
                    / c
            }
        }
    }
}

/// `v(S)`: model output with the features flagged in `present` taken from
/// `row` and the rest marginalized according to `spec`.
pub fn coalition_value(
    model: &GbdtModel,
    row: &[f64],
    present: &[bool],
    spec: &CoalitionValue,
) -> f64 {
    match spec {
        CoalitionValue::TreeConditional => {
            let sum: f64 = model
                .trees()
                .iter()
                .map(|t| conditional_expectation(t, 0, row, present))
                .sum();
            model.base_score() + model.learning_rate() * sum
        }
        CoalitionValue::Interventional { background } => {
            let mut hybrid = vec![0.0; row.len()];
            let total: f64 = background
                .iter_rows()
                .map(|b| {
                    for (j, h) in hybrid.iter_mut().enumerate() {
                        *h = if present[j] { row[j] } else { b[j] };
                    }
                    model.predict_row(&hybrid)
                })
                .sum();
            total / background.n_rows() as f64
        }
    }
}

fn check_row(model: &GbdtModel, row: &[f64], spec: &CoalitionValue) -> Result<()> {
    model.validate()?;
    model.check_width(row.len())?;
    spec.validate(model.n_features())
}

/// Shapley values by enumerating all `2^M` coalitions.
pub fn exact_shapley(model: &GbdtModel, row: &[f64], spec: &CoalitionValue) -> Result<Vec<f64>> {
    check_row(model, row, spec)?;
    let m = model.n_features();
    if m > EXACT_MAX_FEATURES {
        return Err(Error::TooManyFeatures {
            got: m,
            max: EXACT_MAX_FEATURES,
        });
    }
    let n_sets = 1usize << m;
    let mut present = vec![false; m];
    let v: Vec<f64> = (0..n_sets)
        .map(|mask| {
            for (j, p) in present.iter_mut().enumerate() {
                *p = mask >> j & 1 == 1;
            }
            coalition_value(model, row, &present, spec)
        })
        .collect();
    // weight(s) = s! (m - s - 1)! / m!
    let weight: Vec<f64> = (0..m)
        .map(|s| {
            let mut w = 1.0 / m as f64;
            // 1 / (m * C(m - 1, s))
            for k in 0..s {
                w *= (s - k) as f64 / (m - 1 - k) as f64;
            }
            w
        })
        .collect();
    let mut phi = vec![0.0; m];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        *p = (0..n_sets)
            .filter(|s| s & bit == 0)
            .map(|s| weight[s.count_ones() as usize] * (v[s | bit] - v[s]))
            .sum();
    }
    Ok(phi)
}

/// Permutation-sampling estimate with per-feature standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingEstimate {
    pub values: Vec<f64>,
    /// Sample standard deviation of the marginal contributions over `sqrt(n)`.
    /// Zero when only one permutation was drawn.
    pub std_errors: Vec<f64>,
    pub n_permutations: usize,
}

pub fn sampling_shapley_with_errors(
    model: &GbdtModel,
    row: &[f64],
    spec: &CoalitionValue,
    n_permutations: usize,
    seed: u64,
) -> Result<SamplingEstimate> {
    check_row(model, row, spec)?;
    if n_permutations == 0 {
        return Err(Error::InvalidParam("n_permutations must be >= 1".into()));
    }
    let m = model.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    let mut present = vec![false; m];
    let mut mean = vec![0.0; m];
    let mut m2 = vec![0.0; m];
    let empty = coalition_value(model, row, &present, spec);
    for k in 1..=n_permutations {
        order.shuffle(&mut rng);
        present.iter_mut().for_each(|p| *p = false);
        let mut prev = empty;
        for &i in &order {
            present[i] = true;
            let cur = coalition_value(model, row, &present, spec);
            let x = cur - prev;
            let delta = x - mean[i];
            mean[i] += delta / k as f64;
            m2[i] += delta * (x - mean[i]);
            prev = cur;
        }
    }
    let std_errors = m2
        .iter()
        .map(|&s| {
            if n_permutations > 1 {
                (s / (n_permutations - 1) as f64 / n_permutations as f64).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(SamplingEstimate {
        values: mean,
        std_errors,
        n_permutations,
    })
}

/// Mean marginal contribution over `n_permutations` seeded random orderings.
pub fn sampling_shapley(
    model: &GbdtModel,
    row: &[f64],
    spec: &CoalitionValue,
    n_permutations: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    sampling_shapley_with_errors(model, row, spec, n_permutations, seed).map(|e| e.values)
}

/// Per-feature mean of `|φ|`.
pub fn global_influence(shap: &ShapMatrix) -> Result<Vec<f64>> {
    let n = shap.explained_rows();
    if n == 0 {
        return Err(Error::InvalidParam("no explained rows".into()));
    }
    let mut acc = vec![0.0; shap.n_features()];
    for row in shap.values.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v.abs();
        }
    }
    Ok(acc.into_iter().map(|a| a / n as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbdt::TreeNode;

    fn stump_on(feature: usize, n_features: usize) -> GbdtModel {
        // left value 2 cover 3, right value 10 cover 1
        let tree = Tree::from_nodes(vec![
            TreeNode::internal(feature, 0.5, 1, 2, 4),
            TreeNode::leaf(2.0, 3),
            TreeNode::leaf(10.0, 1),
        ])
        .unwrap();
        let names = (0..n_features).map(|j| format!("f{j}")).collect();
        GbdtModel::new(1.0, 1.0, names, vec![tree]).unwrap()
    }

    #[test]
    fn empty_model_attributes_nothing() {
        let model = GbdtModel::new(3.5, 0.1, vec!["a".into(), "b".into()], vec![]).unwrap();
        let rows = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let s = tree_shap(&model, &rows).unwrap();
        assert_eq!(s.values.row(0), [0.0, 0.0]);
        assert_eq!(s.base_value, 3.5);
    }

    #[test]
    fn stump_attribution_closed_form() {
        let model = stump_on(1, 3);
        let rows = Matrix::from_rows(&[vec![0.0, 0.9, 0.0]]).unwrap();
        let s = tree_shap(&model, &rows).unwrap();
        // b - (nL a + nR b) / (nL + nR)
        let expected = 10.0 - (3.0 * 2.0 + 1.0 * 10.0) / 4.0;
        assert_eq!(s.values.row(0), [0.0, expected, 0.0]);
        assert_eq!(s.base_value, 1.0 + 4.0);
        let exact = exact_shapley(&model, rows.row(0), &CoalitionValue::TreeConditional).unwrap();
        assert!((exact[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let model = stump_on(1, 2);
        let rows = Matrix::from_rows(&[vec![0.0, 0.9], vec![0.0, 0.1]]).unwrap();
        let s = tree_shap(&model, &rows).unwrap();
        let csv = s.to_csv(&model.predict(&rows).unwrap()).unwrap();
        assert_eq!(csv, "row_index,f0,f1,base_value,prediction\n0,0,6,5,11\n1,0,-2,5,3\n");
        assert!(s.to_csv(&[1.0]).is_err());
    }

    #[test]
    fn single_player_game() {
        let model = stump_on(0, 1);
        let row = [0.2];
        let phi = exact_shapley(&model, &row, &CoalitionValue::TreeConditional).unwrap();
        let v_empty = coalition_value(&model, &row, &[false], &CoalitionValue::TreeConditional);
        assert_eq!(phi, vec![model.predict_row(&row) - v_empty]);
        let sampled = sampling_shapley(&model, &row, &CoalitionValue::TreeConditional, 1, 9).unwrap();
        assert_eq!(sampled, phi);
    }

    #[test]
    fn symmetric_features_share_credit() {
        // f = g(x0) + g(x1) as two stumps
        let t0 = Tree::from_nodes(vec![
            TreeNode::internal(0, 0.5, 1, 2, 10),
            TreeNode::leaf(-1.0, 4),
            TreeNode::leaf(2.0, 6),
        ])
        .unwrap();
        let t1 = Tree::from_nodes(vec![
            TreeNode::internal(1, 0.5, 1, 2, 10),
            TreeNode::leaf(-1.0, 4),
            TreeNode::leaf(2.0, 6),
        ])
        .unwrap();
        let model = GbdtModel::new(0.0, 1.0, vec!["a".into(), "b".into()], vec![t0, t1]).unwrap();
        let row = [0.7, 0.7];
        let bg = Matrix::from_rows(&[vec![0.1, 0.1], vec![0.9, 0.9], vec![0.2, 0.2]]).unwrap();
        for spec in [
            CoalitionValue::TreeConditional,
            CoalitionValue::Interventional { background: bg },
        ] {
            let phi = exact_shapley(&model, &row, &spec).unwrap();
            assert!((phi[0] - phi[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn guards() {
        let model = stump_on(0, 16);
        let row = vec![0.0; 16];
        assert!(matches!(
            exact_shapley(&model, &row, &CoalitionValue::TreeConditional),
            Err(Error::TooManyFeatures { .. })
        ));
        let empty_bg = CoalitionValue::Interventional {
            background: Matrix::zeros(0, 16),
        };
        assert!(sampling_shapley(&model, &row, &empty_bg, 5, 1).is_err());
        assert!(sampling_shapley(&model, &row, &CoalitionValue::TreeConditional, 0, 1).is_err());
        assert!(global_influence(&ShapMatrix {
            feature_names: vec![],
            values: Matrix::zeros(0, 2),
            base_value: 0.0
        })
        .is_err());
    }

    #[test]
    fn global_influence_is_mean_abs() {
        let s = ShapMatrix {
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            values: Matrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![3.0, 1.0, 0.0]]).unwrap(),
            base_value: 0.0,
        };
        assert_eq!(global_influence(&s).unwrap(), vec![2.0, 1.0, 0.0]);
        let swapped = ShapMatrix {
            values: Matrix::from_rows(&[vec![3.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]]).unwrap(),
            ..s.clone()
        };
        assert_eq!(global_influence(&swapped).unwrap(), global_influence(&s).unwrap());
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = stump_on(2, 4);
        let row = [0.1, 0.4, 0.8, 0.3];
        let a = sampling_shapley(&model, &row, &CoalitionValue::TreeConditional, 50, 4).unwrap();
        let b = sampling_shapley(&model, &row, &CoalitionValue::TreeConditional, 50, 4).unwrap();
        assert_eq!(a, b);
    }
}
