//! Least-squares gradient boosting over exact-split regression trees.
//!
//! Split candidates are midpoints between adjacent distinct sorted values.
//! Row routing: left iff `value < threshold`.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{format_f64, Dataset};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeNode {
    pub kind: NodeKind,
    /// Training rows routed through this node.
    pub cover: u64,
}

impl TreeNode {
    pub fn leaf(value: f64, cover: u64) -> Self {
        TreeNode {
            kind: NodeKind::Leaf { value },
            cover,
        }
    }

    pub fn internal(feature: usize, threshold: f64, left: usize, right: usize, cover: u64) -> Self {
        TreeNode {
            kind: NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            },
            cover,
        }
    }
}

/// Node arena; node 0 is the root and children always have larger ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn from_nodes(nodes: Vec<TreeNode>) -> Result<Tree> {
        let tree = Tree { nodes };
        tree.validate(usize::MAX)?;
        Ok(tree)
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root_cover(&self) -> u64 {
        self.nodes[0].cover
    }

    fn validate(&self, n_features: usize) -> Result<()> {
        let nodes = &self.nodes;
        if nodes.is_empty() {
            return Err(Error::CorruptModel("tree has no nodes".into()));
        }
        let mut referenced = vec![false; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            if node.cover == 0 {
                return Err(Error::CorruptModel(format!("node {id} has zero cover")));
            }
            match node.kind {
                NodeKind::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::CorruptModel(format!("node {id}: non-finite leaf")));
                    }
                }
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(Error::CorruptModel(format!(
                            "node {id}: feature {feature} out of range"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::CorruptModel(format!("node {id}: bad threshold")));
                    }
                    for child in [left, right] {
                        if child <= id || child >= nodes.len() {
                            return Err(Error::CorruptModel(format!(
                                "node {id}: invalid child {child}"
                            )));
                        }
                        if std::mem::replace(&mut referenced[child], true) {
                            return Err(Error::CorruptModel(format!(
                                "node {child} has two parents"
                            )));
                        }
                    }
                    if left == right {
                        return Err(Error::CorruptModel(format!("node {id}: identical children")));
                    }
                    let sum = nodes[left].cover + nodes[right].cover;
                    if sum != node.cover {
                        return Err(Error::CorruptModel(format!(
                            "node {id}: cover {} != {} + {}",
                            node.cover, nodes[left].cover, nodes[right].cover
                        )));
                    }
                }
            }
        }
        if let Some(orphan) = (1..nodes.len()).find(|&i| !referenced[i]) {
            return Err(Error::CorruptModel(format!("node {orphan} is unreachable")));
        }
        Ok(())
    }

    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id].kind {
                NodeKind::Leaf { .. } => return id,
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(row)].kind {
            NodeKind::Leaf { value } => value,
            NodeKind::Internal { .. } => unreachable!(),
        }
    }

    /// Cover-weighted mean leaf value.
    pub fn expected_value(&self) -> f64 {
        let root = self.root_cover() as f64;
        self.nodes
            .iter()
            .filter_map(|n| match n.kind {
                NodeKind::Leaf { value } => Some(value * n.cover as f64 / root),
                NodeKind::Internal { .. } => None,
            })
            .sum()
    }

    pub fn max_depth(&self) -> usize {
        fn depth(nodes: &[TreeNode], id: usize) -> usize {
            match nodes[id].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Internal { left, right, .. } => {
                    1 + depth(nodes, left).max(depth(nodes, right))
                }
            }
        }
        depth(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Fraction of rows drawn (without replacement) for each tree; 1 disables.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            n_trees: 250,
            learning_rate: 0.1,
            max_depth: 6,
            min_samples_leaf: 20,
            subsample: 1.0,
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidParam("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidParam("min_samples_leaf must be >= 1".into()));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "subsample must be in (0, 1], got {}",
                self.subsample
            )));
        }
        Ok(())
    }

    /// Whether `seed` can influence the fitted model at all.
    pub fn is_seed_dependent(&self) -> bool {
        self.subsample < 1.0
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        GbdtParams {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    base_score: f64,
    learning_rate: f64,
    feature_names: Vec<String>,
    trees: Vec<Tree>,
}

impl GbdtModel {
    /// Assembles a model from parts, checking every tree invariant.
    pub fn new(
        base_score: f64,
        learning_rate: f64,
        feature_names: Vec<String>,
        trees: Vec<Tree>,
    ) -> Result<GbdtModel> {
        let model = GbdtModel {
            base_score,
            learning_rate,
            feature_names,
            trees,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base_score.is_finite() {
            return Err(Error::CorruptModel("non-finite base_score".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::CorruptModel(format!(
                "learning_rate {} outside (0, 1]",
                self.learning_rate
            )));
        }
        let mut root_cover = None;
        for (t, tree) in self.trees.iter().enumerate() {
            tree.validate(self.feature_names.len())
                .map_err(|e| Error::CorruptModel(format!("tree {t}: {e}")))?;
            match root_cover {
                None => root_cover = Some(tree.root_cover()),
                Some(c) if c != tree.root_cover() => {
                    return Err(Error::CorruptModel(format!(
                        "tree {t}: root cover {} differs from {c}",
                        tree.root_cover()
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Features referenced by at least one split.
    pub fn used_features(&self) -> Vec<bool> {
        let mut used = vec![false; self.n_features()];
        for tree in &self.trees {
            for node in tree.nodes() {
                if let NodeKind::Internal { feature, .. } = node.kind {
                    used[feature] = true;
                }
            }
        }
        used
    }

    /// Prediction for one row; the caller guarantees the width.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        self.check_width(rows.n_cols())?;
        Ok(rows.iter_rows().map(|r| self.predict_row(r)).collect())
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<f64>> {
        if ds.feature_names() != self.feature_names.as_slice() {
            return Err(Error::InvalidDataset(
                "dataset features differ from the model's".into(),
            ));
        }
        self.predict(&ds.feature_matrix())
    }

    pub(crate) fn check_width(&self, width: usize) -> Result<()> {
        if width != self.n_features() {
            return Err(Error::Shape {
                expected: self.n_features(),
                got: width,
            });
        }
        Ok(())
    }

    /// Fits the ensemble on every feature of `train`.
    pub fn fit(train: &Dataset, params: &GbdtParams) -> Result<GbdtModel> {
        params.validate()?;
        if train.n_features() == 0 {
            return Err(Error::InvalidDataset("no features to fit on".into()));
        }
        let y = train.target();
        let n = y.len();
        let base_score = y.iter().sum::<f64>() / n as f64;
        let mut model = GbdtModel {
            base_score,
            learning_rate: params.learning_rate,
            feature_names: train.feature_names().to_vec(),
            trees: Vec::new(),
        };
        if y.iter().all(|&v| v == y[0]) {
            return Ok(model);
        }

        let columns = train.columns();
        let presorted: Vec<SortedColumn> = columns
            .iter()
            .map(|col| {
                let mut rows: Vec<u32> = (0..n as u32).collect();
                rows.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                SortedColumn {
                    values: rows.iter().map(|&i| col[i as usize]).collect(),
                    rows,
                }
            })
            .collect();
        let mut builder = TreeBuilder {
            columns,
            presorted: &presorted,
            inv: (0..=n).map(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 }).collect(),
            params,
            slot_of: vec![NO_SLOT; n],
        };
        let row_major = train.feature_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut pred = vec![base_score; n];
        let mut residual = vec![0.0; n];
        let mut in_bag = vec![true; n];
        let bag_size = ((n as f64 * params.subsample).round() as usize).clamp(1, n);

        for _ in 0..params.n_trees {
            for i in 0..n {
                residual[i] = y[i] - pred[i];
            }
            if params.subsample < 1.0 {
                in_bag.iter_mut().for_each(|b| *b = false);
                for i in sample(&mut rng, n, bag_size) {
                    in_bag[i] = true;
                }
            }
            let mut nodes = builder.grow(&residual, &in_bag);
            if nodes.len() == 1 && params.subsample >= 1.0 {
                // nothing left to split; further trees would be identical no-ops
                break;
            }
            if params.subsample < 1.0 {
                for node in nodes.iter_mut() {
                    node.cover = 0;
                }
                let mut tree = Tree { nodes };
                for row in row_major.iter_rows() {
                    let mut id = 0;
                    loop {
                        tree.nodes[id].cover += 1;
                        match tree.nodes[id].kind {
                            NodeKind::Leaf { .. } => break,
                            NodeKind::Internal {
                                feature,
                                threshold,
                                left,
                                right,
                            } => id = if row[feature] < threshold { left } else { right },
                        }
                    }
                }
                nodes = tree.nodes;
            }
            let tree = Tree { nodes };
            for (p, row) in pred.iter_mut().zip(row_major.iter_rows()) {
                *p += params.learning_rate * tree.predict_row(row);
            }
            model.trees.push(tree);
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GbdtModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GbdtModel::from_text(&text)
    }

    /// Line-oriented text form.
    ///
    /// ```text
    /// shapshift-gbdt 1
    /// base_score <f64>
    /// learning_rate <f64>
    /// features <name,name,...>
    /// trees <count>
    /// tree <index> <node count>
    /// <id> internal <feature> <threshold> <left> <right> <cover> -
    /// <id> leaf - - - - <cover> <value>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "shapshift-gbdt 1");
        let _ = writeln!(out, "base_score {}", format_f64(self.base_score));
        let _ = writeln!(out, "learning_rate {}", format_f64(self.learning_rate));
        let _ = writeln!(out, "features {}", self.feature_names.join(","));
        let _ = writeln!(out, "trees {}", self.trees.len());
        for (t, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(out, "tree {t} {}", tree.nodes.len());
            for (id, node) in tree.nodes.iter().enumerate() {
                match node.kind {
                    NodeKind::Internal {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        let _ = writeln!(
                            out,
                            "{id} internal {feature} {} {left} {right} {} -",
                            format_f64(threshold),
                            node.cover
                        );
                    }
                    NodeKind::Leaf { value } => {
                        let _ = writeln!(
                            out,
                            "{id} leaf - - - - {} {}",
                            node.cover,
                            format_f64(value)
                        );
                    }
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<GbdtModel> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .by_ref()
                .find(|(_, l)| !l.is_empty())
                .ok_or_else(|| Error::ModelParse {
                    line: 0,
                    msg: format!("unexpected end of input, expected {what}"),
                })
        };
        fn field<'a>(line: usize, l: &'a str, key: &str) -> Result<&'a str> {
            l.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| Error::ModelParse {
                    line,
                    msg: format!("expected `{key} ...`"),
                })
        }
        fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
            s.parse().map_err(|_| Error::ModelParse {
                line,
                msg: format!("cannot parse {s:?}"),
            })
        }

        let (ln, l) = next("header")?;
        if l != "shapshift-gbdt 1" {
            return Err(Error::ModelParse {
                line: ln,
                msg: "missing `shapshift-gbdt 1` header".into(),
            });
        }
        let (ln, l) = next("base_score")?;
        let base_score: f64 = num(ln, field(ln, l, "base_score")?)?;
        let (ln, l) = next("learning_rate")?;
        let learning_rate: f64 = num(ln, field(ln, l, "learning_rate")?)?;
        let (ln, l) = next("features")?;
        let feature_names: Vec<String> = match l {
            "features" => Vec::new(),
            _ => field(ln, l, "features")?
                .split(',')
                .map(str::to_string)
                .collect(),
        };
        let (ln, l) = next("trees")?;
        let n_trees: usize = num(ln, field(ln, l, "trees")?)?;
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let (ln, l) = next("tree")?;
            let parts: Vec<&str> = field(ln, l, "tree")?.split_whitespace().collect();
            if parts.len() != 2 || num::<usize>(ln, parts[0])? != t {
                return Err(Error::ModelParse {
                    line: ln,
                    msg: format!("expected `tree {t} <count>`"),
                });
            }
            let n_nodes: usize = num(ln, parts[1])?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for id in 0..n_nodes {
                let (ln, l) = next("node")?;
                let p: Vec<&str> = l.split_whitespace().collect();
                if p.len() != 8 || num::<usize>(ln, p[0])? != id {
                    return Err(Error::ModelParse {
                        line: ln,
                        msg: format!("expected 8 fields for node {id}"),
                    });
                }
                let cover: u64 = num(ln, p[6])?;
                let node = match p[1] {
                    "internal" => TreeNode::internal(
                        num(ln, p[2])?,
                        num(ln, p[3])?,
                        num(ln, p[4])?,
                        num(ln, p[5])?,
                        cover,
                    ),
                    "leaf" => TreeNode::leaf(num(ln, p[7])?, cover),
                    other => {
                        return Err(Error::ModelParse {
                            line: ln,
                            msg: format!("unknown node kind {other:?}"),
                        })
                    }
                };
                nodes.push(node);
            }
            trees.push(Tree { nodes });
        }
        if let Some((ln, _)) = next("end").ok() {
            return Err(Error::ModelParse {
                line: ln,
                msg: "trailing content".into(),
            });
        }
        GbdtModel::new(base_score, learning_rate, feature_names, trees)
    }
}

/// All rows sorted by one feature, with the feature values inline.
struct SortedColumn {
    values: Vec<f64>,
    rows: Vec<u32>,
}

const NO_SLOT: u32 = u32::MAX;

/// Grows trees level by level. Every level makes one pass over each presorted
/// column, routing rows to their open node through `slot_of`, so no per-node
/// sorting or partitioning is needed.
struct TreeBuilder<'a> {
    columns: &'a [Vec<f64>],
    presorted: &'a [SortedColumn],
    /// `inv[k] == 1 / k`.
    inv: Vec<f64>,
    params: &'a GbdtParams,
    /// Open-node slot per row for the current level.
    slot_of: Vec<u32>,
}

/// A node still eligible for splitting.
struct Open {
    id: usize,
    sum: f64,
    sum_sq: f64,
    count: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
}

/// Running left-side statistics of one open node during a column scan.
#[derive(Clone, Copy)]
struct ScanState {
    left_sum: f64,
    left_count: usize,
    last: f64,
    sum: f64,
    count: usize,
    parent: f64,
    best_gain: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, residual: &[f64], in_bag: &[bool]) -> Vec<TreeNode> {
        let mut root = Open {
            id: 0,
            sum: 0.0,
            sum_sq: 0.0,
            count: 0,
        };
        for (i, slot) in self.slot_of.iter_mut().enumerate() {
            if in_bag[i] {
                *slot = 0;
                let r = residual[i];
                root.sum += r;
                root.sum_sq += r * r;
                root.count += 1;
            } else {
                *slot = NO_SLOT;
            }
        }
        let mut nodes = vec![TreeNode::leaf(root.sum / root.count as f64, root.count as u64)];
        let mut open = vec![root];

        for _depth in 0..self.params.max_depth {
            let best = self.best_splits(&open, residual);
            if best.iter().all(Option::is_none) {
                break;
            }
            // children of split nodes, two slots per split node
            let mut next: Vec<Open> = Vec::new();
            let mut child_slot = vec![(NO_SLOT, NO_SLOT); open.len()];
            for (s, cand) in best.iter().enumerate() {
                if cand.is_some() {
                    child_slot[s] = (next.len() as u32, next.len() as u32 + 1);
                    for _ in 0..2 {
                        next.push(Open {
                            id: 0,
                            sum: 0.0,
                            sum_sq: 0.0,
                            count: 0,
                        });
                    }
                }
            }
            for (i, slot) in self.slot_of.iter_mut().enumerate() {
                if *slot == NO_SLOT {
                    continue;
                }
                let s = *slot as usize;
                let Some(c) = best[s] else {
                    *slot = NO_SLOT;
                    continue;
                };
                let (l, r) = child_slot[s];
                let t = if self.columns[c.feature][i] < c.threshold { l } else { r };
                *slot = t;
                let ch = &mut next[t as usize];
                let v = residual[i];
                ch.sum += v;
                ch.sum_sq += v * v;
                ch.count += 1;
            }
            for (s, cand) in best.iter().enumerate() {
                let Some(c) = cand else { continue };
                let (l, r) = child_slot[s];
                let mut ids = [0; 2];
                for (k, t) in [l, r].into_iter().enumerate() {
                    let ch = &mut next[t as usize];
                    ch.id = nodes.len();
                    ids[k] = ch.id;
                    nodes.push(TreeNode::leaf(ch.sum / ch.count as f64, ch.count as u64));
                }
                let parent = &open[s];
                nodes[parent.id] =
                    TreeNode::internal(c.feature, c.threshold, ids[0], ids[1], parent.count as u64);
            }
            open = next;
        }
        nodes
    }

    /// Best split per open node; `None` where no split is allowed or gainful.
    fn best_splits(&mut self, open: &[Open], residual: &[f64]) -> Vec<Option<Candidate>> {
        let msl = self.params.min_samples_leaf;
        let inv = &self.inv;
        let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
        // rows of nodes too small to split take no part in the scan
        for slot in self.slot_of.iter_mut() {
            if *slot != NO_SLOT && open[*slot as usize].count < 2 * msl {
                *slot = NO_SLOT;
            }
        }
        let fresh: Vec<ScanState> = open
            .iter()
            .map(|o| ScanState {
                left_sum: 0.0,
                left_count: 0,
                last: f64::NAN,
                sum: o.sum,
                count: o.count,
                parent: o.sum * o.sum * inv[o.count],
                // gains below this are rounding noise on an already-pure node
                best_gain: 1e-12 * o.sum_sq.max(f64::MIN_POSITIVE),
            })
            .collect();
        let mut state = fresh.clone();
        for (feature, col) in self.presorted.iter().enumerate() {
            for (st, f) in state.iter_mut().zip(&fresh) {
                *st = ScanState {
                    best_gain: st.best_gain,
                    ..*f
                };
            }
            for (&v, &i) in col.values.iter().zip(&col.rows) {
                let slot = self.slot_of[i as usize];
                if slot == NO_SLOT {
                    continue;
                }
                let s = slot as usize;
                let st = &mut state[s];
                let n_left = st.left_count;
                if n_left >= msl && st.count - n_left >= msl && v != st.last {
                    let right_sum = st.sum - st.left_sum;
                    let gain = st.left_sum * st.left_sum * inv[n_left]
                        + right_sum * right_sum * inv[st.count - n_left]
                        - st.parent;
                    if gain > st.best_gain {
                        st.best_gain = gain;
                        let a = st.last;
                        let mut threshold = a + (v - a) / 2.0;
                        if threshold <= a {
                            threshold = v;
                        }
                        best[s] = Some(Candidate { feature, threshold });
                    }
                }
                st.left_sum += residual[i as usize];
                st.left_count += 1;
                st.last = v;
            }
        }
        best
    }
}
