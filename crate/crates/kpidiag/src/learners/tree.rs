//! Decision-tree induction in the C4.5 family: gain-ratio splits with
//! midpoint thresholds for numeric attributes, multiway splits for nominal
//! attributes, and pessimistic-error pruning.
//!
//! Instances with a missing split value are sent down every branch with
//! proportional weights during training; prediction follows the heaviest
//! branch.

use serde::{Deserialize, Serialize};

use super::stats::{entropy, pessimistic_errors};
use super::TrainParams;
use crate::data::{AttrKind, Dataset, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        counts: Vec<f64>,
    },
    Split {
        attr: usize,
        /// `Some(t)` splits numeric values into `<= t` / `> t`;
        /// `None` splits a nominal attribute one branch per domain value.
        threshold: Option<f64>,
        counts: Vec<f64>,
        child_weights: Vec<f64>,
        children: Vec<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub root: TreeNode,
}

impl TreeModel {
    pub fn num_leaves(&self) -> usize {
        fn rec(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { children, .. } => children.iter().map(rec).sum(),
            }
        }
        rec(&self.root)
    }

    /// Internal nodes plus leaves.
    pub fn size(&self) -> usize {
        fn rec(n: &TreeNode) -> usize {
            match n {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { children, .. } => 1 + children.iter().map(rec).sum::<usize>(),
            }
        }
        rec(&self.root)
    }

    /// Route an instance to its leaf's training class counts.
    pub fn leaf_counts(&self, values: &[Value]) -> &[f64] {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split {
                    attr,
                    threshold,
                    child_weights,
                    children,
                    ..
                } => {
                    let branch = match (&values[*attr], threshold) {
                        (Value::Num(v), Some(t)) => usize::from(*v > *t),
                        (Value::Nom(i), None) => *i,
                        _ => heaviest(child_weights),
                    };
                    node = &children[branch];
                }
            }
        }
    }
}

fn heaviest(weights: &[f64]) -> usize {
    let mut best = 0;
    for (i, &w) in weights.iter().enumerate().skip(1) {
        if w > weights[best] {
            best = i;
        }
    }
    best
}

/// Row indices into a dataset with fractional weights.
pub(crate) type Rows = Vec<(usize, f64)>;

struct Ctx<'a> {
    dataset: &'a Dataset,
    class_index: usize,
    num_classes: usize,
    min_leaf: f64,
}

struct Candidate {
    attr: usize,
    threshold: Option<f64>,
    gain: f64,
    ratio: f64,
}

pub fn train_tree(dataset: &Dataset, params: &TrainParams) -> Result<TreeModel> {
    let rows: Rows = (0..dataset.len()).map(|r| (r, 1.0)).collect();
    let root = build_pruned(dataset, rows, params)?;
    Ok(TreeModel { root })
}

/// Grow and prune a tree over the given weighted rows. Shared with the
/// decision-list learner, which repeatedly builds trees on residual data.
pub(crate) fn build_pruned(dataset: &Dataset, rows: Rows, params: &TrainParams) -> Result<TreeNode> {
    let class_index = dataset
        .class_index
        .ok_or_else(|| Error::usage("training requires a class attribute"))?;
    if dataset.is_empty() || rows.is_empty() {
        return Err(Error::usage("training requires at least one instance"));
    }
    for &(r, _) in &rows {
        if dataset.instances[r].values[class_index].is_missing() {
            return Err(Error::data(format!("row {} has a missing class value", r + 1)));
        }
    }
    let ctx = Ctx {
        dataset,
        class_index,
        num_classes: dataset.num_classes()?,
        min_leaf: params.min_leaf,
    };
    let mut root = grow(&ctx, rows);
    prune(&mut root, params.confidence);
    Ok(root)
}

fn class_counts(ctx: &Ctx, rows: &Rows) -> Vec<f64> {
    let mut counts = vec![0.0; ctx.num_classes];
    for &(r, w) in rows {
        if let Some(c) = ctx.dataset.instances[r].values[ctx.class_index].as_nom() {
            counts[c] += w;
        }
    }
    counts
}

fn grow(ctx: &Ctx, rows: Rows) -> TreeNode {
    let counts = class_counts(ctx, &rows);
    let total: f64 = counts.iter().sum();
    let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
    if pure || total < 2.0 * ctx.min_leaf {
        return TreeNode::Leaf { counts };
    }

    let candidates = collect_candidates(ctx, &rows, &counts, total);
    let Some(best) = select_candidate(&candidates) else {
        return TreeNode::Leaf { counts };
    };

    let (child_rows, child_weights) = route(ctx, &rows, best.attr, best.threshold);
    // A split that routes everything into one branch cannot make progress.
    if child_weights.iter().filter(|&&w| w > 0.0).count() < 2 {
        return TreeNode::Leaf { counts };
    }
    let children: Vec<TreeNode> = child_rows
        .into_iter()
        .map(|rows| {
            if rows.is_empty() {
                TreeNode::Leaf {
                    counts: vec![0.0; ctx.num_classes],
                }
            } else {
                grow(ctx, rows)
            }
        })
        .collect();
    TreeNode::Split {
        attr: best.attr,
        threshold: best.threshold,
        counts,
        child_weights,
        children,
    }
}

fn collect_candidates(ctx: &Ctx, rows: &Rows, counts: &[f64], total: f64) -> Vec<Candidate> {
    let node_entropy = entropy(counts);
    let mut out = Vec::new();
    for (attr, a) in ctx.dataset.attributes.iter().enumerate() {
        if attr == ctx.class_index {
            continue;
        }
        let cand = match &a.kind {
            AttrKind::Numeric => numeric_candidate(ctx, rows, attr, node_entropy, total),
            AttrKind::Nominal(domain) => {
                nominal_candidate(ctx, rows, attr, domain.len(), node_entropy, total)
            }
        };
        if let Some(c) = cand {
            out.push(c);
        }
    }
    out
}

fn numeric_candidate(
    ctx: &Ctx,
    rows: &Rows,
    attr: usize,
    node_entropy: f64,
    total: f64,
) -> Option<Candidate> {
    let mut known: Vec<(f64, usize, f64)> = Vec::with_capacity(rows.len());
    let mut w_missing = 0.0;
    for &(r, w) in rows {
        match ctx.dataset.instances[r].values[attr] {
            Value::Num(v) => {
                let c = ctx.dataset.instances[r].values[ctx.class_index]
                    .as_nom()
                    .expect("class checked");
                known.push((v, c, w));
            }
            _ => w_missing += w,
        }
    }
    if known.len() < 2 {
        return None;
    }
    known.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let w_known: f64 = known.iter().map(|k| k.2).sum();
    if w_known <= 0.0 {
        return None;
    }
    let mut known_counts = vec![0.0; ctx.num_classes];
    for &(_, c, w) in &known {
        known_counts[c] += w;
    }
    let h_known = entropy(&known_counts);
    let known_fraction = w_known / total;

    let mut left = vec![0.0; ctx.num_classes];
    let mut wl = 0.0;
    let mut best: Option<(f64, f64)> = None; // (gain, threshold)
    for i in 0..known.len() - 1 {
        let (v, c, w) = known[i];
        left[c] += w;
        wl += w;
        let v_next = known[i + 1].0;
        if v_next <= v {
            continue;
        }
        let wr = w_known - wl;
        if wl < ctx.min_leaf || wr < ctx.min_leaf {
            continue;
        }
        let right: Vec<f64> = known_counts.iter().zip(&left).map(|(t, l)| t - l).collect();
        let info = (wl * entropy(&left) + wr * entropy(&right)) / w_known;
        let gain = known_fraction * (h_known - info);
        if best.map_or(true, |(g, _)| gain > g + 1e-12) {
            best = Some((gain, (v + v_next) / 2.0));
        }
    }
    let (gain, threshold) = best?;
    if gain <= 1e-12 {
        return None;
    }
    // Recompute branch weights at the chosen threshold for split info.
    let wl: f64 = known
        .iter()
        .filter(|(v, _, _)| *v <= threshold)
        .map(|k| k.2)
        .sum();
    let split_info = branch_split_info(&[wl, w_known - wl], w_missing, total);
    if split_info <= 1e-12 {
        return None;
    }
    Some(Candidate {
        attr,
        threshold: Some(threshold),
        gain,
        ratio: gain / split_info,
    })
}

fn nominal_candidate(
    ctx: &Ctx,
    rows: &Rows,
    attr: usize,
    domain_len: usize,
    node_entropy: f64,
    total: f64,
) -> Option<Candidate> {
    let mut branch_counts = vec![vec![0.0; ctx.num_classes]; domain_len];
    let mut branch_w = vec![0.0; domain_len];
    let mut w_missing = 0.0;
    for &(r, w) in rows {
        match ctx.dataset.instances[r].values[attr] {
            Value::Nom(v) => {
                let c = ctx.dataset.instances[r].values[ctx.class_index]
                    .as_nom()
                    .expect("class checked");
                branch_counts[v][c] += w;
                branch_w[v] += w;
            }
            _ => w_missing += w,
        }
    }
    let w_known: f64 = branch_w.iter().sum();
    if w_known <= 0.0 {
        return None;
    }
    let populated = branch_w.iter().filter(|&&w| w >= ctx.min_leaf).count();
    if populated < 2 {
        return None;
    }
    let mut known_counts = vec![0.0; ctx.num_classes];
    for bc in &branch_counts {
        for (k, v) in known_counts.iter_mut().zip(bc) {
            *k += v;
        }
    }
    let h_known = entropy(&known_counts);
    let info: f64 = branch_counts
        .iter()
        .zip(&branch_w)
        .map(|(bc, &w)| w * entropy(bc))
        .sum::<f64>()
        / w_known;
    let gain = (w_known / total) * (h_known - info);
    if gain <= 1e-12 {
        return None;
    }
    let split_info = branch_split_info(&branch_w, w_missing, total);
    if split_info <= 1e-12 {
        return None;
    }
    let _ = node_entropy;
    Some(Candidate {
        attr,
        threshold: None,
        gain,
        ratio: gain / split_info,
    })
}

/// Split information over the branch weights, counting instances with a
/// missing split value as one extra branch.
fn branch_split_info(branch_w: &[f64], w_missing: f64, total: f64) -> f64 {
    let mut info = 0.0;
    for &w in branch_w.iter().chain(std::iter::once(&w_missing)) {
        if w > 0.0 {
            let p = w / total;
            info -= p * p.log2();
        }
    }
    info
}

/// Keep candidates whose gain reaches the average gain, then maximize the
/// gain ratio; ties go to the lowest attribute index.
fn select_candidate(candidates: &[Candidate]) -> Option<&Candidate> {
    if candidates.is_empty() {
        return None;
    }
    let avg_gain: f64 = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
    candidates
        .iter()
        .filter(|c| c.gain >= avg_gain - 1e-12)
        .fold(None, |best: Option<&Candidate>, c| match best {
            None => Some(c),
            Some(b) if c.ratio > b.ratio + 1e-12 => Some(c),
            Some(b) => Some(b),
        })
}

fn route(ctx: &Ctx, rows: &Rows, attr: usize, threshold: Option<f64>) -> (Vec<Rows>, Vec<f64>) {
    let branches = match threshold {
        Some(_) => 2,
        None => match &ctx.dataset.attributes[attr].kind {
            AttrKind::Nominal(d) => d.len(),
            AttrKind::Numeric => unreachable!("nominal split on numeric attribute"),
        },
    };
    let mut child_rows: Vec<Rows> = vec![Vec::new(); branches];
    let mut child_weights = vec![0.0; branches];
    let mut missing: Rows = Vec::new();
    for &(r, w) in rows {
        let branch = match (&ctx.dataset.instances[r].values[attr], threshold) {
            (Value::Num(v), Some(t)) => Some(usize::from(*v > t)),
            (Value::Nom(i), None) => Some(*i),
            _ => None,
        };
        match branch {
            Some(b) => {
                child_rows[b].push((r, w));
                child_weights[b] += w;
            }
            None => missing.push((r, w)),
        }
    }
    let w_known: f64 = child_weights.iter().sum();
    if w_known > 0.0 {
        for &(r, w) in &missing {
            for b in 0..branches {
                let share = child_weights[b] / w_known;
                if share > 0.0 {
                    child_rows[b].push((r, w * share));
                }
            }
        }
        let missing_w: f64 = missing.iter().map(|m| m.1).sum();
        for b in 0..branches {
            child_weights[b] += missing_w * child_weights[b] / w_known;
        }
    }
    (child_rows, child_weights)
}

/// Estimated error count of a subtree under the pessimistic bound.
fn estimated_errors(node: &TreeNode, confidence: f64) -> f64 {
    match node {
        TreeNode::Leaf { counts } => leaf_errors(counts, confidence),
        TreeNode::Split { children, .. } => children
            .iter()
            .map(|c| estimated_errors(c, confidence))
            .sum(),
    }
}

fn leaf_errors(counts: &[f64], confidence: f64) -> f64 {
    let total: f64 = counts.iter().sum();
    let max = counts.iter().cloned().fold(0.0, f64::max);
    pessimistic_errors(total, total - max, confidence)
}

/// Bottom-up subtree replacement: collapse a split whenever the leaf
/// estimate does not exceed the subtree estimate.
fn prune(node: &mut TreeNode, confidence: f64) {
    if let TreeNode::Split { children, counts, .. } = node {
        for child in children.iter_mut() {
            prune(child, confidence);
        }
        let subtree = children
            .iter()
            .map(|c| estimated_errors(c, confidence))
            .sum::<f64>();
        let as_leaf = leaf_errors(counts, confidence);
        if as_leaf <= subtree + 1e-9 {
            *node = TreeNode::Leaf {
                counts: counts.clone(),
            };
        }
    }
}

/// Training-set pessimistic error of the whole tree; exposed for tests.
pub fn tree_estimated_errors(model: &TreeModel, confidence: f64) -> f64 {
    estimated_errors(&model.root, confidence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Attribute;

    fn dataset(rows: &[(f64, &str)]) -> Dataset {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", vec!["A", "B", "C"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for &(x, c) in rows {
            let ci = d.attributes[1]
                .domain()
                .unwrap()
                .iter()
                .position(|v| v == c)
                .unwrap();
            d.push(vec![Value::Num(x), Value::Nom(ci)]).unwrap();
        }
        d
    }

    #[test]
    fn pure_dataset_is_a_single_leaf() {
        let d = dataset(&[(1.0, "A"), (2.0, "A"), (3.0, "A")]);
        let m = train_tree(&d, &TrainParams::default()).unwrap();
        assert_eq!(m.size(), 1);
        assert_eq!(m.num_leaves(), 1);
        match &m.root {
            TreeNode::Leaf { counts } => assert_eq!(counts, &vec![3.0, 0.0, 0.0]),
            _ => panic!("expected leaf"),
        }
    }

    #[test]
    fn two_instances_split_at_midpoint() {
        let d = dataset(&[(1.0, "A"), (3.0, "B")]);
        let params = TrainParams {
            min_leaf: 1.0,
            ..TrainParams::default()
        };
        let m = train_tree(&d, &params).unwrap();
        match &m.root {
            TreeNode::Split { attr, threshold, .. } => {
                assert_eq!(*attr, 0);
                assert_eq!(*threshold, Some(2.0));
            }
            TreeNode::Leaf { .. } => panic!("expected a split"),
        }
    }

    #[test]
    fn separable_data_classified_exactly() {
        let rows: Vec<(f64, &str)> = (0..40)
            .map(|i| {
                let x = i as f64;
                (x, if x < 20.0 { "A" } else { "B" })
            })
            .collect();
        let d = dataset(&rows);
        let m = train_tree(&d, &TrainParams::default()).unwrap();
        for (i, inst) in d.instances.iter().enumerate() {
            let counts = m.leaf_counts(&inst.values);
            let pred = super::super::stats::argmax(&super::super::stats::laplace(counts));
            assert_eq!(Some(pred), d.class_of(i));
        }
    }

    #[test]
    fn never_splits_on_a_constant_attribute() {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("const"),
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", vec!["A", "B"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for i in 0..20 {
            let c = usize::from(i >= 10);
            d.push(vec![Value::Num(5.0), Value::Num(i as f64), Value::Nom(c)])
                .unwrap();
        }
        let m = train_tree(&d, &TrainParams::default()).unwrap();
        fn assert_no_const(n: &TreeNode) {
            if let TreeNode::Split { attr, children, .. } = n {
                assert_ne!(*attr, 0, "split on constant attribute");
                children.iter().for_each(assert_no_const);
            }
        }
        assert_no_const(&m.root);
    }

    #[test]
    fn pruning_never_raises_training_estimate() {
        // Noisy data: build unpruned vs pruned and compare estimates.
        let mut rows = Vec::new();
        let mut rng = crate::rng::Rng::new(11);
        for i in 0..120 {
            let x = i as f64;
            let label = if rng.next_f64() < 0.15 {
                "B"
            } else if x < 60.0 {
                "A"
            } else {
                "B"
            };
            rows.push((x, label));
        }
        let d = dataset(&rows);
        let params = TrainParams::default();
        let class_index = d.class_index.unwrap();
        let ctx = Ctx {
            dataset: &d,
            class_index,
            num_classes: 3,
            min_leaf: params.min_leaf,
        };
        let all: Rows = (0..d.len()).map(|r| (r, 1.0)).collect();
        let unpruned = grow(&ctx, all);
        let before = estimated_errors(&unpruned, params.confidence);
        let mut pruned = unpruned;
        prune(&mut pruned, params.confidence);
        let after = estimated_errors(&pruned, params.confidence);
        assert!(after <= before + 1e-9, "{after} > {before}");
    }

    #[test]
    fn missing_values_follow_the_heaviest_branch() {
        let d = dataset(&[(1.0, "A"), (1.5, "A"), (2.0, "A"), (9.0, "B"), (9.5, "B")]);
        let params = TrainParams {
            min_leaf: 1.0,
            ..TrainParams::default()
        };
        let m = train_tree(&d, &params).unwrap();
        let counts = m.leaf_counts(&[Value::Missing, Value::Missing]);
        // Majority branch is the A side (3 instances vs 2).
        assert!(counts[0] > counts[1]);
    }

    #[test]
    fn empty_dataset_is_a_usage_error() {
        let d = dataset(&[]);
        assert_eq!(
            train_tree(&d, &TrainParams::default()).unwrap_err().exit_code(),
            1
        );
    }

    #[test]
    fn missing_class_is_a_data_error() {
        let mut d = dataset(&[(1.0, "A")]);
        d.instances[0].values[1] = Value::Missing;
        assert_eq!(
            train_tree(&d, &TrainParams::default()).unwrap_err().exit_code(),
            2
        );
    }
}
