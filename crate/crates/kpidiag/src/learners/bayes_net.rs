//! Bayes-network classifier over MDL-discretized attributes. Structure is
//! either naive (class is every attribute's only parent) or TAN (each
//! attribute additionally gets one attribute parent, chosen by a maximum
//! spanning tree over class-conditional mutual information). Conditional
//! probability tables use add-one smoothing.

use serde::{Deserialize, Serialize};

use super::discretize::{bin_of, mdl_cuts};
use super::naive_bayes::normalize_log;
use super::{StructureMode, TrainParams};
use crate::data::{AttrKind, Dataset, Value};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cpt {
    /// The class attribute.
    Class,
    /// Raw counts `[class][value]`; prediction smooths with +1.
    ClassOnly { counts: Vec<Vec<f64>> },
    /// Raw counts `[class][parent value][value]`.
    WithParent { parent: usize, counts: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNetModel {
    pub structure: StructureMode,
    /// Discretization cut points per attribute (`None` for nominal ones
    /// and the class).
    pub cuts: Vec<Option<Vec<f64>>>,
    /// Raw class counts and smoothed priors.
    pub class_counts: Vec<f64>,
    pub priors: Vec<f64>,
    pub cpts: Vec<Cpt>,
}

impl BayesNetModel {
    /// Discretized value of one cell.
    pub fn bin(&self, attr: usize, value: &Value) -> Option<usize> {
        match value {
            Value::Missing => None,
            Value::Nom(i) => Some(*i),
            Value::Num(v) => Some(bin_of(self.cuts[attr].as_ref()?, *v)),
        }
    }

    /// Cardinality of an attribute after discretization.
    pub fn cardinality(&self, attr: usize, dataset_kind: &AttrKind) -> usize {
        match dataset_kind {
            AttrKind::Nominal(d) => d.len(),
            AttrKind::Numeric => self.cuts[attr].as_ref().map_or(1, |c| c.len() + 1),
        }
    }
}

pub fn train_bayes_net(dataset: &Dataset, params: &TrainParams) -> Result<BayesNetModel> {
    let class_index = dataset
        .class_index
        .ok_or_else(|| Error::usage("training requires a class attribute"))?;
    if dataset.is_empty() {
        return Err(Error::usage("training requires at least one instance"));
    }
    let k = dataset.num_classes()?;
    let num_attrs = dataset.attributes.len();

    let mut class_counts = vec![0.0f64; k];
    for (row, inst) in dataset.instances.iter().enumerate() {
        match inst.values[class_index].as_nom() {
            Some(c) => class_counts[c] += 1.0,
            None => {
                return Err(Error::data(format!("row {} has a missing class value", row + 1)));
            }
        }
    }
    let n: f64 = class_counts.iter().sum();
    let priors: Vec<f64> = class_counts.iter().map(|&c| (c + 1.0) / (n + k as f64)).collect();

    // Discretize numeric attributes.
    let mut cuts: Vec<Option<Vec<f64>>> = vec![None; num_attrs];
    for (attr, a) in dataset.attributes.iter().enumerate() {
        if attr == class_index || a.is_nominal() {
            continue;
        }
        let pairs: Vec<(f64, usize)> = dataset
            .instances
            .iter()
            .filter_map(|inst| {
                match (inst.values[attr].as_num(), inst.values[class_index].as_nom()) {
                    (Some(v), Some(c)) => Some((v, c)),
                    _ => None,
                }
            })
            .collect();
        cuts[attr] = Some(mdl_cuts(&pairs, k));
    }

    // Pre-compute every row's discretized view.
    let card: Vec<usize> = (0..num_attrs)
        .map(|attr| match &dataset.attributes[attr].kind {
            AttrKind::Nominal(d) => d.len(),
            AttrKind::Numeric => cuts[attr].as_ref().map_or(1, |c| c.len() + 1),
        })
        .collect();
    let binned: Vec<Vec<Option<usize>>> = dataset
        .instances
        .iter()
        .map(|inst| {
            (0..num_attrs)
                .map(|attr| match &inst.values[attr] {
                    Value::Missing => None,
                    Value::Nom(i) => Some(*i),
                    Value::Num(v) => cuts[attr].as_ref().map(|c| bin_of(c, *v)),
                })
                .collect()
        })
        .collect();
    let classes: Vec<usize> = dataset
        .instances
        .iter()
        .map(|inst| inst.values[class_index].as_nom().expect("checked"))
        .collect();

    let parents = match params.structure {
        StructureMode::Naive => vec![None; num_attrs],
        StructureMode::Tan => tan_parents(&binned, &classes, &card, class_index, k),
    };

    let mut cpts = Vec::with_capacity(num_attrs);
    for attr in 0..num_attrs {
        if attr == class_index {
            cpts.push(Cpt::Class);
            continue;
        }
        match parents[attr] {
            None => {
                let mut counts = vec![vec![0.0; card[attr]]; k];
                for (row, bins) in binned.iter().enumerate() {
                    if let Some(v) = bins[attr] {
                        counts[classes[row]][v] += 1.0;
                    }
                }
                cpts.push(Cpt::ClassOnly { counts });
            }
            Some(parent) => {
                let mut counts = vec![vec![vec![0.0; card[attr]]; card[parent]]; k];
                for (row, bins) in binned.iter().enumerate() {
                    if let (Some(v), Some(u)) = (bins[attr], bins[parent]) {
                        counts[classes[row]][u][v] += 1.0;
                    }
                }
                cpts.push(Cpt::WithParent { parent, counts });
            }
        }
    }

    Ok(BayesNetModel {
        structure: params.structure,
        cuts,
        class_counts,
        priors,
        cpts,
    })
}

/// Class-conditional mutual information between two discretized attributes.
fn conditional_mi(
    binned: &[Vec<Option<usize>>],
    classes: &[usize],
    i: usize,
    j: usize,
    card_i: usize,
    card_j: usize,
    k: usize,
) -> f64 {
    let mut joint = vec![vec![vec![0.0f64; card_j]; card_i]; k];
    let mut total = 0.0;
    for (row, bins) in binned.iter().enumerate() {
        if let (Some(vi), Some(vj)) = (bins[i], bins[j]) {
            joint[classes[row]][vi][vj] += 1.0;
            total += 1.0;
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for c in 0..k {
        let n_c: f64 = joint[c].iter().flatten().sum();
        if n_c == 0.0 {
            continue;
        }
        let mut row_sum = vec![0.0f64; card_i];
        let mut col_sum = vec![0.0f64; card_j];
        for vi in 0..card_i {
            for vj in 0..card_j {
                row_sum[vi] += joint[c][vi][vj];
                col_sum[vj] += joint[c][vi][vj];
            }
        }
        for vi in 0..card_i {
            for vj in 0..card_j {
                let n = joint[c][vi][vj];
                if n > 0.0 {
                    mi += (n / total) * ((n * n_c) / (row_sum[vi] * col_sum[vj])).log2();
                }
            }
        }
    }
    mi
}

/// Maximum spanning tree over pairwise conditional mutual information,
/// rooted at the first attribute; edges point away from the root and ties
/// break toward lower attribute indices.
fn tan_parents(
    binned: &[Vec<Option<usize>>],
    classes: &[usize],
    card: &[usize],
    class_index: usize,
    k: usize,
) -> Vec<Option<usize>> {
    let attrs: Vec<usize> = (0..card.len()).filter(|&a| a != class_index).collect();
    let mut parents = vec![None; card.len()];
    if attrs.len() < 2 {
        return parents;
    }
    let mut weight = vec![vec![0.0f64; card.len()]; card.len()];
    for (ai, &i) in attrs.iter().enumerate() {
        for &j in &attrs[ai + 1..] {
            let w = conditional_mi(binned, classes, i, j, card[i], card[j], k);
            weight[i][j] = w;
            weight[j][i] = w;
        }
    }
    let root = attrs[0];
    let mut in_tree = vec![false; card.len()];
    in_tree[root] = true;
    for _ in 1..attrs.len() {
        let mut best: Option<(f64, usize, usize)> = None; // (w, child, parent)
        for &v in &attrs {
            if in_tree[v] {
                continue;
            }
            for &u in &attrs {
                if !in_tree[u] {
                    continue;
                }
                let w = weight[u][v];
                if best.map_or(true, |(bw, _, _)| w > bw + 1e-12) {
                    best = Some((w, v, u));
                }
            }
        }
        let (_, child, parent) = best.expect("graph is connected");
        parents[child] = Some(parent);
        in_tree[child] = true;
    }
    parents
}

/// Log-space posterior; attributes with a missing value (or missing
/// parent value) are skipped.
pub fn log_posterior(model: &BayesNetModel, values: &[Value]) -> Vec<f64> {
    let k = model.priors.len();
    let mut log_p: Vec<f64> = model.priors.iter().map(|p| p.ln()).collect();
    for (attr, cpt) in model.cpts.iter().enumerate() {
        match cpt {
            Cpt::Class => {}
            Cpt::ClassOnly { counts } => {
                if let Some(v) = model.bin(attr, &values[attr]) {
                    for c in 0..k {
                        let row = &counts[c];
                        let total: f64 = row.iter().sum();
                        let p = (row[v] + 1.0) / (total + row.len() as f64);
                        log_p[c] += p.ln();
                    }
                }
            }
            Cpt::WithParent { parent, counts } => {
                if let (Some(v), Some(u)) = (
                    model.bin(attr, &values[attr]),
                    model.bin(*parent, &values[*parent]),
                ) {
                    for c in 0..k {
                        let row = &counts[c][u];
                        let total: f64 = row.iter().sum();
                        let p = (row[v] + 1.0) / (total + row.len() as f64);
                        log_p[c] += p.ln();
                    }
                }
            }
        }
    }
    log_p
}

pub fn posterior(model: &BayesNetModel, values: &[Value]) -> Vec<f64> {
    normalize_log(&log_posterior(model, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Attribute;
    use crate::rng::Rng;

    fn independent_dataset(n: usize, seed: u64) -> Dataset {
        // Attributes independent given the class: each attribute is a
        // noisy copy of the class plus independent noise.
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("a"),
                Attribute::numeric("b"),
                Attribute::numeric("c"),
                Attribute::nominal("KPIAlarms", vec!["X", "Y"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        let mut rng = Rng::new(seed);
        for _ in 0..n {
            let class = (rng.next_u64() % 2) as usize;
            let base = class as f64 * 4.0;
            d.push(vec![
                Value::Num(base + rng.uniform(0.0, 3.0)),
                Value::Num(base + rng.uniform(0.0, 3.0)),
                Value::Num(base + rng.uniform(0.0, 3.0)),
                Value::Nom(class),
            ])
            .unwrap();
        }
        d
    }

    #[test]
    fn cpt_rows_sum_to_one() {
        let d = independent_dataset(300, 1);
        let m = train_bayes_net(&d, &TrainParams::default()).unwrap();
        for (attr, cpt) in m.cpts.iter().enumerate() {
            match cpt {
                Cpt::Class => {}
                Cpt::ClassOnly { counts } => {
                    for row in counts {
                        let total: f64 = row.iter().sum();
                        let sum: f64 = row
                            .iter()
                            .map(|&c| (c + 1.0) / (total + row.len() as f64))
                            .sum();
                        assert!((sum - 1.0).abs() < 1e-9, "attr {attr}");
                    }
                }
                Cpt::WithParent { counts, .. } => {
                    for per_parent in counts {
                        for row in per_parent {
                            let total: f64 = row.iter().sum();
                            let sum: f64 = row
                                .iter()
                                .map(|&c| (c + 1.0) / (total + row.len() as f64))
                                .sum();
                            assert!((sum - 1.0).abs() < 1e-9, "attr {attr}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tan_has_exactly_one_parent_per_non_root_attribute() {
        let d = independent_dataset(200, 2);
        let m = train_bayes_net(&d, &TrainParams::default()).unwrap();
        let class_index = d.class_index.unwrap();
        let parent_edges = m
            .cpts
            .iter()
            .filter(|c| matches!(c, Cpt::WithParent { .. }))
            .count();
        let num_attrs = d.attributes.len() - 1;
        assert_eq!(parent_edges, num_attrs - 1);
        // Walking up from any attribute must terminate at the root.
        for attr in 0..d.attributes.len() {
            if attr == class_index {
                continue;
            }
            let mut cur = attr;
            let mut steps = 0;
            while let Cpt::WithParent { parent, .. } = &m.cpts[cur] {
                cur = *parent;
                steps += 1;
                assert!(steps <= num_attrs, "cycle through attribute {attr}");
            }
        }
    }

    #[test]
    fn independent_attributes_make_tan_close_to_naive() {
        let d = independent_dataset(800, 3);
        let tan = train_bayes_net(&d, &TrainParams::default()).unwrap();
        let naive = train_bayes_net(
            &d,
            &TrainParams {
                structure: StructureMode::Naive,
                ..TrainParams::default()
            },
        )
        .unwrap();
        let mut agree = 0;
        for inst in &d.instances {
            let pt = posterior(&tan, &inst.values);
            let pn = posterior(&naive, &inst.values);
            let at = super::super::stats::argmax(&pt);
            let an = super::super::stats::argmax(&pn);
            if at == an {
                agree += 1;
            }
        }
        let rate = agree as f64 / d.len() as f64;
        assert!(rate > 0.95, "agreement {rate}");
    }

    #[test]
    fn constant_attribute_contributes_nothing() {
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
        for i in 0..40 {
            d.push(vec![
                Value::Num(3.0),
                Value::Num(i as f64),
                Value::Nom(usize::from(i >= 20)),
            ])
            .unwrap();
        }
        let params = TrainParams {
            structure: StructureMode::Naive,
            ..TrainParams::default()
        };
        let m = train_bayes_net(&d, &params).unwrap();
        assert_eq!(m.cuts[0], Some(vec![]));
        let with = posterior(&m, &[Value::Num(3.0), Value::Num(5.0), Value::Missing]);
        let without = posterior(&m, &[Value::Missing, Value::Num(5.0), Value::Missing]);
        for (a, b) in with.iter().zip(&without) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn posteriors_sum_to_one() {
        let d = independent_dataset(100, 4);
        let m = train_bayes_net(&d, &TrainParams::default()).unwrap();
        for inst in &d.instances {
            let p = posterior(&m, &inst.values);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
