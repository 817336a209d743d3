//! Decision-list induction by repeated tree building: train a pruned tree
//! on the remaining instances, turn the leaf covering the most training
//! weight into a rule, drop what it covers, and repeat until nothing
//! remains. A default rule closes the list.

use super::rules::{Condition, Rule, RuleModel, RuleStyle};
use super::tree::{build_pruned, TreeNode};
use super::TrainParams;
use crate::data::{AttrKind, Dataset};
use crate::error::{Error, Result};

pub fn train_part(dataset: &Dataset, params: &TrainParams) -> Result<RuleModel> {
    let class_index = dataset
        .class_index
        .ok_or_else(|| Error::usage("training requires a class attribute"))?;
    if dataset.is_empty() {
        return Err(Error::usage("training requires at least one instance"));
    }
    let num_classes = dataset.num_classes()?;

    let mut remaining: Vec<usize> = (0..dataset.len()).collect();
    let mut rules: Vec<Rule> = Vec::new();

    while !remaining.is_empty() {
        let rows = remaining.iter().map(|&r| (r, 1.0)).collect();
        let tree = build_pruned(dataset, rows, params)?;
        let (conditions, counts) = best_leaf(&tree, dataset);
        let class = argmax_count(&counts);
        let rule = Rule {
            conditions,
            class,
            counts: vec![0.0; num_classes],
        };
        let covered: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&r| rule.matches(&dataset.instances[r].values))
            .collect();
        if covered.is_empty() {
            // Missing values can make a leaf's path unmatched as a rule;
            // close the list with a default over the residue.
            break;
        }
        remaining.retain(|r| !covered.contains(r));
        rules.push(rule);
    }

    if rules.last().map_or(true, |r| !r.is_default()) {
        let default_class = majority_class(dataset, &remaining, num_classes);
        rules.push(Rule {
            conditions: Vec::new(),
            class: default_class,
            counts: vec![0.0; num_classes],
        });
    }

    let mut model = RuleModel {
        rules,
        style: RuleStyle::DecisionList,
    };
    model.refresh_counts(dataset);
    Ok(model)
}

fn majority_class(dataset: &Dataset, residue: &[usize], num_classes: usize) -> usize {
    let rows: Vec<usize> = if residue.is_empty() {
        (0..dataset.len()).collect()
    } else {
        residue.to_vec()
    };
    let mut counts = vec![0usize; num_classes];
    for &r in &rows {
        if let Some(c) = dataset.class_of(r) {
            counts[c] += 1;
        }
    }
    argmax_count(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
}

fn argmax_count(counts: &[f64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Path conditions and class counts of the leaf holding the most weight.
fn best_leaf(tree: &TreeNode, dataset: &Dataset) -> (Vec<Condition>, Vec<f64>) {
    let mut best: Option<(f64, Vec<Condition>, Vec<f64>)> = None;
    let mut path: Vec<Condition> = Vec::new();
    walk(tree, dataset, &mut path, &mut best);
    let (_, conditions, counts) = best.expect("tree has at least one leaf");
    (conditions, counts)
}

fn walk(
    node: &TreeNode,
    dataset: &Dataset,
    path: &mut Vec<Condition>,
    best: &mut Option<(f64, Vec<Condition>, Vec<f64>)>,
) {
    match node {
        TreeNode::Leaf { counts } => {
            let weight: f64 = counts.iter().sum();
            if best.as_ref().map_or(true, |(w, _, _)| weight > *w + 1e-12) {
                *best = Some((weight, path.clone(), counts.clone()));
            }
        }
        TreeNode::Split {
            attr,
            threshold,
            children,
            ..
        } => {
            for (branch, child) in children.iter().enumerate() {
                let cond = match threshold {
                    Some(t) => {
                        if branch == 0 {
                            Condition::Le { attr: *attr, threshold: *t }
                        } else {
                            Condition::Gt { attr: *attr, threshold: *t }
                        }
                    }
                    None => {
                        debug_assert!(matches!(
                            dataset.attributes[*attr].kind,
                            AttrKind::Nominal(_)
                        ));
                        Condition::Eq { attr: *attr, value: branch }
                    }
                };
                path.push(cond);
                walk(child, dataset, path, best);
                path.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Attribute, Value};

    fn dataset(rows: &[(f64, &str)], classes: &[&str]) -> Dataset {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", classes.to_vec()),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for &(x, c) in rows {
            let ci = classes.iter().position(|v| *v == c).unwrap();
            d.push(vec![Value::Num(x), Value::Nom(ci)]).unwrap();
        }
        d
    }

    #[test]
    fn pure_dataset_is_a_single_default_rule() {
        let rows: Vec<(f64, &str)> = (0..6).map(|i| (i as f64, "A")).collect();
        let d = dataset(&rows, &["A", "B"]);
        let m = train_part(&d, &TrainParams::default()).unwrap();
        assert_eq!(m.rules.len(), 1);
        assert!(m.rules[0].is_default());
        assert_eq!(m.rules[0].class, 0);
        assert_eq!(m.rules[0].covered(), 6.0);
    }

    #[test]
    fn single_threshold_concept_gives_one_condition_first_rule() {
        let rows: Vec<(f64, &str)> = (0..40)
            .map(|i| (i as f64, if i < 25 { "A" } else { "B" }))
            .collect();
        let d = dataset(&rows, &["A", "B"]);
        let m = train_part(&d, &TrainParams::default()).unwrap();
        assert_eq!(m.rules[0].conditions.len(), 1);
        assert!(m.rules.last().unwrap().is_default());
        for (i, inst) in d.instances.iter().enumerate() {
            let idx = m.first_match(&inst.values);
            assert_eq!(Some(m.rules[idx].class), d.class_of(i));
        }
    }

    #[test]
    fn list_ends_with_default_and_covers_everything() {
        let rows: Vec<(f64, &str)> = (0..90)
            .map(|i| {
                let x = i as f64;
                (x, if x < 30.0 { "A" } else if x < 60.0 { "B" } else { "C" })
            })
            .collect();
        let d = dataset(&rows, &["A", "B", "C"]);
        let m = train_part(&d, &TrainParams::default()).unwrap();
        assert!(m.rules.last().unwrap().is_default());
        let covered: f64 = m.rules.iter().map(|r| r.covered()).sum();
        assert_eq!(covered, 90.0);
    }
}
