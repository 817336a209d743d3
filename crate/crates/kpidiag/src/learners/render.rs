//! Plain-text model renderings: single-line conjunctive rules, stacked
//! decision lists, indented trees, and Bayes count tables.

use super::bayes_net::{BayesNetModel, Cpt};
use super::naive_bayes::{AttrLikelihood, NaiveBayesModel};
use super::rules::{Condition, RuleModel, RuleStyle};
use super::tree::{TreeModel, TreeNode};
use super::{ModelEnvelope, ModelKind, ModelSchema, StructureMode};
use crate::data::fmt_num;

/// Render any trained model as newline-terminated text.
pub fn render_model(envelope: &ModelEnvelope) -> String {
    match &envelope.model {
        ModelKind::Rules(r) => match r.style {
            RuleStyle::Conjunctive => render_conjunctive(r, &envelope.schema),
            RuleStyle::DecisionList => render_decision_list(r, &envelope.schema),
        },
        ModelKind::Tree(t) => render_tree(t, &envelope.schema),
        ModelKind::NaiveBayes(nb) => render_naive_bayes(nb, &envelope.schema),
        ModelKind::BayesNet(bn) => render_bayes_net(bn, &envelope.schema),
    }
}

fn condition_text(cond: &Condition, schema: &ModelSchema) -> String {
    match cond {
        Condition::Le { attr, threshold } => {
            format!("{} <= {}", schema.attributes[*attr].name, fmt_num(*threshold))
        }
        Condition::Gt { attr, threshold } => {
            format!("{} > {}", schema.attributes[*attr].name, fmt_num(*threshold))
        }
        Condition::Eq { attr, value } => {
            let a = &schema.attributes[*attr];
            format!("{} = {}", a.name, a.domain().expect("nominal")[*value])
        }
    }
}

fn count_suffix(covered: f64, misclassified: f64, always_both: bool) -> String {
    if misclassified > 0.0 || always_both {
        format!("({:.1}/{:.1})", covered, misclassified)
    } else {
        format!("({:.1})", covered)
    }
}

/// One rule per line: `(a <= v) and (b > v) => Class=VALUE (covered/miscl)`.
fn render_conjunctive(model: &RuleModel, schema: &ModelSchema) -> String {
    let class_attr = &schema.attributes[schema.class_index].name;
    let class_names = schema.class_names();
    let mut out = String::new();
    for rule in &model.rules {
        let head: Vec<String> = rule
            .conditions
            .iter()
            .map(|c| format!("({})", condition_text(c, schema)))
            .collect();
        if !head.is_empty() {
            out.push_str(&head.join(" and "));
            out.push(' ');
        }
        out.push_str(&format!(
            "=> {class_attr}={} ({:.1}/{:.1})\n",
            class_names[rule.class],
            rule.covered(),
            rule.misclassified()
        ));
    }
    out.push_str(&format!("\nNumber of Rules : {}\n", model.rules.len()));
    out
}

/// Stacked conditions joined by `AND`, then `: CLASS (covered)` on the
/// final line; rules separated by blank lines.
fn render_decision_list(model: &RuleModel, schema: &ModelSchema) -> String {
    let class_names = schema.class_names();
    let mut out = String::new();
    for (i, rule) in model.rules.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (j, cond) in rule.conditions.iter().enumerate() {
            out.push_str(&condition_text(cond, schema));
            if j + 1 < rule.conditions.len() {
                out.push_str(" AND\n");
            }
        }
        out.push_str(&format!(
            ": {} {}\n",
            class_names[rule.class],
            count_suffix(rule.covered(), rule.misclassified(), false)
        ));
    }
    out.push_str(&format!("\nNumber of Rules : {}\n", model.rules.len()));
    out
}

fn render_tree(model: &TreeModel, schema: &ModelSchema) -> String {
    let mut out = String::new();
    match &model.root {
        TreeNode::Leaf { counts } => {
            out.push_str(&leaf_text(counts, schema));
            out.push('\n');
        }
        node => render_node(node, schema, 0, &mut out),
    }
    out.push_str(&format!("\nNumber of Leaves : {}\n", model.num_leaves()));
    out.push_str(&format!("\nSize of the tree : {}\n", model.size()));
    out
}

fn leaf_text(counts: &[f64], schema: &ModelSchema) -> String {
    let class_names = schema.class_names();
    let covered: f64 = counts.iter().sum();
    let best = super::stats::argmax(counts);
    format!(
        "{} {}",
        class_names[best],
        count_suffix(covered, covered - counts[best], true)
    )
}

fn render_node(node: &TreeNode, schema: &ModelSchema, depth: usize, out: &mut String) {
    let TreeNode::Split {
        attr,
        threshold,
        children,
        ..
    } = node
    else {
        return;
    };
    let indent = "|   ".repeat(depth);
    let name = &schema.attributes[*attr].name;
    for (branch, child) in children.iter().enumerate() {
        let test = match threshold {
            Some(t) => {
                if branch == 0 {
                    format!("{name} <= {}", fmt_num(*t))
                } else {
                    format!("{name} > {}", fmt_num(*t))
                }
            }
            None => format!(
                "{name} = {}",
                schema.attributes[*attr].domain().expect("nominal")[branch]
            ),
        };
        match child {
            TreeNode::Leaf { counts } => {
                out.push_str(&format!("{indent}{test}: {}\n", leaf_text(counts, schema)));
            }
            _ => {
                out.push_str(&format!("{indent}{test}\n"));
                render_node(child, schema, depth + 1, out);
            }
        }
    }
}

fn class_header(schema: &ModelSchema, priors: &[f64]) -> String {
    let class_names = schema.class_names();
    let mut line1 = format!("{:<24}", "Attribute");
    let mut line2 = " ".repeat(24);
    for (name, prior) in class_names.iter().zip(priors) {
        line1.push_str(&format!("{name:>10}"));
        line2.push_str(&format!("{:>10}", format!("({prior:.2})")));
    }
    format!("{line1}\n{line2}\n{}\n", "=".repeat(24 + 10 * class_names.len()))
}

fn render_naive_bayes(model: &NaiveBayesModel, schema: &ModelSchema) -> String {
    let mut out = String::from("Naive Bayes Classifier\n\n");
    out.push_str(&class_header(schema, &model.priors));
    for (attr, lik) in model.likelihoods.iter().enumerate() {
        match lik {
            AttrLikelihood::Class => {}
            AttrLikelihood::Nominal { counts } => {
                out.push_str(&format!("{}\n", schema.attributes[attr].name));
                let domain = schema.attributes[attr].domain().expect("nominal");
                for (v, value) in domain.iter().enumerate() {
                    out.push_str(&format!("  {value:<22}"));
                    for class_counts in counts {
                        // Displayed counts are the add-one smoothed ones.
                        out.push_str(&format!("{:>10.1}", class_counts[v] + 1.0));
                    }
                    out.push('\n');
                }
            }
            AttrLikelihood::Gaussian { mean, sd } => {
                out.push_str(&format!("{}\n", schema.attributes[attr].name));
                out.push_str(&format!("  {:<22}", "mean"));
                for m in mean {
                    out.push_str(&format!("{:>10}", fmt_num(*m)));
                }
                out.push('\n');
                out.push_str(&format!("  {:<22}", "std. dev."));
                for s in sd {
                    out.push_str(&format!("{:>10}", fmt_num(*s)));
                }
                out.push('\n');
            }
        }
    }
    out
}

fn bin_labels(cuts: &[f64]) -> Vec<String> {
    if cuts.is_empty() {
        return vec!["(all)".to_string()];
    }
    let mut labels = Vec::with_capacity(cuts.len() + 1);
    labels.push(format!("(-inf, {}]", fmt_num(cuts[0])));
    for w in cuts.windows(2) {
        labels.push(format!("({}, {}]", fmt_num(w[0]), fmt_num(w[1])));
    }
    labels.push(format!("({}, inf)", fmt_num(cuts[cuts.len() - 1])));
    labels
}

fn render_bayes_net(model: &BayesNetModel, schema: &ModelSchema) -> String {
    let structure = match model.structure {
        StructureMode::Naive => "naive",
        StructureMode::Tan => "tan",
    };
    let mut out = format!("Bayes Network Classifier ({structure})\n\n");
    out.push_str(&class_header(schema, &model.priors));
    for (attr, cpt) in model.cpts.iter().enumerate() {
        let name = &schema.attributes[attr].name;
        // Value labels: nominal domain or discretization bins.
        let labels: Vec<String> = match schema.attributes[attr].domain() {
            Some(domain) => domain.to_vec(),
            None => bin_labels(model.cuts[attr].as_deref().unwrap_or(&[])),
        };
        // Marginal class-conditional counts; parent detail collapses.
        let marginal: Option<Vec<Vec<f64>>> = match cpt {
            Cpt::Class => None,
            Cpt::ClassOnly { counts } => Some(counts.clone()),
            Cpt::WithParent { counts, .. } => Some(
                counts
                    .iter()
                    .map(|per_parent| {
                        let mut acc = vec![0.0; labels.len()];
                        for row in per_parent {
                            for (a, v) in acc.iter_mut().zip(row) {
                                *a += v;
                            }
                        }
                        acc
                    })
                    .collect(),
            ),
        };
        let Some(marginal) = marginal else { continue };
        match cpt {
            Cpt::WithParent { parent, .. } => {
                out.push_str(&format!(
                    "{name}  (parent: {})\n",
                    schema.attributes[*parent].name
                ));
            }
            _ => out.push_str(&format!("{name}\n")),
        }
        for (v, label) in labels.iter().enumerate() {
            out.push_str(&format!("  {label:<22}"));
            for class_counts in &marginal {
                out.push_str(&format!("{:>10.1}", class_counts[v] + 1.0));
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Attribute, Dataset, Value};
    use crate::learners::{train, AlgorithmId, TrainParams};

    fn toy() -> Dataset {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("TCHDropRate"),
                Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for i in 0..30 {
            let class = if i < 10 { 0 } else if i < 20 { 1 } else { 2 };
            d.push(vec![Value::Num(i as f64), Value::Nom(class)]).unwrap();
        }
        d
    }

    #[test]
    fn conjunctive_rules_match_the_documented_grammar() {
        let d = toy();
        let env = train(AlgorithmId::JRip, &d, &TrainParams::default()).unwrap();
        let text = render_model(&env);
        let lines: Vec<&str> = text.lines().collect();
        // Every rule line ends with `=> KPIAlarms=CLASS (covered/miscl)`.
        let rule_lines: Vec<&str> = lines
            .iter()
            .copied()
            .filter(|l| l.contains("=>"))
            .collect();
        assert!(!rule_lines.is_empty());
        for line in &rule_lines {
            assert!(
                line.contains("=> KPIAlarms="),
                "bad rule line: {line}"
            );
            assert!(line.trim_end().ends_with(')'), "missing counts: {line}");
        }
        // Default rule: no conditions before `=>`.
        assert!(rule_lines.last().unwrap().trim_start().starts_with("=>"));
        assert!(text.contains(&format!("Number of Rules : {rule_lines_len}", rule_lines_len = rule_lines.len())));
    }

    #[test]
    fn default_only_rule_model_renders_single_line() {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for _ in 0..5 {
            d.push(vec![Value::Num(1.0), Value::Nom(2)]).unwrap();
        }
        let env = train(AlgorithmId::JRip, &d, &TrainParams::default()).unwrap();
        let text = render_model(&env);
        assert!(text.starts_with("=> KPIAlarms=WARN (5.0/0.0)\n"), "{text}");
        assert!(text.contains("Number of Rules : 1"));
    }

    #[test]
    fn decision_list_stacks_conditions() {
        let d = toy();
        let env = train(AlgorithmId::Part, &d, &TrainParams::default()).unwrap();
        let text = render_model(&env);
        assert!(text.contains(": "), "{text}");
        // Last rule is the default `: CLASS (n)` form.
        let last_rule_line = text
            .lines()
            .filter(|l| l.starts_with(": "))
            .last()
            .expect("default rule line");
        assert!(last_rule_line.contains('('));
    }

    #[test]
    fn one_leaf_tree_renders_class_and_counts() {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for _ in 0..4 {
            d.push(vec![Value::Num(0.0), Value::Nom(0)]).unwrap();
        }
        let env = train(AlgorithmId::J48, &d, &TrainParams::default()).unwrap();
        let text = render_model(&env);
        assert!(text.starts_with("NORM (4.0/0.0)\n"), "{text}");
        assert!(text.contains("Number of Leaves : 1"));
        assert!(text.contains("Size of the tree : 1"));
    }

    #[test]
    fn naive_bayes_table_shows_smoothed_counts_and_priors() {
        let d = toy();
        let env = train(AlgorithmId::NaiveBayes, &d, &TrainParams::default()).unwrap();
        let text = render_model(&env);
        assert!(text.starts_with("Naive Bayes Classifier"));
        assert!(text.contains("(0.33)"), "{text}");
        assert!(text.contains("mean"));
        assert!(text.contains("std. dev."));
    }

    #[test]
    fn numeric_constants_render_and_parse_at_six_digits() {
        // Thresholds already on the canonical grid survive the text form.
        use crate::data::canon_num;
        let mut rng = crate::rng::Rng::new(21);
        for _ in 0..200 {
            let v = canon_num(rng.uniform(0.0, 100.0));
            let text = fmt_num(v);
            assert_eq!(text.parse::<f64>().unwrap(), v, "{text}");
        }
    }
}
