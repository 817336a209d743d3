//! Bayesian fault localization: smoothed class-conditional count tables
//! over nominal attributes (day, base station controller), per-value
//! posteriors, a ranking of locations by fault probability, and
//! rule-based explanations of what separates a faulty cell from a normal
//! classification.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Value};
use crate::error::{Error, Result};
use crate::learners::{Condition, ModelEnvelope, ModelKind, RuleModel};

/// Class name treated as the healthy state for fault scoring.
pub const NORMAL_CLASS: &str = "NORM";

/// Add-one-smoothed counts of one nominal attribute against the class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub attribute: String,
    pub values: Vec<String>,
    /// `counts[value][class]`, already smoothed (raw + 1).
    pub counts: Vec<Vec<f64>>,
}

impl CountTable {
    /// Total smoothed count for one class across all values.
    pub fn class_total(&self, class: usize) -> f64 {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

/// One ranked location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationScore {
    pub attribute: String,
    pub value: String,
    pub fault_posterior: f64,
}

/// Per-value posterior distributions for one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributePosteriors {
    pub attribute: String,
    pub values: Vec<String>,
    pub posteriors: Vec<Vec<f64>>,
}

/// The full localization report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub dataset_id: String,
    pub instances: usize,
    pub class_names: Vec<String>,
    /// Laplace-smoothed class priors.
    pub priors: Vec<f64>,
    pub tables: Vec<CountTable>,
    pub posteriors: Vec<AttributePosteriors>,
    pub ranking: Vec<LocationScore>,
}

/// Smoothed value-by-class count table for a nominal attribute.
pub fn build_count_table(dataset: &Dataset, attribute: &str) -> Result<CountTable> {
    let attr = dataset
        .attr_index(attribute)
        .ok_or_else(|| Error::usage(format!("attribute `{attribute}` is not in the dataset")))?;
    let domain = dataset.attributes[attr]
        .domain()
        .ok_or_else(|| {
            Error::usage(format!(
                "attribute `{attribute}` is numeric; discretize it before localization"
            ))
        })?
        .to_vec();
    let k = dataset.num_classes()?;
    let mut counts = vec![vec![1.0f64; k]; domain.len()];
    for row in 0..dataset.len() {
        if let (Value::Nom(v), Some(c)) = (dataset.instances[row].values[attr], dataset.class_of(row))
        {
            counts[v][c] += 1.0;
        }
    }
    Ok(CountTable {
        attribute: attribute.to_string(),
        values: domain,
        counts,
    })
}

/// Laplace-smoothed class priors of a dataset.
pub fn smoothed_priors(dataset: &Dataset) -> Result<Vec<f64>> {
    let counts = dataset.class_counts()?;
    let n: usize = counts.iter().sum();
    let k = counts.len();
    Ok(counts
        .iter()
        .map(|&c| (c as f64 + 1.0) / (n as f64 + k as f64))
        .collect())
}

/// Posterior over classes for one value: `p(c|v) ∝ prior(c) * p(v|c)`.
pub fn location_posterior(table: &CountTable, priors: &[f64], value: &str) -> Result<Vec<f64>> {
    let v = table
        .values
        .iter()
        .position(|x| x == value)
        .ok_or_else(|| {
            Error::usage(format!(
                "value `{value}` is not in the domain of `{}`",
                table.attribute
            ))
        })?;
    let k = priors.len();
    let mut post: Vec<f64> = (0..k)
        .map(|c| priors[c] * table.counts[v][c] / table.class_total(c))
        .collect();
    let total: f64 = post.iter().sum();
    for p in post.iter_mut() {
        *p /= total;
    }
    Ok(post)
}

/// Rank all values of the given nominal attributes by fault posterior
/// (one minus the posterior of the NORM class), descending; ties keep
/// domain order.
pub fn rank_locations(dataset: &Dataset, attributes: &[String]) -> Result<Vec<LocationScore>> {
    let class_names = dataset.class_domain()?.to_vec();
    let norm = class_names
        .iter()
        .position(|c| c == NORMAL_CLASS)
        .ok_or_else(|| {
            Error::usage(format!(
                "fault ranking requires a `{NORMAL_CLASS}` class in the domain"
            ))
        })?;
    let priors = smoothed_priors(dataset)?;
    let mut scores = Vec::new();
    for name in attributes {
        let table = build_count_table(dataset, name)?;
        for value in &table.values {
            let post = location_posterior(&table, &priors, value)?;
            scores.push(LocationScore {
                attribute: name.clone(),
                value: value.clone(),
                fault_posterior: 1.0 - post[norm],
            });
        }
    }
    // Stable sort keeps domain order among ties.
    scores.sort_by(|a, b| b.fault_posterior.partial_cmp(&a.fault_posterior).unwrap());
    Ok(scores)
}

/// Assemble the full report for the given attributes.
pub fn localization_report(dataset: &Dataset, attributes: &[String]) -> Result<LocalizationReport> {
    let class_names = dataset.class_domain()?.to_vec();
    let priors = smoothed_priors(dataset)?;
    let mut tables = Vec::new();
    let mut posteriors = Vec::new();
    if !dataset.is_empty() {
        for name in attributes {
            let table = build_count_table(dataset, name)?;
            let per_value: Result<Vec<Vec<f64>>> = table
                .values
                .iter()
                .map(|v| location_posterior(&table, &priors, v))
                .collect();
            posteriors.push(AttributePosteriors {
                attribute: name.clone(),
                values: table.values.clone(),
                posteriors: per_value?,
            });
            tables.push(table);
        }
    }
    let ranking = if dataset.is_empty() {
        Vec::new()
    } else {
        rank_locations(dataset, attributes)?
    };
    Ok(LocalizationReport {
        dataset_id: dataset.relation.clone(),
        instances: dataset.len(),
        class_names,
        priors,
        tables,
        posteriors,
        ranking,
    })
}

/// A NORM-concluding rule together with the conditions an instance
/// violates; an empty `violated` list means the rule already accepts the
/// instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSuggestion {
    pub rule_index: usize,
    pub violated: Vec<Condition>,
    /// Whether applying the fixes makes the whole rule list predict NORM.
    pub sound: bool,
}

fn rule_model(envelope: &ModelEnvelope) -> Result<&RuleModel> {
    match &envelope.model {
        ModelKind::Rules(r) => Ok(r),
        _ => Err(Error::model("NORM-gap explanations require a rule model")),
    }
}

/// Set each violated condition's attribute to the rule's satisfying side.
pub fn apply_fixes(values: &[Value], violated: &[Condition]) -> Vec<Value> {
    let mut fixed = values.to_vec();
    for cond in violated {
        match cond {
            Condition::Le { attr, threshold } => fixed[*attr] = Value::Num(*threshold),
            Condition::Gt { attr, threshold } => {
                fixed[*attr] = Value::Num(threshold + (threshold.abs() + 1.0) * 1e-9)
            }
            Condition::Eq { attr, value } => fixed[*attr] = Value::Nom(*value),
        }
    }
    fixed
}

/// For every NORM-concluding rule, list the conditions the instance
/// violates. Suggestions are ordered soundness first, then fewest
/// violations, then rule order; soundness means re-predicting the fixed
/// instance yields NORM under first-match semantics.
pub fn norm_gap(envelope: &ModelEnvelope, values: &[Value]) -> Result<Vec<GapSuggestion>> {
    let model = rule_model(envelope)?;
    let class_names = envelope.class_names();
    let norm = class_names
        .iter()
        .position(|c| c == NORMAL_CLASS)
        .ok_or_else(|| Error::model("rule model has no NORM class"))?;
    if values.len() != envelope.schema.attributes.len() {
        return Err(Error::model("instance does not conform to the model schema"));
    }
    let norm_rules: Vec<usize> = model
        .rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.class == norm)
        .map(|(i, _)| i)
        .collect();
    if norm_rules.is_empty() {
        return Err(Error::model("rule model contains no NORM-concluding rule"));
    }

    let mut suggestions = Vec::with_capacity(norm_rules.len());
    for idx in norm_rules {
        let violated: Vec<Condition> = model.rules[idx]
            .conditions
            .iter()
            .filter(|c| !c.matches(values))
            .cloned()
            .collect();
        let fixed = apply_fixes(values, &violated);
        let sound = model.rules[model.first_match(&fixed)].class == norm;
        suggestions.push(GapSuggestion {
            rule_index: idx,
            violated,
            sound,
        });
    }
    suggestions.sort_by(|a, b| {
        b.sound
            .cmp(&a.sound)
            .then(a.violated.len().cmp(&b.violated.len()))
            .then(a.rule_index.cmp(&b.rule_index))
    });
    Ok(suggestions)
}

/// Column order used in the report grids: WARN, CR, NORM when those are
/// exactly the classes, declaration order otherwise.
fn display_order(class_names: &[String]) -> Vec<usize> {
    let preferred = ["WARN", "CR", "NORM"];
    if class_names.len() == 3 {
        let mapped: Option<Vec<usize>> = preferred
            .iter()
            .map(|p| class_names.iter().position(|c| c == p))
            .collect();
        if let Some(order) = mapped {
            return order;
        }
    }
    (0..class_names.len()).collect()
}

/// Text rendering: priors header, one count grid per attribute, then the
/// ranking section. Counts print with one decimal.
pub fn render_localization(report: &LocalizationReport) -> String {
    let order = display_order(&report.class_names);
    let mut out = String::from("Fault localization\n");
    out.push_str(&format!(
        "dataset: {} ({} instances)\n",
        report.dataset_id, report.instances
    ));
    out.push_str("class priors:");
    for &c in &order {
        out.push_str(&format!(
            "  {} ({:.2})",
            report.class_names[c], report.priors[c]
        ));
    }
    out.push('\n');

    for table in &report.tables {
        out.push('\n');
        out.push_str(&format!("{:<24}", table.attribute));
        for &c in &order {
            out.push_str(&format!("{:>10}", report.class_names[c]));
        }
        out.push('\n');
        for (v, value) in table.values.iter().enumerate() {
            out.push_str(&format!("  {value:<22}"));
            for &c in &order {
                out.push_str(&format!("{:>10.1}", table.counts[v][c]));
            }
            out.push('\n');
        }
    }

    if !report.ranking.is_empty() {
        out.push_str("\nRanking by fault posterior (1 - P(NORM | value)):\n");
        for (i, loc) in report.ranking.iter().enumerate() {
            out.push_str(&format!(
                "{:>4}. {}={:<16}{:.4}\n",
                i + 1,
                loc.attribute,
                loc.value,
                loc.fault_posterior
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Attribute;
    use crate::learners::{Rule, RuleStyle};

    fn dataset(rows: &[(usize, usize)]) -> Dataset {
        // (bsc index, class index)
        let mut d = Dataset::new(
            "loc-test",
            vec![
                Attribute::nominal("BSC", vec!["BSC1", "BSC2", "BSC3"]),
                Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for &(b, c) in rows {
            d.push(vec![Value::Nom(b), Value::Nom(c)]).unwrap();
        }
        d
    }

    #[test]
    fn smoothed_cells_start_at_one() {
        let d = dataset(&[(1, 2)]);
        let t = build_count_table(&d, "BSC").unwrap();
        // Absent combinations show the smoothed 1.0.
        assert_eq!(t.counts[0], vec![1.0, 1.0, 1.0]);
        // The (BSC2, WARN) row picked up one observation.
        assert_eq!(t.counts[1], vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn column_sums_are_class_count_plus_domain_size() {
        let d = dataset(&[(0, 0), (0, 2), (1, 2), (2, 1), (2, 2)]);
        let t = build_count_table(&d, "BSC").unwrap();
        let class_counts = d.class_counts().unwrap();
        for c in 0..3 {
            assert_eq!(t.class_total(c), class_counts[c] as f64 + 3.0);
        }
    }

    #[test]
    fn numeric_attribute_is_a_usage_error() {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        d.push(vec![Value::Num(1.0), Value::Nom(0)]).unwrap();
        assert_eq!(build_count_table(&d, "x").unwrap_err().exit_code(), 1);
    }

    #[test]
    fn uniform_table_and_priors_give_uniform_posterior() {
        let d = dataset(&[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]);
        let t = build_count_table(&d, "BSC").unwrap();
        let priors = vec![1.0 / 3.0; 3];
        let p = location_posterior(&t, &priors, "BSC1").unwrap();
        for x in &p {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_likelihoods_return_the_priors() {
        let d = dataset(&[(0, 0), (0, 1), (0, 2)]);
        let t = build_count_table(&d, "BSC").unwrap();
        let priors = vec![0.46, 0.38, 0.16];
        let p = location_posterior(&t, &priors, "BSC2").unwrap();
        for (a, b) in p.iter().zip(&priors) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_matches_hand_bayes_oracle() {
        let mut rows = Vec::new();
        // BSC2 concentrates faults: raw counts (NORM 3, CR 47, WARN 80).
        for _ in 0..3 {
            rows.push((1, 0));
        }
        for _ in 0..47 {
            rows.push((1, 1));
        }
        for _ in 0..80 {
            rows.push((1, 2));
        }
        for _ in 0..30 {
            rows.push((0, 0));
        }
        for _ in 0..20 {
            rows.push((2, 1));
        }
        let d = dataset(&rows);
        let t = build_count_table(&d, "BSC").unwrap();
        let priors = smoothed_priors(&d).unwrap();
        let p = location_posterior(&t, &priors, "BSC2").unwrap();
        // Independent arithmetic with explicit smoothed cells.
        let class_counts = d.class_counts().unwrap();
        let cells = [4.0, 48.0, 81.0];
        let mut expected: Vec<f64> = (0..3)
            .map(|c| priors[c] * cells[c] / (class_counts[c] as f64 + 3.0))
            .collect();
        let total: f64 = expected.iter().sum();
        for e in expected.iter_mut() {
            *e /= total;
        }
        for (a, b) in p.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_warn_bsc_ranks_first() {
        let rows = vec![(0, 0), (0, 0), (1, 2), (1, 2), (1, 2), (2, 0), (2, 1)];
        let d = dataset(&rows);
        let ranking = rank_locations(&d, &["BSC".to_string()]).unwrap();
        assert_eq!(ranking[0].value, "BSC2");
        assert_eq!(ranking.len(), 3);
    }

    #[test]
    fn row_permutation_does_not_change_the_report() {
        let rows = vec![(0, 0), (1, 2), (2, 1), (1, 2), (0, 1), (2, 2)];
        let d1 = dataset(&rows);
        let mut rev = rows.clone();
        rev.reverse();
        let d2 = dataset(&rev);
        let by = vec!["BSC".to_string()];
        assert_eq!(
            localization_report(&d1, &by).unwrap(),
            localization_report(&d2, &by).unwrap()
        );
    }

    #[test]
    fn empty_dataset_renders_priors_only() {
        let d = dataset(&[]);
        let report = localization_report(&d, &["BSC".to_string()]).unwrap();
        assert!(report.tables.is_empty());
        assert!(report.ranking.is_empty());
        let text = render_localization(&report);
        assert!(text.contains("class priors"));
        assert!(!text.contains("Ranking"));
    }

    #[test]
    fn render_uses_warn_cr_norm_order_and_one_decimal() {
        let d = dataset(&[(1, 2), (0, 0)]);
        let report = localization_report(&d, &["BSC".to_string()]).unwrap();
        let text = render_localization(&report);
        let header = text.lines().find(|l| l.starts_with("BSC")).unwrap();
        let w = header.find("WARN").unwrap();
        let c = header.find("CR").unwrap();
        let n = header.find("NORM").unwrap();
        assert!(w < c && c < n, "{header}");
        assert!(text.contains("2.0"), "{text}");
        // Priors line carries two decimals.
        assert!(text.contains("("));
        let priors_line = text.lines().find(|l| l.starts_with("class priors")).unwrap();
        assert!(priors_line.matches('.').count() >= 3);
    }

    fn gap_model() -> ModelEnvelope {
        use crate::learners::{AlgorithmId, ModelSchema, TrainParams, MODEL_VERSION};
        let attributes = vec![
            Attribute::numeric("TCHDropRate"),
            Attribute::numeric("HOFR"),
            Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
        ];
        let rules = RuleModel {
            rules: vec![
                Rule {
                    conditions: vec![
                        Condition::Le { attr: 0, threshold: 1.96 },
                        Condition::Le { attr: 1, threshold: 9.5 },
                    ],
                    class: 0,
                    counts: vec![10.0, 0.0, 0.0],
                },
                Rule {
                    conditions: vec![Condition::Gt { attr: 0, threshold: 4.0 }],
                    class: 2,
                    counts: vec![0.0, 0.0, 8.0],
                },
                Rule {
                    conditions: vec![],
                    class: 1,
                    counts: vec![0.0, 12.0, 0.0],
                },
            ],
            style: RuleStyle::Conjunctive,
        };
        ModelEnvelope {
            algorithm: AlgorithmId::JRip,
            version: MODEL_VERSION,
            schema: ModelSchema {
                attributes,
                class_index: 2,
            },
            params: TrainParams::default(),
            model: ModelKind::Rules(rules),
        }
    }

    #[test]
    fn satisfied_rule_yields_empty_violation_list() {
        let env = gap_model();
        let values = vec![Value::Num(1.0), Value::Num(5.0), Value::Missing];
        let gaps = norm_gap(&env, &values).unwrap();
        assert!(gaps[0].violated.is_empty());
        assert!(gaps[0].sound);
    }

    #[test]
    fn single_failing_condition_is_reported() {
        let env = gap_model();
        let values = vec![Value::Num(3.0), Value::Num(5.0), Value::Missing];
        let gaps = norm_gap(&env, &values).unwrap();
        assert_eq!(gaps[0].violated.len(), 1);
        assert_eq!(
            gaps[0].violated[0],
            Condition::Le { attr: 0, threshold: 1.96 }
        );
        // Applying the fix flips the prediction to NORM.
        let fixed = apply_fixes(&values, &gaps[0].violated);
        let (class, _) = env.predict(&fixed).unwrap();
        assert_eq!(env.class_names()[class], "NORM");
    }

    #[test]
    fn model_without_norm_rules_is_a_model_error() {
        let mut env = gap_model();
        if let ModelKind::Rules(r) = &mut env.model {
            r.rules.remove(0);
        }
        let err = norm_gap(&env, &[Value::Num(1.0), Value::Num(1.0), Value::Missing]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn tree_model_is_rejected() {
        use crate::learners::{train, AlgorithmId, TrainParams};
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("KPIAlarms", vec!["NORM", "CR", "WARN"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        for i in 0..10 {
            d.push(vec![Value::Num(i as f64), Value::Nom(usize::from(i >= 5))])
                .unwrap();
        }
        let env = train(AlgorithmId::J48, &d, &TrainParams::default()).unwrap();
        let err = norm_gap(&env, &d.instances[0].values).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
