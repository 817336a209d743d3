//! Ordered rule lists shared by the rule learners: atomic conditions,
//! first-match prediction, and coverage bookkeeping.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Value};

/// Atomic condition over one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Condition {
    /// Numeric `attr <= threshold`.
    Le { attr: usize, threshold: f64 },
    /// Numeric `attr > threshold`.
    Gt { attr: usize, threshold: f64 },
    /// Nominal `attr = value` (domain index).
    Eq { attr: usize, value: usize },
}

impl Condition {
    pub fn attr(&self) -> usize {
        match self {
            Condition::Le { attr, .. } | Condition::Gt { attr, .. } | Condition::Eq { attr, .. } => {
                *attr
            }
        }
    }

    /// Missing values never satisfy a condition.
    pub fn matches(&self, values: &[Value]) -> bool {
        match self {
            Condition::Le { attr, threshold } => {
                matches!(values[*attr], Value::Num(v) if v <= *threshold)
            }
            Condition::Gt { attr, threshold } => {
                matches!(values[*attr], Value::Num(v) if v > *threshold)
            }
            Condition::Eq { attr, value } => {
                matches!(values[*attr], Value::Nom(i) if i == *value)
            }
        }
    }
}

/// One rule: a conjunction of conditions concluding a class, with the
/// first-match training distribution over classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: usize,
    /// Class-weight vector of the training instances this rule matched
    /// first; `covered()` and `misclassified()` derive from it.
    pub counts: Vec<f64>,
}

impl Rule {
    pub fn matches(&self, values: &[Value]) -> bool {
        self.conditions.iter().all(|c| c.matches(values))
    }

    pub fn covered(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn misclassified(&self) -> f64 {
        self.covered() - self.counts.get(self.class).copied().unwrap_or(0.0)
    }

    pub fn is_default(&self) -> bool {
        self.conditions.is_empty()
    }
}

/// Rendering style of a rule list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleStyle {
    /// Single-line conjunctive rules.
    Conjunctive,
    /// Stacked-condition decision list.
    DecisionList,
}

/// Ordered rule list; the final rule has no conditions and therefore
/// matches everything.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleModel {
    pub rules: Vec<Rule>,
    pub style: RuleStyle,
}

impl RuleModel {
    /// Index of the first rule matching the instance. The default rule
    /// guarantees a match.
    pub fn first_match(&self, values: &[Value]) -> usize {
        self.rules
            .iter()
            .position(|r| r.matches(values))
            .expect("default rule matches everything")
    }

    pub fn matched_counts(&self, values: &[Value]) -> &[f64] {
        &self.rules[self.first_match(values)].counts
    }

    /// Recompute every rule's first-match class distribution over a
    /// training set.
    pub fn refresh_counts(&mut self, dataset: &Dataset) {
        let class_index = dataset.class_index.expect("class attribute set");
        let k = dataset.attributes[class_index]
            .domain()
            .expect("class is nominal")
            .len();
        for rule in self.rules.iter_mut() {
            rule.counts = vec![0.0; k];
        }
        for inst in &dataset.instances {
            let idx = self.first_match(&inst.values);
            if let Some(c) = inst.values[class_index].as_nom() {
                self.rules[idx].counts[c] += 1.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditions_match_and_reject() {
        let le = Condition::Le { attr: 0, threshold: 2.0 };
        let gt = Condition::Gt { attr: 0, threshold: 2.0 };
        let eq = Condition::Eq { attr: 1, value: 1 };
        let vals = vec![Value::Num(2.0), Value::Nom(1)];
        assert!(le.matches(&vals));
        assert!(!gt.matches(&vals));
        assert!(eq.matches(&vals));
        let missing = vec![Value::Missing, Value::Missing];
        assert!(!le.matches(&missing));
        assert!(!gt.matches(&missing));
        assert!(!eq.matches(&missing));
    }

    #[test]
    fn first_match_order_and_default() {
        let model = RuleModel {
            rules: vec![
                Rule {
                    conditions: vec![Condition::Le { attr: 0, threshold: 1.0 }],
                    class: 0,
                    counts: vec![5.0, 0.0],
                },
                Rule {
                    conditions: vec![],
                    class: 1,
                    counts: vec![1.0, 9.0],
                },
            ],
            style: RuleStyle::Conjunctive,
        };
        assert_eq!(model.first_match(&[Value::Num(0.5)]), 0);
        assert_eq!(model.first_match(&[Value::Num(3.0)]), 1);
        assert_eq!(model.first_match(&[Value::Missing]), 1);
    }

    #[test]
    fn coverage_arithmetic() {
        let rule = Rule {
            conditions: vec![],
            class: 2,
            counts: vec![1.0, 0.0, 964.0],
        };
        assert_eq!(rule.covered(), 965.0);
        assert_eq!(rule.misclassified(), 1.0);
    }
}
