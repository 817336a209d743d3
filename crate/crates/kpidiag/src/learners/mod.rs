//! Classifier implementations behind one train/predict/render contract.
//!
//! Five algorithms are available: a gain-ratio decision tree (`j48`), an
//! incremental reduced-error rule learner (`jrip`), a tree-based decision
//! list (`part`), naive Bayes (`nb`), and a discretizing Bayes network
//! (`bayesnet`). Every trained model is wrapped in a [`ModelEnvelope`]
//! carrying the algorithm id, the training schema, and the parameters, and
//! serializes to a self-describing JSON artifact.

mod bayes_net;
mod discretize;
mod naive_bayes;
mod part;
mod render;
mod ripper;
mod rules;
mod stats;
mod tree;

pub use bayes_net::{train_bayes_net, BayesNetModel, Cpt};
pub use discretize::{bin_of, mdl_cuts};
pub use naive_bayes::{train_naive_bayes, AttrLikelihood, NaiveBayesModel};
pub use part::train_part;
pub use render::render_model;
pub use ripper::train_ripper;
pub use rules::{Condition, Rule, RuleModel, RuleStyle};
pub use stats::{argmax, entropy, laplace, normal_quantile, pessimistic_errors};
pub use tree::{train_tree, tree_estimated_errors, TreeModel, TreeNode};

use serde::{Deserialize, Serialize};

use crate::data::{Attribute, Dataset, Value};
use crate::error::{Error, Result};

/// Model artifact format version.
pub const MODEL_VERSION: u32 = 1;

/// Identifier of a training algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgorithmId {
    #[serde(rename = "j48")]
    J48,
    #[serde(rename = "jrip")]
    JRip,
    #[serde(rename = "part")]
    Part,
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "bayesnet")]
    BayesNet,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 5] = [
        AlgorithmId::J48,
        AlgorithmId::JRip,
        AlgorithmId::Part,
        AlgorithmId::NaiveBayes,
        AlgorithmId::BayesNet,
    ];

    pub fn from_str(s: &str) -> Result<AlgorithmId> {
        match s {
            "j48" => Ok(AlgorithmId::J48),
            "jrip" => Ok(AlgorithmId::JRip),
            "part" => Ok(AlgorithmId::Part),
            "nb" => Ok(AlgorithmId::NaiveBayes),
            "bayesnet" => Ok(AlgorithmId::BayesNet),
            _ => Err(Error::usage(format!(
                "unknown algorithm `{s}`; valid algorithms: j48, jrip, part, nb, bayesnet"
            ))),
        }
    }

    pub fn cli_name(&self) -> &'static str {
        match self {
            AlgorithmId::J48 => "j48",
            AlgorithmId::JRip => "jrip",
            AlgorithmId::Part => "part",
            AlgorithmId::NaiveBayes => "nb",
            AlgorithmId::BayesNet => "bayesnet",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            AlgorithmId::J48 => "J48",
            AlgorithmId::JRip => "JRip",
            AlgorithmId::Part => "PART",
            AlgorithmId::NaiveBayes => "NaiveBayes",
            AlgorithmId::BayesNet => "BayesNet",
        }
    }
}

/// Bayes-network structure mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureMode {
    Naive,
    Tan,
}

/// Training parameters shared by all algorithms; each algorithm reads the
/// fields it cares about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Pruning confidence for the tree learners.
    pub confidence: f64,
    /// Minimum instance weight per leaf.
    pub min_leaf: f64,
    /// Grow parts per one prune part in the rule learner's split.
    pub grow_ratio: f64,
    /// Rule-optimization passes.
    pub optimizations: usize,
    /// Bayes-network structure.
    pub structure: StructureMode,
    /// Seed for the learners' internal splits.
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            confidence: 0.25,
            min_leaf: 2.0,
            grow_ratio: 2.0,
            optimizations: 1,
            structure: StructureMode::Tan,
            seed: 1,
        }
    }
}

impl TrainParams {
    /// Apply one `key=value` override.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "confidence" => {
                let v: f64 = parse_num(key, value)?;
                if !(0.0..=0.5).contains(&v) || v == 0.0 {
                    return Err(Error::usage("confidence must be in (0, 0.5]"));
                }
                self.confidence = v;
            }
            "min_leaf" => {
                let v: f64 = parse_num(key, value)?;
                if v < 1.0 {
                    return Err(Error::usage("min_leaf must be at least 1"));
                }
                self.min_leaf = v;
            }
            "grow_ratio" => {
                let v: f64 = parse_num(key, value)?;
                if v <= 0.0 {
                    return Err(Error::usage("grow_ratio must be positive"));
                }
                self.grow_ratio = v;
            }
            "optimizations" => {
                self.optimizations = value
                    .parse()
                    .map_err(|_| Error::usage(format!("cannot parse `{value}` for {key}")))?;
            }
            "structure" => {
                self.structure = match value {
                    "naive" => StructureMode::Naive,
                    "tan" => StructureMode::Tan,
                    _ => {
                        return Err(Error::usage(format!(
                            "unknown structure `{value}`; valid: naive, tan"
                        )));
                    }
                };
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::usage(format!("cannot parse `{value}` for {key}")))?;
            }
            _ => {
                return Err(Error::usage(format!(
                    "unknown parameter `{key}`; valid: confidence, min_leaf, grow_ratio, optimizations, structure, seed"
                )));
            }
        }
        Ok(())
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::usage(format!("cannot parse `{value}` for {key}")))
}

/// Training schema captured inside a model artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSchema {
    pub attributes: Vec<Attribute>,
    pub class_index: usize,
}

impl ModelSchema {
    fn from_dataset(dataset: &Dataset) -> Result<Self> {
        Ok(ModelSchema {
            attributes: dataset.attributes.clone(),
            class_index: dataset
                .class_index
                .ok_or_else(|| Error::usage("training requires a class attribute"))?,
        })
    }

    pub fn class_names(&self) -> &[String] {
        self.attributes[self.class_index]
            .domain()
            .expect("class is nominal")
    }
}

/// Algorithm-specific model body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tree(TreeModel),
    Rules(RuleModel),
    NaiveBayes(NaiveBayesModel),
    BayesNet(BayesNetModel),
}

/// A trained model with everything needed to apply or persist it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEnvelope {
    pub algorithm: AlgorithmId,
    pub version: u32,
    pub schema: ModelSchema,
    pub params: TrainParams,
    pub model: ModelKind,
}

/// Train the given algorithm on a labeled dataset.
pub fn train(algorithm: AlgorithmId, dataset: &Dataset, params: &TrainParams) -> Result<ModelEnvelope> {
    let schema = ModelSchema::from_dataset(dataset)?;
    let model = match algorithm {
        AlgorithmId::J48 => ModelKind::Tree(train_tree(dataset, params)?),
        AlgorithmId::JRip => ModelKind::Rules(train_ripper(dataset, params)?),
        AlgorithmId::Part => ModelKind::Rules(train_part(dataset, params)?),
        AlgorithmId::NaiveBayes => ModelKind::NaiveBayes(train_naive_bayes(dataset, params)?),
        AlgorithmId::BayesNet => ModelKind::BayesNet(train_bayes_net(dataset, params)?),
    };
    Ok(ModelEnvelope {
        algorithm,
        version: MODEL_VERSION,
        schema,
        params: params.clone(),
        model,
    })
}

impl ModelEnvelope {
    pub fn class_names(&self) -> &[String] {
        self.schema.class_names()
    }

    /// Predicted class index and normalized probability vector.
    pub fn predict(&self, values: &[Value]) -> Result<(usize, Vec<f64>)> {
        if values.len() != self.schema.attributes.len() {
            return Err(Error::model(format!(
                "instance has {} values but the model schema declares {} attributes",
                values.len(),
                self.schema.attributes.len()
            )));
        }
        let probs = match &self.model {
            ModelKind::Tree(t) => laplace(t.leaf_counts(values)),
            ModelKind::Rules(r) => laplace(r.matched_counts(values)),
            ModelKind::NaiveBayes(nb) => {
                naive_bayes::normalize_log(&naive_bayes::log_posterior(nb, values))
            }
            ModelKind::BayesNet(bn) => bayes_net::posterior(bn, values),
        };
        Ok((argmax(&probs), probs))
    }

    /// A dataset is compatible when its schema matches the training schema
    /// exactly (names, kinds, domains, class position).
    pub fn check_schema(&self, dataset: &Dataset) -> Result<()> {
        if dataset.attributes != self.schema.attributes {
            return Err(Error::model(
                "dataset schema does not match the model's training schema",
            ));
        }
        if dataset.class_index != Some(self.schema.class_index) {
            return Err(Error::model(
                "dataset class attribute does not match the model's training schema",
            ));
        }
        Ok(())
    }
}

/// Serialize a model to its JSON artifact.
pub fn save_model(envelope: &ModelEnvelope) -> String {
    let mut text = serde_json::to_string_pretty(envelope).expect("model serializes");
    text.push('\n');
    text
}

/// Load a model artifact, rejecting version mismatches.
pub fn load_model(text: &str) -> Result<ModelEnvelope> {
    let envelope: ModelEnvelope =
        serde_json::from_str(text).map_err(|e| Error::model(format!("invalid model artifact: {e}")))?;
    if envelope.version != MODEL_VERSION {
        return Err(Error::model(format!(
            "model artifact version {} is not supported (expected {MODEL_VERSION})",
            envelope.version
        )));
    }
    Ok(envelope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttrKind, Value};

    fn toy_dataset() -> Dataset {
        let mut d = Dataset::new(
            "t",
            vec![
                Attribute::numeric("x"),
                Attribute::nominal("b", vec!["u", "v"]),
                Attribute::nominal("KPIAlarms", vec!["A", "B"]),
            ],
        )
        .unwrap();
        d.apply_default_class();
        let mut rng = crate::rng::Rng::new(9);
        for i in 0..60 {
            let class = usize::from(i >= 30);
            d.push(vec![
                Value::Num(i as f64 + rng.next_f64()),
                Value::Nom((rng.next_u64() % 2) as usize),
                Value::Nom(class),
            ])
            .unwrap();
        }
        d
    }

    #[test]
    fn every_algorithm_trains_and_predicts_a_distribution() {
        let d = toy_dataset();
        for algo in AlgorithmId::ALL {
            let env = train(algo, &d, &TrainParams::default()).unwrap();
            for inst in &d.instances {
                let (class, probs) = env.predict(&inst.values).unwrap();
                assert!(class < 2);
                assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{algo:?}");
                assert!(probs.iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn leaf_probabilities_use_laplace_smoothing() {
        let probs = laplace(&[3.0, 0.0, 0.0]);
        assert_eq!(probs, vec![4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
        assert_eq!(argmax(&probs), 0);
    }

    #[test]
    fn save_load_round_trips_predictions() {
        let d = toy_dataset();
        for algo in AlgorithmId::ALL {
            let env = train(algo, &d, &TrainParams::default()).unwrap();
            let text = save_model(&env);
            let loaded = load_model(&text).unwrap();
            assert_eq!(loaded, env);
            for inst in &d.instances {
                let a = env.predict(&inst.values).unwrap();
                let b = loaded.predict(&inst.values).unwrap();
                assert_eq!(a.0, b.0);
                assert_eq!(a.1, b.1, "{algo:?} probabilities must be bit-identical");
            }
        }
    }

    #[test]
    fn artifact_contains_algorithm_id() {
        let d = toy_dataset();
        let env = train(AlgorithmId::JRip, &d, &TrainParams::default()).unwrap();
        let text = save_model(&env);
        assert!(text.contains("\"algorithm\": \"jrip\""));
        assert!(text.contains("\"version\": 1"));
    }

    #[test]
    fn renamed_attribute_is_a_model_error() {
        let d = toy_dataset();
        let env = train(AlgorithmId::J48, &d, &TrainParams::default()).unwrap();
        let mut renamed = d.clone();
        renamed.attributes[0].name = "renamed".into();
        let err = env.check_schema(&renamed).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        // Changed nominal domain is equally incompatible.
        let mut mutated = d.clone();
        mutated.attributes[1].kind = AttrKind::Nominal(vec!["u".into(), "w".into()]);
        assert!(env.check_schema(&mutated).is_err());
        assert!(env.check_schema(&d).is_ok());
    }

    #[test]
    fn version_mismatch_is_a_model_error() {
        let d = toy_dataset();
        let env = train(AlgorithmId::NaiveBayes, &d, &TrainParams::default()).unwrap();
        let text = save_model(&env).replace("\"version\": 1", "\"version\": 99");
        let err = load_model(&text).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn params_apply_and_reject() {
        let mut p = TrainParams::default();
        p.apply("confidence", "0.1").unwrap();
        p.apply("structure", "naive").unwrap();
        p.apply("seed", "42").unwrap();
        assert_eq!(p.confidence, 0.1);
        assert_eq!(p.structure, StructureMode::Naive);
        assert_eq!(p.seed, 42);
        assert!(p.apply("bogus", "1").is_err());
        assert!(p.apply("confidence", "0.9").is_err());
        assert!(p.apply("min_leaf", "0").is_err());
    }

    #[test]
    fn uniform_model_ties_break_by_declaration_order() {
        // One-instance-per-class dataset with no usable attribute.
        let mut d = Dataset::new(
            "t",
            vec![Attribute::nominal("KPIAlarms", vec!["A", "B"])],
        )
        .unwrap();
        d.apply_default_class();
        d.push(vec![Value::Nom(0)]).unwrap();
        d.push(vec![Value::Nom(1)]).unwrap();
        let env = train(AlgorithmId::NaiveBayes, &d, &TrainParams::default()).unwrap();
        let (class, probs) = env.predict(&[Value::Missing]).unwrap();
        assert_eq!(class, 0);
        assert!((probs[0] - probs[1]).abs() < 1e-12);
    }
}
