//! Naive Bayes with Laplace-smoothed priors and nominal likelihoods and
//! per-class Gaussian likelihoods for numeric attributes. Missing values
//! are skipped in both counting and prediction.

use serde::{Deserialize, Serialize};

use super::TrainParams;
use crate::data::{AttrKind, Dataset, Value};
use crate::error::{Error, Result};

/// Standard-deviation floor as a fraction of the attribute's range.
const SD_RANGE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttrLikelihood {
    /// Raw class-conditional value counts `[class][value]`; prediction
    /// smooths with `(count + 1) / (class_count + domain_size)`.
    Nominal { counts: Vec<Vec<f64>> },
    /// Per-class Gaussian parameters (standard deviation already floored).
    Gaussian { mean: Vec<f64>, sd: Vec<f64> },
    /// The class attribute itself.
    Class,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    /// Raw class counts.
    pub class_counts: Vec<f64>,
    /// Laplace-smoothed priors.
    pub priors: Vec<f64>,
    pub likelihoods: Vec<AttrLikelihood>,
}

pub fn train_naive_bayes(dataset: &Dataset, _params: &TrainParams) -> Result<NaiveBayesModel> {
    let class_index = dataset
        .class_index
        .ok_or_else(|| Error::usage("training requires a class attribute"))?;
    if dataset.is_empty() {
        return Err(Error::usage("training requires at least one instance"));
    }
    let k = dataset.num_classes()?;

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

    let mut likelihoods = Vec::with_capacity(dataset.attributes.len());
    for (attr, a) in dataset.attributes.iter().enumerate() {
        if attr == class_index {
            likelihoods.push(AttrLikelihood::Class);
            continue;
        }
        match &a.kind {
            AttrKind::Nominal(domain) => {
                let mut counts = vec![vec![0.0; domain.len()]; k];
                for inst in &dataset.instances {
                    if let (Some(c), Some(v)) = (
                        inst.values[class_index].as_nom(),
                        inst.values[attr].as_nom(),
                    ) {
                        counts[c][v] += 1.0;
                    }
                }
                likelihoods.push(AttrLikelihood::Nominal { counts });
            }
            AttrKind::Numeric => {
                likelihoods.push(gaussian_likelihood(dataset, attr, class_index, k));
            }
        }
    }

    Ok(NaiveBayesModel {
        class_counts,
        priors,
        likelihoods,
    })
}

fn gaussian_likelihood(
    dataset: &Dataset,
    attr: usize,
    class_index: usize,
    k: usize,
) -> AttrLikelihood {
    let mut sums = vec![0.0f64; k];
    let mut sq_sums = vec![0.0f64; k];
    let mut counts = vec![0.0f64; k];
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for inst in &dataset.instances {
        if let (Some(c), Some(v)) = (inst.values[class_index].as_nom(), inst.values[attr].as_num())
        {
            sums[c] += v;
            sq_sums[c] += v * v;
            counts[c] += 1.0;
            min = min.min(v);
            max = max.max(v);
        }
    }
    let total: f64 = counts.iter().sum();
    let (global_mean, global_sd) = if total > 0.0 {
        let m = sums.iter().sum::<f64>() / total;
        let var = (sq_sums.iter().sum::<f64>() / total - m * m).max(0.0);
        (m, var.sqrt())
    } else {
        (0.0, 0.0)
    };
    let range = if max > min { max - min } else { 0.0 };
    let floor = (SD_RANGE_FLOOR * range).max(1e-12);

    let mut mean = vec![0.0; k];
    let mut sd = vec![0.0; k];
    for c in 0..k {
        if counts[c] > 0.0 {
            // Population variance keeps duplicated datasets invariant.
            mean[c] = sums[c] / counts[c];
            let var = (sq_sums[c] / counts[c] - mean[c] * mean[c]).max(0.0);
            sd[c] = var.sqrt().max(floor);
        } else {
            mean[c] = global_mean;
            sd[c] = global_sd.max(floor);
        }
    }
    AttrLikelihood::Gaussian { mean, sd }
}

/// Log-space posterior over classes; missing attributes are skipped.
pub fn log_posterior(model: &NaiveBayesModel, values: &[Value]) -> Vec<f64> {
    let k = model.priors.len();
    let mut log_p: Vec<f64> = model.priors.iter().map(|p| p.ln()).collect();
    for (attr, lik) in model.likelihoods.iter().enumerate() {
        match lik {
            AttrLikelihood::Class => {}
            AttrLikelihood::Nominal { counts } => {
                if let Some(v) = values[attr].as_nom() {
                    for c in 0..k {
                        let domain_size = counts[c].len() as f64;
                        let p = (counts[c][v] + 1.0) / (model.class_counts[c] + domain_size);
                        log_p[c] += p.ln();
                    }
                }
            }
            AttrLikelihood::Gaussian { mean, sd } => {
                if let Some(v) = values[attr].as_num() {
                    for c in 0..k {
                        let z = (v - mean[c]) / sd[c];
                        log_p[c] += -0.5 * z * z - sd[c].ln()
                            - 0.5 * (2.0 * std::f64::consts::PI).ln();
                    }
                }
            }
        }
    }
    log_p
}

/// Normalize log scores into a probability vector without underflow.
pub fn normalize_log(log_p: &[f64]) -> Vec<f64> {
    let max = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = log_p.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}
