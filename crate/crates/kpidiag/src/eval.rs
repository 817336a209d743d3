//! Classifier evaluation: confusion-matrix statistics, probabilistic
//! error measures, one-vs-rest per-class metrics with support-weighted
//! averages, stratified cross-validation, and multi-algorithm comparison
//! tables.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{stratified_folds, Dataset};
use crate::error::{Error, Result};
use crate::learners::{train, AlgorithmId, TrainParams};

/// Square count matrix indexed `(actual, predicted)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn row_sum(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> usize {
        self.counts.iter().map(|row| row[class]).sum()
    }
}

/// Count agreement between truth and predictions.
pub fn confusion(truth: &[usize], predicted: &[usize], classes: &[String]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::usage(format!(
            "truth has {} entries but predictions have {}",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::usage("cannot build a confusion matrix from no instances"));
    }
    let k = classes.len();
    let mut counts = vec![vec![0usize; k]; k];
    for (&a, &p) in truth.iter().zip(predicted) {
        counts[a][p] += 1;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
    })
}

/// Chance-corrected agreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    /// Set when expected agreement is 1 and the statistic is undefined.
    pub degenerate: bool,
}

pub fn kappa(cm: &ConfusionMatrix) -> Result<Kappa> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::usage("kappa requires a non-empty confusion matrix"));
    }
    let n = total as f64;
    let p_o = cm.trace() as f64 / n;
    let p_e: f64 = (0..cm.classes.len())
        .map(|c| (cm.row_sum(c) as f64 / n) * (cm.col_sum(c) as f64 / n))
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return Ok(Kappa {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Kappa {
        value: (p_o - p_e) / (1.0 - p_e),
        degenerate: false,
    })
}

/// Mean absolute and root-mean-squared error of probability vectors
/// against one-hot truth, averaged per class then per instance.
pub fn mae_rmse(prob_vectors: &[Vec<f64>], truth: &[usize], num_classes: usize) -> Result<(f64, f64)> {
    if prob_vectors.len() != truth.len() || prob_vectors.is_empty() {
        return Err(Error::usage("probability vectors and truth must align and be non-empty"));
    }
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (probs, &t) in prob_vectors.iter().zip(truth) {
        if probs.len() != num_classes {
            return Err(Error::usage("probability vector has the wrong arity"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::usage(format!("probability vector sums to {total}")));
        }
        let mut abs = 0.0;
        let mut sq = 0.0;
        for (c, &p) in probs.iter().enumerate() {
            let e = if c == t { 1.0 - p } else { -p };
            abs += e.abs();
            sq += e * e;
        }
        abs_sum += abs / num_classes as f64;
        sq_sum += sq / num_classes as f64;
    }
    let n = truth.len() as f64;
    Ok((abs_sum / n, (sq_sum / n).sqrt()))
}

/// One-vs-rest statistics for a single class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: String,
    pub support: usize,
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub roc_area: f64,
    pub prc_area: f64,
    /// False when the class never occurs in the truth; such rows are
    /// excluded from the weighted averages.
    pub defined: bool,
}

/// Support-weighted averages over the defined classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedStats {
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub roc_area: f64,
    pub prc_area: f64,
}

/// Rank-statistic ROC area (midrank ties) of one score column.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n = scores.len();
    let pos = positive.iter().filter(|&&p| p).count();
    let neg = n - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based midrank of the tie group [i, j].
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if positive[idx] {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let p = pos as f64;
    Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Trapezoidal area over the recall-sorted precision-recall points.
pub fn prc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let pos = positive.iter().filter(|&&p| p).count();
    if pos == 0 || scores.is_empty() {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut points: Vec<(f64, f64)> = Vec::new(); // (recall, precision)
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if positive[idx] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
        }
        points.push((tp / pos as f64, tp / (tp + fp)));
        i = j + 1;
    }
    let first_precision = points[0].1;
    let mut area = 0.0;
    let mut prev = (0.0, first_precision);
    for &(r, p) in &points {
        area += (r - prev.0) * (p + prev.1) / 2.0;
        prev = (r, p);
    }
    Some(area)
}

/// Per-class one-vs-rest statistics plus their support-weighted averages.
pub fn per_class_stats(
    cm: &ConfusionMatrix,
    prob_vectors: &[Vec<f64>],
    truth: &[usize],
) -> Result<(Vec<ClassStats>, WeightedStats)> {
    let k = cm.classes.len();
    let total = cm.total();
    if prob_vectors.len() != truth.len() || total != truth.len() {
        return Err(Error::usage("inconsistent inputs for per-class statistics"));
    }
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let support = cm.row_sum(c);
        if support == 0 {
            per_class.push(ClassStats {
                class: cm.classes[c].clone(),
                support: 0,
                tp_rate: 0.0,
                fp_rate: 0.0,
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
                mcc: 0.0,
                roc_area: 0.0,
                prc_area: 0.0,
                defined: false,
            });
            continue;
        }
        let tp = cm.counts[c][c] as f64;
        let fp = (cm.col_sum(c) - cm.counts[c][c]) as f64;
        let fnn = (support - cm.counts[c][c]) as f64;
        let tn = total as f64 - tp - fp - fnn;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = tp / (tp + fnn);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let fp_rate = if fp + tn > 0.0 { fp / (fp + tn) } else { 0.0 };
        let mcc_den = ((tp + fp) * (tp + fnn) * (tn + fp) * (tn + fnn)).sqrt();
        let mcc = if mcc_den > 0.0 {
            (tp * tn - fp * fnn) / mcc_den
        } else {
            0.0
        };
        let scores: Vec<f64> = prob_vectors.iter().map(|p| p[c]).collect();
        let positive: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        let roc_area = roc_auc(&scores, &positive).unwrap_or(0.0);
        let prc_area = prc_auc(&scores, &positive).unwrap_or(0.0);
        per_class.push(ClassStats {
            class: cm.classes[c].clone(),
            support,
            tp_rate: recall,
            fp_rate,
            precision,
            recall,
            f1,
            mcc,
            roc_area,
            prc_area,
            defined: true,
        });
    }

    let weight_total: f64 = per_class
        .iter()
        .filter(|s| s.defined)
        .map(|s| s.support as f64)
        .sum();
    let avg = |f: fn(&ClassStats) -> f64| -> f64 {
        if weight_total == 0.0 {
            return 0.0;
        }
        per_class
            .iter()
            .filter(|s| s.defined)
            .map(|s| f(s) * s.support as f64)
            .sum::<f64>()
            / weight_total
    };
    let weighted = WeightedStats {
        tp_rate: avg(|s| s.tp_rate),
        fp_rate: avg(|s| s.fp_rate),
        precision: avg(|s| s.precision),
        recall: avg(|s| s.recall),
        f1: avg(|s| s.f1),
        mcc: avg(|s| s.mcc),
        roc_area: avg(|s| s.roc_area),
        prc_area: avg(|s| s.prc_area),
    };
    Ok((per_class, weighted))
}

/// Full evaluation report over pooled cross-validation predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: String,
    pub folds: usize,
    pub seed: u64,
    pub instances: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub accuracy: f64,
    pub kappa: f64,
    pub kappa_degenerate: bool,
    pub mae: f64,
    pub rmse: f64,
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassStats>,
    pub weighted: WeightedStats,
    pub per_fold_accuracy: Vec<f64>,
    /// Wall-clock seconds; informational only and excluded from the JSON
    /// form so that equal seeds give byte-identical reports.
    #[serde(skip)]
    pub seconds: f64,
}

/// Stratified k-fold cross-validation with pooled metrics.
pub fn cross_validate(
    algorithm: AlgorithmId,
    dataset: &Dataset,
    params: &TrainParams,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    let start = Instant::now();
    let class_names = dataset.class_domain()?.to_vec();
    let folds = stratified_folds(dataset, k, seed)?;

    let mut predicted: Vec<usize> = vec![0; dataset.len()];
    let mut probs: Vec<Vec<f64>> = vec![Vec::new(); dataset.len()];
    let mut per_fold_accuracy = Vec::with_capacity(k);
    for fold in &folds {
        let mut train_set = Dataset {
            relation: dataset.relation.clone(),
            attributes: dataset.attributes.clone(),
            instances: Vec::with_capacity(dataset.len() - fold.len()),
            class_index: dataset.class_index,
        };
        let held: std::collections::HashSet<usize> = fold.iter().copied().collect();
        for row in 0..dataset.len() {
            if !held.contains(&row) {
                train_set.instances.push(dataset.instances[row].clone());
            }
        }
        let model = train(algorithm, &train_set, params)?;
        let mut fold_correct = 0usize;
        for &row in fold {
            let (class, p) = model.predict(&dataset.instances[row].values)?;
            if Some(class) == dataset.class_of(row) {
                fold_correct += 1;
            }
            predicted[row] = class;
            probs[row] = p;
        }
        per_fold_accuracy.push(fold_correct as f64 / fold.len() as f64);
    }

    let truth: Vec<usize> = (0..dataset.len())
        .map(|r| dataset.class_of(r).expect("folds checked class presence"))
        .collect();
    report_from_predictions(
        algorithm.display_name(),
        k,
        seed,
        &truth,
        &predicted,
        &probs,
        &class_names,
        start.elapsed().as_secs_f64(),
        per_fold_accuracy,
    )
}

#[allow(clippy::too_many_arguments)]
fn report_from_predictions(
    algorithm: &str,
    folds: usize,
    seed: u64,
    truth: &[usize],
    predicted: &[usize],
    probs: &[Vec<f64>],
    class_names: &[String],
    seconds: f64,
    per_fold_accuracy: Vec<f64>,
) -> Result<EvalReport> {
    let cm = confusion(truth, predicted, class_names)?;
    let kap = kappa(&cm)?;
    let (mae, rmse) = mae_rmse(probs, truth, class_names.len())?;
    let (per_class, weighted) = per_class_stats(&cm, probs, truth)?;
    let correct = cm.trace();
    let total = cm.total();
    Ok(EvalReport {
        algorithm: algorithm.to_string(),
        folds,
        seed,
        instances: total,
        correct,
        incorrect: total - correct,
        accuracy: cm.accuracy(),
        kappa: kap.value,
        kappa_degenerate: kap.degenerate,
        mae,
        rmse,
        confusion: cm,
        per_class,
        weighted,
        per_fold_accuracy,
        seconds,
    })
}

/// Cross-validate several algorithms on one dataset.
pub fn compare(
    algorithms: &[AlgorithmId],
    dataset: &Dataset,
    params: &TrainParams,
    k: usize,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    algorithms
        .iter()
        .map(|&a| cross_validate(a, dataset, params, k, seed))
        .collect()
}

/// Single-report text rendering.
pub fn render_report(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "=== {}-fold cross-validation, {} (seed {}) ===\n\n",
        report.folds, report.algorithm, report.seed
    ));
    out.push_str(&format!(
        "Correctly classified instances    {:>8}    {:.4} %\n",
        report.correct,
        report.accuracy * 100.0
    ));
    out.push_str(&format!(
        "Incorrectly classified instances  {:>8}    {:.4} %\n",
        report.incorrect,
        (1.0 - report.accuracy) * 100.0
    ));
    let kappa_note = if report.kappa_degenerate { " (degenerate)" } else { "" };
    out.push_str(&format!("Kappa statistic                   {:>12.4}{kappa_note}\n", report.kappa));
    out.push_str(&format!("Mean absolute error               {:>12.4}\n", report.mae));
    out.push_str(&format!("Root mean squared error           {:>12.4}\n", report.rmse));
    out.push_str(&format!("Total number of instances         {:>8}\n", report.instances));
    out.push_str(&format!("Evaluation time                   {:>10.2} s\n", report.seconds));

    out.push_str("\n=== Detailed accuracy by class ===\n\n");
    out.push_str(&format!(
        "{:<12}{:>9}{:>9}{:>11}{:>9}{:>11}{:>7}{:>10}{:>10}{:>9}\n",
        "Class", "TP Rate", "FP Rate", "Precision", "Recall", "F-Measure", "MCC", "ROC Area",
        "PRC Area", "Support"
    ));
    for s in &report.per_class {
        if !s.defined {
            out.push_str(&format!("{:<12}{}\n", s.class, "  (no instances)"));
            continue;
        }
        out.push_str(&format!(
            "{:<12}{:>9.3}{:>9.3}{:>11.3}{:>9.3}{:>11.3}{:>7.3}{:>10.3}{:>10.3}{:>9}\n",
            s.class, s.tp_rate, s.fp_rate, s.precision, s.recall, s.f1, s.mcc, s.roc_area,
            s.prc_area, s.support
        ));
    }
    let w = &report.weighted;
    out.push_str(&format!(
        "{:<12}{:>9.3}{:>9.3}{:>11.3}{:>9.3}{:>11.3}{:>7.3}{:>10.3}{:>10.3}\n",
        "Weighted", w.tp_rate, w.fp_rate, w.precision, w.recall, w.f1, w.mcc, w.roc_area, w.prc_area
    ));

    out.push_str("\n=== Confusion matrix (rows: actual, columns: predicted) ===\n\n");
    out.push_str(&format!("{:<12}", ""));
    for name in &report.confusion.classes {
        out.push_str(&format!("{name:>8}"));
    }
    out.push('\n');
    for (c, name) in report.confusion.classes.iter().enumerate() {
        out.push_str(&format!("{name:<12}"));
        for &count in &report.confusion.counts[c] {
            out.push_str(&format!("{count:>8}"));
        }
        out.push('\n');
    }
    out
}

/// Comparison tables in the familiar two-block layout: counts and error
/// measures first, weighted-average statistics second.
pub fn render_comparison(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14}{:>26}{:>28}{:>12}{:>14}{:>18}{:>10}\n",
        "Classifier",
        "Correctly classified",
        "Incorrectly classified",
        "Kappa",
        "Mean abs err",
        "Root mean sq err",
        "Accuracy"
    ));
    for r in reports {
        out.push_str(&format!(
            "{:<14}{:>26}{:>28}{:>12.4}{:>14.4}{:>18.4}{:>9.2}%\n",
            r.algorithm,
            r.correct,
            r.incorrect,
            r.kappa,
            r.mae,
            r.rmse,
            r.accuracy * 100.0
        ));
    }
    out.push_str("\nWeighted average statistics\n");
    out.push_str(&format!(
        "{:<14}{:>9}{:>9}{:>11}{:>9}{:>11}{:>7}{:>10}{:>10}\n",
        "Classifier", "TP Rate", "FP Rate", "Precision", "Recall", "F-Measure", "MCC", "ROC Area",
        "PRC Area"
    ));
    for r in reports {
        let w = &r.weighted;
        out.push_str(&format!(
            "{:<14}{:>9.3}{:>9.3}{:>11.3}{:>9.3}{:>11.3}{:>7.3}{:>10.3}{:>10.3}\n",
            r.algorithm, w.tp_rate, w.fp_rate, w.precision, w.recall, w.f1, w.mcc, w.roc_area,
            w.prc_area
        ));
    }
    out
}
