//! Stratified fold splitting for cross-validation.

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Split row indices into `k` disjoint folds preserving class proportions:
/// per-class counts across folds differ by at most one. Deterministic for
/// a fixed seed.
pub fn stratified_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if dataset.class_index.is_none() {
        return Err(Error::usage("stratified folds require a class attribute"));
    }
    if k < 2 {
        return Err(Error::usage("fold count must be at least 2"));
    }
    if k > dataset.len() {
        return Err(Error::usage(format!(
            "fold count {k} exceeds the {} available instances",
            dataset.len()
        )));
    }

    let num_classes = dataset.num_classes()?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for row in 0..dataset.len() {
        match dataset.class_of(row) {
            Some(c) => by_class[c].push(row),
            None => {
                return Err(Error::data(format!("row {row} has a missing class value")));
            }
        }
    }

    let mut rng = Rng::new(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    // Deal each class round-robin after shuffling; rotate the starting
    // fold per class so small classes do not pile onto fold 0.
    let mut start = 0usize;
    for indices in by_class.iter_mut() {
        rng.shuffle(indices);
        for (i, &row) in indices.iter().enumerate() {
            folds[(start + i) % k].push(row);
        }
        start = (start + indices.len()) % k;
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(folds)
}
