//! Entropy-based MDL discretization of numeric attributes: recursive
//! binary cuts, each accepted only when its information gain beats the
//! MDL acceptance criterion. Attributes with no accepted cut collapse to
//! a single bin.

use super::stats::entropy;

/// Interior cut points (ascending) for `(value, class)` pairs.
pub fn mdl_cuts(pairs: &[(f64, usize)], num_classes: usize) -> Vec<f64> {
    let mut sorted: Vec<(f64, usize)> = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut cuts = Vec::new();
    recurse(&sorted, num_classes, &mut cuts);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts
}

fn recurse(sorted: &[(f64, usize)], num_classes: usize, cuts: &mut Vec<f64>) {
    let n = sorted.len();
    if n < 2 {
        return;
    }
    let mut total = vec![0.0f64; num_classes];
    for &(_, c) in sorted {
        total[c] += 1.0;
    }
    let h_total = entropy(&total);
    if h_total == 0.0 {
        return;
    }

    // Best cut between consecutive distinct values by information gain.
    let mut left = vec![0.0f64; num_classes];
    let mut best: Option<(usize, f64, f64)> = None; // (split index, cut, gain)
    for i in 0..n - 1 {
        left[sorted[i].1] += 1.0;
        if sorted[i + 1].0 <= sorted[i].0 {
            continue;
        }
        let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let nl = (i + 1) as f64;
        let nr = (n - i - 1) as f64;
        let info = (nl * entropy(&left) + nr * entropy(&right)) / n as f64;
        let gain = h_total - info;
        if best.map_or(true, |(_, _, g)| gain > g + 1e-12) {
            let cut = (sorted[i].0 + sorted[i + 1].0) / 2.0;
            best = Some((i + 1, cut, gain));
        }
    }
    let Some((split, cut, gain)) = best else {
        return;
    };

    // MDL acceptance: gain must exceed
    // (log2(n-1) + log2(3^k - 2) - (k*H(S) - k1*H(S1) - k2*H(S2))) / n.
    let (s1, s2) = sorted.split_at(split);
    let mut c1 = vec![0.0f64; num_classes];
    let mut c2 = vec![0.0f64; num_classes];
    for &(_, c) in s1 {
        c1[c] += 1.0;
    }
    for &(_, c) in s2 {
        c2[c] += 1.0;
    }
    let k = total.iter().filter(|&&c| c > 0.0).count() as f64;
    let k1 = c1.iter().filter(|&&c| c > 0.0).count() as f64;
    let k2 = c2.iter().filter(|&&c| c > 0.0).count() as f64;
    let delta = (3f64.powf(k) - 2.0).log2()
        - (k * h_total - k1 * entropy(&c1) - k2 * entropy(&c2));
    let threshold = (((n - 1) as f64).log2() + delta) / n as f64;
    if gain <= threshold {
        return;
    }

    cuts.push(cut);
    recurse(s1, num_classes, cuts);
    recurse(s2, num_classes, cuts);
}

/// Bin index of a value under ascending cut points.
pub fn bin_of(cuts: &[f64], value: f64) -> usize {
    cuts.iter().take_while(|&&c| value > c).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_boundary_is_found() {
        let pairs: Vec<(f64, usize)> = (0..40)
            .map(|i| (i as f64, usize::from(i >= 20)))
            .collect();
        let cuts = mdl_cuts(&pairs, 2);
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0], 19.5);
    }

    #[test]
    fn pure_or_constant_data_has_no_cuts() {
        let pure: Vec<(f64, usize)> = (0..20).map(|i| (i as f64, 0)).collect();
        assert!(mdl_cuts(&pure, 2).is_empty());
        let constant: Vec<(f64, usize)> = (0..20).map(|i| (5.0, i % 2)).collect();
        assert!(mdl_cuts(&constant, 2).is_empty());
        assert!(mdl_cuts(&[], 2).is_empty());
        assert!(mdl_cuts(&[(1.0, 0)], 2).is_empty());
    }

    #[test]
    fn random_labels_are_rejected() {
        // Signal-free data must not accumulate cuts.
        let mut rng = crate::rng::Rng::new(3);
        let pairs: Vec<(f64, usize)> = (0..300)
            .map(|_| (rng.uniform(0.0, 100.0), (rng.next_u64() % 2) as usize))
            .collect();
        let cuts = mdl_cuts(&pairs, 2);
        assert!(cuts.len() <= 2, "spurious cuts: {cuts:?}");
    }

    #[test]
    fn three_band_signal_recovers_two_cuts() {
        let mut pairs = Vec::new();
        for i in 0..30 {
            pairs.push((i as f64 * 0.05, 0)); // [0, 1.5)
            pairs.push((2.0 + i as f64 * 0.05, 1)); // [2, 3.5)
            pairs.push((4.0 + i as f64 * 0.05, 2)); // [4, 5.5)
        }
        let cuts = mdl_cuts(&pairs, 3);
        assert_eq!(cuts.len(), 2, "{cuts:?}");
        assert!(cuts[0] > 1.4 && cuts[0] < 2.1);
        assert!(cuts[1] > 3.4 && cuts[1] < 4.1);
    }

    #[test]
    fn bin_of_maps_values_to_intervals() {
        let cuts = vec![2.0, 4.0];
        assert_eq!(bin_of(&cuts, 1.0), 0);
        assert_eq!(bin_of(&cuts, 2.0), 0);
        assert_eq!(bin_of(&cuts, 3.0), 1);
        assert_eq!(bin_of(&cuts, 4.5), 2);
        assert_eq!(bin_of(&[], 10.0), 0);
    }
}
