//! Shared numeric helpers for the learners: entropy, Laplace smoothing,
//! the standard-normal quantile, and the pessimistic error bound used by
//! tree pruning.

/// Shannon entropy in bits of a weighted count vector.
pub fn entropy(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in counts {
        if c > 0.0 {
            let p = c / total;
            h -= p * p.log2();
        }
    }
    h
}

/// Laplace-smoothed probability vector: `(c_i + 1) / (sum + k)`.
pub fn laplace(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    let k = counts.len() as f64;
    counts.iter().map(|&c| (c + 1.0) / (total + k)).collect()
}

/// Index of the largest probability, first-wins on ties.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Inverse standard-normal CDF (Acklam's rational approximation,
/// absolute error below 1e-9 over (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -normal_quantile(1.0 - p)
    }
}

/// Pessimistic error count for a leaf: the normal-approximation upper
/// confidence bound on the observed error rate, scaled back to a count.
/// `confidence` is the pruning confidence (0.25 by default); smaller
/// values prune more aggressively.
pub fn pessimistic_errors(weight: f64, errors: f64, confidence: f64) -> f64 {
    if weight <= 0.0 {
        return 0.0;
    }
    let z = normal_quantile(1.0 - confidence);
    let f = (errors / weight).clamp(0.0, 1.0);
    let z2 = z * z;
    let ucb = (f + z2 / (2.0 * weight)
        + z * (f / weight - f * f / weight + z2 / (4.0 * weight * weight)).max(0.0).sqrt())
        / (1.0 + z2 / weight);
    weight * ucb.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_of_uniform_and_pure() {
        for k in 1..=8usize {
            let counts = vec![3.5; k];
            let h = entropy(&counts);
            assert!((h - (k as f64).log2()).abs() < 1e-12, "k={k} h={h}");
        }
        assert_eq!(entropy(&[5.0, 0.0, 0.0]), 0.0);
        assert_eq!(entropy(&[]), 0.0);
        assert_eq!(entropy(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn entropy_matches_direct_summation_oracle() {
        // Independent accumulation order and formula.
        let mut rng = crate::rng::Rng::new(5);
        for _ in 0..200 {
            let counts: Vec<f64> = (0..5).map(|_| rng.uniform(0.0, 10.0)).collect();
            let total: f64 = counts.iter().sum();
            let oracle: f64 = counts
                .iter()
                .filter(|&&c| c > 0.0)
                .map(|&c| -(c / total) * (c / total).ln() / std::f64::consts::LN_2)
                .sum();
            assert!((entropy(&counts) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn laplace_smoothing_arithmetic() {
        let probs = laplace(&[3.0, 0.0, 0.0]);
        assert_eq!(probs, vec![4.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_breaks_ties_by_declaration_order() {
        assert_eq!(argmax(&[0.25, 0.25, 0.25, 0.25]), 0);
        assert_eq!(argmax(&[0.1, 0.5, 0.4]), 1);
    }

    #[test]
    fn normal_quantile_reference_values() {
        assert!((normal_quantile(0.75) - 0.6744897501960817).abs() < 1e-6);
        assert!((normal_quantile(0.95) - 1.6448536269514722).abs() < 1e-6);
        assert!((normal_quantile(0.99) - 2.3263478740408408).abs() < 1e-6);
        assert!((normal_quantile(0.5)).abs() < 1e-9);
        assert!((normal_quantile(0.25) + normal_quantile(0.75)).abs() < 1e-9);
    }

    #[test]
    fn pessimistic_errors_bounds() {
        // Zero observed errors still yield a positive pessimistic count.
        let e = pessimistic_errors(10.0, 0.0, 0.25);
        assert!(e > 0.0 && e < 10.0);
        // More observed errors cannot lower the estimate.
        let e2 = pessimistic_errors(10.0, 3.0, 0.25);
        assert!(e2 > e);
        assert_eq!(pessimistic_errors(0.0, 0.0, 0.25), 0.0);
    }
}
