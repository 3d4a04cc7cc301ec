//! Pairwise permutation tests with Holm adjustment, and a uniformity check
//! for calibrating them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseResult {
    pub a: String,
    pub b: String,
    /// mean(a) - mean(b).
    pub mean_diff: f64,
    /// Two-sided permutation p-value, `None` when either group has n < 2.
    pub p: Option<f64>,
    pub p_holm: Option<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Two-sided permutation test on the absolute difference of means.
///
/// Returns `(1 + #{|d*| >= |d|}) / (1 + permutations)`.
pub fn permutation_p(a: &[f64], b: &[f64], permutations: usize, seed: u64) -> f64 {
    let observed = (mean(a) - mean(b)).abs();
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let total: f64 = pooled.iter().sum();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Tolerance so that relabelings equal to the observed split count as ties.
    let tol = 1e-12 * (1.0 + observed);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        let (head, _) = pooled.partial_shuffle(&mut rng, a.len());
        let sa: f64 = head.iter().sum();
        let d = (sa / na - (total - sa) / nb).abs();
        if d >= observed - tol {
            extreme += 1;
        }
    }
    (1 + extreme) as f64 / (1 + permutations) as f64
}

/// Holm step-down adjustment; `None` entries are skipped and stay `None`.
pub fn holm_adjust(p: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i].is_some()).collect();
    order.sort_by(|&i, &j| p[i].unwrap().total_cmp(&p[j].unwrap()));
    let m = order.len();
    let mut out = vec![None; p.len()];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let adj = ((m - rank) as f64 * p[i].unwrap()).min(1.0);
        running = running.max(adj);
        out[i] = Some(running);
    }
    out
}

/// All pairwise comparisons in input order `(0,1), (0,2), ..., (k-2,k-1)`.
///
/// Each pair draws its permutations from its own stream derived from `seed`.
pub fn pairwise_comparisons(
    groups: &[(String, Vec<f64>)],
    permutations: usize,
    seed: u64,
) -> Vec<PairwiseResult> {
    let mut results = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (la, a) = &groups[i];
            let (lb, b) = &groups[j];
            let valid = a.len() >= 2 && b.len() >= 2;
            let pair_seed = seed ^ ((i as u64) << 32 | j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            results.push(PairwiseResult {
                a: la.clone(),
                b: lb.clone(),
                mean_diff: if valid { mean(a) - mean(b) } else { f64::NAN },
                p: valid.then(|| permutation_p(a, b, permutations, pair_seed)),
                p_holm: None,
            });
        }
    }
    let raw: Vec<Option<f64>> = results.iter().map(|r| r.p).collect();
    for (r, adj) in results.iter_mut().zip(holm_adjust(&raw)) {
        r.p_holm = adj;
    }
    results
}

/// One-sample Kolmogorov–Smirnov test against Uniform(0, 1).
///
/// Returns the statistic D and its asymptotic p-value.
pub fn ks_uniform(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let x = x.clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - x).max(x - i as f64 / n);
    }
    let sq = n.sqrt();
    (d, kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d))
}

/// P(K > lambda) for the Kolmogorov distribution.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_groups_are_not_significant() {
        let a = vec![0.1, 0.2, 0.3, 0.4, 0.5];
        let groups = vec![("a".to_string(), a.clone()), ("b".to_string(), a)];
        let r = pairwise_comparisons(&groups, 2000, 1);
        assert_eq!(r[0].p, Some(1.0));
        assert_eq!(r[0].p_holm, Some(1.0));
    }

    #[test]
    fn separated_groups_are_significant() {
        // Means 10 pooled sds apart, n = 10 each.
        let a: Vec<f64> = (0..10).map(|i| (i as f64 - 4.5) * 0.1).collect();
        let sd = sample_sd(&a);
        let b: Vec<f64> = a.iter().map(|x| x + 10.0 * sd).collect();
        let groups = vec![("a".into(), a), ("b".into(), b), ("c".into(), vec![0.0; 10])];
        let r = pairwise_comparisons(&groups, DEFAULT_PERMUTATIONS, 7);
        assert!(r[0].p_holm.unwrap() <= 0.001, "{:?}", r[0]);
    }

    fn sample_sd(v: &[f64]) -> f64 {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
    }

    #[test]
    fn small_groups_are_missing() {
        let groups = vec![("a".into(), vec![1.0, 2.0]), ("b".into(), vec![3.0])];
        let r = pairwise_comparisons(&groups, 100, 1);
        assert_eq!(r[0].p, None);
        assert_eq!(r[0].p_holm, None);
    }

    #[test]
    fn holm_matches_hand_computation() {
        let p = [Some(0.01), Some(0.04), None, Some(0.03), Some(0.2)];
        let adj = holm_adjust(&p);
        // Sorted: 0.01*4, 0.03*3, 0.04*2, 0.2*1 with running maximum.
        assert_eq!(adj[0], Some(0.04));
        assert!((adj[3].unwrap() - 0.09).abs() < 1e-15);
        assert!((adj[1].unwrap() - 0.09).abs() < 1e-15);
        assert_eq!(adj[2], None);
        assert!((adj[4].unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn permutation_is_deterministic_under_seed() {
        let a = [0.3, 0.5, 0.2, 0.6];
        let b = [0.1, 0.4, 0.0, 0.2];
        assert_eq!(permutation_p(&a, &b, 500, 9), permutation_p(&a, &b, 500, 9));
    }

    #[test]
    fn ks_detects_non_uniform_and_accepts_grid() {
        let grid: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) / 200.0).collect();
        assert!(ks_uniform(&grid).1 > 0.99);
        let squeezed: Vec<f64> = grid.iter().map(|x| x * x).collect();
        assert!(ks_uniform(&squeezed).1 < 1e-6);
        // Tabulated: lambda = 1.36 gives a tail of about 0.049.
        assert!((kolmogorov_tail(1.36) - 0.0494).abs() < 1e-3);
    }
}
