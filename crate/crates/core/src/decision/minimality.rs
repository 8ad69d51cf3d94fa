//! Numerical check that the solved Gibbs distribution minimizes relative
//! entropy among distributions sharing its mean value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decision::gibbs::{gibbs_distribution, solve_rate, GibbsParams};
use crate::edist::{relative_entropy, EDistribution};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::valuation::ValueFunction;

/// Margins below this count as violations.
pub const MARGIN_FLOOR: f64 = -1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct MinimalityReport<T> {
    pub params: GibbsParams<T>,
    pub gibbs: EDistribution<T>,
    /// `H(p_gibbs || p*)`.
    pub gibbs_entropy: T,
    pub trials: usize,
    /// Smallest `H(q || p*) - H(p_gibbs || p*)` seen; `None` when no trial ran.
    pub worst_margin: Option<T>,
    /// Trials whose margin fell below [`MARGIN_FLOOR`].
    pub violations: usize,
}

impl<T: Scalar> MinimalityReport<T> {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Mixes `u` with a point mass at `anchor` so the mean value lands on `level`.
fn pin_mean(u: &mut [f64], values: &[f64], level: f64, low: usize, high: usize) {
    let mean: f64 = u.iter().zip(values).map(|(q, v)| q * v).sum();
    let anchor = if mean > level { low } else { high };
    let gap = mean - values[anchor];
    if gap == 0.0 {
        return;
    }
    let lambda = ((mean - level) / gap).clamp(0.0, 1.0);
    for q in u.iter_mut() {
        *q *= 1.0 - lambda;
    }
    u[anchor] += lambda;
}

/// A random distribution on `support` whose mean value is `level`.
///
/// Draws a Dirichlet(1) point on the support, pins its mean by mixing with the
/// minimizer or maximizer of `V`, then pulls it toward `center` by a random
/// amount (including tiny steps) so the neighborhood of the optimum is probed too.
fn feasible_sample(
    rng: &mut ChaCha8Rng,
    support: &[usize],
    values: &[f64],
    level: f64,
    center: &[f64],
) -> Vec<f64> {
    let k = support.len();
    let mut u: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = u.iter().sum();
    u.iter_mut().for_each(|q| *q /= total);
    let local_values: Vec<f64> = support.iter().map(|&x| values[x]).collect();
    let low = (0..k)
        .min_by(|&a, &b| local_values[a].total_cmp(&local_values[b]))
        .expect("nonempty support");
    let high = (0..k)
        .max_by(|&a, &b| local_values[a].total_cmp(&local_values[b]))
        .expect("nonempty support");
    pin_mean(&mut u, &local_values, level, low, high);

    let s = match rng.random_range(0..3) {
        0 => 1.0,
        1 => rng.random::<f64>(),
        _ => 10f64.powi(-rng.random_range(1..8)),
    };
    let mut q = vec![0.0; values.len()];
    for (i, &x) in support.iter().enumerate() {
        q[x] = (1.0 - s) * center[x] + s * u[i];
    }
    q
}

/// Solves the Gibbs distribution for `target` and compares its relative entropy
/// against `trials` random distributions with the same mean value on `p*`'s support.
pub fn verify_minimality<T: Scalar>(
    p_star: &EDistribution<T>,
    v: &ValueFunction<T>,
    target: T,
    tol: T,
    trials: usize,
    seed: u64,
) -> Result<MinimalityReport<T>> {
    let params = solve_rate(p_star, v, target, tol)?;
    let gibbs = gibbs_distribution(p_star, v, params.rate, params.branch)?;
    let gibbs_entropy = relative_entropy(&gibbs, p_star)?;

    let support: Vec<usize> = p_star.support().map(|x| x as usize).collect();
    let values: Vec<f64> = v.values().iter().map(|x| x.to_f64_lossy()).collect();
    let center: Vec<f64> = gibbs.probs().iter().map(|x| x.to_f64_lossy()).collect();
    // Competitors share the mean actually achieved by the Gibbs solution.
    let level = params.achieved_mean_value.to_f64_lossy();
    let floor = T::from_f64_lossy(MARGIN_FLOOR);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<T> = None;
    let mut violations = 0;
    for _ in 0..trials {
        let q = feasible_sample(&mut rng, &support, &values, level, &center);
        let q = EDistribution::new(
            p_star.family().clone(),
            q.into_iter().map(T::from_f64_lossy).collect(),
        )
        .map_err(|e| Error::Invalid(format!("constructed competitor is invalid: {e}")))?;
        let margin = relative_entropy(&q, p_star)? - gibbs_entropy;
        if margin < floor {
            violations += 1;
        }
        worst = Some(worst.map_or(margin, |w| w.min(margin)));
    }
    Ok(MinimalityReport {
        params,
        gibbs,
        gibbs_entropy,
        trials,
        worst_margin: worst,
        violations,
    })
}

/// Result of a grid scan over the feasible polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct GridScan {
    pub points: usize,
    /// Smallest relative entropy found among feasible grid points, with the point.
    pub best: Option<(f64, Vec<f64>)>,
}

/// Enumerates distributions `q` with `Σ q = 1` and `Σ q V = level` whose free
/// coordinates lie on a grid of the given step.
///
/// Two support coordinates with the most distant values absorb the two linear
/// constraints; every other support coordinate walks the grid. Requires a
/// support of at least two elements with distinct values.
pub fn grid_scan<T: Scalar>(p_star: &EDistribution<T>, v: &ValueFunction<T>, level: f64, step: f64) -> Result<GridScan> {
    p_star.family().ensure_same(v.family())?;
    let support: Vec<usize> = p_star.support().map(|x| x as usize).collect();
    let values: Vec<f64> = v.values().iter().map(|x| x.to_f64_lossy()).collect();
    let p: Vec<f64> = p_star.probs().iter().map(|x| x.to_f64_lossy()).collect();
    let mut pivots = None;
    let mut spread = 0.0;
    for (i, &a) in support.iter().enumerate() {
        for &b in &support[i + 1..] {
            let d = (values[a] - values[b]).abs();
            if d > spread {
                spread = d;
                pivots = Some((a, b));
            }
        }
    }
    let (a, b) = pivots.ok_or_else(|| Error::Invalid("grid scan needs two distinct values on the support".into()))?;
    let free: Vec<usize> = support.iter().copied().filter(|&x| x != a && x != b).collect();
    let steps = (1.0 / step).round() as usize;

    let mut scan = GridScan { points: 0, best: None };
    let mut q = vec![0.0; values.len()];
    let mut idx = vec![0usize; free.len()];
    loop {
        let used: usize = idx.iter().sum();
        if used <= steps {
            for (slot, &x) in free.iter().enumerate() {
                q[x] = idx[slot] as f64 * step;
            }
            let rest = 1.0 - free.iter().map(|&x| q[x]).sum::<f64>();
            let rest_mean = level - free.iter().map(|&x| q[x] * values[x]).sum::<f64>();
            let qa = (rest_mean - values[b] * rest) / (values[a] - values[b]);
            let qb = rest - qa;
            if qa >= -1e-12 && qb >= -1e-12 {
                q[a] = qa.max(0.0);
                q[b] = qb.max(0.0);
                let h: f64 = support
                    .iter()
                    .filter(|&&x| q[x] > 0.0)
                    .map(|&x| q[x] * (q[x] / p[x]).ln())
                    .sum();
                scan.points += 1;
                if scan.best.as_ref().is_none_or(|(bh, _)| h < *bh) {
                    scan.best = Some((h, q.clone()));
                }
            }
        }
        // odometer over the free coordinates
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Ok(scan);
            }
            idx[k] += 1;
            if idx[k] <= steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_algebra::EventFamily;

    fn instance() -> (EDistribution<f64>, ValueFunction<f64>) {
        let fam = EventFamily::new(["x1", "x2"]).unwrap();
        let v = ValueFunction::from_fn(&fam, |x| x.count_ones() as f64).unwrap();
        (EDistribution::uniform(&fam), v)
    }

    #[test]
    fn zero_trials_pass_vacuously() {
        let (p_star, v) = instance();
        let report = verify_minimality(&p_star, &v, 2.0 / 3.0, 1e-9, 0, 1).unwrap();
        assert!(report.passed());
        assert_eq!(report.worst_margin, None);
    }

    #[test]
    fn random_competitors_never_win() {
        let (p_star, v) = instance();
        let report = verify_minimality(&p_star, &v, 2.0 / 3.0, 1e-9, 1000, 7).unwrap();
        assert!(report.passed(), "worst margin {:?}", report.worst_margin);
        assert!(report.worst_margin.unwrap() >= MARGIN_FLOOR);
    }

    #[test]
    fn self_comparison_has_zero_margin() {
        let (p_star, v) = instance();
        let report = verify_minimality(&p_star, &v, 2.0 / 3.0, 1e-9, 0, 1).unwrap();
        let h = relative_entropy(&report.gibbs, &p_star).unwrap();
        assert_eq!(h - report.gibbs_entropy, 0.0);
    }

    #[test]
    fn grid_agrees_with_gibbs() {
        let (p_star, v) = instance();
        let report = verify_minimality(&p_star, &v, 2.0 / 3.0, 1e-12, 0, 1).unwrap();
        let scan = grid_scan(&p_star, &v, report.params.achieved_mean_value, 0.01).unwrap();
        let (best, _) = scan.best.unwrap();
        assert!(scan.points > 100);
        assert!(best >= report.gibbs_entropy - 1e-9);
        // the grid passes near the optimum
        assert!(best - report.gibbs_entropy < 1e-3);
    }

    #[test]
    fn infeasible_instances_error() {
        let (p_star, v) = instance();
        assert!(verify_minimality(&p_star, &v, 5.0, 1e-9, 10, 1).is_err());
    }
}
