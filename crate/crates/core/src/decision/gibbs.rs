//! Gibbsean and antiGibbsean reweighting of an own distribution, and the
//! rate solver that pins the mean value of the result.
//!
//! For a reference distribution `p*` and a bounded set-function `V`, the
//! family `p_r(X) ∝ exp(∓r V(X)) p*(X)` minimizes relative entropy to `p*`
//! among all distributions with the same mean value. The mean is monotone
//! in `r`, so a target mean is reached by bisection on the rate.

use serde::{Deserialize, Serialize};

use crate::edist::EDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::valuation::ValueFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Weights `exp(-β V)`: pulls the mean value down.
    Gibbsean,
    /// Weights `exp(+γ V)`: pushes the mean value up.
    Antigibbsean,
}

impl Branch {
    fn sign<T: Scalar>(self) -> T {
        match self {
            Branch::Gibbsean => -T::one(),
            Branch::Antigibbsean => T::one(),
        }
    }
}

/// Solved parameters of a Gibbs-family member.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsParams<T> {
    pub branch: Branch,
    /// `β` for the Gibbsean branch, `γ` for the antiGibbsean one.
    pub rate: T,
    pub target_mean_value: T,
    pub achieved_mean_value: T,
    /// `Z = Σ_X exp(∓rate V(X)) p*(X)`; may overflow to infinity at extreme rates.
    pub normalizer: T,
    pub tolerance: T,
    pub iterations: usize,
}

impl<T: Scalar> GibbsParams<T> {
    /// The exponent coefficient `α` with `p ∝ exp(α V) p*`.
    pub fn signed_rate(&self) -> T {
        self.branch.sign::<T>() * self.rate
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MAX_BISECTION_ITERATIONS: usize = 200;
/// Upper bound for the bracketing search on the rate.
pub const RATE_CAP: f64 = 1_099_511_627_776.0; // 2^40

/// `⟨V⟩ = Σ_X p(X) V(X)`.
pub fn expected_value<T: Scalar>(p: &EDistribution<T>, v: &ValueFunction<T>) -> Result<T> {
    p.family().ensure_same(v.family())?;
    Ok(p
        .probs()
        .iter()
        .zip(v.values())
        .filter(|(px, _)| **px > T::zero())
        .fold(T::zero(), |acc, (&px, &vx)| acc + px * vx))
}

/// Unnormalized log-weights on the support of `p*`, shifted so the largest is zero.
fn shifted_weights<T: Scalar>(p_star: &EDistribution<T>, v: &ValueFunction<T>, rate: T, branch: Branch) -> (Vec<T>, T) {
    let sign = branch.sign::<T>();
    let exponent = |x: usize| sign * rate * v.values()[x];
    let max = p_star
        .support()
        .map(|x| exponent(x as usize))
        .fold(T::neg_infinity(), T::max);
    let weights = p_star
        .probs()
        .iter()
        .enumerate()
        .map(|(x, &p)| {
            if p > T::zero() {
                (exponent(x) - max).exp() * p
            } else {
                T::zero()
            }
        })
        .collect();
    (weights, max)
}

fn check_inputs<T: Scalar>(p_star: &EDistribution<T>, v: &ValueFunction<T>, rate: T) -> Result<()> {
    p_star.family().ensure_same(v.family())?;
    if !(rate >= T::zero()) || !rate.is_finite() {
        return Err(Error::Invalid(format!("rate must be finite and nonnegative, got {rate}")));
    }
    Ok(())
}

/// `p(X) = exp(∓rate V(X)) p*(X) / Z`. Zeros of `p*` stay zeros.
pub fn gibbs_distribution<T: Scalar>(
    p_star: &EDistribution<T>,
    v: &ValueFunction<T>,
    rate: T,
    branch: Branch,
) -> Result<EDistribution<T>> {
    check_inputs(p_star, v, rate)?;
    if rate == T::zero() {
        return Ok(p_star.clone());
    }
    let (weights, _) = shifted_weights(p_star, v, rate, branch);
    let z: T = weights.iter().copied().sum();
    if !(z > T::zero()) {
        return Err(Error::ZeroNormalizer);
    }
    EDistribution::new(
        p_star.family().clone(),
        weights.into_iter().map(|w| w / z).collect(),
    )
}

/// The normalizer `Z` of [`gibbs_distribution`].
pub fn gibbs_normalizer<T: Scalar>(p_star: &EDistribution<T>, v: &ValueFunction<T>, rate: T, branch: Branch) -> Result<T> {
    check_inputs(p_star, v, rate)?;
    let (weights, shift) = shifted_weights(p_star, v, rate, branch);
    let z: T = weights.iter().copied().sum();
    if !(z > T::zero()) {
        return Err(Error::ZeroNormalizer);
    }
    Ok(z * shift.exp())
}

/// Range `[min V, max V]` over the support of `p*`.
pub fn attainable_interval<T: Scalar>(p_star: &EDistribution<T>, v: &ValueFunction<T>) -> Result<(T, T)> {
    p_star.family().ensure_same(v.family())?;
    Ok(p_star
        .support()
        .map(|x| v.value(x))
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), vx| (lo.min(vx), hi.max(vx))))
}

fn params<T: Scalar>(
    p_star: &EDistribution<T>,
    v: &ValueFunction<T>,
    branch: Branch,
    rate: T,
    target: T,
    tol: T,
    iterations: usize,
) -> Result<GibbsParams<T>> {
    let p = gibbs_distribution(p_star, v, rate, branch)?;
    Ok(GibbsParams {
        branch,
        rate,
        target_mean_value: target,
        achieved_mean_value: expected_value(&p, v)?,
        normalizer: gibbs_normalizer(p_star, v, rate, branch)?,
        tolerance: tol,
        iterations,
    })
}

/// Finds the branch and rate whose Gibbs distribution has mean value `target` within `tol`.
///
/// The branch follows the side of `target` relative to `E_{p*}[V]`. The rate is
/// bracketed by doubling (capped at 2^40) and then bisected.
pub fn solve_rate<T: Scalar>(
    p_star: &EDistribution<T>,
    v: &ValueFunction<T>,
    target: T,
    tol: T,
) -> Result<GibbsParams<T>> {
    if !(tol > T::zero()) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !target.is_finite() {
        return Err(Error::Invalid(format!("target mean value must be finite, got {target}")));
    }
    let (min, max) = attainable_interval(p_star, v)?;
    if target < min - tol || target > max + tol {
        return Err(Error::InfeasibleTarget {
            target: target.to_f64_lossy(),
            min: min.to_f64_lossy(),
            max: max.to_f64_lossy(),
        });
    }
    let base = expected_value(p_star, v)?;
    if (target - base).abs() <= tol {
        return params(p_star, v, Branch::Gibbsean, T::zero(), target, tol, 0);
    }
    let branch = if target < base {
        Branch::Gibbsean
    } else {
        Branch::Antigibbsean
    };
    let cap = T::from_f64_lossy(RATE_CAP);
    // The extreme itself is only reached as the rate diverges.
    let extreme = if branch == Branch::Gibbsean { min } else { max };
    if target == extreme {
        let p = gibbs_distribution(p_star, v, cap, branch)?;
        return Err(Error::LimitOnly {
            target: target.to_f64_lossy(),
            cap: RATE_CAP,
            residual: (expected_value(&p, v)? - target).abs().to_f64_lossy(),
        });
    }
    let mean_at = |rate: T| -> Result<T> { expected_value(&gibbs_distribution(p_star, v, rate, branch)?, v) };
    // Signed distance past the target in the direction the branch moves the mean.
    let overshoot = |mean: T| match branch {
        Branch::Gibbsean => target - mean,
        Branch::Antigibbsean => mean - target,
    };

    let mut lo = T::zero();
    let mut hi = T::one();
    let mut iterations = 0;
    loop {
        let mean = mean_at(hi)?;
        iterations += 1;
        if (mean - target).abs() <= tol {
            return params(p_star, v, branch, hi, target, tol, iterations);
        }
        if overshoot(mean) > T::zero() {
            break;
        }
        lo = hi;
        hi = hi + hi;
        if hi > cap {
            return Err(Error::LimitOnly {
                target: target.to_f64_lossy(),
                cap: RATE_CAP,
                residual: (mean - target).abs().to_f64_lossy(),
            });
        }
    }

    let two = T::one() + T::one();
    let mut best = (T::infinity(), hi);
    for _ in 0..MAX_BISECTION_ITERATIONS {
        let mid = (lo + hi) / two;
        let mean = mean_at(mid)?;
        iterations += 1;
        let residual = (mean - target).abs();
        if residual < best.0 {
            best = (residual, mid);
        }
        if residual <= tol {
            return params(p_star, v, branch, mid, target, tol, iterations);
        }
        if overshoot(mean) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    Err(Error::NoConvergence {
        residual: best.0.to_f64_lossy(),
        iterations,
    })
}
