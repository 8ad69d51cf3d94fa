//! Probability vectors over subset lattices.
//!
//! Every distribution here is dense: an [`EDistribution`] over a family of `n`
//! events holds `2^n` probabilities indexed by subset mask. Estimation counts
//! in integers and divides once, so small samples reproduce exactly.

use crate::error::{Error, Result};
use crate::event_algebra::{EventFamily, EventSet, JointLayout, PolicyMap};
use crate::scalar::Scalar;

fn check_normalized<T: Scalar>(probs: &[T]) -> Result<()> {
    for (mask, &p) in probs.iter().enumerate() {
        if !(p >= T::zero()) || !p.is_finite() {
            return Err(Error::NegativeProbability {
                mask: mask as u32,
                value: p.to_f64_lossy(),
            });
        }
    }
    let sum: T = probs.iter().copied().sum();
    if (sum - T::one()).abs() > T::tolerance() {
        return Err(Error::NotNormalized {
            sum: sum.to_f64_lossy(),
        });
    }
    Ok(())
}

/// A probability for every subset of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct EDistribution<T> {
    family: EventFamily,
    probs: Vec<T>,
}

impl<T: Scalar> EDistribution<T> {
    pub fn new(family: EventFamily, probs: Vec<T>) -> Result<Self> {
        if probs.len() != family.subset_count() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: family.subset_count(),
            });
        }
        check_normalized(&probs)?;
        Ok(Self { family, probs })
    }

    pub fn point_mass(family: &EventFamily, mask: u32) -> Result<Self> {
        family.check_mask(mask)?;
        let mut probs = vec![T::zero(); family.subset_count()];
        probs[mask as usize] = T::one();
        Ok(Self {
            family: family.clone(),
            probs,
        })
    }

    pub fn uniform(family: &EventFamily) -> Self {
        let n = family.subset_count();
        Self {
            family: family.clone(),
            probs: vec![T::one() / T::from_usize_lossy(n); n],
        }
    }

    /// Normalizes nonnegative counts. Fails if every count is zero.
    pub fn from_counts(family: &EventFamily, counts: &[u64]) -> Result<Self> {
        if counts.len() != family.subset_count() {
            return Err(Error::LengthMismatch {
                left: counts.len(),
                right: family.subset_count(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptySeries);
        }
        let total = T::from_u64(total).expect("count fits the scalar");
        Ok(Self {
            family: family.clone(),
            probs: counts
                .iter()
                .map(|&c| T::from_u64(c).expect("count fits the scalar") / total)
                .collect(),
        })
    }

    pub fn family(&self) -> &EventFamily {
        &self.family
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, mask: u32) -> T {
        self.probs[mask as usize]
    }

    /// Masks with positive probability, ascending.
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > T::zero())
            .map(|(m, _)| m as u32)
    }

    pub fn into_probs(self) -> Vec<T> {
        self.probs
    }
}

/// Occurrence counts of each mask in `masks`.
pub fn count_masks(family: &EventFamily, masks: &[u32]) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; family.subset_count()];
    for &m in masks {
        family.check_mask(m)?;
        counts[m as usize] += 1;
    }
    Ok(counts)
}

/// Empirical frequencies of the observed sets.
pub fn estimate_edist<T: Scalar>(series: &[EventSet]) -> Result<EDistribution<T>> {
    let family = series.first().ok_or(Error::EmptySeries)?.family().clone();
    let mut masks = Vec::with_capacity(series.len());
    for s in series {
        family.ensure_same(s.family())?;
        masks.push(s.bits());
    }
    EDistribution::from_counts(&family, &count_masks(&family, &masks)?)
}

/// Matrix `π(D, F)` of joint probabilities, one row per decision mask.
#[derive(Clone, Debug, PartialEq)]
pub struct JointEDistribution<T> {
    decisions: EventFamily,
    circumstances: EventFamily,
    probs: Vec<T>,
}

impl<T: Scalar> JointEDistribution<T> {
    /// `probs` is row-major: index `d * 2^|F| + f`.
    pub fn new(decisions: EventFamily, circumstances: EventFamily, probs: Vec<T>) -> Result<Self> {
        let expected = decisions.subset_count() * circumstances.subset_count();
        if probs.len() != expected {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: expected,
            });
        }
        check_normalized(&probs)?;
        Ok(Self {
            decisions,
            circumstances,
            probs,
        })
    }

    /// Reads a distribution over the joint family `D + F` as a matrix.
    pub fn from_joint_edist(layout: &JointLayout, p: &EDistribution<T>) -> Result<Self> {
        layout.joint().ensure_same(p.family())?;
        let cols = layout.circumstances().subset_count();
        let mut probs = vec![T::zero(); layout.decisions().subset_count() * cols];
        for (x, &px) in p.probs().iter().enumerate() {
            let (d, f) = layout.split(x as u32);
            probs[d as usize * cols + f as usize] = px;
        }
        Self::new(layout.decisions().clone(), layout.circumstances().clone(), probs)
    }

    pub fn to_joint_edist(&self, layout: &JointLayout) -> Result<EDistribution<T>> {
        layout.decisions().ensure_same(&self.decisions)?;
        layout.circumstances().ensure_same(&self.circumstances)?;
        let mut probs = vec![T::zero(); layout.joint().subset_count()];
        for d in 0..self.decisions.subset_count() as u32 {
            for f in 0..self.circumstances.subset_count() as u32 {
                probs[layout.combine(d, f) as usize] = self.prob(d, f);
            }
        }
        EDistribution::new(layout.joint().clone(), probs)
    }

    pub fn decision_family(&self) -> &EventFamily {
        &self.decisions
    }

    pub fn circumstance_family(&self) -> &EventFamily {
        &self.circumstances
    }

    pub fn prob(&self, d: u32, f: u32) -> T {
        self.probs[d as usize * self.circumstances.subset_count() + f as usize]
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

pub fn estimate_joint<T: Scalar>(
    decision_series: &[EventSet],
    circumstance_series: &[EventSet],
) -> Result<JointEDistribution<T>> {
    if decision_series.len() != circumstance_series.len() {
        return Err(Error::LengthMismatch {
            left: decision_series.len(),
            right: circumstance_series.len(),
        });
    }
    let decisions = decision_series.first().ok_or(Error::EmptySeries)?.family().clone();
    let circumstances = circumstance_series[0].family().clone();
    let cols = circumstances.subset_count();
    let mut counts = vec![0u64; decisions.subset_count() * cols];
    for (d, f) in decision_series.iter().zip(circumstance_series) {
        decisions.ensure_same(d.family())?;
        circumstances.ensure_same(f.family())?;
        counts[d.bits() as usize * cols + f.bits() as usize] += 1;
    }
    let total = T::from_usize_lossy(decision_series.len());
    let probs = counts
        .iter()
        .map(|&c| T::from_u64(c).expect("count fits the scalar") / total)
        .collect();
    JointEDistribution::new(decisions, circumstances, probs)
}

/// Which family a marginal is taken onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Decisions,
    Circumstances,
}

/// Marginal distribution onto `axis`, summing out the other family.
pub fn marginalize<T: Scalar>(joint: &JointEDistribution<T>, axis: Axis) -> EDistribution<T> {
    let rows = joint.decisions.subset_count();
    let cols = joint.circumstances.subset_count();
    let (family, probs) = match axis {
        Axis::Decisions => (
            joint.decisions.clone(),
            (0..rows)
                .map(|d| joint.probs[d * cols..(d + 1) * cols].iter().copied().sum())
                .collect(),
        ),
        Axis::Circumstances => (
            joint.circumstances.clone(),
            (0..cols)
                .map(|f| (0..rows).map(|d| joint.probs[d * cols + f]).sum())
                .collect(),
        ),
    };
    EDistribution { family, probs }
}

/// Rows `q(D|F)`; a row is undefined where the circumstance set has zero probability.
///
/// Stored flat, row-major by `F`; undefined rows hold zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalEDistribution<T> {
    decisions: EventFamily,
    circumstances: EventFamily,
    probs: Vec<T>,
    defined: Vec<bool>,
}

impl<T: Scalar> ConditionalEDistribution<T> {
    pub fn new(
        decisions: EventFamily,
        circumstances: EventFamily,
        rows: Vec<Option<Vec<T>>>,
    ) -> Result<Self> {
        if rows.len() != circumstances.subset_count() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: circumstances.subset_count(),
            });
        }
        let width = decisions.subset_count();
        let mut probs = Vec::with_capacity(rows.len() * width);
        let mut defined = Vec::with_capacity(rows.len());
        for row in &rows {
            match row {
                Some(row) => {
                    if row.len() != width {
                        return Err(Error::LengthMismatch {
                            left: row.len(),
                            right: width,
                        });
                    }
                    check_normalized(row)?;
                    probs.extend_from_slice(row);
                }
                None => probs.resize(probs.len() + width, T::zero()),
            }
            defined.push(row.is_some());
        }
        Ok(Self {
            decisions,
            circumstances,
            probs,
            defined,
        })
    }

    /// Point-mass rows `δ(D, policy(F))` for every `F`.
    pub fn singular(policy: &PolicyMap) -> Self {
        let decisions = policy.decision_family().clone();
        let width = decisions.subset_count();
        let map = policy.as_slice();
        let mut probs = vec![T::zero(); map.len() * width];
        for (f, &d) in map.iter().enumerate() {
            probs[f * width + d as usize] = T::one();
        }
        Self {
            decisions,
            circumstances: policy.circumstance_family().clone(),
            probs,
            defined: vec![true; map.len()],
        }
    }

    pub fn decision_family(&self) -> &EventFamily {
        &self.decisions
    }

    pub fn circumstance_family(&self) -> &EventFamily {
        &self.circumstances
    }

    pub fn row(&self, f: u32) -> Option<&[T]> {
        let f = f as usize;
        let width = self.decisions.subset_count();
        self.defined[f].then(|| &self.probs[f * width..(f + 1) * width])
    }

    /// Every row in ascending `F` order.
    pub fn rows(&self) -> impl Iterator<Item = Option<&[T]>> + '_ {
        (0..self.defined.len() as u32).map(|f| self.row(f))
    }

    /// Circumstance masks with a defined row.
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.defined
            .iter()
            .enumerate()
            .filter(|(_, d)| **d)
            .map(|(f, _)| f as u32)
    }
}

/// `q(D|F) = π(D,F) / p(F)` wherever `p(F) > 0`.
pub fn conditional<T: Scalar>(joint: &JointEDistribution<T>) -> ConditionalEDistribution<T> {
    let p = marginalize(joint, Axis::Circumstances);
    let width = joint.decisions.subset_count();
    let n_f = joint.circumstances.subset_count();
    let mut probs = vec![T::zero(); n_f * width];
    let mut defined = vec![false; n_f];
    for f in 0..n_f {
        let pf = p.prob(f as u32);
        if pf > T::zero() {
            defined[f] = true;
            for d in 0..width {
                probs[f * width + d] = joint.prob(d as u32, f as u32) / pf;
            }
        }
    }
    ConditionalEDistribution {
        decisions: joint.decisions.clone(),
        circumstances: joint.circumstances.clone(),
        probs,
        defined,
    }
}

/// Decision distribution induced by applying `policy` to circumstances drawn from `p`.
pub fn pushforward_policy<T: Scalar>(p: &EDistribution<T>, policy: &PolicyMap) -> Result<EDistribution<T>> {
    policy.circumstance_family().ensure_same(&p.family)?;
    let decisions = policy.decision_family();
    let mut q = vec![T::zero(); decisions.subset_count()];
    for (f, &pf) in p.probs.iter().enumerate() {
        q[policy.decision_for(f as u32) as usize] = q[policy.decision_for(f as u32) as usize] + pf;
    }
    Ok(EDistribution {
        family: decisions.clone(),
        probs: q,
    })
}

/// `q(D) = Σ_F q(D|F) p(F)`.
pub fn compose_full_probability<T: Scalar>(
    cond: &ConditionalEDistribution<T>,
    p: &EDistribution<T>,
) -> Result<EDistribution<T>> {
    cond.circumstances.ensure_same(&p.family)?;
    let mut q = vec![T::zero(); cond.decisions.subset_count()];
    for (f, &pf) in p.probs.iter().enumerate() {
        if pf == T::zero() {
            continue;
        }
        let row = cond
            .row(f as u32)
            .ok_or(Error::UnmodeledCircumstance { mask: f as u32 })?;
        for (qd, &r) in q.iter_mut().zip(row) {
            *qd = *qd + r * pf;
        }
    }
    Ok(EDistribution {
        family: cond.decisions.clone(),
        probs: q,
    })
}

/// `Σ_X p(X) ln(p(X) / p*(X))`, with `0 ln 0 = 0`.
pub fn relative_entropy<T: Scalar>(p: &EDistribution<T>, p_star: &EDistribution<T>) -> Result<T> {
    p.family.ensure_same(&p_star.family)?;
    let mut h = T::zero();
    for (x, (&px, &qx)) in p.probs.iter().zip(&p_star.probs).enumerate() {
        if px > T::zero() {
            if qx <= T::zero() {
                return Err(Error::AbsoluteContinuity { mask: x as u32 });
            }
            h = h + px * (px / qx).ln();
        }
    }
    Ok(h.max(T::zero()))
}
