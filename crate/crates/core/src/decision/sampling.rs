use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::event_algebra::{EventFamily, EventSet};
use crate::scalar::Scalar;

fn check_row<T: Scalar>(family: &EventFamily, row: &[T]) -> Result<()> {
    if row.len() != family.subset_count() {
        return Err(Error::LengthMismatch {
            left: row.len(),
            right: family.subset_count(),
        });
    }
    if let Some((m, p)) = row.iter().enumerate().find(|(_, p)| !(**p >= T::zero())) {
        return Err(Error::NegativeProbability {
            mask: m as u32,
            value: p.to_f64_lossy(),
        });
    }
    let sum: T = row.iter().copied().sum();
    if (sum - T::one()).abs() > T::tolerance() {
        return Err(Error::NotNormalized { sum: sum.to_f64_lossy() });
    }
    Ok(())
}

/// Most probable decision mask; ties go to the lowest mask.
pub fn mode_decision<T: Scalar>(row: &[T]) -> u32 {
    let mut best = 0;
    for (m, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = m;
        }
    }
    best as u32
}

/// Inverse-CDF draw over ascending masks from a ChaCha8 stream seeded with `seed`.
pub fn sample_decision<T: Scalar>(family: &EventFamily, row: &[T], seed: u64) -> Result<EventSet> {
    check_row(family, row)?;
    let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (m, p) in row.iter().enumerate() {
        let p = p.to_f64_lossy();
        if p <= 0.0 {
            continue;
        }
        last_positive = m;
        cumulative += p;
        if u < cumulative {
            return family.set(m as u32);
        }
    }
    // rounding left the cumulative sum just under u
    family.set(last_positive as u32)
}
