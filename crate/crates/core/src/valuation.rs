//! Value matrices estimated from price history.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::event_algebra::{EventFamily, EventSet, JointLayout};
use crate::market::{CircumstanceSeries, MarketDataset};
use crate::scalar::{exact_to_scalar, Exact, Scalar};

/// Labels of the decision doublet: bit 0 sells, bit 1 buys.
pub const DECISION_LABELS: [&str; 2] = ["d_plus", "d_minus"];

pub const SELL: u32 = 0b01;
pub const BUY: u32 = 0b10;

pub fn decision_family() -> EventFamily {
    EventFamily::new(DECISION_LABELS).expect("two distinct labels")
}

/// `val(d, F)` for each single decision `d` and circumstance mask `F`,
/// together with the sample size `|T_F|` behind each row.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueMatrix<T> {
    decisions: EventFamily,
    circumstances: EventFamily,
    /// Row-major by circumstance: `values[f * |D| + d]`.
    values: Vec<T>,
    counts: Vec<u64>,
}

impl<T: Scalar> ValueMatrix<T> {
    pub fn new(
        decisions: EventFamily,
        circumstances: EventFamily,
        values: Vec<T>,
        counts: Vec<u64>,
    ) -> Result<Self> {
        let rows = circumstances.subset_count();
        if values.len() != rows * decisions.size() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: rows * decisions.size(),
            });
        }
        if counts.len() != rows {
            return Err(Error::LengthMismatch {
                left: counts.len(),
                right: rows,
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("value {v} is not finite")));
        }
        Ok(Self {
            decisions,
            circumstances,
            values,
            counts,
        })
    }

    pub fn decision_family(&self) -> &EventFamily {
        &self.decisions
    }

    pub fn circumstance_family(&self) -> &EventFamily {
        &self.circumstances
    }

    /// `val(d, F)` for decision index `d`.
    pub fn value(&self, d: usize, f: u32) -> T {
        self.values[f as usize * self.decisions.size() + d]
    }

    pub fn row(&self, f: u32) -> &[T] {
        let n = self.decisions.size();
        &self.values[f as usize * n..(f as usize + 1) * n]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `|T_F|`.
    pub fn count(&self, f: u32) -> u64 {
        self.counts[f as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Whether no moment with circumstances `F` was seen.
    pub fn unobserved(&self, f: u32) -> bool {
        self.counts[f as usize] == 0
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * factor).collect(),
            ..self.clone()
        }
    }
}

/// Mean price increment per circumstance mask, computed exactly.
///
/// The increment at record `t` is `a_t - a_{t-1}`; the first record uses the
/// last warm-up price. Masks never observed get mean 0.
pub fn mean_increments(dataset: &MarketDataset, cs: &CircumstanceSeries) -> Result<(Vec<Exact>, Vec<u64>)> {
    let rows = dataset.rows();
    let n = cs.family().subset_count();
    let mut sums = vec![Exact::zero(); n];
    let mut counts = vec![0u64; n];
    for rec in cs.records() {
        if rec.row == 0 || rec.row >= rows.len() || rows[rec.row].timestamp != rec.timestamp {
            return Err(Error::Invalid(format!(
                "circumstance record at row {} ({}) is not aligned with the dataset",
                rec.row, rec.timestamp
            )));
        }
        let f = rec.set.bits() as usize;
        sums[f] += rows[rec.row].price - rows[rec.row - 1].price;
        counts[f] += 1;
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c == 0 {
                Exact::zero()
            } else {
                s / Exact::from_integer(c as i128)
            }
        })
        .collect();
    Ok((means, counts))
}

/// `val(d⁺, F) = m(F)` and `val(d⁻, F) = -m(F)` where `m(F)` is the mean increment over `T_F`.
pub fn estimate_value_matrix<T: Scalar>(dataset: &MarketDataset, cs: &CircumstanceSeries) -> Result<ValueMatrix<T>> {
    let (means, counts) = mean_increments(dataset, cs)?;
    let values = means
        .iter()
        .flat_map(|m| {
            let v: T = exact_to_scalar(m);
            [v, -v]
        })
        .collect();
    ValueMatrix::new(decision_family(), cs.family().clone(), values, counts)
}

/// `val(D, F)` for every decision set `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetValueMatrix<T> {
    decisions: EventFamily,
    circumstances: EventFamily,
    /// Row-major by circumstance: `values[f * 2^|D| + D]`.
    values: Vec<T>,
}

impl<T: Scalar> SetValueMatrix<T> {
    pub fn new(decisions: EventFamily, circumstances: EventFamily, values: Vec<T>) -> Result<Self> {
        let expected = decisions.subset_count() * circumstances.subset_count();
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: expected,
            });
        }
        Ok(Self {
            decisions,
            circumstances,
            values,
        })
    }

    pub fn decision_family(&self) -> &EventFamily {
        &self.decisions
    }

    pub fn circumstance_family(&self) -> &EventFamily {
        &self.circumstances
    }

    pub fn value(&self, d: u32, f: u32) -> T {
        self.values[f as usize * self.decisions.subset_count() + d as usize]
    }

    /// Values over all decision sets at `f`, ascending by decision mask.
    pub fn row(&self, f: u32) -> &[T] {
        let n = self.decisions.subset_count();
        &self.values[f as usize * n..(f as usize + 1) * n]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// `val(D, F) = Σ_{d ∈ D} val(d, F)`.
pub fn lift_to_sets<T: Scalar>(vm: &ValueMatrix<T>) -> SetValueMatrix<T> {
    let nd = vm.decisions.size();
    let mut values = Vec::with_capacity(vm.decisions.subset_count() * vm.circumstances.subset_count());
    for f in 0..vm.circumstances.subset_count() as u32 {
        let row = vm.row(f);
        for d in 0..vm.decisions.subset_count() as u32 {
            values.push(
                (0..nd)
                    .filter(|i| d & (1 << i) != 0)
                    .fold(T::zero(), |acc, i| acc + row[i]),
            );
        }
    }
    SetValueMatrix {
        decisions: vm.decisions.clone(),
        circumstances: vm.circumstances.clone(),
        values,
    }
}

/// A bounded set-function over a family.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueFunction<T> {
    family: EventFamily,
    values: Vec<T>,
}

impl<T: Scalar> ValueFunction<T> {
    pub fn new(family: EventFamily, values: Vec<T>) -> Result<Self> {
        if values.len() != family.subset_count() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: family.subset_count(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("value {v} is not finite")));
        }
        Ok(Self { family, values })
    }

    pub fn from_fn(family: &EventFamily, f: impl FnMut(u32) -> T) -> Result<Self> {
        Self::new(family.clone(), (0..family.subset_count() as u32).map(f).collect())
    }

    pub fn family(&self) -> &EventFamily {
        &self.family
    }

    pub fn value(&self, x: u32) -> T {
        self.values[x as usize]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Adds `c` to every value.
    pub fn shifted(&self, c: T) -> Self {
        Self {
            family: self.family.clone(),
            values: self.values.iter().map(|&v| v + c).collect(),
        }
    }
}

/// `V(D + F) = val(D, F)` over the joint family of `layout`.
pub fn value_function_from_matrix<T: Scalar>(svm: &SetValueMatrix<T>) -> Result<(JointLayout, ValueFunction<T>)> {
    let layout = JointLayout::new(&svm.decisions, &svm.circumstances)?;
    let values = (0..layout.joint().subset_count() as u32)
        .map(|x| {
            let (d, f) = layout.split(x);
            svm.value(d, f)
        })
        .collect();
    let vf = ValueFunction::new(layout.joint().clone(), values)?;
    Ok((layout, vf))
}

/// `val_Σ(F)`: sum of the positive entries of row `F`.
pub fn positive_mass<T: Scalar>(svm: &SetValueMatrix<T>, f: &EventSet) -> Result<T> {
    svm.circumstances.ensure_same(f.family())?;
    Ok(svm
        .row(f.bits())
        .iter()
        .filter(|v| **v > T::zero())
        .fold(T::zero(), |acc, &v| acc + v))
}
