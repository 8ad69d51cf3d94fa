use crate::edist::{conditional, ConditionalEDistribution, EDistribution, JointEDistribution};
use crate::error::Result;
use crate::event_algebra::{JointLayout, PolicyMap};
use crate::scalar::Scalar;
use crate::valuation::{positive_mass, SetValueMatrix, ValueMatrix};

/// First method: at each `F` create exactly the decisions with positive value.
///
/// Returns the policy `F -> D_F` and its singular conditional `δ(D, D_F)`.
pub fn method1_policy<T: Scalar>(vm: &ValueMatrix<T>) -> Result<(PolicyMap, ConditionalEDistribution<T>)> {
    let decisions = vm.decision_family();
    let policy = PolicyMap::from_fn(vm.circumstance_family(), decisions, |f| {
        vm.row(f)
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > T::zero())
            .fold(0u32, |acc, (d, _)| acc | 1 << d)
    })?;
    let cond = ConditionalEDistribution::singular(&policy);
    Ok((policy, cond))
}

/// Second method: a mixed strategy proportional to the positive set-values of each row.
///
/// Rows without any positive value put all mass on the empty decision set.
/// Negative values get probability zero.
pub fn method2_conditional<T: Scalar>(svm: &SetValueMatrix<T>) -> Result<ConditionalEDistribution<T>> {
    let circumstances = svm.circumstance_family();
    let n = svm.decision_family().subset_count();
    let mut rows = Vec::with_capacity(circumstances.subset_count());
    for f in 0..circumstances.subset_count() as u32 {
        let total = positive_mass(svm, &circumstances.set(f)?)?;
        let row = if total > T::zero() {
            svm.row(f)
                .iter()
                .map(|&v| if v > T::zero() { v / total } else { T::zero() })
                .collect()
        } else {
            let mut row = vec![T::zero(); n];
            row[0] = T::one();
            row
        };
        rows.push(Some(row));
    }
    ConditionalEDistribution::new(svm.decision_family().clone(), circumstances.clone(), rows)
}

/// Third method: condition a distribution over `D + F` on the circumstance part.
pub fn method3_conditional<T: Scalar>(
    layout: &JointLayout,
    p: &EDistribution<T>,
) -> Result<ConditionalEDistribution<T>> {
    let joint = JointEDistribution::from_joint_edist(layout, p)?;
    Ok(conditional(&joint))
}
