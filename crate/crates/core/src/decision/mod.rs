//! The three decision methods and the eventological choice built on them.

pub mod gibbs;
pub mod methods;
pub mod minimality;
pub mod sampling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edist::ConditionalEDistribution;
use crate::error::{Error, Result};
use crate::event_algebra::EventSet;
use crate::scalar::Scalar;

pub use gibbs::{
    attainable_interval, expected_value, gibbs_distribution, gibbs_normalizer, solve_rate, Branch,
    GibbsParams, DEFAULT_TOLERANCE, MAX_BISECTION_ITERATIONS, RATE_CAP,
};
pub use methods::{method1_policy, method2_conditional, method3_conditional};
pub use minimality::{grid_scan, verify_minimality, GridScan, MinimalityReport, MARGIN_FLOOR};
pub use sampling::{mode_decision, sample_decision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Singular policy from the signs of `val(d, F)`.
    M1,
    /// Mixed strategy proportional to positive set-values.
    M2,
    /// Conditional of the Gibbs joint distribution.
    M3,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::M1, Method::M2, Method::M3];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::M1 => "m1",
            Method::M2 => "m2",
            Method::M3 => "m3",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "m1" => Ok(Method::M1),
            "m2" => Ok(Method::M2),
            "m3" => Ok(Method::M3),
            other => Err(Error::Invalid(format!("unknown method `{other}` (expected m1, m2 or m3)"))),
        }
    }
}

/// A method's conditional row at one circumstance set, with its mode and an
/// optional seeded draw.
#[derive(Clone, Debug, PartialEq)]
pub struct Recommendation<T> {
    pub circumstances: EventSet,
    pub method: Method,
    /// Probability per decision mask, ascending.
    pub distribution: Vec<T>,
    pub mode_decision: u32,
    /// `(decision mask, seed)`.
    pub sampled_decision: Option<(u32, u64)>,
    /// The conditional had no row here; the distribution is the do-nothing fallback.
    pub unmodeled_circumstance: bool,
}

/// Reads row `F` of `cond`. An undefined row falls back to a point mass at the
/// empty decision set and is flagged.
pub fn recommend<T: Scalar>(
    cond: &ConditionalEDistribution<T>,
    circumstances: &EventSet,
    method: Method,
    seed: Option<u64>,
) -> Result<Recommendation<T>> {
    cond.circumstance_family().ensure_same(circumstances.family())?;
    let decisions = cond.decision_family();
    let (distribution, unmodeled) = match cond.row(circumstances.bits()) {
        Some(row) => (row.to_vec(), false),
        None => {
            let mut row = vec![T::zero(); decisions.subset_count()];
            row[0] = T::one();
            (row, true)
        }
    };
    let sampled_decision = seed
        .map(|s| sample_decision(decisions, &distribution, s).map(|d| (d.bits(), s)))
        .transpose()?;
    Ok(Recommendation {
        circumstances: circumstances.clone(),
        method,
        mode_decision: mode_decision(&distribution),
        distribution,
        sampled_decision,
        unmodeled_circumstance: unmodeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_algebra::EventFamily;

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("m4".parse::<Method>().is_err());
    }

    #[test]
    fn undefined_rows_fall_back_to_nothing() {
        let d = EventFamily::new(["d_plus", "d_minus"]).unwrap();
        let f = EventFamily::new(["f"]).unwrap();
        let cond = ConditionalEDistribution::new(
            d,
            f.clone(),
            vec![Some(vec![0.0, 0.3, 0.7, 0.0]), None],
        )
        .unwrap();
        let rec = recommend(&cond, &f.set(1).unwrap(), Method::M3, Some(9)).unwrap();
        assert!(rec.unmodeled_circumstance);
        assert_eq!(rec.distribution, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(rec.sampled_decision, Some((0, 9)));
        let rec = recommend(&cond, &f.set(0).unwrap(), Method::M2, None).unwrap();
        assert_eq!(rec.mode_decision, 2);
        assert!(!rec.unmodeled_circumstance);
    }
}
