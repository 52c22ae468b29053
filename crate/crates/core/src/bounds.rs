//! Triangle-inequality bounds on unseen distances.
//!
//! For any suffixes `x`, `y` and pivot `z`, `|d(x,z) − d(y,z)| <= d(x,y) <=
//! d(x,z) + d(y,z)`. With K pivots the bounds tighten to the max of the
//! lower-bound terms and the min of the upper-bound terms. A query decision
//! then needs no exact distance when the interval clears the threshold on
//! either side, which is what makes pruned retrieval exact rather than
//! approximate.
//!
//! Comparisons here are raw f64 comparisons with no epsilon: for the shipped
//! metrics the bound arithmetic (one subtraction or addition per term) stays
//! far below any meaningful threshold scale. A user-supplied metric with
//! large accumulated rounding would need its own analysis before trusting
//! strict boundary behavior.

use crate::dataset::Suffix;
use crate::error::{Error, Result};
use crate::index::PivotTable;
use crate::metric::{distance_unchecked, DistanceSpec};
use crate::query::PruneStats;

/// A lower/upper bracket on one unevaluated distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

/// Outcome of comparing a [`BoundPair`] against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Lower bound strictly exceeds the threshold: the pair cannot match.
    Prune,
    /// Upper bound is within the threshold: the pair matches without an
    /// exact evaluation.
    Accept,
    /// The threshold falls inside the bracket: an exact distance is needed.
    Compute,
}

/// Checks a query suffix against a table's distance kind: feature presence,
/// dimension (taken from the first pivot), and the angular zero-vector rule.
pub(crate) fn validate_query(table: &PivotTable, q: &Suffix) -> Result<()> {
    let spec = table.spec();
    if !spec.requires_features() {
        return Ok(());
    }
    let dim = table.pivot_suffixes()[0]
        .features
        .as_ref()
        .map(Vec::len)
        .unwrap_or(0);
    let f = q.features.as_ref().ok_or_else(|| Error::MissingFeatures {
        id: q.id.clone(),
        spec,
    })?;
    if f.len() != dim {
        return Err(Error::DimensionMismatch {
            id: q.id.clone(),
            expected: dim,
            got: f.len(),
        });
    }
    if spec == DistanceSpec::Angular && f.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroVector { id: q.id.clone() });
    }
    Ok(())
}

/// Distances from a query to every pivot, in pivot order: exactly K exact
/// evaluations, tallied into `stats.pivot_evals`.
pub fn query_pivot_row(table: &PivotTable, q: &Suffix, stats: &mut PruneStats) -> Result<Vec<f64>> {
    validate_query(table, q)?;
    let spec = table.spec();
    let row = table
        .pivot_suffixes()
        .iter()
        .map(|z| distance_unchecked(spec, q, z))
        .collect();
    stats.pivot_evals += table.n_pivots() as u64;
    Ok(row)
}

/// Combines a query pivot row with a candidate pivot row into the tightest
/// K-pivot bracket. Both rows must have the same non-zero length.
pub fn bound_pair(q_row: &[f64], y_row: &[f64]) -> BoundPair {
    assert_eq!(
        q_row.len(),
        y_row.len(),
        "pivot rows must have equal length"
    );
    assert!(!q_row.is_empty(), "pivot rows must be non-empty");
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    for (&a, &b) in q_row.iter().zip(y_row) {
        lower = lower.max((a - b).abs());
        upper = upper.min(a + b);
    }
    BoundPair { lower, upper }
}

/// Threshold test for range membership `d <= tau`.
///
/// Prune requires the lower bound to strictly exceed `tau`; accept requires
/// the upper bound to reach `tau` inclusively. Exactly one outcome, prune
/// checked first.
pub fn decide(bounds: BoundPair, tau: f64) -> Decision {
    if bounds.lower > tau {
        Decision::Prune
    } else if bounds.upper <= tau {
        Decision::Accept
    } else {
        Decision::Compute
    }
}
