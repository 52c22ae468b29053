//! Pivot selection: a Gonzalez-style greedy farthest-point heuristic for the
//! k-center objective, plus an exhaustive optimum for tiny instances used to
//! validate the classical 2-approximation guarantee.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metric::{distance_unchecked, DistanceSpec};

/// A selected pivot set together with its k-center objective value.
///
/// `coverage_radius` is `max` over all dataset rows of the distance to the
/// nearest pivot; every row is within that radius of some pivot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotSet {
    indices: Vec<usize>,
    coverage_radius: f64,
    spec: DistanceSpec,
}

impl PivotSet {
    /// Builds a pivot set from explicit row indices, validating them and
    /// computing the coverage radius.
    pub fn from_indices(data: &Dataset, spec: DistanceSpec, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyPivots);
        }
        let mut seen = std::collections::HashSet::new();
        for &i in &indices {
            if i >= data.len() {
                return Err(Error::RowOutOfRange {
                    index: i,
                    len: data.len(),
                });
            }
            if !seen.insert(i) {
                return Err(Error::DuplicatePivot { index: i });
            }
        }
        let coverage_radius = coverage_radius(data, spec, &indices)?;
        Ok(PivotSet {
            indices,
            coverage_radius,
            spec,
        })
    }

    pub(crate) fn from_validated(
        indices: Vec<usize>,
        coverage_radius: f64,
        spec: DistanceSpec,
    ) -> Self {
        PivotSet {
            indices,
            coverage_radius,
            spec,
        }
    }

    /// Row indices of the pivots, in selection order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn coverage_radius(&self) -> f64 {
        self.coverage_radius
    }

    pub fn spec(&self) -> DistanceSpec {
        self.spec
    }

    /// The same pivots truncated to the first `k`, with the radius recomputed.
    /// Greedy prefixes are themselves valid greedy selections, which makes
    /// this useful for studying bound tightness as a function of k.
    pub fn prefix(&self, data: &Dataset, k: usize) -> Result<PivotSet> {
        PivotSet::from_indices(
            data,
            self.spec,
            self.indices[..k.min(self.indices.len())].to_vec(),
        )
    }
}

/// Default pivot count for a dataset of `n` rows: `min(32, ceil(sqrt(n)))`,
/// at least 1. Keeps index build cost near `n^1.5` evaluations.
pub fn default_pivot_count(n: usize) -> usize {
    let root = (n as f64).sqrt().ceil() as usize;
    root.clamp(1, 32)
}

/// Greedy farthest-point pivot selection.
///
/// Starts from `seed_index` and repeatedly adds the row farthest from the
/// already chosen pivots (ties broken by smallest row index), maintaining a
/// running minimum distance per row. Exactly `n * k` distance evaluations.
pub fn greedy_farthest_point(
    data: &Dataset,
    spec: DistanceSpec,
    k: usize,
    seed_index: usize,
) -> Result<PivotSet> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || k > data.len() {
        return Err(Error::KOutOfRange { k, n: data.len() });
    }
    if seed_index >= data.len() {
        return Err(Error::RowOutOfRange {
            index: seed_index,
            len: data.len(),
        });
    }
    spec.validate_dataset(data)?;

    let n = data.len();
    let mut selected = vec![false; n];
    let mut min_dist = vec![f64::INFINITY; n];
    let mut indices = Vec::with_capacity(k);
    indices.push(seed_index);
    selected[seed_index] = true;

    for round in 0..k {
        let newest = data.suffix(indices[round]);
        min_dist.par_iter_mut().enumerate().for_each(|(i, md)| {
            let d = distance_unchecked(spec, data.suffix(i), newest);
            if d < *md {
                *md = d;
            }
        });
        if round + 1 == k {
            break;
        }
        // Farthest unselected row; smaller index wins ties.
        let (next, _) = min_dist
            .par_iter()
            .enumerate()
            .filter(|(i, _)| !selected[*i])
            .map(|(i, &d)| (i, d))
            .reduce(
                || (usize::MAX, f64::NEG_INFINITY),
                |a, b| {
                    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    }
                },
            );
        indices.push(next);
        selected[next] = true;
    }

    let coverage_radius = min_dist.iter().copied().fold(0.0, f64::max);
    Ok(PivotSet::from_validated(indices, coverage_radius, spec))
}

/// `max` over dataset rows of the distance to the nearest of `pivots`.
pub fn coverage_radius(data: &Dataset, spec: DistanceSpec, pivots: &[usize]) -> Result<f64> {
    if pivots.is_empty() {
        return Err(Error::EmptyPivots);
    }
    for &p in pivots {
        if p >= data.len() {
            return Err(Error::RowOutOfRange {
                index: p,
                len: data.len(),
            });
        }
    }
    spec.validate_dataset(data)?;
    let radius = data
        .suffixes()
        .par_iter()
        .map(|s| {
            pivots
                .iter()
                .map(|&p| distance_unchecked(spec, s, data.suffix(p)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(radius)
}

/// Size cap for [`brute_force_k_center`].
#[derive(Debug, Clone, Copy)]
pub struct KCenterCap {
    pub max_points: usize,
    pub max_k: usize,
}

impl Default for KCenterCap {
    fn default() -> Self {
        KCenterCap {
            max_points: 15,
            max_k: 3,
        }
    }
}

/// Exhaustive k-center optimum over all `C(n, k)` pivot subsets.
///
/// A test oracle for tiny instances; the cap guards against accidental use at
/// scale. Ties on the radius resolve to the lexicographically smallest index
/// tuple because subsets are enumerated in that order.
pub fn brute_force_k_center(
    data: &Dataset,
    spec: DistanceSpec,
    k: usize,
    cap: KCenterCap,
) -> Result<PivotSet> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || k > data.len() {
        return Err(Error::KOutOfRange { k, n: data.len() });
    }
    if data.len() > cap.max_points || k > cap.max_k {
        return Err(Error::InstanceTooLarge {
            n: data.len(),
            k,
            max_n: cap.max_points,
            max_k: cap.max_k,
        });
    }
    spec.validate_dataset(data)?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in (0..data.len()).combinations(k) {
        let radius = coverage_radius(data, spec, &subset)?;
        if best.as_ref().is_none_or(|(r, _)| radius < *r) {
            best = Some((radius, subset));
        }
    }
    let (radius, indices) = best.expect("non-empty dataset has at least one subset");
    Ok(PivotSet::from_validated(indices, radius, spec))
}
