//! Exhaustive baseline engines and the verifier that certifies pruned
//! results against them.
//!
//! The brute-force engines never look at bounds: one exact evaluation per
//! dataset row, same ordering and tie rules as the pruned engines. `verify`
//! runs both sides per query and reports any divergence, which makes the
//! losslessness of pruning an executable check rather than an argument.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Dataset, Suffix};
use crate::error::Result;
use crate::index::PivotTable;
use crate::metric::{distance_unchecked, DistanceSpec};
use crate::query::{knn_query, range_query, Match, MatchDistance, PruneStats, QueryResult};

/// Absolute tolerance when comparing reported distances between engines.
pub const DISTANCE_TOL: f64 = 1e-9;

/// Exhaustive range query: exactly one evaluation per dataset row.
pub fn brute_force_range(
    data: &Dataset,
    spec: DistanceSpec,
    q: &Suffix,
    tau: f64,
) -> Result<QueryResult> {
    assert!(tau >= 0.0, "range threshold must be non-negative");
    spec.validate_dataset(data)?;
    spec.validate_suffix(data, q)?;
    let mut stats = PruneStats {
        candidates: data.len() as u64,
        ..PruneStats::default()
    };
    let mut matches = Vec::new();
    for s in data.suffixes() {
        stats.computed += 1;
        let d = distance_unchecked(spec, q, s);
        if d <= tau {
            matches.push(Match {
                suffix_id: s.id.clone(),
                distance: MatchDistance::Exact(d),
            });
        }
    }
    matches.sort_unstable_by(compare_matches);
    Ok(QueryResult { matches, stats })
}

/// Exhaustive k-NN: evaluates every row, sorts by `(distance, suffix_id)`,
/// keeps the first `k`.
pub fn brute_force_knn(
    data: &Dataset,
    spec: DistanceSpec,
    q: &Suffix,
    k: usize,
) -> Result<QueryResult> {
    if k == 0 || k > data.len() {
        return Err(crate::error::Error::KOutOfRange { k, n: data.len() });
    }
    spec.validate_dataset(data)?;
    spec.validate_suffix(data, q)?;
    let mut stats = PruneStats {
        candidates: data.len() as u64,
        ..PruneStats::default()
    };
    let mut all: Vec<Match> = data
        .suffixes()
        .iter()
        .map(|s| {
            stats.computed += 1;
            Match {
                suffix_id: s.id.clone(),
                distance: MatchDistance::Exact(distance_unchecked(spec, q, s)),
            }
        })
        .collect();
    all.sort_unstable_by(compare_matches);
    all.truncate(k);
    Ok(QueryResult {
        matches: all,
        stats,
    })
}

fn compare_matches(a: &Match, b: &Match) -> std::cmp::Ordering {
    let da = match a.distance {
        MatchDistance::Exact(d) => d,
        MatchDistance::Interval(lo, _) => lo,
    };
    let db = match b.distance {
        MatchDistance::Exact(d) => d,
        MatchDistance::Interval(lo, _) => lo,
    };
    da.total_cmp(&db)
        .then_with(|| a.suffix_id.cmp(&b.suffix_id))
}

/// Query mode for [`verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerifyMode {
    Range { tau: f64 },
    Knn { k: usize },
}

/// One divergence between the pruned engine and the baseline.
#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub query_id: String,
    pub description: String,
}

/// Outcome of checking a query list on both engines.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub queries_checked: usize,
    pub mismatches: Vec<Mismatch>,
    /// Exact evaluations performed by the baseline (N per query).
    pub evaluations_baseline: u64,
    /// Exact evaluations performed by the pruned engine, pivot rows included.
    pub evaluations_pruned: u64,
    /// Fraction of queries whose results were identical.
    pub accuracy: f64,
}

impl VerificationReport {
    /// Pruned-to-baseline evaluation ratio; below 1.0 means pruning saved
    /// work overall.
    pub fn evaluation_ratio(&self) -> f64 {
        if self.evaluations_baseline == 0 {
            return f64::NAN;
        }
        self.evaluations_pruned as f64 / self.evaluations_baseline as f64
    }
}

/// Runs every query through the pruned engine and the exhaustive baseline and
/// compares membership, ordering, and distances (within [`DISTANCE_TOL`]).
///
/// Range queries run the pruned side with exact distances so the comparison
/// covers reported values, not just membership. A query that errors on one
/// side only is a mismatch; a query that errors identically on both sides is
/// consistent behavior.
pub fn verify(
    table: &PivotTable,
    data: &Dataset,
    queries: &[Suffix],
    mode: VerifyMode,
) -> VerificationReport {
    let spec = table.spec();
    let outcomes: Vec<(Result<QueryResult>, Result<QueryResult>)> = queries
        .par_iter()
        .map(|q| {
            let pruned = match mode {
                VerifyMode::Range { tau } => range_query(table, data, q, tau, true),
                VerifyMode::Knn { k } => knn_query(table, data, q, k),
            };
            let baseline = match mode {
                VerifyMode::Range { tau } => brute_force_range(data, spec, q, tau),
                VerifyMode::Knn { k } => brute_force_knn(data, spec, q, k),
            };
            (pruned, baseline)
        })
        .collect();

    let mut mismatches = Vec::new();
    let mut evaluations_baseline = 0;
    let mut evaluations_pruned = 0;
    for (q, (pruned, baseline)) in queries.iter().zip(&outcomes) {
        if let Ok(r) = pruned {
            evaluations_pruned += r.stats.total_evaluations();
        }
        if let Ok(r) = baseline {
            evaluations_baseline += r.stats.computed;
        }
        let divergence = match (pruned, baseline) {
            (Ok(p), Ok(b)) => first_divergence(p, b),
            (Err(p), Ok(_)) => Some(format!("pruned engine failed: {p}")),
            (Ok(_), Err(b)) => Some(format!("baseline failed: {b}")),
            (Err(_), Err(_)) => None,
        };
        if let Some(description) = divergence {
            mismatches.push(Mismatch {
                query_id: q.id.clone(),
                description,
            });
        }
    }
    let accuracy = if queries.is_empty() {
        1.0
    } else {
        (queries.len() - mismatches.len()) as f64 / queries.len() as f64
    };
    VerificationReport {
        queries_checked: queries.len(),
        mismatches,
        evaluations_baseline,
        evaluations_pruned,
        accuracy,
    }
}

/// First rank at which two results disagree, with both entries spelled out.
fn first_divergence(pruned: &QueryResult, baseline: &QueryResult) -> Option<String> {
    let n = pruned.matches.len().max(baseline.matches.len());
    for rank in 0..n {
        match (pruned.matches.get(rank), baseline.matches.get(rank)) {
            (Some(p), Some(b)) => {
                let (MatchDistance::Exact(dp), MatchDistance::Exact(db)) = (p.distance, b.distance)
                else {
                    return Some(format!("rank {rank}: non-exact distance in comparison"));
                };
                if p.suffix_id != b.suffix_id {
                    return Some(format!(
                        "rank {rank}: pruned has `{}` (d={dp}), baseline has `{}` (d={db})",
                        p.suffix_id, b.suffix_id
                    ));
                }
                if (dp - db).abs() > DISTANCE_TOL {
                    return Some(format!(
                        "rank {rank}: `{}` distance differs: pruned {dp} vs baseline {db}",
                        p.suffix_id
                    ));
                }
            }
            (Some(p), None) => {
                return Some(format!(
                    "rank {rank}: pruned has extra match `{}`",
                    p.suffix_id
                ));
            }
            (None, Some(b)) => {
                return Some(format!(
                    "rank {rank}: pruned is missing match `{}`",
                    b.suffix_id
                ));
            }
            (None, None) => unreachable!(),
        }
    }
    None
}
