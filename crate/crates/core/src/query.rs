//! Exact range and k-NN queries that skip most distance evaluations.
//!
//! Both query kinds consult the precomputed pivot table: a query costs K
//! pivot distances up front, after which every candidate row gets a
//! lower/upper bracket on its true distance. Candidates whose bracket clears
//! the threshold are resolved without evaluation; only the rest pay for an
//! exact distance. Results are identical to exhaustive comparison — the
//! bracket is sound, so no candidate is ever mis-classified.
//!
//! All counters in [`PruneStats`] are incremented at the evaluation sites
//! themselves, so tests can audit the work actually performed.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::bounds::{bound_pair, decide, query_pivot_row, validate_query, Decision};
use crate::dataset::{Dataset, Suffix};
use crate::error::{Error, Result};
use crate::index::PivotTable;
use crate::metric::distance_unchecked;

/// Work accounting for one query, or a field-wise sum over many.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneStats {
    /// Dataset rows examined.
    pub candidates: u64,
    /// Rows resolved by the lower bound (cannot match).
    pub pruned_lb: u64,
    /// Rows resolved by the upper bound, without an exact distance.
    pub accepted_ub: u64,
    /// Exact distance evaluations against candidate rows.
    pub computed: u64,
    /// Exact distance evaluations against pivots (K per query).
    pub pivot_evals: u64,
}

impl PruneStats {
    pub fn merge(&mut self, other: &PruneStats) {
        self.candidates += other.candidates;
        self.pruned_lb += other.pruned_lb;
        self.accepted_ub += other.accepted_ub;
        self.computed += other.computed;
        self.pivot_evals += other.pivot_evals;
    }

    /// Every exact evaluation this query performed, pivots included.
    pub fn total_evaluations(&self) -> u64 {
        self.computed + self.pivot_evals
    }
}

/// Distance reported for a match: exact, or the bracket that proved
/// membership when the query ran in membership-only mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatchDistance {
    Exact(f64),
    Interval(f64, f64),
}

impl MatchDistance {
    /// Sort key: the exact distance, or the interval's lower end.
    fn key(self) -> f64 {
        match self {
            MatchDistance::Exact(d) => d,
            MatchDistance::Interval(lower, _) => lower,
        }
    }
}

/// One retrieved suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub suffix_id: String,
    pub distance: MatchDistance,
}

/// Matches ordered by `(distance, suffix_id)` plus the work accounting.
/// Interval matches order by their lower end; the ordering is total and
/// deterministic either way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub matches: Vec<Match>,
    pub stats: PruneStats,
}

fn sort_matches(matches: &mut [Match]) {
    matches.sort_unstable_by(|a, b| {
        a.distance
            .key()
            .total_cmp(&b.distance.key())
            .then_with(|| a.suffix_id.cmp(&b.suffix_id))
    });
}

/// The table must have been built on (or loaded against) exactly this
/// dataset; both dimensions and fingerprint are checked.
fn check_binding(table: &PivotTable, data: &Dataset) -> Result<()> {
    if table.n_rows() != data.len() || table.dataset_fingerprint() != data.fingerprint() {
        return Err(Error::FingerprintMismatch {
            index: table.dataset_fingerprint(),
            dataset: data.fingerprint(),
        });
    }
    Ok(())
}

/// Retrieves exactly `{ y : d(q, y) <= tau }`.
///
/// Every row is classified through its bracket first. Pruned rows and
/// accepted rows cost no exact evaluation; only `Compute` rows do. With
/// `exact_distances` set, accepted rows additionally get one evaluation so
/// that every match carries its true distance; otherwise they carry the
/// proving bracket as an interval.
///
/// The query itself is a legitimate match (d = 0) when it is a dataset row;
/// callers wanting "other suffixes only" filter by id.
pub fn range_query(
    table: &PivotTable,
    data: &Dataset,
    q: &Suffix,
    tau: f64,
    exact_distances: bool,
) -> Result<QueryResult> {
    assert!(tau >= 0.0, "range threshold must be non-negative");
    check_binding(table, data)?;
    let spec = table.spec();
    spec.validate_dataset(data)?;
    validate_query(table, q)?;

    let mut stats = PruneStats {
        candidates: data.len() as u64,
        ..PruneStats::default()
    };
    let q_row = query_pivot_row(table, q, &mut stats)?;
    let mut matches = Vec::new();
    for (i, s) in data.suffixes().iter().enumerate() {
        let bracket = bound_pair(&q_row, table.row(i));
        match decide(bracket, tau) {
            Decision::Prune => stats.pruned_lb += 1,
            Decision::Accept => {
                stats.accepted_ub += 1;
                let distance = if exact_distances {
                    stats.computed += 1;
                    MatchDistance::Exact(distance_unchecked(spec, q, s))
                } else {
                    MatchDistance::Interval(bracket.lower, bracket.upper)
                };
                matches.push(Match {
                    suffix_id: s.id.clone(),
                    distance,
                });
            }
            Decision::Compute => {
                stats.computed += 1;
                let d = distance_unchecked(spec, q, s);
                if d <= tau {
                    matches.push(Match {
                        suffix_id: s.id.clone(),
                        distance: MatchDistance::Exact(d),
                    });
                }
            }
        }
    }
    sort_matches(&mut matches);
    Ok(QueryResult { matches, stats })
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry<'a> {
    dist: f64,
    id: &'a str,
}

impl PartialEq for HeapEntry<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for HeapEntry<'_> {}

impl PartialOrd for HeapEntry<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry<'_> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| self.id.cmp(other.id))
    }
}

/// Retrieves the `k` rows nearest to `q`, ties at equal distance broken by
/// ascending suffix id. All reported distances are exact, and the result is
/// identical to brute-force k-NN under the same tie rule.
///
/// LAESA-style search: brackets for all rows, an initial radius from the
/// k-th smallest upper bound, then a scan in ascending lower-bound order
/// that shrinks the radius through a max-heap of the best k and stops at the
/// first candidate whose lower bound exceeds it. Rows whose bracket collapses
/// to a point (always the case when the query is a pivot) are resolved
/// without an evaluation.
pub fn knn_query(table: &PivotTable, data: &Dataset, q: &Suffix, k: usize) -> Result<QueryResult> {
    check_binding(table, data)?;
    if k == 0 || k > data.len() {
        return Err(Error::KOutOfRange { k, n: data.len() });
    }
    let spec = table.spec();
    spec.validate_dataset(data)?;
    validate_query(table, q)?;

    let n = data.len();
    let mut stats = PruneStats {
        candidates: n as u64,
        ..PruneStats::default()
    };
    let q_row = query_pivot_row(table, q, &mut stats)?;

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let b = bound_pair(&q_row, table.row(i));
        lower.push(b.lower);
        upper.push(b.upper);
    }

    // k-th smallest upper bound: an attainable radius, so anything with a
    // larger lower bound can never reach the top k.
    let mut scratch = upper.clone();
    let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    let mut radius = *kth;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| lower[a].total_cmp(&lower[b]).then_with(|| a.cmp(&b)));

    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
    let mut visited = 0u64;
    for &i in &order {
        if lower[i] > radius {
            // Candidates are sorted by lower bound: everything from here on
            // is out of reach.
            break;
        }
        visited += 1;
        let s = data.suffix(i);
        let dist = if lower[i] == upper[i] {
            // Collapsed bracket pins the exact distance for free.
            stats.accepted_ub += 1;
            lower[i]
        } else {
            stats.computed += 1;
            distance_unchecked(spec, q, s)
        };
        let entry = HeapEntry { dist, id: &s.id };
        if heap.len() < k {
            heap.push(entry);
            if heap.len() == k {
                radius = heap.peek().expect("heap is non-empty").dist;
            }
        } else if entry < *heap.peek().expect("heap is non-empty") {
            heap.pop();
            heap.push(entry);
            radius = heap.peek().expect("heap is non-empty").dist;
        }
    }
    stats.pruned_lb = n as u64 - visited;

    let matches = heap
        .into_sorted_vec()
        .into_iter()
        .map(|e| Match {
            suffix_id: e.id.to_string(),
            distance: MatchDistance::Exact(e.dist),
        })
        .collect();
    Ok(QueryResult { matches, stats })
}

/// What a batch of queries should run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QueryMode {
    Range { tau: f64, exact_distances: bool },
    Knn { k: usize },
}

/// Outcome of one query in a batch, tagged with the query id so failures
/// stay attributable without aborting their siblings.
#[derive(Debug)]
pub struct BatchEntry {
    pub query_id: String,
    pub outcome: Result<QueryResult>,
}

/// All per-query outcomes in input order plus the field-wise sum of the
/// successful queries' stats.
#[derive(Debug)]
pub struct BatchResult {
    pub entries: Vec<BatchEntry>,
    pub aggregate: PruneStats,
}

/// Runs `queries` in batches of `batch_size`, each batch fanned out over up
/// to `workers` threads. Per-query results and stats are identical to running
/// every query alone — batching and parallelism are scheduling details — and
/// come back in input order.
pub fn batch_query(
    table: &PivotTable,
    data: &Dataset,
    queries: &[Suffix],
    mode: QueryMode,
    batch_size: usize,
    workers: usize,
) -> BatchResult {
    assert!(batch_size >= 1, "batch_size must be at least 1");
    assert!(workers >= 1, "workers must be at least 1");
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    let mut entries = Vec::with_capacity(queries.len());
    pool.install(|| {
        for batch in queries.chunks(batch_size) {
            let batch_entries: Vec<BatchEntry> = batch
                .par_iter()
                .map(|q| {
                    let outcome = match mode {
                        QueryMode::Range {
                            tau,
                            exact_distances,
                        } => range_query(table, data, q, tau, exact_distances),
                        QueryMode::Knn { k } => knn_query(table, data, q, k),
                    };
                    BatchEntry {
                        query_id: q.id.clone(),
                        outcome,
                    }
                })
                .collect();
            entries.extend(batch_entries);
        }
    });
    let mut aggregate = PruneStats::default();
    for entry in &entries {
        if let Ok(result) = &entry.outcome {
            aggregate.merge(&result.stats);
        }
    }
    BatchResult { entries, aggregate }
}

/// One line of the machine-readable result stream.
#[derive(Serialize)]
pub struct QueryRecord<'a> {
    pub query_id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<&'a [Match]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<&'a PruneStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BatchEntry {
    pub fn record(&self) -> QueryRecord<'_> {
        match &self.outcome {
            Ok(result) => QueryRecord {
                query_id: &self.query_id,
                matches: Some(&result.matches),
                stats: Some(&result.stats),
                error: None,
            },
            Err(e) => QueryRecord {
                query_id: &self.query_id,
                matches: None,
                stats: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Writes one JSON record per entry, newline-delimited.
pub fn write_jsonl<W: std::io::Write>(mut w: W, entries: &[BatchEntry]) -> Result<()> {
    for entry in entries {
        serde_json::to_writer(&mut w, &entry.record())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
