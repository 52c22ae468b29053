//! Exact pivot-pruned similarity retrieval for process suffixes.
//!
//! Pairwise comparison over a large suffix set is quadratic and dominated by
//! distance evaluations. This crate precomputes distances from every suffix
//! to a small set of pivots chosen by a greedy farthest-point heuristic; the
//! triangle inequality then brackets any unseen distance from below and
//! above, and most candidates of a range or k-NN query resolve from the
//! bracket alone. Pruning is lossless: results are identical to exhaustive
//! comparison, which the [`oracle`] module can certify on demand.
//!
//! # Example
//! ```
//! use pivotprune::{
//!     greedy_farthest_point, range_query, DistanceSpec, PivotTable, Suffix, Dataset,
//! };
//!
//! let suffixes: Vec<Suffix> = (0..100)
//!     .map(|i| Suffix::new(format!("s{i:03}"), vec![0]).with_features(vec![i as f64 * 0.1]))
//!     .collect();
//! let data = Dataset::new(suffixes, vec!["a".into()], Some(1))?;
//! let pivots = greedy_farthest_point(&data, DistanceSpec::Euclidean, 4, 0)?;
//! let table = PivotTable::build(&data, DistanceSpec::Euclidean, &pivots)?;
//!
//! let result = range_query(&table, &data, data.suffix(50), 0.35, false)?;
//! assert_eq!(result.matches.len(), 7);
//! assert!(result.stats.computed < data.len() as u64);
//! # Ok::<(), pivotprune::Error>(())
//! ```

pub mod bounds;
pub mod dataset;
pub mod error;
pub mod index;
pub mod ingest;
pub mod metric;
pub mod oracle;
pub mod pivots;
pub mod query;
pub mod synth;

pub use bounds::{bound_pair, decide, query_pivot_row, BoundPair, Decision};
pub use dataset::{featurize_bag_of_activities, Dataset, Suffix};
pub use error::{Error, Result};
pub use index::PivotTable;
pub use ingest::{extract_suffixes, parse_csv, EventLog, SuffixSpec};
pub use metric::{check_metric_axioms, distance, DistanceSpec, Metric};
pub use oracle::{brute_force_knn, brute_force_range, verify, VerificationReport, VerifyMode};
pub use pivots::{
    brute_force_k_center, coverage_radius, default_pivot_count, greedy_farthest_point, KCenterCap,
    PivotSet,
};
pub use query::{
    batch_query, knn_query, range_query, BatchResult, Match, MatchDistance, PruneStats, QueryMode,
    QueryResult,
};
