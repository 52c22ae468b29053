//! Distance functions over suffixes.
//!
//! Everything downstream — pivot bounds, pruning, exactness of query results —
//! rests on the distance satisfying non-negativity, symmetry, `d(x,x) = 0`,
//! and the triangle inequality. The three shipped kinds all do. Plug-in
//! metrics can be sanity checked with [`check_metric_axioms`] before trusting
//! pruned results built on them.
//!
//! Note on cosine: raw cosine distance (`1 − cos`) violates the triangle
//! inequality and would silently break pruning exactness. The shipped
//! alternative is angular distance, `angle(a, b) / π`, which is a true metric
//! on directions (it does not separate parallel vectors, which pruning never
//! needs).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Suffix};
use crate::error::{Error, Result};

/// Absolute tolerance for triangle-inequality checks on float metrics.
pub const TRIANGLE_TOL: f64 = 1e-9;
/// Absolute tolerance for symmetry and self-distance checks.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// The shipped distance kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceSpec {
    /// Euclidean distance on feature vectors.
    Euclidean,
    /// Angle between feature vectors, normalized to [0, 1]: `angle / π`.
    Angular,
    /// Unit-cost edit distance on activity-id sequences.
    Levenshtein,
}

impl DistanceSpec {
    pub const ALL: [DistanceSpec; 3] = [
        DistanceSpec::Euclidean,
        DistanceSpec::Angular,
        DistanceSpec::Levenshtein,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceSpec::Euclidean => "euclidean",
            DistanceSpec::Angular => "angular",
            DistanceSpec::Levenshtein => "levenshtein",
        }
    }

    /// Whether this kind operates on feature vectors rather than sequences.
    pub fn requires_features(self) -> bool {
        matches!(self, DistanceSpec::Euclidean | DistanceSpec::Angular)
    }

    /// Checks that every suffix in `data` satisfies this kind's requirements,
    /// so that distance evaluation over the dataset cannot fail afterwards.
    ///
    /// Dataset construction already guarantees feature presence and dimension
    /// consistency whenever `feature_dim` is set, so this only has to check
    /// that the dimension is declared, plus the angular zero-vector rule.
    pub fn validate_dataset(self, data: &Dataset) -> Result<()> {
        if self.requires_features() {
            if data.feature_dim().is_none() {
                return Err(Error::FeatureDimRequired { spec: self });
            }
            if self == DistanceSpec::Angular {
                for s in data.suffixes() {
                    let f = s.features.as_ref().expect("dataset invariant");
                    if f.iter().all(|&x| x == 0.0) {
                        return Err(Error::ZeroVector { id: s.id.clone() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks one suffix (typically a query) against this kind and the
    /// dataset's feature dimension.
    pub fn validate_suffix(self, data: &Dataset, s: &Suffix) -> Result<()> {
        if !self.requires_features() {
            return Ok(());
        }
        let dim = data
            .feature_dim()
            .ok_or(Error::FeatureDimRequired { spec: self })?;
        let f = s.features.as_ref().ok_or_else(|| Error::MissingFeatures {
            id: s.id.clone(),
            spec: self,
        })?;
        if f.len() != dim {
            return Err(Error::DimensionMismatch {
                id: s.id.clone(),
                expected: dim,
                got: f.len(),
            });
        }
        if self == DistanceSpec::Angular && f.iter().all(|&x| x == 0.0) {
            return Err(Error::ZeroVector { id: s.id.clone() });
        }
        Ok(())
    }
}

impl fmt::Display for DistanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(DistanceSpec::Euclidean),
            "angular" => Ok(DistanceSpec::Angular),
            "levenshtein" => Ok(DistanceSpec::Levenshtein),
            other => Err(Error::UnknownDistanceKind(other.to_string())),
        }
    }
}

/// A pluggable distance function over suffixes.
///
/// Pruning is exact only for true metrics; run [`check_metric_axioms`] on
/// anything user supplied.
pub trait Metric: Sync {
    fn distance(&self, a: &Suffix, b: &Suffix) -> Result<f64>;
}

impl Metric for DistanceSpec {
    fn distance(&self, a: &Suffix, b: &Suffix) -> Result<f64> {
        distance(*self, a, b)
    }
}

/// Evaluates `d(a, b)` for the given kind.
pub fn distance(spec: DistanceSpec, a: &Suffix, b: &Suffix) -> Result<f64> {
    match spec {
        DistanceSpec::Euclidean => {
            let (fa, fb) = feature_pair(spec, a, b)?;
            Ok(euclidean(fa, fb))
        }
        DistanceSpec::Angular => {
            let (fa, fb) = feature_pair(spec, a, b)?;
            if fa.iter().all(|&x| x == 0.0) {
                return Err(Error::ZeroVector { id: a.id.clone() });
            }
            if fb.iter().all(|&x| x == 0.0) {
                return Err(Error::ZeroVector { id: b.id.clone() });
            }
            Ok(angular(fa, fb))
        }
        DistanceSpec::Levenshtein => Ok(levenshtein(&a.activities, &b.activities) as f64),
    }
}

/// Same as [`distance`] but assumes the inputs were already validated
/// (feature presence, dimensions, non-zero vectors for angular). Used in
/// hot loops after a one-time `validate_dataset` / `validate_suffix`.
pub(crate) fn distance_unchecked(spec: DistanceSpec, a: &Suffix, b: &Suffix) -> f64 {
    match spec {
        DistanceSpec::Euclidean => euclidean(
            a.features.as_deref().expect("validated features"),
            b.features.as_deref().expect("validated features"),
        ),
        DistanceSpec::Angular => angular(
            a.features.as_deref().expect("validated features"),
            b.features.as_deref().expect("validated features"),
        ),
        DistanceSpec::Levenshtein => levenshtein(&a.activities, &b.activities) as f64,
    }
}

fn feature_pair<'a>(
    spec: DistanceSpec,
    a: &'a Suffix,
    b: &'a Suffix,
) -> Result<(&'a [f64], &'a [f64])> {
    let fa = a
        .features
        .as_deref()
        .ok_or_else(|| Error::MissingFeatures {
            id: a.id.clone(),
            spec,
        })?;
    let fb = b
        .features
        .as_deref()
        .ok_or_else(|| Error::MissingFeatures {
            id: b.id.clone(),
            spec,
        })?;
    if fa.len() != fb.len() {
        return Err(Error::DimensionMismatch {
            id: b.id.clone(),
            expected: fa.len(),
            got: fb.len(),
        });
    }
    Ok((fa, fb))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn angular(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    // Angle between the normalized vectors via 2*atan2(|u-v|, |u+v|).
    // Unlike acos of the clamped cosine, this stays accurate at tiny angles
    // (acos amplifies rounding near cos = 1 to ~1e-8) and yields exactly 0
    // for identical vectors.
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let u = x / na;
        let v = y / nb;
        diff += (u - v) * (u - v);
        sum += (u + v) * (u + v);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt()) / std::f64::consts::PI
}

/// Unit-cost edit distance between two id sequences (two-row DP).
pub fn levenshtein(a: &[u32], b: &[u32]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // Keep the inner row the shorter one.
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut prev = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev + usize::from(ca != cb);
            prev = row[j + 1];
            row[j + 1] = sub.min(prev + 1).min(row[j] + 1);
        }
    }
    row[b.len()]
}

/// One metric-axiom violation found by sampling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AxiomViolation {
    /// `d(x,y) > d(x,z) + d(z,y)` beyond tolerance.
    Triangle {
        x: usize,
        y: usize,
        z: usize,
        direct: f64,
        via: f64,
    },
    /// `|d(x,y) − d(y,x)|` beyond tolerance.
    Symmetry {
        x: usize,
        y: usize,
        xy: f64,
        yx: f64,
    },
    /// `d(x,x)` not zero beyond tolerance.
    Identity { x: usize, value: f64 },
}

/// Result of [`check_metric_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub triples_checked: usize,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `n_triples` random `(x, y, z)` row triples and checks the triangle
/// inequality (tolerance [`TRIANGLE_TOL`]) plus symmetry and `d(x,x) = 0`
/// (tolerance [`SYMMETRY_TOL`]) on the sampled rows. Returns every violation
/// found; the three shipped kinds produce none.
pub fn check_metric_axioms<M: Metric + ?Sized>(
    metric: &M,
    data: &Dataset,
    n_triples: usize,
    rng_seed: u64,
) -> Result<AxiomReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = data.len();
    let mut violations = Vec::new();
    for _ in 0..n_triples {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        let z = rng.gen_range(0..n);
        let (sx, sy, sz) = (data.suffix(x), data.suffix(y), data.suffix(z));
        let dxy = metric.distance(sx, sy)?;
        let dyx = metric.distance(sy, sx)?;
        let dxz = metric.distance(sx, sz)?;
        let dzy = metric.distance(sz, sy)?;
        let dxx = metric.distance(sx, sx)?;
        if dxy > dxz + dzy + TRIANGLE_TOL {
            violations.push(AxiomViolation::Triangle {
                x,
                y,
                z,
                direct: dxy,
                via: dxz + dzy,
            });
        }
        if (dxy - dyx).abs() > SYMMETRY_TOL {
            violations.push(AxiomViolation::Symmetry {
                x,
                y,
                xy: dxy,
                yx: dyx,
            });
        }
        if dxx.abs() > SYMMETRY_TOL {
            violations.push(AxiomViolation::Identity { x, value: dxx });
        }
    }
    Ok(AxiomReport {
        triples_checked: n_triples,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::featurize_bag_of_activities;
    use crate::synth;
    use proptest::prelude::*;
    use rand::Rng;

    fn vec_suffix(id: &str, features: &[f64]) -> Suffix {
        Suffix::new(id, vec![0]).with_features(features.to_vec())
    }

    fn seq(ids: &[u32]) -> Suffix {
        Suffix::new("q", ids.to_vec())
    }

    #[test]
    fn euclidean_three_four_five() {
        let a = vec_suffix("a", &[0.0, 0.0]);
        let b = vec_suffix("b", &[3.0, 4.0]);
        assert_eq!(distance(DistanceSpec::Euclidean, &a, &b).unwrap(), 5.0);
    }

    #[test]
    fn angular_orthogonal_is_half() {
        let a = vec_suffix("a", &[1.0, 0.0]);
        let b = vec_suffix("b", &[0.0, 1.0]);
        let d = distance(DistanceSpec::Angular, &a, &b).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn angular_ignores_magnitude() {
        let a = vec_suffix("a", &[1.0, 2.0]);
        let b = vec_suffix("b", &[3.0, 6.0]);
        let d = distance(DistanceSpec::Angular, &a, &b).unwrap();
        assert!(d.abs() < 1e-7);
    }

    #[test]
    fn levenshtein_identity_is_zero() {
        let a = seq(&[0, 1, 2]);
        let b = seq(&[0, 1, 2]);
        assert_eq!(distance(DistanceSpec::Levenshtein, &a, &b).unwrap(), 0.0);
    }

    #[test]
    fn levenshtein_kitten_sitting() {
        // k i t t e n -> s i t t i n g over interned letters.
        let kitten = [0, 1, 2, 2, 3, 4];
        let sitting = [5, 1, 2, 2, 1, 4, 6];
        assert_eq!(levenshtein(&kitten, &sitting), 3);
        assert_eq!(levenshtein_reference(&kitten, &sitting), 3);
    }

    #[test]
    fn missing_features_error() {
        let a = Suffix::new("a", vec![0]);
        let b = vec_suffix("b", &[1.0]);
        let err = distance(DistanceSpec::Euclidean, &a, &b).unwrap_err();
        assert!(matches!(err, Error::MissingFeatures { .. }));
    }

    #[test]
    fn dimension_mismatch_error() {
        let a = vec_suffix("a", &[1.0, 2.0]);
        let b = vec_suffix("b", &[1.0]);
        let err = distance(DistanceSpec::Euclidean, &a, &b).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn zero_vector_rejected_by_angular() {
        let a = vec_suffix("a", &[0.0, 0.0]);
        let b = vec_suffix("b", &[1.0, 0.0]);
        let err = distance(DistanceSpec::Angular, &a, &b).unwrap_err();
        assert!(matches!(err, Error::ZeroVector { .. }));
    }

    /// Textbook full-matrix edit distance, kept independent of the shipped
    /// two-row implementation.
    fn levenshtein_reference(a: &[u32], b: &[u32]) -> usize {
        let (n, m) = (a.len(), b.len());
        let mut dp = vec![vec![0usize; m + 1]; n + 1];
        for (i, row) in dp.iter_mut().enumerate() {
            row[0] = i;
        }
        dp[0] = (0..=m).collect();
        for i in 1..=n {
            for j in 1..=m {
                let sub = dp[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
                dp[i][j] = sub.min(dp[i - 1][j] + 1).min(dp[i][j - 1] + 1);
            }
        }
        dp[n][m]
    }

    #[test]
    fn levenshtein_matches_reference_exhaustively() {
        // Every pair of sequences of length <= 6 over a 3-letter alphabet.
        let mut seqs: Vec<Vec<u32>> = vec![vec![]];
        let mut frontier: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..6 {
            let mut next = Vec::new();
            for s in &frontier {
                for c in 0..3u32 {
                    let mut t = s.clone();
                    t.push(c);
                    next.push(t);
                }
            }
            seqs.extend(next.iter().cloned());
            frontier = next;
        }
        assert_eq!(seqs.len(), 1093);
        for a in &seqs {
            for b in &seqs {
                assert_eq!(
                    levenshtein(a, b),
                    levenshtein_reference(a, b),
                    "mismatch for {a:?} vs {b:?}"
                );
            }
        }
    }

    #[test]
    fn shipped_kinds_pass_axiom_check() {
        let vectors = synth::gaussian_clusters(60, 4, 3, 7);
        for spec in [DistanceSpec::Euclidean, DistanceSpec::Angular] {
            let report = check_metric_axioms(&spec, &vectors, 1000, 11).unwrap();
            assert!(report.is_clean(), "{spec}: {:?}", report.violations);
        }
        let seqs = synth::mutated_sequences(60, 5, 8, 4, 3, 7);
        let report = check_metric_axioms(&DistanceSpec::Levenshtein, &seqs, 1000, 11).unwrap();
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    /// Squared Euclidean breaks the triangle inequality; the checker must
    /// catch it on three collinear points.
    struct SquaredEuclidean;

    impl Metric for SquaredEuclidean {
        fn distance(&self, a: &Suffix, b: &Suffix) -> Result<f64> {
            let d = distance(DistanceSpec::Euclidean, a, b)?;
            Ok(d * d)
        }
    }

    #[test]
    fn axiom_check_flags_squared_euclidean() {
        let data = synth::points_1d(&[0.0, 1.0, 2.0]);
        let report = check_metric_axioms(&SquaredEuclidean, &data, 1000, 3).unwrap();
        let triangle = report.violations.iter().find_map(|v| match v {
            AxiomViolation::Triangle { direct, via, .. } => Some((*direct, *via)),
            _ => None,
        });
        // d(0,2) = 4 exceeds d(0,1) + d(1,2) = 2 in some sampled order.
        let (direct, via) = triangle.expect("no triangle violation found");
        assert_eq!(direct, 4.0);
        assert_eq!(via, 2.0);
    }

    #[test]
    fn axiom_check_rejects_empty_dataset() {
        let data = crate::dataset::Dataset::new(vec![], vec![], None).unwrap();
        let err = check_metric_axioms(&DistanceSpec::Levenshtein, &data, 10, 0).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn sampled_symmetry_triangle_identity() {
        let vectors = synth::gaussian_clusters(80, 6, 4, 21);
        let seqs = synth::mutated_sequences(80, 6, 10, 5, 4, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for spec in DistanceSpec::ALL {
            let data = if spec.requires_features() {
                &vectors
            } else {
                &seqs
            };
            for _ in 0..1000 {
                let i = rng.gen_range(0..data.len());
                let j = rng.gen_range(0..data.len());
                let k = rng.gen_range(0..data.len());
                let (a, b, c) = (data.suffix(i), data.suffix(j), data.suffix(k));
                let dab = distance(spec, a, b).unwrap();
                let dba = distance(spec, b, a).unwrap();
                let dac = distance(spec, a, c).unwrap();
                let dcb = distance(spec, c, b).unwrap();
                let daa = distance(spec, a, a).unwrap();
                assert!((dab - dba).abs() <= SYMMETRY_TOL);
                assert!(dab <= dac + dcb + TRIANGLE_TOL);
                if spec == DistanceSpec::Levenshtein {
                    assert_eq!(daa, 0.0);
                } else {
                    assert!(daa <= SYMMETRY_TOL);
                }
            }
        }
    }

    #[test]
    fn bag_of_activities_distances_compose() {
        let suffixes = vec![Suffix::new("a", vec![0]), Suffix::new("b", vec![1])];
        let data =
            crate::dataset::Dataset::new(suffixes, vec!["A".into(), "B".into()], None).unwrap();
        let feat = featurize_bag_of_activities(&data);
        let d = distance(DistanceSpec::Euclidean, feat.suffix(0), feat.suffix(1)).unwrap();
        assert!((d - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn levenshtein_symmetric_and_bounded(
            a in proptest::collection::vec(0u32..5, 0..12),
            b in proptest::collection::vec(0u32..5, 0..12),
        ) {
            let d = levenshtein(&a, &b);
            prop_assert_eq!(d, levenshtein(&b, &a));
            prop_assert!(d <= a.len().max(b.len()));
            prop_assert!(d >= a.len().abs_diff(b.len()));
        }

        #[test]
        fn levenshtein_triangle(
            a in proptest::collection::vec(0u32..4, 0..10),
            b in proptest::collection::vec(0u32..4, 0..10),
            c in proptest::collection::vec(0u32..4, 0..10),
        ) {
            prop_assert!(levenshtein(&a, &b) <= levenshtein(&a, &c) + levenshtein(&c, &b));
        }
    }
}
