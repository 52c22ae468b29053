use crate::metric::DistanceSpec;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("suffix `{id}` has no feature vector but distance kind `{spec}` requires one")]
    MissingFeatures { id: String, spec: DistanceSpec },

    #[error("suffix `{id}` has a {got}-dimensional feature vector, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },

    #[error(
        "suffix `{id}` breaks feature consistency: either all suffixes carry a feature \
         vector of the declared dimension or none do"
    )]
    InconsistentFeatures { id: String },

    #[error("suffix `{id}` has an all-zero feature vector; angular distance is undefined")]
    ZeroVector { id: String },

    #[error("distance kind `{spec}` requires the dataset to declare a feature dimension")]
    FeatureDimRequired { spec: DistanceSpec },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate suffix id `{id}`")]
    DuplicateId { id: String },

    #[error("suffix `{id}` has an empty activity sequence")]
    EmptyActivities { id: String },

    #[error("suffix `{id}` uses activity id {activity} outside the alphabet (size {alphabet})")]
    ActivityOutOfRange {
        id: String,
        activity: u32,
        alphabet: usize,
    },

    #[error("row index {index} out of range for dataset of {len} rows")]
    RowOutOfRange { index: usize, len: usize },

    #[error("k = {k} out of range for dataset of {n} rows")]
    KOutOfRange { k: usize, n: usize },

    #[error("duplicate pivot row index {index}")]
    DuplicatePivot { index: usize },

    #[error("pivot list is empty")]
    EmptyPivots,

    #[error("instance too large for exhaustive search: n = {n}, k = {k} (cap: n <= {max_n}, k <= {max_k})")]
    InstanceTooLarge {
        n: usize,
        k: usize,
        max_n: usize,
        max_k: usize,
    },

    #[error("distance kind mismatch: expected `{expected}`, got `{got}`")]
    SpecMismatch {
        expected: DistanceSpec,
        got: DistanceSpec,
    },

    #[error("unknown distance kind `{0}` (expected euclidean, angular, or levenshtein)")]
    UnknownDistanceKind(String),

    #[error(
        "index fingerprint {index:#018x} does not match dataset fingerprint {dataset:#018x}; \
         the index is stale for this dataset"
    )]
    FingerprintMismatch { index: u64, dataset: u64 },

    #[error("bad magic bytes {found:?} in index file (expected \"PVTB\")")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported index format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("index file size mismatch: expected {expected} bytes of matrix data, found {got}")]
    SizeMismatch { expected: u64, got: u64 },

    #[error("index is inconsistent: {reason}")]
    CorruptIndex { reason: String },

    #[error("required column `{column}` missing from event log header")]
    MissingColumn { column: String },

    #[error("row {row}: cannot parse timestamp `{value}`")]
    BadTimestamp { row: u64, value: String },

    #[error("row {row}: cannot parse outcome `{value}` as a number")]
    BadOutcome { row: u64, value: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),

    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
