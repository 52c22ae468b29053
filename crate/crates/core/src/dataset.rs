//! Suffixes and the dataset they live in.
//!
//! A [`Suffix`] is one future-activity sequence of a process case. A
//! [`Dataset`] is the finite, ordered collection of suffixes a pivot table is
//! built over, together with the activity alphabet. Dataset order is load
//! bearing: it defines the row order of every pivot table built from it, and
//! the dataset fingerprint binds persisted indexes to exactly this content.

use std::collections::HashSet;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One process suffix: the activities of a case from some cut point to its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suffix {
    /// Identifier, unique within a dataset.
    pub id: String,
    /// Activity ids in execution order. Never empty.
    pub activities: Vec<u32>,
    /// Optional feature vector for vector-space distances.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<f64>>,
    /// Optional KPI label carried along from the originating case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<f64>,
}

impl Suffix {
    pub fn new(id: impl Into<String>, activities: Vec<u32>) -> Self {
        Suffix {
            id: id.into(),
            activities,
            features: None,
            outcome: None,
        }
    }

    pub fn with_features(mut self, features: Vec<f64>) -> Self {
        self.features = Some(features);
        self
    }
}

/// An ordered, validated set of suffixes plus the activity alphabet.
///
/// Immutable after construction; row order is stable and shared by every
/// pivot table built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    suffixes: Vec<Suffix>,
    alphabet: Vec<String>,
    feature_dim: Option<usize>,
    fingerprint: u64,
}

/// Serialized form of [`Dataset`]; validated on load.
#[derive(Deserialize)]
struct DatasetFile {
    alphabet: Vec<String>,
    #[serde(default)]
    feature_dim: Option<usize>,
    suffixes: Vec<Suffix>,
}

#[derive(Serialize)]
struct DatasetFileRef<'a> {
    alphabet: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    feature_dim: Option<usize>,
    suffixes: &'a [Suffix],
}

impl Dataset {
    /// Builds a dataset, checking every invariant: unique ids, non-empty
    /// activity sequences, activity ids within the alphabet, and feature
    /// vectors present on every suffix with the declared dimension exactly
    /// when `feature_dim` is set.
    pub fn new(
        suffixes: Vec<Suffix>,
        alphabet: Vec<String>,
        feature_dim: Option<usize>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(suffixes.len());
        for s in &suffixes {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId { id: s.id.clone() });
            }
            if s.activities.is_empty() {
                return Err(Error::EmptyActivities { id: s.id.clone() });
            }
            if let Some(&a) = s.activities.iter().find(|&&a| a as usize >= alphabet.len()) {
                return Err(Error::ActivityOutOfRange {
                    id: s.id.clone(),
                    activity: a,
                    alphabet: alphabet.len(),
                });
            }
            match (&s.features, feature_dim) {
                (Some(f), Some(dim)) if f.len() != dim => {
                    return Err(Error::DimensionMismatch {
                        id: s.id.clone(),
                        expected: dim,
                        got: f.len(),
                    });
                }
                (Some(_), Some(_)) => {}
                (None, None) => {}
                // Features without a declared dimension, or a declared
                // dimension with a featureless suffix.
                _ => return Err(Error::InconsistentFeatures { id: s.id.clone() }),
            }
        }
        let fingerprint = compute_fingerprint(&suffixes);
        Ok(Dataset {
            suffixes,
            alphabet,
            feature_dim,
            fingerprint,
        })
    }

    pub fn len(&self) -> usize {
        self.suffixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.suffixes.is_empty()
    }

    pub fn suffixes(&self) -> &[Suffix] {
        &self.suffixes
    }

    pub fn suffix(&self, row: usize) -> &Suffix {
        &self.suffixes[row]
    }

    /// Activity names; the id of a name is its position.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.feature_dim
    }

    /// 64-bit FNV-1a over suffix ids and activity sequences in dataset order,
    /// computed once at construction.
    ///
    /// Cheap staleness detection for persisted indexes, not a cryptographic
    /// commitment. Features and outcomes are excluded: the fingerprint tracks
    /// identity and content order, which is what pivot-table rows bind to.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Writes the dataset as a single JSON document.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        use std::io::Write;
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        let doc = DatasetFileRef {
            alphabet: &self.alphabet,
            feature_dim: self.feature_dim,
            suffixes: &self.suffixes,
        };
        serde_json::to_writer(&mut w, &doc)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// Loads and re-validates a dataset written by [`Dataset::save`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let raw: DatasetFile = serde_json::from_reader(BufReader::new(file))?;
        Dataset::new(raw.suffixes, raw.alphabet, raw.feature_dim)
    }
}

fn compute_fingerprint(suffixes: &[Suffix]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let feed = |h: &mut u64, bytes: &[u8]| {
        for &b in bytes {
            *h ^= u64::from(b);
            *h = h.wrapping_mul(PRIME);
        }
    };
    for s in suffixes {
        feed(&mut h, s.id.as_bytes());
        feed(&mut h, &[0x1f]);
        for &a in &s.activities {
            feed(&mut h, &a.to_le_bytes());
        }
        feed(&mut h, &[0x1e]);
    }
    h
}

/// Replaces every suffix's features with bag-of-activities counts: component
/// `i` is the number of occurrences of activity id `i`. The resulting feature
/// dimension is the alphabet size.
///
/// Since activity sequences are non-empty, the produced vectors are never
/// all-zero, so the result is safe for angular distance as well. Ids and
/// activities are untouched, so the fingerprint is unchanged.
pub fn featurize_bag_of_activities(data: &Dataset) -> Dataset {
    let dim = data.alphabet.len();
    let suffixes = data
        .suffixes
        .iter()
        .map(|s| {
            let mut counts = vec![0.0; dim];
            for &a in &s.activities {
                counts[a as usize] += 1.0;
            }
            Suffix {
                id: s.id.clone(),
                activities: s.activities.clone(),
                features: Some(counts),
                outcome: s.outcome,
            }
        })
        .collect();
    Dataset {
        suffixes,
        alphabet: data.alphabet.clone(),
        feature_dim: Some(dim),
        fingerprint: data.fingerprint,
    }
}
