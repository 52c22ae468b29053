//! The precomputed suffix-to-pivot distance matrix and its on-disk form.
//!
//! A [`PivotTable`] holds one f64 per (row, pivot) pair, row-major. It is
//! built once, reused across every query, and persists as a file pair:
//!
//! * `<name>.meta` — TOML metadata: format version, distance kind, matrix
//!   dimensions, pivot indices and ids, coverage radius, and the dataset
//!   fingerprint the table is bound to.
//! * `<name>.pvtb` — binary matrix: a 16-byte header (magic `PVTB`, then
//!   format version, row count and pivot count, each a little-endian u32)
//!   followed by `rows * pivots` IEEE-754 f64 values, little-endian,
//!   row-major.
//!
//! Loading refuses a table whose fingerprint does not match the dataset it
//! is loaded against, so a stale index cannot silently produce wrong bounds.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Suffix};
use crate::error::{Error, Result};
use crate::metric::{distance_unchecked, DistanceSpec};
use crate::pivots::PivotSet;

const MAGIC: [u8; 4] = *b"PVTB";
const FORMAT_VERSION: u32 = 1;

/// Dense `rows x pivots` matrix of precomputed distances, bound to a dataset
/// by fingerprint. Immutable after construction and cheap to share across
/// query workers.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotTable {
    matrix: Vec<f64>,
    rows: usize,
    pivots: PivotSet,
    pivot_suffixes: Vec<Suffix>,
    fingerprint: u64,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    format_version: u32,
    distance: DistanceSpec,
    rows: usize,
    pivot_count: usize,
    pivot_indices: Vec<usize>,
    pivot_ids: Vec<String>,
    coverage_radius: f64,
    /// Hex-encoded 64-bit FNV-1a of the dataset (TOML integers are signed).
    dataset_fingerprint: String,
}

impl PivotTable {
    /// Computes the full matrix: exactly `data.len() * pivots.len()` distance
    /// evaluations, parallel over rows.
    pub fn build(data: &Dataset, spec: DistanceSpec, pivots: &PivotSet) -> Result<Self> {
        if pivots.spec() != spec {
            return Err(Error::SpecMismatch {
                expected: pivots.spec(),
                got: spec,
            });
        }
        for &p in pivots.indices() {
            if p >= data.len() {
                return Err(Error::RowOutOfRange {
                    index: p,
                    len: data.len(),
                });
            }
        }
        spec.validate_dataset(data)?;
        let k = pivots.len();
        let pivot_suffixes: Vec<Suffix> = pivots
            .indices()
            .iter()
            .map(|&p| data.suffix(p).clone())
            .collect();
        let mut matrix = vec![0.0; data.len() * k];
        matrix.par_chunks_mut(k).enumerate().for_each(|(i, row)| {
            let s = data.suffix(i);
            for (cell, z) in row.iter_mut().zip(&pivot_suffixes) {
                *cell = distance_unchecked(spec, s, z);
            }
        });
        Ok(PivotTable {
            matrix,
            rows: data.len(),
            pivots: pivots.clone(),
            pivot_suffixes,
            fingerprint: data.fingerprint(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_pivots(&self) -> usize {
        self.pivots.len()
    }

    pub fn spec(&self) -> DistanceSpec {
        self.pivots.spec()
    }

    pub fn pivot_set(&self) -> &PivotSet {
        &self.pivots
    }

    /// The pivot suffixes themselves, in pivot order; queries are compared
    /// against these to form their pivot row.
    pub fn pivot_suffixes(&self) -> &[Suffix] {
        &self.pivot_suffixes
    }

    pub fn dataset_fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Precomputed `d(row i, pivot k)`.
    pub fn entry(&self, row: usize, pivot: usize) -> f64 {
        self.matrix[row * self.pivots.len() + pivot]
    }

    /// All pivot distances of one dataset row.
    pub fn row(&self, row: usize) -> &[f64] {
        let k = self.pivots.len();
        &self.matrix[row * k..(row + 1) * k]
    }

    #[cfg(test)]
    pub(crate) fn corrupt_cell_for_test(&mut self, row: usize, pivot: usize, delta: f64) {
        let k = self.pivots.len();
        self.matrix[row * k + pivot] += delta;
    }

    fn paths(stem: &Path) -> (PathBuf, PathBuf) {
        let mut meta = stem.as_os_str().to_owned();
        meta.push(".meta");
        let mut bin = stem.as_os_str().to_owned();
        bin.push(".pvtb");
        (PathBuf::from(meta), PathBuf::from(bin))
    }

    /// Reads only the distance kind from `<stem>.meta`, so callers can
    /// prepare a dataset (e.g. featurize it) before the full load.
    pub fn peek_distance(stem: impl AsRef<Path>) -> Result<DistanceSpec> {
        let (meta_path, _) = Self::paths(stem.as_ref());
        let meta: Meta = toml::from_str(&fs::read_to_string(&meta_path)?)?;
        Ok(meta.distance)
    }

    /// Writes the `<stem>.meta` / `<stem>.pvtb` pair.
    pub fn save(&self, stem: impl AsRef<Path>) -> Result<()> {
        let (meta_path, bin_path) = Self::paths(stem.as_ref());
        let meta = Meta {
            format_version: FORMAT_VERSION,
            distance: self.spec(),
            rows: self.rows,
            pivot_count: self.pivots.len(),
            pivot_indices: self.pivots.indices().to_vec(),
            pivot_ids: self.pivot_suffixes.iter().map(|s| s.id.clone()).collect(),
            coverage_radius: self.pivots.coverage_radius(),
            dataset_fingerprint: format!("{:016x}", self.fingerprint),
        };
        fs::write(&meta_path, toml::to_string_pretty(&meta)?)?;

        let file = fs::File::create(&bin_path)?;
        let mut w = BufWriter::new(file);
        w.write_all(&MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.rows as u32).to_le_bytes())?;
        w.write_all(&(self.pivots.len() as u32).to_le_bytes())?;
        for v in &self.matrix {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `<stem>.meta` / `<stem>.pvtb` pair written by [`save`] and
    /// re-binds it to `data`. The load is bit-exact and fails if the
    /// fingerprint, dimensions, or pivot ids disagree with the dataset.
    ///
    /// [`save`]: PivotTable::save
    pub fn load(stem: impl AsRef<Path>, data: &Dataset) -> Result<Self> {
        let (meta_path, bin_path) = Self::paths(stem.as_ref());
        let meta: Meta = toml::from_str(&fs::read_to_string(&meta_path)?)?;
        if meta.format_version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: meta.format_version,
                supported: FORMAT_VERSION,
            });
        }
        meta.distance.validate_dataset(data)?;
        let fingerprint = u64::from_str_radix(&meta.dataset_fingerprint, 16).map_err(|_| {
            Error::CorruptIndex {
                reason: format!(
                    "unparseable dataset_fingerprint `{}`",
                    meta.dataset_fingerprint
                ),
            }
        })?;
        if fingerprint != data.fingerprint() {
            return Err(Error::FingerprintMismatch {
                index: fingerprint,
                dataset: data.fingerprint(),
            });
        }
        if meta.rows != data.len() {
            return Err(Error::CorruptIndex {
                reason: format!(
                    "metadata declares {} rows but the dataset has {}",
                    meta.rows,
                    data.len()
                ),
            });
        }
        if meta.pivot_indices.len() != meta.pivot_count || meta.pivot_ids.len() != meta.pivot_count
        {
            return Err(Error::CorruptIndex {
                reason: "pivot list length disagrees with pivot_count".into(),
            });
        }

        let file = fs::File::open(&bin_path)?;
        let total = file.metadata()?.len();
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        r.read_exact(&mut word)?;
        let rows = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let k = u32::from_le_bytes(word) as usize;
        if rows != meta.rows || k != meta.pivot_count {
            return Err(Error::CorruptIndex {
                reason: format!(
                    "matrix header {rows}x{k} disagrees with metadata {}x{}",
                    meta.rows, meta.pivot_count
                ),
            });
        }
        let expected = 16 + (rows as u64) * (k as u64) * 8;
        if total != expected {
            return Err(Error::SizeMismatch {
                expected,
                got: total,
            });
        }
        let mut matrix = vec![0.0f64; rows * k];
        let mut cell = [0u8; 8];
        for v in matrix.iter_mut() {
            r.read_exact(&mut cell)?;
            *v = f64::from_le_bytes(cell);
        }

        let pivot_suffixes: Vec<Suffix> = meta
            .pivot_indices
            .iter()
            .map(|&p| {
                if p >= data.len() {
                    return Err(Error::RowOutOfRange {
                        index: p,
                        len: data.len(),
                    });
                }
                Ok(data.suffix(p).clone())
            })
            .collect::<Result<_>>()?;
        for (s, id) in pivot_suffixes.iter().zip(&meta.pivot_ids) {
            if s.id != *id {
                return Err(Error::CorruptIndex {
                    reason: format!(
                        "pivot id `{}` in metadata does not match dataset row id `{}`",
                        id, s.id
                    ),
                });
            }
        }
        let pivots =
            PivotSet::from_validated(meta.pivot_indices, meta.coverage_radius, meta.distance);
        Ok(PivotTable {
            matrix,
            rows,
            pivots,
            pivot_suffixes,
            fingerprint,
        })
    }
}
