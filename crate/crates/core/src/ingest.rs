//! Event-log ingestion: CSV parsing, case assembly, and suffix extraction.
//!
//! The CSV dialect is UTF-8, comma-separated, double-quote escaped, with a
//! required header naming at least `case_id`, `activity`, and `timestamp`
//! (ISO-8601). Extra columns are ignored, except an optional numeric
//! `outcome` column, captured per case (the last non-empty value in file
//! order wins). Within a case, events order by timestamp; file position
//! breaks timestamp ties.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDateTime};

use crate::dataset::{Dataset, Suffix};
use crate::error::{Error, Result};

/// One event after case assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub activity: String,
    pub timestamp: DateTime<FixedOffset>,
}

/// One case: its events in execution order plus the optional outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub id: String,
    pub events: Vec<Event>,
    pub outcome: Option<f64>,
}

/// A parsed event log; cases appear in first-appearance order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub cases: Vec<Case>,
}

impl EventLog {
    pub fn n_events(&self) -> usize {
        self.cases.iter().map(|c| c.events.len()).sum()
    }
}

/// Which suffixes to generate from each case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuffixSpec {
    /// Shortest suffix to keep (>= 1).
    pub min_length: usize,
    /// Longest suffix to keep, unbounded when `None`.
    pub max_length: Option<usize>,
    /// Whether the cut at position 1 (the full trace) is kept.
    pub include_full_trace: bool,
}

impl Default for SuffixSpec {
    fn default() -> Self {
        SuffixSpec {
            min_length: 1,
            max_length: None,
            include_full_trace: true,
        }
    }
}

fn parse_timestamp(s: &str) -> Option<DateTime<FixedOffset>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt);
    }
    // Offset-free timestamps are taken as UTC.
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(naive.and_utc().fixed_offset());
        }
    }
    None
}

/// Parses an event-log CSV file. See the module docs for the dialect.
pub fn parse_csv(path: impl AsRef<Path>) -> Result<EventLog> {
    parse_csv_reader(std::fs::File::open(path)?)
}

/// Same as [`parse_csv`] but from any reader.
pub fn parse_csv_reader<R: Read>(reader: R) -> Result<EventLog> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = csv.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })
    };
    let case_col = col("case_id")?;
    let activity_col = col("activity")?;
    let ts_col = col("timestamp")?;
    let outcome_col = headers.iter().position(|h| h == "outcome");

    // Raw events per case, keyed by first appearance.
    let mut case_order: Vec<String> = Vec::new();
    let mut case_ix: HashMap<String, usize> = HashMap::new();
    let mut events: Vec<Vec<Event>> = Vec::new();
    let mut outcomes: Vec<Option<f64>> = Vec::new();

    // Header is row 1; data starts at row 2.
    for (row, record) in (2u64..).zip(csv.records()) {
        let record = record?;
        let case_id = record.get(case_col).unwrap_or("").to_string();
        let activity = record.get(activity_col).unwrap_or("").to_string();
        let ts_raw = record.get(ts_col).unwrap_or("");
        let timestamp = parse_timestamp(ts_raw).ok_or_else(|| Error::BadTimestamp {
            row,
            value: ts_raw.to_string(),
        })?;

        let ix = *case_ix.entry(case_id.clone()).or_insert_with(|| {
            case_order.push(case_id.clone());
            events.push(Vec::new());
            outcomes.push(None);
            events.len() - 1
        });
        events[ix].push(Event {
            activity,
            timestamp,
        });
        if let Some(oc) = outcome_col {
            let raw = record.get(oc).unwrap_or("");
            if !raw.is_empty() {
                let value: f64 = raw.parse().map_err(|_| Error::BadOutcome {
                    row,
                    value: raw.to_string(),
                })?;
                outcomes[ix] = Some(value);
            }
        }
    }

    let cases = case_order
        .into_iter()
        .zip(events)
        .zip(outcomes)
        .map(|((id, mut evs), outcome)| {
            // Stable sort: equal timestamps keep file order.
            evs.sort_by_key(|e| e.timestamp);
            Case {
                id,
                events: evs,
                outcome,
            }
        })
        .collect();
    Ok(EventLog { cases })
}

/// Writes a log back to CSV in the same dialect [`parse_csv`] reads, one row
/// per event in case order. Parse, write, and parse again is an identity.
pub fn write_csv<W: std::io::Write>(log: &EventLog, writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let any_outcome = log.cases.iter().any(|c| c.outcome.is_some());
    if any_outcome {
        csv.write_record(["case_id", "activity", "timestamp", "outcome"])?;
    } else {
        csv.write_record(["case_id", "activity", "timestamp"])?;
    }
    for case in &log.cases {
        for event in &case.events {
            let ts = event.timestamp.to_rfc3339();
            if any_outcome {
                let outcome = case.outcome.map(|v| v.to_string()).unwrap_or_default();
                csv.write_record([&case.id, &event.activity, &ts, &outcome])?;
            } else {
                csv.write_record([&case.id, &event.activity, &ts])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

/// Emits one suffix per cut position of every case, subject to `spec`.
///
/// A case with activities `a1..aL` yields, for each cut `i` in `1..=L`, the
/// tail `ai..aL` with id `<case_id>:<i>`. Cut 1 is the full trace. The case
/// outcome, when present, is attached to every suffix of the case. Activity
/// names are interned in first-appearance order (cases in appearance order,
/// events in case order), which keeps datasets reproducible across runs on
/// the same file.
pub fn extract_suffixes(log: &EventLog, spec: &SuffixSpec) -> Result<Dataset> {
    assert!(spec.min_length >= 1, "min_length must be at least 1");
    if let Some(max) = spec.max_length {
        assert!(
            spec.min_length <= max,
            "min_length must not exceed max_length"
        );
    }
    let mut alphabet: Vec<String> = Vec::new();
    let mut ids: HashMap<&str, u32> = HashMap::new();
    let mut suffixes = Vec::new();
    for case in &log.cases {
        let seq: Vec<u32> = case
            .events
            .iter()
            .map(|e| {
                *ids.entry(e.activity.as_str()).or_insert_with(|| {
                    alphabet.push(e.activity.clone());
                    (alphabet.len() - 1) as u32
                })
            })
            .collect();
        for cut in 1..=seq.len() {
            if cut == 1 && !spec.include_full_trace {
                continue;
            }
            let tail_len = seq.len() - cut + 1;
            if tail_len < spec.min_length {
                continue;
            }
            if spec.max_length.is_some_and(|max| tail_len > max) {
                continue;
            }
            suffixes.push(Suffix {
                id: format!("{}:{}", case.id, cut),
                activities: seq[cut - 1..].to_vec(),
                features: None,
                outcome: case.outcome,
            });
        }
    }
    Dataset::new(suffixes, alphabet, None)
}
