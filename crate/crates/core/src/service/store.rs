//! Append-only review log and the current-state view derived from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::NodeId;
use crate::graphsheet::utc_timestamp;
use crate::linkpred::PredictedLink;
use crate::matching::Thresholds;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("prediction {0} not found")]
    NotFound(u64),
    #[error("prediction {0} was already decided")]
    AlreadyDecided(u64),
    #[error("invalid thresholds: review {review} is above autolink {autolink}")]
    InvalidThresholds { autolink: f64, review: f64 },
    #[error("review log line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Accepted,
    Rejected,
}

impl std::str::FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pending" => Ok(Status::Pending),
            "accepted" => Ok(Status::Accepted),
            "rejected" => Ok(Status::Rejected),
            other => Err(format!("unknown status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: u64,
    pub u: NodeId,
    pub v: NodeId,
    pub probability: f64,
    pub status: Status,
    pub note: Option<String>,
    pub steward: Option<String>,
    pub created_at: String,
    pub decided_at: Option<String>,
}

impl PredictionRecord {
    pub fn as_prediction(&self) -> PredictedLink {
        PredictedLink { watch: self.u, candidate: self.v, probability: self.probability }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdChange {
    pub thresholds: Thresholds,
    pub actor: Option<String>,
    pub at: String,
}

/// One line of the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEntry {
    Enqueued { record: PredictionRecord },
    Decided { id: u64, status: Status, note: Option<String>, steward: Option<String>, at: String },
    Thresholds(ThresholdChange),
}

/// State after applying every log entry in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewView {
    pub predictions: BTreeMap<u64, PredictionRecord>,
    pub thresholds: Thresholds,
    pub threshold_history: Vec<ThresholdChange>,
}

impl ReviewView {
    fn new(initial: Thresholds) -> Self {
        ReviewView { predictions: BTreeMap::new(), thresholds: initial, threshold_history: Vec::new() }
    }

    fn apply(&mut self, entry: &LogEntry) -> Result<(), StoreError> {
        match entry {
            LogEntry::Enqueued { record } => {
                self.predictions.insert(record.id, record.clone());
            }
            LogEntry::Decided { id, status, note, steward, at } => {
                let r = self.predictions.get_mut(id).ok_or(StoreError::NotFound(*id))?;
                if r.status != Status::Pending {
                    return Err(StoreError::AlreadyDecided(*id));
                }
                r.status = *status;
                r.note = note.clone();
                r.steward = steward.clone();
                r.decided_at = Some(at.clone());
            }
            LogEntry::Thresholds(change) => {
                self.thresholds = change.thresholds;
                self.threshold_history.push(change.clone());
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("view serializes")
    }
}

/// Single-writer store: every mutation is appended and synced before the
/// view changes.
#[derive(Debug)]
pub struct ReviewStore {
    path: PathBuf,
    file: File,
    view: ReviewView,
    pairs: BTreeSet<(NodeId, NodeId)>,
}

fn pair_key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    (u.min(v), u.max(v))
}

impl ReviewStore {
    /// Opens or creates the log at `path` and replays it.
    pub fn open(path: &Path, initial: Thresholds) -> Result<Self, StoreError> {
        let mut view = ReviewView::new(initial);
        if path.exists() {
            for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LogEntry = serde_json::from_str(&line)
                    .map_err(|e| StoreError::Corrupt { line: i + 1, message: e.to_string() })?;
                view.apply(&entry).map_err(|e| StoreError::Corrupt { line: i + 1, message: e.to_string() })?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let pairs = view.predictions.values().map(|r| pair_key(r.u, r.v)).collect();
        Ok(ReviewStore { path: path.to_path_buf(), file, view, pairs })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn view(&self) -> &ReviewView {
        &self.view
    }

    fn append(&mut self, entry: LogEntry) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(&entry).map_err(io::Error::from)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        self.view.apply(&entry)
    }

    /// Adds pending records for pairs not seen before; returns the new ones.
    pub fn enqueue(&mut self, predictions: &[PredictedLink]) -> Result<Vec<PredictionRecord>, StoreError> {
        let mut created = Vec::new();
        for p in predictions {
            let key = pair_key(p.watch, p.candidate);
            if self.pairs.contains(&key) {
                continue;
            }
            let id = self.view.predictions.keys().next_back().map_or(1, |m| m + 1);
            let record = PredictionRecord {
                id,
                u: p.watch,
                v: p.candidate,
                probability: p.probability,
                status: Status::Pending,
                note: None,
                steward: None,
                created_at: utc_timestamp(SystemTime::now()),
                decided_at: None,
            };
            self.append(LogEntry::Enqueued { record: record.clone() })?;
            self.pairs.insert(key);
            created.push(record);
        }
        Ok(created)
    }

    pub fn decide(
        &mut self,
        id: u64,
        verdict: Verdict,
        note: Option<String>,
        steward: Option<String>,
    ) -> Result<PredictionRecord, StoreError> {
        let current = self.view.predictions.get(&id).ok_or(StoreError::NotFound(id))?;
        if current.status != Status::Pending {
            return Err(StoreError::AlreadyDecided(id));
        }
        let status = match verdict {
            Verdict::Accept => Status::Accepted,
            Verdict::Reject => Status::Rejected,
        };
        self.append(LogEntry::Decided { id, status, note, steward, at: utc_timestamp(SystemTime::now()) })?;
        Ok(self.view.predictions[&id].clone())
    }

    pub fn set_thresholds(&mut self, t: Thresholds, actor: Option<String>) -> Result<Thresholds, StoreError> {
        t.validate().map_err(|_| StoreError::InvalidThresholds { autolink: t.autolink, review: t.review })?;
        self.append(LogEntry::Thresholds(ThresholdChange { thresholds: t, actor, at: utc_timestamp(SystemTime::now()) }))?;
        Ok(t)
    }

    pub fn get(&self, id: u64) -> Option<&PredictionRecord> {
        self.view.predictions.get(&id)
    }

    /// Records with the given status (all when `None`), probability
    /// descending then id ascending.
    pub fn list(&self, status: Option<Status>, offset: usize, limit: usize) -> (usize, Vec<PredictionRecord>) {
        let mut rows: Vec<&PredictionRecord> =
            self.view.predictions.values().filter(|r| status.is_none_or(|s| r.status == s)).collect();
        rows.sort_by(|a, b| b.probability.total_cmp(&a.probability).then(a.id.cmp(&b.id)));
        let total = rows.len();
        (total, rows.into_iter().skip(offset).take(limit).cloned().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(w: u32, c: u32, p: f64) -> PredictedLink {
        PredictedLink { watch: NodeId(w), candidate: NodeId(c), probability: p }
    }

    #[test]
    fn replay_reproduces_view() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("review.jsonl");
        let mut s = ReviewStore::open(&path, Thresholds::default()).unwrap();
        s.enqueue(&[link(1, 2, 0.9), link(1, 3, 0.4), link(1, 4, 0.9)]).unwrap();
        assert!(s.enqueue(&[link(2, 1, 0.9)]).unwrap().is_empty());
        s.decide(2, Verdict::Reject, Some("no".into()), Some("ann".into())).unwrap();
        s.set_thresholds(Thresholds { autolink: 25.0, review: 5.0 }, None).unwrap();
        let before = s.view().to_json();
        drop(s);
        let s = ReviewStore::open(&path, Thresholds::default()).unwrap();
        assert_eq!(s.view().to_json(), before);
        let (total, pending) = s.list(Some(Status::Pending), 0, 10);
        assert_eq!(total, 2);
        assert_eq!(pending.iter().map(|r| r.id).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn decisions_are_final() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = ReviewStore::open(&dir.path().join("log"), Thresholds::default()).unwrap();
        s.enqueue(&[link(0, 1, 0.7)]).unwrap();
        assert_eq!(s.decide(1, Verdict::Accept, None, None).unwrap().status, Status::Accepted);
        assert!(matches!(s.decide(1, Verdict::Reject, None, None), Err(StoreError::AlreadyDecided(1))));
        assert!(matches!(s.decide(9, Verdict::Reject, None, None), Err(StoreError::NotFound(9))));
        assert!(matches!(
            s.set_thresholds(Thresholds { autolink: 1.0, review: 2.0 }, None),
            Err(StoreError::InvalidThresholds { .. })
        ));
    }
}
