//! Durable record store.
//!
//! Each corpus lives in its own directory:
//!
//! ```text
//! <data-dir>/<corpus>/log.jsonl          one JSON batch per line
//! <data-dir>/<corpus>/snapshots/<seq>.json
//! ```
//!
//! A batch is applied in memory only after its line (newline included) has
//! been written and synced. A line without its newline is a torn write and
//! is discarded when the log is loaded. Every key carries a revision that
//! grows by one per successful write; writers state the revision they read
//! and stale writes are refused.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    CorpusMeta,
    Document,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RecordKey {
    pub corpus: String,
    /// Empty for corpus-level records.
    pub document: String,
    pub kind: RecordKind,
    pub id: String,
}

impl RecordKey {
    pub fn corpus_meta(corpus: &str) -> Self {
        RecordKey {
            corpus: corpus.to_string(),
            document: String::new(),
            kind: RecordKind::CorpusMeta,
            id: corpus.to_string(),
        }
    }

    pub fn document(corpus: &str, doc_id: &str) -> Self {
        RecordKey {
            corpus: corpus.to_string(),
            document: doc_id.to_string(),
            kind: RecordKind::Document,
            id: doc_id.to_string(),
        }
    }
}

impl std::fmt::Display for RecordKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}/{:?}/{}", self.corpus, self.document, self.kind, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub key: RecordKey,
    pub revision: u64,
    pub deleted: bool,
    pub payload: Value,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("revision conflict on {key}: expected {expected}, current {current}")]
    Conflict { key: RecordKey, expected: u64, current: u64 },
    #[error("invalid corpus name `{0}`")]
    BadCorpusName(String),
    #[error("batch mixes corpora or repeats a key")]
    BadBatch,
    #[error("store I/O error at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt log {path} at line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("store is unusable after an interrupted write; reopen it")]
    Poisoned,
}

impl StoreError {
    fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One write of a batch. `payload: None` deletes.
#[derive(Debug, Clone)]
pub struct PutRequest {
    pub key: RecordKey,
    pub expected_revision: u64,
    pub payload: Option<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LogLine {
    seq: u64,
    records: Vec<StoredRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    seq: u64,
    records: Vec<StoredRecord>,
}

/// Simulated failure of the next log append, for crash testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    /// Bytes of the line that reach the file before the failure.
    pub after_bytes: usize,
    /// `true` leaves the partial line on disk and poisons the store, as a
    /// crash would. `false` models an I/O error the store recovers from.
    pub crash: bool,
}

#[derive(Debug, Default)]
struct CorpusLog {
    records: BTreeMap<RecordKey, StoredRecord>,
    seq: u64,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    corpora: BTreeMap<String, CorpusLog>,
    fault: Option<Fault>,
    poisoned: bool,
}

pub fn valid_corpus_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 128
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root` and loads every
    /// corpus directory found there.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| StoreError::io(&root, e))?;
        let mut store = Store {
            root,
            corpora: BTreeMap::new(),
            fault: None,
            poisoned: false,
        };
        let mut names = Vec::new();
        for entry in fs::read_dir(&store.root).map_err(|e| StoreError::io(&store.root, e))? {
            let entry = entry.map_err(|e| StoreError::io(&store.root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if entry.path().is_dir() && valid_corpus_name(&name) {
                names.push(name);
            }
        }
        names.sort();
        for name in names {
            let log = store.load_corpus(&name)?;
            store.corpora.insert(name, log);
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn corpus_dir(&self, corpus: &str) -> PathBuf {
        self.root.join(corpus)
    }

    fn log_path(&self, corpus: &str) -> PathBuf {
        self.corpus_dir(corpus).join("log.jsonl")
    }

    fn snapshot_dir(&self, corpus: &str) -> PathBuf {
        self.corpus_dir(corpus).join("snapshots")
    }

    fn load_corpus(&self, corpus: &str) -> Result<CorpusLog, StoreError> {
        let mut log = CorpusLog::default();
        let snap_dir = self.snapshot_dir(corpus);
        if snap_dir.is_dir() {
            let mut latest: Option<(u64, PathBuf)> = None;
            for entry in fs::read_dir(&snap_dir).map_err(|e| StoreError::io(&snap_dir, e))? {
                let path = entry.map_err(|e| StoreError::io(&snap_dir, e))?.path();
                let seq = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .and_then(|n| n.strip_suffix(".json"))
                    .and_then(|n| n.parse::<u64>().ok());
                if let Some(seq) = seq {
                    if latest.as_ref().is_none_or(|(s, _)| seq > *s) {
                        latest = Some((seq, path));
                    }
                }
            }
            if let Some((_, path)) = latest {
                let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
                let snap: Snapshot = serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
                    path: path.clone(),
                    line: 0,
                    message: e.to_string(),
                })?;
                log.seq = snap.seq;
                log.records = snap.records.into_iter().map(|r| (r.key.clone(), r)).collect();
            }
        }

        let path = self.log_path(corpus);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(log),
            Err(e) => return Err(StoreError::io(&path, e)),
        };
        let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let text = std::str::from_utf8(&bytes[..complete]).map_err(|e| StoreError::Corrupt {
            path: path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let entry: LogLine = serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if entry.seq <= log.seq {
                continue;
            }
            log.seq = entry.seq;
            for r in entry.records {
                log.records.insert(r.key.clone(), r);
            }
        }
        if complete < bytes.len() {
            let file = OpenOptions::new().write(true).open(&path).map_err(|e| StoreError::io(&path, e))?;
            file.set_len(complete as u64).map_err(|e| StoreError::io(&path, e))?;
        }
        Ok(log)
    }

    /// Arms a one-shot failure for the next append.
    pub fn inject_fault(&mut self, fault: Fault) {
        self.fault = Some(fault);
    }

    pub fn corpora(&self) -> impl Iterator<Item = &str> {
        self.corpora.keys().map(String::as_str)
    }

    pub fn get(&self, key: &RecordKey) -> Option<&StoredRecord> {
        self.corpora.get(&key.corpus)?.records.get(key)
    }

    /// Live (not deleted) record.
    pub fn get_live(&self, key: &RecordKey) -> Option<&StoredRecord> {
        self.get(key).filter(|r| !r.deleted)
    }

    pub fn revision(&self, key: &RecordKey) -> u64 {
        self.get(key).map_or(0, |r| r.revision)
    }

    /// Live records of a corpus with the given kind, in key order.
    pub fn list(&self, corpus: &str, kind: RecordKind) -> Vec<&StoredRecord> {
        self.corpora
            .get(corpus)
            .map(|c| {
                c.records
                    .values()
                    .filter(|r| r.key.kind == kind && !r.deleted)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Every record, deleted ones included, across all corpora.
    pub fn all_records(&self) -> impl Iterator<Item = &StoredRecord> {
        self.corpora.values().flat_map(|c| c.records.values())
    }

    pub fn put(&mut self, key: RecordKey, payload: Value, expected_revision: u64) -> Result<u64, StoreError> {
        let revs = self.put_batch(vec![PutRequest {
            key,
            expected_revision,
            payload: Some(payload),
        }])?;
        Ok(revs[0])
    }

    pub fn delete(&mut self, key: RecordKey, expected_revision: u64) -> Result<u64, StoreError> {
        let revs = self.put_batch(vec![PutRequest {
            key,
            expected_revision,
            payload: None,
        }])?;
        Ok(revs[0])
    }

    /// Applies all writes or none. All keys must belong to one corpus.
    pub fn put_batch(&mut self, batch: Vec<PutRequest>) -> Result<Vec<u64>, StoreError> {
        if self.poisoned {
            return Err(StoreError::Poisoned);
        }
        let Some(first) = batch.first() else {
            return Ok(Vec::new());
        };
        let corpus = first.key.corpus.clone();
        if !valid_corpus_name(&corpus) {
            return Err(StoreError::BadCorpusName(corpus));
        }
        let mut seen = std::collections::HashSet::new();
        if batch.iter().any(|p| p.key.corpus != corpus || !seen.insert(&p.key)) {
            return Err(StoreError::BadBatch);
        }
        let mut records = Vec::with_capacity(batch.len());
        for req in &batch {
            let current = self.revision(&req.key);
            if current != req.expected_revision {
                return Err(StoreError::Conflict {
                    key: req.key.clone(),
                    expected: req.expected_revision,
                    current,
                });
            }
            records.push(StoredRecord {
                key: req.key.clone(),
                revision: current + 1,
                deleted: req.payload.is_none(),
                payload: req.payload.clone().unwrap_or(Value::Null),
            });
        }
        let seq = self.corpora.get(&corpus).map_or(0, |c| c.seq) + 1;
        let line = LogLine { seq, records };
        let mut bytes = serde_json::to_vec(&line).expect("records serialize");
        bytes.push(b'\n');
        self.append(&corpus, &bytes)?;

        let log = self.corpora.entry(corpus).or_default();
        log.seq = seq;
        let revs = line.records.iter().map(|r| r.revision).collect();
        for r in line.records {
            log.records.insert(r.key.clone(), r);
        }
        Ok(revs)
    }

    fn append(&mut self, corpus: &str, bytes: &[u8]) -> Result<(), StoreError> {
        let dir = self.corpus_dir(corpus);
        fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        let path = self.log_path(corpus);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| StoreError::io(&path, e))?;
        let before = file.metadata().map_err(|e| StoreError::io(&path, e))?.len();

        let result = match self.fault.take() {
            Some(fault) => {
                let n = fault.after_bytes.min(bytes.len().saturating_sub(1));
                let _ = file.write_all(&bytes[..n]);
                if fault.crash {
                    self.poisoned = true;
                    return Err(StoreError::Poisoned);
                }
                Err(io::Error::other("injected write failure"))
            }
            None => file.write_all(bytes).and_then(|_| file.sync_data()),
        };
        if let Err(e) = result {
            let _ = file.set_len(before);
            return Err(StoreError::io(&path, e));
        }
        Ok(())
    }

    /// Writes a snapshot of the corpus and starts a fresh log.
    pub fn compact(&mut self, corpus: &str) -> Result<(), StoreError> {
        if self.poisoned {
            return Err(StoreError::Poisoned);
        }
        let Some(log) = self.corpora.get(corpus) else {
            return Ok(());
        };
        let dir = self.snapshot_dir(corpus);
        fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        let snap = Snapshot {
            seq: log.seq,
            records: log.records.values().cloned().collect(),
        };
        let path = dir.join(format!("{}.json", log.seq));
        let tmp = dir.join(format!("{}.json.tmp", log.seq));
        let bytes = serde_json::to_vec(&snap).expect("records serialize");
        write_synced(&tmp, &bytes)?;
        fs::rename(&tmp, &path).map_err(|e| StoreError::io(&path, e))?;
        let log_path = self.log_path(corpus);
        let log_tmp = log_path.with_extension("jsonl.tmp");
        write_synced(&log_tmp, b"")?;
        fs::rename(&log_tmp, &log_path).map_err(|e| StoreError::io(&log_path, e))?;
        Ok(())
    }
}

fn write_synced(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let mut f = File::create(path).map_err(|e| StoreError::io(path, e))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .map_err(|e| StoreError::io(path, e))
}
