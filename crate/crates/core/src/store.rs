//! Single-file persistence with atomic commits.
//!
//! The store file is JSON Lines:
//!
//! ```text
//! {"format":"frmp-store","schema_version":1,"revision":7}
//! {"kind":"problem_type","code":"Landslide",...}
//! {"kind":"user","id":"am1",...}
//! {"kind":"segment","id":189,"geometry":[[22.6,40.98],...],...}
//! {"kind":"report","id":1,"report_code":"ClosedRoad","ogr_fid":189,...}
//! {"kind":"assignment","id":1,"report_ids":[1],...}
//! {"kind":"end","records":5}
//! ```
//!
//! A commit writes the whole snapshot to a sibling temp file, syncs it and
//! renames it over the store file, so a reader of the file sees either the
//! old or the new snapshot. The trailing `end` record makes truncation
//! detectable even when it falls on a line boundary.
//!
//! In memory, readers get an `Arc` of the last committed snapshot; writers
//! are serialized and publish a new snapshot only after the rename.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::network::{RoadSegment, SegmentId};
use crate::reports::{
    Catalog, ProblemReport, ProblemType, RepairAssignment, ReportBook, ReportId, UserId,
};

pub const SCHEMA_VERSION: u32 = 1;
const FORMAT_TAG: &str = "frmp-store";
const WRITE_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Revision(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserRole {
    /// Call center operator: records and edits reports and segments.
    #[serde(rename = "CCO")]
    Cco,
    /// Application manager: everything.
    #[serde(rename = "AM")]
    Am,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub id: UserId,
    pub display_name: String,
    pub role: UserRole,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mutation {
    PutSegment(RoadSegment),
    PutReport(ProblemReport),
    DeleteReport(ReportId),
    PutAssignment(RepairAssignment),
    PutUser(User),
    SetCatalog(Catalog),
}

/// Everything the store holds at one revision.
#[derive(Debug, Clone)]
pub struct StoreSnapshot {
    pub schema_version: u32,
    pub revision: Revision,
    pub segments: BTreeMap<SegmentId, RoadSegment>,
    pub book: ReportBook,
    pub users: BTreeMap<UserId, User>,
    pub catalog: Catalog,
    segments_revision: Revision,
}

impl PartialEq for StoreSnapshot {
    /// Compares stored content; `segments_revision` is a cache key and not stored.
    fn eq(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.revision == other.revision
            && self.segments == other.segments
            && self.book == other.book
            && self.users == other.users
            && self.catalog == other.catalog
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    schema_version: u32,
    revision: Revision,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    ProblemType(ProblemType),
    User(User),
    Segment(RoadSegment),
    Report(ProblemReport),
    Assignment(RepairAssignment),
    End { records: usize },
}

impl StoreSnapshot {
    pub fn empty() -> Self {
        StoreSnapshot {
            schema_version: SCHEMA_VERSION,
            revision: Revision(0),
            segments: BTreeMap::new(),
            book: ReportBook::default(),
            users: BTreeMap::new(),
            catalog: Catalog::default(),
            segments_revision: Revision(0),
        }
    }

    /// Revision of the last commit that touched segment data; a cached
    /// network graph built at this revision is still current.
    pub fn segments_revision(&self) -> Revision {
        self.segments_revision
    }

    fn apply(&mut self, mutation: Mutation) -> Result<()> {
        match mutation {
            Mutation::PutSegment(seg) => {
                seg.validate()?;
                self.segments.insert(seg.id, seg);
                self.segments_revision = Revision(self.revision.0 + 1);
            }
            Mutation::PutReport(report) => {
                report.validate()?;
                if let Some(prev) = self.book.reports.get(&report.id) {
                    if prev.report_status != report.report_status
                        && !prev.report_status.can_transition_to(report.report_status)
                    {
                        return Err(Error::State(format!(
                            "report {}: {} -> {} is not a permitted transition",
                            report.id, prev.report_status, report.report_status
                        )));
                    }
                }
                self.book.reports.insert(report.id, report);
            }
            Mutation::DeleteReport(id) => {
                self.book
                    .reports
                    .remove(&id)
                    .ok_or_else(|| Error::not_found("report", id))?;
            }
            Mutation::PutAssignment(a) => {
                if a.report_ids.is_empty() {
                    return Err(Error::validation(format!("assignment {} has no reports", a.id)));
                }
                self.book.assignments.insert(a.id, a);
            }
            Mutation::PutUser(user) => {
                self.users.insert(user.id.clone(), user);
            }
            Mutation::SetCatalog(catalog) => {
                catalog.validate()?;
                self.catalog = catalog;
            }
        }
        Ok(())
    }

    /// Every report points at a stored segment and a catalog code; every
    /// assignment points at stored reports.
    pub fn check_integrity(&self) -> Result<()> {
        for r in self.book.reports.values() {
            if !self.segments.contains_key(&r.segment_ref) {
                return Err(Error::Integrity(format!(
                    "report {} references missing segment {}",
                    r.id, r.segment_ref
                )));
            }
            if self.catalog.get(&r.report_code).is_none() {
                return Err(Error::Integrity(format!(
                    "report {} has code {:?} missing from the catalog",
                    r.id, r.report_code
                )));
            }
        }
        for a in self.book.assignments.values() {
            if let Some(missing) = a.report_ids.iter().find(|id| !self.book.reports.contains_key(id)) {
                return Err(Error::Integrity(format!(
                    "assignment {} references missing report {missing}",
                    a.id
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut records: Vec<Record> = Vec::new();
        records.extend(self.catalog.types.iter().cloned().map(Record::ProblemType));
        records.extend(self.users.values().cloned().map(Record::User));
        records.extend(self.segments.values().cloned().map(Record::Segment));
        records.extend(self.book.reports.values().cloned().map(Record::Report));
        records.extend(self.book.assignments.values().cloned().map(Record::Assignment));
        let count = records.len();
        records.push(Record::End { records: count });

        let header = Header {
            format: FORMAT_TAG.to_owned(),
            schema_version: self.schema_version,
            revision: self.revision,
        };
        let mut out = Vec::new();
        write_line(&mut out, &header);
        for r in &records {
            write_line(&mut out, r);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| Error::Load {
            location: format!("byte {}", e.valid_up_to()),
            message: "store file is not UTF-8".into(),
        })?;
        let mut lines = text.split_terminator('\n').enumerate();
        let load_err = |line: usize, message: String| Error::Load {
            location: format!("line {}", line + 1),
            message,
        };

        let (_, head) = lines.next().ok_or_else(|| load_err(0, "empty store file".into()))?;
        let header: Header = serde_json::from_str(head).map_err(|e| load_err(0, format!("bad header: {e}")))?;
        if header.format != FORMAT_TAG {
            return Err(load_err(0, format!("not a store file (format {:?})", header.format)));
        }
        if header.schema_version != SCHEMA_VERSION {
            return Err(load_err(
                0,
                format!(
                    "unrecognized schema_version {} (expected {SCHEMA_VERSION})",
                    header.schema_version
                ),
            ));
        }

        let mut snap = StoreSnapshot::empty();
        snap.revision = header.revision;
        snap.segments_revision = header.revision;
        snap.catalog.types.clear();
        let mut count = 0usize;
        let mut ended = false;
        for (n, raw) in lines {
            if ended {
                return Err(load_err(n, "data after end record".into()));
            }
            let value: Value = serde_json::from_str(raw).map_err(|e| load_err(n, format!("malformed record: {e}")))?;
            let what = describe(&value);
            let located = |message: String| Error::Load {
                location: format!("line {} ({what})", n + 1),
                message,
            };
            let record: Record = serde_json::from_value(value).map_err(|e| located(e.to_string()))?;
            match record {
                Record::End { records } => {
                    if records != count {
                        return Err(located(format!("end record counts {records} records, found {count}")));
                    }
                    ended = true;
                }
                Record::ProblemType(t) => {
                    count += 1;
                    snap.catalog.types.push(t);
                }
                Record::User(u) => {
                    count += 1;
                    snap.users.insert(u.id.clone(), u);
                }
                Record::Segment(s) => {
                    count += 1;
                    s.validate().map_err(|e| located(e.to_string()))?;
                    if snap.segments.insert(s.id, s).is_some() {
                        return Err(located("duplicate segment".into()));
                    }
                }
                Record::Report(r) => {
                    count += 1;
                    r.validate().map_err(|e| located(e.to_string()))?;
                    if snap.book.reports.insert(r.id, r).is_some() {
                        return Err(located("duplicate report".into()));
                    }
                }
                Record::Assignment(a) => {
                    count += 1;
                    if snap.book.assignments.insert(a.id, a).is_some() {
                        return Err(located("duplicate assignment".into()));
                    }
                }
            }
        }
        if !ended {
            return Err(Error::Load {
                location: "end of file".into(),
                message: "missing end record (truncated file?)".into(),
            });
        }
        snap.catalog.validate().map_err(|e| Error::Load {
            location: "catalog".into(),
            message: e.to_string(),
        })?;
        snap.check_integrity().map_err(|e| Error::Load {
            location: "references".into(),
            message: e.to_string(),
        })?;
        Ok(snap)
    }
}

fn describe(value: &Value) -> String {
    let kind = value.get("kind").and_then(Value::as_str).unwrap_or("record");
    match value.get("id").or_else(|| value.get("code")) {
        Some(Value::String(s)) => format!("{kind} {s}"),
        Some(v) => format!("{kind} {v}"),
        None => kind.to_owned(),
    }
}

fn write_line(out: &mut Vec<u8>, value: &impl Serialize) {
    serde_json::to_writer(&mut *out, value).expect("store records serialize");
    out.push(b'\n');
}

/// Points in a commit at which a hook is consulted. The hook runs before
/// the named step; returning an error aborts the commit there, as a crash
/// at that point would.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommitStage {
    CreateTemp,
    /// Before writing the chunk that starts at byte `offset`.
    WriteTemp { offset: usize, total: usize },
    SyncTemp,
    Rename,
    SyncDir,
}

/// Handle to an open store.
#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    current: RwLock<Arc<StoreSnapshot>>,
    writer: Mutex<()>,
}

impl Store {
    /// Loads the last committed snapshot, or starts an empty store with the
    /// default catalog when `path` does not exist. Nothing is written until
    /// the first commit (or [`Store::persist_if_missing`]).
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let temp = temp_path(&path);
        if temp.exists() {
            // Left behind by an interrupted commit; never part of committed state.
            fs::remove_file(&temp)?;
        }
        let snapshot = match fs::read(&path) {
            Ok(bytes) => StoreSnapshot::from_bytes(&bytes)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => StoreSnapshot::empty(),
            Err(e) => return Err(e.into()),
        };
        Ok(Store {
            path,
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn exists_on_disk(&self) -> bool {
        self.path.exists()
    }

    /// Writes the current snapshot if the store file does not exist yet.
    /// Returns whether a file was created.
    pub fn persist_if_missing(&self) -> Result<bool> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        if self.path.exists() {
            return Ok(false);
        }
        let snap = self.snapshot();
        write_atomically(&self.path, &snap.to_bytes(), &mut |_| Ok(())).map_err(|e| Error::Io(e.source))?;
        Ok(true)
    }

    /// The last committed snapshot.
    pub fn snapshot(&self) -> Arc<StoreSnapshot> {
        self.current.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn revision(&self) -> Revision {
        self.snapshot().revision
    }

    pub fn commit(&self, batch: Vec<Mutation>) -> Result<Revision> {
        self.commit_with_hook(batch, &mut |_| Ok(()))
    }

    pub fn commit_with_hook(
        &self,
        batch: Vec<Mutation>,
        hook: &mut dyn FnMut(CommitStage) -> io::Result<()>,
    ) -> Result<Revision> {
        self.transact_with_hook(|_| Ok::<_, Error>(((), batch)), hook)
            .map(|(_, rev)| rev)
    }

    /// Read-modify-write under the writer lock: `f` sees the latest
    /// committed snapshot and returns a value plus the mutations to commit.
    /// An empty batch commits nothing and keeps the revision.
    pub fn transact<T, E: From<Error>>(
        &self,
        f: impl FnOnce(&StoreSnapshot) -> std::result::Result<(T, Vec<Mutation>), E>,
    ) -> std::result::Result<(T, Revision), E> {
        self.transact_with_hook(f, &mut |_| Ok(()))
    }

    pub fn transact_with_hook<T, E: From<Error>>(
        &self,
        f: impl FnOnce(&StoreSnapshot) -> std::result::Result<(T, Vec<Mutation>), E>,
        hook: &mut dyn FnMut(CommitStage) -> io::Result<()>,
    ) -> std::result::Result<(T, Revision), E> {
        let _guard = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let base = self.snapshot();
        let (value, batch) = f(&base)?;
        if batch.is_empty() {
            return Ok((value, base.revision));
        }
        let mut next = (*base).clone();
        for m in batch {
            next.apply(m)?;
        }
        next.check_integrity()?;
        next.revision = Revision(base.revision.0 + 1);

        let bytes = next.to_bytes();
        let next = Arc::new(next);
        match write_atomically(&self.path, &bytes, hook) {
            Ok(()) => {}
            Err(WriteError { renamed: true, source }) => {
                // The new file is in place; it is the committed state.
                *self.current.write().unwrap_or_else(|e| e.into_inner()) = next;
                return Err(Error::Io(source).into());
            }
            Err(WriteError { source, .. }) => return Err(Error::Io(source).into()),
        }
        let rev = next.revision;
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = next;
        Ok((value, rev))
    }

    pub fn query_reports(&self, pred: impl Fn(&ProblemReport) -> bool) -> Vec<ProblemReport> {
        self.snapshot()
            .book
            .reports
            .values()
            .filter(|r| pred(r))
            .cloned()
            .collect()
    }

    pub fn query_segments(&self, pred: impl Fn(&RoadSegment) -> bool) -> Vec<RoadSegment> {
        self.snapshot()
            .segments
            .values()
            .filter(|s| pred(s))
            .cloned()
            .collect()
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

struct WriteError {
    renamed: bool,
    source: io::Error,
}

fn write_atomically(
    path: &Path,
    bytes: &[u8],
    hook: &mut dyn FnMut(CommitStage) -> io::Result<()>,
) -> std::result::Result<(), WriteError> {
    let before = |source| WriteError {
        renamed: false,
        source,
    };
    let temp = temp_path(path);
    hook(CommitStage::CreateTemp).map_err(before)?;
    let mut file = OpenOptions::new()
        .write(true)
        .create(true)
        .truncate(true)
        .open(&temp)
        .map_err(before)?;
    for (i, chunk) in bytes.chunks(WRITE_CHUNK).enumerate() {
        hook(CommitStage::WriteTemp {
            offset: i * WRITE_CHUNK,
            total: bytes.len(),
        })
        .map_err(before)?;
        file.write_all(chunk).map_err(before)?;
    }
    hook(CommitStage::SyncTemp).map_err(before)?;
    file.sync_all().map_err(before)?;
    drop(file);
    hook(CommitStage::Rename).map_err(before)?;
    fs::rename(&temp, path).map_err(before)?;

    let after = |source| WriteError {
        renamed: true,
        source,
    };
    hook(CommitStage::SyncDir).map_err(after)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        // Directory fsync is not supported everywhere; the rename itself is
        // already atomic.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::geo::GeoPoint;
    use crate::reports::{NewReport, ReportFilter, ReportStatus};

    fn seg(id: u64, lon: f64) -> RoadSegment {
        let pts = vec![GeoPoint::new(lon, 40.98).unwrap(), GeoPoint::new(lon + 0.01, 40.98).unwrap()];
        RoadSegment::new(SegmentId(id), pts).unwrap()
    }

    fn report(store: &Store, code: &str, segment: u64, clock: &ManualClock) -> ProblemReport {
        let snap = store.snapshot();
        snap.book
            .create_report(
                NewReport {
                    report_code: code.into(),
                    report_comments: String::new(),
                    segment_ref: SegmentId(segment),
                    location: None,
                },
                UserId::new("cco1"),
                &snap.catalog,
                &snap.segments,
                clock,
            )
            .unwrap()
    }

    #[test]
    fn absent_path_is_an_empty_store() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path().join("frmp.store")).unwrap();
        let snap = store.snapshot();
        assert_eq!(snap.schema_version, SCHEMA_VERSION);
        assert_eq!(snap.revision, Revision(0));
        assert!(snap.segments.is_empty());
        assert_eq!(snap.catalog, Catalog::default());
        assert!(store.query_reports(|_| true).is_empty());
        assert!(!store.exists_on_disk());
        assert!(store.persist_if_missing().unwrap());
        assert!(!store.persist_if_missing().unwrap());
        assert_eq!(*Store::open(store.path()).unwrap().snapshot(), *snap);
    }

    #[test]
    fn reports_survive_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frmp.store");
        let clock = ManualClock::fixture();
        let store = Store::open(&path).unwrap();
        store
            .commit(vec![Mutation::PutSegment(seg(189, 22.6)), Mutation::PutSegment(seg(378, 22.7))])
            .unwrap();
        let r1 = report(&store, "ClosedRoad", 189, &clock);
        store.commit(vec![Mutation::PutReport(r1)]).unwrap();
        let r2 = report(&store, "Landslide", 378, &clock);
        let rev = store.commit(vec![Mutation::PutReport(r2)]).unwrap();
        assert_eq!(rev, Revision(3));

        let reopened = Store::open(&path).unwrap();
        assert_eq!(reopened.snapshot().book.reports.len(), 2);
        assert_eq!(*reopened.snapshot(), *store.snapshot());
        let active = reopened.query_reports(|r| ReportFilter {
            status: Some(ReportStatus::Active),
            ..Default::default()
        }
        .matches(r));
        assert_eq!(active.len(), 2);
    }

    #[test]
    fn empty_batch_keeps_revision() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path().join("s")).unwrap();
        store.commit(vec![Mutation::PutSegment(seg(1, 1.0))]).unwrap();
        assert_eq!(store.commit(vec![]).unwrap(), Revision(1));
    }

    #[test]
    fn dangling_reference_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        let store = Store::open(&path).unwrap();
        store.commit(vec![Mutation::PutSegment(seg(1, 1.0))]).unwrap();
        let clock = ManualClock::fixture();
        let mut r = report(&store, "ClosedRoad", 1, &clock);
        r.segment_ref = SegmentId(404);
        let before = store.snapshot();
        let err = store.commit(vec![Mutation::PutReport(r)]);
        assert!(matches!(err, Err(Error::Integrity(_))));
        assert_eq!(*store.snapshot(), *before);
        assert_eq!(*Store::open(&path).unwrap().snapshot(), *before);
    }

    #[test]
    fn illegal_transition_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path().join("s")).unwrap();
        store.commit(vec![Mutation::PutSegment(seg(1, 1.0))]).unwrap();
        let clock = ManualClock::fixture();
        let r = report(&store, "ClosedRoad", 1, &clock);
        store.commit(vec![Mutation::PutReport(r.clone())]).unwrap();
        let resolved = ProblemReport {
            report_status: ReportStatus::Resolved,
            ..r.clone()
        };
        store.commit(vec![Mutation::PutReport(resolved)]).unwrap();
        let reopened = ProblemReport {
            report_status: ReportStatus::Active,
            ..r
        };
        assert!(matches!(store.commit(vec![Mutation::PutReport(reopened)]), Err(Error::State(_))));
    }

    #[test]
    fn truncated_file_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        let store = Store::open(&path).unwrap();
        store
            .commit(vec![Mutation::PutSegment(seg(1, 1.0)), Mutation::PutSegment(seg(2, 2.0))])
            .unwrap();
        let bytes = fs::read(&path).unwrap();
        for cut in [1, bytes.len() / 3, bytes.len() / 2, bytes.len() - 2] {
            fs::write(&path, &bytes[..cut]).unwrap();
            assert!(matches!(Store::open(&path), Err(Error::Load { .. })), "cut at {cut}");
        }
        // Cut exactly at a line boundary before the end record.
        let last_line = bytes[..bytes.len() - 1].iter().rposition(|&b| b == b'\n').unwrap();
        fs::write(&path, &bytes[..=last_line]).unwrap();
        assert!(matches!(Store::open(&path), Err(Error::Load { .. })));
    }

    #[test]
    fn load_error_names_the_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        let store = Store::open(&path).unwrap();
        store.commit(vec![Mutation::PutSegment(seg(77, 1.0))]).unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("\"length_m\":", "\"length_m\":\"x\",\"_\":");
        fs::write(&path, text).unwrap();
        let err = Store::open(&path).unwrap_err().to_string();
        assert!(err.contains("segment 77"), "{err}");
    }

    #[test]
    fn unknown_schema_version_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        Store::open(&path).unwrap().persist_if_missing().unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("\"schema_version\":1", "\"schema_version\":99");
        fs::write(&path, text).unwrap();
        let err = Store::open(&path).unwrap_err().to_string();
        assert!(err.contains("schema_version 99"), "{err}");
    }

    #[test]
    fn interrupted_commit_keeps_previous_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        let store = Store::open(&path).unwrap();
        store.commit(vec![Mutation::PutSegment(seg(1, 1.0))]).unwrap();
        let before = store.snapshot();

        let err = store.commit_with_hook(vec![Mutation::PutSegment(seg(2, 2.0))], &mut |stage| match stage {
            CommitStage::Rename => Err(io::Error::other("crash")),
            _ => Ok(()),
        });
        assert!(err.is_err());
        assert_eq!(*store.snapshot(), *before);
        assert!(temp_path(&path).exists());
        let reopened = Store::open(&path).unwrap();
        assert_eq!(*reopened.snapshot(), *before);
        assert!(!temp_path(&path).exists());
    }

    #[test]
    fn readers_see_committed_state_during_a_commit() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::open(dir.path().join("s")).unwrap());
        store.commit(vec![Mutation::PutSegment(seg(1, 1.0))]).unwrap();
        let reader = Arc::clone(&store);
        let mut seen = Vec::new();
        store
            .commit_with_hook(vec![Mutation::PutSegment(seg(2, 2.0))], &mut |stage| {
                if matches!(stage, CommitStage::SyncTemp | CommitStage::Rename) {
                    let r = Arc::clone(&reader);
                    let n = std::thread::spawn(move || r.snapshot().segments.len()).join().unwrap();
                    seen.push(n);
                }
                Ok(())
            })
            .unwrap();
        assert_eq!(seen, vec![1, 1]);
        assert_eq!(store.snapshot().segments.len(), 2);
    }
}
