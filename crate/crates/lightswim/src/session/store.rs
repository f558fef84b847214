//! Journal-backed session registry.
//!
//! One `<id>.jsonl` file per session. Writers to a session are serialized by
//! its mutex; a command is applied to a copy of the session, journaled, and
//! only then made visible, so readers never see state that is not on disk.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use lightswim_core::ParameterSpace;

use super::journal::{read_journal, recover, JournalFile};
use super::model::{CreateRequest, JournalEvent, MeasurementInput, Session, SessionSummary, DEFAULT_MAX_GENERATIONS};
use super::SessionError;

#[derive(Debug)]
struct Entry {
    session: Session,
    journal: JournalFile,
}

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: RwLock<BTreeMap<String, Arc<Mutex<Entry>>>>,
}

/// What happened to each journal found at start-up.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecoveryReport {
    pub loaded: Vec<String>,
    /// Sessions whose journal was cut back, with the reason.
    pub repaired: Vec<(String, String)>,
    /// Journals that could not be used at all.
    pub skipped: Vec<(PathBuf, String)>,
}

impl SessionStore {
    /// Open `dir` (created if missing) and recover every journal in it.
    pub fn open(dir: impl Into<PathBuf>) -> Result<(SessionStore, RecoveryReport), SessionError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut report = RecoveryReport::default();
        let mut sessions = BTreeMap::new();
        for path in paths {
            match load_journal(&path) {
                Ok((entry, repair)) => {
                    let id = entry.session.id.clone();
                    if let Some(reason) = repair {
                        report.repaired.push((id.clone(), reason));
                    }
                    report.loaded.push(id.clone());
                    sessions.insert(id, Arc::new(Mutex::new(entry)));
                }
                Err(e) => report.skipped.push((path, e.to_string())),
            }
        }
        Ok((SessionStore { dir, sessions: RwLock::new(sessions) }, report))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn create(&self, req: &CreateRequest) -> Result<Session, SessionError> {
        self.create_at(req, Utc::now())
    }

    pub fn create_at(&self, req: &CreateRequest, at: DateTime<Utc>) -> Result<Session, SessionError> {
        let config = req.algorithm_config()?;
        let space = req.space.clone().unwrap_or_else(ParameterSpace::default_space);
        let seed = req.seed.unwrap_or_else(|| uuid::Uuid::new_v4().as_u64_pair().0);
        let max_generations = req.max_generations.unwrap_or(DEFAULT_MAX_GENERATIONS);
        let id = uuid::Uuid::new_v4().simple().to_string();
        let (session, events) =
            Session::create(id.clone(), req.name.clone(), config, space, seed, max_generations, at)?;
        let mut journal = JournalFile::create_new(&self.dir.join(format!("{id}.jsonl")))?;
        journal.append(&events, true)?;
        let snapshot = session.clone();
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id, Arc::new(Mutex::new(Entry { session, journal })));
        Ok(snapshot)
    }

    pub fn list(&self) -> Vec<SessionSummary> {
        let entries: Vec<_> = self.sessions.read().expect("session map poisoned").values().cloned().collect();
        let mut out: Vec<SessionSummary> =
            entries.iter().map(|e| e.lock().expect("session poisoned").session.summary()).collect();
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    pub fn get(&self, id: &str) -> Result<Session, SessionError> {
        let entry = self.entry(id)?;
        let session = entry.lock().expect("session poisoned").session.clone();
        Ok(session)
    }

    pub fn record_measurement(
        &self,
        id: &str,
        robot_index: usize,
        input: &MeasurementInput,
        overwrite: bool,
    ) -> Result<Session, SessionError> {
        self.command(id, false, |s| s.record_measurement(robot_index, input, overwrite, Utc::now()))
    }

    pub fn advance(&self, id: &str) -> Result<Session, SessionError> {
        self.command(id, true, |s| s.advance(Utc::now()))
    }

    pub fn export(&self, id: &str, format: &str) -> Result<String, SessionError> {
        match format {
            "csv" => Ok(self.get(id)?.export_csv()),
            other => Err(SessionError::UnknownFormat(other.to_string())),
        }
    }

    /// Force every journal to disk.
    pub fn sync_all(&self) -> Result<(), SessionError> {
        let entries: Vec<_> = self.sessions.read().expect("session map poisoned").values().cloned().collect();
        for e in entries {
            e.lock().expect("session poisoned").journal.sync()?;
        }
        Ok(())
    }

    fn entry(&self, id: &str) -> Result<Arc<Mutex<Entry>>, SessionError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    fn command<F>(&self, id: &str, sync: bool, f: F) -> Result<Session, SessionError>
    where
        F: FnOnce(&mut Session) -> Result<Vec<JournalEvent>, SessionError>,
    {
        let entry = self.entry(id)?;
        let mut entry = entry.lock().expect("session poisoned");
        let mut next = entry.session.clone();
        let events = f(&mut next)?;
        entry.journal.append(&events, sync)?;
        entry.session = next;
        Ok(entry.session.clone())
    }
}

/// Recover one journal file, cutting it back to the recovered prefix.
fn load_journal(path: &Path) -> Result<(Entry, Option<String>), SessionError> {
    let bytes = std::fs::read(path)?;
    let parsed = read_journal(&bytes);
    let recovered = recover(&parsed.events)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    if recovered.session.id != stem {
        return Err(SessionError::Journal(format!(
            "journal {} holds session `{}`",
            path.display(),
            recovered.session.id
        )));
    }
    let keep = parsed.ends[recovered.events_kept - 1];
    let reason = recovered
        .stopped
        .or(parsed.stopped)
        .or_else(|| (keep < bytes.len() as u64).then(|| "trailing bytes after the last event".to_string()));
    let journal = JournalFile::open_truncated(path, keep)?;
    Ok((Entry { session: recovered.session, journal }, reason))
}
