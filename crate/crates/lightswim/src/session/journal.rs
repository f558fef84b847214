//! Newline-delimited JSON journals and replay.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use super::model::{EventBody, JournalEvent, Session};
use super::SessionError;

/// Result of replaying a journal.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovered {
    pub session: Session,
    /// Events kept; the session's `last_seq` equals this.
    pub events_kept: usize,
    /// Why replay stopped early, if it did.
    pub stopped: Option<String>,
}

/// Replay `events` from the start.
///
/// Replay stops at the first gap, corrupt or non-reproducible event. The
/// result is the last state in which a generation is collecting or the
/// session is complete, so a journal cut between an advance's two events
/// rolls back to before the advance.
pub fn recover(events: &[JournalEvent]) -> Result<Recovered, SessionError> {
    let first = events.first().ok_or_else(|| SessionError::Journal("journal is empty".into()))?;
    let mut state = Session::from_created(first)?;
    let mut kept: Option<(Session, usize)> = None;
    let mut stopped = None;
    for (i, ev) in events.iter().enumerate().skip(1) {
        if ev.seq != state.last_seq + 1 {
            stopped = Some(format!("expected seq {}, found {}", state.last_seq + 1, ev.seq));
            break;
        }
        let mut next = state.clone();
        if let Err(e) = next.apply(ev) {
            stopped = Some(format!("seq {}: {e}", ev.seq));
            break;
        }
        state = next;
        if !matches!(ev.body, EventBody::GenerationCompleted { .. }) {
            kept = Some((state.clone(), i + 1));
        }
    }
    if kept.as_ref().is_none_or(|(_, n)| *n < events.len()) && stopped.is_none() {
        stopped = Some("journal ends in the middle of an advance".into());
    }
    match kept {
        Some((session, events_kept)) => Ok(Recovered { session, events_kept, stopped }),
        None => Err(SessionError::Journal(stopped.unwrap_or_else(|| "no generation was proposed".into()))),
    }
}

/// Parsed journal lines with the byte offset just past each one.
#[derive(Debug, Clone, Default)]
pub struct JournalReader {
    pub events: Vec<JournalEvent>,
    pub ends: Vec<u64>,
    /// Why parsing stopped before the end of the file, if it did.
    pub stopped: Option<String>,
}

/// Parse a journal. A final line without a newline counts as torn.
pub fn read_journal(bytes: &[u8]) -> JournalReader {
    let mut out = JournalReader::default();
    let mut start = 0usize;
    while start < bytes.len() {
        let Some(len) = bytes[start..].iter().position(|&b| b == b'\n') else {
            out.stopped = Some(format!("torn final line at byte {start}"));
            break;
        };
        let line = &bytes[start..start + len];
        match serde_json::from_slice::<JournalEvent>(line) {
            Ok(ev) => {
                out.events.push(ev);
                out.ends.push((start + len + 1) as u64);
            }
            Err(e) => {
                out.stopped = Some(format!("line {}: {e}", out.events.len() + 1));
                break;
            }
        }
        start += len + 1;
    }
    out
}

/// Append-only handle on one session's journal file.
#[derive(Debug)]
pub(crate) struct JournalFile {
    file: File,
}

impl JournalFile {
    pub(crate) fn create_new(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().append(true).create_new(true).open(path)?;
        Ok(JournalFile { file })
    }

    /// Open for appending after cutting the file to `len` bytes.
    pub(crate) fn open_truncated(path: &Path, len: u64) -> std::io::Result<Self> {
        let file = OpenOptions::new().write(true).open(path)?;
        if file.metadata()?.len() != len {
            file.set_len(len)?;
            file.sync_all()?;
        }
        drop(file);
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(JournalFile { file })
    }

    /// Write `events` as one buffer; `sync` forces them to disk.
    pub(crate) fn append(&mut self, events: &[JournalEvent], sync: bool) -> std::io::Result<()> {
        let mut buf = Vec::new();
        for ev in events {
            serde_json::to_writer(&mut buf, ev)?;
            buf.push(b'\n');
        }
        self.file.write_all(&buf)?;
        self.file.flush()?;
        if sync {
            self.file.sync_data()?;
        }
        Ok(())
    }

    pub(crate) fn sync(&self) -> std::io::Result<()> {
        self.file.sync_data()
    }
}
