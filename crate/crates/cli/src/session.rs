//! Live draft sessions and their on-disk snapshots.
//!
//! A session directory holds `meta.json` (ranking and mode) and
//! `picks.jsonl`, the pick log appended after every accepted pick. Restoring
//! replays the log, so a restarted service resumes at the same revision.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use frc_core::draft::{parse_pick_log, DraftError, DraftMode, DraftState, PickEvent};
use frc_core::TeamId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Draft(#[from] DraftError),
    #[error("stale revision {given}, session is at {current}")]
    StaleRevision { given: u64, current: u64 },
    #[error("session storage: {0}")]
    Storage(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    id: String,
    ranking: Vec<TeamId>,
    mode: DraftMode,
}

/// One draft. The revision counts accepted picks, so it starts at 0 and
/// equals the pick-log length.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub state: DraftState,
    pub log: Vec<PickEvent>,
    dir: Option<PathBuf>,
}

impl Session {
    pub fn create(id: String, ranking: Vec<TeamId>, mode: DraftMode, root: Option<&Path>) -> Result<Session, SessionError> {
        let state = DraftState::new(ranking.clone(), mode.clone())?;
        let dir = match root {
            Some(root) => {
                let dir = root.join(&id);
                fs::create_dir_all(&dir).map_err(storage(&dir))?;
                let meta = Meta { id: id.clone(), ranking, mode };
                let path = dir.join("meta.json");
                fs::write(&path, serde_json::to_string_pretty(&meta).expect("meta serializes")).map_err(storage(&path))?;
                fs::write(dir.join("picks.jsonl"), "").map_err(storage(&dir))?;
                Some(dir)
            }
            None => None,
        };
        Ok(Session {
            id,
            state,
            log: Vec::new(),
            dir,
        })
    }

    pub fn revision(&self) -> u64 {
        self.log.len() as u64
    }

    /// Applies a pick written against `revision`. Nothing changes on error.
    pub fn pick(&mut self, picked: &TeamId, revision: u64) -> Result<PickEvent, SessionError> {
        if revision != self.revision() {
            return Err(SessionError::StaleRevision {
                given: revision,
                current: self.revision(),
            });
        }
        let mut next = self.state.clone();
        let event = next.pick(picked)?;
        if let Some(dir) = &self.dir {
            let path = dir.join("picks.jsonl");
            let mut file = OpenOptions::new().append(true).open(&path).map_err(storage(&path))?;
            let line = serde_json::to_string(&event).expect("pick serializes");
            writeln!(file, "{line}").map_err(storage(&path))?;
        }
        self.state = next;
        self.log.push(event.clone());
        Ok(event)
    }

    fn restore(dir: &Path) -> Result<Session, SessionError> {
        let meta_path = dir.join("meta.json");
        let text = fs::read_to_string(&meta_path).map_err(storage(&meta_path))?;
        let meta: Meta = serde_json::from_str(&text).map_err(|e| SessionError::Storage(format!("{}: {e}", meta_path.display())))?;
        let log_path = dir.join("picks.jsonl");
        let log_text = fs::read_to_string(&log_path).unwrap_or_default();
        let log = parse_pick_log(&log_text)?;
        let state = DraftState::replay(meta.ranking, meta.mode, &log)?;
        Ok(Session {
            id: meta.id,
            state,
            log,
            dir: Some(dir.to_path_buf()),
        })
    }
}

fn storage(path: &Path) -> impl Fn(std::io::Error) -> SessionError + '_ {
    move |e| SessionError::Storage(format!("{}: {e}", path.display()))
}

/// Every session saved under `root`, in id order. Directories that fail to
/// replay are reported rather than silently dropped.
pub fn restore_all(root: &Path) -> Result<Vec<Session>, SessionError> {
    let mut sessions = Vec::new();
    if !root.exists() {
        return Ok(sessions);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(storage(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("meta.json").is_file())
        .collect();
    dirs.sort();
    for dir in dirs {
        sessions.push(Session::restore(&dir)?);
    }
    Ok(sessions)
}
