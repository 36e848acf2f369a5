//! One append-only JSON-lines file per election. The first record creates
//! the election; every later record is a ballot, and replaying the file in
//! order rebuilds the state.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use dembudget::format::{BallotDoc, ElectionFile};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Created {
        election: ElectionFile,
    },
    Ballot {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        section: Option<String>,
        voter: String,
        ballot: BallotDoc,
    },
}

/// Ballots are keyed by section (`None` for the top level) and voter.
pub type BallotKey = (Option<String>, String);

pub struct Entry {
    template: ElectionFile,
    ballots: BTreeMap<BallotKey, BallotDoc>,
    log: File,
}

impl Entry {
    /// The election with every stored ballot, in voter order.
    pub fn snapshot(&self) -> ElectionFile {
        self.with_ballot(None)
    }

    /// As `snapshot`, with one ballot added or replaced.
    pub fn with_ballot(&self, extra: Option<(&BallotKey, &BallotDoc)>) -> ElectionFile {
        let mut ballots = self.ballots.clone();
        if let Some((key, doc)) = extra {
            ballots.insert(key.clone(), doc.clone());
        }
        let mut file = self.template.clone();
        for ((section, voter), doc) in ballots {
            let doc = BallotDoc {
                voter: Some(voter),
                ..doc
            };
            match section {
                None => file.ballots.push(doc),
                Some(id) => {
                    if let Some(s) = file.sections.iter_mut().flatten().find(|s| s.id == id) {
                        s.ballots.push(doc);
                    }
                }
            }
        }
        file
    }

    pub fn ballot(&self, key: &BallotKey) -> Option<&BallotDoc> {
        self.ballots.get(key)
    }

    pub fn has_section(&self, id: &str) -> bool {
        self.template.sections.iter().flatten().any(|s| s.id == id)
    }

    /// Appends the ballot to the log, then applies it.
    pub fn put_ballot(&mut self, key: BallotKey, ballot: BallotDoc) -> io::Result<()> {
        let record = Record::Ballot {
            section: key.0.clone(),
            voter: key.1.clone(),
            ballot,
        };
        append(&mut self.log, &record)?;
        let Record::Ballot { ballot, .. } = record else { unreachable!() };
        self.ballots.insert(key, ballot);
        Ok(())
    }
}

pub struct Store {
    dir: PathBuf,
    elections: RwLock<HashMap<Uuid, Arc<Mutex<Entry>>>>,
}

impl Store {
    /// Opens the directory, creating it if needed, and replays every log.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Store> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut elections = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| Uuid::parse_str(s).ok())
            else {
                continue;
            };
            let entry = replay(&path)?;
            elections.insert(id, Arc::new(Mutex::new(entry)));
        }
        tracing::info!(count = elections.len(), dir = %dir.display(), "store opened");
        Ok(Store {
            dir,
            elections: RwLock::new(elections),
        })
    }

    pub fn create(&self, election: ElectionFile) -> io::Result<Uuid> {
        let id = Uuid::new_v4();
        let path = self.path(id);
        let mut log = OpenOptions::new().append(true).create_new(true).open(&path)?;
        let record = Record::Created { election };
        append(&mut log, &record)?;
        let Record::Created { election } = record else { unreachable!() };
        let entry = Entry {
            template: election,
            ballots: BTreeMap::new(),
            log,
        };
        self.elections.write().unwrap().insert(id, Arc::new(Mutex::new(entry)));
        Ok(id)
    }

    pub fn get(&self, id: Uuid) -> Option<Arc<Mutex<Entry>>> {
        self.elections.read().unwrap().get(&id).cloned()
    }

    fn path(&self, id: Uuid) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }
}

fn append(log: &mut File, record: &Record) -> io::Result<()> {
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    log.write_all(&line)?;
    log.sync_data()
}

fn replay(path: &Path) -> io::Result<Entry> {
    let bad = |line: usize, reason: String| {
        io::Error::new(io::ErrorKind::InvalidData, format!("{}:{line}: {reason}", path.display()))
    };
    let text = fs::read_to_string(path)?;
    let mut template = None;
    let mut ballots = BTreeMap::new();
    let mut valid = 0;
    let pieces: Vec<&str> = text.split_inclusive('\n').collect();
    for (i, piece) in pieces.iter().enumerate() {
        let record: Record = match serde_json::from_str(piece) {
            Ok(r) if piece.ends_with('\n') => r,
            // A torn final line is what an interrupted append leaves behind.
            _ if i + 1 == pieces.len() && i > 0 => {
                tracing::warn!("{}:{}: dropping incomplete record", path.display(), i + 1);
                break;
            }
            Ok(_) => unreachable!("only the last piece can lack a newline"),
            Err(e) => return Err(bad(i + 1, e.to_string())),
        };
        match (record, &template) {
            (Record::Created { election }, None) => template = Some(election),
            (Record::Ballot { section, voter, ballot }, Some(_)) => {
                ballots.insert((section, voter), ballot);
            }
            (Record::Created { .. }, Some(_)) => return Err(bad(i + 1, "election created twice".into())),
            (Record::Ballot { .. }, None) => return Err(bad(i + 1, "ballot before the election".into())),
        }
        valid += piece.len();
    }
    let template = template.ok_or_else(|| bad(1, "empty log".into()))?;
    let log = OpenOptions::new().append(true).open(path)?;
    if valid < text.len() {
        log.set_len(valid as u64)?;
    }
    Ok(Entry {
        template,
        ballots,
        log,
    })
}
