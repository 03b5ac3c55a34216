//! Output tree: one writer thread, files written in submission order, and a
//! manifest rewritten atomically after every file so a partial run always
//! leaves a consistent listing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::mpsc::{channel, Sender};
use std::thread::JoinHandle;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::fieldfile::{encode, FieldFile};

pub const MANIFEST: &str = "manifest.tsv";
const MANIFEST_HEADER: &str = "# infodyn manifest v1\npath\tvariable\tstep\tbytes\tsha256\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path relative to the output root, `/`-separated.
    pub path: String,
    pub variable: String,
    /// Solver step for field files; `None` for run-level artifacts.
    pub step: Option<u64>,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = MANIFEST_HEADER.to_string();
        for e in &self.entries {
            let step = e.step.map_or_else(|| "-".to_string(), |s| s.to_string());
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}",
                e.path, e.variable, step, e.bytes, e.sha256
            )
            .expect("string write");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let body = text
            .strip_prefix(MANIFEST_HEADER)
            .ok_or_else(|| Error::format(0, "missing manifest header"))?;
        let mut offset = MANIFEST_HEADER.len();
        let mut entries = Vec::new();
        for line in body.lines() {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |why: &str| Error::format(offset, format!("manifest line: {why}"));
            if cols.len() != 5 {
                return Err(bad("expected 5 columns"));
            }
            entries.push(ManifestEntry {
                path: cols[0].into(),
                variable: cols[1].into(),
                step: match cols[2] {
                    "-" => None,
                    s => Some(s.parse().map_err(|_| bad("bad step"))?),
                },
                bytes: cols[3].parse().map_err(|_| bad("bad byte count"))?,
                sha256: cols[4].into(),
            });
            offset += line.len() + 1;
        }
        Ok(Self { entries })
    }

    pub fn load(root: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(root.join(MANIFEST))?)
    }

    /// Check every listed file against its size and checksum.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for e in &self.entries {
            let bytes = std::fs::read(root.join(&e.path))?;
            if bytes.len() as u64 != e.bytes || sha256_hex(&bytes) != e.sha256 {
                return Err(Error::format(
                    0,
                    format!("{} does not match its manifest entry", e.path),
                ));
            }
        }
        Ok(())
    }

    /// Entries for one variable, in step order.
    pub fn variable(&self, name: &str) -> Vec<&ManifestEntry> {
        let mut v: Vec<&ManifestEntry> =
            self.entries.iter().filter(|e| e.variable == name).collect();
        v.sort_by_key(|e| e.step);
        v
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Job {
    path: String,
    variable: String,
    step: Option<u64>,
    bytes: Vec<u8>,
}

/// Serializes every write of a run onto one thread.
pub struct OutputWriter {
    root: PathBuf,
    tx: Option<Sender<Job>>,
    handle: Option<JoinHandle<Result<Manifest>>>,
}

impl OutputWriter {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        let (tx, rx) = channel::<Job>();
        let dir = root.to_path_buf();
        let handle = std::thread::spawn(move || -> Result<Manifest> {
            let mut manifest = Manifest::default();
            std::fs::write(dir.join(MANIFEST), manifest.render())?;
            for job in rx {
                let target = dir.join(&job.path);
                if let Some(parent) = target.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(&target, &job.bytes)?;
                manifest.entries.push(ManifestEntry {
                    sha256: sha256_hex(&job.bytes),
                    bytes: job.bytes.len() as u64,
                    path: job.path,
                    variable: job.variable,
                    step: job.step,
                });
                let tmp = dir.join(format!("{MANIFEST}.tmp"));
                std::fs::write(&tmp, manifest.render())?;
                std::fs::rename(&tmp, dir.join(MANIFEST))?;
            }
            Ok(manifest)
        });
        Ok(Self {
            root: root.to_path_buf(),
            tx: Some(tx),
            handle: Some(handle),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn send(&mut self, job: Job) -> Result<()> {
        let sent = self
            .tx
            .as_ref()
            .map(|tx| tx.send(job).is_ok())
            .unwrap_or(false);
        if sent {
            return Ok(());
        }
        // The writer stopped; surface its error.
        self.tx = None;
        match self.handle.take().map(|h| h.join()) {
            Some(Ok(Err(e))) => Err(e),
            _ => Err(Error::Io(std::io::Error::other("output writer stopped"))),
        }
    }

    pub fn field(&mut self, path: String, file: &FieldFile) -> Result<()> {
        let bytes = encode(file)?;
        self.send(Job {
            path,
            variable: file.header.variable.clone(),
            step: Some(file.header.t_index),
            bytes,
        })
    }

    pub fn text(&mut self, path: &str, variable: &str, text: String) -> Result<()> {
        self.send(Job {
            path: path.into(),
            variable: variable.into(),
            step: None,
            bytes: text.into_bytes(),
        })
    }

    /// Flush the queue and return the final manifest.
    pub fn finish(mut self) -> Result<Manifest> {
        self.tx = None;
        match self.handle.take() {
            Some(h) => h.join().unwrap_or_else(|_| {
                Err(Error::Io(std::io::Error::other("output writer panicked")))
            }),
            None => Err(Error::Io(std::io::Error::other(
                "output writer already stopped",
            ))),
        }
    }
}

impl Drop for OutputWriter {
    fn drop(&mut self) {
        self.tx = None;
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
