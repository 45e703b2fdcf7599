//! On-disk layout of a run: versioned CSVs, binary snapshots, manifest, atomic publish.

use super::HarnessError;
use crate::field::{Field, Grid};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

pub const CSV_VERSION: u32 = 1;
pub const SNAPSHOT_MAGIC: &[u8; 4] = b"DPSN";
pub const SNAPSHOT_VERSION: u32 = 1;

pub const MANIFEST: &str = "artifact.toml";
pub const CONFIG_ECHO: &str = "config.toml";
pub const INVARIANTS: &str = "invariants.csv";
pub const CERTIFICATES: &str = "certificates.csv";
pub const SLOPES: &str = "slopes.csv";
pub const VERDICT: &str = "verdict.txt";
pub const SUMMARY: &str = "summary.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    Fail,
    NumericFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail => 1,
            RunStatus::NumericFailure => 3,
        }
    }

    pub fn worst(self, other: RunStatus) -> RunStatus {
        if self.exit_code() >= other.exit_code() {
            self
        } else {
            other
        }
    }
}

/// Manifest of one run directory; paths are relative to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub kind: String,
    pub status: RunStatus,
    pub exit_code: i32,
    /// Set when a numeric failure cut the run short.
    pub partial: bool,
    pub message: String,
    pub config: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariants: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<PathBuf>,
    pub verdict: PathBuf,
    pub plots: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    /// Per-seed subdirectories of a parallel sweep.
    pub children: Vec<PathBuf>,
}

impl RunArtifact {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            status: RunStatus::Pass,
            exit_code: 0,
            partial: false,
            message: String::new(),
            config: PathBuf::from(CONFIG_ECHO),
            invariants: None,
            certificates: None,
            snapshots: None,
            verdict: PathBuf::from(VERDICT),
            plots: Vec::new(),
            summary: None,
            children: Vec::new(),
        }
    }

    pub fn set_status(&mut self, status: RunStatus) {
        self.status = status;
        self.exit_code = status.exit_code();
    }

    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let text = toml::to_string(self).map_err(|e| HarnessError::Report(e.to_string()))?;
        write_text(&dir.join(MANIFEST), &text)
    }

    pub fn read(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        toml::from_str(&text).map_err(|e| HarnessError::Report(format!("{}: {e}", path.display())))
    }

    /// Every listed path exists under `dir`.
    pub fn missing(&self, dir: &Path) -> Vec<PathBuf> {
        let listed = [Some(&self.config), self.invariants.as_ref(), self.certificates.as_ref(), self.snapshots.as_ref()]
            .into_iter()
            .flatten()
            .chain(std::iter::once(&self.verdict))
            .chain(self.plots.iter())
            .chain(self.summary.iter())
            .chain(self.children.iter());
        listed.filter(|p| !dir.join(p).exists()).cloned().collect()
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// CSV whose first line is `# <table> v<CSV_VERSION>`.
pub fn write_csv<T: Serialize>(path: &Path, table: &str, rows: &[T]) -> Result<(), HarnessError> {
    let mut file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    writeln!(file, "# {table} v{CSV_VERSION}").map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row).map_err(|e| HarnessError::Report(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Columns by header name; rejects files without the version line.
#[derive(Clone, Debug)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let file = fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(|e| HarnessError::io(path, e))?;
        let version = first.trim().rsplit(' ').next().unwrap_or("");
        if !first.starts_with("# ") || version != format!("v{CSV_VERSION}") {
            return Err(HarnessError::Report(format!("{}: missing or unsupported version line", path.display())));
        }
        let mut r = csv::Reader::from_reader(reader);
        let bad = |e: csv::Error| HarnessError::Report(format!("{}: {e}", path.display()));
        let headers = r.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()).map_err(bad))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, HarnessError> {
        let i = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Report(format!("column {name} missing")))?;
        self.rows
            .iter()
            .map(|r| r[i].parse::<f64>().map_err(|e| HarnessError::Report(format!("column {name}: {e}"))))
            .collect()
    }

    pub fn has(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }
}

/// Little-endian: magic, version `u32`, points `u64`, half-length `f64`, time `f64`, samples.
pub fn write_snapshot(path: &Path, t: f64, u: &Field) -> Result<(), HarnessError> {
    let g = u.grid();
    let mut buf = Vec::with_capacity(32 + 8 * u.len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.len() as u64).to_le_bytes());
    buf.extend_from_slice(&g.half_length().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for v in u.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf).map_err(|e| HarnessError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<(f64, Field), HarnessError> {
    let mut bytes = Vec::new();
    fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| HarnessError::io(path, e))?;
    let bad = |what: &str| HarnessError::Report(format!("{}: {what}", path.display()));
    if bytes.len() < 32 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(bad("not a snapshot file"));
    }
    let word = |at: usize| <[u8; 8]>::try_from(&bytes[at..at + 8]).expect("8 bytes");
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(bad(&format!("unsupported snapshot version {version}")));
    }
    let n = u64::from_le_bytes(word(8)) as usize;
    let half = f64::from_le_bytes(word(16));
    let t = f64::from_le_bytes(word(24));
    if bytes.len() != 32 + 8 * n {
        return Err(bad("truncated samples"));
    }
    let values = (0..n).map(|j| f64::from_le_bytes(word(32 + 8 * j))).collect();
    let grid = Grid::new(half, n).map_err(|e| bad(&e.to_string()))?;
    let field = Field::new(grid, values).map_err(|e| bad(&e.to_string()))?;
    Ok((t, field))
}

/// Snapshot files of a run directory in index order.
pub fn snapshot_files(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let entries = match fs::read_dir(&snap_dir) {
        Ok(e) => e,
        Err(_) => return Ok(Vec::new()),
    };
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "dpsn"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn snapshot_name(index: usize) -> String {
    format!("snap_{index:05}.dpsn")
}

/// Fresh sibling directory that [`publish`] renames onto `target`.
pub fn staging_dir(target: &Path) -> Result<PathBuf, HarnessError> {
    let parent = target.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    let staging = parent.join(format!(".{name}.tmp-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| HarnessError::io(&staging, e))?;
    }
    fs::create_dir_all(&staging).map_err(|e| HarnessError::io(&staging, e))?;
    Ok(staging)
}

/// Replaces `target` by `staging`; a previous run at `target` is removed first.
pub fn publish(staging: &Path, target: &Path) -> Result<(), HarnessError> {
    if target.exists() {
        fs::remove_dir_all(target).map_err(|e| HarnessError::io(target, e))?;
    }
    fs::rename(staging, target).map_err(|e| HarnessError::io(target, e))
}
