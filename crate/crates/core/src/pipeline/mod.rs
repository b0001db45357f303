//! Stage driver: each stage reads inputs or earlier intermediates under
//! the output directory, writes its own artifacts, and appends one line to
//! `run_report.jsonl`.

mod config;
mod stages;

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::Error;

pub use config::{Inputs, PipelineConfig, DEFAULT_CUTOFF_YEAR, DEFAULT_PRIMARY_COVERAGE_END_YEAR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Tag,
    Normalize,
    AndMerge,
    Link,
    Affil,
    Emit,
    Graph,
    Eval,
}

impl Stage {
    /// Execution order of `all`.
    pub const ALL: [Stage; 9] = [
        Stage::Ingest,
        Stage::Tag,
        Stage::Normalize,
        Stage::AndMerge,
        Stage::Link,
        Stage::Affil,
        Stage::Emit,
        Stage::Graph,
        Stage::Eval,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Tag => "tag",
            Stage::Normalize => "normalize",
            Stage::AndMerge => "and-merge",
            Stage::Link => "link",
            Stage::Affil => "affil",
            Stage::Emit => "emit",
            Stage::Graph => "graph",
            Stage::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub counts: BTreeMap<String, serde_json::Value>,
    pub warnings: Vec<String>,
    pub duration_ms: u64,
}

impl StageReport {
    pub fn count(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.counts.insert(key.to_string(), value.into());
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }
}

/// Locations of every artifact under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn work(&self, name: &str) -> PathBuf {
        self.root.join("work").join(name)
    }

    pub fn table(&self, file_name: &str) -> PathBuf {
        self.root.join(file_name)
    }

    pub fn graph(&self, name: &str) -> PathBuf {
        self.root.join("graph").join(name)
    }

    pub fn eval(&self, name: &str) -> PathBuf {
        self.root.join("eval").join(name)
    }

    pub fn run_report(&self) -> PathBuf {
        self.root.join("run_report.jsonl")
    }
}

pub struct Pipeline {
    config: PipelineConfig,
    layout: Layout,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, Error> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        let layout = Layout {
            root: config.out_dir.clone(),
        };
        for dir in [layout.root.clone(), layout.root.join("work"), layout.root.join("graph"), layout.root.join("eval")] {
            fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir, source })?;
        }
        Ok(Pipeline { config, layout, pool })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Runs one stage and appends its report.
    pub fn run(&self, stage: Stage) -> Result<StageReport, Error> {
        let started = Instant::now();
        let mut report = StageReport {
            stage: stage.as_str().to_string(),
            ..Default::default()
        };
        self.pool.install(|| stages::run(stage, &self.config, &self.layout, &mut report))?;
        report.duration_ms = started.elapsed().as_millis() as u64;
        self.append_report(&report)?;
        Ok(report)
    }

    /// Truncates the run report, then runs every stage in order.
    pub fn run_all(&self) -> Result<Vec<StageReport>, Error> {
        let path = self.layout.run_report();
        File::create(&path).map_err(|source| Error::Io { path, source })?;
        Stage::ALL.iter().map(|s| self.run(*s)).collect()
    }

    fn append_report(&self, report: &StageReport) -> Result<(), Error> {
        let path = self.layout.run_report();
        let io = |source| Error::Io { path: path.clone(), source };
        let mut f = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        let line = serde_json::to_string(report).expect("report serializes");
        writeln!(f, "{line}").map_err(io)
    }
}

pub(crate) fn require<'a>(what: &str, path: Option<&'a Path>) -> Result<&'a Path, Error> {
    match path {
        Some(p) if p.exists() => Ok(p),
        Some(p) => Err(Error::MissingInput {
            what: what.to_string(),
            path: p.to_path_buf(),
        }),
        None => Err(Error::Config(format!("input `{what}` is not configured"))),
    }
}

pub(crate) fn optional<'a>(what: &str, path: Option<&'a Path>) -> Result<Option<&'a Path>, Error> {
    path.map(|p| require(what, Some(p))).transpose()
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub(crate) fn open(path: &Path, what: &str) -> Result<BufReader<File>, Error> {
    File::open(path).map(BufReader::new).map_err(|_| Error::MissingInput {
        what: what.to_string(),
        path: path.to_path_buf(),
    })
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<usize, Error> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut w = create(path)?;
    let mut n = 0;
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| io(e.into()))?;
        w.write_all(b"\n").map_err(io)?;
        n += 1;
    }
    w.flush().map_err(io)?;
    Ok(n)
}

pub(crate) fn read_jsonl<T: DeserializeOwned>(path: &Path, what: &str) -> Result<Vec<T>, Error> {
    let r = open(path, what)?;
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Intermediate {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}
