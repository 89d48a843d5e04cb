//! Output directory handling, input capture and run manifests.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    /// Bad parameters or input files; exit code 2.
    Invalid(String),
    /// Missing or unwritable paths; exit code 2.
    Io(String),
    /// Numerical failure or broken invariant; exit code 1.
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<fqpe::Error> for CliError {
    fn from(e: fqpe::Error) -> Self {
        match e {
            fqpe::Error::Invariant(_) | fqpe::Error::NoConvergence => CliError::Internal(e.to_string()),
            fqpe::Error::Invalid(m) => CliError::Invalid(m),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn invalid<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub content: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    /// Arguments after the program name; `fqpe rerun` replays them.
    pub argv: Vec<String>,
    pub seed: u64,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

pub const MANIFEST: &str = "manifest.json";

pub struct Run {
    out: PathBuf,
    inputs: Vec<InputFile>,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn new(out: &Path) -> CliResult<Self> {
        fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create output directory {}: {e}", out.display())))?;
        Ok(Run { out: out.to_path_buf(), inputs: Vec::new(), outputs: Vec::new(), started: Instant::now() })
    }

    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let s = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let p = path.display().to_string();
        if !self.inputs.iter().any(|i| i.path == p) {
            self.inputs.push(InputFile { path: p, content: s.clone() });
        }
        Ok(s)
    }

    pub fn model(&mut self, path: &Path) -> CliResult<fqpe::model::SpectralModel> {
        let s = self.read(path)?;
        Ok(fqpe::model::SpectralModel::from_json(&s)?)
    }

    pub fn write(&mut self, name: &str, content: &str) -> CliResult<PathBuf> {
        let p = self.out.join(name);
        fs::write(&p, content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
        self.outputs.push(name.to_string());
        Ok(p)
    }

    pub fn json(&mut self, name: &str, v: &impl Serialize) -> CliResult<PathBuf> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }

    pub fn finish(self, argv: &[String], seed: u64) -> CliResult<()> {
        let m = Manifest {
            tool: "fqpe".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: fqpe::VERSION.into(),
            argv: argv.to_vec(),
            seed,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let mut s = serde_json::to_string_pretty(&m).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        let p = self.out.join(MANIFEST);
        fs::write(&p, s).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))
    }
}

/// Replace `--out` in a recorded argv and point inputs at files whose content matches the
/// manifest, restoring them under `<out>/inputs/` when the original path is gone or changed.
pub fn replay_argv(m: &Manifest, out: Option<&Path>) -> CliResult<Vec<String>> {
    let mut argv = Vec::new();
    let mut old_out = None;
    let mut it = m.argv.iter();
    while let Some(a) = it.next() {
        if a == "--out" {
            old_out = it.next().cloned();
        } else if let Some(v) = a.strip_prefix("--out=") {
            old_out = Some(v.to_string());
        } else {
            argv.push(a.clone());
        }
    }
    let out = match (out, old_out) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => PathBuf::from("."),
    };
    for input in &m.inputs {
        let same = fs::read_to_string(&input.path).map(|c| c == input.content).unwrap_or(false);
        if same {
            continue;
        }
        let dir = out.join("inputs");
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        let name = Path::new(&input.path).file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_else(|| "input.json".into());
        let restored = dir.join(name);
        fs::write(&restored, &input.content).map_err(|e| CliError::Io(format!("cannot write {}: {e}", restored.display())))?;
        let r = restored.display().to_string();
        for a in argv.iter_mut() {
            if *a == input.path {
                *a = r.clone();
            } else if let Some((k, v)) = a.split_once('=') {
                if v == input.path {
                    *a = format!("{k}={r}");
                }
            }
        }
    }
    argv.push("--out".into());
    argv.push(out.display().to_string());
    Ok(argv)
}
