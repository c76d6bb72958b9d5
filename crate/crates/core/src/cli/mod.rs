//! Subcommand runner, run records and exit codes for the `teichlab` binary.

pub mod commands;
pub mod config;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use crate::error::{Error, Result};
pub use config::{ExperimentConfig, MuSpec, PhiSpec};

pub const SCHEMA: &str = "teichlab.run/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CERTIFIED_FAILURE: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Bers,
    Aw,
    Rigidity,
    WpBound,
    Qs,
    Cocycle,
    Verify,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Solve,
        Command::Bers,
        Command::Aw,
        Command::Rigidity,
        Command::WpBound,
        Command::Qs,
        Command::Cocycle,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Bers => "bers",
            Command::Aw => "aw",
            Command::Rigidity => "rigidity",
            Command::WpBound => "wp-bound",
            Command::Qs => "qs",
            Command::Cocycle => "cocycle",
            Command::Verify => "verify",
        }
    }
}

/// What a subcommand computed, before it is stamped into a record.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub outputs: BTreeMap<String, Value>,
    pub pass: BTreeMap<String, bool>,
    /// File name and contents, written into the run directory.
    pub files: Vec<(String, String)>,
}

impl CommandOutput {
    pub fn put(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.outputs
            .insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn flag(&mut self, key: &str, ok: bool) {
        self.pass.insert(key.into(), ok);
    }

    pub fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.into(), contents));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: String,
    pub version: String,
    pub command: Command,
    pub config: ExperimentConfig,
    pub outputs: BTreeMap<String, Value>,
    pub pass: BTreeMap<String, bool>,
    /// SHA-256 of everything above, in canonical JSON.
    pub payload_hash: String,
    /// Seconds; not hashed.
    pub timings: BTreeMap<String, f64>,
    pub files: Vec<String>,
}

impl RunRecord {
    fn payload(&self) -> Result<Value> {
        Ok(serde_json::json!({
            "schema": self.schema,
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "outputs": self.outputs,
            "pass": self.pass,
        }))
    }

    pub fn compute_hash(&self) -> Result<String> {
        // serde_json maps are ordered, so the text is canonical
        let text = serde_json::to_string(&self.payload()?)?;
        Ok(Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }

    pub fn all_pass(&self) -> bool {
        self.pass.values().all(|&ok| ok)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            EXIT_OK
        } else {
            EXIT_CERTIFIED_FAILURE
        }
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Convergence { .. } => EXIT_CONVERGENCE,
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

/// Runs one subcommand. With `out`, the record and its files go to
/// `out/<unix-seconds>-<hash8>/`.
pub fn run(
    command: Command,
    config: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<(RunRecord, Option<PathBuf>)> {
    config.validate()?;
    let start = Instant::now();
    let output = commands::execute(command, config)?;
    let mut record = RunRecord {
        schema: SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config: config.clone(),
        outputs: output.outputs,
        pass: output.pass,
        payload_hash: String::new(),
        timings: BTreeMap::from([("total".to_string(), start.elapsed().as_secs_f64())]),
        files: output.files.iter().map(|(n, _)| n.clone()).collect(),
    };
    record.payload_hash = record.compute_hash()?;
    let dir = match out {
        Some(root) => {
            let stamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let dir = root.join(format!("{stamp}-{}", &record.payload_hash[..8]));
            std::fs::create_dir_all(&dir)?;
            for (name, contents) in &output.files {
                std::fs::write(dir.join(name), contents)?;
            }
            std::fs::write(
                dir.join("record.json"),
                serde_json::to_string_pretty(&record)?,
            )?;
            Some(dir)
        }
        None => None,
    };
    Ok((record, dir))
}

/// Reruns the recorded config and compares payload hashes.
pub fn replay(record: &RunRecord) -> Result<bool> {
    let (again, _) = run(record.command, &record.config, None)?;
    Ok(again.payload_hash == record.payload_hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            grid: GridSpec::default().with_angles(64),
            ..Default::default()
        }
    }

    #[test]
    fn hash_ignores_timings_and_tracks_outputs() {
        let (mut rec, _) = run(Command::Cocycle, &small(), None).unwrap();
        let h = rec.compute_hash().unwrap();
        assert_eq!(h, rec.payload_hash);
        assert_eq!(h.len(), 64);
        rec.timings.insert("total".into(), 1e9);
        assert_eq!(rec.compute_hash().unwrap(), h);
        rec.outputs.insert("extra".into(), Value::Null);
        assert_ne!(rec.compute_hash().unwrap(), h);
    }

    #[test]
    fn run_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        let (rec, path) = run(Command::Bers, &small(), Some(dir.path())).unwrap();
        let path = path.unwrap();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        assert!(name.ends_with(&rec.payload_hash[..8]));
        let back: RunRecord =
            serde_json::from_str(&std::fs::read_to_string(path.join("record.json")).unwrap())
                .unwrap();
        assert_eq!(back.payload_hash, rec.payload_hash);
        for f in &rec.files {
            assert!(path.join(f).exists(), "{f}");
        }
        assert!(replay(&back).unwrap());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(error_exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        let conv = Error::Convergence {
            iterations: 1,
            last_change: 1.0,
            trace: vec![],
        };
        assert_eq!(error_exit_code(&conv), EXIT_CONVERGENCE);
        assert_eq!(error_exit_code(&Error::Domain("x".into())), EXIT_OTHER);
        let mut bad = small();
        bad.grid.k = 20;
        assert!(matches!(
            run(Command::Solve, &bad, None),
            Err(Error::Config(_))
        ));
    }
}
