//! Report emission: schema-versioned JSON, CSV tables and the run manifest.

use std::path::{Path, PathBuf};

use mudecay_core::ModelConfig;
use serde::Serialize;

use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    tool_version: &'static str,
    command: &'a str,
    config_digest: String,
    seed: u64,
    config: &'a ModelConfig,
    report: &'a T,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub config_digest: String,
    pub command: String,
    pub timestamp: String,
    pub tool_version: &'static str,
    pub outputs: Vec<String>,
}

/// Collects the files written by one command so the manifest can list them.
pub struct Outputs {
    dir: PathBuf,
    command: String,
    config: ModelConfig,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: &Path, command: &str, config: &ModelConfig) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            config: config.clone(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, report: &T) -> CliResult<()> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION,
            command: &self.command,
            config_digest: self.config.digest(),
            seed: self.config.seed,
            config: &self.config,
            report,
        };
        let mut text = serde_json::to_string_pretty(&env).map_err(std::io::Error::other)?;
        text.push('\n');
        let path = self.path(name);
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn raw(&mut self, name: &str) -> CliResult<std::io::BufWriter<std::fs::File>> {
        let path = self.path(name);
        Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn finish(mut self) -> CliResult<()> {
        let outputs = self.written.clone();
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            config_digest: self.config.digest(),
            command: self.command.clone(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            tool_version: TOOL_VERSION,
            outputs,
        };
        let path = self.path("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// Shortest round-trip decimal form, used for every float cell.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
