use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::settings::Settings;
use crate::SCHEMA_VERSION;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Writes result files into one directory and finishes with
/// `manifest.json`, which records the resolved settings and the SHA-256 of
/// every input and output.
pub struct Outputs {
    dir: PathBuf,
    command: &'static str,
    inputs: BTreeMap<String, String>,
    files: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: BTreeMap<String, String>,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
}

/// Header shared by the JSON result files.
#[derive(Serialize)]
pub struct Echo {
    pub schema_version: u32,
    pub command: &'static str,
    pub config: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
}

impl Outputs {
    pub fn create(dir: &Path, command: &'static str) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs { dir: dir.to_path_buf(), command, inputs: BTreeMap::new(), files: BTreeMap::new() })
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) {
        self.inputs.insert(name.to_string(), sha256_hex(bytes));
    }

    pub fn echo(&self, settings: &Settings) -> Echo {
        Echo { schema_version: SCHEMA_VERSION, command: self.command, config: settings.echo(), inputs: self.inputs.clone() }
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, content).map_err(|e| CliError::io(&path, e))?;
        self.files.insert(name.to_string(), sha256_hex(content.as_bytes()));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write(name, &s)
    }

    pub fn finish(self, settings: &Settings) -> Result<(), CliError> {
        let m = Manifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: settings.echo(),
            inputs: &self.inputs,
            outputs: &self.files,
        };
        let mut s = serde_json::to_string_pretty(&m).expect("serializable");
        s.push('\n');
        let path = self.dir.join("manifest.json");
        fs::write(&path, s).map_err(|e| CliError::io(&path, e))
    }
}

/// CSV from serializable rows, header taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}
