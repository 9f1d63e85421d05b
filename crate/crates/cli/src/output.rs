//! Deterministic CSV/JSON writers; every file carries the config hash.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use twoflux::scenario::ScenarioConfig;

use crate::{CliError, CliResult};

/// SHA-256 of the canonical JSON form of the validated scenario.
pub fn config_hash(config: &ScenarioConfig) -> String {
    let canonical = serde_json::to_string(config).expect("scenario serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// CSV text with a `# config_hash:` comment line and a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(hash: &str, columns: &[&str]) -> Self {
        Self {
            text: format!("# config_hash: {hash}\n{}\n", columns.join(",")),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }
}

/// Formats a float so that it round-trips; `None` becomes an empty field.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

pub fn write_csv(dir: &Path, name: &str, csv: Csv) -> CliResult<()> {
    write(dir, name, &csv.text)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config_hash: &'a str,
    config: &'a ScenarioConfig,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON with the hash and the resolved scenario at the top.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, hash: &str, config: &ScenarioConfig, body: &T) -> CliResult<()> {
    let v = Envelope {
        config_hash: hash,
        config,
        body,
    };
    let mut text = serde_json::to_string_pretty(&v).expect("report serializes");
    text.push('\n');
    write(dir, name, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(opt(None), "");
    }

    #[test]
    fn csv_starts_with_the_hash() {
        let mut c = Csv::new("abc", &["a", "b"]);
        c.row(&["1".into(), "2".into()]);
        assert_eq!(c.text, "# config_hash: abc\na,b\n1,2\n");
    }

    #[test]
    fn hash_depends_on_every_field() {
        let text = r#"{"flux":{"name":"constant_gap","gap":1.0},"initial":{"name":"square_wave","left":0.0,"right":1.0},"topology":{"kind":"line"},"horizon":1.0}"#;
        let a = ScenarioConfig::from_json(text).unwrap();
        let mut b = a.clone();
        b.horizon = 2.0;
        assert_eq!(config_hash(&a), config_hash(&a.clone()));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
