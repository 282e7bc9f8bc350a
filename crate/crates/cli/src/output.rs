use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

/// Provenance attached to every file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub versions: Versions,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    #[serde(rename = "magnetodisk-core")]
    pub core: &'static str,
    #[serde(rename = "magnetodisk-cli")]
    pub cli: &'static str,
}

impl Meta {
    pub fn new(command: &'static str, cfg: &RunConfig) -> Self {
        Self {
            tool: "magnetodisk",
            command,
            config_sha256: cfg.digest(),
            versions: Versions {
                core: magnetodisk_core::VERSION,
                cli: env!("CARGO_PKG_VERSION"),
            },
        }
    }

    fn header_line(&self) -> String {
        format!(
            "# magnetodisk {} config_sha256={} magnetodisk-core={} magnetodisk-cli={}\n",
            self.command, self.config_sha256, self.versions.core, self.versions.cli
        )
    }
}

/// Writes files into the output directory and remembers what it wrote.
pub struct Writer {
    dir: PathBuf,
    meta: Meta,
    format: Format,
    pub written: Vec<PathBuf>,
}

/// Column cells of a table.
pub enum Cell {
    Num(f64),
    Text(&'static str),
}

impl Writer {
    pub fn create(cfg: &RunConfig, meta: Meta) -> std::io::Result<Self> {
        fs::create_dir_all(&cfg.out)?;
        Ok(Self {
            dir: cfg.out.clone(),
            meta,
            format: cfg.format,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// `name.json` with the metadata block merged in as `"meta"`.
    pub fn json(&mut self, name: &str, body: Value) -> std::io::Result<()> {
        let mut obj = serde_json::Map::new();
        obj.insert("meta".into(), serde_json::to_value(&self.meta).expect("meta"));
        match body {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("json");
        text.push('\n');
        self.put(&format!("{name}.json"), text.as_bytes())
    }

    /// A table as `name.csv` or `name.json` depending on the format.
    pub fn table(&mut self, name: &str, columns: &[&str], rows: &[Vec<Cell>]) -> std::io::Result<()> {
        match self.format {
            Format::Csv => {
                let mut buf = self.meta.header_line().into_bytes();
                {
                    let mut w = csv::Writer::from_writer(&mut buf);
                    w.write_record(columns).map_err(std::io::Error::other)?;
                    for row in rows {
                        let rec: Vec<String> = row.iter().map(csv_cell).collect();
                        w.write_record(&rec).map_err(std::io::Error::other)?;
                    }
                    w.flush()?;
                }
                self.put(&format!("{name}.csv"), &buf)
            }
            Format::Json => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Array(r.iter().map(json_cell).collect()))
                    .collect();
                self.json(name, json!({ "columns": columns, "rows": rows }))
            }
        }
    }

    fn put(&mut self, file: &str, bytes: &[u8]) -> std::io::Result<()> {
        let path = self.dir.join(file);
        let mut f = fs::File::create(&path)?;
        f.write_all(bytes)?;
        self.written.push(path);
        Ok(())
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) if x.is_finite() => format!("{x:.16e}"),
        Cell::Num(x) => format!("{x}"),
        Cell::Text(t) => (*t).to_string(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => json!(x),
        Cell::Text(t) => json!(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI] {
            let s = csv_cell(&Cell::Num(x));
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
