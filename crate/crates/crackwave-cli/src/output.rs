//! CSV and JSON writers. Numbers carry 17 significant digits; nothing time-dependent is
//! ever written, so identical configurations give identical bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::{io_err, Result};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// 17 significant digits, '.' decimal.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self { text: format!("{header}\n") }
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, self.text.as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, bytes).map_err(io_err(path))
}

/// Writes `{schema_version, kind, ...body}` pretty-printed with a trailing newline.
pub fn write_json(path: &Path, kind: &str, body: Value) -> Result<()> {
    let mut map = Map::new();
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    map.insert("kind".into(), kind.into());
    if let Value::Object(b) = body {
        map.extend(b);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("json values serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// File-name form of a class label: "s", "as", "m0", "m-1".
pub fn class_slug(label: &str) -> String {
    label.replace('=', "")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(f17(1.0), "1.0000000000000000e0");
        let x = 0.1f64 + 0.2;
        assert_eq!(f17(x).parse::<f64>().unwrap(), x);
    }
}
