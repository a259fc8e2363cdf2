//! CSV tables and JSON summaries.
//!
//! Every file starts with `#` comment lines naming the code version, the
//! table, each column, and the resolved configuration, so a table can be
//! regenerated from its own header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub fn header(title: &str, columns: &[(&str, &str)], config: Option<&RunConfig>) -> String {
    let mut s = format!("# jcsim {VERSION}\n# {title}\n");
    for (name, desc) in columns {
        s.push_str(&format!("# {name}: {desc}\n"));
    }
    if let Some(cfg) = config {
        s.push_str("# config:\n");
        for line in cfg.to_toml().lines().filter(|l| !l.is_empty()) {
            s.push_str(&format!("#   {line}\n"));
        }
    }
    s
}

pub struct Table {
    path: PathBuf,
    w: csv::Writer<BufWriter<File>>,
}

impl Table {
    pub fn create(
        dir: &Path,
        name: &str,
        title: &str,
        columns: &[(&str, &str)],
        config: Option<&RunConfig>,
    ) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut buf = BufWriter::new(file);
        buf.write_all(header(title, columns, config).as_bytes())
            .map_err(io_err(&path))?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(columns.iter().map(|c| c.0))
            .map_err(csv_err(&path))?;
        Ok(Self { path, w })
    }

    pub fn row(&mut self, fields: &[f64]) -> Result<(), CliError> {
        self.w
            .write_record(fields.iter().map(|&x| num(x)))
            .map_err(csv_err(&self.path))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.w.flush().map_err(io_err(&self.path))?;
        Ok(self.path)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    jcsim_version: &'a str,
    config: Option<&'a RunConfig>,
    #[serde(flatten)]
    body: &'a T,
}

/// Writes `body` wrapped with the version and resolved configuration.
pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    config: Option<&RunConfig>,
    body: &T,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let env = Envelope {
        jcsim_version: VERSION,
        config,
        body,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("plain data serialises");
    text.push('\n');
    std::fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(2.5), "2.5");
        assert_eq!(num(-1e-7), "-1e-7");
        assert_eq!(num(1.25e-3), "0.00125");
        assert_eq!(num(3e20), "3e20");
    }
}
