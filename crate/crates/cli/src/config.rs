//! Experiment configs: one `key = value` per line, `#` starts a comment line,
//! `include = other.cfg` splices another file in place (relative to the
//! including file). Later assignments override earlier ones. Relative paths
//! in values resolve against the directory of the file that set them.
//!
//! Keys starting with `out_` name output files and, together with
//! `workers`, are left out of run metadata: they cannot change results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{CliError, Result};

const MAX_INCLUDE_DEPTH: usize = 16;

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    dir: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.include(path.as_ref(), 0)?;
        Ok(cfg)
    }

    /// Parses config text; relative paths resolve against `dir`.
    pub fn parse(text: &str, dir: impl AsRef<Path>) -> Result<Self> {
        let mut cfg = Config::default();
        cfg.read_text(text, dir.as_ref(), "<text>", 0)?;
        Ok(cfg)
    }

    fn include(&mut self, path: &Path, depth: usize) -> Result<()> {
        if depth > MAX_INCLUDE_DEPTH {
            return Err(bad(format!("{}: includes nested deeper than {MAX_INCLUDE_DEPTH}", path.display())));
        }
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        self.read_text(&text, &dir, &path.display().to_string(), depth)
    }

    fn read_text(&mut self, text: &str, dir: &Path, origin: &str, depth: usize) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("{origin}:{}: expected key = value, got {line:?}", no + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(bad(format!("{origin}:{}: bad key {key:?}", no + 1)));
            }
            if key == "include" {
                self.include(&dir.join(value), depth + 1)?;
            } else {
                self.entries.insert(key.to_owned(), Entry { value: value.to_owned(), dir: dir.to_path_buf() });
            }
        }
        Ok(())
    }

    /// Sets a value from the command line; paths resolve against the
    /// working directory.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_owned(), Entry { value: value.into(), dir: PathBuf::new() });
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair.split_once('=').ok_or_else(|| bad(format!("override {pair:?} is not key=value")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| bad(format!("missing required key {key:?}")))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse().map_err(|e| bad(format!("{key} = {v:?}: {e}"))))
            .transpose()
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse_opt(key)?.unwrap_or(default))
    }

    pub fn parse_req<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_opt(key)?.ok_or_else(|| bad(format!("missing required key {key:?}")))
    }

    /// `true/false`, `yes/no`, `1/0`.
    pub fn flag(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(bad(format!("{key} = {v:?}: expected true or false"))),
        }
    }

    /// Whitespace- or comma-separated list of numbers; `a:step:b` expands
    /// to an inclusive range.
    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{key} = {v:?}: {e}")));
        let mut out = Vec::new();
        for item in v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let parts: Vec<&str> = item.split(':').collect();
            match parts.as_slice() {
                [one] => out.push(num(one)?),
                [a, step, b] => {
                    let (a, step, b) = (num(a)?, num(step)?, num(b)?);
                    if step <= 0.0 || b < a {
                        return Err(bad(format!("{key}: range {item:?} needs a positive step and start <= end")));
                    }
                    let count = ((b - a) / step + 1e-9).floor() as usize;
                    out.extend((0..=count).map(|k| a + k as f64 * step));
                }
                _ => return Err(bad(format!("{key}: cannot read {item:?}"))),
            }
        }
        if out.is_empty() {
            return Err(bad(format!("{key} is empty")));
        }
        Ok(Some(out))
    }

    /// Semicolon-separated rows of numbers, e.g. `0.9 0.1; 0.2 0.8`.
    pub fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        v.split(';')
            .map(|row| {
                row.split_whitespace()
                    .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{key}: {s:?}: {e}"))))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// A path value, resolved against the directory of the file that set it.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.entries.get(key).map(|e| e.dir.join(&e.value))
    }

    /// `rel` resolved against the directory of the file that set `key`.
    pub fn resolve(&self, key: &str, rel: &str) -> PathBuf {
        match self.entries.get(key) {
            Some(e) => e.dir.join(rel),
            None => PathBuf::from(rel),
        }
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key).ok_or_else(|| bad(format!("missing required key {key:?}")))
    }

    /// Rejects keys outside `known`, which catches typos before a long run.
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        let unknown: Vec<&str> =
            self.entries.keys().map(String::as_str).filter(|k| !known.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(bad(format!("unknown key(s) {}; accepted: {}", unknown.join(", "), known.join(", "))))
        }
    }

    /// Result-relevant settings as `config.key=value` pairs, sorted by key.
    pub fn metadata(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .filter(|(k, _)| !k.starts_with("out_") && k.as_str() != "workers")
            .map(|(k, e)| (format!("config.{k}"), e.value.clone()))
            .collect()
    }
}
