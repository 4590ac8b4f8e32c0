//! CSV tables with a block of `# key=value` metadata lines on top.

use std::path::Path;

use crate::{CliError, Result};

/// Column skipped by default when comparing two runs.
pub const WALL_TIME: &str = "wall_time";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { meta: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn add_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string().replace(['\n', '\r'], " ")));
    }

    pub fn extend_meta(&mut self, pairs: impl IntoIterator<Item = (String, String)>) {
        for (k, v) in pairs {
            self.add_meta(k, v);
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column_f64(&self, name: &str) -> std::result::Result<Vec<f64>, String> {
        let c = self.column(name).ok_or_else(|| format!("no column {name:?}"))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| row[c].parse::<f64>().map_err(|e| format!("row {}, column {name}: {e}", r + 1)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("writing to memory")).expect("utf-8 fields"));
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut meta = Vec::new();
        let mut body = 0;
        for line in text.split_inclusive('\n') {
            let Some(rest) = line.strip_prefix('#') else { break };
            body += line.len();
            let rest = rest.trim();
            if let Some((k, v)) = rest.split_once('=') {
                meta.push((k.trim().to_owned(), v.trim().to_owned()));
            }
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text[body..].as_bytes());
        let header: Vec<String> = reader.headers().map_err(|e| e.to_string())?.iter().map(str::to_owned).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err("no header row".into());
        }
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_owned).collect()).map_err(|e| e.to_string()))
            .collect::<std::result::Result<Vec<Vec<String>>, String>>()?;
        Ok(Table { meta, header, rows })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Table::parse(&text).map_err(|msg| CliError::Table { path: path.to_path_buf(), msg })
    }
}

/// Differences between two tables, ignoring the named columns and metadata
/// keys. Empty when they match.
pub fn diff(a: &Table, b: &Table, ignore: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let keep = |k: &String| !ignore.contains(&k.as_str());
    let ma: Vec<_> = a.meta.iter().filter(|(k, _)| keep(k)).collect();
    let mb: Vec<_> = b.meta.iter().filter(|(k, _)| keep(k)).collect();
    if ma != mb {
        for (k, v) in &ma {
            if !mb.iter().any(|(k2, v2)| k2 == k && v2 == v) {
                out.push(format!("metadata {k}: {v:?} vs {:?}", b.meta(k).unwrap_or("<missing>")));
            }
        }
        for (k, _) in &mb {
            if a.meta(k).is_none() {
                out.push(format!("metadata {k} only in the second table"));
            }
        }
        if out.is_empty() {
            out.push("metadata order differs".into());
        }
    }
    if a.header != b.header {
        out.push(format!("headers differ: {:?} vs {:?}", a.header, b.header));
        return out;
    }
    if a.rows.len() != b.rows.len() {
        out.push(format!("{} rows vs {}", a.rows.len(), b.rows.len()));
    }
    for (r, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        for (c, name) in a.header.iter().enumerate() {
            if keep(name) && ra[c] != rb[c] {
                out.push(format!("row {}, {name}: {} vs {}", r + 1, ra[c], rb[c]));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["snr_db", "ser", WALL_TIME]);
        t.add_meta("seed", 5);
        t.add_meta("model", "two\nlines");
        t.push(vec!["20".into(), "1e-3".into(), "0.5".into()]);
        t
    }

    #[test]
    fn roundtrip() {
        let t = sample();
        let text = t.to_csv();
        assert!(text.starts_with("# seed=5\n# model=two lines\nsnr_db,ser,wall_time\n"));
        let back = Table::parse(&text).unwrap();
        assert_eq!(back.meta("model"), Some("two lines"));
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.column_f64("ser").unwrap(), vec![1e-3]);
    }

    #[test]
    fn diff_ignores_wall_time_only() {
        let a = sample();
        let mut b = sample();
        b.rows[0][2] = "9.9".into();
        assert!(diff(&a, &b, &[WALL_TIME]).is_empty());
        assert_eq!(diff(&a, &b, &[]).len(), 1);
        b.rows[0][1] = "2e-3".into();
        assert_eq!(diff(&a, &b, &[WALL_TIME]).len(), 1);
        let mut c = sample();
        c.meta[0].1 = "6".into();
        assert_eq!(diff(&a, &c, &[WALL_TIME]).len(), 1);
    }

    #[test]
    fn rejects_empty_input() {
        assert!(Table::parse("").is_err());
        assert!(Table::parse("# only=meta\n").is_err());
    }
}
