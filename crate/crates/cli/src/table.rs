//! Minimal CSV tables: unquoted fields, LF line endings, floats written in
//! their shortest round-trip form.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    /// Write to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        let text = self.render();
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
            }
            None => {
                std::io::stdout().lock().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let Some(head) = lines.next() else {
            bail!("CSV input is empty");
        };
        let header: Vec<String> = head.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            let row: Vec<String> = l.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                bail!("line {}: expected {} fields, got {}", i + 2, header.len(), row.len());
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("column `{name}` not found (have: {})", self.header.join(", ")))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, 1e-300, 48.39414490382871, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(num(2.0), "2.0");
    }

    #[test]
    fn parse_and_render() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x".into()]);
        let back = Table::parse(&t.render()).unwrap();
        assert_eq!(back, t);
        assert!(Table::parse("").is_err());
        assert!(Table::parse("a,b\n1\n").is_err());
        assert!(back.column("c").unwrap_err().to_string().contains("`c`"));
    }
}
