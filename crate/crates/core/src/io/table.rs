use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

/// Whitespace-separated numeric table with `# key = value` metadata lines
/// and one column-name line.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnarTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ColumnarTable {
    pub fn new(schema: &str, columns: &[&str]) -> Self {
        Self {
            meta: vec![("schema".into(), schema.into())],
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn schema(&self) -> Option<&str> {
        self.get("schema")
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self
            .get(key)
            .ok_or_else(|| Error::Format(format!("table lacks metadata `{key}`")))?;
        v.parse()
            .map_err(|_| Error::Format(format!("metadata `{key}` = `{v}` is not a number")))
    }

    /// Set or replace a metadata entry.
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        let value = value.to_string();
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.meta.push((key.into(), value)),
        }
        self
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Shape(format!(
                "row has {} values, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Format(format!("table has no column `{name}`")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn require_schema(&self, schema: &str) -> Result<()> {
        match self.schema() {
            Some(s) if s == schema => Ok(()),
            other => Err(Error::Format(format!(
                "expected a `{schema}` table, found `{}`",
                other.unwrap_or("<none>")
            ))),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let _ = writeln!(s, "{}", self.columns.join(" "));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", cells.join(" "));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.split_once('=').ok_or_else(|| {
                    Error::Format(format!("line {}: metadata must be `# key = value`", n + 1))
                })?;
                meta.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            match &columns {
                None => columns = Some(line.split_whitespace().map(String::from).collect()),
                Some(cols) => {
                    let row = line
                        .split_whitespace()
                        .map(|t| {
                            t.parse::<f64>().map_err(|_| {
                                Error::Format(format!("line {}: `{t}` is not a number", n + 1))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    if row.len() != cols.len() {
                        return Err(Error::Format(format!(
                            "line {}: {} values for {} columns",
                            n + 1,
                            row.len(),
                            cols.len()
                        )));
                    }
                    rows.push(row);
                }
            }
        }
        let columns = columns.ok_or_else(|| Error::Format("table has no column line".into()))?;
        Ok(Self { meta, columns, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn layout() {
        let mut t = ColumnarTable::new("demo", &["a", "b"]);
        t.set("config_hash", "abc");
        t.push(vec![1.0, -0.5]).unwrap();
        let s = t.to_text();
        assert!(s.starts_with("# schema = demo\n# config_hash = abc\na b\n"));
        assert!(t.push(vec![1.0]).is_err());
        assert!(ColumnarTable::parse("a b\n1 2 3\n").is_err());
        assert!(ColumnarTable::parse("a b\n1 x\n").is_err());
    }

    proptest! {
        #[test]
        fn exact_round_trip(rows in prop::collection::vec(prop::collection::vec(any::<f64>(), 3), 0..20)) {
            let mut t = ColumnarTable::new("rt", &["x", "y", "z"]);
            for r in rows {
                t.push(r).unwrap();
            }
            let back = ColumnarTable::parse(&t.to_text()).unwrap();
            prop_assert_eq!(back.rows.len(), t.rows.len());
            for (a, b) in back.rows.iter().flatten().zip(t.rows.iter().flatten()) {
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }
}
