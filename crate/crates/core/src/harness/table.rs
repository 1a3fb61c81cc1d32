//! Fixed-schema CSV tables.

use std::io::Write;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    /// Appends a row; columns not named stay empty.
    ///
    /// # Panics
    /// On a column name that is not part of the schema.
    pub fn push(&mut self, cells: &[(&str, String)]) {
        let mut row = vec![String::new(); self.columns.len()];
        for (name, value) in cells {
            let i = self.index(name).unwrap_or_else(|| panic!("unknown column {name}"));
            row[i] = value.clone();
        }
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == column)
    }

    /// Rows whose `record` column equals `kind`.
    pub fn records<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        let i = self.index("record");
        self.rows.iter().filter(move |r| i.is_some_and(|i| r[i] == kind))
    }

    /// Cell of `row` in `column`, parsed.
    pub fn cell<T: std::str::FromStr>(&self, row: &[String], column: &str) -> Option<T> {
        self.index(column).and_then(|i| row[i].parse().ok())
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_and_quoting() {
        let mut t = Table::new(&["record", "message"]);
        assert_eq!(t.to_csv().unwrap(), "record,message\n");
        t.push(&[("record", "warning".into()), ("message", "a, \"b\"".into())]);
        assert_eq!(t.to_csv().unwrap(), "record,message\nwarning,\"a, \"\"b\"\"\"\n");
        assert_eq!(t.records("warning").count(), 1);
    }

    #[test]
    #[should_panic(expected = "unknown column")]
    fn unknown_column_panics() {
        Table::new(&["a"]).push(&[("b", String::new())]);
    }
}
