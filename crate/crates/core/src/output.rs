//! Result tables and their CSV form.
//!
//! CSV files are UTF-8 with a header row and `.` as decimal separator. Floats
//! use the shortest-fixed-or-scientific form with 15 significant digits (the
//! `%.15g` convention), so files are stable across platforms.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_g15(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        // seeds use the full u64 range; keep them exact as text
        if x <= i64::MAX as u64 {
            Cell::Int(x as i64)
        } else {
            Cell::Text(x.to_string())
        }
    }
}

/// Missing values render as an empty field.
impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Text(String::new()), Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A named table destined for `<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// Column by name as floats; `None` for unknown columns or text cells.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Cell::Num(x) => Some(*x),
                Cell::Int(i) => Some(*i as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Writes `<dir>/<name>.csv` and returns the path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        self.write_csv(File::create(&path)?)?;
        Ok(path)
    }
}

/// `%.15g`: 15 significant digits, trailing zeros dropped, scientific
/// notation when the decimal exponent is below -4 or at least 15.
pub fn format_g15(x: f64) -> String {
    const P: i32 = 15;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // exponent after rounding to P digits
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= P {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g15_matches_printf() {
        // reference strings from C printf("%.15g")
        let cases = [
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333333"),
            (2.0 / 3.0, "0.666666666666667"),
            (123456.789, "123456.789"),
            (1e15, "1e+15"),
            (999999999999999.0, "999999999999999"),
            (1e-5, "1e-05"),
            (1.5e-4, "0.00015"),
            (-2.5, "-2.5"),
            (6.02214076e23, "6.02214076e+23"),
            (0.36449019586619125, "0.364490195866191"),
            (f64::from_bits(1e-4f64.to_bits() - 1), "0.0001"),
            (100.0, "100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g15(x), want, "{x:e}");
        }
        assert_eq!(format_g15(f64::NAN), "nan");
        assert_eq!(format_g15(0.0), "0");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["t_ns", "label", "n"]);
        t.push(vec![0.5.into(), "ergodic".into(), 3usize.into()]);
        t.push(vec![(1.0 / 3.0).into(), "localized".into(), 4usize.into()]);
        assert_eq!(
            t.to_csv_string().unwrap(),
            "t_ns,label,n\n0.5,ergodic,3\n0.333333333333333,localized,4\n"
        );
        assert_eq!(t.column("n").unwrap(), vec![3.0, 4.0]);
        assert!(t.column("label").is_none());
    }
}
