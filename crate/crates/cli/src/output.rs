//! CSV and JSON artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form
/// outside `[1e-4, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn csv_text(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(rows.len() * 16 * header.split(',').count());
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_number(*v));
        }
        out.push('\n');
    }
    out
}

fn fmt_opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

pub fn column(values: &[Option<f64>]) -> Vec<f64> {
    values.iter().copied().map(fmt_opt).collect()
}

/// Collects artifacts written by one command.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        self.write_text(name, &csv_text(header, rows))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Other(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultManifest {
    pub command: String,
    pub toolkit_version: &'static str,
    pub config: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub scalars: BTreeMap<String, f64>,
    pub wall_time_seconds: f64,
}

/// Scalars as a string table, for stdout summaries.
pub fn describe_scalars(scalars: &BTreeMap<String, f64>) -> String {
    let mut s = String::new();
    for (k, v) in scalars {
        let _ = writeln!(s, "{k} = {}", format_number(*v));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g12() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (-6.125, "-6.125"),
            (2.85, "2.85"),
            (1.0 / 3.0, "0.333333333333"),
            (123456.789, "123456.789"),
            (1e-5, "1e-05"),
            (1.5e-7, "1.5e-07"),
            (123456789012.0, "123456789012"),
            (1.23456789012345e12, "1.23456789012e+12"),
            (0.0001234, "0.0001234"),
            (-2.5e-300, "-2.5e-300"),
            (0.9999999999999, "1"),
            (99999.99999999999, "100000"),
        ];
        for (x, want) in cases {
            assert_eq!(format_number(x), want, "{x:e}");
        }
        assert_eq!(format_number(f64::NAN), "nan");
    }

    #[test]
    fn csv_uses_lf() {
        let text = csv_text("a,b", &[vec![1.0, 2.5], vec![0.0, -1.0]]);
        assert_eq!(text, "a,b\n1,2.5\n0,-1\n");
    }
}
