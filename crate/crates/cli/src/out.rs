//! Output directory handling and deterministic CSV writing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

pub const OUT_ENV: &str = "ISINGBENCH_OUT";

pub fn resolve_out_dir(flag: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = flag
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("isingbench-out"));
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

/// Accumulates CSV text; all floats go through the shortest round-trip
/// formatter so reruns are byte-identical.
pub struct Csv {
    buf: String,
}

pub enum Field {
    Int(i64),
    UInt(u64),
    Float(f64),
    Str(String),
    Empty,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}
impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::UInt(v as u64)
    }
}
impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::UInt(v)
    }
}
impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::UInt(u64::from(v))
    }
}
impl From<i64> for Field {
    fn from(v: i64) -> Self {
        Field::Int(v)
    }
}
impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Str(v.to_string())
    }
}
impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Str(v)
    }
}
impl From<Option<f64>> for Field {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Field::Empty, Field::Float)
    }
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: Vec<Field>) {
        let mut first = true;
        for field in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            match field {
                Field::Int(v) => write!(self.buf, "{v}").unwrap(),
                Field::UInt(v) => write!(self.buf, "{v}").unwrap(),
                Field::Float(v) => write!(self.buf, "{v}").unwrap(),
                Field::Str(v) => write!(self.buf, "{v}").unwrap(),
                Field::Empty => {}
            }
        }
        self.buf.push('\n');
    }

    pub fn write(&self, dir: &Path, name: &str) -> anyhow::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, &self.buf)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// 95% normal confidence half-width of a mean over `values`.
pub fn ci95_half_width(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    1.96 * (var / n).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
