use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Classify, CliResult};

/// Seventeen significant digits, which round-trips every f64; NaN is
/// written as `NA`.
pub fn full(x: f64) -> String {
    if x.is_nan() {
        "NA".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn full_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), full)
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).config_err(format!("cannot create output directory {}", dir.display()))
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let ctx = || format!("cannot write {}", path.display());
    let mut w = csv::Writer::from_path(path).config_err(ctx())?;
    w.write_record(header).config_err(ctx())?;
    for row in rows {
        w.write_record(&row).config_err(ctx())?;
    }
    w.flush().config_err(ctx())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).config_err("serializing output")?;
    std::fs::write(path, text + "\n").config_err(format!("cannot write {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).config_err(format!("cannot write {}", path.display()))
}

pub fn in_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
