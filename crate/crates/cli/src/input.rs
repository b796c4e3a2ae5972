//! Readers for the site table, the long-format observation table and
//! fit/margin files written by earlier runs.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use elliptical_pareto::Matrix;

use crate::error::{Classify, CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub elev: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Sites {
    pub sites: Vec<Site>,
    index: HashMap<String, usize>,
}

impl Sites {
    pub fn new(sites: Vec<Site>) -> CliResult<Self> {
        let mut index = HashMap::new();
        for (i, s) in sites.iter().enumerate() {
            if index.insert(s.id.clone(), i).is_some() {
                return Err(CliError::config(format!("duplicate site id '{}'", s.id)));
            }
        }
        Ok(Self { sites, index })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.sites.iter().map(|s| s.id.as_str()).collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Looks up several ids, failing on the first unknown one.
    pub fn positions(&self, ids: &[String]) -> CliResult<Vec<usize>> {
        ids.iter().map(|id| self.position(id).ok_or_else(|| CliError::config(format!("unknown site id '{id}'")))).collect()
    }

    /// Horizontal coordinates as an n×2 matrix; elevation is carried but
    /// does not enter the correlation model.
    pub fn coords(&self) -> Matrix {
        Matrix::from_fn(self.len(), 2, |i, j| if j == 0 { self.sites[i].x } else { self.sites[i].y })
    }

    pub fn subset_coords(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(idx.len(), 2, |i, j| if j == 0 { self.sites[idx[i]].x } else { self.sites[idx[i]].y })
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        (self.sites[a].x - self.sites[b].x).hypot(self.sites[a].y - self.sites[b].y)
    }
}

fn reader(path: &Path) -> CliResult<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).config_err(format!("cannot read {}", path.display()))
}

fn check_header(rdr: &mut csv::Reader<std::fs::File>, path: &Path, required: &[&str], optional: &[&str]) -> CliResult<()> {
    let header = rdr.headers().config_err(format!("{}: cannot read header", path.display()))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let ok = names.len() >= required.len()
        && names.len() <= required.len() + optional.len()
        && names.iter().zip(required.iter().chain(optional)).all(|(a, b)| a.eq_ignore_ascii_case(b));
    if !ok {
        let mut expected = required.join(",");
        for o in optional {
            expected.push_str(&format!("[,{o}]"));
        }
        return Err(CliError::config(format!("{}: header is '{}', expected {expected}", path.display(), names.join(","))));
    }
    Ok(())
}

fn parse_f64(field: &str, what: &str, path: &Path, line: u64) -> CliResult<f64> {
    let v: f64 = field.parse().map_err(|_| CliError::config(format!("{}:{line}: {what} '{field}' is not a number", path.display())))?;
    if !v.is_finite() {
        return Err(CliError::config(format!("{}:{line}: {what} must be finite", path.display())));
    }
    Ok(v)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads `id,x,y[,elev]`.
pub fn read_sites(path: &Path) -> CliResult<Sites> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &["id", "x", "y"], &["elev"])?;
    let mut sites = Vec::new();
    for rec in rdr.records() {
        let rec = rec.config_err(format!("{}: malformed row", path.display()))?;
        let line = line_of(&rec);
        let id = rec.get(0).unwrap_or_default().to_string();
        if id.is_empty() {
            return Err(CliError::config(format!("{}:{line}: empty site id", path.display())));
        }
        let x = parse_f64(rec.get(1).unwrap_or_default(), "x", path, line)?;
        let y = parse_f64(rec.get(2).unwrap_or_default(), "y", path, line)?;
        let elev = match rec.get(3) {
            Some(e) if !e.is_empty() => Some(parse_f64(e, "elev", path, line)?),
            _ => None,
        };
        sites.push(Site { id, x, y, elev });
    }
    if sites.is_empty() {
        return Err(CliError::config(format!("{}: no sites", path.display())));
    }
    Sites::new(sites).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Observations in wide form: one row per date (sorted), one column per
/// site, NaN where a value is missing.
#[derive(Debug, Clone)]
pub struct Observations {
    pub dates: Vec<String>,
    pub values: Matrix,
}

impl Observations {
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.values.rows()).map(|i| self.values[(i, j)]).collect()
    }
}

/// Reads `date,site_id,value`; empty, `NA` or `NaN` values are missing.
pub fn read_data(path: &Path, sites: &Sites) -> CliResult<Observations> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &["date", "site_id", "value"], &[])?;
    let mut by_date: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.config_err(format!("{}: malformed row", path.display()))?;
        let line = line_of(&rec);
        let date = rec.get(0).unwrap_or_default();
        let site = rec.get(1).unwrap_or_default();
        let j = sites.position(site).ok_or_else(|| CliError::config(format!("{}:{line}: unknown site id '{site}'", path.display())))?;
        let raw = rec.get(2).unwrap_or_default();
        let value = if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
            f64::NAN
        } else {
            parse_f64(raw, "value", path, line)?
        };
        let row = by_date.entry(date.to_string()).or_insert_with(|| vec![f64::NAN; sites.len()]);
        if !row[j].is_nan() {
            return Err(CliError::config(format!("{}:{line}: second value for site '{site}' on {date}", path.display())));
        }
        row[j] = value;
    }
    if by_date.is_empty() {
        return Err(CliError::config(format!("{}: no observations", path.display())));
    }
    let dates: Vec<String> = by_date.keys().cloned().collect();
    let rows: Vec<Vec<f64>> = by_date.into_values().collect();
    let values = Matrix::from_fn(rows.len(), sites.len(), |i, j| rows[i][j]);
    Ok(Observations { dates, values })
}

/// Parses "a,b,c" into a fixed number of floats.
pub fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::config(format!("{what}: '{t}' is not a number"))))
        .collect()
}

/// Parses "id=value,id=value".
pub fn parse_assignments(s: &str) -> CliResult<Vec<(String, f64)>> {
    s.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::config(format!("expected id=value, got '{kv}'")))?;
            let v: f64 = v.trim().parse().map_err(|_| CliError::config(format!("value for '{}' is not a number", k.trim())))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}
