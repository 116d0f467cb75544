//! File formats: delimited numeric tables, simulation configs and reports.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hypothesis::TestKind;
use crate::linalg::{Dataset, Penalty};
use crate::nested::LambdaGrid;
use crate::sim::{CovStructure, SimConfig};

/// A parsed numeric table with its optional header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub data: DMatrix<f64>,
}

fn delimiter_for(path: &Path, first_line: &str) -> char {
    let is_tsv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("tsv") || e.eq_ignore_ascii_case("tab"));
    if is_tsv || first_line.contains('\t') {
        '\t'
    } else {
        ','
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses delimited text. The first row is a header only when none of its cells is numeric.
pub fn parse_table(text: &str, delimiter: char) -> Result<Table> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    let Some(&(_, first)) = lines.first() else {
        return Err(Error::Ingest {
            row: 1,
            column: 1,
            message: "file is empty".into(),
        });
    };
    let first_cells: Vec<&str> = first.split(delimiter).collect();
    let has_header = first_cells.iter().all(|c| parse_cell(c).is_none() && !c.trim().is_empty());
    let header = has_header.then(|| first_cells.iter().map(|c| c.trim().to_string()).collect::<Vec<_>>());
    let body = if has_header { &lines[1..] } else { &lines[..] };
    let width = first_cells.len();
    let mut values = Vec::with_capacity(body.len() * width);
    for &(row, line) in body {
        let cells: Vec<&str> = line.split(delimiter).collect();
        if cells.len() != width {
            return Err(Error::Ingest {
                row,
                column: cells.len().min(width) + 1,
                message: format!("expected {width} cells, found {}", cells.len()),
            });
        }
        for (j, cell) in cells.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| Error::Ingest {
                row,
                column: j + 1,
                message: if cell.trim().is_empty() {
                    "missing value".to_string()
                } else {
                    format!("not a finite number: {:?}", cell.trim())
                },
            })?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(Error::Ingest {
            row: lines.len() + 1,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Ok(Table {
        header,
        data: DMatrix::from_row_slice(body.len(), width, &values),
    })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let first = text.lines().next().unwrap_or("");
    parse_table(&text, delimiter_for(path, first))
}

/// Where the response comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseSource {
    /// A separate single-column file.
    File(std::path::PathBuf),
    /// A column of the feature file, by header name or 1-based index; it is
    /// removed from the features.
    Column(String),
}

fn column_position(table: &Table, spec: &str) -> Result<usize> {
    if let Some(h) = &table.header {
        if let Some(pos) = h.iter().position(|c| c == spec) {
            return Ok(pos);
        }
    }
    match spec.parse::<usize>() {
        Ok(i) if i >= 1 && i <= table.data.ncols() => Ok(i - 1),
        _ => Err(Error::InvalidInput(format!("response column {spec:?} not found"))),
    }
}

/// Loads features and response; the intercept column is prepended here.
pub fn load_dataset(x_path: &Path, y: &ResponseSource) -> Result<Dataset> {
    let table = read_table(x_path)?;
    let (features, response) = match y {
        ResponseSource::File(p) => {
            let yt = read_table(p)?;
            if yt.data.ncols() != 1 {
                return Err(Error::Ingest {
                    row: 1,
                    column: 2,
                    message: format!("response file must have one column, found {}", yt.data.ncols()),
                });
            }
            (table.data, yt.data.column(0).into_owned())
        }
        ResponseSource::Column(spec) => {
            let pos = column_position(&table, spec)?;
            let response = table.data.column(pos).into_owned();
            (table.data.remove_column(pos), response)
        }
    };
    if features.nrows() != response.len() {
        return Err(Error::Ingest {
            row: features.nrows().min(response.len()) + 1,
            column: 1,
            message: format!(
                "feature file has {} rows but the response has {}",
                features.nrows(),
                response.len()
            ),
        });
    }
    if features.ncols() == 0 {
        return Err(Error::InvalidInput("no feature columns left".into()));
    }
    Dataset::from_features(response, &features)
}

/// Writes features (with an `x1..xP` header) and the response (header `y`).
///
/// Values use the shortest representation that parses back to the same double.
pub fn write_dataset(x_path: &Path, y_path: &Path, features: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    let mut xs = (1..=features.ncols()).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    xs.push('\n');
    for row in features.row_iter() {
        xs.push_str(&row.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","));
        xs.push('\n');
    }
    let mut ys = String::from("y\n");
    for v in y.iter() {
        ys.push_str(&format!("{v}\n"));
    }
    fs::write(x_path, xs)?;
    fs::write(y_path, ys)?;
    Ok(())
}

const CONFIG_KEYS: &[&str] = &[
    "n",
    "gamma",
    "cov",
    "rho",
    "xi",
    "sigma2_eps",
    "b",
    "alpha",
    "seed",
    "tests",
    "k_folds",
    "grid",
    "grid_min",
    "grid_max",
    "grid_points",
    "center_intercept",
];

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    n: Option<i64>,
    gamma: Option<f64>,
    cov: Option<String>,
    rho: Option<f64>,
    xi: Option<OneOrMany>,
    sigma2_eps: Option<f64>,
    b: Option<i64>,
    alpha: Option<f64>,
    seed: Option<i64>,
    tests: Option<Vec<String>>,
    k_folds: Option<i64>,
    grid: Option<Vec<f64>>,
    grid_min: Option<f64>,
    grid_max: Option<f64>,
    grid_points: Option<i64>,
    center_intercept: Option<bool>,
}

fn non_negative(key: &str, v: i64) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Config(format!("{key} = {v} must be non-negative")))
}

/// Parses a TOML simulation config; omitted keys keep their defaults.
pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let unknown: Vec<&str> = table
        .keys()
        .map(String::as_str)
        .filter(|k| !CONFIG_KEYS.contains(k))
        .collect();
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut cfg = SimConfig::default();
    if let Some(n) = raw.n {
        cfg.n = non_negative("n", n)?;
    }
    if let Some(g) = raw.gamma {
        cfg.gamma = g;
    }
    let rho = raw.rho.unwrap_or(0.025);
    cfg.cov = match raw.cov.as_deref() {
        None | Some("compound_symmetric") => CovStructure::CompoundSymmetric { rho },
        Some("heteroskedastic") => {
            if raw.rho.is_some() {
                return Err(Error::Config("rho only applies to compound_symmetric".into()));
            }
            CovStructure::Heteroskedastic
        }
        Some(other) => return Err(Error::Config(format!("unknown covariance structure {other:?}"))),
    };
    if let Some(xi) = raw.xi {
        cfg.xi = match xi {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        };
    }
    if let Some(s) = raw.sigma2_eps {
        cfg.sigma2_eps = s;
    }
    if let Some(b) = raw.b {
        cfg.b = non_negative("b", b)?;
    }
    if let Some(a) = raw.alpha {
        cfg.alpha = a;
    }
    if let Some(s) = raw.seed {
        cfg.seed = u64::try_from(s).map_err(|_| Error::Config(format!("seed = {s} must be non-negative")))?;
    }
    if let Some(tests) = raw.tests {
        cfg.tests = tests
            .iter()
            .map(|t| TestKind::parse(t).ok_or_else(|| Error::Config(format!("unknown test {t:?}"))))
            .collect::<Result<_>>()?;
    }
    if let Some(k) = raw.k_folds {
        cfg.k_folds = non_negative("k_folds", k)?;
    }
    let range_given = raw.grid_min.is_some() || raw.grid_max.is_some() || raw.grid_points.is_some();
    cfg.grid = match (raw.grid, range_given) {
        (Some(_), true) => {
            return Err(Error::Config("give either grid or grid_min/grid_max/grid_points".into()));
        }
        (Some(values), false) => LambdaGrid::new(values).map_err(|e| Error::Config(e.to_string()))?,
        (None, true) => {
            let points = non_negative("grid_points", raw.grid_points.unwrap_or(100))?;
            LambdaGrid::log_spaced(raw.grid_min.unwrap_or(1e-3), raw.grid_max.unwrap_or(2500.0), points)
                .map_err(|e| Error::Config(e.to_string()))?
        }
        (None, false) => LambdaGrid::default(),
    };
    if raw.center_intercept == Some(true) {
        cfg.penalty = Penalty::UnpenalizedIntercept;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_sim_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_sim_config(&text)
}
