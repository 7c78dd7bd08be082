//! CSV datasets, simulation metadata and model documents.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ensemble::SparModel;
use crate::error::{Result, SparError};
use crate::sim::{SimSpec, Simulation};

/// Column holding the true linear predictor in simulated files.
pub const ETA_COLUMN: &str = "eta_true";

/// A numeric table split into predictors, response and optional true η.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub predictor_names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: Option<Vec<f64>>,
    pub eta_true: Option<Vec<f64>>,
}

/// Reads a CSV file with a header row. The column named `response` (if
/// present) becomes `y`, a column named `eta_true` becomes the true linear
/// predictor, and every other column is a predictor.
pub fn read_table(path: &Path, response: &str) -> Result<DataTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| -> Result<Option<usize>> {
        let hits: Vec<usize> = headers.iter().enumerate().filter(|(_, h)| *h == name).map(|(i, _)| i).collect();
        match hits.len() {
            0 => Ok(None),
            1 => Ok(Some(hits[0])),
            _ => Err(SparError::Data(format!("column '{name}' appears more than once"))),
        }
    };
    let y_col = find(response)?;
    let eta_col = if response == ETA_COLUMN { None } else { find(ETA_COLUMN)? };
    let x_cols: Vec<usize> = (0..headers.len()).filter(|c| Some(*c) != y_col && Some(*c) != eta_col).collect();
    let predictor_names: Vec<String> = x_cols.iter().map(|&c| headers[c].clone()).collect();

    let mut values: Vec<f64> = Vec::new();
    let mut y = Vec::new();
    let mut eta = Vec::new();
    let mut rows = 0usize;
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(SparError::Data(format!("row {} has {} fields, header has {}", r + 1, record.len(), headers.len())));
        }
        let cell = |c: usize| -> Result<f64> {
            record[c].parse::<f64>().map_err(|_| {
                SparError::Data(format!("row {}, column '{}': '{}' is not a number", r + 1, headers[c], &record[c]))
            })
        };
        for &c in &x_cols {
            values.push(cell(c)?);
        }
        if let Some(c) = y_col {
            y.push(cell(c)?);
        }
        if let Some(c) = eta_col {
            eta.push(cell(c)?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(SparError::Data(format!("{} has no data rows", path.display())));
    }
    let x = DMatrix::from_row_slice(rows, x_cols.len(), &values);
    Ok(DataTable {
        predictor_names,
        x,
        y: y_col.map(|_| y),
        eta_true: eta_col.map(|_| eta),
    })
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Writes predictors as `x1..xp`, then `y` and `eta_true` when given.
pub fn write_dataset(path: &Path, x: &DMatrix<f64>, y: Option<&[f64]>, eta_true: Option<&[f64]>) -> Result<()> {
    let n = x.nrows();
    for (name, col) in [("y", y), (ETA_COLUMN, eta_true)] {
        if let Some(c) = col {
            if c.len() != n {
                return Err(SparError::dim(format!("{name} has {} entries, design has {n} rows", c.len())));
            }
        }
    }
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    if y.is_some() {
        header.push("y".into());
    }
    if eta_true.is_some() {
        header.push(ETA_COLUMN.into());
    }
    writer.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..n {
        row.clear();
        row.extend(x.row(i).iter().map(|v| fmt_f64(*v)));
        if let Some(y) = y {
            row.push(fmt_f64(y[i]));
        }
        if let Some(e) = eta_true {
            row.push(fmt_f64(e[i]));
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes named numeric columns of equal length.
pub fn write_columns(path: &Path, columns: &[(&str, &[f64])]) -> Result<()> {
    let n = columns.first().map_or(0, |c| c.1.len());
    if columns.iter().any(|c| c.1.len() != n) {
        return Err(SparError::dim("columns differ in length"));
    }
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    writer.write_record(columns.iter().map(|c| c.0))?;
    for i in 0..n {
        writer.write_record(columns.iter().map(|c| fmt_f64(c.1[i])))?;
    }
    writer.flush()?;
    Ok(())
}

/// Sidecar describing how a simulated dataset was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub spec: SimSpec,
    pub seed: u64,
    pub beta0: f64,
    pub active_count: usize,
    /// Zero-based positions of the nonzero coefficients.
    pub active: Vec<usize>,
    pub beta: Vec<f64>,
    pub signal_c: f64,
    pub target_mean: f64,
}

impl DatasetMetadata {
    pub fn from_simulation(sim: &Simulation, seed: u64) -> Self {
        let m = &sim.model;
        DatasetMetadata {
            spec: sim.spec,
            seed,
            beta0: m.beta0,
            active_count: m.active_count(),
            active: m.active.iter().enumerate().filter(|(_, a)| **a).map(|(j, _)| j).collect(),
            beta: m.beta.clone(),
            signal_c: m.signal_c,
            target_mean: m.target_mean,
        }
    }

    pub fn active_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.beta.len()];
        for &j in &self.active {
            mask[j] = true;
        }
        mask
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

const MODEL_FORMAT: &str = "spar-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: SparModel,
}

/// Serializes a model as JSON. Reals are written in shortest round-trip form,
/// so loading reproduces every value bit for bit.
pub fn model_to_string(model: &SparModel) -> Result<String> {
    if !model.nu.is_finite() {
        return Err(SparError::param("a model with an infinite threshold cannot be stored"));
    }
    let doc = ModelDocument { format: MODEL_FORMAT.into(), version: MODEL_VERSION, model: model.clone() };
    Ok(serde_json::to_string(&doc)?)
}

pub fn model_from_str(s: &str) -> Result<SparModel> {
    let doc: ModelDocument = serde_json::from_str(s)?;
    if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
        return Err(SparError::Data(format!("unsupported model document {} v{}", doc.format, doc.version)));
    }
    Ok(doc.model)
}

pub fn save_model(path: &Path, model: &SparModel) -> Result<()> {
    let mut s = model_to_string(model)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SparModel> {
    model_from_str(&std::fs::read_to_string(path)?)
}
