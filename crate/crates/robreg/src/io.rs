//! CSV reading and writing. Floats are written with 17 significant digits so
//! every `f64` survives a round trip.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use robreg_core::Dataset;

use crate::error::{AppError, AppResult};

/// Name of the response column in data files.
pub const RESPONSE: &str = "y";

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV file held as strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as floats; errors name the column and the row.
    pub fn float_column(&self, name: &str) -> AppResult<Vec<f64>> {
        let j = self.column_index(name).ok_or_else(|| AppError::Data(format!("missing column '{name}'")))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let cell = row[j].trim();
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    AppError::Data(format!("column '{name}', data row {}: '{cell}' is not a finite number", i + 1))
                })
            })
            .collect()
    }
}

pub fn read_table(path: &Path) -> AppResult<Table> {
    read_table_with(path, false)
}

/// Like [`read_table`] but keeps ragged rows, such as a line cut short by an
/// interrupted write. Callers validate each row themselves.
pub fn read_table_lenient(path: &Path) -> AppResult<Table> {
    read_table_with(path, true)
}

fn read_table_with(path: &Path, lenient: bool) -> AppResult<Table> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(lenient).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().trim_matches('"').to_string())
        .collect();
    let mut table = Table::new(header);
    for (i, record) in reader.records().enumerate() {
        if lenient && record.is_err() {
            continue;
        }
        let record = record.map_err(|e| AppError::Data(format!("{}: data row {}: {e}", path.display(), i + 1)))?;
        table.rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(table)
}

pub fn write_table(path: &Path, table: &Table) -> AppResult<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|e| AppError::io(path, e))?;
    }
    std::fs::write(path, buf).map_err(|e| AppError::io(path, e))
}

/// Reads a data file: a header row, a response column `y`, and the remaining
/// columns as covariates in file order. The model gets an intercept.
pub fn read_dataset(path: &Path) -> AppResult<(Dataset, Vec<String>)> {
    let table = read_table(path)?;
    dataset_from_table(&table).map_err(|e| match e {
        AppError::Data(m) => AppError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn dataset_from_table(table: &Table) -> AppResult<(Dataset, Vec<String>)> {
    let y = table.float_column(RESPONSE)?;
    let names: Vec<String> = table.header.iter().filter(|h| *h != RESPONSE).cloned().collect();
    if names.is_empty() {
        return Err(AppError::Data("no covariate columns besides 'y'".into()));
    }
    if table.rows.is_empty() {
        return Err(AppError::Data("no data rows".into()));
    }
    let cols = names.iter().map(|n| table.float_column(n)).collect::<AppResult<Vec<_>>>()?;
    let p = names.len();
    let mut x = Vec::with_capacity(y.len() * p);
    for i in 0..y.len() {
        x.extend(cols.iter().map(|c| c[i]));
    }
    let data = Dataset::new(y, x, p, true).map_err(|e| AppError::Data(e.to_string()))?;
    Ok((data, names))
}

pub fn dataset_to_table(data: &Dataset, names: &[String]) -> Table {
    let mut header = vec![RESPONSE.to_string()];
    header.extend(names.iter().cloned());
    let mut table = Table::new(header);
    for (i, row) in data.rows().enumerate() {
        let mut out = vec![fmt_float(data.y()[i])];
        out.extend(row.iter().map(|&v| fmt_float(v)));
        table.rows.push(out);
    }
    table
}

pub fn write_dataset(path: &Path, data: &Dataset, names: &[String]) -> AppResult<()> {
    write_table(path, &dataset_to_table(data, names))
}

pub fn write_text(path: &Path, text: &str) -> AppResult<()> {
    let mut f = File::create(path).map_err(|e| AppError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| AppError::io(path, e))
}

pub fn create_dir(path: &Path) -> AppResult<()> {
    std::fs::create_dir_all(path).map_err(|e| AppError::io(path, e))
}
