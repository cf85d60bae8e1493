//! Preprocessing of the two real datasets.
//!
//! Boston housing (corrected version, 506 rows): columns `crim, zn, indus,
//! chas, nox, rm, age, dis, rad, tax, ptratio, b, lstat, lon, lat, cmedv`.
//! Optional `town, townno, tract, medv` and row-name columns are ignored.
//! Diabetes (442 rows): `age, sex, bmi, bp, s1, ..., s6, y`.
//! Header matching is case-insensitive; column order is free.

use std::str::FromStr;

use robreg_core::{Dataset, Error, Result};
use serde::{Deserialize, Serialize};

use crate::io::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    Boston,
    Diabetes,
}

pub const BOSTON_CONTINUOUS: [&str; 14] =
    ["crim", "zn", "indus", "nox", "rm", "age", "dis", "rad", "tax", "ptratio", "b", "lstat", "lon", "lat"];
pub const BOSTON_BINARY: &str = "chas";
pub const BOSTON_RESPONSE: &str = "cmedv";
const BOSTON_IGNORED: [&str; 4] = ["town", "townno", "tract", "medv"];

pub const DIABETES_COVARIATES: [&str; 10] = ["age", "sex", "bmi", "bp", "s1", "s2", "s3", "s4", "s5", "s6"];
pub const DIABETES_RESPONSE: &str = "y";

/// Row-name columns written by R and pandas.
const ROW_NAMES: [&str; 3] = ["", "rownames", "unnamed: 0"];

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boston" => Ok(Recipe::Boston),
            "diabetes" => Ok(Recipe::Diabetes),
            _ => Err(Error::Domain(format!("unknown recipe '{s}'"))),
        }
    }
}

/// A prepared dataset and its covariate names.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub data: Dataset,
    pub names: Vec<String>,
}

fn ingestion(msg: String) -> Error {
    Error::Ingestion(msg)
}

/// Case-insensitive column lookup that rejects unknown columns by name.
fn check_columns(table: &Table, known: &[&str]) -> Result<()> {
    for h in &table.header {
        let l = h.to_ascii_lowercase();
        if !known.contains(&l.as_str()) && !ROW_NAMES.contains(&l.as_str()) {
            return Err(ingestion(format!("unexpected column '{h}'")));
        }
    }
    let mut seen: Vec<String> = table.header.iter().map(|h| h.to_ascii_lowercase()).collect();
    seen.sort();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(ingestion(format!("duplicate column '{}'", w[0])));
    }
    Ok(())
}

fn column(table: &Table, name: &str) -> Result<Vec<f64>> {
    let j = table
        .header
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| ingestion(format!("missing column '{name}'")))?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let cell = row.get(j).map(|c| c.trim()).unwrap_or("");
            cell.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| ingestion(format!("column '{name}', data row {}: '{cell}' is not a finite number", i + 1)))
        })
        .collect()
}

/// `x - mean`.
pub fn centre(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// `(x - mean) / sd` with the `n - 1` standard deviation.
pub fn standardize(v: &[f64], name: &str) -> Result<Vec<f64>> {
    let n = v.len() as f64;
    if v.len() < 2 {
        return Err(ingestion(format!("column '{name}' needs at least 2 rows")));
    }
    let mean = v.iter().sum::<f64>() / n;
    let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(ingestion(format!("column '{name}' is constant")));
    }
    Ok(v.iter().map(|x| (x - mean) / sd).collect())
}

fn assemble(y: Vec<f64>, cols: &[Vec<f64>], names: Vec<String>) -> Result<Prepared> {
    let n = y.len();
    let mut x = Vec::with_capacity(n * cols.len());
    for i in 0..n {
        x.extend(cols.iter().map(|c| c[i]));
    }
    Ok(Prepared { data: Dataset::new(y, x, cols.len(), true)?, names })
}

/// Covariates standardized, response centred but left on its own scale.
/// Boston adds the squares of the standardized continuous covariates (not
/// re-standardized) and the binary `chas` as is, for 29 columns.
pub fn prepare_real_dataset(table: &Table, recipe: Recipe) -> Result<Prepared> {
    if table.rows.is_empty() {
        return Err(ingestion("no data rows".into()));
    }
    match recipe {
        Recipe::Boston => {
            let mut known: Vec<&str> = BOSTON_CONTINUOUS.to_vec();
            known.extend([BOSTON_BINARY, BOSTON_RESPONSE]);
            known.extend(BOSTON_IGNORED);
            check_columns(table, &known)?;
            let y = centre(&column(table, BOSTON_RESPONSE)?);
            let mut cols = Vec::with_capacity(29);
            for name in BOSTON_CONTINUOUS {
                cols.push(standardize(&column(table, name)?, name)?);
            }
            for k in 0..BOSTON_CONTINUOUS.len() {
                let sq = cols[k].iter().map(|v| v * v).collect();
                cols.push(sq);
            }
            let chas = column(table, BOSTON_BINARY)?;
            if let Some(i) = chas.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(ingestion(format!("column 'chas', data row {}: expected 0 or 1", i + 1)));
            }
            cols.push(chas);
            let mut names: Vec<String> = BOSTON_CONTINUOUS.iter().map(|s| s.to_string()).collect();
            names.extend(BOSTON_CONTINUOUS.iter().map(|s| format!("{s}_sq")));
            names.push(BOSTON_BINARY.into());
            assemble(y, &cols, names)
        }
        Recipe::Diabetes => {
            let mut known = DIABETES_COVARIATES.to_vec();
            known.push(DIABETES_RESPONSE);
            check_columns(table, &known)?;
            let y = centre(&column(table, DIABETES_RESPONSE)?);
            let cols =
                DIABETES_COVARIATES.iter().map(|&name| standardize(&column(table, name)?, name)).collect::<Result<Vec<_>>>()?;
            assemble(y, &cols, DIABETES_COVARIATES.iter().map(|s| s.to_string()).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(header: &[&str], rows: usize, f: impl Fn(usize, usize) -> f64) -> Table {
        let mut t = Table::new(header.iter().map(|s| s.to_string()).collect());
        for i in 0..rows {
            t.rows.push((0..header.len()).map(|j| f(i, j).to_string()).collect());
        }
        t
    }

    fn value(i: usize, j: usize) -> f64 {
        ((i * 7919 + j * 104729) % 1000) as f64 / 37.0 + j as f64
    }

    #[test]
    fn standardized_moments() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64).powf(1.3)).collect();
        let s = standardize(&v, "v").unwrap();
        let m = s.iter().sum::<f64>() / 50.0;
        let var = s.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 49.0;
        assert!(m.abs() < 1e-12 && (var.sqrt() - 1.0).abs() < 1e-12);
        assert!(standardize(&[2.0; 4], "c").is_err());
    }

    #[test]
    fn diabetes_shape() {
        let mut h = DIABETES_COVARIATES.to_vec();
        h.push("Y");
        let p = prepare_real_dataset(&table(&h, 442, value), Recipe::Diabetes).unwrap();
        assert_eq!((p.data.n(), p.data.p()), (442, 10));
        let raw: Vec<f64> = (0..442).map(|i| value(i, 10)).collect();
        let mean = raw.iter().sum::<f64>() / 442.0;
        for (y, r) in p.data.y().iter().zip(&raw) {
            assert!((y - (r - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn boston_squares_follow_standardized_columns() {
        let mut h: Vec<&str> = vec!["TOWN", "tract", "medv"];
        h.extend(BOSTON_CONTINUOUS);
        h.extend(["chas", "cmedv"]);
        let chas_col = h.len() - 2;
        let mut t = table(&h, 30, value);
        for (i, row) in t.rows.iter_mut().enumerate() {
            row[chas_col] = (i % 2).to_string();
            row[0] = "Nahant".into();
        }
        let p = prepare_real_dataset(&t, Recipe::Boston).unwrap();
        assert_eq!(p.data.p(), 29);
        for k in 0..14 {
            let c = p.data.column(k);
            assert_eq!(p.data.column(14 + k), c.iter().map(|v| v * v).collect::<Vec<_>>().as_slice());
        }
        assert_eq!(p.names[28], "chas");
    }

    #[test]
    fn ingestion_errors_name_the_column() {
        let mut h = DIABETES_COVARIATES.to_vec();
        h.push("y");
        h.push("extra");
        let e = prepare_real_dataset(&table(&h, 10, value), Recipe::Diabetes).unwrap_err();
        assert!(matches!(&e, Error::Ingestion(m) if m.contains("'extra'")), "{e}");
        let e = prepare_real_dataset(&table(&h[..10], 10, value), Recipe::Diabetes).unwrap_err();
        assert!(matches!(&e, Error::Ingestion(m) if m.contains("'y'")), "{e}");
        let e = prepare_real_dataset(&table(&["age", "age"], 10, value), Recipe::Diabetes).unwrap_err();
        assert!(matches!(&e, Error::Ingestion(m) if m.contains("duplicate")), "{e}");
    }
}
