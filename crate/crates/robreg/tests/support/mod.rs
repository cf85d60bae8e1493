//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::Path;

/// A table with the Boston schema: the corrected file's columns in its order,
/// 506 rows of arbitrary but non-constant values.
pub fn boston_schema_table(path: &Path) {
    let header = [
        "town", "tract", "lon", "lat", "medv", "cmedv", "crim", "zn", "indus", "chas", "nox", "rm", "age", "dis", "rad", "tax",
        "ptratio", "b", "lstat",
    ];
    let mut text = header.join(",");
    text.push('\n');
    for i in 0..506 {
        let mut row = vec![format!("\"Town {}\"", i % 92), (i + 1).to_string()];
        for (j, name) in header.iter().enumerate().skip(2) {
            let v = if *name == "chas" { (i % 13 == 0) as u8 as f64 } else { ((i * 7919 + j * 104729) % 997) as f64 / 31.0 };
            row.push(v.to_string());
        }
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}
