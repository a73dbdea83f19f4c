//! CSV ingestion and the on-disk form of a [`NeuronSystem`].
//!
//! Input files have one column per series and a mandatory header row of
//! series names; every cell must parse as a finite real.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::NeuronSystem;

/// One named column of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeries {
    pub name: String,
    pub values: Vec<f64>,
}

fn input_err(e: impl std::fmt::Display) -> Error {
    Error::Input(e.to_string())
}

/// Reads every column of a headed CSV.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<NamedSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(input_err)?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(Error::Input("missing header row".into()));
    }
    let mut columns: Vec<NamedSeries> = Vec::with_capacity(header.len());
    for (i, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Input(format!("column {} has an empty name", i + 1)));
        }
        if columns.iter().any(|c| c.name == name) {
            return Err(Error::Input(format!("duplicate column name '{name}'")));
        }
        columns.push(NamedSeries {
            name: name.to_string(),
            values: Vec::new(),
        });
    }
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(input_err)?;
        // header is line 1
        let line = row + 2;
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = cell.parse().map_err(|_| {
                Error::Input(format!(
                    "line {line}, column '{}': '{cell}' is not a number",
                    col.name
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Input(format!(
                    "line {line}, column '{}': non-finite value '{cell}'",
                    col.name
                )));
            }
            col.values.push(v);
        }
    }
    if columns[0].values.is_empty() {
        return Err(Error::Input("no data rows".into()));
    }
    Ok(columns)
}

pub fn read_csv_path(path: &Path) -> Result<Vec<NamedSeries>> {
    let file =
        std::fs::File::open(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    read_csv(file)
}

/// Integer labels of a column; fails on any non-integral value.
pub fn integer_labels(series: &NamedSeries) -> Result<Vec<i64>> {
    series
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if v.fract() == 0.0 && v.abs() < 2f64.powi(53) {
                Ok(v as i64)
            } else {
                Err(Error::Input(format!(
                    "column '{}', row {}: {v} is not an integer label",
                    series.name,
                    i + 1
                )))
            }
        })
        .collect()
}

/// Writes the labelled series as columns `X1,X2,X3`.
pub fn write_system_csv<W: Write>(system: &NeuronSystem, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Input(e.to_string());
    w.write_record(["X1", "X2", "X3"]).map_err(io)?;
    let [x1, x2, x3] = system.labels();
    for i in 0..x1.len() {
        w.write_record([x1[i].to_string(), x2[i].to_string(), x3[i].to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Input(e.to_string()))?;
    Ok(())
}

/// Parses a system file written by [`write_system_csv`]. Malformed CSV is
/// an [`Error::Input`]; well-formed data that is not a valid system is an
/// [`Error::Constraint`].
pub fn read_system_csv<R: Read>(reader: R) -> Result<NeuronSystem> {
    let cols = read_csv(reader)?;
    let find = |name: &str| {
        cols.iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Input(format!("system file lacks column '{name}'")))
    };
    let x1 = integer_labels(find("X1")?)?;
    let x2 = integer_labels(find("X2")?)?;
    let x3 = integer_labels(find("X3")?)?;
    NeuronSystem::from_series(&x1, &x2, &x3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::CANONICAL_SYSTEM_CSV;

    #[test]
    fn reads_columns() {
        let cols = read_csv("a, b\n1,2.5\n-3, 4e1\n".as_bytes()).unwrap();
        assert_eq!(cols[0].name, "a");
        assert_eq!(cols[0].values, vec![1.0, -3.0]);
        assert_eq!(cols[1].values, vec![2.5, 40.0]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "a,b\n",
            "a,b\n1,x\n",
            "a,b\n1,2\n3\n",
            "a,a\n1,2\n",
            "a\nNaN\n",
            "a\ninf\n",
        ] {
            assert!(
                matches!(read_csv(bad.as_bytes()), Err(Error::Input(_))),
                "accepted {bad:?}"
            );
        }
    }

    #[test]
    fn system_round_trip() {
        let sys = read_system_csv(CANONICAL_SYSTEM_CSV.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_system_csv(&sys, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CANONICAL_SYSTEM_CSV);
    }

    #[test]
    fn corrupted_system_is_a_constraint_error() {
        let mut lines: Vec<String> = CANONICAL_SYSTEM_CSV.lines().map(String::from).collect();
        lines[2] = "7,1,1".into();
        let text = lines.join("\n");
        assert!(matches!(
            read_system_csv(text.as_bytes()),
            Err(Error::Constraint(_))
        ));
        assert!(matches!(
            read_system_csv("X1,X2\n1,1\n".as_bytes()),
            Err(Error::Input(_))
        ));
    }
}
