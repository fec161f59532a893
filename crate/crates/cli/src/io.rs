//! Input parsing and output writing.

use std::fs::{self, File};
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{data_err, CliError, CliResult};

/// Numeric CSV table stored by column.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))
}

/// Read a comma-separated file with a header row where every cell is a
/// number.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let csv_err = |e: csv::Error| CliError::Data(format!("{}: {e}", path.display()));
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(CliError::Data(format!(
            "{}: empty file (a header row is required)",
            path.display()
        )));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        for (k, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {line}: column '{}': '{cell}' is not a number",
                    path.display(),
                    headers[k]
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: line {line}: column '{}': non-finite value '{cell}'",
                    path.display(),
                    headers[k]
                )));
            }
            columns[k].push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(Table { headers, columns })
}

/// Response vector, design matrix and predictor names.
pub fn regression_table(
    table: &Table,
    response: &str,
    path: &Path,
) -> CliResult<(Array1<f64>, Array2<f64>, Vec<String>)> {
    let r = table.column(response).ok_or_else(|| {
        CliError::Data(format!(
            "{}: response column '{response}' not found (columns: {})",
            path.display(),
            table.headers.join(", ")
        ))
    })?;
    let predictors: Vec<usize> = (0..table.headers.len()).filter(|&k| k != r).collect();
    if predictors.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no predictor columns",
            path.display()
        )));
    }
    let n = table.rows();
    let y = Array1::from(table.columns[r].clone());
    let x = Array2::from_shape_fn((n, predictors.len()), |(i, j)| {
        table.columns[predictors[j]][i]
    });
    let names = predictors
        .iter()
        .map(|&k| table.headers[k].clone())
        .collect();
    Ok((y, x, names))
}

/// One numeric series: the named column, or the only column.
pub fn read_series(path: &Path, column: Option<&str>) -> CliResult<Vec<f64>> {
    let table = read_table(path)?;
    let k = match column {
        Some(name) => table.column(name).ok_or_else(|| {
            CliError::Data(format!("{}: column '{name}' not found", path.display()))
        })?,
        None if table.headers.len() == 1 => 0,
        None => {
            return Err(CliError::Data(format!(
                "{}: {} columns; choose one with --column",
                path.display(),
                table.headers.len()
            )))
        }
    };
    Ok(table.columns.into_iter().nth(k).unwrap_or_default())
}

/// Grayscale matrix from a CSV file with a header row or a PGM file.
pub fn read_matrix(path: &Path) -> CliResult<Array2<f64>> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        return parse_pgm(&bytes).map_err(|m| CliError::Data(format!("{}: {m}", path.display())));
    }
    let table = read_table(path).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("dimension error: {m}")),
        other => other,
    })?;
    let (rows, cols) = (table.rows(), table.headers.len());
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        table.columns[j][i]
    }))
}

/// Plain (P2) or binary (P5) PGM, scaled to [0, 1] by the maximum value.
pub fn parse_pgm(bytes: &[u8]) -> Result<Array2<f64>, String> {
    let mut pos = 0;
    let mut token = || -> Result<String, String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PGM header".into());
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token()?;
    let number = |s: String| {
        s.parse::<usize>()
            .map_err(|_| format!("bad PGM header field '{s}'"))
    };
    let width = number(token()?)?;
    let height = number(token()?)?;
    let maxval = number(token()?)?;
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err("invalid PGM dimensions or maximum value".into());
    }
    let count = width * height;
    let values: Vec<f64> = if magic == "P2" {
        (0..count)
            .map(|_| token().and_then(&number).map(|v| v as f64))
            .collect::<Result<_, _>>()?
    } else {
        let data = &bytes[(pos + 1).min(bytes.len())..];
        let wide = maxval > 255;
        let need = if wide { 2 * count } else { count };
        if data.len() < need {
            return Err(format!(
                "expected {need} bytes of pixel data, found {}",
                data.len()
            ));
        }
        (0..count)
            .map(|k| {
                if wide {
                    f64::from(u16::from_be_bytes([data[2 * k], data[2 * k + 1]]))
                } else {
                    f64::from(data[k])
                }
            })
            .collect()
    };
    if values.iter().any(|&v| v > maxval as f64) {
        return Err("pixel value above the declared maximum".into());
    }
    let scale = maxval as f64;
    Ok(Array2::from_shape_fn((height, width), |(i, j)| {
        values[i * width + j] / scale
    }))
}

/// Edge list CSV with a header and two 1-based node columns.
pub fn read_edges(path: &Path) -> CliResult<Vec<(usize, usize)>> {
    let table = read_table(path)?;
    if table.headers.len() != 2 {
        return Err(CliError::Data(format!(
            "{}: an edge file needs exactly two columns",
            path.display()
        )));
    }
    (0..table.rows())
        .map(|i| {
            let node = |v: f64| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize - 1)
                } else {
                    Err(CliError::Data(format!(
                        "{}: row {}: node '{v}' is not a positive integer",
                        path.display(),
                        i + 1
                    )))
                }
            };
            Ok((node(table.columns[0][i])?, node(table.columns[1][i])?))
        })
        .collect()
}

/// Shortest representation that reads back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), num)
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(header).map_err(data_err)?;
    for row in rows {
        w.write_record(row).map_err(data_err)?;
    }
    w.flush().map_err(data_err)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}
