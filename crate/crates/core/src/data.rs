//! Column-oriented datasets of genetic markers and expression traits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{BfcsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Marker,
    Trait,
}

/// Samples × variables, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    roles: Vec<Role>,
    columns: Vec<Vec<f64>>,
    n_samples: usize,
}

impl Dataset {
    /// Build a dataset, rejecting ragged, non-finite, or constant columns.
    pub fn new(names: Vec<String>, roles: Vec<Role>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() || roles.len() != columns.len() {
            return Err(BfcsError::DimensionMismatch(format!(
                "{} names, {} roles, {} columns",
                names.len(),
                roles.len(),
                columns.len()
            )));
        }
        let n_samples = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_samples {
                return Err(BfcsError::DimensionMismatch(format!(
                    "column '{name}' has {} samples, expected {n_samples}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(BfcsError::InvalidDataset(format!(
                    "column '{name}' has a non-finite value in sample {}",
                    row + 1
                )));
            }
        }
        if !columns.is_empty() && n_samples < 3 {
            return Err(BfcsError::InvalidDataset(format!(
                "need at least 3 samples, got {n_samples}"
            )));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.iter().all(|&v| v == col[0]) {
                return Err(BfcsError::ConstantColumn {
                    column: name.clone(),
                });
            }
        }
        Ok(Dataset {
            names,
            roles,
            columns,
            n_samples,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| self.roles[i] == role)
            .collect()
    }

    pub fn marker_indices(&self) -> Vec<usize> {
        self.indices_with_role(Role::Marker)
    }

    pub fn trait_indices(&self) -> Vec<usize> {
        self.indices_with_role(Role::Trait)
    }

    /// Multiply column `index` by `factor`, returning a new dataset.
    pub fn with_scaled_column(&self, index: usize, factor: f64) -> Result<Self> {
        let mut columns = self.columns.clone();
        for v in &mut columns[index] {
            *v *= factor;
        }
        Dataset::new(self.names.clone(), self.roles.clone(), columns)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Field separator. `None` picks `,` for `.csv` files and tab otherwise.
    pub delimiter: Option<u8>,
}

/// A parsed numeric table: header names plus columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

fn delimiter_for(path: &Path, options: &LoadOptions) -> u8 {
    options
        .delimiter
        .unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => b',',
            _ => b'\t',
        })
}

/// Read a header-first numeric table; rows are samples.
pub fn read_table(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| BfcsError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter_for(path, options))
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let names: Vec<String> = reader
        .headers()
        .map_err(|e| BfcsError::parse(path, 1, e.to_string()))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(BfcsError::parse(path, 1, "missing header row"));
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (row, record) in reader.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| BfcsError::parse(path, line, e.to_string()))?;
        if record.len() != names.len() {
            return Err(BfcsError::parse(
                path,
                line,
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| {
                let what = if cell.is_empty() {
                    "missing value"
                } else {
                    "non-numeric cell"
                };
                BfcsError::parse(
                    path,
                    line,
                    format!("{what} '{cell}' in column '{}'", names[c]),
                )
            })?;
            if !value.is_finite() {
                return Err(BfcsError::parse(
                    path,
                    line,
                    format!("non-finite value '{cell}' in column '{}'", names[c]),
                ));
            }
            columns[c].push(value);
        }
    }
    Ok(Table { names, columns })
}

/// Write columns as a tab-separated table with full round-trip precision.
pub fn write_table(path: impl AsRef<Path>, names: &[String], columns: &[&[f64]]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| BfcsError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "{}", names.join("\t")).map_err(io)?;
    let n = columns.first().map_or(0, |c| c.len());
    let mut line = String::new();
    for row in 0..n {
        line.clear();
        for (c, col) in columns.iter().enumerate() {
            if c > 0 {
                line.push('\t');
            }
            line.push_str(&col[row].to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Load expression traits and genotype markers, aligned by row order.
///
/// The merged dataset lists markers first, then traits.
pub fn load_dataset(
    expression_path: impl AsRef<Path>,
    genotype_path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<Dataset> {
    let expression = read_table(expression_path.as_ref(), options)?;
    let genotype = read_table(genotype_path.as_ref(), options)?;
    if expression.n_rows() != genotype.n_rows() {
        return Err(BfcsError::DimensionMismatch(format!(
            "{} has {} samples but {} has {}",
            expression_path.as_ref().display(),
            expression.n_rows(),
            genotype_path.as_ref().display(),
            genotype.n_rows()
        )));
    }
    let mut names = genotype.names;
    let mut roles = vec![Role::Marker; names.len()];
    let mut columns = genotype.columns;
    roles.extend(std::iter::repeat_n(Role::Trait, expression.names.len()));
    names.extend(expression.names);
    columns.extend(expression.columns);
    Dataset::new(names, roles, columns)
}
