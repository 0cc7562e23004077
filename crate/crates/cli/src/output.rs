use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if *x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) => format!("{x}"),
            Cell::Num(x) => format!("{x:e}"),
            Cell::Int(x) => x.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// What a subcommand produced.
pub struct Report {
    pub table: Table,
    pub diagnostics: Value,
    pub metadata: Value,
    /// Convergence gates that did not pass.
    pub failures: Vec<String>,
    pub plot: Option<Plot>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self { table, diagnostics: json!({}), metadata: json!({}), failures: Vec::new(), plot: None }
    }
}

pub enum Plot {
    Line { x: usize, y: usize, err: Option<usize>, xlabel: String, ylabel: String },
    Surface { x: usize, y: usize, z: usize, nx: usize, ny: usize },
}

fn gnuplot(plot: &Plot, table: &Table, data: &str) -> String {
    let col = |i: usize| i + 1;
    let head = "set datafile separator ','\nset key autotitle columnhead\n";
    match plot {
        Plot::Line { x, y, err, xlabel, ylabel } => {
            let using = match err {
                Some(e) => format!("{}:{}:{} with yerrorlines", col(*x), col(*y), col(*e)),
                None => format!("{}:{} with lines", col(*x), col(*y)),
            };
            format!("{head}set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nplot '{data}' using {using}\n")
        }
        Plot::Surface { x, y, z, nx, ny } => format!(
            "{head}set xlabel '{}'\nset ylabel '{}'\nset dgrid3d {ny},{nx}\nset pm3d map\nsplot '{data}' using {}:{}:{} with pm3d\n",
            table.columns[*x],
            table.columns[*y],
            col(*x),
            col(*y),
            col(*z)
        ),
    }
}

/// Writes the data file, the optional gnuplot script and the manifest; returns their paths.
pub fn write_artifacts(config: &RunConfig, name: &str, report: &Report) -> anyhow::Result<Vec<PathBuf>> {
    let dir: &Path = &config.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    let data_name = match config.format {
        Format::Csv => format!("{name}.csv"),
        Format::Json => format!("{name}.json"),
    };
    let data = match config.format {
        Format::Csv => report.table.to_csv(),
        Format::Json => serde_json::to_string_pretty(&report.table)? + "\n",
    };
    fs::write(dir.join(&data_name), data).with_context(|| format!("writing {data_name}"))?;
    files.push(data_name.clone());
    if let (Some(plot), Format::Csv) = (&report.plot, config.format) {
        let script = format!("{name}.gp");
        fs::write(dir.join(&script), gnuplot(plot, &report.table, &data_name))?;
        files.push(script);
    }
    let manifest_name = format!("{name}.manifest.json");
    let manifest = json!({
        "tool": "wedgetrap",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "files": files,
        "rows": report.table.rows.len(),
        "metadata": report.metadata,
        "diagnostics": report.diagnostics,
        "gate_failures": report.failures,
    });
    fs::write(dir.join(&manifest_name), serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(manifest_name);
    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_empty_cells() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1.5.into(), "x,y".into(), Cell::Empty]);
        t.push(vec![2.5e-7.into(), 3usize.into(), (-0.25).into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1.5,\"x,y\",\n2.5e-7,3,-0.25\n");
    }
}
