use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// CSV with `#`-prefixed provenance lines; floats use 17 significant digits.
pub struct Csv {
    header: Vec<String>,
    columns: String,
    rows: String,
}

impl Csv {
    pub fn new(command: &str, config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            header: vec![
                format!("scarlab {VERSION} {command}"),
                format!("config: {}", config.canonical()),
                format!("config-sha256: {}", config.hash()),
                format!("seed: {}", config.seed),
            ],
            columns: columns.join(","),
            rows: String::new(),
        }
    }

    /// Extra `# key: value` header line.
    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.header.push(format!("{key}: {value}"));
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        self.rows.push_str(&line.join(","));
        self.rows.push('\n');
    }

    pub fn finish(self, out: Option<&Path>) -> Result<(), CliError> {
        let mut text = String::new();
        for line in &self.header {
            writeln!(text, "# {line}").unwrap();
        }
        writeln!(text, "{}", self.columns).unwrap();
        text.push_str(&self.rows);
        emit(&text, out)
    }
}

pub enum Cell {
    Text(String),
    Int(usize),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
