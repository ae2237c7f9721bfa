use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use gcs_core::{GcsError, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Human => "txt",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// One command result, rendered in every format up front.
pub struct Report {
    pub json: String,
    /// Header row first.
    pub csv: Vec<Vec<String>>,
    pub human: String,
    /// Some seed or path hit a limit.
    pub partial: bool,
}

impl Report {
    pub fn new<T: Serialize>(value: &T, csv: Vec<Vec<String>>, human: String) -> Result<Self> {
        Ok(Report {
            json: serde_json::to_string(value)?,
            csv,
            human,
            partial: false,
        })
    }

    pub fn partial(mut self, partial: bool) -> Self {
        self.partial = partial;
        self
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        Ok(match format {
            Format::Json => format!("{}\n", self.json).into_bytes(),
            Format::Human => {
                let mut s = self.human.clone();
                if !s.ends_with('\n') {
                    s.push('\n');
                }
                s.into_bytes()
            }
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .flexible(true)
                    .from_writer(Vec::new());
                for row in &self.csv {
                    w.write_record(row)?;
                }
                w.into_inner().map_err(|e| GcsError::Io(e.to_string()))?
            }
        })
    }

    /// Writes to stdout, or to `<dir>/<name>.<ext>`; returns the file name when written.
    pub fn emit(&self, format: Format, out: Option<&Path>, name: &str) -> Result<Option<String>> {
        let bytes = self.render(format)?;
        match out {
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(&bytes)?;
                stdout.flush()?;
                Ok(None)
            }
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let file = format!("{name}.{}", format.extension());
                std::fs::write(dir.join(&file), bytes)?;
                Ok(Some(file))
            }
        }
    }
}

pub fn row<I, S>(cells: I) -> Vec<String>
where
    I: IntoIterator<Item = S>,
    S: ToString,
{
    cells.into_iter().map(|c| c.to_string()).collect()
}
