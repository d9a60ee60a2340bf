//! Result bundle: scalar metrics and provenance as JSON, time series as
//! CSV with units in the column headers, matrices as row-major [re, im].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use qamem::linalg::CMat;

use crate::config::ExperimentConfig;
use crate::error::{CliResult, Failure};

#[derive(Debug, Serialize)]
pub struct Provenance {
    pub version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    /// Kept at zero inside the bundle so that reruns with the same config
    /// and seed compare byte-identical; the measured wall time goes to
    /// stderr instead.
    pub wall_time_ms: u64,
}

#[derive(Debug, Serialize)]
pub struct SeriesTable {
    pub name: String,
    pub file: String,
    /// Column headers, each carrying its unit or label.
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<String>>,
}

impl SeriesTable {
    pub fn new(name: &str, columns: Vec<String>, rows: Vec<Vec<String>>) -> Self {
        SeriesTable {
            name: name.to_string(),
            file: format!("{name}.csv"),
            columns,
            rows,
        }
    }

    pub fn numeric(name: &str, columns: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| format!("{v}")).collect())
            .collect();
        SeriesTable::new(name, columns, rows)
    }
}

#[derive(Debug, Serialize)]
pub struct ResultBundle {
    pub provenance: Provenance,
    pub config: ExperimentConfig,
    pub metrics: BTreeMap<String, Value>,
    pub series: Vec<SeriesTable>,
    pub matrices: BTreeMap<String, Vec<Vec<[f64; 2]>>>,
}

impl ResultBundle {
    pub fn new(config: &ExperimentConfig, threads: usize) -> Self {
        ResultBundle {
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.seed,
                threads,
                wall_time_ms: 0,
            },
            config: config.clone(),
            metrics: BTreeMap::new(),
            series: Vec::new(),
            matrices: BTreeMap::new(),
        }
    }

    pub fn metric(&mut self, key: &str, value: impl Into<Value>) {
        self.metrics.insert(key.to_string(), value.into());
    }

    pub fn matrix(&mut self, key: &str, m: &CMat) {
        let rows = m
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        self.matrices.insert(key.to_string(), rows);
    }

    /// Real matrices share the `[re, im]` encoding so every matrix in
    /// results.json reads the same way.
    pub fn real_matrix(&mut self, key: &str, rows: &[Vec<f64>]) {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| [v, 0.0]).collect())
            .collect();
        self.matrices.insert(key.to_string(), rows);
    }

    /// Write results.json plus one CSV per series; returns the paths.
    pub fn write(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Run(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::new();

        let json_path = dir.join("results.json");
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Failure::Run(format!("serializing results: {e}")))?;
        text.push('\n');
        fs::write(&json_path, text)
            .map_err(|e| Failure::Run(format!("writing {}: {e}", json_path.display())))?;
        written.push(json_path);

        for table in &self.series {
            let path = dir.join(&table.file);
            let mut w = csv::Writer::from_path(&path)
                .map_err(|e| Failure::Run(format!("writing {}: {e}", path.display())))?;
            w.write_record(&table.columns)
                .and_then(|_| table.rows.iter().try_for_each(|r| w.write_record(r)))
                .and_then(|_| w.flush().map_err(csv::Error::from))
                .map_err(|e| Failure::Run(format!("writing {}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}
