//! Seeded batch generation over seeds × sweep values.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::engine::clugen;
use crate::error::{Error, Result};
use crate::io::write_dataset;

pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct ManifestEntry {
    pub file: PathBuf,
    pub seed: u64,
    pub sweep_value: Option<f64>,
    /// Number of points generated, when the cell succeeded.
    pub points: Option<usize>,
    pub error: Option<String>,
}

impl ManifestEntry {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub sweep_param: Option<String>,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn failed(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| !e.ok())
    }

    pub fn all_ok(&self) -> bool {
        self.failed().next().is_none()
    }

    /// CSV with columns `file,seed,sweep_param,sweep_value,points,status,error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("file,seed,sweep_param,sweep_value,points,status,error\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.file.file_name().map(|f| f.to_string_lossy()).unwrap_or_default(),
                e.seed,
                self.sweep_param.as_deref().unwrap_or(""),
                e.sweep_value.map(|v| v.to_string()).unwrap_or_default(),
                e.points.map(|p| p.to_string()).unwrap_or_default(),
                if e.ok() { "ok" } else { "failed" },
                e.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            );
        }
        out
    }
}

/// File name for one cell, e.g. `seed7_llength12.csv`.
pub fn cell_file_name(seed: u64, sweep: Option<(&str, f64)>, ext: &str) -> String {
    match sweep {
        Some((param, value)) => format!("seed{seed}_{param}{value}.{ext}"),
        None => format!("seed{seed}.{ext}"),
    }
}

fn run_cell(config: &RunConfig, dir: &Path, seed: u64, value: Option<f64>) -> ManifestEntry {
    let sweep = config.sweep.as_ref().zip(value).map(|(s, v)| (s.param.as_str(), v));
    let file = dir.join(cell_file_name(seed, sweep, config.format.extension()));
    let result = config.cell_params(seed, value).and_then(|params| {
        let data = clugen(&params)?;
        write_dataset(&data, &params, config.format, &file)?;
        Ok(data.num_points())
    });
    ManifestEntry {
        file,
        seed,
        sweep_value: value,
        points: result.as_ref().ok().copied(),
        error: result.err().map(|e| e.to_string()),
    }
}

/// Generate one file per (seed, sweep value) into the directory
/// `config.output`, and write `manifest.csv` next to them.
///
/// Without a seed list the parameter seed is used; without a sweep each seed
/// produces one file. Each cell seeds its own RNG from its seed, so the sweep
/// value changes the parameters but not the random stream. Cells run in
/// parallel; a failing cell is recorded in the manifest and does not stop the
/// others.
pub fn batch_generate(config: &RunConfig) -> Result<Manifest> {
    let dir = &config.output;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let seeds = config.seeds.clone().unwrap_or_else(|| vec![config.params.seed]);
    let values: Vec<Option<f64>> = match &config.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let cells: Vec<(u64, Option<f64>)> = seeds
        .iter()
        .flat_map(|&s| values.iter().map(move |&v| (s, v)))
        .collect();

    let entries = cells
        .par_iter()
        .map(|&(seed, value)| run_cell(config, dir, seed, value))
        .collect();
    let manifest = Manifest {
        sweep_param: config.sweep.as_ref().map(|s| s.param.clone()),
        entries,
    };
    let path = dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_csv()).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
