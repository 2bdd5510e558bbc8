//! Run configuration files.
//!
//! A configuration is a flat list of `key = value` lines. Values are JSON
//! literals (numbers, booleans, arrays such as `[1, 1]`) or bare words
//! (`proj_dist_fn = unif`). Blank lines and lines starting with `#` are
//! ignored. Seeds may also be given as an inclusive range, `seeds = 1..30`.
//!
//! ```text
//! num_dims = 2
//! num_clusters = 4
//! num_points = 200
//! direction = [1, 1]
//! angle_disp = 0.19634954
//! cluster_sep = [10, 10]
//! llength = 10
//! llength_disp = 1.5
//! lateral_disp = 1
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use ndarray::Array1;
use serde_json::Value;

use crate::engine::{validate, Direction, GenerationParams, PointDist, ProjDist, Stage};
use crate::error::{Error, Result, ValidationErrors};
use crate::io::{rows_matrix, DataFormat};

/// Scalar generation parameters that a batch run can sweep over.
pub const SWEEPABLE: &[&str] = &["num_points", "angle_disp", "llength", "llength_disp", "lateral_disp"];

const MANDATORY: &[&str] = &[
    "num_dims",
    "num_clusters",
    "num_points",
    "direction",
    "angle_disp",
    "cluster_sep",
    "llength",
    "llength_disp",
    "lateral_disp",
];

const KNOWN: &[&str] = &[
    "num_dims",
    "num_clusters",
    "num_points",
    "direction",
    "angle_disp",
    "cluster_sep",
    "llength",
    "llength_disp",
    "lateral_disp",
    "allow_empty",
    "cluster_offset",
    "proj_dist_fn",
    "point_dist_fn",
    "sizes",
    "centers",
    "lengths",
    "angle_deltas",
    "seed",
    "seeds",
    "output",
    "format",
    "sweep_param",
    "sweep_values",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: GenerationParams,
    /// Output file for a single run, output directory for a batch.
    pub output: PathBuf,
    pub format: DataFormat,
    pub seeds: Option<Vec<u64>>,
    pub sweep: Option<Sweep>,
}

impl RunConfig {
    /// Parameters of one batch cell.
    pub fn cell_params(&self, seed: u64, sweep_value: Option<f64>) -> Result<GenerationParams> {
        let mut params = self.params.clone().with_seed(seed);
        if let (Some(sweep), Some(value)) = (&self.sweep, sweep_value) {
            apply_sweep(&mut params, &sweep.param, value)?;
        }
        Ok(params)
    }
}

/// Set the scalar parameter `name` to `value`.
pub fn apply_sweep(params: &mut GenerationParams, name: &str, value: f64) -> Result<()> {
    match name {
        "num_points" => {
            if (value.is_nan() || value < 0.0) || value.fract() != 0.0 {
                return Err(Error::invalid(format!(
                    "num_points sweep value must be a non-negative integer (got {value})"
                )));
            }
            params.num_points = value as usize;
        }
        "angle_disp" => params.angle_disp = value,
        "llength" => params.llength = value,
        "llength_disp" => params.llength_disp = value,
        "lateral_disp" => params.lateral_disp = value,
        other => {
            return Err(Error::invalid(format!(
                "`{other}` cannot be swept; choose one of {}",
                SWEEPABLE.join(", ")
            )))
        }
    }
    Ok(())
}

struct Entry {
    origin: String,
    value: Value,
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.trim_matches('"').to_string()))
}

fn strip_comment(line: &str) -> &str {
    match line.find(" #") {
        Some(i) => &line[..i],
        None => line,
    }
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, Entry>,
    errs: ValidationErrors,
}

impl Reader<'_> {
    fn fail(&mut self, key: &str, expected: &str) {
        let e = &self.entries[key];
        self.errs
            .push(format!("{}: `{key}` must be {expected} (got {})", e.origin, e.value));
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        let v = self.get(key)?;
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.fail(key, "a non-negative integer");
                None
            }
        }
    }

    fn real(&mut self, key: &str) -> Option<f64> {
        let v = self.get(key)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                self.fail(key, "a number");
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        let v = self.get(key)?;
        match v {
            Value::Bool(b) => Some(*b),
            _ => {
                self.fail(key, "true or false");
                None
            }
        }
    }

    fn word(&mut self, key: &str) -> Option<String> {
        let v = self.get(key)?;
        match v {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => {
                self.fail(key, "a word");
                None
            }
        }
    }

    fn reals(&mut self, key: &str) -> Option<Vec<f64>> {
        let v = self.get(key)?;
        let parsed = v
            .as_array()
            .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>());
        if parsed.is_none() {
            self.fail(key, "an array of numbers");
        }
        parsed
    }

    fn uints(&mut self, key: &str) -> Option<Vec<u64>> {
        let v = self.get(key)?;
        let parsed = v
            .as_array()
            .and_then(|a| a.iter().map(Value::as_u64).collect::<Option<Vec<_>>>());
        if parsed.is_none() {
            self.fail(key, "an array of non-negative integers");
        }
        parsed
    }

    fn matrix(&mut self, key: &str) -> Option<Vec<Vec<f64>>> {
        let v = self.get(key)?;
        let parsed = v.as_array().and_then(|rows| {
            rows.iter()
                .map(|r| {
                    r.as_array()
                        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
                })
                .collect::<Option<Vec<_>>>()
        });
        if parsed.is_none() {
            self.fail(key, "an array of number arrays");
        }
        parsed
    }

    fn seeds(&mut self, key: &str) -> Option<Vec<u64>> {
        if let Some(Value::String(s)) = self.get(key) {
            let range = s
                .split_once("..")
                .and_then(|(a, b)| Some((a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?)));
            return match range {
                Some((a, b)) if a <= b => Some((a..=b).collect()),
                _ => {
                    self.fail(key, "an array of seeds or an inclusive range like 1..30");
                    None
                }
            };
        }
        self.uints(key)
    }
}

/// Parse a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with_overrides(text, &[])
}

/// Parse a configuration file, then apply `overrides` (key, raw value) on top,
/// as given on the command line. All problems are reported together.
pub fn parse_config_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut errs = ValidationErrors::default();
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();

    for (i, line) in text.lines().enumerate() {
        let origin = format!("line {}", i + 1);
        let line = strip_comment(line).trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, raw)) = line.split_once('=') else {
            errs.push(format!("{origin}: expected `key = value`"));
            continue;
        };
        let key = key.trim().to_string();
        if !KNOWN.contains(&key.as_str()) {
            errs.push(format!("{origin}: unknown key `{key}`"));
            continue;
        }
        if let Some(prev) = entries.get(&key) {
            errs.push(format!("{origin}: `{key}` already set at {}", prev.origin));
            continue;
        }
        entries.insert(
            key,
            Entry {
                origin,
                value: parse_value(raw.trim()),
            },
        );
    }

    for (key, raw) in overrides {
        let key = key.replace('-', "_");
        if !KNOWN.contains(&key.as_str()) {
            errs.push(format!("flag --{}: unknown parameter", key.replace('_', "-")));
            continue;
        }
        let origin = format!("flag --{}", key.replace('_', "-"));
        entries.insert(
            key,
            Entry {
                origin,
                value: parse_value(raw.trim()),
            },
        );
    }

    for key in MANDATORY {
        if !entries.contains_key(*key) {
            errs.push(format!("missing mandatory parameter `{key}`"));
        }
    }

    let mut r = Reader {
        entries: &entries,
        errs,
    };
    let num_dims = r.uint("num_dims").unwrap_or(0) as usize;
    let num_clusters = r.uint("num_clusters").unwrap_or(0) as usize;
    let num_points = r.uint("num_points").unwrap_or(0) as usize;

    let direction = match r.get("direction") {
        Some(Value::Array(a)) if a.first().is_some_and(Value::is_array) => r
            .matrix("direction")
            .and_then(|rows| rows_matrix(&rows, rows.first().map_or(0, Vec::len)).ok())
            .map(Direction::PerCluster),
        Some(_) => r.reals("direction").map(|d| Direction::Shared(Array1::from(d))),
        None => None,
    };

    let angle_disp = r.real("angle_disp").unwrap_or(0.0);
    let cluster_sep = r.reals("cluster_sep").unwrap_or_default();
    let llength = r.real("llength").unwrap_or(0.0);
    let llength_disp = r.real("llength_disp").unwrap_or(0.0);
    let lateral_disp = r.real("lateral_disp").unwrap_or(0.0);

    let mut params = GenerationParams::new(
        num_dims,
        num_clusters,
        num_points,
        direction.unwrap_or_else(|| Direction::Shared(Array1::ones(num_dims.max(1)))),
        angle_disp,
        Array1::from(cluster_sep),
        llength,
        llength_disp,
        lateral_disp,
    );

    if let Some(b) = r.boolean("allow_empty") {
        params.allow_empty = b;
    }
    if let Some(o) = r.reals("cluster_offset") {
        params.cluster_offset = Array1::from(o);
    }
    if let Some(name) = r.word("proj_dist_fn") {
        match ProjDist::from_name(&name) {
            Some(p) => params.hooks.proj_dist = p,
            None => r.fail("proj_dist_fn", "`norm` or `unif`"),
        }
    }
    if let Some(name) = r.word("point_dist_fn") {
        match PointDist::from_name(&name) {
            Some(p) => params.hooks.point_dist = p,
            None => r.fail("point_dist_fn", "`n-1` or `n`"),
        }
    }
    if let Some(sizes) = r.uints("sizes") {
        params.hooks.sizes = Stage::Explicit(sizes.into_iter().map(|s| s as usize).collect());
    }
    if let Some(rows) = r.matrix("centers") {
        match rows_matrix(&rows, rows.first().map_or(num_dims, Vec::len)) {
            Ok(m) => params.hooks.centers = Stage::Explicit(m),
            Err(_) => r.fail("centers", "a matrix with rows of equal length"),
        }
    }
    if let Some(l) = r.reals("lengths") {
        params.hooks.lengths = Stage::Explicit(l);
    }
    if let Some(a) = r.reals("angle_deltas") {
        params.hooks.angle_deltas = Stage::Explicit(a);
    }
    if let Some(seed) = r.uint("seed") {
        params.seed = seed;
    }

    let seeds = r.seeds("seeds");
    let output = PathBuf::from(r.word("output").unwrap_or_else(|| "clusters.csv".to_string()));
    let format = match r.word("format") {
        Some(name) => DataFormat::from_name(&name).unwrap_or_else(|| {
            r.fail("format", "`csv` or `json`");
            DataFormat::Csv
        }),
        None => DataFormat::from_path(&output).unwrap_or(DataFormat::Csv),
    };

    let sweep = match (r.word("sweep_param"), r.reals("sweep_values")) {
        (Some(param), Some(values)) => {
            if !SWEEPABLE.contains(&param.as_str()) {
                r.fail("sweep_param", &format!("one of {}", SWEEPABLE.join(", ")));
            }
            Some(Sweep { param, values })
        }
        (Some(_), None) => {
            r.errs.push("`sweep_param` given without `sweep_values`");
            None
        }
        (None, Some(_)) => {
            r.errs.push("`sweep_values` given without `sweep_param`");
            None
        }
        (None, None) => None,
    };

    let mut errs = r.errs;
    if errs.is_empty() {
        if let Err(v) = validate(&params) {
            errs.0.extend(v.0);
        }
    }
    if errs.is_empty() {
        if let Some(sweep) = &sweep {
            for &value in &sweep.values {
                let mut p = params.clone();
                match apply_sweep(&mut p, &sweep.param, value) {
                    Ok(()) => {
                        if let Err(v) = validate(&p) {
                            errs.0
                                .extend(v.0.into_iter().map(|m| format!("sweep value {value}: {m}")));
                        }
                    }
                    Err(e) => errs.push(e.to_string()),
                }
            }
        }
    }

    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    Ok(RunConfig {
        params,
        output,
        format,
        seeds,
        sweep,
    })
}
