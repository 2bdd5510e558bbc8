//! Dataset serialization.
//!
//! CSV files carry one point per row, with header `x1,...,xn,cluster`.
//! Coordinates are written with 17 significant digits so that every `f64`
//! reads back bit-identical. JSON files carry the full generation record:
//! every output field, plus the parameters and seed that produced it.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::engine::{Direction, GeneratedClusters, GenerationParams, Stage};
use crate::error::{Error, Result};
use crate::merge::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "csv" => Some(DataFormat::Csv),
            "json" => Some(DataFormat::Json),
            _ => None,
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(Self::from_name)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "cannot infer format from {}; expected a .csv or .json extension",
                    path.display()
                ))
            })
    }

    pub fn extension(self) -> &'static str {
        match self {
            DataFormat::Csv => "csv",
            DataFormat::Json => "json",
        }
    }
}

/// Direction as written to JSON and config files: a vector or a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionRecord {
    Shared(Vec<f64>),
    PerCluster(Vec<Vec<f64>>),
}

/// Serializable description of a [`GenerationParams`]. Custom hooks cannot be
/// serialized and are recorded by the name `"custom"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub num_dims: usize,
    pub num_clusters: usize,
    pub num_points: usize,
    pub direction: DirectionRecord,
    pub angle_disp: f64,
    pub cluster_sep: Vec<f64>,
    pub llength: f64,
    pub llength_disp: f64,
    pub lateral_disp: f64,
    pub allow_empty: bool,
    pub cluster_offset: Vec<f64>,
    pub proj_dist_fn: String,
    pub point_dist_fn: String,
    pub clusizes_fn: String,
    pub clucenters_fn: String,
    pub llengths_fn: String,
    pub angle_deltas_fn: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_deltas: Option<Vec<f64>>,
    pub seed: u64,
}

fn stage_name<V, F>(stage: &Stage<V, F>) -> String {
    match stage {
        Stage::Default => "default",
        Stage::Explicit(_) => "explicit",
        Stage::Custom(_) => "custom",
    }
    .to_string()
}

fn stage_value<V: Clone, F>(stage: &Stage<V, F>) -> Option<V> {
    match stage {
        Stage::Explicit(v) => Some(v.clone()),
        _ => None,
    }
}

pub(crate) fn matrix_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub(crate) fn rows_matrix(rows: &[Vec<f64>], ncols: usize) -> Result<Array2<f64>> {
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::invalid(format!(
            "row {} has {} entries, expected {ncols}",
            bad + 1,
            rows[bad].len()
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), ncols), flat).map_err(|e| Error::invalid(e.to_string()))
}

impl From<&GenerationParams> for ParamsRecord {
    fn from(p: &GenerationParams) -> Self {
        let h = &p.hooks;
        Self {
            num_dims: p.num_dims,
            num_clusters: p.num_clusters,
            num_points: p.num_points,
            direction: match &p.direction {
                Direction::Shared(d) => DirectionRecord::Shared(d.to_vec()),
                Direction::PerCluster(m) => DirectionRecord::PerCluster(matrix_rows(m)),
            },
            angle_disp: p.angle_disp,
            cluster_sep: p.cluster_sep.to_vec(),
            llength: p.llength,
            llength_disp: p.llength_disp,
            lateral_disp: p.lateral_disp,
            allow_empty: p.allow_empty,
            cluster_offset: p.cluster_offset.to_vec(),
            proj_dist_fn: h.proj_dist.name().to_string(),
            point_dist_fn: h.point_dist.name().to_string(),
            clusizes_fn: stage_name(&h.sizes),
            clucenters_fn: stage_name(&h.centers),
            llengths_fn: stage_name(&h.lengths),
            angle_deltas_fn: stage_name(&h.angle_deltas),
            sizes: stage_value(&h.sizes),
            centers: stage_value(&h.centers).map(|m| matrix_rows(&m)),
            lengths: stage_value(&h.lengths),
            angle_deltas: stage_value(&h.angle_deltas),
            seed: p.seed,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_dims: Option<usize>,
    points: Vec<Vec<f64>>,
    clusters: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    projections: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    directions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lengths: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<ParamsRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_csv<W: Write>(mut out: W, data: &Dataset) -> std::io::Result<()> {
    let n = data.num_dims();
    let header: Vec<String> = (1..=n).map(|j| format!("x{j}")).chain(["cluster".into()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for (row, label) in data.points.rows().into_iter().zip(&data.labels) {
        for x in row {
            write!(out, "{x:.16e},")?;
        }
        writeln!(out, "{label}")?;
    }
    out.flush()
}

fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::invalid(format!("JSON encoding failed: {e}")))
}

/// Serialize a generation record.
pub fn write_dataset(
    data: &GeneratedClusters,
    params: &GenerationParams,
    format: DataFormat,
    path: &Path,
) -> Result<()> {
    match format {
        DataFormat::Csv => write_points(&data.to_dataset(), format, path),
        DataFormat::Json => {
            let record = RecordJson {
                num_dims: Some(data.points.ncols()),
                points: matrix_rows(&data.points),
                clusters: data.clusters.clone(),
                projections: Some(matrix_rows(&data.projections)),
                sizes: Some(data.sizes.clone()),
                centers: Some(matrix_rows(&data.centers)),
                directions: Some(matrix_rows(&data.directions)),
                angles: Some(data.angles.clone()),
                lengths: Some(data.lengths.clone()),
                params: Some(ParamsRecord::from(params)),
                seed: Some(params.seed),
            };
            write_text(path, &to_json_string(&record)?)
        }
    }
}

/// Serialize a bare labeled point set, e.g. the output of a merge.
pub fn write_points(data: &Dataset, format: DataFormat, path: &Path) -> Result<()> {
    match format {
        DataFormat::Csv => {
            let out = create(path)?;
            write_csv(out, data).map_err(|e| Error::io(path, e))
        }
        DataFormat::Json => {
            let record = RecordJson {
                num_dims: Some(data.num_dims()),
                points: matrix_rows(&data.points),
                clusters: data.labels.clone(),
                projections: None,
                sizes: None,
                centers: None,
                directions: None,
                angles: None,
                lengths: None,
                params: None,
                seed: None,
            };
            write_text(path, &to_json_string(&record)?)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.write_all(b"\n"))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, detail: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn read_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(path, format!("{other:?}")),
        })?;
    let headers = reader.headers().map_err(|e| parse_err(path, e.to_string()))?.clone();
    if headers.iter().next_back() != Some("cluster") {
        return Err(parse_err(path, "missing `cluster` column (must be the last column)"));
    }
    let n = headers.len() - 1;
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| parse_err(path, format!("row {row}: {e}")))?;
        if rec.len() != n + 1 {
            return Err(parse_err(
                path,
                format!("row {row}: expected {} fields, found {}", n + 1, rec.len()),
            ));
        }
        for (j, field) in rec.iter().take(n).enumerate() {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(path, format!("row {row}, column {}: bad number {field:?}", j + 1)))?;
            flat.push(x);
        }
        let label = &rec[n];
        labels.push(
            label
                .parse()
                .map_err(|_| parse_err(path, format!("row {row}: bad cluster label {label:?}")))?,
        );
    }
    let points = Array2::from_shape_vec((labels.len(), n), flat).map_err(|e| parse_err(path, e.to_string()))?;
    Ok(Dataset { points, labels })
}

fn read_json(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let record: RecordJson = serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))?;
    let n = record
        .num_dims
        .or_else(|| record.points.first().map(Vec::len))
        .unwrap_or(0);
    let points = rows_matrix(&record.points, n).map_err(|e| parse_err(path, format!("points: {e}")))?;
    if points.nrows() != record.clusters.len() {
        return Err(parse_err(
            path,
            format!("{} points but {} cluster labels", points.nrows(), record.clusters.len()),
        ));
    }
    Ok(Dataset {
        points,
        labels: record.clusters,
    })
}

/// Read the points and labels of a file written by [`write_dataset`] or
/// [`write_points`]. Extra JSON fields are optional and ignored.
pub fn read_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    match format {
        DataFormat::Csv => read_csv(path),
        DataFormat::Json => read_json(path),
    }
}

/// Read cluster assignments: one integer per line, optionally under a header.
/// Comma-separated files use their `cluster` column, or the last column when
/// there is no such header.
pub fn read_assignments(path: &Path) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let mut column = None;
    if let Some((_, first)) = lines.peek() {
        let fields: Vec<&str> = first.split(',').map(str::trim).collect();
        if fields.last().is_some_and(|f| f.parse::<usize>().is_err()) {
            column = fields.iter().position(|&f| f == "cluster");
            if column.is_none() {
                column = Some(fields.len() - 1);
            }
            lines.next();
        }
    }
    lines
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let idx = column.unwrap_or(fields.len() - 1);
            fields
                .get(idx)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| parse_err(path, format!("line {}: bad assignment {line:?}", i + 1)))
        })
        .collect()
}
