//! Clustering evaluation: k-means with k-means++ seeding, the V-measure, and
//! the line-length sweep that measures how k-means copes with increasingly
//! elongated clusters.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use ndarray::{array, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{clugen, GenerationParams};
use crate::error::{Error, Result};
use crate::io::{read_assignments, read_dataset, DataFormat};
use crate::rng::RngState;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-6;

/// RNG stream used for clustering, kept apart from the generation stream of
/// the same seed.
const CLUSTERING_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteringResult {
    /// 1-based cluster per point.
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    /// Number of assignment passes performed.
    pub iterations: usize,
    pub converged: bool,
    /// Within-cluster sum of squares after each assignment pass.
    pub inertia: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VScore {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v: f64,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_k(points: ArrayView2<'_, f64>, k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if k > points.nrows() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the number of points ({})",
            points.nrows()
        )));
    }
    Ok(())
}

/// Row indices chosen by k-means++ seeding, in selection order.
pub fn kmeans_pp_indices(points: ArrayView2<'_, f64>, k: usize, rng: &mut RngState) -> Result<Vec<usize>> {
    check_k(points, k)?;
    let m = points.nrows();
    let mut chosen = vec![rng.index(m)];
    let mut taken = vec![false; m];
    taken[chosen[0]] = true;
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|r| sq_dist(r, points.row(chosen[0])))
        .collect();

    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.uniform() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `target` just past the running sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // every remaining point duplicates a chosen one
            let free: Vec<usize> = (0..m).filter(|&i| !taken[i]).collect();
            free[rng.index(free.len())]
        };
        taken[next] = true;
        chosen.push(next);
        let c = points.row(next);
        for (i, r) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(r, c));
        }
        d2[next] = 0.0;
    }
    Ok(chosen)
}

/// k-means++ seeding: the first centroid is a uniformly chosen point, each
/// further one is drawn with probability proportional to its squared distance
/// to the nearest centroid chosen so far.
pub fn kmeans_pp_init(points: ArrayView2<'_, f64>, k: usize, rng: &mut RngState) -> Result<Array2<f64>> {
    let idx = kmeans_pp_indices(points, k, rng)?;
    Ok(points.select(ndarray::Axis(0), &idx))
}

fn nearest(row: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(row, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Lloyd's k-means from k-means++ seeds.
///
/// Stops when no assignment changes, when no centroid moves by `tol` or more,
/// or after `max_iter` assignment passes. A centroid left without points is
/// moved onto the point farthest from its own centroid.
pub fn kmeans(
    points: ArrayView2<'_, f64>,
    k: usize,
    max_iter: usize,
    tol: f64,
    rng: &mut RngState,
) -> Result<ClusteringResult> {
    if max_iter < 1 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::invalid("tol must be non-negative"));
    }
    let mut centroids = kmeans_pp_init(points, k, rng)?;
    let m = points.nrows();
    let n = points.ncols();
    let mut assign = vec![usize::MAX; m];
    let mut cost = vec![0.0; m];
    let mut inertia = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        for (i, row) in points.rows().into_iter().enumerate() {
            let (j, d) = nearest(row, &centroids);
            if assign[i] != j {
                assign[i] = j;
                changed = true;
            }
            cost[i] = d;
        }
        inertia.push(cost.iter().sum());
        if !changed {
            converged = true;
            break;
        }

        let mut sums = Array2::<f64>::zeros((k, n));
        let mut counts = vec![0usize; k];
        for (i, row) in points.rows().into_iter().enumerate() {
            sums.row_mut(assign[i]).scaled_add(1.0, &row);
            counts[assign[i]] += 1;
        }
        let mut shift: f64 = 0.0;
        for (j, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let mean = sums.row(j).mapv(|x| x / count as f64);
            shift = shift.max(sq_dist(mean.view(), centroids.row(j)).sqrt());
            centroids.row_mut(j).assign(&mean);
        }
        for (j, &count) in counts.iter().enumerate() {
            if count != 0 {
                continue;
            }
            let far = (0..m)
                .max_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(b.cmp(&a)))
                .expect("k <= m guarantees points");
            shift = shift.max(sq_dist(points.row(far), centroids.row(j)).sqrt());
            centroids.row_mut(j).assign(&points.row(far));
            cost[far] = 0.0;
        }
        if shift < tol {
            converged = true;
            // final assignment against the settled centroids
            for (i, row) in points.rows().into_iter().enumerate() {
                let (j, d) = nearest(row, &centroids);
                assign[i] = j;
                cost[i] = d;
            }
            inertia.push(cost.iter().sum());
            break;
        }
    }

    Ok(ClusteringResult {
        assignments: assign.into_iter().map(|j| j + 1).collect(),
        centroids,
        iterations,
        converged,
        inertia,
    })
}

fn entropy(counts: impl Iterator<Item = usize>, total: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Homogeneity, completeness and their harmonic mean, from the contingency
/// table of `truth` against `predicted`. Entropies use natural logarithms.
pub fn v_measure(truth: &[usize], predicted: &[usize]) -> Result<VScore> {
    if truth.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "{} true labels but {} predicted labels",
            truth.len(),
            predicted.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("v_measure needs at least one point"));
    }
    let total = truth.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut classes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut clusters: BTreeMap<usize, usize> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        *joint.entry((t, p)).or_default() += 1;
        *classes.entry(t).or_default() += 1;
        *clusters.entry(p).or_default() += 1;
    }

    let h_class = entropy(classes.values().copied(), total);
    let h_cluster = entropy(clusters.values().copied(), total);
    let mut h_class_given_cluster = 0.0;
    let mut h_cluster_given_class = 0.0;
    for (&(t, p), &n) in &joint {
        let n = n as f64;
        h_class_given_cluster -= n / total * (n / clusters[&p] as f64).ln();
        h_cluster_given_class -= n / total * (n / classes[&t] as f64).ln();
    }

    let homogeneity = if h_class == 0.0 {
        1.0
    } else {
        1.0 - h_class_given_cluster / h_class
    };
    let completeness = if h_cluster == 0.0 {
        1.0
    } else {
        1.0 - h_cluster_given_class / h_cluster
    };
    let v = if homogeneity + completeness > 0.0 {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    } else {
        0.0
    };
    Ok(VScore {
        homogeneity,
        completeness,
        v,
    })
}

/// Score a clustering produced elsewhere against a dataset's labels.
pub fn score_external(dataset_path: &Path, assignments_path: &Path) -> Result<VScore> {
    let data = read_dataset(dataset_path, DataFormat::from_path(dataset_path)?)?;
    let predicted = read_assignments(assignments_path)?;
    if predicted.len() != data.len() {
        return Err(Error::invalid(format!(
            "{} assignments for {} points",
            predicted.len(),
            data.len()
        )));
    }
    v_measure(&data.labels, &predicted)
}

/// Line-length sweep over a fixed set of seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub llengths: Vec<f64>,
    pub seeds: Vec<u64>,
    pub num_points: usize,
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            llengths: vec![0.0, 6.0, 12.0, 18.0],
            seeds: (1..=30).collect(),
            num_points: 2000,
            k: 4,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

impl ExperimentConfig {
    /// Generator settings for one sweep cell: four 2-D clusters along (1, 1)
    /// with angle dispersion π/16, separation (5, 5), length dispersion 0.5
    /// and lateral dispersion 1.
    pub fn params(&self, llength: f64, seed: u64) -> GenerationParams {
        GenerationParams::new(
            2,
            4,
            self.num_points,
            array![1.0, 1.0],
            PI / 16.0,
            array![5.0, 5.0],
            llength,
            0.5,
            1.0,
        )
        .with_seed(seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub llength: f64,
    pub seed: u64,
    pub h: f64,
    pub c: f64,
    pub v: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LengthSummary {
    pub llength: f64,
    pub mean_v: f64,
    pub median_v: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResults {
    /// One row per (llength, seed), llength-major.
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<LengthSummary>,
}

impl ExperimentResults {
    /// Per-cell rows as CSV with columns `llength,seed,h,c,v,iterations`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("llength,seed,h,c,v,iterations\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.llength, r.seed, r.h, r.c, r.v, r.iterations
            ));
        }
        out
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn run_cell(config: &ExperimentConfig, llength: f64, seed: u64) -> Result<ExperimentRow> {
    let data = clugen(&config.params(llength, seed))?;
    let mut rng = RngState::with_stream(seed, CLUSTERING_STREAM);
    let fit = kmeans(data.points.view(), config.k, config.max_iter, config.tol, &mut rng)?;
    let score = v_measure(&data.clusters, &fit.assignments)?;
    Ok(ExperimentRow {
        llength,
        seed,
        h: score.homogeneity,
        c: score.completeness,
        v: score.v,
        iterations: fit.iterations,
    })
}

/// Generate, cluster and score every (line length, seed) cell.
///
/// Cells run in parallel; results depend only on the configuration.
pub fn run_elongation_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    let cells: Vec<(f64, u64)> = config
        .llengths
        .iter()
        .flat_map(|&l| config.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(l, s)| run_cell(config, l, s))
        .collect::<Result<Vec<_>>>()?;
    let summary = config
        .llengths
        .iter()
        .map(|&l| {
            let vs: Vec<f64> = rows.iter().filter(|r| r.llength == l).map(|r| r.v).collect();
            LengthSummary {
                llength: l,
                mean_v: vs.iter().sum::<f64>() / vs.len() as f64,
                median_v: median(vs),
            }
        })
        .collect();
    Ok(ExperimentResults { rows, summary })
}
