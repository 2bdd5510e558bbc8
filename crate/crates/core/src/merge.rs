//! Labeled point sets and merging of data from several sources.

use std::collections::BTreeMap;

use ndarray::{concatenate, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Label reserved for points that belong to no cluster.
pub const NOISE_LABEL: usize = 0;

/// Points (one per row) and their cluster labels, 1-based, with 0 for noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub points: Array2<f64>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(points: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if points.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} points but {} labels",
                points.nrows(),
                labels.len()
            )));
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_dims(&self) -> usize {
        self.points.ncols()
    }

    /// Number of distinct non-noise labels.
    pub fn num_clusters(&self) -> usize {
        self.cluster_ids().len()
    }

    fn cluster_ids(&self) -> BTreeMap<usize, usize> {
        let mut ids = BTreeMap::new();
        for &l in &self.labels {
            if l != NOISE_LABEL {
                ids.insert(l, 0);
            }
        }
        for (rank, id) in ids.values_mut().enumerate() {
            *id = rank;
        }
        ids
    }
}

/// Concatenate datasets and renumber their clusters.
///
/// Rows keep their input order. The non-noise labels of each input are
/// renumbered by ascending value to follow on from the clusters of the inputs
/// before it, so the output uses `1..=C` where `C` is the total number of
/// distinct (input, label) pairs. Noise points keep label 0.
pub fn clumerge(inputs: &[Dataset]) -> Result<Dataset> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::invalid("clumerge needs at least one dataset"))?;
    let n = first.num_dims();
    for (k, d) in inputs.iter().enumerate() {
        if d.num_dims() != n {
            return Err(Error::invalid(format!(
                "dataset {} has {} dimensions, expected {n}",
                k + 1,
                d.num_dims()
            )));
        }
        if d.points.nrows() != d.labels.len() {
            return Err(Error::invalid(format!(
                "dataset {} has {} points but {} labels",
                k + 1,
                d.points.nrows(),
                d.labels.len()
            )));
        }
    }

    let views: Vec<ArrayView2<'_, f64>> = inputs.iter().map(|d| d.points.view()).collect();
    let points = concatenate(Axis(0), &views).map_err(|e| Error::invalid(e.to_string()))?;

    let mut labels = Vec::with_capacity(points.nrows());
    let mut shift = 0;
    for d in inputs {
        let ids = d.cluster_ids();
        labels.extend(d.labels.iter().map(|l| match ids.get(l) {
            Some(rank) => shift + rank + 1,
            None => NOISE_LABEL,
        }));
        shift += ids.len();
    }

    Ok(Dataset { points, labels })
}
