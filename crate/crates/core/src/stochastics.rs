//! Default stage functions for cluster sizes, centers, line lengths and angle
//! deltas, plus the two size-correction helpers.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Cluster sizes drawn from a discretized normal centred on `p/c`.
///
/// Each size is `round(max(N(p/c, (p/3c)²), 0))`; the total is then forced to
/// `p` and, unless `allow_empty` is set (or there are fewer points than
/// clusters), empty clusters borrow one point from the largest.
pub fn clusizes(c: usize, p: usize, allow_empty: bool, rng: &mut RngState) -> Result<Vec<usize>> {
    if c < 1 {
        return Err(Error::invalid("number of clusters must be at least 1"));
    }
    let mean = p as f64 / c as f64;
    let sd = p as f64 / (3.0 * c as f64);
    let sizes: Vec<usize> = (0..c)
        .map(|_| rng.normal(mean, sd).max(0.0).round_ties_even() as usize)
        .collect();
    let sizes = fix_num_points(sizes, p);
    Ok(if !allow_empty && p >= c {
        fix_empty(sizes)
    } else {
        sizes
    })
}

fn argmin(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn argmax(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Make `sizes` add up to `p`: increment the smallest entry while the total is
/// short, decrement the largest while it is over. Ties go to the lowest index.
pub fn fix_num_points(mut sizes: Vec<usize>, p: usize) -> Vec<usize> {
    if sizes.is_empty() {
        return sizes;
    }
    let mut total: usize = sizes.iter().sum();
    while total < p {
        let i = argmin(&sizes);
        sizes[i] += 1;
        total += 1;
    }
    while total > p {
        let i = argmax(&sizes);
        sizes[i] -= 1;
        total -= 1;
    }
    sizes
}

/// Give each empty cluster one point taken from the current largest cluster.
///
/// Empties are visited in index order. Once the largest entry is 1 or less no
/// donation is possible and the remaining empties are left alone.
pub fn fix_empty(mut sizes: Vec<usize>) -> Vec<usize> {
    for i in 0..sizes.len() {
        if sizes[i] != 0 {
            continue;
        }
        let j = argmax(&sizes);
        if sizes[j] <= 1 {
            break;
        }
        sizes[j] -= 1;
        sizes[i] += 1;
    }
    sizes
}

/// Cluster centers `C = c·U·diag(sep) + 1·offsetᵀ`, with `U` uniform on `[-0.5, 0.5)`.
pub fn clucenters(
    c: usize,
    sep: ArrayView1<'_, f64>,
    offset: ArrayView1<'_, f64>,
    rng: &mut RngState,
) -> Result<Array2<f64>> {
    if c < 1 {
        return Err(Error::invalid("number of clusters must be at least 1"));
    }
    if sep.len() != offset.len() {
        return Err(Error::invalid(format!(
            "cluster_sep has {} dimensions but cluster_offset has {}",
            sep.len(),
            offset.len()
        )));
    }
    if sep.iter().any(|&s| s < 0.0) {
        return Err(Error::invalid("cluster_sep components must be non-negative"));
    }
    let scale = c as f64;
    Ok(Array2::from_shape_fn((c, sep.len()), |(_, j)| {
        scale * rng.centered_uniform() * sep[j] + offset[j]
    }))
}

/// Line lengths from the folded normal `|N(l, l_sigma²)|`.
pub fn llengths(c: usize, l: f64, l_sigma: f64, rng: &mut RngState) -> Result<Vec<f64>> {
    if c < 1 {
        return Err(Error::invalid("number of clusters must be at least 1"));
    }
    if l_sigma.is_nan() || l_sigma < 0.0 {
        return Err(Error::invalid("llength_disp must be non-negative"));
    }
    if l.is_nan() || l < 0.0 {
        return Err(Error::invalid("llength must be non-negative"));
    }
    Ok((0..c).map(|_| rng.normal(l, l_sigma).abs()).collect())
}

/// Map any angle onto `[-π/2, π/2)` by wrapping modulo `π`.
pub fn wrap_half_turn(x: f64) -> f64 {
    if (-FRAC_PI_2..FRAC_PI_2).contains(&x) {
        return x;
    }
    (x + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2
}

/// Angle deltas from a normal with mean 0 and standard deviation
/// `angle_sigma`, wrapped onto `[-π/2, π/2]`.
pub fn angle_deltas(c: usize, angle_sigma: f64, rng: &mut RngState) -> Result<Vec<f64>> {
    if c < 1 {
        return Err(Error::invalid("number of clusters must be at least 1"));
    }
    if angle_sigma.is_nan() || angle_sigma < 0.0 {
        return Err(Error::invalid("angle_disp must be non-negative"));
    }
    Ok((0..c).map(|_| wrap_half_turn(rng.normal(0.0, angle_sigma))).collect())
}
