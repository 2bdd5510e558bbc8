//! n-dimensional vector geometry used by every stage of the generator.
//!
//! Vectors are `ndarray` 1-D arrays; matrices are row-major 2-D arrays with one
//! point (or one cluster) per row.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Tolerance on `‖direction‖ - 1` accepted wherever a unit vector is required.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// `r̂` counts as parallel to `d̂` when `|r̂·d̂|` exceeds this value.
pub const PARALLEL_THRESHOLD: f64 = 1.0 - 1e-10;

/// Random draws whose norm falls below this are redrawn.
const MIN_DRAW_NORM: f64 = 1e-9;

pub fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Scale `v` to unit length.
pub fn normalize(v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if v.is_empty() {
        return Err(Error::invalid("cannot normalize an empty vector"));
    }
    let n = norm(v);
    if !n.is_finite() {
        return Err(Error::invalid("cannot normalize a vector with non-finite components"));
    }
    if n == 0.0 {
        return Err(Error::invalid("cannot normalize the zero vector"));
    }
    Ok(v.mapv(|x| x / n))
}

/// Angle between two vectors in `[0, π]`.
///
/// Uses `2·atan2(‖û − v̂‖, ‖û + v̂‖)`, which keeps full precision for nearly
/// parallel and nearly antiparallel inputs where `acos(û·v̂)` does not.
pub fn angle_btw(u: ArrayView1<'_, f64>, v: ArrayView1<'_, f64>) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    let u = normalize(u)?;
    let v = normalize(v)?;
    let diff = &u - &v;
    let sum = &u + &v;
    Ok(2.0 * norm(diff.view()).atan2(norm(sum.view())))
}

fn check_dims(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("vector dimension must be at least 1"));
    }
    Ok(())
}

/// Random unit vector: each component drawn uniformly from `[-0.5, 0.5)`, then
/// normalized.
pub fn rand_unit_vector(n: usize, rng: &mut RngState) -> Result<Array1<f64>> {
    check_dims(n)?;
    loop {
        let r = Array1::from_shape_fn(n, |_| rng.centered_uniform());
        let len = norm(r.view());
        if len >= MIN_DRAW_NORM {
            return Ok(r / len);
        }
    }
}

/// Random unit vector orthogonal to `u`.
pub fn rand_ortho_vector(u: ArrayView1<'_, f64>, rng: &mut RngState) -> Result<Array1<f64>> {
    if u.len() < 2 {
        return Err(Error::invalid(
            "no orthogonal direction exists in fewer than 2 dimensions",
        ));
    }
    let u_hat = normalize(u)?;
    loop {
        let r = rand_unit_vector(u.len(), rng)?;
        if u_hat.dot(&r).abs() > PARALLEL_THRESHOLD {
            continue;
        }
        // One Gram-Schmidt step against û, repeated once to clean up rounding.
        let mut perp = &r - &(&u_hat * u_hat.dot(&r));
        let residual = u_hat.dot(&perp);
        perp.scaled_add(-residual, &u_hat);
        let len = norm(perp.view());
        if len < MIN_DRAW_NORM {
            continue;
        }
        return Ok(perp / len);
    }
}

/// Random unit vector at angle `|theta|` from `u`.
///
/// When `|theta| > π/2` or the space is one-dimensional the result is an
/// unconstrained random unit vector.
pub fn rand_vector_at_angle(u: ArrayView1<'_, f64>, theta: f64, rng: &mut RngState) -> Result<Array1<f64>> {
    let u_hat = normalize(u)?;
    if !theta.is_finite() {
        return Err(Error::invalid("angle must be finite"));
    }
    if theta.abs() > std::f64::consts::FRAC_PI_2 || u.len() == 1 {
        return rand_unit_vector(u.len(), rng);
    }
    let perp = rand_ortho_vector(u_hat.view(), rng)?;
    let mut dir = u_hat;
    dir.scaled_add(theta.tan(), &perp);
    normalize(dir.view())
}

/// Points `center + w[k]·direction`, one row per entry of `w`.
pub fn points_on_line(center: ArrayView1<'_, f64>, direction: ArrayView1<'_, f64>, w: &[f64]) -> Result<Array2<f64>> {
    if center.len() != direction.len() {
        return Err(Error::invalid(format!(
            "center has {} dimensions but direction has {}",
            center.len(),
            direction.len()
        )));
    }
    check_unit(direction)?;
    let n = center.len();
    Ok(Array2::from_shape_fn((w.len(), n), |(k, j)| {
        center[j] + w[k] * direction[j]
    }))
}

pub(crate) fn check_unit(direction: ArrayView1<'_, f64>) -> Result<()> {
    let len = norm(direction);
    if len.is_nan() || (len - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::invalid(format!(
            "direction must be a unit vector (norm is {len})"
        )));
    }
    Ok(())
}
