//! Placement of projections along a cluster-supporting line and of the final
//! points around those projections.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::vecgeom::{check_unit, rand_ortho_vector, rand_unit_vector};

fn check_length(length: f64) -> Result<()> {
    if length < 0.0 || !length.is_finite() {
        return Err(Error::invalid(format!(
            "line length must be finite and non-negative (got {length})"
        )));
    }
    Ok(())
}

/// Projection offsets from `N(0, (length/6)²)`, so that about 99.73% fall
/// inside the segment.
pub fn proj_dist_norm(length: f64, count: usize, rng: &mut RngState) -> Result<Vec<f64>> {
    check_length(length)?;
    let sd = length / 6.0;
    Ok((0..count).map(|_| rng.normal(0.0, sd)).collect())
}

/// Projection offsets uniform on `[-length/2, length/2)`.
pub fn proj_dist_unif(length: f64, count: usize, rng: &mut RngState) -> Result<Vec<f64>> {
    check_length(length)?;
    Ok((0..count).map(|_| length * rng.centered_uniform()).collect())
}

fn check_block(projs: ArrayView2<'_, f64>, direction: ArrayView1<'_, f64>) -> Result<()> {
    if projs.ncols() != direction.len() {
        return Err(Error::invalid(format!(
            "projections have {} columns but direction has {} components",
            projs.ncols(),
            direction.len()
        )));
    }
    check_unit(direction)
}

/// Generic "n-1" placement: each point sits at a `dist_fn` magnitude from its
/// projection, along a fresh random direction orthogonal to the line.
///
/// `dist_fn(count, lat_disp, rng)` must return one signed magnitude per point.
/// Magnitudes are drawn first, then one orthogonal vector per row in row order.
/// In one dimension there is no orthogonal subspace and the projections are
/// returned unchanged.
pub fn clupoints_n_1_template<F>(
    projs: ArrayView2<'_, f64>,
    lat_disp: f64,
    direction: ArrayView1<'_, f64>,
    dist_fn: F,
    rng: &mut RngState,
) -> Result<Array2<f64>>
where
    F: FnOnce(usize, f64, &mut RngState) -> Vec<f64>,
{
    check_block(projs, direction)?;
    let mut points = projs.to_owned();
    if direction.len() == 1 {
        return Ok(points);
    }
    let count = projs.nrows();
    let magnitudes = dist_fn(count, lat_disp, rng);
    if magnitudes.len() != count {
        return Err(Error::contract(
            "point_dist_fn",
            format!(
                "distance function returned {} magnitudes for {} points",
                magnitudes.len(),
                count
            ),
        ));
    }
    for (mut row, &m) in points.rows_mut().into_iter().zip(&magnitudes) {
        let v = rand_ortho_vector(direction, rng)?;
        row.scaled_add(m, &v);
    }
    Ok(points)
}

fn normal_magnitudes(count: usize, lat_disp: f64, rng: &mut RngState) -> Vec<f64> {
    (0..count).map(|_| rng.normal(0.0, lat_disp)).collect()
}

/// Built-in "n-1" strategy: normal magnitudes on the hyperplane orthogonal to
/// the line at each projection. `length` and `center` are unused but kept so
/// the signature matches the point hook contract.
pub fn clupoints_n_1(
    projs: ArrayView2<'_, f64>,
    lat_disp: f64,
    _length: f64,
    direction: ArrayView1<'_, f64>,
    _center: ArrayView1<'_, f64>,
    rng: &mut RngState,
) -> Result<Array2<f64>> {
    clupoints_n_1_template(projs, lat_disp, direction, normal_magnitudes, rng)
}

/// Built-in "n" strategy: normal magnitudes along fully random directions.
pub fn clupoints_n(
    projs: ArrayView2<'_, f64>,
    lat_disp: f64,
    _length: f64,
    direction: ArrayView1<'_, f64>,
    _center: ArrayView1<'_, f64>,
    rng: &mut RngState,
) -> Result<Array2<f64>> {
    check_block(projs, direction)?;
    let mut points = projs.to_owned();
    let magnitudes = normal_magnitudes(projs.nrows(), lat_disp, rng);
    for (mut row, &m) in points.rows_mut().into_iter().zip(&magnitudes) {
        let v = rand_unit_vector(direction.len(), rng)?;
        row.scaled_add(m, &v);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecgeom::{norm, normalize, points_on_line};
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    fn lines(n: usize, count: usize, seed: u64) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
        let mut rng = RngState::new(seed);
        let dir = rand_unit_vector(n, &mut rng).unwrap();
        let center = Array1::from_shape_fn(n, |_| 10.0 * rng.centered_uniform());
        let w = proj_dist_norm(10.0, count, &mut rng).unwrap();
        (points_on_line(center.view(), dir.view(), &w).unwrap(), dir, center)
    }

    /// Two-sided Kolmogorov-Smirnov statistic of `sample` against the
    /// half-normal CDF `erf(x / (σ√2))`.
    fn ks_half_normal(mut sample: Vec<f64>, sigma: f64) -> f64 {
        sample.sort_by(f64::total_cmp);
        let m = sample.len() as f64;
        sample
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = erf(x / (sigma * std::f64::consts::SQRT_2));
                (cdf - i as f64 / m).abs().max(((i + 1) as f64 / m - cdf).abs())
            })
            .fold(0.0, f64::max)
    }

    // Maclaurin series; past 3.5 the remaining mass (erfc < 1e-6) is far below
    // the KS bound and the series starts losing digits to cancellation.
    fn erf(x: f64) -> f64 {
        if x > 3.5 {
            return 1.0;
        }
        let mut term = x;
        let mut sum = x;
        let mut k = 0.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) {
            k += 1.0;
            term *= -x * x / k;
            sum += term / (2.0 * k + 1.0);
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }

    #[test]
    fn erf_reference_points() {
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-12);
        assert!((erf(2.0) - 0.995_322_265_018_952_7).abs() < 1e-12);
    }

    #[test]
    fn proj_norm_examples() {
        let mut rng = RngState::new(1);
        assert_eq!(proj_dist_norm(0.0, 5, &mut rng).unwrap(), vec![0.0; 5]);
        let w = proj_dist_norm(12.0, 100_000, &mut rng).unwrap();
        let inside = w.iter().filter(|x| x.abs() <= 6.0).count() as f64 / w.len() as f64;
        assert!((inside - 0.9973).abs() < 0.005, "{inside}");
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        assert!(mean.abs() < 0.05);
        assert!(proj_dist_norm(-1.0, 5, &mut rng).is_err());
    }

    #[test]
    fn proj_unif_examples() {
        let mut rng = RngState::new(2);
        assert_eq!(proj_dist_unif(0.0, 3, &mut rng).unwrap(), vec![0.0; 3]);
        let w = proj_dist_unif(10.0, 100_000, &mut rng).unwrap();
        assert!(w.iter().all(|x| (-5.0..=5.0).contains(x)));
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64;
        assert!((var / (100.0 / 12.0) - 1.0).abs() < 0.02, "{var}");
        assert!(proj_dist_unif(-1.0, 3, &mut rng).is_err());
    }

    #[test]
    fn zero_lateral_disp_is_identity() {
        for n in [1, 2, 3, 7] {
            let (projs, dir, center) = lines(n, 50, n as u64);
            let mut rng = RngState::new(0);
            let a = clupoints_n_1(projs.view(), 0.0, 10.0, dir.view(), center.view(), &mut rng).unwrap();
            let b = clupoints_n(projs.view(), 0.0, 10.0, dir.view(), center.view(), &mut rng).unwrap();
            assert_eq!(a, projs);
            assert_eq!(b, projs);
        }
    }

    #[test]
    fn n_1_in_2d_moves_along_the_only_normal() {
        let projs = array![[0.0, 0.0], [3.0, 0.0], [-2.0, 0.0]];
        let dir = array![1.0, 0.0];
        let pts = clupoints_n_1(
            projs.view(),
            1.0,
            5.0,
            dir.view(),
            array![0.0, 0.0].view(),
            &mut RngState::new(4),
        )
        .unwrap();
        for (p, q) in pts.rows().into_iter().zip(projs.rows()) {
            assert_eq!(p[0], q[0]);
        }
    }

    #[test]
    fn n_1_in_1d_returns_projections() {
        let projs = array![[1.0], [2.0]];
        let pts = clupoints_n_1(
            projs.view(),
            3.0,
            1.0,
            array![1.0].view(),
            array![0.0].view(),
            &mut RngState::new(4),
        )
        .unwrap();
        assert_eq!(pts, projs);
    }

    #[test]
    fn n_in_1d_moves_along_axis() {
        let projs = array![[1.0], [2.0], [3.0]];
        let pts = clupoints_n(
            projs.view(),
            1.0,
            1.0,
            array![1.0].view(),
            array![0.0].view(),
            &mut RngState::new(4),
        )
        .unwrap();
        assert!(pts.iter().zip(projs.iter()).all(|(a, b)| a != b));
    }

    #[test]
    fn template_contract() {
        let (projs, dir, _) = lines(3, 10, 5);
        let mut rng = RngState::new(5);
        let zero = clupoints_n_1_template(projs.view(), 1.0, dir.view(), |c, _, _| vec![0.0; c], &mut rng).unwrap();
        assert_eq!(zero, projs);

        let err = clupoints_n_1_template(projs.view(), 1.0, dir.view(), |_, _, _| vec![1.0], &mut rng).unwrap_err();
        assert!(matches!(
            err,
            Error::ContractViolation {
                hook: "point_dist_fn",
                ..
            }
        ));

        // the built-in is the template with a normal distance function
        let a = clupoints_n_1(projs.view(), 1.3, 0.0, dir.view(), dir.view(), &mut RngState::new(8)).unwrap();
        let b = clupoints_n_1_template(
            projs.view(),
            1.3,
            dir.view(),
            |c, s, r| (0..c).map(|_| r.normal(0.0, s)).collect(),
            &mut RngState::new(8),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn template_constant_distance() {
        let projs = array![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [5.0, 0.0]];
        let dir = array![1.0, 0.0];
        let pts = clupoints_n_1_template(
            projs.view(),
            0.0,
            dir.view(),
            |c, _, _| vec![2.0; c],
            &mut RngState::new(6),
        )
        .unwrap();
        for (p, q) in pts.rows().into_iter().zip(projs.rows()) {
            let d = &p - &q;
            assert!((norm(d.view()) - 2.0).abs() < 1e-12);
            assert!(d.dot(&dir).abs() < 1e-12);
        }
    }

    #[test]
    fn non_negative_magnitudes_reach_both_sides() {
        let projs = Array2::<f64>::zeros((200, 2));
        let dir = array![1.0, 0.0];
        let pts = clupoints_n_1_template(
            projs.view(),
            1.0,
            dir.view(),
            |c, _, _| vec![1.0; c],
            &mut RngState::new(7),
        )
        .unwrap();
        assert!(pts.column(1).iter().any(|&y| y > 0.0));
        assert!(pts.column(1).iter().any(|&y| y < 0.0));
    }

    #[test]
    fn displacement_matches_half_normal() {
        let sigma = 1.5;
        for (name, f) in [
            (
                "n-1",
                clupoints_n_1
                    as for<'a, 'b, 'c> fn(
                        ArrayView2<'a, f64>,
                        f64,
                        f64,
                        ArrayView1<'b, f64>,
                        ArrayView1<'c, f64>,
                        &mut RngState,
                    ) -> Result<Array2<f64>>,
            ),
            ("n", clupoints_n),
        ] {
            let (projs, dir, center) = lines(5, 100_000, 9);
            let pts = f(
                projs.view(),
                sigma,
                10.0,
                dir.view(),
                center.view(),
                &mut RngState::new(10),
            )
            .unwrap();
            let dists: Vec<f64> = pts
                .rows()
                .into_iter()
                .zip(projs.rows())
                .map(|(p, q)| norm((&p - &q).view()))
                .collect();
            let ks = ks_half_normal(dists, sigma);
            assert!(ks < 0.01, "{name}: KS = {ks}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn n_1_is_orthogonal(n in prop_oneof![Just(2usize), Just(3), Just(5), Just(30)], seed in any::<u64>(), lat in 0.0f64..10.0) {
            let (projs, dir, center) = lines(n, 200, seed);
            let pts = clupoints_n_1(projs.view(), lat, 10.0, dir.view(), center.view(), &mut RngState::new(seed ^ 1)).unwrap();
            for (p, q) in pts.rows().into_iter().zip(projs.rows()) {
                prop_assert!((&p - &q).dot(&dir).abs() < 1e-9);
            }
        }

        #[test]
        fn unif_support(len in 0.0f64..100.0, count in 0usize..500, seed in any::<u64>()) {
            let w = proj_dist_unif(len, count, &mut RngState::new(seed)).unwrap();
            prop_assert_eq!(w.len(), count);
            prop_assert!(w.iter().all(|x| x.abs() <= len / 2.0));
        }

        #[test]
        fn rejects_non_unit_direction(scale in 1.1f64..10.0) {
            let projs = array![[0.0, 0.0]];
            let dir = normalize(array![1.0, 1.0].view()).unwrap() * scale;
            let mut rng = RngState::new(0);
            prop_assert!(clupoints_n_1(projs.view(), 1.0, 1.0, dir.view(), dir.view(), &mut rng).is_err());
            prop_assert!(clupoints_n(projs.view(), 1.0, 1.0, dir.view(), dir.view(), &mut rng).is_err());
        }
    }
}
