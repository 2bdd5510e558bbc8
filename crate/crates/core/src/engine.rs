//! The generation pipeline: parameter validation, hook dispatch and assembly of
//! the output record.
//!
//! A run draws from a single [`RngState`] seeded from [`GenerationParams::seed`],
//! in this order: cluster sizes, centers, line lengths, angle deltas, then for
//! each cluster its final direction, projection offsets and final points.
//! Replacing a stage with a hook that consumes a different number of draws
//! therefore changes everything generated after it.

use std::fmt;
use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result, ValidationErrors};
use crate::merge::Dataset;
use crate::pointgen::{clupoints_n, clupoints_n_1, proj_dist_norm, proj_dist_unif};
use crate::rng::RngState;
use crate::stochastics::{angle_deltas, clucenters, clusizes, llengths};
use crate::vecgeom::{normalize, points_on_line, rand_vector_at_angle};

/// `(num_clusters, num_points, allow_empty, rng) -> sizes`
pub type SizesFn = Arc<dyn Fn(usize, usize, bool, &mut RngState) -> Vec<usize> + Send + Sync>;
/// `(num_clusters, cluster_sep, cluster_offset, rng) -> centers (c×n)`
pub type CentersFn =
    Arc<dyn Fn(usize, ArrayView1<'_, f64>, ArrayView1<'_, f64>, &mut RngState) -> Array2<f64> + Send + Sync>;
/// `(num_clusters, llength, llength_disp, rng) -> lengths`
pub type LengthsFn = Arc<dyn Fn(usize, f64, f64, &mut RngState) -> Vec<f64> + Send + Sync>;
/// `(num_clusters, angle_disp, rng) -> angle deltas`
pub type AnglesFn = Arc<dyn Fn(usize, f64, &mut RngState) -> Vec<f64> + Send + Sync>;
/// `(line length, point count, rng) -> signed offsets from the line center`
pub type ProjFn = Arc<dyn Fn(f64, usize, &mut RngState) -> Vec<f64> + Send + Sync>;
/// `(projections, lateral_disp, line length, direction, center, rng) -> points`
pub type PointFn = Arc<
    dyn Fn(ArrayView2<'_, f64>, f64, f64, ArrayView1<'_, f64>, ArrayView1<'_, f64>, &mut RngState) -> Array2<f64>
        + Send
        + Sync,
>;

/// How one of the per-run stages is computed.
#[derive(Clone, Default)]
pub enum Stage<V, F> {
    /// The built-in stochastic function.
    #[default]
    Default,
    /// Fixed values; the stage draws nothing from the RNG.
    Explicit(V),
    /// A user function.
    Custom(F),
}

impl<V: fmt::Debug, F> fmt::Debug for Stage<V, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Default => f.write_str("Default"),
            Stage::Explicit(v) => f.debug_tuple("Explicit").field(v).finish(),
            Stage::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Clone, Default)]
pub enum ProjDist {
    #[default]
    Norm,
    Unif,
    Custom(ProjFn),
}

impl ProjDist {
    pub fn name(&self) -> &'static str {
        match self {
            ProjDist::Norm => "norm",
            ProjDist::Unif => "unif",
            ProjDist::Custom(_) => "custom",
        }
    }

    /// Built-in strategy by its name, `"norm"` or `"unif"`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "norm" => Some(ProjDist::Norm),
            "unif" => Some(ProjDist::Unif),
            _ => None,
        }
    }
}

impl fmt::Debug for ProjDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Default)]
pub enum PointDist {
    #[default]
    NMinus1,
    N,
    Custom(PointFn),
}

impl PointDist {
    pub fn name(&self) -> &'static str {
        match self {
            PointDist::NMinus1 => "n-1",
            PointDist::N => "n",
            PointDist::Custom(_) => "custom",
        }
    }

    /// Built-in strategy by its name, `"n-1"` or `"n"`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "n-1" => Some(PointDist::NMinus1),
            "n" => Some(PointDist::N),
            _ => None,
        }
    }
}

impl fmt::Debug for PointDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The six replaceable stages of a run.
#[derive(Clone, Debug, Default)]
pub struct HookSet {
    pub proj_dist: ProjDist,
    pub point_dist: PointDist,
    pub sizes: Stage<Vec<usize>, SizesFn>,
    pub centers: Stage<Array2<f64>, CentersFn>,
    pub lengths: Stage<Vec<f64>, LengthsFn>,
    pub angle_deltas: Stage<Vec<f64>, AnglesFn>,
}

/// Average line direction, either shared by all clusters or given per cluster.
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    Shared(Array1<f64>),
    PerCluster(Array2<f64>),
}

impl From<Array1<f64>> for Direction {
    fn from(d: Array1<f64>) -> Self {
        Direction::Shared(d)
    }
}

impl From<Array2<f64>> for Direction {
    fn from(d: Array2<f64>) -> Self {
        Direction::PerCluster(d)
    }
}

/// Everything a generation run depends on.
#[derive(Clone, Debug)]
pub struct GenerationParams {
    pub num_dims: usize,
    pub num_clusters: usize,
    /// Requested total; custom or explicit size stages may treat it as a hint.
    pub num_points: usize,
    pub direction: Direction,
    /// Angle dispersion of the lines, in radians.
    pub angle_disp: f64,
    pub cluster_sep: Array1<f64>,
    pub llength: f64,
    pub llength_disp: f64,
    pub lateral_disp: f64,
    pub allow_empty: bool,
    pub cluster_offset: Array1<f64>,
    pub hooks: HookSet,
    pub seed: u64,
}

impl GenerationParams {
    /// Parameters with the optional settings at their defaults: no empty
    /// clusters, zero offset, "norm" projections, "n-1" points, built-in
    /// stages and seed 0.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        num_dims: usize,
        num_clusters: usize,
        num_points: usize,
        direction: impl Into<Direction>,
        angle_disp: f64,
        cluster_sep: Array1<f64>,
        llength: f64,
        llength_disp: f64,
        lateral_disp: f64,
    ) -> Self {
        Self {
            num_dims,
            num_clusters,
            num_points,
            direction: direction.into(),
            angle_disp,
            cluster_sep,
            llength,
            llength_disp,
            lateral_disp,
            allow_empty: false,
            cluster_offset: Array1::zeros(num_dims),
            hooks: HookSet::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_allow_empty(mut self, allow_empty: bool) -> Self {
        self.allow_empty = allow_empty;
        self
    }

    pub fn with_offset(mut self, offset: Array1<f64>) -> Self {
        self.cluster_offset = offset;
        self
    }

    pub fn with_proj_dist(mut self, proj: ProjDist) -> Self {
        self.hooks.proj_dist = proj;
        self
    }

    pub fn with_point_dist(mut self, point: PointDist) -> Self {
        self.hooks.point_dist = point;
        self
    }

    pub fn with_sizes(mut self, sizes: Stage<Vec<usize>, SizesFn>) -> Self {
        self.hooks.sizes = sizes;
        self
    }

    pub fn with_centers(mut self, centers: Stage<Array2<f64>, CentersFn>) -> Self {
        self.hooks.centers = centers;
        self
    }

    pub fn with_lengths(mut self, lengths: Stage<Vec<f64>, LengthsFn>) -> Self {
        self.hooks.lengths = lengths;
        self
    }

    pub fn with_angle_deltas(mut self, angles: Stage<Vec<f64>, AnglesFn>) -> Self {
        self.hooks.angle_deltas = angles;
        self
    }
}

/// Output of a generation run.
///
/// Rows of `points` and `projections` correspond one-to-one, grouped by
/// cluster in generation order; `clusters` holds 1-based labels.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedClusters {
    pub points: Array2<f64>,
    pub clusters: Vec<usize>,
    pub projections: Array2<f64>,
    pub sizes: Vec<usize>,
    pub centers: Array2<f64>,
    pub directions: Array2<f64>,
    pub angles: Vec<f64>,
    pub lengths: Vec<f64>,
}

impl GeneratedClusters {
    pub fn num_points(&self) -> usize {
        self.points.nrows()
    }

    /// Points and labels only.
    pub fn to_dataset(&self) -> Dataset {
        Dataset {
            points: self.points.clone(),
            labels: self.clusters.clone(),
        }
    }
}

fn check_scalar(errs: &mut ValidationErrors, name: &str, value: f64) {
    if !value.is_finite() {
        errs.push(format!("{name} must be finite (got {value})"));
    } else if value < 0.0 {
        errs.push(format!("{name} must be non-negative (got {value})"));
    }
}

fn check_vector(errs: &mut ValidationErrors, name: &str, v: ArrayView1<'_, f64>, n: usize) {
    if v.len() != n {
        errs.push(format!("{name} has {} components, expected {n}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        errs.push(format!("{name} has non-finite components"));
    }
}

fn check_direction_row(errs: &mut ValidationErrors, name: &str, d: ArrayView1<'_, f64>) {
    if d.iter().all(|&x| x == 0.0) {
        errs.push(format!("{name} is the zero vector"));
    }
}

/// Check every parameter invariant and report all violations at once.
pub fn validate(params: &GenerationParams) -> std::result::Result<(), ValidationErrors> {
    let mut errs = ValidationErrors::default();
    let n = params.num_dims;
    let c = params.num_clusters;
    if n < 1 {
        errs.push("num_dims must be at least 1");
    }
    if c < 1 {
        errs.push("num_clusters must be at least 1");
    }

    match &params.direction {
        Direction::Shared(d) => {
            check_vector(&mut errs, "direction", d.view(), n);
            check_direction_row(&mut errs, "direction", d.view());
        }
        Direction::PerCluster(m) => {
            if m.dim() != (c, n) {
                errs.push(format!(
                    "direction matrix is {}x{}, expected {c}x{n}",
                    m.nrows(),
                    m.ncols()
                ));
            }
            if m.iter().any(|x| !x.is_finite()) {
                errs.push("direction matrix has non-finite entries");
            }
            for (i, row) in m.rows().into_iter().enumerate() {
                check_direction_row(&mut errs, &format!("direction row {}", i + 1), row);
            }
        }
    }

    check_scalar(&mut errs, "angle_disp", params.angle_disp);
    check_scalar(&mut errs, "llength", params.llength);
    check_scalar(&mut errs, "llength_disp", params.llength_disp);
    check_scalar(&mut errs, "lateral_disp", params.lateral_disp);

    check_vector(&mut errs, "cluster_sep", params.cluster_sep.view(), n);
    if params.cluster_sep.iter().any(|&s| s < 0.0) {
        errs.push("cluster_sep components must be non-negative");
    }
    check_vector(&mut errs, "cluster_offset", params.cluster_offset.view(), n);

    let hooks = &params.hooks;
    if let Stage::Explicit(sizes) = &hooks.sizes {
        if sizes.len() != c {
            errs.push(format!("explicit sizes has {} entries, expected {c}", sizes.len()));
        }
    }
    if let Stage::Explicit(centers) = &hooks.centers {
        if centers.dim() != (c, n) {
            errs.push(format!(
                "explicit centers is {}x{}, expected {c}x{n}",
                centers.nrows(),
                centers.ncols()
            ));
        }
        if centers.iter().any(|x| !x.is_finite()) {
            errs.push("explicit centers has non-finite entries");
        }
    }
    if let Stage::Explicit(lengths) = &hooks.lengths {
        if lengths.len() != c {
            errs.push(format!("explicit lengths has {} entries, expected {c}", lengths.len()));
        }
        if lengths.iter().any(|&l| l < 0.0 || !l.is_finite()) {
            errs.push("explicit lengths must be finite and non-negative");
        }
    }
    if let Stage::Explicit(angles) = &hooks.angle_deltas {
        if angles.len() != c {
            errs.push(format!(
                "explicit angle_deltas has {} entries, expected {c}",
                angles.len()
            ));
        }
        if angles.iter().any(|x| !x.is_finite()) {
            errs.push("explicit angle_deltas has non-finite entries");
        }
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

fn expect_len<T>(hook: &'static str, v: &[T], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::contract(
            hook,
            format!("returned {} values, expected {expected}", v.len()),
        ));
    }
    Ok(())
}

fn expect_finite(hook: &'static str, mut values: impl Iterator<Item = f64>) -> Result<()> {
    if values.any(|x| !x.is_finite()) {
        return Err(Error::contract(hook, "returned non-finite values"));
    }
    Ok(())
}

fn expect_shape(hook: &'static str, m: &Array2<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.dim() != (rows, cols) {
        return Err(Error::contract(
            hook,
            format!("returned a {}x{} matrix, expected {rows}x{cols}", m.nrows(), m.ncols()),
        ));
    }
    expect_finite(hook, m.iter().copied())
}

fn base_directions(params: &GenerationParams) -> Result<Array2<f64>> {
    let c = params.num_clusters;
    let n = params.num_dims;
    let mut out = Array2::zeros((c, n));
    match &params.direction {
        Direction::Shared(d) => {
            let d_hat = normalize(d.view())?;
            for mut row in out.rows_mut() {
                row.assign(&d_hat);
            }
        }
        Direction::PerCluster(m) => {
            for (mut row, d) in out.rows_mut().into_iter().zip(m.rows()) {
                row.assign(&normalize(d)?);
            }
        }
    }
    Ok(out)
}

/// Generate clusters around line segments.
pub fn clugen(params: &GenerationParams) -> Result<GeneratedClusters> {
    validate(params).map_err(Error::Validation)?;

    let n = params.num_dims;
    let c = params.num_clusters;
    let hooks = &params.hooks;
    let mut rng = RngState::new(params.seed);

    let base = base_directions(params)?;

    let sizes = match &hooks.sizes {
        Stage::Default => clusizes(c, params.num_points, params.allow_empty, &mut rng)?,
        Stage::Explicit(v) => v.clone(),
        Stage::Custom(f) => f(c, params.num_points, params.allow_empty, &mut rng),
    };
    expect_len("clusizes_fn", &sizes, c)?;

    let centers = match &hooks.centers {
        Stage::Default => clucenters(c, params.cluster_sep.view(), params.cluster_offset.view(), &mut rng)?,
        Stage::Explicit(m) => m.clone(),
        Stage::Custom(f) => f(c, params.cluster_sep.view(), params.cluster_offset.view(), &mut rng),
    };
    expect_shape("clucenters_fn", &centers, c, n)?;

    let lengths = match &hooks.lengths {
        Stage::Default => llengths(c, params.llength, params.llength_disp, &mut rng)?,
        Stage::Explicit(v) => v.clone(),
        Stage::Custom(f) => f(c, params.llength, params.llength_disp, &mut rng),
    };
    expect_len("llengths_fn", &lengths, c)?;
    if lengths.iter().any(|&l| l < 0.0 || !l.is_finite()) {
        return Err(Error::contract(
            "llengths_fn",
            "line lengths must be finite and non-negative",
        ));
    }

    let angles = match &hooks.angle_deltas {
        Stage::Default => angle_deltas(c, params.angle_disp, &mut rng)?,
        Stage::Explicit(v) => v.clone(),
        Stage::Custom(f) => f(c, params.angle_disp, &mut rng),
    };
    expect_len("angle_deltas_fn", &angles, c)?;
    expect_finite("angle_deltas_fn", angles.iter().copied())?;

    let total: usize = sizes.iter().sum();
    let mut points = Array2::zeros((total, n));
    let mut projections = Array2::zeros((total, n));
    let mut clusters = Vec::with_capacity(total);
    let mut directions = Array2::zeros((c, n));
    let mut start = 0;

    for i in 0..c {
        let count = sizes[i];
        let center = centers.row(i);
        let dir = rand_vector_at_angle(base.row(i), angles[i], &mut rng)?;

        let w = match &hooks.proj_dist {
            ProjDist::Norm => proj_dist_norm(lengths[i], count, &mut rng)?,
            ProjDist::Unif => proj_dist_unif(lengths[i], count, &mut rng)?,
            ProjDist::Custom(f) => f(lengths[i], count, &mut rng),
        };
        expect_len("proj_dist_fn", &w, count)?;
        expect_finite("proj_dist_fn", w.iter().copied())?;

        let proj = points_on_line(center, dir.view(), &w)?;
        let pts = match &hooks.point_dist {
            PointDist::NMinus1 => clupoints_n_1(
                proj.view(),
                params.lateral_disp,
                lengths[i],
                dir.view(),
                center,
                &mut rng,
            )?,
            PointDist::N => clupoints_n(
                proj.view(),
                params.lateral_disp,
                lengths[i],
                dir.view(),
                center,
                &mut rng,
            )?,
            PointDist::Custom(f) => f(
                proj.view(),
                params.lateral_disp,
                lengths[i],
                dir.view(),
                center,
                &mut rng,
            ),
        };
        expect_shape("point_dist_fn", &pts, count, n)?;

        let end = start + count;
        projections.slice_mut(s![start..end, ..]).assign(&proj);
        points.slice_mut(s![start..end, ..]).assign(&pts);
        clusters.extend(std::iter::repeat_n(i + 1, count));
        directions.row_mut(i).assign(&dir);
        start = end;
    }

    Ok(GeneratedClusters {
        points,
        clusters,
        projections,
        sizes,
        centers,
        directions,
        angles,
        lengths,
    })
}
