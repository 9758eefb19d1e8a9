//! Sampling and minimization of sectional curvature over horizontal planes.
//!
//! Points are parameterized by `(t, θ)` cells with a few `(α, p)` samples
//! per cell. At each point the horizontal space of the Gromoll-Meyer
//! submersion carries an orthonormal basis for the stage metric, planes are
//! drawn uniformly from its Grassmannian, and the best candidate is refined
//! by derivative-free coordinate descent. Every random draw is keyed by
//! `(seed, cell)`, so the record stream does not depend on the worker count.

use crate::curvature::{self, curvature_polynomial, horizontal_part, sigma7_sectional, CurvatureTensor, Plane};
use crate::error::{Error, Result};
use crate::lie::{Vec10, K_DIM};
use crate::metric::{Stage, StageConfig};
use crate::psi;
use crate::quat::Quaternion;
use crate::rng::CellRng;
use crate::sp2::{self, Action, Sp2Point};
use crate::zero_locus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

/// Dimension of the horizontal space of `Sp(2) → Σ⁷`.
pub const HORIZONTAL_DIM: usize = 7;

/// Number of plane parameters: the coefficients of both spanning vectors.
pub const PLANE_PARAMS: usize = 2 * HORIZONTAL_DIM;

/// What to scan and how densely.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    /// The metric, including the stage to evaluate.
    pub config: StageConfig,
    /// Number of cells in `t`.
    pub grid_t: usize,
    /// Number of cells in `θ`.
    pub grid_theta: usize,
    /// `(α, p)` samples per cell; the first is always `(i, 1)`.
    pub alpha_samples: usize,
    /// Random planes per point.
    pub planes_per_point: usize,
    /// Maximum coordinate-descent sweeps when refining a cell minimum.
    pub refine_iterations: usize,
    /// Largest `|σ|, |τ|` of the neighborhood grid around zero planes.
    pub radius: f64,
    /// Lower end of the `t` range.
    pub t_min: f64,
    /// Random seed.
    pub seed: u64,
}

impl ScanSpec {
    /// A small scan of `config`.
    pub fn new(config: StageConfig, seed: u64) -> Self {
        let t_min = config.t_min;
        ScanSpec {
            config,
            grid_t: 8,
            grid_theta: 8,
            alpha_samples: 1,
            planes_per_point: 16,
            refine_iterations: 200,
            radius: 0.5,
            t_min,
            seed,
        }
    }

    /// Rejects empty grids, negative radii and ranges outside `[0, π/4)`.
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("grid_t", self.grid_t),
            ("grid_theta", self.grid_theta),
            ("alpha_samples", self.alpha_samples),
            ("planes_per_point", self.planes_per_point),
            ("refine_iterations", self.refine_iterations),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, n)| *n == 0) {
            return Err(Error::Domain(format!("{name} must be at least 1")));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::Domain(format!(
                "radius = {} must be finite and nonnegative",
                self.radius
            )));
        }
        if !(0.0..FRAC_PI_4).contains(&self.t_min) {
            return Err(Error::Domain(format!("t_min = {} outside [0, π/4)", self.t_min)));
        }
        self.config.validate()
    }

    /// Number of `(t, θ)` cells.
    pub fn cells(&self) -> usize {
        self.grid_t * self.grid_theta
    }

    /// Center `(t, θ)` of cell `index`, ordered with `θ` fastest.
    pub fn cell_center(&self, index: usize) -> (f64, f64) {
        let (i, j) = (index / self.grid_theta, index % self.grid_theta);
        let t = self.t_min + (i as f64 + 0.5) * (FRAC_PI_4 - self.t_min) / self.grid_t as f64;
        let theta = (j as f64 + 0.5) * PI / self.grid_theta as f64;
        (t, theta)
    }
}

/// One evaluated plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRecord {
    /// Cell index.
    pub cell: usize,
    /// Stage evaluated.
    pub stage: Stage,
    /// Base coordinate `t`.
    pub t: f64,
    /// Base coordinate `θ`.
    pub theta: f64,
    /// Unit imaginary `α`.
    pub alpha: Quaternion,
    /// Unit quaternion `p`.
    pub p: Quaternion,
    /// Coefficients of the two orthonormal spanning vectors in the
    /// orthonormal horizontal basis at the point.
    pub plane_params: [f64; PLANE_PARAMS],
    /// Sectional curvature on `Σ⁷`.
    pub sec: f64,
    /// `|X|²|Y|² − g(X,Y)²` of the spanning pair.
    pub area: f64,
    /// Largest normalized inner product of the spanning pair with the orbit
    /// directions.
    pub residual: f64,
    /// Whether the record is the refined minimum of its cell.
    pub refined: bool,
}

/// An evaluation that failed; the scan continues without it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanFailure {
    /// Cell index.
    pub cell: usize,
    /// `(t, θ)` of the failed point.
    pub t: f64,
    /// Base coordinate `θ`.
    pub theta: f64,
    /// Error description.
    pub message: String,
}

/// Output of [`min_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// The smallest `sec` over all records.
    pub global_min: Option<CurvatureRecord>,
    /// All records, ordered by cell, then sample, with each cell's refined
    /// record last.
    pub records: Vec<CurvatureRecord>,
    /// Points where the evaluation failed.
    pub failures: Vec<ScanFailure>,
}

/// Curvature data at one point: the tensor and an orthonormal basis of the
/// horizontal space.
pub struct PointData {
    /// The point.
    pub point: Sp2Point,
    /// Curvature tensor of the stage metric.
    pub tensor: CurvatureTensor,
    /// Orthonormal horizontal basis.
    pub basis: Vec<Vec10>,
}

impl PointData {
    /// Evaluates the tensor at `q` and builds the horizontal basis.
    pub fn at(cfg: &StageConfig, q: &Sp2Point) -> Result<Self> {
        let tensor = curvature::curvature_tensor(cfg, q)?;
        let fields = Action::GromollMeyer.killing_fields(&q.m);
        let basis = sp2::orthogonal_complement(&fields, &tensor.gram);
        if basis.len() != HORIZONTAL_DIM {
            return Err(Error::IllConditioned(format!(
                "horizontal space of dimension {}",
                basis.len()
            )));
        }
        Ok(PointData {
            point: *q,
            tensor,
            basis,
        })
    }

    /// The vector with the given coefficients in the horizontal basis.
    pub fn combine(&self, coeffs: &[f64]) -> Vec10 {
        self.basis
            .iter()
            .zip(coeffs)
            .fold(Vec10::zeros(), |acc, (e, c)| acc + e * *c)
    }

    /// Coefficients of `x` in the horizontal basis.
    pub fn coefficients(&self, x: &Vec10) -> [f64; HORIZONTAL_DIM] {
        std::array::from_fn(|k| self.tensor.inner(&self.basis[k], x))
    }

    /// `(sec on Σ⁷, area, residual)` of the plane spanned by `x` and `y`.
    pub fn evaluate(&self, x: &Vec10, y: &Vec10) -> Result<(f64, f64, f64)> {
        let plane = Plane { x: *x, y: *y };
        let (sec, _) = sigma7_sectional(&self.tensor, &self.point.m, &plane)?;
        let area = self.tensor.area_sq(x, y);
        let g = &self.tensor.gram;
        let residual = curvature::horizontality_residual(g, &self.point.m, x).max(curvature::horizontality_residual(
            g,
            &self.point.m,
            y,
        ));
        Ok((sec, area, residual))
    }
}

/// Orthonormalizes a pair of coefficient vectors in `R⁷`. Returns `None`
/// when they are numerically dependent.
fn orthonormal_pair(a: &[f64; HORIZONTAL_DIM], b: &[f64; HORIZONTAL_DIM]) -> Option<[f64; PLANE_PARAMS]> {
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    let na = dot(a, a).sqrt();
    if na < 1e-8 {
        return None;
    }
    let u: Vec<f64> = a.iter().map(|x| x / na).collect();
    let c = dot(&u, b);
    let w: Vec<f64> = b.iter().zip(&u).map(|(x, e)| x - c * e).collect();
    let nw = dot(&w, &w).sqrt();
    if nw < 1e-8 {
        return None;
    }
    let mut out = [0.0; PLANE_PARAMS];
    for k in 0..HORIZONTAL_DIM {
        out[k] = u[k];
        out[HORIZONTAL_DIM + k] = w[k] / nw;
    }
    Some(out)
}

/// `n` planes uniform on the Grassmannian of horizontal 2-planes at the
/// point, as coefficient pairs in the orthonormal horizontal basis. The
/// draws are keyed by `(seed, cell)`.
pub fn sample_plane_params(n: usize, seed: u64, cell: u64) -> Vec<[f64; PLANE_PARAMS]> {
    let mut rng = CellRng::new(seed, cell, 1);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let a: [f64; HORIZONTAL_DIM] = std::array::from_fn(|_| rng.normal());
        let b: [f64; HORIZONTAL_DIM] = std::array::from_fn(|_| rng.normal());
        if let Some(p) = orthonormal_pair(&a, &b) {
            out.push(p);
        }
    }
    out
}

/// `n` uniformly distributed horizontal planes at `q` for the stage metric
/// of `cfg`, orthonormal for that metric. Deterministic per
/// `(cell, seed)`.
pub fn sample_planes(q: &Sp2Point, cfg: &StageConfig, n: usize, seed: u64, cell: u64) -> Result<Vec<Plane>> {
    let data = PointData::at(cfg, q)?;
    Ok(sample_plane_params(n, seed, cell)
        .iter()
        .map(|p| Plane {
            x: data.combine(&p[..HORIZONTAL_DIM]),
            y: data.combine(&p[HORIZONTAL_DIM..]),
        })
        .collect())
}

/// Minimizes `sec` over planes near `start` by coordinate descent on the
/// chart `(X + Σ aₖnₖ, Y + Σ bₖnₖ)`, where `nₖ` span the horizontal
/// complement of the starting plane. Steps start at `0.1` and halve when no
/// coordinate improves, stopping below `1e-8` or after `max_sweeps`
/// sweeps. Returns the orthonormalized parameters and the value.
pub fn refine(
    data: &PointData,
    start: &[f64; PLANE_PARAMS],
    start_value: f64,
    max_sweeps: usize,
) -> ([f64; PLANE_PARAMS], f64) {
    let x0 = data.combine(&start[..HORIZONTAL_DIM]);
    let y0 = data.combine(&start[HORIZONTAL_DIM..]);
    let normals = sp2::orthogonal_complement(&[x0, y0], &data.tensor.gram)
        .into_iter()
        .map(|v| horizontal_part(&data.tensor.gram, &data.point.m, &v))
        .collect::<Vec<_>>();
    let normals = sp2::orthonormalize(&normals, &data.tensor.gram);
    let dim = normals.len();
    let plane_of = |c: &[f64]| {
        let x = normals.iter().zip(&c[..dim]).fold(x0, |acc, (n, a)| acc + n * *a);
        let y = normals.iter().zip(&c[dim..]).fold(y0, |acc, (n, b)| acc + n * *b);
        (x, y)
    };
    let value = |c: &[f64]| {
        let (x, y) = plane_of(c);
        data.evaluate(&x, &y).map(|r| r.0).ok().filter(|v| v.is_finite())
    };
    let mut coords = vec![0.0; 2 * dim];
    let mut best = start_value;
    let mut step = 0.1;
    let mut sweeps = 0;
    while step >= 1e-8 && sweeps < max_sweeps {
        sweeps += 1;
        let mut improved = false;
        for k in 0..coords.len() {
            for sign in [1.0, -1.0] {
                let mut trial = coords.clone();
                trial[k] += sign * step;
                if let Some(v) = value(&trial) {
                    if v < best {
                        best = v;
                        coords = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    if best >= start_value {
        return (*start, start_value);
    }
    let (x, y) = plane_of(&coords);
    let params = orthonormal_pair(&data.coefficients(&x), &data.coefficients(&y)).unwrap_or(*start);
    (params, best)
}

/// The `(α, p)` samples of a cell: `(i, 1)` followed by random draws.
fn cell_orientations(spec: &ScanSpec, cell: usize) -> Vec<(Quaternion, Quaternion)> {
    let mut rng = CellRng::new(spec.seed, cell as u64, 0);
    let mut out = vec![(Quaternion::I, Quaternion::ONE)];
    while out.len() < spec.alpha_samples {
        out.push((rng.unit_imaginary(), rng.unit_quaternion()));
    }
    out
}

fn scan_cell(spec: &ScanSpec, cell: usize) -> (Vec<CurvatureRecord>, Vec<ScanFailure>) {
    let (t, theta) = spec.cell_center(cell);
    let stage = spec.config.stage;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut data_for_best = None;
    for (k, (alpha, p)) in cell_orientations(spec, cell).into_iter().enumerate() {
        let fail = |e: Error| ScanFailure {
            cell,
            t,
            theta,
            message: e.to_string(),
        };
        let data = match sp2::representative_point(t, theta, alpha, p).and_then(|q| PointData::at(&spec.config, &q)) {
            Ok(d) => d,
            Err(e) => {
                failures.push(fail(e));
                continue;
            }
        };
        let key = (cell * spec.alpha_samples + k) as u64;
        let mut improved_here = false;
        for params in sample_plane_params(spec.planes_per_point, spec.seed, key) {
            let x = data.combine(&params[..HORIZONTAL_DIM]);
            let y = data.combine(&params[HORIZONTAL_DIM..]);
            match data.evaluate(&x, &y) {
                Ok((sec, area, residual)) if sec.is_finite() && area > 1e-14 => {
                    if best.is_none_or(|(_, b)| sec < b) {
                        best = Some((records.len(), sec));
                        improved_here = true;
                    }
                    records.push(CurvatureRecord {
                        cell,
                        stage,
                        t,
                        theta,
                        alpha,
                        p,
                        plane_params: params,
                        sec,
                        area,
                        residual,
                        refined: false,
                    });
                }
                Ok((sec, area, _)) => failures.push(fail(Error::Degenerate(format!("sec = {sec}, area = {area}")))),
                Err(e) => failures.push(fail(e)),
            }
        }
        if improved_here {
            data_for_best = Some(data);
        }
    }
    if let (Some((idx, value)), Some(data)) = (best, data_for_best) {
        let start = records[idx].clone();
        let (params, _) = refine(&data, &start.plane_params, value, spec.refine_iterations);
        let x = data.combine(&params[..HORIZONTAL_DIM]);
        let y = data.combine(&params[HORIZONTAL_DIM..]);
        let mut refined = start.clone();
        refined.refined = true;
        if let Ok((sec, area, residual)) = data.evaluate(&x, &y) {
            if sec.is_finite() && sec <= start.sec {
                refined.plane_params = params;
                refined.sec = sec;
                refined.area = area;
                refined.residual = residual;
            }
        }
        records.push(refined);
    }
    (records, failures)
}

/// Samples every cell, refines each cell's best plane and merges the
/// records in cell order. Evaluation failures are collected, not fatal.
pub fn min_scan(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let per_cell: Vec<(Vec<CurvatureRecord>, Vec<ScanFailure>)> = (0..spec.cells())
        .into_par_iter()
        .map(|cell| scan_cell(spec, cell))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_cell {
        records.extend(r);
        failures.extend(f);
    }
    let global_min = records
        .iter()
        .fold(None::<&CurvatureRecord>, |best, r| match best {
            Some(b) if b.sec <= r.sec => Some(b),
            _ => Some(r),
        })
        .cloned();
    Ok(ScanResult {
        global_min,
        records,
        failures,
    })
}

/// The smallest refined value per `(t, θ)` cell, in cell order. Cells
/// without records hold `NaN`.
pub fn cell_minima(spec: &ScanSpec, result: &ScanResult) -> Vec<f64> {
    let mut out = vec![f64::NAN; spec.cells()];
    for r in &result.records {
        let slot = &mut out[r.cell];
        if slot.is_nan() || r.sec < *slot {
            *slot = r.sec;
        }
    }
    out
}

/// One `(t, θ)` cell of a neighborhood scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodCell {
    /// Base coordinate `t`.
    pub t: f64,
    /// Base coordinate `θ`.
    pub theta: f64,
    /// `curv(ζ, W)` for the unit zero-plane pair.
    pub curv_zero_plane: f64,
    /// Smallest `P(σ, τ)` over the grid and the perturbation families.
    pub min_p: f64,
    /// `(σ, τ)` attaining `min_p`.
    pub argmin: (f64, f64),
    /// Family attaining `min_p`.
    pub family: String,
    /// `P(0, 0)` as evaluated through the polynomial.
    pub p00: f64,
}

/// Output of [`neighborhood_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodReport {
    /// Stage evaluated.
    pub stage: Stage,
    /// The `σ` and `τ` values used.
    pub grid: Vec<f64>,
    /// Cells over `{L ≤ 1}`, in cell order.
    pub cells: Vec<NeighborhoodCell>,
    /// Smallest `min_p` over all cells.
    pub min_p: f64,
    /// Cells where the zero plane could not be built or evaluated.
    pub failures: Vec<ScanFailure>,
}

/// `0` and `±radius·10^{−3k/(n−1)}` for `k < n`.
pub fn log_grid(radius: f64, n: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    if radius > 0.0 {
        for k in 0..n {
            let e = if n > 1 { -3.0 * k as f64 / (n - 1) as f64 } else { 0.0 };
            let v = radius * 10f64.powf(e);
            g.push(v);
            g.push(-v);
        }
    }
    g.sort_by(f64::total_cmp);
    g
}

/// The unit part of `v` orthogonal to the orthonormal `basis`.
fn unit_perp(tensor: &CurvatureTensor, v: &Vec10, basis: &[Vec10]) -> Vec10 {
    let mut w = *v;
    for b in basis {
        w -= b * tensor.inner(b, &w);
    }
    w / tensor.inner(&w, &w).sqrt()
}

fn neighborhood_cell(spec: &ScanSpec, grid: &[f64], t: f64, theta: f64, cell: usize) -> Result<NeighborhoodCell> {
    let cfg = &spec.config;
    let zp = zero_locus::zero_plane_at(t, theta, Quaternion::I, Quaternion::J, cfg.nu, None)?;
    let m = zp.point.m;
    let tensor = curvature::curvature_tensor_with(cfg, &m, cfg.fd_step_at(&m))?;
    let zero_stage = cfg.at_stage(cfg.stage.min(Stage::CheegerL));
    let zero_gram = curvature::curvature_tensor_with(&zero_stage, &m, zero_stage.fd_step_at(&m))?.gram;
    let zeta = zp.zeta / tensor.inner(&zp.zeta, &zp.zeta).sqrt();
    let w = unit_perp(&tensor, &horizontal_part(&zero_gram, &m, &zp.w), &[zeta]);
    let frame = sp2::frame_at(&zp.point)?;
    let xi = sp2::xi_at(&zp.point)?.left_coords(&zp.point);
    let y20 = frame.vectors[1].left_coords(&zp.point);
    let mut rng = CellRng::new(spec.seed, cell as u64, 2);
    let perp = |v: &Vec10, extra: &[Vec10]| {
        let mut basis = vec![zeta, w];
        basis.extend_from_slice(extra);
        unit_perp(&tensor, &horizontal_part(&tensor.gram, &m, v), &basis)
    };
    let mut families: Vec<(&str, Vec10, Vec10)> = Vec::new();
    let kv = Vec10::from_fn(|j, _| if j < K_DIM { rng.normal() } else { 0.0 });
    let rv = Vec10::from_fn(|_, _| rng.normal());
    let rz = Vec10::from_fn(|_, _| rng.normal());
    for (name, z0, v0) in [("xi", xi, kv), ("y20", y20, kv), ("random", rz, rv)] {
        let z = perp(&z0, &[]);
        let v = perp(&v0, &[z]);
        if z.iter().chain(v.iter()).all(|c| c.is_finite()) {
            families.push((name, z, v));
        }
    }
    let mut out = NeighborhoodCell {
        t,
        theta,
        curv_zero_plane: tensor.curv(&zeta, &w),
        min_p: f64::INFINITY,
        argmin: (0.0, 0.0),
        family: String::new(),
        p00: f64::NAN,
    };
    for (name, z, v) in families {
        let poly = curvature_polynomial(&tensor, &zeta, &w, &z, &v);
        out.p00 = poly.eval(0.0, 0.0);
        for &s in grid {
            for &tau in grid {
                let value = poly.eval(s, tau);
                if value < out.min_p {
                    out.min_p = value;
                    out.argmin = (s, tau);
                    out.family = name.to_string();
                }
            }
        }
    }
    Ok(out)
}

/// Scans planes `span{ζ + σz, W + τV}` around the zero planes over the
/// cells with `L ≤ 1`, for `(σ, τ)` on a log-spaced grid of radius
/// `spec.radius` and `(z, V)` from the families `(ξ, V₁⊕V₂)`,
/// `(y^{2,0}, V₁⊕V₂)` and random horizontal pairs. `W` is the horizontal
/// part for the last metric at which the plane is flat.
pub fn neighborhood_scan(spec: &ScanSpec) -> Result<NeighborhoodReport> {
    spec.validate()?;
    let grid = log_grid(spec.radius, 4);
    let cells: Vec<(usize, f64, f64)> = (0..spec.cells())
        .map(|c| {
            let (t, th) = spec.cell_center(c);
            (c, t, th)
        })
        .filter(|&(_, t, th)| psi::zero_gauge(t, th) <= 1.0)
        .collect();
    let results: Vec<(usize, f64, f64, Result<NeighborhoodCell>)> = cells
        .par_iter()
        .map(|&(c, t, th)| (c, t, th, neighborhood_cell(spec, &grid, t, th, c)))
        .collect();
    let mut report = NeighborhoodReport {
        stage: spec.config.stage,
        grid,
        cells: Vec::new(),
        min_p: f64::INFINITY,
        failures: Vec::new(),
    };
    for (cell, t, theta, r) in results {
        match r {
            Ok(c) if c.min_p.is_finite() => {
                report.min_p = report.min_p.min(c.min_p);
                report.cells.push(c);
            }
            Ok(_) => report.failures.push(ScanFailure {
                cell,
                t,
                theta,
                message: "no perturbation family".into(),
            }),
            Err(e) => report.failures.push(ScanFailure {
                cell,
                t,
                theta,
                message: e.to_string(),
            }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_params_are_orthonormal_and_reproducible() {
        let a = sample_plane_params(20, 3, 5);
        assert_eq!(a, sample_plane_params(20, 3, 5));
        for p in &a {
            let (x, y) = p.split_at(HORIZONTAL_DIM);
            let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            assert!((dot(x, x) - 1.0).abs() < 1e-12);
            assert!((dot(y, y) - 1.0).abs() < 1e-12);
            assert!(dot(x, y).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_of_a_fixed_vector_follows_the_beta_law() {
        // For a uniform 2-plane in R⁷ the squared length of the projection of
        // a fixed unit vector is Beta(1, 5/2), with CDF 1 − (1 − x)^{5/2}.
        let n = 10_000;
        let mut xs: Vec<f64> = sample_plane_params(n, 11, 0)
            .iter()
            .map(|p| p[0] * p[0] + p[HORIZONTAL_DIM] * p[HORIZONTAL_DIM])
            .collect();
        xs.sort_by(f64::total_cmp);
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (1.0 - x).powf(2.5);
                (cdf - i as f64 / n as f64)
                    .abs()
                    .max((cdf - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "KS statistic {ks}");
    }

    #[test]
    fn log_grid_is_symmetric_and_contains_zero() {
        let g = log_grid(0.5, 4);
        assert_eq!(g.len(), 9);
        assert!(g.contains(&0.0));
        assert_eq!(g[0], -0.5);
        assert_eq!(g[8], 0.5);
    }

    #[test]
    fn spec_validation_rejects_empty_grids() {
        let mut spec = ScanSpec::new(StageConfig::formula_check(), 1);
        assert!(spec.validate().is_ok());
        spec.grid_t = 0;
        assert!(spec.validate().is_err());
    }
}
