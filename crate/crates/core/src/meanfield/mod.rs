//! Mean-field opinion profiles and the Gaussian update operator.
//!
//! A profile stores the probability that a vertex of weight `w` at signed
//! distance `z` from the interface (or radius `rho` from the centre of a
//! ball) is blue, on a tensor grid of log-spaced weights and uniform positions.
//! Between nodes it is bilinear in `(ln w, z)` and beyond the grid it is
//! constant.
//!
//! [`Operator`] precomputes the linear map from a profile to the advantage at
//! every node. For a piecewise-linear profile the spatial integral is exact up
//! to rounding; the integral over the neighbour weight uses a Gauss–Legendre
//! rule per weight interval. [`advantage_halfspace`] and [`advantage_radial`]
//! evaluate single points with adaptive quadrature over the neighbour weight.

mod halfspace;
pub mod quad;
mod radial;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use libm::erfc;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::girg::unit_ball_volume;

pub use halfspace::{blue_region_advantage, red_region_advantage};

/// Cumulative distribution of a normal variable with variance 1/2.
pub fn phi(x: f64) -> f64 {
    0.5 * erfc(-x)
}

/// Power-law weight density on `[1, ∞)`.
#[inline]
pub fn weight_density(w: f64, tau: f64) -> f64 {
    (tau - 1.0) * w.powf(-tau)
}

pub const DEFAULT_WEIGHT_NODES: usize = 64;
pub const DEFAULT_Z_NODES: usize = 513;
pub const DEFAULT_RADIAL_WEIGHT_NODES: usize = 12;
pub const DEFAULT_RHO_NODES: usize = 512;
pub const DEFAULT_QUAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub d: usize,
    pub tau: f64,
    pub k: f64,
    /// Weight cutoff `W`.
    pub w_cap: f64,
    pub w_grid: Vec<f64>,
    /// `z` nodes for half-space profiles, `rho` nodes for radial ones.
    pub z_grid: Vec<f64>,
    pub quad_tol: f64,
    /// Use the neighbour count of the weight-truncated model in the update.
    pub truncated_lambda: bool,
}

/// `n` log-spaced nodes on `[1, w_cap]`; a single node when `w_cap = 1`.
pub fn log_grid(w_cap: f64, n: usize) -> Vec<f64> {
    if w_cap == 1.0 || n == 1 {
        return vec![1.0];
    }
    let top = w_cap.ln();
    let mut g: Vec<f64> = (0..n)
        .map(|i| (top * i as f64 / (n - 1) as f64).exp())
        .collect();
    g[0] = 1.0;
    g[n - 1] = w_cap;
    g
}

/// Odd number of nodes `-m·h ..= m·h`.
pub fn symmetric_grid(h: f64, m: usize) -> Vec<f64> {
    (0..2 * m + 1).map(|i| (i as f64 - m as f64) * h).collect()
}

impl MeanFieldParams {
    /// Half-space defaults: 64 weights, 513 nodes on `[-Z, Z]` with
    /// `Z = 8·(k·W)^{1/d}`.
    pub fn halfspace(d: usize, tau: f64, k: f64, w_cap: f64) -> Result<Self> {
        check_model(d, tau, k, w_cap)?;
        let z = 8.0 * (k * w_cap).powf(1.0 / d as f64);
        let m = (DEFAULT_Z_NODES - 1) / 2;
        Self::new(
            d,
            tau,
            k,
            w_cap,
            log_grid(w_cap, DEFAULT_WEIGHT_NODES),
            symmetric_grid(z / m as f64, m),
        )
    }

    /// Radial defaults (`d = 2`): 12 weights, 512 `rho` nodes on
    /// `[0, r + Z]` spaced so that `r` is a node.
    pub fn radial(tau: f64, k: f64, w_cap: f64, r: f64) -> Result<Self> {
        check_model(2, tau, k, w_cap)?;
        if !(r > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        let z = 8.0 * (k * w_cap).sqrt();
        let h = radial_spacing(r, z, DEFAULT_RHO_NODES);
        let grid = (0..DEFAULT_RHO_NODES).map(|i| i as f64 * h).collect();
        Self::new(2, tau, k, w_cap, log_grid(w_cap, DEFAULT_RADIAL_WEIGHT_NODES), grid)
    }

    pub fn new(
        d: usize,
        tau: f64,
        k: f64,
        w_cap: f64,
        w_grid: Vec<f64>,
        z_grid: Vec<f64>,
    ) -> Result<Self> {
        let p = MeanFieldParams {
            d,
            tau,
            k,
            w_cap,
            w_grid,
            z_grid,
            quad_tol: DEFAULT_QUAD_TOL,
            truncated_lambda: false,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_model(self.d, self.tau, self.k, self.w_cap)?;
        let increasing = |g: &[f64]| g.windows(2).all(|p| p[0] < p[1]);
        if self.w_grid.is_empty() || !increasing(&self.w_grid) {
            return Err(Error::invalid("weight grid must be non-empty and strictly increasing"));
        }
        if self.w_grid[0] != 1.0 || *self.w_grid.last().unwrap() != self.w_cap {
            return Err(Error::invalid("weight grid must span [1, w_cap]"));
        }
        if self.z_grid.len() < 2 || !increasing(&self.z_grid) {
            return Err(Error::invalid("position grid needs at least two strictly increasing nodes"));
        }
        let h = self.spacing();
        if self
            .z_grid
            .iter()
            .enumerate()
            .any(|(i, &z)| (z - self.z_grid[0] - i as f64 * h).abs() > 1e-9 * h.max(z.abs()))
        {
            return Err(Error::invalid("position grid must be uniform"));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol <= 1e-3) {
            return Err(Error::invalid("quad_tol must lie in (0, 1e-3]"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        let n = self.z_grid.len();
        (self.z_grid[n - 1] - self.z_grid[0]) / (n - 1) as f64
    }

    pub fn nw(&self) -> usize {
        self.w_grid.len()
    }

    pub fn nz(&self) -> usize {
        self.z_grid.len()
    }

    /// Edge radius between weights `w` and `w2`.
    pub fn edge_radius(&self, w: f64, w2: f64) -> f64 {
        (self.k * w * w2).powf(1.0 / self.d as f64)
    }

    /// Radius of the ball of influence.
    pub fn influence_radius(&self, w: f64) -> f64 {
        (self.k * w).powf(1.0 / self.d as f64)
    }
}

fn check_model(d: usize, tau: f64, k: f64, w_cap: f64) -> Result<()> {
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if !(tau > 2.0) || !tau.is_finite() {
        return Err(Error::invalid("tau must satisfy tau > 2"));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::invalid("k must be positive"));
    }
    if !(w_cap >= 1.0) || !w_cap.is_finite() {
        return Err(Error::invalid("w_cap must be finite and at least 1"));
    }
    Ok(())
}

/// Spacing close to `(r + z)/(n - 1)` that puts `r` exactly on a node.
pub fn radial_spacing(r: f64, z: f64, n: usize) -> f64 {
    let span = r + z;
    let m = ((r / span) * (n - 1) as f64).round().max(1.0);
    r / m
}

/// `∫_1^W (w'-1) ρ(w') dw'`.
fn far_integral(tau: f64, w_cap: f64) -> f64 {
    (tau - 1.0) * (1.0 - w_cap.powf(2.0 - tau)) / (tau - 2.0) - (1.0 - w_cap.powf(1.0 - tau))
}

/// Expected number of neighbours of a weight-`w` vertex.
///
/// The default is the untruncated `V_d·k·w·(1 + 1/(τ-2))`. With
/// `truncated_lambda` the far term only counts neighbours of weight at most
/// `w_cap`.
pub fn lambda_of_w(w: f64, params: &MeanFieldParams) -> f64 {
    let near = unit_ball_volume(params.d) * params.k * w;
    let far = if params.truncated_lambda {
        far_integral(params.tau, params.w_cap)
    } else {
        1.0 / (params.tau - 2.0)
    };
    near * (1.0 + far)
}

/// Number of neighbours of a weight-`w` vertex with weight at most `w_cap`,
/// which is the total mass of the advantage integral.
pub fn kernel_mass(w: f64, params: &MeanFieldParams) -> f64 {
    // ∫_1^W w' ρ(w') dw'
    let t = params.tau;
    let m = (t - 1.0) / (t - 2.0) * (1.0 - params.w_cap.powf(2.0 - t));
    unit_ball_volume(params.d) * params.k * w * m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    HalfSpace,
    Radial { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvantageResult {
    pub mu: f64,
    pub lambda_total: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub quad_error_estimate: f64,
}

impl AdvantageResult {
    fn from_mu(mu: f64, total: f64, error: f64) -> Self {
        let plus = 0.5 * (total + mu);
        AdvantageResult {
            mu,
            lambda_total: total,
            lambda_plus: plus,
            lambda_minus: total - plus,
            quad_error_estimate: error,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    params: MeanFieldParams,
    geometry: Geometry,
    /// Row-major: `values[i * nz + j] = f(w_i, z_j)`.
    values: Vec<f64>,
}

impl Profile {
    pub fn new(params: MeanFieldParams, geometry: Geometry, values: Vec<f64>) -> Result<Self> {
        params.validate()?;
        if values.len() != params.nw() * params.nz() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                params.nw() * params.nz(),
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("profile values must lie in [0, 1]"));
        }
        if let Geometry::Radial { r } = geometry {
            if params.d != 2 {
                return Err(Error::Geometry {
                    expected: "radial profiles in two dimensions",
                });
            }
            if !(r > 0.0) || params.z_grid[0] < 0.0 {
                return Err(Error::invalid("radial profiles need r > 0 and rho >= 0"));
            }
        }
        Ok(Profile {
            params,
            geometry,
            values,
        })
    }

    pub fn from_fn<F: FnMut(f64, f64) -> f64>(
        params: MeanFieldParams,
        geometry: Geometry,
        mut f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(params.nw() * params.nz());
        for &w in &params.w_grid {
            for &z in &params.z_grid {
                values.push(f(w, z));
            }
        }
        Profile::new(params, geometry, values)
    }

    pub fn constant(params: MeanFieldParams, geometry: Geometry, c: f64) -> Result<Self> {
        Profile::from_fn(params, geometry, |_, _| c)
    }

    /// Blue for `z > 0`, red for `z < 0` and 1/2 on the interface.
    pub fn halfspace_indicator(params: MeanFieldParams) -> Result<Self> {
        Profile::from_fn(params, Geometry::HalfSpace, |_, z| step(z))
    }

    /// Blue inside the ball of radius `r`, 1/2 on its boundary.
    pub fn ball_indicator(params: MeanFieldParams, r: f64) -> Result<Self> {
        Profile::from_fn(params, Geometry::Radial { r }, |_, rho| step(r - rho))
    }

    pub fn params(&self) -> &MeanFieldParams {
        &self.params
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.params.nz() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let nz = self.params.nz();
        &self.values[i * nz..(i + 1) * nz]
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Profile {
        debug_assert_eq!(values.len(), self.values.len());
        Profile {
            params: self.params.clone(),
            geometry: self.geometry,
            values,
        }
    }

    /// Bracketing weight rows and the interpolation fraction in `ln w`.
    pub(crate) fn weight_position(&self, w: f64) -> (usize, usize, f64) {
        let g = &self.params.w_grid;
        let n = g.len();
        if n == 1 || w <= g[0] {
            return (0, 0, 0.0);
        }
        if w >= g[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let i = g.partition_point(|&x| x <= w) - 1;
        let t = (w.ln() - g[i].ln()) / (g[i + 1].ln() - g[i].ln());
        (i, i + 1, t)
    }

    /// Linear interpolation along one weight row.
    pub(crate) fn row_eval(&self, i: usize, z: f64) -> f64 {
        let g = &self.params.z_grid;
        let n = g.len();
        let row = self.row(i);
        if z <= g[0] {
            return row[0];
        }
        if z >= g[n - 1] {
            return row[n - 1];
        }
        let h = self.params.spacing();
        let s = (z - g[0]) / h;
        let j = (s.floor() as usize).min(n - 2);
        let t = s - j as f64;
        row[j] * (1.0 - t) + row[j + 1] * t
    }

    /// Bilinear in `(ln w, z)`, constant beyond the grid.
    pub fn eval(&self, w: f64, z: f64) -> f64 {
        let (a, b, t) = self.weight_position(w);
        if t == 0.0 {
            self.row_eval(a, z)
        } else {
            self.row_eval(a, z) * (1.0 - t) + self.row_eval(b, z) * t
        }
    }

    /// `max |f(w,z) + f(w,-z) - 1|` over grid nodes; infinite when the grid
    /// itself is not symmetric.
    pub fn symmetry_violation(&self) -> f64 {
        let g = &self.params.z_grid;
        let n = g.len();
        let h = self.params.spacing();
        if (g[0] + g[n - 1]).abs() > 1e-9 * h {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.params.nw() {
            let row = self.row(i);
            for j in 0..n {
                worst = worst.max((row[j] + row[n - 1 - j] - 1.0).abs());
            }
        }
        worst
    }

    /// Largest node-wise difference from another profile on the same grid.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    fn header(&self) -> &'static str {
        match self.geometry {
            Geometry::HalfSpace => "w,z,f",
            Geometry::Radial { .. } => "w,rho,g",
        }
    }

    /// One `w,z,f` (or `w,rho,g`) row per node with 17 significant digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", self.header())?;
        for (i, &w) in self.params.w_grid.iter().enumerate() {
            for (j, &z) in self.params.z_grid.iter().enumerate() {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", w, z, self.value(i, j))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Read a profile written by [`Profile::write_csv`]. Model constants come
    /// from `template`; the grids come from the file.
    pub fn read_csv(path: &Path, template: &MeanFieldParams, geometry: Geometry) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let cols: Vec<&str> = header.trim().split(',').collect();
        let expected: Vec<&str> = match geometry {
            Geometry::HalfSpace => vec!["w", "z", "f"],
            Geometry::Radial { .. } => vec!["w", "rho", "g"],
        };
        for c in &expected {
            if !cols.contains(c) {
                return Err(Error::MissingColumn(c.to_string()));
            }
        }
        let idx: Vec<usize> = expected
            .iter()
            .map(|c| cols.iter().position(|x| x == c).unwrap())
            .collect();

        let mut rows: Vec<[f64; 3]> = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let mut rec = [0.0; 3];
            for (slot, &c) in rec.iter_mut().zip(&idx) {
                *slot = fields
                    .get(c)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        line: n + 2,
                        msg: format!("bad value in column {c}"),
                    })?;
            }
            rows.push(rec);
        }
        let mut w_grid: Vec<f64> = Vec::new();
        for r in &rows {
            if w_grid.last() != Some(&r[0]) {
                w_grid.push(r[0]);
            }
        }
        let nz = rows.len() / w_grid.len().max(1);
        let z_grid: Vec<f64> = rows.iter().take(nz).map(|r| r[1]).collect();
        if w_grid.is_empty() || nz * w_grid.len() != rows.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                msg: "rows do not form a tensor grid".into(),
            });
        }
        for (n, r) in rows.iter().enumerate() {
            if r[0] != w_grid[n / nz] || r[1] != z_grid[n % nz] {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: n + 2,
                    msg: "rows do not form a tensor grid".into(),
                });
            }
        }
        let params = MeanFieldParams {
            w_cap: *w_grid.last().unwrap(),
            w_grid,
            z_grid,
            ..template.clone()
        };
        Profile::new(params, geometry, rows.iter().map(|r| r[2]).collect())
    }
}

fn step(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Precomputed advantage map for one grid and geometry.
pub struct Operator {
    params: MeanFieldParams,
    geometry: Geometry,
    inner: Inner,
    /// `√(2λ(w_i))` per weight row.
    scale: Vec<f64>,
}

enum Inner {
    HalfSpace(halfspace::Plan),
    Radial(radial::Plan),
}

impl Operator {
    pub fn new(params: &MeanFieldParams, geometry: Geometry) -> Result<Self> {
        params.validate()?;
        let inner = match geometry {
            Geometry::HalfSpace => Inner::HalfSpace(halfspace::Plan::new(params)),
            Geometry::Radial { .. } => {
                if params.d != 2 {
                    return Err(Error::Geometry {
                        expected: "radial profiles in two dimensions",
                    });
                }
                Inner::Radial(radial::Plan::new(params))
            }
        };
        let scale = params
            .w_grid
            .iter()
            .map(|&w| (2.0 * lambda_of_w(w, params)).sqrt())
            .collect();
        Ok(Operator {
            params: params.clone(),
            geometry,
            inner,
            scale,
        })
    }

    pub fn for_profile(profile: &Profile) -> Result<Self> {
        Operator::new(&profile.params, profile.geometry)
    }

    fn check(&self, profile: &Profile) -> Result<()> {
        let same_kind = matches!(
            (self.geometry, profile.geometry),
            (Geometry::HalfSpace, Geometry::HalfSpace) | (Geometry::Radial { .. }, Geometry::Radial { .. })
        );
        if !same_kind {
            return Err(Error::Geometry {
                expected: "a profile of the operator's geometry",
            });
        }
        if profile.params.w_grid != self.params.w_grid || profile.params.z_grid != self.params.z_grid {
            return Err(Error::invalid("profile grid differs from the operator grid"));
        }
        Ok(())
    }

    /// Advantage `μ_f` at every node.
    pub fn advantages(&self, profile: &Profile) -> Result<Vec<f64>> {
        self.check(profile)?;
        let signed: Vec<f64> = profile.values.iter().map(|v| 2.0 * v - 1.0).collect();
        Ok(match &self.inner {
            Inner::HalfSpace(p) => p.apply(&signed),
            Inner::Radial(p) => p.apply(&signed),
        })
    }

    pub fn apply(&self, profile: &Profile) -> Result<Profile> {
        let mu = self.advantages(profile)?;
        let nz = self.params.nz();
        let values = mu
            .iter()
            .enumerate()
            .map(|(n, m)| phi(m / self.scale[n / nz]))
            .collect();
        Ok(profile.with_values(values))
    }

    /// Apply until the sup-norm change drops below `conv_tol` or `max_iter`
    /// applications have been made.
    pub fn iterate(&self, profile0: &Profile, max_iter: usize, conv_tol: f64) -> Result<Iteration> {
        self.iterate_with(profile0, max_iter, conv_tol, |_, _| Ok(()))
    }

    /// Like [`Operator::iterate`], calling `visit(t, f_t)` for every iterate
    /// including `t = 0`.
    pub fn iterate_with<F>(
        &self,
        profile0: &Profile,
        max_iter: usize,
        conv_tol: f64,
        mut visit: F,
    ) -> Result<Iteration>
    where
        F: FnMut(usize, &Profile) -> Result<()>,
    {
        if max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        let mut f = profile0.clone();
        visit(0, &f)?;
        let mut deltas = Vec::new();
        for t in 1..=max_iter {
            let next = self.apply(&f)?;
            let delta = next.sup_distance(&f);
            deltas.push(delta);
            f = next;
            visit(t, &f)?;
            if delta < conv_tol {
                break;
            }
        }
        Ok(Iteration {
            iterations: deltas.len(),
            profile: f,
            sup_deltas: deltas,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Iteration {
    pub profile: Profile,
    pub iterations: usize,
    pub sup_deltas: Vec<f64>,
}

impl Iteration {
    pub fn converged(&self, conv_tol: f64) -> bool {
        self.sup_deltas.last().is_some_and(|&d| d < conv_tol)
    }
}

pub fn apply_t(profile: &Profile) -> Result<Profile> {
    Operator::for_profile(profile)?.apply(profile)
}

pub fn iterate(profile0: &Profile, max_iter: usize, conv_tol: f64) -> Result<Iteration> {
    Operator::for_profile(profile0)?.iterate(profile0, max_iter, conv_tol)
}

/// Advantage of a weight-`w` vertex at signed distance `z` under a
/// half-space profile.
pub fn advantage_halfspace(profile: &Profile, w: f64, z: f64) -> Result<AdvantageResult> {
    if profile.geometry != Geometry::HalfSpace {
        return Err(Error::Geometry {
            expected: "a half-space profile",
        });
    }
    halfspace::advantage(profile, w, z)
}

/// Advantage of a weight-`w` vertex at radius `rho` under a radial profile.
pub fn advantage_radial(profile: &Profile, w: f64, rho: f64) -> Result<AdvantageResult> {
    if !matches!(profile.geometry, Geometry::Radial { .. }) {
        return Err(Error::Geometry {
            expected: "a radial profile",
        });
    }
    if rho < 0.0 {
        return Err(Error::invalid("rho must be non-negative"));
    }
    radial::advantage(profile, w, rho)
}

/// `min_w f(w, (k·w)^{1/d}) - 1/2` over grid weights.
pub fn survival_margin(profile: &Profile) -> Result<f64> {
    if profile.geometry != Geometry::HalfSpace {
        return Err(Error::Geometry {
            expected: "a half-space profile",
        });
    }
    let p = &profile.params;
    Ok(p.w_grid
        .iter()
        .enumerate()
        .map(|(i, &w)| profile.row_eval(i, p.influence_radius(w)) - 0.5)
        .fold(f64::INFINITY, f64::min))
}

/// Radius at which the lightest weight row first drops below 1/2.
pub fn crossing_radius(profile: &Profile) -> Result<f64> {
    if !matches!(profile.geometry, Geometry::Radial { .. }) {
        return Err(Error::Geometry {
            expected: "a radial profile",
        });
    }
    let row = profile.row(0);
    let g = &profile.params.z_grid;
    if !(row[0] > 0.5 && *row.last().unwrap() < 0.5) {
        return Err(Error::NoCrossing);
    }
    let j = row.iter().position(|&v| v < 0.5).unwrap() - 1;
    let t = (row[j] - 0.5) / (row[j] - row[j + 1]);
    Ok(g[j] + t * (g[j + 1] - g[j]))
}
