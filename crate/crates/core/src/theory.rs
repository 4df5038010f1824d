//! Explicit subsolution of the half-space operator and the erosion bounds for
//! balls.
//!
//! The lower bound on the advantage in the blue cap region is
//!
//! ```text
//! μ̲(w, z) = 2·C(d)·z^{(d+1)/2}·r_I^{(d-1)/2}·(1 - (1 + z/(2 r_I))^{d(1-τ)})·(δ* - 1/2)
//! ```
//!
//! with `r_I = (k·w)^{1/d}` and the cone constant `C(d) = V_{d-1}/(2^{(d+1)/2}·d)`.
//! At `(w, z) = (1, r_I)` it reduces to `y·(δ* - 1/2)·√(2λ(1))`, so the level
//! `δ*` solves `δ = Φ(y·(δ - 1/2))`, which has a root above 1/2 iff `y > √π`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::girg::unit_ball_volume;
use crate::meanfield::{
    self, crossing_radius, lambda_of_w, phi, symmetric_grid, Geometry, MeanFieldParams, Operator, Profile,
};

const SCAN_STEPS: usize = 1000;
const ROOT_TOL: f64 = 1e-10;

pub fn cone_constant(d: usize) -> f64 {
    unit_ball_volume(d - 1) / (2f64.powf((d as f64 + 1.0) / 2.0) * d as f64)
}

/// `1 - (1 + z/(2 r_I))^{d(1-τ)}`.
fn blue_factor(d: usize, tau: f64, z: f64, ri: f64) -> f64 {
    1.0 - (1.0 + z / (2.0 * ri)).powf(d as f64 * (1.0 - tau))
}

/// Untruncated expected degree of a weight-1 vertex.
fn lambda_one(d: usize, tau: f64, k: f64) -> f64 {
    unit_ball_volume(d) * k * (1.0 + 1.0 / (tau - 2.0))
}

pub fn y_coefficient(d: usize, tau: f64, k: f64) -> f64 {
    2.0 * cone_constant(d) * blue_factor(d, tau, 1.0, 1.0) * k / (2.0 * lambda_one(d, tau, k)).sqrt()
}

/// Smallest `k` with `y(k) > √π`, i.e. the root of `y(k) = √π`.
pub fn k_min(d: usize, tau: f64) -> f64 {
    let a = y_coefficient(d, tau, 1.0);
    PI / (a * a)
}

/// Sign changes of `Φ(y(δ - 1/2)) - δ` on `(1/2 + 10⁻⁶, 1]`.
pub fn delta_star_brackets(y: f64) -> Vec<(f64, f64)> {
    let g = |d: f64| phi(y * (d - 0.5)) - d;
    let lo = 0.5 + 1e-6;
    let step = (1.0 - lo) / SCAN_STEPS as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut ga = g(a);
    for i in 1..=SCAN_STEPS {
        let b = lo + i as f64 * step;
        let gb = g(b);
        if (ga > 0.0 && gb <= 0.0) || (ga < 0.0 && gb >= 0.0) {
            out.push((a, b));
        }
        a = b;
        ga = gb;
    }
    out
}

/// Smallest root of `δ = Φ(y(δ - 1/2))` above 1/2, or `None` when `y <= √π`.
pub fn solve_delta_star(y: f64) -> Option<f64> {
    if !y.is_finite() || y <= PI.sqrt() {
        return None;
    }
    let g = |d: f64| phi(y * (d - 0.5)) - d;
    let (mut a, mut b) = *delta_star_brackets(y).first()?;
    let mut ga = g(a);
    while b - a > 1e-15 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return Some(m);
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        if (b - a) < ROOT_TOL && g(0.5 * (a + b)).abs() <= ROOT_TOL {
            break;
        }
    }
    Some(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionSpec {
    pub d: usize,
    pub tau: f64,
    pub k: f64,
    pub delta_star: f64,
    pub cone_constant: f64,
    pub y_coefficient: f64,
}

impl SubsolutionSpec {
    pub fn new(d: usize, tau: f64, k: f64) -> Result<Self> {
        if d == 0 || !(tau > 2.0) || !(k > 0.0) {
            return Err(Error::invalid("need d >= 1, tau > 2 and k > 0"));
        }
        let y = y_coefficient(d, tau, k);
        let delta_star = solve_delta_star(y).ok_or_else(|| {
            Error::invalid(format!(
                "k = {k} is below k_min = {:.6} (y = {y:.6} <= sqrt(pi))",
                k_min(d, tau)
            ))
        })?;
        Ok(SubsolutionSpec {
            d,
            tau,
            k,
            delta_star,
            cone_constant: cone_constant(d),
            y_coefficient: y,
        })
    }

    /// The advantage lower bound `μ̲(w, z)` for `0 <= z`.
    pub fn mu_lower(&self, w: f64, z: f64) -> f64 {
        let d = self.d as f64;
        let ri = (self.k * w).powf(1.0 / d);
        2.0 * self.cone_constant
            * z.powf((d + 1.0) / 2.0)
            * ri.powf((d - 1.0) / 2.0)
            * blue_factor(self.d, self.tau, z, ri)
            * (self.delta_star - 0.5)
    }

    /// The subsolution at `(w, z)`, with `λ` taken from `params`.
    pub fn value(&self, params: &MeanFieldParams, w: f64, z: f64) -> f64 {
        let ri = (self.k * w).powf(1.0 / self.d as f64);
        if z < 0.0 {
            return 1.0 - self.value(params, w, -z);
        }
        if w == 1.0 && z == ri {
            return self.delta_star;
        }
        phi(self.mu_lower(w, z.min(ri)) / (2.0 * lambda_of_w(w, params)).sqrt())
    }
}

/// The explicit subsolution on the default half-space grid with `W = 10³`.
pub fn build_subsolution(d: usize, tau: f64, k: f64) -> Result<(SubsolutionSpec, Profile)> {
    let params = MeanFieldParams::halfspace(d, tau, k, 1000.0)?;
    build_subsolution_on(params)
}

pub fn build_subsolution_on(params: MeanFieldParams) -> Result<(SubsolutionSpec, Profile)> {
    let spec = SubsolutionSpec::new(params.d, params.tau, params.k)?;
    let values = Profile::from_fn(params.clone(), Geometry::HalfSpace, |w, z| spec.value(&params, w, z))?;
    Ok((spec, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityTolerances {
    pub symmetry: f64,
    pub monotonicity: f64,
    /// `None` picks `10·quad_tol·√λ(W)`.
    pub subsolution: Option<f64>,
}

impl Default for ValidityTolerances {
    fn default() -> Self {
        ValidityTolerances {
            symmetry: 1e-12,
            monotonicity: 1e-12,
            subsolution: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Symmetry,
    MonotoneZ,
    MonotoneW,
    Subsolution,
}

impl Condition {
    fn name(self) -> &'static str {
        match self {
            Condition::Symmetry => "symmetry",
            Condition::MonotoneZ => "z_monotonicity",
            Condition::MonotoneW => "w_monotonicity",
            Condition::Subsolution => "subsolution",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    pub w: f64,
    pub z: f64,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub symmetry_max_violation: f64,
    pub z_monotonicity_max_violation: f64,
    pub w_monotonicity_max_violation: f64,
    pub subsolution_max_violation: f64,
    pub operator_checked: bool,
    pub tolerances: ValidityTolerances,
    pub subsolution_tolerance: f64,
    pub pass: bool,
    /// Nodes exceeding their tolerance.
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "symmetry_max_violation={:e}", self.symmetry_max_violation);
        let _ = writeln!(s, "z_monotonicity_max_violation={:e}", self.z_monotonicity_max_violation);
        let _ = writeln!(s, "w_monotonicity_max_violation={:e}", self.w_monotonicity_max_violation);
        let _ = writeln!(s, "subsolution_max_violation={:e}", self.subsolution_max_violation);
        let _ = writeln!(s, "operator_checked={}", self.operator_checked);
        let _ = writeln!(s, "subsolution_tolerance={:e}", self.subsolution_tolerance);
        let _ = writeln!(s, "violations={}", self.violations.len());
        let _ = writeln!(s, "pass={}", self.pass);
        s
    }

    pub fn violations_csv(&self) -> String {
        let mut s = String::from("condition,w,z,amount\n");
        for v in &self.violations {
            let _ = writeln!(s, "{},{:.16e},{:.16e},{:.16e}", v.condition.name(), v.w, v.z, v.amount);
        }
        s
    }
}

/// Check the four validity conditions at grid nodes. The subsolution condition
/// is only evaluated with `use_operator`.
pub fn check_valid(profile: &Profile, use_operator: bool) -> Result<ValidityReport> {
    check_valid_with(profile, use_operator.then_some(None), ValidityTolerances::default())
}

/// As [`check_valid`]; `operator` is `None` to skip the subsolution
/// condition, `Some(None)` to build an operator and `Some(Some(op))` to reuse
/// one.
pub fn check_valid_with(
    profile: &Profile,
    operator: Option<Option<&Operator>>,
    tol: ValidityTolerances,
) -> Result<ValidityReport> {
    if profile.geometry() != Geometry::HalfSpace {
        return Err(Error::Geometry {
            expected: "a half-space profile",
        });
    }
    let p = profile.params();
    let (nw, nz) = (p.nw(), p.nz());
    let mut violations = Vec::new();
    let mut note = |c: Condition, w: f64, z: f64, amount: f64, limit: f64| {
        if amount > limit {
            violations.push(Violation {
                condition: c,
                w,
                z,
                amount,
            });
        }
        amount.max(0.0)
    };

    let mut sym: f64 = profile.symmetry_violation();
    if sym.is_finite() {
        for i in 0..nw {
            for j in 0..nz {
                let v = (profile.value(i, j) + profile.value(i, nz - 1 - j) - 1.0).abs();
                note(Condition::Symmetry, p.w_grid[i], p.z_grid[j], v, tol.symmetry);
            }
        }
    } else {
        sym = f64::INFINITY;
        note(Condition::Symmetry, f64::NAN, f64::NAN, sym, tol.symmetry);
    }

    let mut mono_z: f64 = 0.0;
    for i in 0..nw {
        for j in 0..nz - 1 {
            let v = profile.value(i, j) - profile.value(i, j + 1);
            mono_z = mono_z.max(note(Condition::MonotoneZ, p.w_grid[i], p.z_grid[j], v, tol.monotonicity));
        }
    }

    let mut mono_w: f64 = 0.0;
    let floor = p.k.powf(1.0 / p.d as f64);
    for j in 0..nz {
        let z = p.z_grid[j];
        if z < floor {
            continue;
        }
        let top = z.powi(p.d as i32) / p.k;
        for i in 0..nw - 1 {
            if p.w_grid[i + 1] > top {
                break;
            }
            let v = profile.value(i, j) - profile.value(i + 1, j);
            mono_w = mono_w.max(note(Condition::MonotoneW, p.w_grid[i], z, v, tol.monotonicity));
        }
    }

    let sub_tol = tol.subsolution.unwrap_or_else(|| {
        10.0 * p.quad_tol * lambda_of_w(*p.w_grid.last().unwrap(), p).sqrt()
    });
    let mut sub: f64 = 0.0;
    let checked = operator.is_some();
    if let Some(op) = operator {
        let built;
        let op = match op {
            Some(op) => op,
            None => {
                built = Operator::for_profile(profile)?;
                &built
            }
        };
        let next = op.apply(profile)?;
        for i in 0..nw {
            for j in 0..nz {
                if p.z_grid[j] < 0.0 {
                    continue;
                }
                let v = profile.value(i, j) - next.value(i, j);
                sub = sub.max(note(Condition::Subsolution, p.w_grid[i], p.z_grid[j], v, sub_tol));
            }
        }
    }

    Ok(ValidityReport {
        symmetry_max_violation: sym,
        z_monotonicity_max_violation: mono_z,
        w_monotonicity_max_violation: mono_w,
        subsolution_max_violation: sub,
        operator_checked: checked,
        tolerances: tol,
        subsolution_tolerance: sub_tol,
        pass: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub holds: bool,
    pub steps: usize,
    pub tolerance: f64,
    /// `(t, w, z, sub - f_t)` at the first violation.
    pub first_violation: Option<(usize, f64, f64, f64)>,
    /// Smallest `f_t - sub` over nodes with `z >= 0`, per step.
    pub min_gap: Vec<f64>,
}

/// Iterate `f_t = 𝒯^t f_0` and check `sub <= f_t + tolerance` on `z >= 0` for
/// every `t <= t_max`.
pub fn check_comparison(
    sub: &Profile,
    f0: &Profile,
    op: &Operator,
    t_max: usize,
    tolerance: f64,
) -> Result<ComparisonReport> {
    let p = sub.params();
    if f0.params().z_grid != p.z_grid || f0.params().w_grid != p.w_grid {
        return Err(Error::invalid("subsolution and initial profile use different grids"));
    }
    let mut first = None;
    let mut min_gap = Vec::with_capacity(t_max + 1);
    let mut f = f0.clone();
    for t in 0..=t_max {
        if t > 0 {
            f = op.apply(&f)?;
        }
        let mut gap = f64::INFINITY;
        for i in 0..p.nw() {
            for j in 0..p.nz() {
                let z = p.z_grid[j];
                if z < 0.0 {
                    continue;
                }
                let g = f.value(i, j) - sub.value(i, j);
                gap = gap.min(g);
                if first.is_none() && g < -tolerance {
                    first = Some((t, p.w_grid[i], z, -g));
                }
            }
        }
        min_gap.push(gap);
        if first.is_some() {
            break;
        }
    }
    Ok(ComparisonReport {
        holds: first.is_none(),
        steps: min_gap.len() - 1,
        tolerance,
        first_violation: first,
        min_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErosionParams {
    pub r: f64,
    pub eps: f64,
    pub d: usize,
    pub k: f64,
    pub r_max: f64,
    pub w_max: f64,
    pub delta_bound: f64,
}

pub fn erosion_params(r: f64, eps: f64, d: usize, k: f64) -> Result<ErosionParams> {
    if !(r > 1.0) || !(eps > 0.0 && eps < 1.0) || d == 0 || !(k > 0.0) {
        return Err(Error::invalid("need r > 1, 0 < eps < 1, d >= 1 and k > 0"));
    }
    let d_f = d as f64;
    Ok(ErosionParams {
        r,
        eps,
        d,
        k,
        r_max: k.powf(1.0 / d_f) * r.powf((1.0 - eps) / 2.0),
        w_max: r.powf(d_f * (1.0 - eps) / 4.0),
        delta_bound: r.powf(-eps) / 2.0,
    })
}

/// `|dist to sphere - dist to tangent plane|` for a point `x` near a vertex at
/// signed distance `z_v` inside the sphere of radius `r` centred at the origin,
/// with the vertex on the first axis.
pub fn curvature_discrepancy(r: f64, x: &[f64]) -> f64 {
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let to_sphere = r - norm;
    let to_plane = r - x[0];
    (to_sphere - to_plane).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErosionReport {
    pub params: ErosionParams,
    pub tau: f64,
    pub t_max: usize,
    pub tolerance: f64,
    pub holds: bool,
    /// Largest `f_t(w, z - tΔ) - g_t(w, ρ)` over all nodes and steps.
    pub max_violation: f64,
    /// `(t, w, rho, amount)`.
    pub first_violation: Option<(usize, f64, f64, f64)>,
    /// Crossing radius of the lightest weight row for `t = 0..=t_max`.
    pub crossing: Vec<f64>,
    pub recession_per_step: f64,
    /// Smallest per-step shift for which domination holds up to `t_max`.
    pub required_delta: f64,
}

/// The grids for one erosion run: radial on `[0, r + Z]`, and a half-space
/// grid with the same spacing wide enough for every shifted lookup.
pub fn erosion_grids(tau: f64, ep: &ErosionParams, t_max: usize) -> Result<(MeanFieldParams, MeanFieldParams)> {
    if ep.d != 2 {
        return Err(Error::Geometry {
            expected: "erosion checks in two dimensions",
        });
    }
    let radial = MeanFieldParams::radial(tau, ep.k, ep.w_max, ep.r)?;
    let h = radial.spacing();
    let rho_max = *radial.z_grid.last().unwrap();
    let reach = ep.r.max(rho_max - ep.r + t_max as f64 * ep.delta_bound);
    let m = (reach / h).ceil() as usize + 2;
    let half = MeanFieldParams::new(2, tau, ep.k, ep.w_max, radial.w_grid.clone(), symmetric_grid(h, m))?;
    Ok((radial, half))
}

/// Estimated node-wise error of the operator in probability units: the
/// largest gap between the precomputed map and adaptive quadrature on a few
/// nodes of `f`, pushed through `Φ`.
pub fn operator_error(op: &Operator, f: &Profile) -> Result<f64> {
    let p = f.params();
    let mu = op.advantages(f)?;
    let nz = p.nz();
    let mut worst: f64 = 0.0;
    let rows = [0, p.nw() / 2, p.nw() - 1];
    for &i in &rows {
        for j in (0..nz).step_by((nz / 9).max(1)) {
            let (w, z) = (p.w_grid[i], p.z_grid[j]);
            let direct = match f.geometry() {
                Geometry::HalfSpace => meanfield::advantage_halfspace(f, w, z)?,
                Geometry::Radial { .. } => meanfield::advantage_radial(f, w, z)?,
            };
            let gap = (mu[i * nz + j] - direct.mu).abs() + direct.quad_error_estimate;
            // Φ' <= 1/√π
            worst = worst.max(gap / (2.0 * lambda_of_w(w, p)).sqrt() / PI.sqrt());
        }
    }
    Ok(worst)
}

/// Largest `f(w_i, r - ρ_j - shift) - g(w_i, ρ_j)` over all nodes.
fn domination_gap(g: &Profile, f: &Profile, r: f64, shift: f64) -> (f64, usize, usize) {
    let p = g.params();
    let mut worst = (f64::NEG_INFINITY, 0, 0);
    for (i, &w) in p.w_grid.iter().enumerate() {
        for (j, &rho) in p.z_grid.iter().enumerate() {
            let v = f.eval(w, r - rho - shift) - g.value(i, j);
            if v > worst.0 {
                worst = (v, i, j);
            }
        }
    }
    worst
}

/// Compare the radial iteration from the ball indicator with the shifted
/// half-space iteration: `g_t(w, ρ) >= f_t(w, r - ρ - tΔ)` with `Δ = r^{-ε}/2`.
pub fn check_erosion_domination(r: f64, eps: f64, tau: f64, k: f64, t_max: usize) -> Result<ErosionReport> {
    let ep = erosion_params(r, eps, 2, k)?;
    let (rp, hp) = erosion_grids(tau, &ep, t_max)?;
    let radial_op = Operator::new(&rp, Geometry::Radial { r })?;
    let half_op = Operator::new(&hp, Geometry::HalfSpace)?;
    let mut g = Profile::ball_indicator(rp, r)?;
    let mut f = Profile::halfspace_indicator(hp)?;
    let tolerance = (10.0 * operator_error(&radial_op, &g)?.max(operator_error(&half_op, &f)?)).max(1e-9);

    let delta = ep.delta_bound;
    let mut max_violation = f64::NEG_INFINITY;
    let mut first = None;
    let mut crossing = Vec::with_capacity(t_max + 1);
    let mut required: f64 = 0.0;
    for t in 0..=t_max {
        if t > 0 {
            g = radial_op.apply(&g)?;
            f = half_op.apply(&f)?;
        }
        crossing.push(crossing_radius(&g).unwrap_or(f64::NAN));
        let (gap, i, j) = domination_gap(&g, &f, r, t as f64 * delta);
        max_violation = max_violation.max(gap);
        if first.is_none() && gap > tolerance {
            let p = g.params();
            first = Some((t, p.w_grid[i], p.z_grid[j], gap));
        }
        if t > 0 {
            required = required.max(required_shift(&g, &f, r, tolerance) / t as f64);
        }
    }
    let recession_per_step = (crossing[0] - crossing[t_max]) / t_max.max(1) as f64;
    Ok(ErosionReport {
        params: ep,
        tau,
        t_max,
        tolerance,
        holds: first.is_none(),
        max_violation,
        first_violation: first,
        crossing,
        recession_per_step,
        required_delta: required,
    })
}

/// Smallest shift `s` with `g >= f(·, · - s) - tol` everywhere, by bisection.
fn required_shift(g: &Profile, f: &Profile, r: f64, tol: f64) -> f64 {
    if domination_gap(g, f, r, 0.0).0 <= tol {
        return 0.0;
    }
    let mut hi = 1.0;
    while domination_gap(g, f, r, hi).0 > tol {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 * hi.max(1.0) {
        let m = 0.5 * (lo + hi);
        if domination_gap(g, f, r, m).0 > tol {
            lo = m;
        } else {
            hi = m;
        }
    }
    hi
}

impl ErosionReport {
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "r={}", p.r);
        let _ = writeln!(s, "eps={}", p.eps);
        let _ = writeln!(s, "tau={}", self.tau);
        let _ = writeln!(s, "k={}", p.k);
        let _ = writeln!(s, "r_max={:e}", p.r_max);
        let _ = writeln!(s, "w_max={:e}", p.w_max);
        let _ = writeln!(s, "delta_bound={:e}", p.delta_bound);
        let _ = writeln!(s, "t_max={}", self.t_max);
        let _ = writeln!(s, "tolerance={:e}", self.tolerance);
        let _ = writeln!(s, "max_violation={:e}", self.max_violation);
        let _ = writeln!(s, "recession_per_step={:e}", self.recession_per_step);
        let _ = writeln!(s, "required_delta={:e}", self.required_delta);
        let _ = writeln!(s, "holds={}", self.holds);
        s
    }

    pub fn crossing_csv(&self) -> String {
        let mut s = String::from("t,crossing_radius\n");
        for (t, c) in self.crossing.iter().enumerate() {
            let _ = writeln!(s, "{t},{c:.16e}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn cone_constant_values() {
        assert!((cone_constant(2) - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((cone_constant(3) - PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn y_scales_with_sqrt_k() {
        let a = y_coefficient(2, 3.0, 10.0);
        let b = y_coefficient(2, 3.0, 40.0);
        assert!((b / a - 2.0).abs() < 1e-12);
        assert!((y_coefficient(2, 3.0, 1.0) - 0.160_07).abs() < 1e-4);
        assert!((k_min(2, 3.0) - 122.6).abs() < 0.1);
        assert!((y_coefficient(2, 3.0, k_min(2, 3.0)) - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn delta_star_boundary() {
        assert_eq!(solve_delta_star(PI.sqrt()), None);
        assert_eq!(solve_delta_star(1.0), None);
        let mut last = 0.5;
        for y in [2.0, 3.0, 5.0, 8.0, 10.0] {
            let d = solve_delta_star(y).unwrap();
            assert!(d > last && d < 1.0);
            assert!((phi(y * (d - 0.5)) - d).abs() <= 1e-10);
            last = d;
        }
        assert!(last > 0.999);
        assert!((solve_delta_star(2.0).unwrap() - 0.809).abs() < 1e-3);
    }

    #[test]
    fn subsolution_shape() {
        let k = 1.2 * k_min(2, 3.0);
        let (spec, f) = build_subsolution(2, 3.0, k).unwrap();
        let p = f.params();
        for i in 0..p.nw() {
            assert_eq!(f.value(i, p.nz() / 2), 0.5);
        }
        assert_eq!(spec.value(p, 1.0, k.sqrt()), spec.delta_star);
        let ri = (k * 5.0).sqrt();
        assert_eq!(spec.value(p, 5.0, ri + 1.0), spec.value(p, 5.0, ri + 30.0));
        assert!((spec.value(p, 1.0, k.sqrt() * (1.0 - 1e-12)) - spec.delta_star).abs() < 1e-9);
        assert!(f.symmetry_violation() < 1e-15);
    }

    #[test]
    fn rejects_small_k() {
        assert!(build_subsolution(2, 3.0, 100.0).is_err());
    }

    #[test]
    fn erosion_param_values() {
        let e = erosion_params(100.0, 0.5, 2, 1.0).unwrap();
        assert!((e.r_max - 100f64.powf(0.25)).abs() < 1e-12);
        assert!((e.w_max - 100f64.powf(0.25)).abs() < 1e-12);
        assert!((e.delta_bound - 0.05).abs() < 1e-15);
        let q = erosion_params(400.0, 0.5, 2, 1.0).unwrap();
        assert!((q.delta_bound - e.delta_bound / 2.0).abs() < 1e-15);
        // r_max^{d/2}/k^{1/2} = w_max
        let e = erosion_params(77.0, 0.3, 3, 5.0).unwrap();
        assert!((e.r_max.powf(1.5) / 5f64.sqrt() - e.w_max).abs() < 1e-9 * e.w_max);
    }

    #[test]
    fn tangent_plane_discrepancy_bounded() {
        let e = erosion_params(100.0, 0.5, 2, 1.0).unwrap();
        // vertex on the sphere, point at lateral distance r_max
        let x = [100.0, e.r_max];
        assert!(curvature_discrepancy(100.0, &x) <= e.delta_bound);
        // the vertex sits at signed distance z_v inside the sphere; the points
        // are within r_max of it
        let mut rng = crate::seed::rng(5, crate::seed::Stream::Oracle);
        for &(r, eps) in &[(100.0, 0.5), (400.0, 0.5), (1000.0, 0.3)] {
            let e = erosion_params(r, eps, 2, 1.0).unwrap();
            for _ in 0..1000 {
                let zv: f64 = rng.random_range(0.0..e.r_max);
                let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let s: f64 = e.r_max * rng.random::<f64>().sqrt();
                let x = [r - zv + s * a.cos(), s * a.sin()];
                // the bound is leading order; the vertex may sit up to 2 r_max
                // deeper, which inflates the sagitta by r/(r - 2 r_max)
                let slack = r / (r - 2.0 * e.r_max);
                assert!(curvature_discrepancy(r, &x) <= e.delta_bound * slack + 1e-12);
            }
        }
    }
}
