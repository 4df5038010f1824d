//! Half-space advantage.
//!
//! For a profile depending on `z` only, the neighbours of weight `w'` of a
//! vertex at `z` fill the slab integral `∫ G(z') K_R(z' - z) dz'` with the
//! slice kernel `K_R(s) = V_{d-1}·(R² - s²)^{(d-1)/2}`. Against a piecewise
//! linear `G` this integral is a second difference of
//! `Ψ(b) = ∫_{-∞}^b (b - s) K_R(s) ds`, which has a closed form.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::quad::{adaptive, Rule};
use super::{kernel_mass, weight_density, AdvantageResult, MeanFieldParams, Profile};
use crate::error::{Error, Result};
use crate::girg::unit_ball_volume;

const PLAN_POINTS: usize = 8;
const DIRECT_POINTS: usize = 7;
const MAX_SPLITS: u32 = 200;

#[derive(Debug, Clone, Copy)]
pub(super) struct Kernel {
    r: f64,
    r2: f64,
    /// Exponent `(d-1)/2`.
    m: f64,
    /// `V_{d-1}`.
    c: f64,
    mass: f64,
    /// `∫_0^R (R² - t²)^m dt`.
    half_integral: f64,
}

impl Kernel {
    pub(super) fn new(d: usize, r: f64) -> Self {
        let mut k = Kernel {
            r,
            r2: r * r,
            m: (d as f64 - 1.0) / 2.0,
            c: unit_ball_volume(d - 1),
            mass: unit_ball_volume(d) * r.powi(d as i32),
            half_integral: 0.0,
        };
        k.half_integral = k.integral(r);
        k
    }

    pub(super) fn slice(&self, s: f64) -> f64 {
        if s.abs() > self.r {
            0.0
        } else {
            self.c * (self.r2 - s * s).max(0.0).powf(self.m)
        }
    }

    /// `∫_0^s (R² - t²)^m dt` for `|s| <= R`.
    fn integral(&self, s: f64) -> f64 {
        let q = (self.r2 - s * s).max(0.0);
        let (mut order, mut acc) = if self.m.fract() == 0.0 {
            (0.0, s)
        } else {
            let asin = (s / self.r).clamp(-1.0, 1.0).asin();
            (0.5, 0.5 * (s * q.sqrt() + self.r2 * asin))
        };
        while order < self.m {
            order += 1.0;
            acc = (s * q.powf(order) + 2.0 * order * self.r2 * acc) / (2.0 * order + 1.0);
        }
        acc
    }

    pub(super) fn psi(&self, b: f64) -> f64 {
        if b <= -self.r {
            0.0
        } else if b >= self.r {
            b * self.mass
        } else {
            let g0 = self.c * (self.half_integral + self.integral(b));
            let g1 = -self.c * (self.r2 - b * b).powf(self.m + 1.0) / (2.0 * (self.m + 1.0));
            b * g0 - g1
        }
    }

    /// `∫ G(z') K(z' - z) dz'` for the piecewise-linear row `g` on nodes
    /// `z0 + j·h`, constant beyond both ends.
    pub(super) fn against_row(&self, g: &[f64], z0: f64, h: f64, z: f64) -> f64 {
        let n = g.len();
        let c_first = z0 - z;
        let c_last = z0 + (n - 1) as f64 * h - z;
        let mut acc = g[0] * (self.psi(c_first + h) - self.psi(c_first)) / h
            + g[n - 1] * (self.psi(-c_last + h) - self.psi(-c_last)) / h;
        // interior hats within reach
        let lo = (((z - self.r - h - z0) / h).floor().max(1.0)) as usize;
        let hi = ((((z + self.r + h - z0) / h).ceil()) as usize).min(n - 2);
        for (m, &gm) in g.iter().enumerate().take(hi + 1).skip(lo) {
            if gm == 0.0 {
                continue;
            }
            let c = z0 + m as f64 * h - z;
            acc += gm * self.hat(c, h);
        }
        acc
    }

    /// Integral of the unit hat of half-width `h` centred at offset `c`.
    fn hat(&self, c: f64, h: f64) -> f64 {
        let c = c.abs();
        if c - h >= self.r {
            return 0.0;
        }
        (self.psi(c + h) - 2.0 * self.psi(c) + self.psi(c - h)) / h
    }
}

/// Per-row advantage map; the convolution part is applied by FFT.
pub(super) struct Plan {
    nw: usize,
    nz: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `spectra[(i * nw + r) * len ..]`, already divided by `len`.
    spectra: Vec<Complex64>,
    /// Weights of the first and last node, `[(i * nw + r) * nz + j]`.
    left: Vec<f64>,
    right: Vec<f64>,
}

/// Gauss points `(w', weight, row, fraction)` of `∫_1^W ρ(w')·(·) dw'`, with
/// the weight already multiplied by `ρ(w')` and the log-space Jacobian.
pub(super) fn weight_points(params: &MeanFieldParams, rule: &Rule) -> Vec<(f64, f64, usize, f64)> {
    let g = &params.w_grid;
    let mut pts = Vec::new();
    for r in 0..g.len().saturating_sub(1) {
        let (a, b) = (g[r].ln(), g[r + 1].ln());
        for (u, wt) in rule.on(a, b) {
            let w = u.exp();
            pts.push((w, wt * w * weight_density(w, params.tau), r, (u - a) / (b - a)));
        }
    }
    pts
}

impl Plan {
    pub(super) fn new(params: &MeanFieldParams) -> Self {
        let nw = params.nw();
        let nz = params.nz();
        let h = params.spacing();
        let len = 2 * nz;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let rule = Rule::new(PLAN_POINTS);
        let points = weight_points(params, &rule);
        let span = nz as i64;

        let rows: Vec<(Vec<Complex64>, Vec<f64>, Vec<f64>)> = params
            .w_grid
            .par_iter()
            .map(|&w| {
                let mut coef = vec![0.0; nw * len];
                let mut left = vec![0.0; nw * nz];
                let mut right = vec![0.0; nw * nz];
                let mut psi = vec![0.0; 2 * nz + 1];
                let mut c = vec![0.0; nz];
                for &(w2, weight, r, t) in &points {
                    let kernel = Kernel::new(params.d, params.edge_radius(w, w2));
                    // Ψ(δ·h) for δ in [-nz, nz]
                    for (slot, delta) in psi.iter_mut().zip(-span..=span) {
                        *slot = kernel.psi(delta as f64 * h);
                    }
                    let at = |delta: i64| psi[(delta + span) as usize];
                    for (delta, slot) in c.iter_mut().enumerate() {
                        let dl = delta as i64;
                        *slot = if (dl - 1) as f64 * h >= kernel.r {
                            0.0
                        } else {
                            (at(dl + 1) - 2.0 * at(dl) + at(dl - 1)) / h
                        };
                    }
                    for (row, share) in [(r, weight * (1.0 - t)), (r + 1, weight * t)] {
                        if share == 0.0 {
                            continue;
                        }
                        let out = &mut coef[row * len..(row + 1) * len];
                        out[0] += share * c[0];
                        for delta in 1..nz {
                            let v = share * c[delta];
                            out[delta] += v;
                            out[len - delta] += v;
                        }
                        let l = &mut left[row * nz..(row + 1) * nz];
                        let rt = &mut right[row * nz..(row + 1) * nz];
                        for j in 0..nz {
                            let jl = j as i64;
                            let v = share * (at(1 - jl) - at(-jl)) / h;
                            l[j] += v;
                            rt[nz - 1 - j] += v;
                        }
                    }
                }
                let scale = 1.0 / len as f64;
                let mut spectra: Vec<Complex64> =
                    coef.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
                for chunk in spectra.chunks_mut(len) {
                    forward.process(chunk);
                }
                (spectra, left, right)
            })
            .collect();

        let mut spectra = Vec::with_capacity(nw * nw * len);
        let mut left = Vec::with_capacity(nw * nw * nz);
        let mut right = Vec::with_capacity(nw * nw * nz);
        for (s, l, r) in rows {
            spectra.extend(s);
            left.extend(l);
            right.extend(r);
        }
        Plan {
            nw,
            nz,
            len,
            forward,
            inverse,
            spectra,
            left,
            right,
        }
    }

    /// Advantage at every node for the signed profile `g = 2f - 1`.
    pub(super) fn apply(&self, g: &[f64]) -> Vec<f64> {
        let (nw, nz, len) = (self.nw, self.nz, self.len);
        let mut spectra = vec![Complex64::new(0.0, 0.0); nw * len];
        for (r, chunk) in spectra.chunks_mut(len).enumerate() {
            let row = &g[r * nz..(r + 1) * nz];
            for j in 1..nz - 1 {
                chunk[j].re = row[j];
            }
            self.forward.process(chunk);
        }
        let mut out = vec![0.0; nw * nz];
        out.par_chunks_mut(nz).enumerate().for_each(|(i, dst)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            for r in 0..nw {
                let s = &self.spectra[(i * nw + r) * len..(i * nw + r + 1) * len];
                let x = &spectra[r * len..(r + 1) * len];
                for ((a, s), x) in acc.iter_mut().zip(s).zip(x) {
                    *a += s * x;
                }
            }
            self.inverse.process(&mut acc);
            for (d, a) in dst.iter_mut().zip(&acc) {
                *d = a.re;
            }
            for r in 0..nw {
                let first = g[r * nz];
                let last = g[r * nz + nz - 1];
                let base = (i * nw + r) * nz;
                let l = &self.left[base..base + nz];
                let rt = &self.right[base..base + nz];
                for j in 0..nz {
                    dst[j] += first * l[j] + last * rt[j];
                }
            }
        });
        out
    }
}

/// Integrate `h(w')` weighted by `ρ` over `[1, W]`, interval by interval in
/// `ln w'`, with absolute tolerance `tol · (mass of the interval)`.
pub(super) fn integrate_weights<F>(profile: &Profile, w: f64, z: f64, mut h: F) -> Result<(f64, f64)>
where
    F: FnMut(f64, usize, f64) -> f64,
{
    let p = profile.params();
    let g = &p.w_grid;
    let rule = Rule::new(DIRECT_POINTS);
    let mut value = 0.0;
    let mut error = 0.0;
    for r in 0..g.len().saturating_sub(1) {
        let (a, b) = (g[r].ln(), g[r + 1].ln());
        let share = kernel_mass(w, p) * interval_share(p, g[r], g[r + 1]);
        let est = adaptive(&rule, a, b, p.quad_tol, p.quad_tol * share, MAX_SPLITS, |u| {
            let w2 = u.exp();
            w2 * weight_density(w2, p.tau) * h(w2, r, (u - a) / (b - a))
        });
        if !est.converged {
            return Err(Error::Quadrature {
                w,
                z,
                estimate: est.error,
            });
        }
        value += est.value;
        error += est.error;
    }
    Ok((value, error))
}

/// Fraction of `∫_1^W w' ρ(w') dw'` carried by `[a, b]`.
fn interval_share(p: &MeanFieldParams, a: f64, b: f64) -> f64 {
    let e = 2.0 - p.tau;
    (a.powf(e) - b.powf(e)) / (1.0 - p.w_cap.powf(e))
}

pub(super) fn advantage(profile: &Profile, w: f64, z: f64) -> Result<AdvantageResult> {
    let p = profile.params();
    let h = p.spacing();
    let z0 = p.z_grid[0];
    let signed: Vec<Vec<f64>> = (0..p.nw())
        .map(|i| profile.row(i).iter().map(|v| 2.0 * v - 1.0).collect())
        .collect();
    let (mu, err) = integrate_weights(profile, w, z, |w2, r, t| {
        let kernel = Kernel::new(p.d, p.edge_radius(w, w2));
        let a = kernel.against_row(&signed[r], z0, h, z);
        let b = if t == 0.0 { 0.0 } else { kernel.against_row(&signed[r + 1], z0, h, z) };
        a * (1.0 - t) + b * t
    })?;
    Ok(AdvantageResult::from_mu(mu, kernel_mass(w, p), err))
}

/// `∫_a^b q(s) ds` for `q` piecewise smooth between grid nodes.
fn along_z<F: FnMut(f64) -> f64>(p: &MeanFieldParams, a: f64, b: f64, mut q: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let rule = Rule::new(DIRECT_POINTS);
    let h = p.spacing();
    let z0 = p.z_grid[0];
    let mut cuts = vec![a];
    let first = ((a - z0) / h).floor() as i64 + 1;
    let last = ((b - z0) / h).ceil() as i64 - 1;
    for j in first..=last {
        let x = z0 + j as f64 * h;
        if x > a && x < b {
            cuts.push(x);
        }
    }
    cuts.push(b);
    cuts.windows(2)
        .map(|c| adaptive(&rule, c[0], c[1], 1e-11, 1e-13 * (b - a), 100, &mut q).value)
        .sum()
}

/// Advantage contributed by the region `B` of the comparison argument: the
/// cap `{z' >= r_I + z/2}` of the influence ball of the vertex, together with
/// its mirror image through the interface.
pub fn blue_region_advantage(profile: &Profile, w: f64, z: f64) -> Result<f64> {
    if profile.geometry() != super::Geometry::HalfSpace {
        return Err(Error::Geometry {
            expected: "a half-space profile",
        });
    }
    if z < 0.0 {
        return Err(Error::invalid("the region split needs z >= 0"));
    }
    let p = profile.params();
    let ri = p.influence_radius(w);
    let ball = Kernel::new(p.d, ri);
    let cut = ri + z / 2.0;
    let (value, _) = integrate_weights(profile, w, z, |w2, _, _| {
        let r = p.edge_radius(w, w2);
        let r2 = r * r;
        let signed = |s: f64| 2.0 * profile.eval(w2, s) - 1.0;
        let cap = along_z(p, cut, z + ri, |s| signed(s) * ball.slice(s - z));
        let mirror = along_z(p, -z - ri, -cut, |s| {
            let a = ri * ri - (s + z) * (s + z);
            let b = r2 - (s - z) * (s - z);
            if a < 0.0 || b < 0.0 {
                return 0.0;
            }
            signed(s) * ball.c * a.min(b).powf(ball.m)
        });
        cap + mirror
    })?;
    Ok(value)
}

/// Advantage contributed by everything outside [`blue_region_advantage`]'s
/// region.
pub fn red_region_advantage(profile: &Profile, w: f64, z: f64) -> Result<f64> {
    let total = super::advantage_halfspace(profile, w, z)?.mu;
    Ok(total - blue_region_advantage(profile, w, z)?)
}
