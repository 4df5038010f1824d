//! Radial advantage in the plane.
//!
//! With `A(s)` the area of the disk `{|x| <= s}` inside the edge disk of
//! radius `R` around a point at radius `rho`, the advantage against a radial
//! profile is `∫ G(s) A'(s) ds`. Integrating by parts against a piecewise
//! linear `G` leaves the cell integrals `J_b = ∫ A` over grid cells.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::halfspace::{integrate_weights, weight_points};
use super::quad::Rule;
use super::{kernel_mass, AdvantageResult, MeanFieldParams, Profile};
use crate::error::Result;

const LENS_POINTS: usize = 8;
const PLAN_POINTS: usize = 8;

/// Area of `{|x| <= s} ∩ {|x - P| <= R}` with `|P| = rho`.
pub(super) fn lens_area(s: f64, rho: f64, r: f64) -> f64 {
    if s <= 0.0 || rho >= s + r {
        return 0.0;
    }
    if rho <= (s - r).abs() {
        let m = s.min(r);
        return PI * m * m;
    }
    let a1 = ((rho * rho + s * s - r * r) / (2.0 * rho * s)).clamp(-1.0, 1.0).acos();
    let a2 = ((rho * rho + r * r - s * s) / (2.0 * rho * r)).clamp(-1.0, 1.0).acos();
    let k = (-rho + s + r) * (rho + s - r) * (rho - s + r) * (rho + s + r);
    s * s * a1 + r * r * a2 - 0.5 * k.max(0.0).sqrt()
}

/// `∫_a^b A(s) ds`, closed form away from the lens range.
fn cell_integral(rule: &Rule, a: f64, b: f64, rho: f64, r: f64) -> f64 {
    let mut cuts = vec![a];
    for k in [(rho - r).abs(), rho + r] {
        if k > a && k < b {
            cuts.push(k);
        }
    }
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|c| {
            let (lo, hi) = (c[0], c[1]);
            let mid = 0.5 * (lo + hi);
            if mid >= rho + r {
                PI * r * r * (hi - lo)
            } else if mid <= rho - r {
                0.0
            } else if mid <= r - rho {
                PI * (hi.powi(3) - lo.powi(3)) / 3.0
            } else {
                rule.integrate(lo, hi, |s| lens_area(s, rho, r))
            }
        })
        .sum()
}

/// Coefficients `c_b` with `∫ G A' = Σ_b c_b G_b` for `G` linear between the
/// nodes `s0 + b·h` (`b < n`) and constant beyond. Returns the first index and
/// the band of possibly non-zero coefficients.
pub(super) fn coefficients(rule: &Rule, rho: f64, r: f64, s0: f64, h: f64, n: usize) -> (usize, Vec<f64>) {
    let full = PI * r * r;
    let node = |x: f64| (x - s0) / h;
    let b_lo = if rho > r {
        node(rho - r).floor().clamp(0.0, (n - 1) as f64) as usize
    } else {
        0
    };
    let b_top = node(rho + r).ceil().clamp(0.0, (n - 1) as f64) as usize;
    let b_lo = b_lo.min(b_top);
    let cells: Vec<f64> = (b_lo..b_top.min(n - 1))
        .map(|b| {
            let a = s0 + b as f64 * h;
            cell_integral(rule, a, a + h, rho, r)
        })
        .collect();
    let j = |b: usize| -> f64 {
        if b < b_lo {
            0.0
        } else if b >= b_top {
            full * h
        } else {
            cells[b - b_lo]
        }
    };
    let band = (b_lo..=b_top)
        .map(|b| {
            if b == n - 1 {
                full - j(n - 2) / h
            } else if b == 0 {
                j(0) / h
            } else {
                (j(b) - j(b - 1)) / h
            }
        })
        .collect();
    (b_lo, band)
}

/// Sparse advantage map: for every output node and source row, a band of
/// coefficients.
pub(super) struct Plan {
    nw: usize,
    nz: usize,
    /// `[(i * nz + j) * nw + r]`
    bands: Vec<(usize, Vec<f64>)>,
}

impl Plan {
    pub(super) fn new(params: &MeanFieldParams) -> Self {
        let nw = params.nw();
        let nz = params.nz();
        let h = params.spacing();
        let s0 = params.z_grid[0];
        let lens = Rule::new(LENS_POINTS);
        let points = weight_points(params, &Rule::new(PLAN_POINTS));

        let nodes: Vec<(f64, f64)> = params
            .w_grid
            .iter()
            .flat_map(|&w| params.z_grid.iter().map(move |&z| (w, z)))
            .collect();
        let bands = nodes
            .par_iter()
            .flat_map_iter(|&(w, rho)| {
                let mut dense = vec![0.0; nw * nz];
                let mut lo = vec![usize::MAX; nw];
                let mut hi = vec![0usize; nw];
                for &(w2, weight, r, t) in &points {
                    let (start, band) = coefficients(&lens, rho, params.edge_radius(w, w2), s0, h, nz);
                    for (row, share) in [(r, weight * (1.0 - t)), (r + 1, weight * t)] {
                        if share == 0.0 {
                            continue;
                        }
                        lo[row] = lo[row].min(start);
                        hi[row] = hi[row].max(start + band.len());
                        let out = &mut dense[row * nz + start..row * nz + start + band.len()];
                        for (o, c) in out.iter_mut().zip(&band) {
                            *o += share * c;
                        }
                    }
                }
                (0..nw)
                    .map(|row| {
                        if lo[row] == usize::MAX {
                            (0, Vec::new())
                        } else {
                            (lo[row], dense[row * nz + lo[row]..row * nz + hi[row]].to_vec())
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Plan { nw, nz, bands }
    }

    pub(super) fn apply(&self, g: &[f64]) -> Vec<f64> {
        let (nw, nz) = (self.nw, self.nz);
        (0..nw * nz)
            .into_par_iter()
            .map(|node| {
                let mut acc = 0.0;
                for r in 0..nw {
                    let (start, band) = &self.bands[node * nw + r];
                    let row = &g[r * nz + start..r * nz + start + band.len()];
                    acc += band.iter().zip(row).map(|(c, x)| c * x).sum::<f64>();
                }
                acc
            })
            .collect()
    }
}

pub(super) fn advantage(profile: &Profile, w: f64, rho: f64) -> Result<AdvantageResult> {
    let p = profile.params();
    let h = p.spacing();
    let s0 = p.z_grid[0];
    let nz = p.nz();
    let lens = Rule::new(LENS_POINTS);
    let signed: Vec<Vec<f64>> = (0..p.nw())
        .map(|i| profile.row(i).iter().map(|v| 2.0 * v - 1.0).collect())
        .collect();
    let against = |row: &[f64], r: f64| {
        let (start, band) = coefficients(&lens, rho, r, s0, h, nz);
        band.iter().zip(&row[start..]).map(|(c, x)| c * x).sum::<f64>()
    };
    let (mu, err) = integrate_weights(profile, w, rho, |w2, r, t| {
        let radius = p.edge_radius(w, w2);
        let a = against(&signed[r], radius);
        let b = if t == 0.0 { 0.0 } else { against(&signed[r + 1], radius) };
        a * (1.0 - t) + b * t
    })?;
    Ok(AdvantageResult::from_mu(mu, kernel_mass(w, p), err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::quad::adaptive;

    /// Length of the circle of radius `s` inside the edge disk.
    fn arc(rho: f64, s: f64, r: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if rho == 0.0 {
            return if s <= r { 2.0 * PI * s } else { 0.0 };
        }
        let c = (rho * rho + s * s - r * r) / (2.0 * rho * s);
        if c <= -1.0 {
            2.0 * PI * s
        } else if c >= 1.0 {
            0.0
        } else {
            2.0 * s * c.acos()
        }
    }

    #[test]
    fn lens_limits() {
        assert_eq!(lens_area(1.0, 5.0, 2.0), 0.0);
        assert!((lens_area(1.0, 0.5, 3.0) - PI).abs() < 1e-14);
        assert!((lens_area(10.0, 2.0, 3.0) - 9.0 * PI).abs() < 1e-12);
        // derivative of the area is the arc length
        for (s, rho, r) in [(2.0, 3.0, 1.5), (0.7, 0.5, 1.0), (4.0, 4.5, 2.0)] {
            let e = 1e-6;
            let d = (lens_area(s + e, rho, r) - lens_area(s - e, rho, r)) / (2.0 * e);
            assert!((d - arc(rho, s, r)).abs() < 1e-6, "{s} {rho} {r}");
        }
    }

    #[test]
    fn coefficients_match_arc_integral() {
        let rule = Rule::new(LENS_POINTS);
        let fine = Rule::new(10);
        let (s0, h, n) = (0.0, 0.4, 60);
        let g: Vec<f64> = (0..n).map(|b| (b as f64 * 0.37).sin() * 0.8).collect();
        let lin = |s: f64| {
            let x = ((s - s0) / h).clamp(0.0, (n - 1) as f64);
            let b = (x.floor() as usize).min(n - 2);
            let t = x - b as f64;
            g[b] * (1.0 - t) + g[b + 1] * t
        };
        for (rho, r) in [(5.0, 1.3), (0.0, 2.0), (0.9, 2.5), (20.0, 7.0), (23.0, 1.0), (3.3, 3.3)] {
            let (start, band) = coefficients(&rule, rho, r, s0, h, n);
            let via: f64 = band.iter().zip(&g[start..]).map(|(c, x)| c * x).sum();
            let lo = (rho - r).max(0.0);
            let mut cuts: Vec<f64> = (0..n).map(|b| b as f64 * h).filter(|&x| x > lo && x < rho + r).collect();
            cuts.insert(0, lo);
            cuts.push(rho + r);
            let oracle: f64 = cuts
                .windows(2)
                .map(|c| adaptive(&fine, c[0], c[1], 1e-12, 1e-13, 300, |s| lin(s) * arc(rho, s, r)).value)
                .sum();
            assert!((via - oracle).abs() < 1e-7 * PI * r * r, "rho={rho} r={r}: {via} vs {oracle}");
            let total: f64 = band.iter().sum();
            assert!((total - PI * r * r).abs() < 1e-9 * PI * r * r);
        }
    }
}
