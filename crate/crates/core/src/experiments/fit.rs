//! Binomial maximum-likelihood logistic fits `p(s) = 1/(1 + exp(-(s - s0)/b))`.
//!
//! Newton steps run in the natural coordinates `a = -s0/b`, `c = 1/b`, where
//! the log-likelihood is concave; gradient and standard errors are reported
//! in `(s0, b)`.

use serde::{Deserialize, Serialize};

use super::SurvivalCurve;

const GRID_S0: usize = 60;
const GRID_B: usize = 40;
const MAX_NEWTON: usize = 100;
pub const GRADIENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub tau: f64,
    pub s0: f64,
    pub b: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    /// From the inverse observed information; NaN when not converged.
    pub s0_se: f64,
    pub b_se: f64,
}

impl LogisticFit {
    pub fn probability(&self, s: f64) -> f64 {
        logistic((s - self.s0) / self.b)
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without cancellation.
fn ln_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// `(s, successes, trials)`
type Obs = (f64, f64, f64);

fn log_likelihood(obs: &[Obs], s0: f64, b: f64) -> f64 {
    obs.iter()
        .map(|&(s, y, n)| {
            let x = (s - s0) / b;
            y * ln_logistic(x) + (n - y) * ln_logistic(-x)
        })
        .sum()
}

/// Gradient and Hessian in `(a, c)` with `x = a + c·s`.
fn derivatives(obs: &[Obs], a: f64, c: f64) -> ([f64; 2], [f64; 3]) {
    let mut g = [0.0; 2];
    let (mut haa, mut hac, mut hcc) = (0.0, 0.0, 0.0);
    for &(s, y, n) in obs {
        let p = logistic(a + c * s);
        let r = y - n * p;
        g[0] += r;
        g[1] += r * s;
        let v = n * p * (1.0 - p);
        haa += v;
        hac += v * s;
        hcc += v * s * s;
    }
    (g, [haa, hac, hcc])
}

fn ll_ac(obs: &[Obs], a: f64, c: f64) -> f64 {
    obs.iter()
        .map(|&(s, y, n)| {
            let x = a + c * s;
            y * ln_logistic(x) + (n - y) * ln_logistic(-x)
        })
        .sum()
}

/// Gradient of the log-likelihood in `(s0, b)` from the `(a, c)` gradient.
fn natural_to_sb(g: [f64; 2], s0: f64, b: f64) -> [f64; 2] {
    // a = -s0/b, c = 1/b
    let ds0 = g[0] * (-1.0 / b);
    let db = g[0] * (s0 / (b * b)) + g[1] * (-1.0 / (b * b));
    [ds0, db]
}

fn observations(curve: &SurvivalCurve) -> Vec<Obs> {
    curve
        .points
        .iter()
        .filter(|p| p.runs > 0)
        .map(|p| (p.side, p.survived as f64, p.runs as f64))
        .collect()
}

/// Largest all-fail side and smallest all-survive side when the data are
/// perfectly separated by a threshold.
fn separation(obs: &[Obs]) -> Option<(f64, f64)> {
    let mut sorted = obs.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    if sorted.iter().any(|&(_, y, n)| y > 0.0 && y < n) {
        return None;
    }
    let fail = sorted.iter().filter(|o| o.1 == 0.0).map(|o| o.0).fold(f64::NEG_INFINITY, f64::max);
    let pass = sorted.iter().filter(|o| o.1 == o.2).map(|o| o.0).fold(f64::INFINITY, f64::min);
    (fail < pass).then_some((fail, pass))
}

pub fn fit_logistic(curve: &SurvivalCurve) -> LogisticFit {
    fit_observations(curve.tau, &observations(curve))
}

fn fit_observations(tau: f64, obs: &[Obs]) -> LogisticFit {
    let (lo, hi) = obs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), o| (l.min(o.0), h.max(o.0)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let b_min = span * 1e-3;
    let b_max = span;
    let failed = |s0: f64, b: f64| LogisticFit {
        tau,
        s0,
        b,
        log_likelihood: log_likelihood(obs, s0, b),
        converged: false,
        s0_se: f64::NAN,
        b_se: f64::NAN,
    };

    if obs.is_empty() {
        return failed(f64::NAN, f64::NAN);
    }
    if let Some((fail, pass)) = separation(obs) {
        let s0 = if fail.is_finite() && pass.is_finite() {
            0.5 * (fail + pass)
        } else if fail.is_finite() {
            fail
        } else {
            pass
        };
        return failed(s0, b_min);
    }

    let mut best = (f64::NEG_INFINITY, lo, b_max);
    for i in 0..=GRID_S0 {
        let s0 = lo - 0.25 * span + 1.5 * span * i as f64 / GRID_S0 as f64;
        for j in 0..=GRID_B {
            let b = b_min * (b_max / b_min).powf(j as f64 / GRID_B as f64);
            let ll = log_likelihood(obs, s0, b);
            if ll > best.0 {
                best = (ll, s0, b);
            }
        }
    }

    let (mut a, mut c) = (-best.1 / best.2, 1.0 / best.2);
    let mut ll = ll_ac(obs, a, c);
    for _ in 0..MAX_NEWTON {
        let (g, [haa, hac, hcc]) = derivatives(obs, a, c);
        let det = haa * hcc - hac * hac;
        if !(det > 0.0) {
            break;
        }
        // Newton direction for maximizing: H^{-1} g with H the information
        let da = (hcc * g[0] - hac * g[1]) / det;
        let dc = (haa * g[1] - hac * g[0]) / det;
        let mut t = 1.0;
        loop {
            let (na, nc) = (a + t * da, c + t * dc);
            let nl = ll_ac(obs, na, nc);
            if nc > 0.0 && nl >= ll - 1e-12 * ll.abs() {
                a = na;
                c = nc;
                ll = nl;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                break;
            }
        }
        if t < 1e-12 || (da.abs() < 1e-15 * a.abs().max(1.0) && dc.abs() < 1e-15 * c.abs().max(1e-300)) {
            break;
        }
    }

    let (s0, b) = (-a / c, 1.0 / c);
    let (g, [haa, hac, hcc]) = derivatives(obs, a, c);
    let gsb = natural_to_sb(g, s0, b);
    let converged = c > 0.0 && (gsb[0] * gsb[0] + gsb[1] * gsb[1]).sqrt() < GRADIENT_TOL;
    if !converged {
        return failed(s0, b);
    }
    // covariance of (a, c) is the inverse information; map through the
    // Jacobian of (s0, b) = (-a/c, 1/c)
    let det = haa * hcc - hac * hac;
    let (vaa, vac, vcc) = (hcc / det, -hac / det, haa / det);
    let j = [[-1.0 / c, a / (c * c)], [0.0, -1.0 / (c * c)]];
    let var = |r: &[f64; 2]| r[0] * r[0] * vaa + 2.0 * r[0] * r[1] * vac + r[1] * r[1] * vcc;
    LogisticFit {
        tau,
        s0,
        b,
        log_likelihood: log_likelihood(obs, s0, b),
        converged,
        s0_se: var(&j[0]).sqrt(),
        b_se: var(&j[1]).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSize {
    pub s0: f64,
    /// Set when the underlying fit did not converge.
    pub warning: bool,
}

pub fn critical_size(fit: &LogisticFit) -> CriticalSize {
    CriticalSize {
        s0: fit.s0,
        warning: !fit.converged,
    }
}
