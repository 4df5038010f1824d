//! Monte Carlo oracle for the advantage, shared by the integration tests.

use girg_lab::girg::unit_ball_volume;
use girg_lab::meanfield::{
    advantage_halfspace, advantage_radial, log_grid, phi, symmetric_grid, Geometry, MeanFieldParams, Profile,
};
use girg_lab::seed::{rng, Stream};
use rand::Rng;
use rand_distr::StandardNormal;

pub const SAMPLES: usize = 1_000_000;

/// One quadrature value against its Monte Carlo estimate.
#[derive(Debug, Clone)]
pub struct Case {
    pub label: String,
    pub quadrature: f64,
    pub quad_error: f64,
    pub mc: f64,
    pub mc_se: f64,
}

impl Case {
    pub fn combined_se(&self) -> f64 {
        self.mc_se.hypot(self.quad_error)
    }

    pub fn agrees(&self, sigmas: f64) -> bool {
        (self.quadrature - self.mc).abs() <= sigmas * self.combined_se()
    }
}

/// Uniform point in the d-ball of radius `r`.
fn in_ball<R: Rng>(rng: &mut R, d: usize, r: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
    let scale = r * rng.random::<f64>().powf(1.0 / d as f64) / norm;
    x.iter_mut().for_each(|c| *c *= scale);
    x
}

/// Mean and standard error of `V_d R^d (2 f(w', x') - 1)` with `w'` from the
/// weight law (zero above the cap) and `x'` uniform in the edge ball.
fn monte_carlo<R: Rng>(
    rng: &mut R,
    p: &MeanFieldParams,
    w: f64,
    centre: &[f64],
    coord: impl Fn(&[f64]) -> f64,
    f: &Profile,
) -> (f64, f64) {
    let vd = unit_ball_volume(p.d);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..SAMPLES {
        let w2 = rng.random::<f64>().powf(-1.0 / (p.tau - 1.0));
        let v = if w2 > p.w_cap {
            0.0
        } else {
            let r = (p.k * w * w2).powf(1.0 / p.d as f64);
            let dx = in_ball(rng, p.d, r);
            let x: Vec<f64> = centre.iter().zip(&dx).map(|(a, b)| a + b).collect();
            vd * r.powi(p.d as i32) * (2.0 * f.eval(w2, coord(&x)) - 1.0)
        };
        s += v;
        s2 += v * v;
    }
    let n = SAMPLES as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / (n - 1.0)).sqrt())
}

pub fn halfspace_params(d: usize, tau: f64, k: f64, w_cap: f64) -> MeanFieldParams {
    let z = 4.0 * (k * w_cap).powf(1.0 / d as f64);
    MeanFieldParams::new(d, tau, k, w_cap, log_grid(w_cap, 9), symmetric_grid(z / 60.0, 60)).unwrap()
}

/// Random half-space cases over `d ∈ {1, 2, 3}`; every fourth uses the
/// indicator profile.
pub fn halfspace_cases(seed: u64, count: usize) -> Vec<Case> {
    let mut rng = rng(seed, Stream::Oracle);
    (0..count)
        .map(|case| {
            let d = 1 + case % 3;
            let tau = rng.random_range(2.3..3.5);
            let k = rng.random_range(0.5..4.0);
            let p = halfspace_params(d, tau, k, 20.0);
            let scale = rng.random_range(0.3..3.0);
            let f = if case % 4 == 0 {
                Profile::halfspace_indicator(p.clone()).unwrap()
            } else {
                Profile::from_fn(p.clone(), Geometry::HalfSpace, |w, z| phi(z * w.powf(0.3) / scale)).unwrap()
            };
            let w = rng.random_range(1.0..20.0f64);
            let z = rng.random_range(-3.0..3.0);
            let q = advantage_halfspace(&f, w, z).unwrap();
            let mut centre = vec![0.0; d];
            centre[0] = z;
            let (mc, se) = monte_carlo(&mut rng, &p, w, &centre, |x| x[0], &f);
            Case {
                label: format!("d={d} tau={tau:.3} k={k:.3} w={w:.3} z={z:.3}"),
                quadrature: q.mu,
                quad_error: q.quad_error_estimate,
                mc,
                mc_se: se,
            }
        })
        .collect()
}

/// Random radial cases in `d = 2`; every fourth uses the ball indicator and
/// every fifth sits at the centre.
pub fn radial_cases(seed: u64, count: usize) -> Vec<Case> {
    let mut rng = rng(seed, Stream::Oracle);
    (0..count)
        .map(|case| {
            let tau = rng.random_range(2.3..3.5);
            let k = rng.random_range(0.5..4.0);
            let w_cap: f64 = 15.0;
            let r = rng.random_range(5.0..30.0);
            let h = (r + 4.0 * (k * w_cap).sqrt()) / 199.0;
            let grid: Vec<f64> = (0..200).map(|i| i as f64 * h).collect();
            let p = MeanFieldParams::new(2, tau, k, w_cap, log_grid(w_cap, 7), grid).unwrap();
            let width = rng.random_range(0.5..4.0);
            let f = if case % 4 == 0 {
                Profile::ball_indicator(p.clone(), r).unwrap()
            } else {
                Profile::from_fn(p.clone(), Geometry::Radial { r }, |w, rho| phi((r - rho) * w.powf(0.2) / width))
                    .unwrap()
            };
            let w = rng.random_range(1.0..15.0f64);
            let rho = if case % 5 == 0 { 0.0 } else { rng.random_range(0.0..r + 5.0) };
            let q = advantage_radial(&f, w, rho).unwrap();
            let (mc, se) = monte_carlo(&mut rng, &p, w, &[rho, 0.0], |x| x[0].hypot(x[1]), &f);
            Case {
                label: format!("tau={tau:.3} k={k:.3} r={r:.3} w={w:.3} rho={rho:.3}"),
                quadrature: q.mu,
                quad_error: q.quad_error_estimate,
                mc,
                mc_se: se,
            }
        })
        .collect()
}
