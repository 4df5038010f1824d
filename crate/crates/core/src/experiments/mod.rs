//! Survival sweeps over square sizes and degree exponents, logistic fits, and
//! the mean-field experiment driver.
//!
//! Run `r` at the `i`-th exponent and `j`-th side draws its graph and dynamics
//! from the seed `mix(seed_base, [i, j, r])`.

mod fit;
mod suite;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fit::{critical_size, fit_logistic, CriticalSize, LogisticFit, GRADIENT_TOL};
pub use suite::{run_meanfield_suite, ErosionSeries, SuiteConfig, SuiteReport};

use crate::dynamics::{
    classify_survival, default_max_steps, run_until_stable, simulate, InitialShape, OpinionConfig, RunOptions,
    SurvivalCriterion, BLUE,
};
use crate::error::{Error, Result};
use crate::girg::{build_graph, calibrate_k, GirgParams};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBase {
    pub n: usize,
    pub d: usize,
    /// Target weight-averaged degree; `k` is calibrated per exponent.
    pub avg_degree: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: SweepBase,
    pub tau_values: Vec<f64>,
    pub side_values: Vec<f64>,
    pub runs_per_point: usize,
    pub seed_base: u64,
    #[serde(default)]
    pub criterion: SurvivalCriterion,
    /// Defaults to `100·n·ln n`.
    #[serde(default)]
    pub max_steps: Option<u64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point == 0 {
            return Err(Error::invalid("runs_per_point must be at least 1"));
        }
        if let Some(t) = self.tau_values.iter().find(|t| !(**t > 2.0)) {
            return Err(Error::invalid(format!("tau must satisfy tau > 2 (got {t})")));
        }
        if self.tau_values.is_empty() || self.side_values.is_empty() {
            return Err(Error::invalid("tau_values and side_values must be non-empty"));
        }
        if let Some(s) = self.side_values.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::invalid(format!("side lengths must be positive (got {s})")));
        }
        GirgParams::new(self.base.n, self.base.d, 3.0, 1.0, 0)?;
        calibrate_k(self.base.avg_degree, self.base.d, 3.0)?;
        Ok(())
    }

    pub fn from_json(path: &Path) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn run_seed(&self, tau_idx: usize, side_idx: usize, run: usize) -> u64 {
        seed::mix(self.seed_base, &[tau_idx as u64, side_idx as u64, run as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub side: f64,
    pub survived: u32,
    /// Converged runs.
    pub runs: u32,
    pub non_converged: u32,
}

impl CurvePoint {
    pub fn p_hat(&self) -> f64 {
        if self.runs == 0 {
            f64::NAN
        } else {
            self.survived as f64 / self.runs as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    pub tau: f64,
    pub k: f64,
    pub points: Vec<CurvePoint>,
}

impl SurvivalCurve {
    pub fn non_converged(&self) -> u32 {
        self.points.iter().map(|p| p.non_converged).sum()
    }
}

/// `Some(survived)` for a converged run, `None` otherwise.
fn one_run(cfg: &SweepConfig, k: f64, tau: f64, side: f64, seed: u64) -> Result<Option<bool>> {
    let params = GirgParams::new(cfg.base.n, cfg.base.d, tau, k, seed)?;
    let graph = build_graph(&params)?;
    let opts = RunOptions {
        max_steps: cfg.max_steps.unwrap_or_else(|| default_max_steps(graph.n())),
        criterion: cfg.criterion,
    };
    // a square covering the whole torus is the all-blue configuration
    let (config, stats) = if side >= graph.side_length() {
        let mut config = OpinionConfig::from_spins(&graph, vec![BLUE; graph.n()])?;
        let mut rng = seed::rng(seed, seed::Stream::Dynamics);
        let stats = run_until_stable(&graph, &mut config, &mut rng, &opts)?;
        (config, stats)
    } else {
        simulate(&graph, &InitialShape::Square { side }, seed, &opts)?
    };
    Ok(stats.stable.then(|| classify_survival(&graph, &config, &cfg.criterion)))
}

pub fn survival_sweep(cfg: &SweepConfig) -> Result<Vec<SurvivalCurve>> {
    cfg.validate()?;
    let ks = cfg
        .tau_values
        .iter()
        .map(|&t| calibrate_k(cfg.base.avg_degree, cfg.base.d, t))
        .collect::<Result<Vec<_>>>()?;
    let mut sides: Vec<(usize, f64)> = cfg.side_values.iter().copied().enumerate().collect();
    sides.sort_by(|a, b| a.1.total_cmp(&b.1));

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.tau_values.len())
        .flat_map(|t| (0..cfg.side_values.len()).flat_map(move |s| (0..cfg.runs_per_point).map(move |r| (t, s, r))))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(t, s, r)| one_run(cfg, ks[t], cfg.tau_values[t], cfg.side_values[s], cfg.run_seed(t, s, r)))
        .collect::<Result<Vec<_>>>()?;

    let per_point = cfg.runs_per_point;
    let per_tau = cfg.side_values.len() * per_point;
    Ok(cfg
        .tau_values
        .iter()
        .enumerate()
        .map(|(t, &tau)| SurvivalCurve {
            tau,
            k: ks[t],
            points: sides
                .iter()
                .map(|&(s, side)| {
                    let runs = &outcomes[t * per_tau + s * per_point..t * per_tau + (s + 1) * per_point];
                    CurvePoint {
                        side,
                        survived: runs.iter().filter(|o| **o == Some(true)).count() as u32,
                        runs: runs.iter().filter(|o| o.is_some()).count() as u32,
                        non_converged: runs.iter().filter(|o| o.is_none()).count() as u32,
                    }
                })
                .collect(),
        })
        .collect())
}

pub const CURVES_HEADER: &str = "tau,s,survived,runs,p_hat,non_converged";
pub const FITS_HEADER: &str = "tau,s0,b,loglik,converged,s0_se,b_se";

pub fn curves_csv(curves: &[SurvivalCurve]) -> String {
    let mut s = format!("{CURVES_HEADER}\n");
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{},{},{:.16e},{}",
                c.tau,
                p.side,
                p.survived,
                p.runs,
                p.p_hat(),
                p.non_converged
            );
        }
    }
    s
}

pub fn fits_csv(fits: &[LogisticFit]) -> String {
    let mut s = format!("{FITS_HEADER}\n");
    for f in fits {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}",
            f.tau, f.s0, f.b, f.log_likelihood, f.converged, f.s0_se, f.b_se
        );
    }
    s
}

/// Rows of a CSV file as maps from the requested columns to raw fields.
fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    let idx = columns
        .iter()
        .map(|c| header.iter().position(|h| h == c).ok_or_else(|| Error::MissingColumn(c.to_string())))
        .collect::<Result<Vec<_>>>()?;
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            idx.iter()
                .map(|&i| {
                    fields.get(i).map(|f| f.trim().to_string()).ok_or_else(|| Error::Parse {
                        path: path.to_path_buf(),
                        line: n + 2,
                        msg: format!("missing field {i}"),
                    })
                })
                .collect()
        })
        .collect()
}

fn parse<T: std::str::FromStr>(path: &Path, row: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: row + 2,
        msg: format!("cannot parse `{s}`"),
    })
}

/// Read curves written by [`curves_csv`]. `k` is not stored and reads as NaN.
pub fn read_curves(path: &Path) -> Result<Vec<SurvivalCurve>> {
    let rows = read_columns(path, &["tau", "s", "survived", "runs", "non_converged"])?;
    let mut curves: Vec<SurvivalCurve> = Vec::new();
    for (n, r) in rows.iter().enumerate() {
        let tau: f64 = parse(path, n, &r[0])?;
        let point = CurvePoint {
            side: parse(path, n, &r[1])?,
            survived: parse(path, n, &r[2])?,
            runs: parse(path, n, &r[3])?,
            non_converged: parse(path, n, &r[4])?,
        };
        match curves.last_mut() {
            Some(c) if c.tau == tau => c.points.push(point),
            _ => curves.push(SurvivalCurve {
                tau,
                k: f64::NAN,
                points: vec![point],
            }),
        }
    }
    Ok(curves)
}

pub fn read_fits(path: &Path) -> Result<Vec<LogisticFit>> {
    let rows = read_columns(path, &["tau", "s0", "b", "loglik", "converged", "s0_se", "b_se"])?;
    rows.iter()
        .enumerate()
        .map(|(n, r)| {
            Ok(LogisticFit {
                tau: parse(path, n, &r[0])?,
                s0: parse(path, n, &r[1])?,
                b: parse(path, n, &r[2])?,
                log_likelihood: parse(path, n, &r[3])?,
                converged: parse(path, n, &r[4])?,
                s0_se: parse(path, n, &r[5])?,
                b_se: parse(path, n, &r[6])?,
            })
        })
        .collect()
}
