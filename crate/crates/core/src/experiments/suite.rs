use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanfield::{survival_margin, MeanFieldParams, Operator, Profile};
use crate::theory::{
    build_subsolution_on, check_comparison, check_erosion_domination, check_valid_with, k_min, ComparisonReport,
    ErosionReport, SubsolutionSpec, ValidityReport, ValidityTolerances,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub d: usize,
    pub tau: f64,
    /// Defaults to `1.2·k_min`.
    pub k: Option<f64>,
    pub w_cap: f64,
    pub iterations: usize,
    pub conv_tol: f64,
    pub comparison_steps: usize,
    pub comparison_tol: f64,
    /// Empty skips the erosion runs.
    pub erosion_radii: Vec<f64>,
    pub erosion_eps: f64,
    pub erosion_steps: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            d: 2,
            tau: 3.0,
            k: None,
            w_cap: 1000.0,
            iterations: 200,
            conv_tol: 1e-6,
            comparison_steps: 100,
            comparison_tol: 1e-9,
            erosion_radii: vec![50.0, 100.0, 200.0],
            erosion_eps: 0.5,
            erosion_steps: 20,
        }
    }
}

impl SuiteConfig {
    pub fn resolved_k(&self) -> f64 {
        self.k.unwrap_or_else(|| 1.2 * k_min(self.d, self.tau))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErosionSeries {
    pub r: f64,
    pub report: ErosionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub k: f64,
    pub subsolution: SubsolutionSpec,
    pub iterations: usize,
    pub last_delta: f64,
    pub converged: bool,
    pub survival_margin: f64,
    /// `δ* - 1/2 - 0.01`
    pub margin_target: f64,
    pub validity: ValidityReport,
    pub comparison: ComparisonReport,
    pub erosion: Vec<ErosionSeries>,
    pub files: Vec<PathBuf>,
}

impl SuiteReport {
    /// `(name, passed)` for each threshold the suite checks.
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let mut out = vec![
            ("halfspace_converged", self.converged),
            ("survival_margin", self.survival_margin >= self.margin_target),
            ("subsolution_valid", self.validity.pass),
            ("comparison", self.comparison.holds),
        ];
        if !self.erosion.is_empty() {
            out.push(("erosion_domination", self.erosion.iter().all(|e| e.report.holds)));
            let rec: Vec<f64> = self.erosion.iter().map(|e| e.report.recession_per_step).collect();
            out.push(("erosion_recession_shrinks", rec.windows(2).all(|w| w[1] <= w[0]) && rec[0] > *rec.last().unwrap()));
            out.push((
                "erosion_monotone",
                self.erosion.iter().all(|e| e.report.crossing.windows(2).all(|w| w[1] <= w[0])),
            ));
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.1)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "k={}", self.k);
        let _ = writeln!(s, "delta_star={}", self.subsolution.delta_star);
        let _ = writeln!(s, "iterations={}", self.iterations);
        let _ = writeln!(s, "last_delta={:e}", self.last_delta);
        let _ = writeln!(s, "survival_margin={}", self.survival_margin);
        let _ = writeln!(s, "margin_target={}", self.margin_target);
        for e in &self.erosion {
            let _ = writeln!(
                s,
                "erosion r={} holds={} recession_per_step={:e} required_delta={:e} delta_bound={:e}",
                e.r, e.report.holds, e.report.recession_per_step, e.report.required_delta, e.report.params.delta_bound
            );
        }
        for (name, ok) in self.checks() {
            let _ = writeln!(s, "{name}={}", if ok { "pass" } else { "fail" });
        }
        s
    }
}

/// Half-space convergence, subsolution validity and comparison, and the
/// erosion series; artifacts go to `out`.
pub fn run_meanfield_suite(cfg: &SuiteConfig, out: &Path) -> Result<SuiteReport> {
    if cfg.iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    fs::create_dir_all(out)?;
    let k = cfg.resolved_k();
    let params = MeanFieldParams::halfspace(cfg.d, cfg.tau, k, cfg.w_cap)?;
    let op = Operator::new(&params, crate::meanfield::Geometry::HalfSpace)?;

    let f0 = Profile::halfspace_indicator(params.clone())?;
    let it = op.iterate(&f0, cfg.iterations, cfg.conv_tol)?;
    let converged = it.converged(cfg.conv_tol);
    let margin = survival_margin(&it.profile)?;
    let mut files = Vec::new();
    let profile_path = out.join("halfspace_profile.csv");
    it.profile.write_csv(&profile_path)?;
    files.push(profile_path);

    let (spec, sub) = build_subsolution_on(params)?;
    let validity = check_valid_with(&sub, Some(Some(&op)), ValidityTolerances::default())?;
    let comparison = check_comparison(&sub, &f0, &op, cfg.comparison_steps, cfg.comparison_tol)?;

    let mut text = validity.to_key_value();
    let _ = writeln!(text, "comparison_holds={}", comparison.holds);
    let _ = writeln!(text, "comparison_steps={}", comparison.steps);
    if let Some((t, w, z, a)) = comparison.first_violation {
        let _ = writeln!(text, "comparison_first_violation=t:{t},w:{w:e},z:{z:e},amount:{a:e}");
    }
    let report_path = out.join("validity_report.txt");
    fs::write(&report_path, text)?;
    files.push(report_path);
    let violations_path = out.join("validity_violations.csv");
    fs::write(&violations_path, validity.violations_csv())?;
    files.push(violations_path);

    let mut erosion = Vec::new();
    for &r in &cfg.erosion_radii {
        let report = check_erosion_domination(r, cfg.erosion_eps, cfg.tau, k, cfg.erosion_steps)?;
        erosion.push(ErosionSeries { r, report });
    }
    if !erosion.is_empty() {
        let mut csv = String::from("r,t,crossing_radius,delta_bound\n");
        for e in &erosion {
            for (t, c) in e.report.crossing.iter().enumerate() {
                let _ = writeln!(csv, "{:.16e},{t},{c:.16e},{:.16e}", e.r, e.report.params.delta_bound);
            }
        }
        let path = out.join("erosion_series.csv");
        fs::write(&path, csv)?;
        files.push(path);
    }

    let report = SuiteReport {
        k,
        subsolution: spec,
        iterations: it.iterations,
        last_delta: it.sup_deltas.last().copied().unwrap_or(f64::NAN),
        converged,
        survival_margin: margin,
        margin_target: spec.delta_star - 0.5 - 0.01,
        validity,
        comparison,
        erosion,
        files,
    };
    let summary_path = out.join("suite_summary.txt");
    fs::write(&summary_path, report.summary())?;
    let mut report = report;
    report.files.push(summary_path);
    Ok(report)
}
