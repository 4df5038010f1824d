//! The `girg-lab` command line.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 for numerical failure.

mod manifest;
mod plot;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub use manifest::{sha256_file, OutputFile, RunManifest, VERSION};
pub use plot::{emit_plot_script, PlotKind};

use crate::dynamics::{
    classify_survival, default_max_steps, init_opinions, largest_blue_component, run_observed, InitialShape,
    RunOptions, SurvivalCriterion,
};
use crate::error::{Error, Result};
use crate::experiments::{
    critical_size, curves_csv, fit_logistic, fits_csv, run_meanfield_suite, survival_sweep, SuiteConfig, SweepConfig,
};
use crate::girg::{build_graph, calibrate_k, GirgParams};
use crate::meanfield::{
    crossing_radius, survival_margin, symmetric_grid, Geometry, MeanFieldParams, Operator, Profile,
};
use crate::seed;
use crate::theory::{self, build_subsolution_on, check_comparison, check_erosion_domination, check_valid_with};

#[derive(Debug, Parser)]
#[command(name = "girg-lab", version, about = "Majority dynamics on GIRGs and mean-field interface numerics")]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "GIRG_LAB_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, conflicts_with = "avg_degree", required_unless_present = "avg_degree")]
    pub k: Option<f64>,
    /// Calibrate `k` to this weight-averaged degree.
    #[arg(long)]
    pub avg_degree: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GraphArgs {
    fn params(&self) -> Result<GirgParams> {
        let k = match (self.k, self.avg_degree) {
            (Some(k), None) => k,
            (None, Some(a)) => calibrate_k(a, self.d, self.tau)?,
            _ => return Err(Error::invalid("give exactly one of --k and --avg-degree")),
        };
        GirgParams::new(self.n, self.d, self.tau, k, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeArg {
    Square,
    Ball,
    Halfspace,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryArg {
    Halfspace,
    Radial,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 3.0)]
    pub tau: f64,
    /// Defaults to 1.2·k_min.
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long, alias = "wcap", default_value_t = 1000.0)]
    pub w_cap: f64,
    /// Odd number of z nodes for half-space grids.
    #[arg(long)]
    pub z_nodes: Option<usize>,
}

impl ModelArgs {
    fn k(&self) -> Result<f64> {
        if self.d == 0 || !(self.tau > 2.0) {
            return Err(Error::invalid(format!("need d >= 1 and tau > 2 (got d = {}, tau = {})", self.d, self.tau)));
        }
        Ok(self.k.unwrap_or_else(|| 1.2 * theory::k_min(self.d, self.tau)))
    }

    fn halfspace(&self) -> Result<MeanFieldParams> {
        let mut p = MeanFieldParams::halfspace(self.d, self.tau, self.k()?, self.w_cap)?;
        if let Some(nodes) = self.z_nodes {
            if nodes < 3 || nodes % 2 == 0 {
                return Err(Error::invalid("--z-nodes must be odd and at least 3"));
            }
            let m = (nodes - 1) / 2;
            let z = *p.z_grid.last().unwrap();
            p = MeanFieldParams::new(p.d, p.tau, p.k, p.w_cap, p.w_grid, symmetric_grid(z / m as f64, m))?;
        }
        Ok(p)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph and write its edge and vertex lists.
    Generate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Run majority dynamics from an initial shape until stable.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "square")]
        shape: ShapeArg,
        #[arg(long)]
        side: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        p_blue: f64,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        snapshot_every: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Survival sweep over square sizes and exponents.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Iterate the mean-field operator from an indicator profile.
    Meanfield {
        #[arg(long, value_enum, default_value = "halfspace")]
        geometry: GeometryArg,
        #[command(flatten)]
        model: ModelArgs,
        /// Ball radius for the radial geometry.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long, alias = "conv-tol", default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the explicit subsolution on a half-space grid.
    Subsolution {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the validity conditions of a half-space profile.
    Check {
        #[arg(long)]
        profile: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Skip the operator condition.
        #[arg(long)]
        no_operator: bool,
        /// Also compare against the iterates from the half-space indicator.
        #[arg(long)]
        comparison_steps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the ball iteration with the shifted half-space iteration.
    Erosion {
        #[arg(long, num_args = 1.., default_values_t = [50.0, 100.0, 200.0])]
        r: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 3.0)]
        tau: f64,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 20)]
        t_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Half-space convergence, subsolution checks and erosion series.
    Suite {
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 1000.0)]
        w_cap: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse `argv`, run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 1;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Generate { graph, out_prefix } => generate(graph, out_prefix),
        Command::Simulate {
            graph,
            shape,
            side,
            radius,
            p_blue,
            max_steps,
            snapshot_every,
            out,
        } => simulate(graph, *shape, *side, *radius, *p_blue, *max_steps, *snapshot_every, out),
        Command::Sweep { config, out } => sweep(config, out),
        Command::Meanfield {
            geometry,
            model,
            r,
            iters,
            tol,
            out,
        } => meanfield(*geometry, model, *r, *iters, *tol, out),
        Command::Subsolution { model, out } => subsolution(model, out),
        Command::Check {
            profile,
            model,
            no_operator,
            comparison_steps,
            out,
        } => check(profile, model, *no_operator, *comparison_steps, out),
        Command::Erosion {
            r,
            eps,
            tau,
            k,
            t_max,
            out,
        } => erosion(r, *eps, *tau, *k, *t_max, out),
        Command::Suite { k, w_cap, out } => suite(*k, *w_cap, out),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    out.join("manifest.json")
}

fn generate(args: &GraphArgs, prefix: &Path) -> Result<()> {
    let params = args.params()?;
    let graph = build_graph(&params)?;
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let (edges, vertices) = graph.export(prefix)?;
    let m = RunManifest::new("generate", json!({ "graph": params_json(&params), "args": args }), Some(params.seed))
        .write(&prefix.with_extension("manifest.json"), &[edges, vertices])?;
    println!("n={} edges={} mean_degree={}", graph.n(), graph.edge_count(), 2.0 * graph.edge_count() as f64 / graph.n() as f64);
    for f in &m.outputs {
        println!("{} {}", f.sha256, f.path.display());
    }
    Ok(())
}

fn params_json(p: &GirgParams) -> serde_json::Value {
    json!({ "n": p.n, "d": p.d, "tau": p.tau, "k": p.k, "seed": p.seed })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    args: &GraphArgs,
    shape: ShapeArg,
    side: Option<f64>,
    radius: Option<f64>,
    p_blue: f64,
    max_steps: Option<u64>,
    every: Option<u64>,
    out: &Path,
) -> Result<()> {
    let params = args.params()?;
    let shape = match shape {
        ShapeArg::Square => InitialShape::Square {
            side: side.ok_or_else(|| Error::invalid("--shape square needs --side"))?,
        },
        ShapeArg::Ball => InitialShape::Ball {
            radius: radius.ok_or_else(|| Error::invalid("--shape ball needs --radius"))?,
        },
        ShapeArg::Halfspace => InitialShape::HalfSpace,
        ShapeArg::Random => InitialShape::UniformRandom {
            p_blue,
            seed: seed::mix(params.seed, &[1]),
        },
    };
    if every == Some(0) {
        return Err(Error::invalid("--snapshot-every must be positive"));
    }
    let graph = build_graph(&params)?;
    let mut cfg = init_opinions(&graph, &shape)?;
    fs::create_dir_all(out)?;
    let opts = RunOptions {
        max_steps: max_steps.unwrap_or_else(|| default_max_steps(graph.n())),
        criterion: SurvivalCriterion::default(),
    };
    let mut files = Vec::new();
    let (edges, vertices) = graph.export(&out.join("graph"))?;
    files.push(edges);
    files.push(vertices.clone());
    let mut rng = seed::rng(params.seed, seed::Stream::Dynamics);
    let mut snaps = Vec::new();
    let stats = run_observed(&graph, &mut cfg, &mut rng, &opts, every, |step, c| {
        if every.is_some() {
            let p = out.join(format!("snapshot_{step:012}.txt"));
            c.write_snapshot(&p)?;
            snaps.push(p);
        }
        Ok(())
    })?;
    files.extend(snaps);
    let final_path = out.join("final_snapshot.txt");
    cfg.write_snapshot(&final_path)?;
    files.push(final_path.clone());
    let survived = classify_survival(&graph, &cfg, &opts.criterion);
    let stats_path = out.join("stats.json");
    let report = json!({
        "steps_taken": stats.steps_taken,
        "flips": stats.flips,
        "final_blue_count": stats.final_blue_count,
        "largest_blue_component": largest_blue_component(&graph, &cfg),
        "stable": stats.stable,
        "survived": survived,
    });
    fs::write(&stats_path, serde_json::to_string_pretty(&report)? + "\n")?;
    files.push(stats_path);
    files.extend(emit_plot_script(
        &PlotKind::Snapshot {
            vertices,
            snapshot: final_path,
        },
        &out.join("final_snapshot.gp"),
    )?);
    RunManifest::new(
        "simulate",
        json!({ "graph": params_json(&params), "shape": shape, "max_steps": opts.max_steps, "snapshot_every": every }),
        Some(params.seed),
    )
    .write(&manifest_path(out), &files)?;
    println!("{}", serde_json::to_string(&report)?);
    if !stats.stable {
        eprintln!("warning: not stable after {} steps", stats.steps_taken);
    }
    Ok(())
}

fn sweep(config: &Path, out: &Path) -> Result<()> {
    let cfg = SweepConfig::from_json(config)?;
    let curves = survival_sweep(&cfg)?;
    let fits: Vec<_> = curves.iter().map(fit_logistic).collect();
    fs::create_dir_all(out)?;
    let c = out.join("curves.csv");
    let f = out.join("fits.csv");
    fs::write(&c, curves_csv(&curves))?;
    fs::write(&f, fits_csv(&fits))?;
    let mut files = vec![c.clone(), f.clone()];
    files.extend(emit_plot_script(&PlotKind::Survival { curves: c, fits: f }, &out.join("survival.gp"))?);
    RunManifest::new("sweep", serde_json::to_value(&cfg)?, Some(cfg.seed_base)).write(&manifest_path(out), &files)?;
    for (curve, fit) in curves.iter().zip(&fits) {
        let cs = critical_size(fit);
        println!(
            "tau={} k={:.6} s0={:.4} b={:.4} converged={} non_converged_runs={}{}",
            curve.tau,
            curve.k,
            cs.s0,
            fit.b,
            fit.converged,
            curve.non_converged(),
            if cs.warning { " (warning: fit did not converge)" } else { "" }
        );
    }
    Ok(())
}

fn meanfield(geometry: GeometryArg, model: &ModelArgs, r: Option<f64>, iters: usize, tol: f64, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let k = model.k()?;
    let (f0, name) = match geometry {
        GeometryArg::Halfspace => (Profile::halfspace_indicator(model.halfspace()?)?, "halfspace_profile"),
        GeometryArg::Radial => {
            if model.d != 2 {
                return Err(Error::invalid("the radial geometry needs d = 2"));
            }
            let r = r.ok_or_else(|| Error::invalid("--geometry radial needs --r"))?;
            let p = MeanFieldParams::radial(model.tau, k, model.w_cap, r)?;
            (Profile::ball_indicator(p, r)?, "radial_profile")
        }
    };
    let lambda_min = crate::meanfield::lambda_of_w(1.0, f0.params());
    if lambda_min < 30.0 {
        eprintln!("warning: lambda(1) = {lambda_min:.3} < 30; the Gaussian approximation is poor");
    }
    let op = Operator::for_profile(&f0)?;
    let it = op.iterate(&f0, iters, tol)?;
    let profile_path = out.join(format!("{name}.csv"));
    it.profile.write_csv(&profile_path)?;
    let mut summary = format!(
        "k={k}\niterations={}\nlast_delta={:e}\nconverged={}\n",
        it.iterations,
        it.sup_deltas.last().copied().unwrap_or(f64::NAN),
        it.converged(tol)
    );
    match geometry {
        GeometryArg::Halfspace => {
            summary += &format!("survival_margin={}\n", survival_margin(&it.profile)?);
            if let Ok(spec) = theory::SubsolutionSpec::new(model.d, model.tau, k) {
                summary += &format!("delta_star={}\n", spec.delta_star);
            }
        }
        GeometryArg::Radial => {
            let c = crossing_radius(&it.profile).map_or("none".to_string(), |c| c.to_string());
            summary += &format!("crossing_radius={c}\n");
        }
    }
    let summary_path = out.join("summary.txt");
    fs::write(&summary_path, &summary)?;
    let mut files = vec![profile_path.clone(), summary_path];
    files.extend(emit_plot_script(&PlotKind::Profile { profile: profile_path }, &out.join(format!("{name}.gp")))?);
    RunManifest::new(
        "meanfield",
        json!({ "geometry": geometry, "model": model, "k": k, "r": r, "iters": iters, "tol": tol }),
        None,
    )
    .write(&manifest_path(out), &files)?;
    print!("{summary}");
    Ok(())
}

fn subsolution(model: &ModelArgs, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let (spec, sub) = build_subsolution_on(model.halfspace()?)?;
    let path = out.join("subsolution_profile.csv");
    sub.write_csv(&path)?;
    let text = format!(
        "d={}\ntau={}\nk={}\nk_min={}\ndelta_star={}\ncone_constant={}\ny_coefficient={}\n",
        spec.d,
        spec.tau,
        spec.k,
        theory::k_min(spec.d, spec.tau),
        spec.delta_star,
        spec.cone_constant,
        spec.y_coefficient
    );
    let spec_path = out.join("subsolution.txt");
    fs::write(&spec_path, &text)?;
    RunManifest::new("subsolution", json!({ "model": model, "spec": spec }), None)
        .write(&manifest_path(out), &[path, spec_path])?;
    print!("{text}");
    Ok(())
}

fn check(profile: &Path, model: &ModelArgs, no_operator: bool, comparison: Option<usize>, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let template = MeanFieldParams::halfspace(model.d, model.tau, model.k()?, model.w_cap)?;
    let f = Profile::read_csv(profile, &template, Geometry::HalfSpace)?;
    let op = if no_operator && comparison.is_none() {
        None
    } else {
        Some(Operator::for_profile(&f)?)
    };
    let report = check_valid_with(&f, if no_operator { None } else { Some(op.as_ref()) }, Default::default())?;
    let mut text = report.to_key_value();
    if let (Some(steps), Some(op)) = (comparison, op.as_ref()) {
        let f0 = Profile::halfspace_indicator(f.params().clone())?;
        let c = check_comparison(&f, &f0, op, steps, 1e-9)?;
        text += &format!("comparison_holds={}\ncomparison_steps={}\n", c.holds, c.steps);
        if let Some((t, w, z, a)) = c.first_violation {
            text += &format!("comparison_first_violation=t:{t},w:{w:e},z:{z:e},amount:{a:e}\n");
        }
    }
    let report_path = out.join("validity_report.txt");
    fs::write(&report_path, &text)?;
    let csv_path = out.join("validity_violations.csv");
    fs::write(&csv_path, report.violations_csv())?;
    RunManifest::new(
        "check",
        json!({ "profile": profile, "model": model, "no_operator": no_operator, "comparison_steps": comparison }),
        None,
    )
    .write(&manifest_path(out), &[report_path, csv_path])?;
    print!("{text}");
    Ok(())
}

fn erosion(radii: &[f64], eps: f64, tau: f64, k: Option<f64>, t_max: usize, out: &Path) -> Result<()> {
    if !(tau > 2.0) {
        return Err(Error::invalid(format!("tau must satisfy tau > 2 (got {tau})")));
    }
    fs::create_dir_all(out)?;
    let k = k.unwrap_or_else(|| 1.2 * theory::k_min(2, tau));
    let mut files = Vec::new();
    let mut series = String::from("r,t,crossing_radius,delta_bound\n");
    for &r in radii {
        let rep = check_erosion_domination(r, eps, tau, k, t_max)?;
        let path = out.join(format!("erosion_r{r}.txt"));
        fs::write(&path, rep.to_key_value())?;
        files.push(path);
        for (t, c) in rep.crossing.iter().enumerate() {
            series += &format!("{r:.16e},{t},{c:.16e},{:.16e}\n", rep.params.delta_bound);
        }
        println!(
            "r={r} holds={} recession_per_step={:.6} required_delta={:.6} delta_bound={:.6}",
            rep.holds, rep.recession_per_step, rep.required_delta, rep.params.delta_bound
        );
    }
    let path = out.join("erosion_series.csv");
    fs::write(&path, series)?;
    files.push(path);
    RunManifest::new("erosion", json!({ "r": radii, "eps": eps, "tau": tau, "k": k, "t_max": t_max }), None)
        .write(&manifest_path(out), &files)?;
    Ok(())
}

fn suite(k: Option<f64>, w_cap: f64, out: &Path) -> Result<()> {
    let cfg = SuiteConfig {
        k,
        w_cap,
        ..SuiteConfig::default()
    };
    let report = run_meanfield_suite(&cfg, out)?;
    RunManifest::new("suite", serde_json::to_value(&cfg)?, None).write(&manifest_path(out), &report.files)?;
    print!("{}", report.summary());
    Ok(())
}
