//! Sequential majority dynamics.
//!
//! Each step picks a vertex uniformly at random and sets its opinion to the
//! sign of its neighbourhood sum, keeping it on a tie. A vertex is *unstable*
//! when that rule would flip it; the configuration keeps the unstable set and
//! every vertex's neighbourhood sum up to date incrementally, so a flip costs
//! `O(deg)`.
//!
//! Picking a stable vertex is a no-op, so [`run_until_stable`] draws the number
//! of wasted picks before the next unstable one from the matching geometric
//! law and then picks uniformly inside the unstable set. The sequence of flips
//! and the step counter have exactly the law of the naive loop.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::girg::Graph;
use crate::seed;

const NOT_PRESENT: u32 = u32::MAX;

pub const BLUE: i8 = 1;
pub const RED: i8 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialShape {
    /// Axis-aligned cube of the given side, centred at the origin.
    Square { side: f64 },
    /// Closed ℓ2 ball centred at the origin.
    Ball { radius: f64 },
    /// Blue where the first coordinate is non-negative.
    HalfSpace,
    /// Each vertex blue independently with probability `p_blue`.
    UniformRandom { p_blue: f64, seed: u64 },
}

impl InitialShape {
    fn validate(&self, side_length: f64) -> Result<()> {
        let too_large = |detail: String| Error::ShapeTooLarge {
            side: side_length,
            detail,
        };
        match *self {
            InitialShape::Square { side } => {
                if !(side > 0.0) {
                    return Err(Error::invalid("square side must be positive"));
                }
                if side >= side_length {
                    return Err(too_large(format!("square side {side}")));
                }
            }
            InitialShape::Ball { radius } => {
                if !(radius > 0.0) {
                    return Err(Error::invalid("ball radius must be positive"));
                }
                if 2.0 * radius >= side_length {
                    return Err(too_large(format!("ball diameter {}", 2.0 * radius)));
                }
            }
            InitialShape::HalfSpace => {}
            InitialShape::UniformRandom { p_blue, .. } => {
                if !(0.0..=1.0).contains(&p_blue) {
                    return Err(Error::invalid("p_blue must lie in [0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Blue membership; boundaries are inclusive.
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            InitialShape::Square { side } => x.iter().all(|c| c.abs() <= side / 2.0),
            InitialShape::Ball { radius } => x.iter().map(|c| c * c).sum::<f64>() <= radius * radius,
            InitialShape::HalfSpace => x[0] >= 0.0,
            InitialShape::UniformRandom { .. } => unreachable!("random shapes are not geometric"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpinionConfig {
    spins: Vec<i8>,
    /// Sum of neighbour spins.
    field: Vec<i32>,
    unstable: Vec<u32>,
    slot: Vec<u32>,
}

#[inline]
fn wants_flip(spin: i8, field: i32) -> bool {
    field != 0 && (field > 0) != (spin > 0)
}

impl OpinionConfig {
    pub fn from_spins(graph: &Graph, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != graph.n() {
            return Err(Error::invalid(format!(
                "expected {} spins, got {}",
                graph.n(),
                spins.len()
            )));
        }
        if spins.iter().any(|&s| s != BLUE && s != RED) {
            return Err(Error::invalid("spins must be +1 or -1"));
        }
        let field: Vec<i32> = (0..graph.n())
            .map(|v| graph.neighbors(v).iter().map(|&u| spins[u as usize] as i32).sum())
            .collect();
        let mut cfg = OpinionConfig {
            slot: vec![NOT_PRESENT; spins.len()],
            spins,
            field,
            unstable: Vec::new(),
        };
        for v in 0..cfg.spins.len() {
            cfg.refresh(v);
        }
        Ok(cfg)
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, v: usize) -> i8 {
        self.spins[v]
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn blue_count(&self) -> usize {
        self.spins.iter().filter(|&&s| s == BLUE).count()
    }

    pub fn is_unstable(&self, v: usize) -> bool {
        self.slot[v] != NOT_PRESENT
    }

    pub fn unstable_count(&self) -> usize {
        self.unstable.len()
    }

    /// Unstable vertex ids, sorted.
    pub fn unstable_set(&self) -> Vec<u32> {
        let mut s = self.unstable.clone();
        s.sort_unstable();
        s
    }

    fn refresh(&mut self, v: usize) {
        let want = wants_flip(self.spins[v], self.field[v]);
        let present = self.slot[v] != NOT_PRESENT;
        if want && !present {
            self.slot[v] = self.unstable.len() as u32;
            self.unstable.push(v as u32);
        } else if !want && present {
            let i = self.slot[v] as usize;
            let last = *self.unstable.last().unwrap();
            self.unstable.swap_remove(i);
            if last as usize != v {
                self.slot[last as usize] = i as u32;
            }
            self.slot[v] = NOT_PRESENT;
        }
    }

    fn flip(&mut self, graph: &Graph, v: usize) {
        let s = -self.spins[v];
        self.spins[v] = s;
        let delta = 2 * s as i32;
        for &u in graph.neighbors(v) {
            self.field[u as usize] += delta;
            self.refresh(u as usize);
        }
        self.refresh(v);
    }

    /// Write "id spin" lines.
    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for (v, s) in self.spins.iter().enumerate() {
            writeln!(out, "{v} {s}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path) -> Result<Vec<i8>> {
        let mut spins = Vec::new();
        for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
            let line = line?;
            let bad = |msg: &str| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: msg.into(),
            };
            let mut it = line.split_whitespace();
            let id: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad id"))?;
            let s: i8 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad spin"))?;
            if id != i || (s != BLUE && s != RED) {
                return Err(bad("expected consecutive ids and spins in {-1, 1}"));
            }
            spins.push(s);
        }
        Ok(spins)
    }
}

/// The unstable set computed from scratch.
pub fn recompute_unstable(graph: &Graph, spins: &[i8]) -> Vec<u32> {
    (0..graph.n())
        .filter(|&v| {
            let f: i32 = graph.neighbors(v).iter().map(|&u| spins[u as usize] as i32).sum();
            wants_flip(spins[v], f)
        })
        .map(|v| v as u32)
        .collect()
}

pub fn init_opinions(graph: &Graph, shape: &InitialShape) -> Result<OpinionConfig> {
    shape.validate(graph.side_length())?;
    let spins: Vec<i8> = match *shape {
        InitialShape::UniformRandom { p_blue, seed } => {
            let mut rng = seed::rng(seed, seed::Stream::Dynamics);
            (0..graph.n())
                .map(|_| if rng.random::<f64>() < p_blue { BLUE } else { RED })
                .collect()
        }
        _ => (0..graph.n())
            .map(|v| if shape.contains(graph.position(v)) { BLUE } else { RED })
            .collect(),
    };
    OpinionConfig::from_spins(graph, spins)
}

/// Apply the majority rule to `v`. Returns whether it flipped.
pub fn step(graph: &Graph, config: &mut OpinionConfig, v: usize) -> bool {
    if config.is_unstable(v) {
        config.flip(graph, v);
        true
    } else {
        false
    }
}

/// Largest-blue-component survival rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCriterion {
    pub min_size: usize,
    pub min_fraction: f64,
}

impl Default for SurvivalCriterion {
    fn default() -> Self {
        SurvivalCriterion {
            min_size: 50,
            min_fraction: 0.005,
        }
    }
}

impl SurvivalCriterion {
    pub fn threshold(&self, n: usize) -> f64 {
        (self.min_size as f64).max(self.min_fraction * n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_steps: u64,
    pub criterion: SurvivalCriterion,
}

impl RunOptions {
    /// `100·n·ln n` steps.
    pub fn for_graph(graph: &Graph) -> Self {
        RunOptions {
            max_steps: default_max_steps(graph.n()),
            criterion: SurvivalCriterion::default(),
        }
    }
}

pub fn default_max_steps(n: usize) -> u64 {
    let nf = n.max(2) as f64;
    (100.0 * nf * nf.ln()).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps_taken: u64,
    pub flips: u64,
    pub final_blue_count: usize,
    /// No unstable vertex remains.
    pub stable: bool,
    pub survived: bool,
    pub elapsed: f64,
}

pub fn run_until_stable<R: Rng + ?Sized>(
    graph: &Graph,
    config: &mut OpinionConfig,
    rng: &mut R,
    opts: &RunOptions,
) -> Result<RunStats> {
    run_observed(graph, config, rng, opts, None, |_, _| Ok(()))
}

/// Like [`run_until_stable`], calling `observe(step, config)` at step 0 and
/// at every multiple of `every`.
pub fn run_observed<R, F>(
    graph: &Graph,
    config: &mut OpinionConfig,
    rng: &mut R,
    opts: &RunOptions,
    every: Option<u64>,
    mut observe: F,
) -> Result<RunStats>
where
    R: Rng + ?Sized,
    F: FnMut(u64, &OpinionConfig) -> Result<()>,
{
    if opts.max_steps == 0 {
        return Err(Error::invalid("max_steps must be positive"));
    }
    if every == Some(0) {
        return Err(Error::invalid("snapshot interval must be positive"));
    }
    let start = Instant::now();
    let n = graph.n() as f64;
    let mut steps: u64 = 0;
    let mut flips: u64 = 0;
    let mut next_snapshot = every.map(|_| 0u64);

    loop {
        let unstable = config.unstable.len();
        // picks until the next unstable vertex, counting that pick
        let advance = if unstable == 0 {
            u64::MAX
        } else {
            let p = unstable as f64 / n;
            if p >= 1.0 {
                1
            } else {
                Geometric::new(p)
                    .expect("probability in (0,1)")
                    .sample(rng)
                    .saturating_add(1)
            }
        };
        let target = steps.saturating_add(advance);

        // the state is constant on [steps, target); once stable, stop at `steps`
        let last = if unstable == 0 { steps } else { (target - 1).min(opts.max_steps) };
        while let Some(s) = next_snapshot {
            if s <= last {
                observe(s, config)?;
                next_snapshot = Some(s + every.unwrap());
            } else {
                break;
            }
        }

        if unstable == 0 || target > opts.max_steps {
            steps = if unstable == 0 { steps } else { opts.max_steps };
            break;
        }
        steps = target;
        let v = config.unstable[rng.random_range(0..unstable)] as usize;
        config.flip(graph, v);
        flips += 1;
    }

    let stable = config.unstable.is_empty();
    Ok(RunStats {
        steps_taken: steps,
        flips,
        final_blue_count: config.blue_count(),
        stable,
        survived: classify_survival(graph, config, &opts.criterion),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Size of the largest connected component of the blue-induced subgraph.
pub fn largest_blue_component(graph: &Graph, config: &OpinionConfig) -> usize {
    let n = graph.n();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut best = 0;
    for s in 0..n {
        if seen[s] || config.spins[s] != BLUE {
            continue;
        }
        seen[s] = true;
        queue.push_back(s);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &u in graph.neighbors(v) {
                let u = u as usize;
                if !seen[u] && config.spins[u] == BLUE {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        best = best.max(size);
    }
    best
}

pub fn classify_survival(graph: &Graph, config: &OpinionConfig, criterion: &SurvivalCriterion) -> bool {
    largest_blue_component(graph, config) as f64 >= criterion.threshold(graph.n())
}

/// One full simulation: shape → stable configuration → survival verdict.
pub fn simulate(
    graph: &Graph,
    shape: &InitialShape,
    seed: u64,
    opts: &RunOptions,
) -> Result<(OpinionConfig, RunStats)> {
    let mut cfg = init_opinions(graph, shape)?;
    let mut rng = seed::rng(seed, seed::Stream::Dynamics);
    let stats = run_until_stable(graph, &mut cfg, &mut rng, opts)?;
    Ok((cfg, stats))
}
