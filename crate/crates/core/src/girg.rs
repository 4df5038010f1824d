//! Zero-temperature geometric inhomogeneous random graphs on the d-dimensional
//! ℓ2 torus.
//!
//! Vertices carry power-law weights `w ≥ 1` (density `(τ−1)w^{−τ}`) and
//! uniform positions in `[−L/2, L/2)^d` with `L = n^{1/d}`. A pair is joined
//! iff `dist^d ≤ k·w_u·w_v`, evaluated as plain floating point with no slack.
//!
//! Construction buckets vertices into dyadic weight layers, each with its own
//! uniform cell grid. A vertex enumerates candidates in every layer at or below
//! its own, visiting only the cells within the largest possible connection
//! radius for that layer. Layers whose radius covers the torus are scanned in
//! full. The exact predicate decides every candidate, so the result equals the
//! all-pairs construction bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Stream};

/// Volume of the unit ball in `d` dimensions, `π^{d/2}/Γ(d/2+1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_0 = 1, V_1 = 2, V_d = V_{d-2}·2π/d
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut j = if d.is_multiple_of(2) { 2 } else { 3 };
    while j <= d {
        v *= 2.0 * std::f64::consts::PI / j as f64;
        j += 2;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirgParams {
    pub d: usize,
    pub tau: f64,
    pub k: f64,
    pub n: usize,
    pub seed: u64,
}

impl GirgParams {
    pub fn new(n: usize, d: usize, tau: f64, k: f64, seed: u64) -> Result<Self> {
        let p = GirgParams { d, tau, k, n, seed };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::invalid("dimension d must be at least 1"));
        }
        if !(self.tau > 2.0) || !self.tau.is_finite() {
            return Err(Error::invalid(format!(
                "tau must satisfy tau > 2 (got {})",
                self.tau
            )));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(Error::invalid(format!("k must be positive (got {})", self.k)));
        }
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::invalid("n exceeds the supported vertex count"));
        }
        Ok(())
    }

    /// Torus side length `n^{1/d}`.
    pub fn side_length(&self) -> f64 {
        side_length(self.n, self.d)
    }
}

pub fn side_length(n: usize, d: usize) -> f64 {
    match d {
        1 => n as f64,
        2 => (n as f64).sqrt(),
        _ => (n as f64).powf(1.0 / d as f64),
    }
}

/// Inverse CDF of the weight law: `u ∈ (0,1] ↦ u^{−1/(τ−1)}`.
#[inline]
pub fn weight_from_uniform(u: f64, tau: f64) -> f64 {
    u.powf(-1.0 / (tau - 1.0))
}

/// I.i.d. weights from the power law on `[1, ∞)`.
pub fn sample_weights<R: Rng + ?Sized>(params: &GirgParams, rng: &mut R) -> Vec<f64> {
    (0..params.n)
        .map(|_| {
            // random() is in [0,1); 1 - u lands in (0,1]
            let u: f64 = 1.0 - rng.random::<f64>();
            weight_from_uniform(u, params.tau)
        })
        .collect()
}

/// Uniform positions in `[−L/2, L/2)^d`, flattened vertex-major.
pub fn sample_positions<R: Rng + ?Sized>(params: &GirgParams, rng: &mut R) -> Vec<f64> {
    let l = params.side_length();
    let half = l / 2.0;
    (0..params.n * params.d)
        .map(|_| {
            let x = rng.random::<f64>() * l - half;
            // guard the open upper end against rounding
            if x >= half {
                -half
            } else {
                x
            }
        })
        .collect()
}

/// `dist^d` on the torus, with each coordinate difference reduced to its
/// minimum image. For `d = 2` this is the squared norm, so no square root is
/// taken.
#[inline]
pub fn torus_distance_pow(x: &[f64], y: &[f64], l: f64) -> f64 {
    let half = l / 2.0;
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        let mut diff = (a - b).abs();
        if diff > half {
            diff = l - diff;
        }
        s += diff * diff;
    }
    match x.len() {
        1 => s.sqrt(),
        2 => s,
        d => s.sqrt().powi(d as i32),
    }
}

/// ℓ2 distance on the torus.
pub fn torus_distance(x: &[f64], y: &[f64], l: f64) -> f64 {
    let half = l / 2.0;
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let mut diff = (a - b).abs();
            if diff > half {
                diff = l - diff;
            }
            diff * diff
        })
        .sum::<f64>()
        .sqrt()
}

/// The edge rule. Symmetric in `(u, v)` because `w_u·w_v` is computed first.
#[inline]
pub fn connects(dist_pow_d: f64, k: f64, wu: f64, wv: f64) -> bool {
    dist_pow_d <= k * (wu * wv)
}

/// Radius `(k·w)^{1/d}` within which a vertex of weight `w` reaches everyone.
pub fn ball_of_influence_radius(w: f64, params: &GirgParams) -> f64 {
    (params.k * w).powf(1.0 / params.d as f64)
}

/// Expected number of near and far neighbours of a vertex of weight `w`.
pub fn expected_degree(w: f64, params: &GirgParams) -> (f64, f64) {
    let near = unit_ball_volume(params.d) * params.k * w;
    (near, near / (params.tau - 2.0))
}

/// Mean of the weight law, `(τ−1)/(τ−2)`.
pub fn mean_weight(tau: f64) -> f64 {
    (tau - 1.0) / (tau - 2.0)
}

/// The `k` whose weight-averaged expected degree equals `target`.
pub fn calibrate_k(target_mean_degree: f64, d: usize, tau: f64) -> Result<f64> {
    if !(tau > 2.0) {
        return Err(Error::invalid(format!("tau must satisfy tau > 2 (got {tau})")));
    }
    if !(target_mean_degree > 0.0) {
        return Err(Error::invalid("target average degree must be positive"));
    }
    Ok(target_mean_degree / (unit_ball_volume(d) * mean_weight(tau) * (1.0 + 1.0 / (tau - 2.0))))
}

/// An immutable graph realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub params: GirgParams,
    weights: Vec<f64>,
    positions: Vec<f64>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn side_length(&self) -> f64 {
        self.params.side_length()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> &[f64] {
        let d = self.params.d;
        &self.positions[v * d..(v + 1) * d]
    }

    /// Sorted neighbour ids of `v`.
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn flat_neighbors(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(move |&v| (u, v as usize))
                .filter(|&(u, v)| u < v)
        })
    }

    /// Evaluate the edge rule for a pair directly from weights and positions.
    pub fn edge_predicate(&self, u: usize, v: usize) -> bool {
        u != v
            && connects(
                torus_distance_pow(self.position(u), self.position(v), self.side_length()),
                self.params.k,
                self.weights[u],
                self.weights[v],
            )
    }

    /// Build the graph for the given weights and positions.
    pub fn from_parts(params: GirgParams, weights: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        params.validate()?;
        check_parts(&params, &weights, &positions)?;
        let lower = lower_neighbors(&params, &weights, &positions);
        Ok(Self::assemble(params, weights, positions, lower))
    }

    /// Rebuild a graph from an explicit edge list (used when reading exports).
    pub fn from_edges(
        params: GirgParams,
        weights: Vec<f64>,
        positions: Vec<f64>,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        params.validate()?;
        check_parts(&params, &weights, &positions)?;
        let n = weights.len();
        let mut lower: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::invalid(format!("bad edge ({u}, {v})")));
            }
            let (a, b) = if u > v { (u, v) } else { (v, u) };
            lower[a].push(b as u32);
        }
        Ok(Self::assemble(params, weights, positions, lower))
    }

    fn assemble(
        params: GirgParams,
        weights: Vec<f64>,
        positions: Vec<f64>,
        lower: Vec<Vec<u32>>,
    ) -> Self {
        let n = weights.len();
        let mut deg = vec![0usize; n];
        for (u, list) in lower.iter().enumerate() {
            deg[u] += list.len();
            for &v in list {
                deg[v as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for &k in &deg {
            offsets.push(offsets.last().unwrap() + k);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for (u, list) in lower.iter().enumerate() {
            for &v in list {
                neighbors[fill[u]] = v;
                fill[u] += 1;
                neighbors[fill[v as usize]] = u as u32;
                fill[v as usize] += 1;
            }
        }
        for u in 0..n {
            let list = &mut neighbors[offsets[u]..offsets[u + 1]];
            list.sort_unstable();
            debug_assert!(list.windows(2).all(|w| w[0] < w[1]), "duplicate edge");
        }
        Graph {
            params,
            weights,
            positions,
            offsets,
            neighbors,
        }
    }

    /// Write `prefix.edges` ("u v", u < v) and `prefix.vertices`
    /// ("id weight x0 ... x{d-1}", 17 significant digits).
    pub fn export(&self, prefix: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        let edge_path = prefix.with_extension("edges");
        let vertex_path = prefix.with_extension("vertices");
        let mut out = BufWriter::new(File::create(&edge_path)?);
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        out.flush()?;
        let mut out = BufWriter::new(File::create(&vertex_path)?);
        for v in 0..self.n() {
            write!(out, "{v} {:.16e}", self.weights[v])?;
            for x in self.position(v) {
                write!(out, " {x:.16e}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok((edge_path, vertex_path))
    }

    /// Read back an export written by [`Graph::export`].
    pub fn import(params: GirgParams, prefix: &Path) -> Result<Self> {
        let vertex_path = prefix.with_extension("vertices");
        let edge_path = prefix.with_extension("edges");
        let d = params.d;
        let mut weights = Vec::new();
        let mut positions = Vec::new();
        for (i, line) in BufReader::new(File::open(&vertex_path)?).lines().enumerate() {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = |msg: &str| Error::Parse {
                path: vertex_path.clone(),
                line: i + 1,
                msg: msg.to_string(),
            };
            if fields.len() != d + 2 {
                return Err(bad("expected id, weight and d coordinates"));
            }
            let id: usize = fields[0].parse().map_err(|_| bad("bad id"))?;
            if id != i {
                return Err(bad("vertex ids must be consecutive from 0"));
            }
            weights.push(fields[1].parse().map_err(|_| bad("bad weight"))?);
            for f in &fields[2..] {
                positions.push(f.parse().map_err(|_| bad("bad coordinate"))?);
            }
        }
        let mut edges = Vec::new();
        for (i, line) in BufReader::new(File::open(&edge_path)?).lines().enumerate() {
            let line = line?;
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => {
                    return Err(Error::Parse {
                        path: edge_path.clone(),
                        line: i + 1,
                        msg: "expected `u v`".into(),
                    })
                }
            }
        }
        let params = GirgParams {
            n: weights.len(),
            ..params
        };
        Self::from_edges(params, weights, positions, &edges)
    }
}

fn check_parts(params: &GirgParams, weights: &[f64], positions: &[f64]) -> Result<()> {
    if weights.len() != params.n || positions.len() != params.n * params.d {
        return Err(Error::invalid(format!(
            "expected {} weights and {} coordinates, got {} and {}",
            params.n,
            params.n * params.d,
            weights.len(),
            positions.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 1.0) || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and at least 1"));
    }
    let half = params.side_length() / 2.0;
    if positions.iter().any(|x| !(*x >= -half && *x < half)) {
        return Err(Error::invalid("coordinates must lie in [-L/2, L/2)"));
    }
    Ok(())
}

/// Sample weights and positions from `params.seed` and build the graph.
pub fn build_graph(params: &GirgParams) -> Result<Graph> {
    params.validate()?;
    let weights = sample_weights(params, &mut seed::rng(params.seed, Stream::Weights));
    let positions = sample_positions(params, &mut seed::rng(params.seed, Stream::Positions));
    Graph::from_parts(*params, weights, positions)
}

struct Layer {
    members: Vec<u32>,
    max_weight: f64,
    cells_per_dim: usize,
    cell_side: f64,
    cell_offsets: Vec<usize>,
    cell_members: Vec<u32>,
}

fn layer_of(w: f64) -> usize {
    // w >= 1, so log2 >= 0
    w.log2().floor().max(0.0) as usize
}

fn cell_coord(x: f64, half: f64, cell_side: f64, g: usize) -> usize {
    (((x + half) / cell_side).floor().max(0.0) as usize).min(g - 1)
}

impl Layer {
    fn build(params: &GirgParams, members: Vec<u32>, weights: &[f64], positions: &[f64]) -> Self {
        let d = params.d;
        let l = params.side_length();
        let half = l / 2.0;
        let max_weight = members
            .iter()
            .map(|&v| weights[v as usize])
            .fold(1.0, f64::max);
        // about two members per cell
        let target_side = (2.0 * params.n as f64 / members.len().max(1) as f64).powf(1.0 / d as f64);
        let cells_per_dim = ((l / target_side).floor() as usize).max(1);
        let cell_side = l / cells_per_dim as f64;
        let ncells = cells_per_dim.pow(d as u32);
        let cell_index = |v: u32| {
            let x = &positions[v as usize * d..(v as usize + 1) * d];
            x.iter().fold(0usize, |acc, &c| {
                acc * cells_per_dim + cell_coord(c, half, cell_side, cells_per_dim)
            })
        };
        let mut counts = vec![0usize; ncells + 1];
        for &v in &members {
            counts[cell_index(v) + 1] += 1;
        }
        for i in 0..ncells {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts[..ncells].to_vec();
        let mut cell_members = vec![0u32; members.len()];
        for &v in &members {
            let c = cell_index(v);
            cell_members[fill[c]] = v;
            fill[c] += 1;
        }
        Layer {
            members,
            max_weight,
            cells_per_dim,
            cell_side,
            cell_offsets: counts,
            cell_members,
        }
    }

    fn cell(&self, idx: usize) -> &[u32] {
        &self.cell_members[self.cell_offsets[idx]..self.cell_offsets[idx + 1]]
    }
}

/// For every vertex `u`, the neighbours that precede it in (layer, id) order.
fn lower_neighbors(params: &GirgParams, weights: &[f64], positions: &[f64]) -> Vec<Vec<u32>> {
    let n = weights.len();
    let d = params.d;
    let l = params.side_length();
    let half = l / 2.0;
    let k = params.k;

    let nlayers = weights.iter().map(|&w| layer_of(w)).max().unwrap_or(0) + 1;
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); nlayers];
    for (v, &w) in weights.iter().enumerate() {
        members[layer_of(w)].push(v as u32);
    }
    let layers: Vec<Layer> = members
        .into_iter()
        .map(|m| Layer::build(params, m, weights, positions))
        .collect();

    (0..n)
        .into_par_iter()
        .map(|u| {
            let wu = weights[u];
            let lu = layer_of(wu);
            let xu = &positions[u * d..(u + 1) * d];
            let mut out = Vec::new();
            let mut consider = |v: u32, same_layer: bool| {
                let vi = v as usize;
                if same_layer && vi >= u {
                    return;
                }
                let xv = &positions[vi * d..(vi + 1) * d];
                if connects(torus_distance_pow(xu, xv, l), k, wu, weights[vi]) {
                    out.push(v);
                }
            };
            for (li, layer) in layers.iter().enumerate().take(lu + 1) {
                if layer.members.is_empty() {
                    continue;
                }
                let same = li == lu;
                // conservative search radius for this layer
                let radius = (k * wu * layer.max_weight).powf(1.0 / d as f64) * (1.0 + 1e-9) + 1e-12;
                let g = layer.cells_per_dim;
                let reach = (radius / layer.cell_side).ceil() as usize;
                if 2 * reach + 1 >= g {
                    // the search box wraps the whole torus: global pass
                    for &v in &layer.members {
                        consider(v, same);
                    }
                    continue;
                }
                let ranges: Vec<Vec<usize>> = xu
                    .iter()
                    .map(|&c| {
                        let h = cell_coord(c, half, layer.cell_side, g);
                        (0..=2 * reach).map(|o| (h + g + o - reach) % g).collect()
                    })
                    .collect();
                let mut idx = vec![0usize; d];
                'cells: loop {
                    let cell = idx
                        .iter()
                        .zip(&ranges)
                        .fold(0usize, |acc, (&i, r)| acc * g + r[i]);
                    for &v in layer.cell(cell) {
                        consider(v, same);
                    }
                    for dim in (0..d).rev() {
                        idx[dim] += 1;
                        if idx[dim] < ranges[dim].len() {
                            continue 'cells;
                        }
                        idx[dim] = 0;
                    }
                    break;
                }
            }
            // same-layer pairs are taken with v < u; cross-layer pairs only from
            // the heavier side, so every edge appears exactly once
            out
        })
        .collect()
}

/// Empirical degree statistics split by the ball of influence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub mean_degree: f64,
    pub mean_near: f64,
    pub mean_far: f64,
    /// Standard deviation of the per-vertex degree.
    pub degree_std: f64,
    pub buckets: Vec<WeightBucket>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightBucket {
    /// Bucket covers `[10^decade, 10^{decade+1})`.
    pub decade: i32,
    pub count: usize,
    pub mean_weight: f64,
    pub mean_degree: f64,
    pub mean_near: f64,
    pub mean_far: f64,
}

pub fn degree_report(graph: &Graph) -> DegreeReport {
    let n = graph.n();
    let l = graph.side_length();
    let k = graph.params.k;
    let per_vertex: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .map(|v| {
            let xv = graph.position(v);
            let wv = graph.weight(v);
            let near = graph
                .neighbors(v)
                .iter()
                .filter(|&&u| torus_distance_pow(xv, graph.position(u as usize), l) <= k * wv)
                .count();
            (near, graph.degree(v) - near)
        })
        .collect();

    let nf = n as f64;
    let mean_near = per_vertex.iter().map(|p| p.0 as f64).sum::<f64>() / nf;
    let mean_far = per_vertex.iter().map(|p| p.1 as f64).sum::<f64>() / nf;
    let mean_degree = mean_near + mean_far;
    let var = per_vertex
        .iter()
        .map(|p| {
            let x = (p.0 + p.1) as f64 - mean_degree;
            x * x
        })
        .sum::<f64>()
        / (nf - 1.0).max(1.0);

    let mut buckets: Vec<WeightBucket> = Vec::new();
    for (v, &(near, far)) in per_vertex.iter().enumerate() {
        let w = graph.weight(v);
        let decade = w.log10().floor() as i32;
        let b = match buckets.iter_mut().find(|b| b.decade == decade) {
            Some(b) => b,
            None => {
                buckets.push(WeightBucket {
                    decade,
                    count: 0,
                    mean_weight: 0.0,
                    mean_degree: 0.0,
                    mean_near: 0.0,
                    mean_far: 0.0,
                });
                buckets.last_mut().unwrap()
            }
        };
        b.count += 1;
        b.mean_weight += w;
        b.mean_near += near as f64;
        b.mean_far += far as f64;
    }
    for b in &mut buckets {
        let c = b.count as f64;
        b.mean_weight /= c;
        b.mean_near /= c;
        b.mean_far /= c;
        b.mean_degree = b.mean_near + b.mean_far;
    }
    buckets.sort_by_key(|b| b.decade);

    DegreeReport {
        mean_degree,
        mean_near,
        mean_far,
        degree_std: var.sqrt(),
        buckets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, d: usize, tau: f64, k: f64) -> GirgParams {
        GirgParams::new(n, d, tau, k, 1).unwrap()
    }

    #[test]
    fn weight_inverse_cdf() {
        assert_eq!(weight_from_uniform(1.0, 3.0), 1.0);
        assert!((weight_from_uniform(0.5, 3.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn torus_distance_examples() {
        assert_eq!(torus_distance(&[1.5, -2.0], &[1.5, -2.0], 10.0), 0.0);
        assert!((torus_distance(&[4.0], &[-4.0], 10.0) - 2.0).abs() < 1e-15);
        assert!((torus_distance(&[4.0, 0.0], &[-4.0, 3.0], 10.0) - 13f64.sqrt()).abs() < 1e-14);
        assert_eq!(torus_distance_pow(&[4.0, 0.0], &[-4.0, 3.0], 10.0), 13.0);
    }

    #[test]
    fn ball_radius_examples() {
        let mut p = params(16, 2, 3.0, 4.0);
        assert!((ball_of_influence_radius(4.0, &p) - 4.0).abs() < 1e-15);
        p.k = 1.0;
        for d in 1..5 {
            p.d = d;
            assert!((ball_of_influence_radius(1.0, &p) - 1.0).abs() < 1e-15);
        }
        p.d = 3;
        p.k = 2.0;
        assert!((ball_of_influence_radius(3.0, &p) - 1.817_120_592_832_139_7).abs() < 1e-12);
    }

    #[test]
    fn expected_degree_examples() {
        let p = params(10, 2, 3.0, 1.0);
        let (near, far) = expected_degree(1.0, &p);
        assert!((near - std::f64::consts::PI).abs() < 1e-14);
        assert!((far - std::f64::consts::PI).abs() < 1e-14);
        let p = params(10, 1, 4.0, 2.0);
        let (near, far) = expected_degree(3.0, &p);
        assert!((near + far - 18.0).abs() < 1e-12);
        let p = params(10, 2, 1e6, 1.0);
        let (near, far) = expected_degree(1.0, &p);
        assert!(far / near < 1e-5);
    }

    #[test]
    fn calibrate_k_examples() {
        let k = calibrate_k(4.0 * std::f64::consts::PI, 2, 3.0).unwrap();
        assert!((k - 1.0).abs() < 1e-14);
        let k = calibrate_k(20.0, 2, 2.15).unwrap();
        assert!((k - 0.108_31).abs() < 1e-5, "{k}");
        assert!(calibrate_k(0.0, 2, 3.0).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        let pi = std::f64::consts::PI;
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(GirgParams::new(10, 2, 2.0, 1.0, 0).is_err());
        assert!(GirgParams::new(0, 2, 3.0, 1.0, 0).is_err());
        assert!(GirgParams::new(10, 2, 3.0, 0.0, 0).is_err());
        assert!(GirgParams::new(10, 0, 3.0, 1.0, 0).is_err());
    }

    #[test]
    fn two_vertex_threshold() {
        // L = sqrt(16) = 4
        let p = params(16, 2, 3.0, 1.0);
        let mut w = vec![1.0; 16];
        let mut x = vec![0.0; 32];
        // spread the other vertices far from the pair
        for i in 2..16 {
            w[i] = 1.0;
            x[2 * i] = -2.0 + 0.25 * (i as f64 - 2.0);
            x[2 * i + 1] = 1.9;
        }
        // distance 1 exactly (0.6^2 + 0.8^2 = 1.0 in floating point)
        x[0] = 0.0;
        x[1] = 0.0;
        x[2] = 0.6;
        x[3] = 0.8;
        let d2 = torus_distance_pow(&x[0..2], &x[2..4], 4.0);
        assert_eq!(d2, 1.0);
        let g = Graph::from_parts(p, w.clone(), x.clone()).unwrap();
        assert!(g.has_edge(0, 1));
        // push the second vertex just beyond k^{1/d} = 1
        x[3] = 0.8 + 1e-9;
        let g = Graph::from_parts(p, w, x).unwrap();
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn wraparound_edge() {
        let p = GirgParams::new(4, 1, 3.0, 0.5, 0).unwrap();
        // L = 4; points at -1.9 and 1.9 are 0.2 apart across the seam
        let g = Graph::from_parts(p, vec![1.0; 4], vec![-1.9, 1.9, -0.5, 0.7]).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(2, 3));
    }

    #[test]
    fn adjacency_symmetric_no_loops() {
        let g = build_graph(&GirgParams::new(2000, 2, 2.5, 1.0, 3).unwrap()).unwrap();
        for u in 0..g.n() {
            assert!(!g.has_edge(u, u));
            for &v in g.neighbors(u) {
                assert!(g.has_edge(v as usize, u));
                assert!(g.edge_predicate(u, v as usize));
            }
        }
    }

    #[test]
    fn empty_graph_report() {
        let p = GirgParams::new(9, 2, 3.0, 1e-6, 0).unwrap();
        let x: Vec<f64> = (0..9).flat_map(|i| [-1.5 + (i % 3) as f64, -1.5 + (i / 3) as f64]).collect();
        let g = Graph::from_parts(p, vec![1.0; 9], x).unwrap();
        assert_eq!(g.edge_count(), 0);
        let r = degree_report(&g);
        assert_eq!(r.mean_degree, 0.0);
        assert_eq!(r.mean_near, 0.0);
        assert_eq!(r.mean_far, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = GirgParams::new(3000, 2, 2.3, 0.7, 11).unwrap();
        assert_eq!(build_graph(&p).unwrap(), build_graph(&p).unwrap());
        let q = GirgParams { seed: 12, ..p };
        assert_ne!(build_graph(&p).unwrap(), build_graph(&q).unwrap());
    }

    #[test]
    fn export_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = GirgParams::new(500, 3, 2.7, 1.3, 5).unwrap();
        let g = build_graph(&p).unwrap();
        let prefix = dir.path().join("g");
        g.export(&prefix).unwrap();
        let h = Graph::import(p, &prefix).unwrap();
        assert_eq!(g, h);
    }
}
