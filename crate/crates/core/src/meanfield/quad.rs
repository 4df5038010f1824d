//! Gauss–Legendre rules and adaptive interval bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use gauss_quad::GaussLegendre;

/// Nodes and weights of an `n`-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let gl = GaussLegendre::new(n.try_into().expect("rule order must be at least 2"));
        Rule {
            nodes: gl.nodes().copied().collect(),
            weights: gl.weights().copied().collect(),
        }
    }

    /// `(x, weight)` pairs mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive bisection: the interval with the largest error estimate
/// (rule on it versus rule on its halves) is split until the summed estimate
/// is at most `max(rel_tol·|value|, abs_tol)` or `max_splits` splits were
/// made.
pub fn adaptive<F: FnMut(f64) -> f64>(
    rule: &Rule,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_splits: u32,
    mut f: F,
) -> Estimate {
    if a == b {
        return Estimate {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let piece = |lo: f64, hi: f64, f: &mut F| {
        let mid = 0.5 * (lo + hi);
        let whole = rule.integrate(lo, hi, &mut *f);
        let left = rule.integrate(lo, mid, &mut *f);
        let right = rule.integrate(mid, hi, &mut *f);
        Piece {
            lo,
            hi,
            value: left + right,
            error: (left + right - whole).abs(),
        }
    };
    let mut heap = BinaryHeap::new();
    heap.push(piece(a, b, &mut f));
    let mut splits = 0;
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let target = (rel_tol * value.abs()).max(abs_tol);
        if error <= target || splits >= max_splits {
            return Estimate {
                value,
                error,
                converged: error <= target,
            };
        }
        let worst = heap.pop().unwrap();
        let mid = 0.5 * (worst.lo + worst.hi);
        heap.push(piece(worst.lo, mid, &mut f));
        heap.push(piece(mid, worst.hi, &mut f));
        splits += 1;
    }
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}
