//! Saturating edge labelings of weighted bipartite graphs.
//!
//! Given `G = (V₁, V₂, E)` with positive weights, a labeling `γ ≥ 0` with
//! `Σ_{t} γ_st = w(s)` for every `s ∈ V₁` and `Σ_{s} γ_st ≤ w(t)` for every
//! `t ∈ V₂` exists iff `w(U) ≤ w(N(U))` for every `U ⊆ V₁`. Both directions
//! come out of one max-flow computation: the flow is the labeling, and when
//! the flow falls short the source side of the residual cut is a violating
//! `U`.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::objective::check_weights;
use crate::region_graph::{RegionGraph, RegionId};

/// Bipartite instance; `edges` index into `left` and `right`.
#[derive(Clone, Debug, PartialEq)]
pub struct HallInstance {
    pub left: Vec<RegionId>,
    pub right: Vec<RegionId>,
    pub left_weights: Vec<f64>,
    pub right_weights: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
}

/// Instance whose labeling rewrites a region-graph entropy as a sum of
/// conditional entropies: negative-weight regions on the left, positive ones
/// on the right, an edge whenever the left region is strictly contained in
/// the right one, and weights `|ρ|`.
pub fn kikuchi_hall_instance(graph: &RegionGraph, rho: &[f64]) -> Result<HallInstance> {
    check_weights(graph, rho)?;
    let left: Vec<RegionId> = (0..graph.num_regions()).filter(|&r| rho[r] < 0.0).collect();
    let right: Vec<RegionId> = (0..graph.num_regions()).filter(|&r| rho[r] > 0.0).collect();
    let mut edges = Vec::new();
    for (i, &s) in left.iter().enumerate() {
        for (j, &t) in right.iter().enumerate() {
            if graph.contains(t, s) {
                edges.push((i, j));
            }
        }
    }
    Ok(HallInstance {
        left_weights: left.iter().map(|&r| -rho[r]).collect(),
        right_weights: right.iter().map(|&r| rho[r]).collect(),
        left,
        right,
        edges,
    })
}

/// One label per instance edge, in the order of `HallInstance::edges`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLabeling {
    pub labels: Vec<f64>,
}

impl EdgeLabeling {
    pub fn left_sums(&self, inst: &HallInstance) -> Vec<f64> {
        let mut sums = vec![0.0; inst.left.len()];
        for (&(i, _), &g) in inst.edges.iter().zip(&self.labels) {
            sums[i] += g;
        }
        sums
    }

    pub fn right_sums(&self, inst: &HallInstance) -> Vec<f64> {
        let mut sums = vec![0.0; inst.right.len()];
        for (&(_, j), &g) in inst.edges.iter().zip(&self.labels) {
            sums[j] += g;
        }
        sums
    }
}

/// Saturating labeling, or `HallConditionViolated(U)` with `U` as sorted
/// positions into `inst.left`.
pub fn hall_labeling(inst: &HallInstance) -> Result<EdgeLabeling> {
    for (index, &value) in inst
        .left_weights
        .iter()
        .chain(&inst.right_weights)
        .enumerate()
    {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveWeight { index, value });
        }
    }
    let n1 = inst.left.len();
    let n2 = inst.right.len();
    if inst.left_weights.len() != n1 || inst.right_weights.len() != n2 {
        return Err(Error::LengthMismatch {
            expected: n1 + n2,
            got: inst.left_weights.len() + inst.right_weights.len(),
        });
    }
    if inst.edges.iter().any(|&(i, j)| i >= n1 || j >= n2) {
        return Err(Error::InvalidGraph("edge endpoint out of range"));
    }

    let total: f64 = inst.left_weights.iter().sum();
    let scale = total.max(inst.right_weights.iter().sum()).max(1.0);
    let source = 0;
    let sink = n1 + n2 + 1;
    let mut net = FlowNetwork::new(n1 + n2 + 2, scale * 1e-13);
    for (i, &w) in inst.left_weights.iter().enumerate() {
        net.add_edge(source, 1 + i, w);
    }
    let middle: Vec<usize> = inst
        .edges
        .iter()
        .map(|&(i, j)| net.add_edge(1 + i, 1 + n1 + j, 2.0 * scale))
        .collect();
    for (j, &w) in inst.right_weights.iter().enumerate() {
        net.add_edge(1 + n1 + j, sink, w);
    }

    let flow = net.max_flow(source, sink);
    if flow < total - 1e-9 * scale {
        let reach = net.residual_reachable(source);
        let u: Vec<usize> = (0..n1).filter(|&i| reach[1 + i]).collect();
        return Err(Error::HallConditionViolated(u));
    }
    Ok(EdgeLabeling {
        labels: middle.iter().map(|&e| net.flow(e)).collect(),
    })
}

struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    original: Vec<f64>,
    eps: f64,
}

impl FlowNetwork {
    fn new(nodes: usize, eps: f64) -> Self {
        Self {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            original: Vec::new(),
            eps,
        }
    }

    /// Forward arc gets an even index, its reverse the following odd one.
    fn add_edge(&mut self, from: usize, to: usize, cap: f64) -> usize {
        let e = self.to.len();
        self.head[from].push(e);
        self.to.push(to);
        self.cap.push(cap);
        self.original.push(cap);
        self.head[to].push(e + 1);
        self.to.push(from);
        self.cap.push(0.0);
        self.original.push(0.0);
        e
    }

    fn flow(&self, e: usize) -> f64 {
        (self.original[e] - self.cap[e]).max(0.0)
    }

    fn levels(&self, source: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.head.len()];
        level[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &e in &self.head[v] {
                let w = self.to[e];
                if self.cap[e] > self.eps && level[w] == usize::MAX {
                    level[w] = level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    fn residual_reachable(&self, source: usize) -> Vec<bool> {
        self.levels(source)
            .into_iter()
            .map(|l| l != usize::MAX)
            .collect()
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let level = self.levels(source);
            if level[sink] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; self.head.len()];
            loop {
                let pushed = self.augment(source, sink, f64::INFINITY, &level, &mut next);
                if pushed <= self.eps {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        v: usize,
        sink: usize,
        limit: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if v == sink {
            return limit;
        }
        while next[v] < self.head[v].len() {
            let e = self.head[v][next[v]];
            let w = self.to[e];
            if self.cap[e] > self.eps && level[w] == level[v] + 1 {
                let pushed = self.augment(w, sink, limit.min(self.cap[e]), level, next);
                if pushed > self.eps {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[v] += 1;
        }
        0.0
    }
}
