//! Graph generators and random Ising instances.
//!
//! Random numbers come from ChaCha8 seeded through `seed_from_u64`, and
//! uniforms are built from the top 53 bits of a `u64` draw, so a seed yields
//! the same model on every platform.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::region_graph::RegionGraph;
use crate::tables::FactorTable;

/// Simple undirected graph; edges are stored with `s < t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Rejects self-loops, out-of-range endpoints and repeated edges.
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (s, t) in edges {
            if s == t {
                return Err(Error::InvalidGraph("self-loop"));
            }
            if s >= num_vertices || t >= num_vertices {
                return Err(Error::InvalidGraph("edge endpoint out of range"));
            }
            let e = (s.min(t), s.max(t));
            if normalized.contains(&e) {
                return Err(Error::InvalidGraph("repeated edge"));
            }
            normalized.push(e);
        }
        Ok(Self {
            num_vertices,
            edges: normalized,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = alloc::vec![0; self.num_vertices];
        for &(s, t) in &self.edges {
            d[s] += 1;
            d[t] += 1;
        }
        d
    }

    /// For each vertex, `(neighbor, edge index)` pairs.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = alloc::vec![Vec::new(); self.num_vertices];
        for (e, &(s, t)) in self.edges.iter().enumerate() {
            adj[s].push((t, e));
            adj[t].push((s, e));
        }
        adj
    }
}

/// K_n.
pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::TooSmall("complete graph needs at least 2 vertices"));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for s in 0..n {
        for t in s + 1..n {
            edges.push((s, t));
        }
    }
    Graph::new(n, edges)
}

/// Integer square root when `n` is a perfect square.
pub(crate) fn exact_sqrt(n: usize) -> Option<usize> {
    let mut r = 0usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// T_n: the √n × √n grid with wrap-around, every vertex of degree four.
pub fn torus_grid(n: usize) -> Result<Graph> {
    let side = exact_sqrt(n).ok_or(Error::NotPerfectSquare(n))?;
    if side < 3 {
        return Err(Error::TooSmall("torus side must be at least 3"));
    }
    let id = |r: usize, c: usize| r * side + c;
    let mut edges = Vec::with_capacity(2 * n);
    for r in 0..side {
        for c in 0..side {
            edges.push((id(r, c), id(r, (c + 1) % side)));
            edges.push((id(r, c), id((r + 1) % side, c)));
        }
    }
    Graph::new(n, edges)
}

/// Pairwise binary model with `γ_s x_s` and `γ_st x_s x_t` potentials,
/// `x ∈ {-1, +1}`. State index 0 stands for -1 and index 1 for +1.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    graph: Graph,
    gamma_s: Vec<f64>,
    gamma_st: Vec<f64>,
}

/// Spin value of a binary state index.
#[inline]
pub fn spin(state: usize) -> f64 {
    if state == 0 {
        -1.0
    } else {
        1.0
    }
}

impl IsingModel {
    pub fn new(graph: Graph, gamma_s: Vec<f64>, gamma_st: Vec<f64>) -> Result<Self> {
        if gamma_s.len() != graph.num_vertices() {
            return Err(Error::LengthMismatch {
                expected: graph.num_vertices(),
                got: gamma_s.len(),
            });
        }
        if gamma_st.len() != graph.num_edges() {
            return Err(Error::LengthMismatch {
                expected: graph.num_edges(),
                got: gamma_st.len(),
            });
        }
        if gamma_s.iter().chain(&gamma_st).any(|g| !g.is_finite()) {
            return Err(Error::InvalidGraph("non-finite potential"));
        }
        Ok(Self {
            graph,
            gamma_s,
            gamma_st,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn gamma_s(&self) -> &[f64] {
        &self.gamma_s
    }

    pub fn gamma_st(&self) -> &[f64] {
        &self.gamma_st
    }

    /// Log-potential tables aligned with [`RegionGraph::from_ising`].
    pub fn log_potentials(&self) -> Vec<FactorTable> {
        let mut out = Vec::with_capacity(self.num_vertices() + self.graph.num_edges());
        for (v, &g) in self.gamma_s.iter().enumerate() {
            out.push(FactorTable::from_fn(alloc::vec![v], alloc::vec![2], |a| {
                g * spin(a[0])
            }));
        }
        for (&(s, t), &g) in self.graph.edges().iter().zip(&self.gamma_st) {
            out.push(FactorTable::from_fn(
                alloc::vec![s, t],
                alloc::vec![2, 2],
                |a| g * spin(a[0]) * spin(a[1]),
            ));
        }
        out
    }

    pub fn region_graph(&self) -> RegionGraph {
        RegionGraph::from_ising(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    /// `γ_st ~ Uniform[0, ω_st]`.
    Attractive,
    /// `γ_st ~ Uniform[-ω_st, ω_st]`.
    Mixed,
}

pub const DEFAULT_OMEGA_S: f64 = 0.1;
pub const DEFAULT_OMEGA_ST: f64 = 2.0;

/// Seeded generator used everywhere randomness is needed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on [0, 1) from the top 53 bits of one `u64` draw.
pub fn uniform01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn uniform<R: RngCore>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Uniform integer in `0..n`.
pub fn uniform_index<R: RngCore>(rng: &mut R, n: usize) -> usize {
    ((uniform01(rng) * n as f64) as usize).min(n - 1)
}

/// Fisher–Yates shuffle driven by [`uniform_index`].
pub fn shuffle<R: RngCore, T>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Random Ising potentials on `graph`. Draws vertex fields first (ascending)
/// and then edge couplings (ascending).
pub fn sample_ising(
    graph: &Graph,
    kind: CouplingKind,
    omega_s: f64,
    omega_st: f64,
    seed: u64,
) -> Result<IsingModel> {
    if !(omega_s > 0.0 && omega_st > 0.0) {
        return Err(Error::InvalidWeights("omegas must be positive"));
    }
    let mut rng = seeded_rng(seed);
    let gamma_s: Vec<f64> = (0..graph.num_vertices())
        .map(|_| uniform(&mut rng, 0.0, omega_s))
        .collect();
    let lo = match kind {
        CouplingKind::Attractive => 0.0,
        CouplingKind::Mixed => -omega_st,
    };
    let gamma_st = (0..graph.num_edges())
        .map(|_| uniform(&mut rng, lo, omega_st))
        .collect();
    IsingModel::new(graph.clone(), gamma_s, gamma_st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_sizes() {
        assert_eq!(complete_graph(5).unwrap().num_edges(), 10);
        assert_eq!(complete_graph(2).unwrap().num_edges(), 1);
        assert_eq!(complete_graph(15).unwrap().num_edges(), 105);
        assert!(complete_graph(1).is_err());
    }

    #[test]
    fn torus_sizes() {
        let t9 = torus_grid(9).unwrap();
        assert_eq!(t9.num_edges(), 18);
        assert!(t9.degrees().iter().all(|&d| d == 4));
        assert_eq!(torus_grid(25).unwrap().num_edges(), 50);
        assert_eq!(
            torus_grid(4),
            Err(Error::TooSmall("torus side must be at least 3"))
        );
        assert_eq!(torus_grid(10), Err(Error::NotPerfectSquare(10)));
    }

    #[test]
    fn sampling_ranges_and_determinism() {
        let g = complete_graph(5).unwrap();
        let a = sample_ising(&g, CouplingKind::Attractive, 0.1, 2.0, 3).unwrap();
        assert!(a.gamma_st().iter().all(|&x| (0.0..=2.0).contains(&x)));
        assert!(a.gamma_s().iter().all(|&x| (0.0..=0.1).contains(&x)));
        let m = sample_ising(&g, CouplingKind::Mixed, 0.1, 2.0, 3).unwrap();
        assert!(m.gamma_st().iter().all(|&x| (-2.0..=2.0).contains(&x)));
        assert!(m.gamma_st().iter().any(|&x| x < 0.0));
        let again = sample_ising(&g, CouplingKind::Mixed, 0.1, 2.0, 3).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn rejects_non_simple_graphs() {
        assert!(Graph::new(3, alloc::vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, alloc::vec![(1, 1)]).is_err());
    }

    #[test]
    fn ising_region_graph_counts() {
        let k5 = complete_graph(5).unwrap();
        let m = sample_ising(&k5, CouplingKind::Mixed, 0.1, 2.0, 0).unwrap();
        assert_eq!(m.region_graph().num_regions(), 15);
        let t9 = torus_grid(9).unwrap();
        let m = sample_ising(&t9, CouplingKind::Mixed, 0.1, 2.0, 0).unwrap();
        assert_eq!(m.region_graph().num_regions(), 27);
    }
}
