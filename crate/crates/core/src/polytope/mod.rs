//! The polytope of concavity `ℂ` and the single-cycle forest polytope.
//!
//! Factor weights `ρ_F ∈ [0,1]^F` on a two-layer graph (vertex weights are
//! implied as `ρ_s = 1 - Σ_{α ∋ s} ρ_α`) give a concave entropy exactly when
//!
//! ```text
//! Σ_{α ∩ U ≠ ∅} (|α ∩ U| - 1) ρ_α ≤ |U|    for every U ⊆ V.
//! ```
//!
//! The indicator vectors of single-cycle forests (edge sets whose incidence
//! graph has at most one cycle per component) lie in `ℂ`, and for pairwise
//! graphs their convex hull is all of `ℂ`.

mod simplex;

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math::ln;
use crate::models::{complete_graph, exact_sqrt, seeded_rng, shuffle, uniform01, Graph};
use crate::region_graph::TwoLayerView;
use simplex::{phase_one, PhaseOne};

/// Largest vertex count for exhaustive subset checks.
pub const MAX_SUBSET_VERTICES: usize = 24;
/// Largest factor count for enumerating single-cycle forests.
pub const MAX_ENUMERATED_FACTORS: usize = 20;
/// Largest factor count for the convex-hull membership test.
pub const MAX_HULL_FACTORS: usize = 16;

const MEMBERSHIP_TOL: f64 = 1e-9;

/// Union-find that tracks node and edge counts per component.
#[derive(Clone, Debug)]
pub struct ComponentTracker {
    parent: Vec<usize>,
    nodes: Vec<usize>,
    edges: Vec<usize>,
}

impl ComponentTracker {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            nodes: vec![1; n],
            edges: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Would adding edge `(a, b)` keep every component at ≤ 1 cycle?
    pub fn can_add(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.edges[ra] < self.nodes[ra]
        } else {
            self.edges[ra] < self.nodes[ra] || self.edges[rb] < self.nodes[rb]
        }
    }

    pub fn add(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            self.edges[ra] += 1;
        } else {
            self.parent[rb] = ra;
            self.nodes[ra] += self.nodes[rb];
            self.edges[ra] += self.edges[rb] + 1;
        }
    }

    /// `(nodes, edges)` of every component.
    pub fn components(&mut self) -> Vec<(usize, usize)> {
        let roots: Vec<usize> = (0..self.parent.len())
            .filter(|&x| self.find(x) == x)
            .collect();
        roots
            .into_iter()
            .map(|x| (self.nodes[x], self.edges[x]))
            .collect()
    }
}

/// Every component of the graph `(n, edges)` has at most one cycle.
pub fn is_single_cycle_forest_graph(num_vertices: usize, edges: &[(usize, usize)]) -> bool {
    let mut uf = ComponentTracker::new(num_vertices);
    for &(a, b) in edges {
        uf.add(a, b);
    }
    uf.components().iter().all(|&(n, e)| e <= n)
}

/// Incidence graph of the selected factors and their vertices: nodes are
/// vertex positions followed by factor positions.
fn incidence_tracker(view: &TwoLayerView<'_>, subset: &[bool]) -> ComponentTracker {
    let nv = view.num_vertices();
    let mut uf = ComponentTracker::new(nv + view.num_factors());
    for (j, _) in subset.iter().enumerate().filter(|(_, &on)| on) {
        for &i in view.factor_members(j) {
            uf.add(i, nv + j);
        }
    }
    uf
}

/// Components of `F' ∪ N(F')` restricted to the touched nodes.
fn touched_components(view: &TwoLayerView<'_>, subset: &[bool]) -> Vec<(usize, usize)> {
    let mut uf = incidence_tracker(view, subset);
    uf.components()
        .into_iter()
        .filter(|&(_, e)| e > 0)
        .collect()
}

/// `F' ∪ N(F')` has at most one cycle per component.
pub fn is_single_cycle_forest(view: &TwoLayerView<'_>, subset: &[bool]) -> bool {
    assert_eq!(subset.len(), view.num_factors(), "one indicator per factor");
    touched_components(view, subset)
        .iter()
        .all(|&(n, e)| e <= n)
}

/// `F' ∪ N(F')` is acyclic.
pub fn is_forest(view: &TwoLayerView<'_>, subset: &[bool]) -> bool {
    assert_eq!(subset.len(), view.num_factors(), "one indicator per factor");
    touched_components(view, subset).iter().all(|&(n, e)| e < n)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    OutOfRange {
        factor: usize,
        value: f64,
    },
    /// `Σ_α coefficients[α] ρ_α = lhs > rhs = |U|`, with `U` given as
    /// vertex positions.
    Subset {
        vertices: Vec<usize>,
        coefficients: Vec<f64>,
        lhs: f64,
        rhs: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub violation: Option<Violation>,
}

fn factor_masks(view: &TwoLayerView<'_>) -> Vec<u64> {
    (0..view.num_factors())
        .map(|j| view.factor_members(j).iter().fold(0u64, |m, &i| m | 1 << i))
        .collect()
}

fn check_factor_weights(view: &TwoLayerView<'_>, rho_f: &[f64]) -> Result<()> {
    if rho_f.len() != view.num_factors() {
        return Err(Error::LengthMismatch {
            expected: view.num_factors(),
            got: rho_f.len(),
        });
    }
    if rho_f.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidWeights("factor weights must be finite"));
    }
    Ok(())
}

/// Exhaustive membership in `ℂ`. On failure the reported subset is the most
/// violated one, ties going to the smallest `|U|`.
pub fn in_concavity_polytope(view: &TwoLayerView<'_>, rho_f: &[f64]) -> Result<Membership> {
    check_factor_weights(view, rho_f)?;
    if let Some((factor, &value)) = rho_f
        .iter()
        .enumerate()
        .find(|(_, &w)| !(0.0..=1.0).contains(&w))
    {
        return Ok(Membership {
            member: false,
            violation: Some(Violation::OutOfRange { factor, value }),
        });
    }
    let n = view.num_vertices();
    if n > MAX_SUBSET_VERTICES {
        return Err(Error::TooManyVertices {
            count: n,
            cap: MAX_SUBSET_VERTICES,
        });
    }
    let masks = factor_masks(view);
    let mut worst: Option<(f64, u32, u64)> = None;
    for u in 1u64..(1u64 << n) {
        let size = u.count_ones();
        let lhs: f64 = masks
            .iter()
            .zip(rho_f)
            .map(|(&m, &w)| (m & u).count_ones().saturating_sub(1) as f64 * w)
            .sum();
        let excess = lhs - size as f64;
        if excess > MEMBERSHIP_TOL {
            let better = match worst {
                None => true,
                Some((e, s, _)) => {
                    excess > e + MEMBERSHIP_TOL || (excess >= e - MEMBERSHIP_TOL && size < s)
                }
            };
            if better {
                worst = Some((excess, size, u));
            }
        }
    }
    Ok(match worst {
        None => Membership {
            member: true,
            violation: None,
        },
        Some((_, size, u)) => {
            let coefficients: Vec<f64> = masks
                .iter()
                .map(|&m| (m & u).count_ones().saturating_sub(1) as f64)
                .collect();
            let lhs = coefficients.iter().zip(rho_f).map(|(c, w)| c * w).sum();
            Membership {
                member: false,
                violation: Some(Violation::Subset {
                    vertices: (0..n).filter(|&i| u >> i & 1 == 1).collect(),
                    coefficients,
                    lhs,
                    rhs: size as f64,
                }),
            }
        }
    })
}

/// Every indicator vector of a single-cycle forest, in lexicographic order
/// (factor 0 most significant, absent before present).
pub fn enumerate_f(view: &TwoLayerView<'_>) -> Result<Vec<Vec<bool>>> {
    let m = view.num_factors();
    if m > MAX_ENUMERATED_FACTORS {
        return Err(Error::TooManyFactors {
            count: m,
            cap: MAX_ENUMERATED_FACTORS,
        });
    }
    let mut out = Vec::new();
    let mut current = vec![false; m];
    // the family is closed under taking subsets, so infeasible prefixes prune
    fn walk(view: &TwoLayerView<'_>, j: usize, current: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if j == current.len() {
            out.push(current.clone());
            return;
        }
        walk(view, j + 1, current, out);
        current[j] = true;
        if is_single_cycle_forest(view, current) {
            walk(view, j + 1, current, out);
        }
        current[j] = false;
    }
    walk(view, 0, &mut current, &mut out);
    Ok(out)
}

/// Elements of `𝔽` not strictly contained in another element.
pub fn maximal_elements(family: &[Vec<bool>]) -> Vec<Vec<bool>> {
    family
        .iter()
        .filter(|a| {
            !family
                .iter()
                .any(|b| *a != b && a.iter().zip(b.iter()).all(|(&x, &y)| !x || y))
        })
        .cloned()
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum HullMembership {
    /// Convex weights over `enumerate_f(view)`; zero weights are omitted.
    Member { weights: Vec<(usize, f64)> },
    /// `normal · v ≤ offset` for every `v ∈ 𝔽` while
    /// `normal · ρ = offset + margin` with `margin > 0`.
    NotMember {
        normal: Vec<f64>,
        offset: f64,
        margin: f64,
    },
}

impl HullMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, Self::Member { .. })
    }
}

/// Exact-at-desk-scale membership of `ρ_F` in `conv(𝔽)`.
pub fn in_conv_f(view: &TwoLayerView<'_>, rho_f: &[f64]) -> Result<HullMembership> {
    check_factor_weights(view, rho_f)?;
    let m = view.num_factors();
    if m > MAX_HULL_FACTORS {
        return Err(Error::TooManyFactors {
            count: m,
            cap: MAX_HULL_FACTORS,
        });
    }
    let family = enumerate_f(view)?;
    let cols = family.len();
    let rows = m + 1;
    let mut a = vec![0.0; rows * cols];
    for (k, v) in family.iter().enumerate() {
        for (j, &on) in v.iter().enumerate() {
            if on {
                a[j * cols + k] = 1.0;
            }
        }
        a[m * cols + k] = 1.0;
    }
    let mut b = rho_f.to_vec();
    b.push(1.0);
    match phase_one(&a, &b, rows, cols) {
        PhaseOne::Feasible(x) => Ok(HullMembership::Member {
            weights: x
                .into_iter()
                .enumerate()
                .filter(|&(_, w)| w > 0.0)
                .collect(),
        }),
        PhaseOne::Infeasible(y) => {
            let normal = y[..m].to_vec();
            let dot = |v: &[f64]| -> f64 { normal.iter().zip(v).map(|(a, b)| a * b).sum() };
            let offset = family
                .iter()
                .map(|v| {
                    let ind: Vec<f64> = v.iter().map(|&on| if on { 1.0 } else { 0.0 }).collect();
                    dot(&ind)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let margin = dot(rho_f) - offset;
            Ok(HullMembership::NotMember {
                normal,
                offset,
                margin,
            })
        }
    }
}

/// Random points of `conv(𝔽)`: Dirichlet(1) combinations of maximal
/// single-cycle forests grown greedily along random factor orders.
pub fn sample_conv_f(view: &TwoLayerView<'_>, count: usize, seed: u64) -> Vec<Vec<f64>> {
    const FORESTS_PER_SAMPLE: usize = 4;
    let m = view.num_factors();
    let nv = view.num_vertices();
    let mut rng = seeded_rng(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut point = vec![0.0; m];
        let mut total = 0.0;
        for _ in 0..FORESTS_PER_SAMPLE {
            let mut order: Vec<usize> = (0..m).collect();
            shuffle(&mut rng, &mut order);
            let forest = greedy_incidence_forest(view, nv, &order);
            let w = -ln(1.0 - uniform01(&mut rng));
            total += w;
            for (p, &on) in point.iter_mut().zip(&forest) {
                if on {
                    *p += w;
                }
            }
        }
        for p in &mut point {
            *p /= total;
        }
        out.push(point);
    }
    out
}

/// Adds factors in `order` while the incidence graph stays a single-cycle
/// forest. Adding a whole factor may join several components at once, so
/// the test is done on a scratch copy.
fn greedy_incidence_forest(view: &TwoLayerView<'_>, nv: usize, order: &[usize]) -> Vec<bool> {
    let mut chosen = vec![false; view.num_factors()];
    let mut uf = ComponentTracker::new(nv + view.num_factors());
    for &j in order {
        let mut trial = uf.clone();
        let ok = view.factor_members(j).iter().all(|&i| {
            let fits = trial.can_add(i, nv + j);
            trial.add(i, nv + j);
            fits
        });
        if ok {
            uf = trial;
            chosen[j] = true;
        }
    }
    chosen
}

fn check_positive_weights(graph: &Graph, weights: &[f64]) -> Result<()> {
    if weights.len() != graph.num_edges() {
        return Err(Error::LengthMismatch {
            expected: graph.num_edges(),
            got: weights.len(),
        });
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
    {
        return Err(Error::NonPositiveWeight { index, value });
    }
    Ok(())
}

/// Greedy maximum-weight single-cycle forest (edges by decreasing weight,
/// lower index first on ties). Returns the indicator and its weight.
pub fn max_weight_single_cycle_forest(graph: &Graph, weights: &[f64]) -> Result<(Vec<bool>, f64)> {
    check_positive_weights(graph, weights)?;
    let mut order: Vec<usize> = (0..graph.num_edges()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut uf = ComponentTracker::new(graph.num_vertices());
    let mut chosen = vec![false; graph.num_edges()];
    let mut value = 0.0;
    for e in order {
        let (s, t) = graph.edges()[e];
        if uf.can_add(s, t) {
            uf.add(s, t);
            chosen[e] = true;
            value += weights[e];
        }
    }
    Ok((chosen, value))
}

/// `Σ_{i=1..K} (|V_i| - #tree components of G_i)` where `G_i` keeps the
/// edges of weight at least `i` and the vertices they touch.
pub fn lp_upper_bound(graph: &Graph, weights: &[f64]) -> Result<f64> {
    check_positive_weights(graph, weights)?;
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, &w)| w != libm::round(w))
    {
        return Err(Error::NonIntegerWeight { index, value });
    }
    let top = weights.iter().fold(0.0f64, |m, &w| m.max(w)) as usize;
    let mut bound = 0usize;
    for level in 1..=top {
        let mut uf = ComponentTracker::new(graph.num_vertices());
        for (e, &(s, t)) in graph.edges().iter().enumerate() {
            if weights[e] >= level as f64 {
                uf.add(s, t);
            }
        }
        for (nodes, edges) in uf.components() {
            if edges > 0 {
                bound += if edges + 1 == nodes { nodes - 1 } else { nodes };
            }
        }
    }
    Ok(bound as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFamily {
    Complete(usize),
    Torus(usize),
}

impl GraphFamily {
    pub fn graph(self) -> Result<Graph> {
        match self {
            Self::Complete(n) => complete_graph(n),
            Self::Torus(n) => crate::models::torus_grid(n),
        }
    }
}

/// Largest uniform edge weights inside the spanning-forest and the
/// single-cycle-forest polytopes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub rho_tree: f64,
    pub rho_cycle: f64,
}

pub fn uniform_weight_thresholds(family: GraphFamily) -> Result<Thresholds> {
    match family {
        GraphFamily::Complete(n) => {
            if n < 3 {
                return Err(Error::BadFamilyParameter("complete graph needs n >= 3"));
            }
            let n = n as f64;
            Ok(Thresholds {
                rho_tree: 2.0 / n,
                rho_cycle: 2.0 / (n - 1.0),
            })
        }
        GraphFamily::Torus(n) => match exact_sqrt(n) {
            Some(side) if side >= 3 => {
                let n = n as f64;
                Ok(Thresholds {
                    rho_tree: (n - 1.0) / (2.0 * n),
                    rho_cycle: 0.5,
                })
            }
            _ => Err(Error::BadFamilyParameter(
                "torus needs a perfect square n >= 9",
            )),
        },
    }
}

/// Thresholds of an arbitrary simple graph by enumerating vertex subsets:
/// `ρ_tree = min (|U| - 1) / |E(U)|` and `ρ_cycle = min(1, min |U| / |E(U)|)`
/// over subsets spanning at least one edge.
pub fn graph_thresholds(graph: &Graph) -> Result<Thresholds> {
    let n = graph.num_vertices();
    if n > MAX_SUBSET_VERTICES {
        return Err(Error::TooManyVertices {
            count: n,
            cap: MAX_SUBSET_VERTICES,
        });
    }
    if graph.num_edges() == 0 {
        return Err(Error::InvalidGraph("graph has no edges"));
    }
    let masks: Vec<u64> = graph
        .edges()
        .iter()
        .map(|&(s, t)| 1u64 << s | 1u64 << t)
        .collect();
    let mut rho_tree = f64::INFINITY;
    let mut rho_cycle: f64 = 1.0;
    for u in 1u64..(1u64 << n) {
        let inside = masks.iter().filter(|&&m| m & u == m).count();
        if inside == 0 {
            continue;
        }
        let size = u.count_ones() as f64;
        rho_tree = rho_tree.min((size - 1.0) / inside as f64);
        rho_cycle = rho_cycle.min(size / inside as f64);
    }
    Ok(Thresholds {
        rho_tree,
        rho_cycle,
    })
}

/// A point of `ℂ ∖ conv(𝔽)` for graphs that are not themselves single-cycle
/// forests: `1_{F*} + 1_{α*} / (|α*| - 1)` where `F*` is the first maximal
/// element of `𝔽` whose incidence graph is a forest and `α*` is the first
/// factor outside it. `None` when no such `F*` exists.
pub fn proposition1_witness(view: &TwoLayerView<'_>) -> Result<Option<Vec<f64>>> {
    let m = view.num_factors();
    if is_single_cycle_forest(view, &vec![true; m]) {
        return Ok(None);
    }
    let family = enumerate_f(view)?;
    let Some(f_star) = maximal_elements(&family)
        .into_iter()
        .find(|f| is_forest(view, f))
    else {
        return Ok(None);
    };
    let alpha = f_star
        .iter()
        .position(|&on| !on)
        .expect("a maximal element of a non-forest graph is proper");
    let mut rho: Vec<f64> = f_star
        .iter()
        .map(|&on| if on { 1.0 } else { 0.0 })
        .collect();
    rho[alpha] = 1.0 / (view.factor_size(alpha) as f64 - 1.0);
    Ok(Some(rho))
}

/// Uniform random integer in `1..=k`.
pub fn random_integer_weight<R: RngCore>(rng: &mut R, k: usize) -> f64 {
    (1 + crate::models::uniform_index(rng, k)) as f64
}
