//! Region graphs: a vertex set, a family of regions (vertex subsets) and the
//! containment order between them.
//!
//! Regions are stored as sorted vertex lists and referred to everywhere else
//! by their index in the order they were supplied.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::models::IsingModel;

pub type RegionId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionGraph {
    num_vertices: usize,
    domain_sizes: Vec<usize>,
    regions: Vec<Vec<usize>>,
    /// `(parent, child)` pairs of the Hasse diagram, sorted.
    hasse_edges: Vec<(RegionId, RegionId)>,
    parents: Vec<Vec<RegionId>>,
    children: Vec<Vec<RegionId>>,
    ancestors: Vec<Vec<RegionId>>,
    descendants: Vec<Vec<RegionId>>,
}

/// `a ⊆ b` for sorted slices.
pub(crate) fn is_subset(a: &[usize], b: &[usize]) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

impl RegionGraph {
    /// Build a region graph where every vertex has the same domain size.
    pub fn new(num_vertices: usize, domain_size: usize, regions: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_domain_sizes(vec![domain_size; num_vertices], regions)
    }

    /// Build a region graph with per-vertex domain sizes.
    pub fn with_domain_sizes(domain_sizes: Vec<usize>, regions: Vec<Vec<usize>>) -> Result<Self> {
        let num_vertices = domain_sizes.len();
        if let Some((vertex, &size)) = domain_sizes.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(Error::InvalidDomainSize { vertex, size });
        }
        let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(regions.len());
        for (i, mut r) in regions.into_iter().enumerate() {
            if r.is_empty() {
                return Err(Error::EmptyRegion(i));
            }
            r.sort_unstable();
            r.dedup();
            if let Some(&vertex) = r.iter().find(|&&v| v >= num_vertices) {
                return Err(Error::VertexOutOfRange {
                    region: i,
                    vertex,
                    num_vertices,
                });
            }
            if sorted.contains(&r) {
                return Err(Error::DuplicateRegion(i));
            }
            sorted.push(r);
        }

        let n = sorted.len();
        let mut ancestors = vec![Vec::new(); n];
        let mut descendants = vec![Vec::new(); n];
        for c in 0..n {
            for p in 0..n {
                if c != p && sorted[c].len() < sorted[p].len() && is_subset(&sorted[c], &sorted[p])
                {
                    ancestors[c].push(p);
                    descendants[p].push(c);
                }
            }
        }

        // transitive reduction: keep (p, c) unless some t sits strictly between
        let mut hasse_edges = Vec::new();
        for (c, anc) in ancestors.iter().enumerate() {
            for &p in anc {
                let between = anc.iter().any(|&t| t != p && descendants[p].contains(&t));
                if !between {
                    hasse_edges.push((p, c));
                }
            }
        }
        hasse_edges.sort_unstable();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in &hasse_edges {
            parents[c].push(p);
            children[p].push(c);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }

        Ok(Self {
            num_vertices,
            domain_sizes,
            regions: sorted,
            hasse_edges,
            parents,
            children,
            ancestors,
            descendants,
        })
    }

    /// Singletons for every vertex followed by one region per edge.
    pub fn pairwise(
        num_vertices: usize,
        domain_size: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        let mut regions: Vec<Vec<usize>> = (0..num_vertices).map(|v| vec![v]).collect();
        regions.extend(edges.iter().map(|&(s, t)| vec![s, t]));
        Self::new(num_vertices, domain_size, regions)
    }

    /// Region graph of a pairwise Ising model: regions `0..n` are the
    /// singletons, region `n + e` is edge `e`.
    pub fn from_ising(model: &IsingModel) -> Self {
        Self::pairwise(model.num_vertices(), 2, model.graph().edges())
            .expect("Ising graphs are simple")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn domain_size(&self, vertex: usize) -> usize {
        self.domain_sizes[vertex]
    }

    pub fn domain_sizes(&self) -> &[usize] {
        &self.domain_sizes
    }

    pub fn region(&self, r: RegionId) -> &[usize] {
        &self.regions[r]
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    /// Domain sizes of the variables of region `r`, in scope order.
    pub fn cards(&self, r: RegionId) -> Vec<usize> {
        self.regions[r]
            .iter()
            .map(|&v| self.domain_sizes[v])
            .collect()
    }

    pub fn table_size(&self, r: RegionId) -> usize {
        self.regions[r]
            .iter()
            .map(|&v| self.domain_sizes[v])
            .product()
    }

    /// Index of the region equal to `set`, if any.
    pub fn find_region(&self, set: &[usize]) -> Option<RegionId> {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        self.regions.iter().position(|r| *r == s)
    }

    pub fn hasse_edges(&self) -> &[(RegionId, RegionId)] {
        &self.hasse_edges
    }

    /// 𝒫(r): regions directly above `r`.
    pub fn parents(&self, r: RegionId) -> &[RegionId] {
        &self.parents[r]
    }

    /// 𝒞(r): regions directly below `r`.
    pub fn children(&self, r: RegionId) -> &[RegionId] {
        &self.children[r]
    }

    /// 𝒜(r) = {s : r ⊊ s}, ascending.
    pub fn ancestors(&self, r: RegionId) -> &[RegionId] {
        &self.ancestors[r]
    }

    /// {s : s ⊊ r}, ascending.
    pub fn descendants(&self, r: RegionId) -> &[RegionId] {
        &self.descendants[r]
    }

    /// ℱ(r) = {r} ∪ 𝒜(r), ascending.
    pub fn forebears(&self, r: RegionId) -> Vec<RegionId> {
        let mut out = self.ancestors[r].clone();
        out.push(r);
        out.sort_unstable();
        out
    }

    /// N(r): every region comparable with `r`, including `r`.
    pub fn neighbors(&self, r: RegionId) -> Vec<RegionId> {
        let mut out = self.forebears(r);
        out.extend_from_slice(&self.descendants[r]);
        out.sort_unstable();
        out
    }

    /// `a ⊆ b`.
    pub fn contains(&self, b: RegionId, a: RegionId) -> bool {
        a == b || self.ancestors[a].contains(&b)
    }

    /// Regions ordered so that every ancestor precedes its descendants.
    pub fn top_down_order(&self) -> Vec<RegionId> {
        let mut order: Vec<RegionId> = (0..self.num_regions()).collect();
        order.sort_by(|&a, &b| {
            self.regions[b]
                .len()
                .cmp(&self.regions[a].len())
                .then(a.cmp(&b))
        });
        order
    }

    /// Overcounting numbers `c_r = 1 - Σ_{s ∈ 𝒜(r)} c_s`.
    pub fn overcounting_numbers(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.num_regions()];
        for r in self.top_down_order() {
            c[r] = 1.0 - self.ancestors[r].iter().map(|&s| c[s]).sum::<f64>();
        }
        c
    }

    /// The Bethe (two-layer) view, when every containment relates a
    /// singleton to a larger region.
    pub fn two_layer_view(&self) -> Result<TwoLayerView<'_>> {
        TwoLayerView::new(self)
    }
}

/// A region graph whose only containments are singleton ⊂ factor.
///
/// Vertices and factors are addressed by position: vertex `i` is the
/// singleton region `vertex_region(i)`, factor `j` is `factor_region(j)`.
#[derive(Clone, Debug)]
pub struct TwoLayerView<'a> {
    graph: &'a RegionGraph,
    vertex_regions: Vec<RegionId>,
    factor_regions: Vec<RegionId>,
    factor_members: Vec<Vec<usize>>,
    vertex_factors: Vec<Vec<usize>>,
}

impl<'a> TwoLayerView<'a> {
    fn new(graph: &'a RegionGraph) -> Result<Self> {
        for (c, anc) in graph.ancestors.iter().enumerate() {
            if graph.regions[c].len() > 1 {
                if let Some(&p) = anc.first() {
                    return Err(Error::NotTwoLayer { inner: c, outer: p });
                }
            }
        }
        let vertex_regions: Vec<RegionId> = (0..graph.num_regions())
            .filter(|&r| graph.regions[r].len() == 1)
            .collect();
        let factor_regions: Vec<RegionId> = (0..graph.num_regions())
            .filter(|&r| graph.regions[r].len() > 1)
            .collect();
        let mut vertex_factors = vec![Vec::new(); vertex_regions.len()];
        let factor_members = factor_regions
            .iter()
            .enumerate()
            .map(|(j, &f)| {
                let members: Vec<usize> = vertex_regions
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| graph.ancestors[v].contains(&f))
                    .map(|(i, _)| i)
                    .collect();
                for &i in &members {
                    vertex_factors[i].push(j);
                }
                members
            })
            .collect();
        Ok(Self {
            graph,
            vertex_regions,
            factor_regions,
            factor_members,
            vertex_factors,
        })
    }

    pub fn graph(&self) -> &'a RegionGraph {
        self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_regions.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factor_regions.len()
    }

    pub fn vertex_region(&self, i: usize) -> RegionId {
        self.vertex_regions[i]
    }

    pub fn factor_region(&self, j: usize) -> RegionId {
        self.factor_regions[j]
    }

    pub fn vertex_regions(&self) -> &[RegionId] {
        &self.vertex_regions
    }

    pub fn factor_regions(&self) -> &[RegionId] {
        &self.factor_regions
    }

    /// Underlying vertex id of singleton `i`.
    pub fn vertex_id(&self, i: usize) -> usize {
        self.graph.regions[self.vertex_regions[i]][0]
    }

    /// Positions of the singleton vertices inside factor `j`.
    pub fn factor_members(&self, j: usize) -> &[usize] {
        &self.factor_members[j]
    }

    /// Positions of the factors containing vertex `i`.
    pub fn vertex_factors(&self, i: usize) -> &[usize] {
        &self.vertex_factors[i]
    }

    /// |α| for factor `j`.
    pub fn factor_size(&self, j: usize) -> usize {
        self.graph.regions[self.factor_regions[j]].len()
    }

    /// True when every factor has exactly two vertices.
    pub fn is_pairwise(&self) -> bool {
        (0..self.num_factors()).all(|j| self.factor_size(j) == 2)
    }

    /// Factor edge list in vertex positions (pairwise views only).
    pub fn pairwise_edges(&self) -> Option<Vec<(usize, usize)>> {
        if !self.is_pairwise() || self.factor_members.iter().any(|m| m.len() != 2) {
            return None;
        }
        Some(self.factor_members.iter().map(|m| (m[0], m[1])).collect())
    }

    /// Full weight vector `ρ` from factor weights with `ρ_s = 1 - Σ_{α ∋ s} ρ_α`.
    pub fn weights_from_factors(&self, factor_weights: &[f64]) -> Vec<f64> {
        let mut rho = vec![0.0; self.graph.num_regions()];
        for (j, &w) in factor_weights.iter().enumerate() {
            rho[self.factor_regions[j]] = w;
        }
        for (i, &r) in self.vertex_regions.iter().enumerate() {
            rho[r] = 1.0
                - self.vertex_factors[i]
                    .iter()
                    .map(|&j| factor_weights[j])
                    .sum::<f64>();
        }
        rho
    }
}
