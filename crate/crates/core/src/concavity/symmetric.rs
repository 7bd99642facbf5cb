//! The two-parameter symmetric family on binary region graphs.
//!
//! With spins `x ∈ {-1, +1}` (state 0 is `-1`), a region of size `k` gets
//!
//! ```text
//! τ(x) = 2^-k (1 ± 2^(k-1) q1 + (2^(k-1) - 1) q2)   x all +1 / all -1
//! τ(x) = 2^-k (1 - q2)                              otherwise
//! ```
//!
//! which is locally consistent for every `(q1, q2)` with non-negative
//! entries. Along this slice the entropy `ζ(q) = H(τ(q); ρ)` depends on `ρ`
//! only through the per-size sums `c_k`, and its Hessian at `q1 = 0` is
//! diagonal with closed-form entries.

use alloc::vec;
use alloc::vec::Vec;

use super::probe::curvature_along;
use crate::error::{Error, Result};
use crate::objective::{check_weights, kikuchi_entropy};
use crate::region_graph::{RegionGraph, TwoLayerView};
use crate::tables::{FactorTable, Pseudomarginals};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricPoint {
    pub q1: f64,
    pub q2: f64,
}

impl SymmetricPoint {
    pub fn new(q1: f64, q2: f64) -> Self {
        Self { q1, q2 }
    }
}

fn require_binary(graph: &RegionGraph) -> Result<()> {
    if graph.domain_sizes().iter().any(|&d| d != 2) {
        return Err(Error::NonBinaryDomain);
    }
    Ok(())
}

fn pow2(k: usize) -> f64 {
    libm::ldexp(1.0, k as i32)
}

fn region_table(graph: &RegionGraph, r: usize, q: SymmetricPoint) -> FactorTable {
    let k = graph.region(r).len();
    let half = pow2(k - 1);
    let scale = 1.0 / pow2(k);
    let diag = 1.0 + (half - 1.0) * q.q2;
    let mut t = FactorTable::filled(graph.region(r).to_vec(), vec![2; k], scale * (1.0 - q.q2));
    let last = t.len() - 1;
    t[0] = scale * (diag - half * q.q1);
    t[last] = scale * (diag + half * q.q1);
    t
}

/// `τ(q)` on every region. Fails with `InfeasiblePoint` when an entry is
/// negative.
pub fn symmetric_pseudomarginal(graph: &RegionGraph, q: SymmetricPoint) -> Result<Pseudomarginals> {
    require_binary(graph)?;
    let tau = Pseudomarginals::new(
        (0..graph.num_regions())
            .map(|r| region_table(graph, r, q))
            .collect(),
    );
    let min_entry = tau.min_entry();
    if !(min_entry >= 0.0) {
        return Err(Error::InfeasiblePoint { min_entry });
    }
    Ok(tau)
}

/// `ζ(q) = H(τ(q); ρ)`.
pub fn zeta(graph: &RegionGraph, rho: &[f64], q: SymmetricPoint) -> Result<f64> {
    kikuchi_entropy(graph, &symmetric_pseudomarginal(graph, q)?, rho)
}

/// `(k, c_k)` with `c_k` the total weight of regions of size `k`, sorted by `k`.
pub fn zeta_coefficients(graph: &RegionGraph, rho: &[f64]) -> Result<Vec<(usize, f64)>> {
    check_weights(graph, rho)?;
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (r, &w) in rho.iter().enumerate() {
        let k = graph.region(r).len();
        match out.iter_mut().find(|(size, _)| *size == k) {
            Some(entry) => entry.1 += w,
            None => out.push((k, w)),
        }
    }
    out.sort_by_key(|&(k, _)| k);
    Ok(out)
}

/// Hessian of `ζ` at `(0, q2)`; the off-diagonal entry vanishes by symmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaHessian {
    pub d11: f64,
    pub d22: f64,
}

pub fn zeta_hessian(coefficients: &[(usize, f64)], q2: f64) -> ZetaHessian {
    let mut d11 = 0.0;
    let mut d22 = 0.0;
    for &(k, c) in coefficients {
        let half = pow2(k - 1);
        let m = half - 1.0;
        d11 -= half * c / (1.0 + m * q2);
        d22 -= m * c / ((1.0 + m * q2) * (1.0 - q2));
    }
    ZetaHessian { d11, d22 }
}

/// Central second difference of `ζ` in `q1` at `(0, q2)`.
pub fn zeta_q1_second_difference(
    graph: &RegionGraph,
    rho: &[f64],
    q2: f64,
    step: f64,
) -> Result<f64> {
    let tau = symmetric_pseudomarginal(graph, SymmetricPoint::new(0.0, q2))?;
    // every entry of τ is affine in q1, so the derivative is the direction
    let direction: Vec<FactorTable> = tau
        .tables()
        .iter()
        .map(|t| {
            let mut d = t.map(|_| 0.0);
            let last = d.len() - 1;
            d[0] = -0.5;
            d[last] = 0.5;
            d
        })
        .collect();
    curvature_along(graph, &tau, rho, &direction, step)
}

/// Sub-region-graph on the singleton positions `subset`: its regions are the
/// vertices of `subset` plus every non-empty `α ∩ subset`, with coinciding
/// sets merged and their weights added. Vertices are renumbered by rank of
/// their original id.
pub fn restrict_to_vertices(
    view: &TwoLayerView<'_>,
    rho: &[f64],
    subset: &[usize],
) -> Result<(RegionGraph, Vec<f64>)> {
    let graph = view.graph();
    check_weights(graph, rho)?;
    let (new_id, ordered) = renumbering(view, subset)?;
    let mut regions: Vec<Vec<usize>> = ordered.iter().map(|&i| vec![new_id[i].unwrap()]).collect();
    let mut weights: Vec<f64> = ordered
        .iter()
        .map(|&i| rho[view.vertex_region(i)])
        .collect();
    for j in 0..view.num_factors() {
        let mut inter: Vec<usize> = view
            .factor_members(j)
            .iter()
            .filter_map(|&i| new_id[i])
            .collect();
        if inter.is_empty() {
            continue;
        }
        inter.sort_unstable();
        let w = rho[view.factor_region(j)];
        match regions.iter().position(|r| *r == inter) {
            Some(p) => weights[p] += w,
            None => {
                regions.push(inter);
                weights.push(w);
            }
        }
    }
    let domains = ordered
        .iter()
        .map(|&i| graph.domain_size(view.vertex_id(i)))
        .collect();
    Ok((RegionGraph::with_domain_sizes(domains, regions)?, weights))
}

/// Maps vertex positions to their rank among `subset` (by original id).
fn renumbering(
    view: &TwoLayerView<'_>,
    subset: &[usize],
) -> Result<(Vec<Option<usize>>, Vec<usize>)> {
    let mut ordered: Vec<usize> = subset.to_vec();
    if ordered.is_empty() {
        return Err(Error::TooSmall("vertex subset must be non-empty"));
    }
    if let Some(&bad) = ordered.iter().find(|&&i| i >= view.num_vertices()) {
        return Err(Error::VertexOutOfRange {
            region: 0,
            vertex: bad,
            num_vertices: view.num_vertices(),
        });
    }
    ordered.sort_by_key(|&i| view.vertex_id(i));
    ordered.dedup();
    let mut new_id = vec![None; view.num_vertices()];
    for (rank, &i) in ordered.iter().enumerate() {
        new_id[i] = Some(rank);
    }
    Ok((new_id, ordered))
}

/// Embeds pseudomarginals of the restricted graph back into the full graph:
/// vertices outside `subset` are uniform and every factor is the restricted
/// table on `α ∩ subset` times uniform on the rest.
pub fn lift_from_restriction(
    view: &TwoLayerView<'_>,
    subset: &[usize],
    restricted: &RegionGraph,
    tau: &Pseudomarginals,
) -> Result<Pseudomarginals> {
    tau.check_scopes(restricted)?;
    let graph = view.graph();
    let (new_id, _) = renumbering(view, subset)?;
    // original vertex id -> restricted id
    let mut vertex_map = vec![None; graph.num_vertices()];
    for (i, id) in new_id.iter().enumerate() {
        vertex_map[view.vertex_id(i)] = *id;
    }
    let mut tables = Vec::with_capacity(graph.num_regions());
    for r in 0..graph.num_regions() {
        let scope = graph.region(r).to_vec();
        let cards = graph.cards(r);
        let inside: Vec<(usize, usize)> = scope
            .iter()
            .enumerate()
            .filter_map(|(pos, &v)| vertex_map[v].map(|nid| (pos, nid)))
            .collect();
        if inside.is_empty() {
            tables.push(FactorTable::uniform(scope, cards));
            continue;
        }
        let ids: Vec<usize> = inside.iter().map(|&(_, nid)| nid).collect();
        let source = restricted.find_region(&ids).ok_or(Error::ScopeMismatch(
            "restricted graph lacks an intersection region",
        ))?;
        let outside: f64 = cards
            .iter()
            .enumerate()
            .filter(|(pos, _)| !inside.iter().any(|&(p, _)| p == *pos))
            .map(|(_, &c)| c as f64)
            .product();
        let src = &tau[source];
        let mut sub = vec![0usize; inside.len()];
        tables.push(FactorTable::from_fn(scope, cards, |x| {
            for (slot, &(pos, _)) in sub.iter_mut().zip(&inside) {
                *slot = x[pos];
            }
            src.get(&sub) / outside
        }));
    }
    Ok(Pseudomarginals::new(tables))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::complete_graph;
    use crate::objective::validate_local_polytope;

    fn k4() -> RegionGraph {
        RegionGraph::pairwise(4, 2, complete_graph(4).unwrap().edges()).unwrap()
    }

    #[test]
    fn family_is_locally_consistent() {
        let g = RegionGraph::new(
            4,
            2,
            vec![
                vec![0, 1, 2],
                vec![1, 2, 3],
                vec![0],
                vec![1],
                vec![2],
                vec![3],
            ],
        )
        .unwrap();
        for &(q1, q2) in &[(0.0, 0.0), (0.2, 0.5), (-0.3, 0.9), (0.0, 1.0)] {
            let tau = symmetric_pseudomarginal(&g, SymmetricPoint::new(q1, q2)).unwrap();
            assert!(validate_local_polytope(&g, &tau, 1e-12).unwrap().passed);
        }
    }

    #[test]
    fn pairwise_table_values() {
        let g = RegionGraph::pairwise(2, 2, &[(0, 1)]).unwrap();
        let tau = symmetric_pseudomarginal(&g, SymmetricPoint::new(0.0, 0.5)).unwrap();
        assert_eq!(tau[2].values(), &[0.375, 0.125, 0.125, 0.375]);
        assert_eq!(tau[0].values(), &[0.5, 0.5]);
    }

    #[test]
    fn infeasible_points_rejected() {
        let g = k4();
        assert!(matches!(
            symmetric_pseudomarginal(&g, SymmetricPoint::new(0.0, 1.1)),
            Err(Error::InfeasiblePoint { .. })
        ));
        assert!(matches!(
            symmetric_pseudomarginal(&g, SymmetricPoint::new(0.9, 0.5)),
            Err(Error::InfeasiblePoint { .. })
        ));
        let g3 = RegionGraph::new(2, 3, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(
            symmetric_pseudomarginal(&g3, SymmetricPoint::new(0.0, 0.0)),
            Err(Error::NonBinaryDomain)
        );
    }

    #[test]
    fn coefficients_group_by_size() {
        let g = k4();
        let c = zeta_coefficients(&g, &g.overcounting_numbers()).unwrap();
        assert_eq!(c, vec![(1, -8.0), (2, 6.0)]);
    }

    #[test]
    fn closed_form_matches_second_difference() {
        let g = k4();
        let rho = g.overcounting_numbers();
        let c = zeta_coefficients(&g, &rho).unwrap();
        for &q2 in &[0.0, 0.3, 0.9, 0.999] {
            let fd = zeta_q1_second_difference(&g, &rho, q2, 1e-4).unwrap();
            let cf = zeta_hessian(&c, q2).d11;
            assert!(
                (fd - cf).abs() < 1e-6 * (1.0 + cf.abs()),
                "q2 = {q2}: {fd} vs {cf}"
            );
        }
    }

    #[test]
    fn d22_matches_naive_difference() {
        let g = k4();
        let rho = g.overcounting_numbers();
        let c = zeta_coefficients(&g, &rho).unwrap();
        let q2 = 0.4;
        let h = 1e-4;
        let z = |q| zeta(&g, &rho, SymmetricPoint::new(0.0, q)).unwrap();
        let fd = (z(q2 + h) - 2.0 * z(q2) + z(q2 - h)) / (h * h);
        assert!((fd - zeta_hessian(&c, q2).d22).abs() < 1e-4);
    }

    #[test]
    fn restriction_merges_and_differs_by_constant() {
        // three factors on four vertices; U = {1, 2, 3}
        let g = RegionGraph::new(
            4,
            2,
            vec![
                vec![0],
                vec![1],
                vec![2],
                vec![3],
                vec![0, 1],
                vec![0, 2, 3],
                vec![1, 2],
            ],
        )
        .unwrap();
        let view = g.two_layer_view().unwrap();
        let rho = [0.3, -0.7, 0.2, -0.4, 0.5, 0.8, 1.1];
        let (sub, w) = restrict_to_vertices(&view, &rho, &[1, 2, 3]).unwrap();
        assert_eq!(
            sub.regions(),
            &[vec![0], vec![1], vec![2], vec![1, 2], vec![0, 1]]
        );
        // {0,1} ∩ U = {1} folds into that singleton
        assert!((w[0] - (-0.7 + 0.5)).abs() < 1e-15);
        assert_eq!(&w[1..], &[0.2, -0.4, 0.8, 1.1]);

        let mut offset = None;
        for &(q1, q2) in &[(0.0, 0.0), (0.3, 0.4), (-0.1, 0.95)] {
            let small = symmetric_pseudomarginal(&sub, SymmetricPoint::new(q1, q2)).unwrap();
            let lifted = lift_from_restriction(&view, &[1, 2, 3], &sub, &small).unwrap();
            assert!(validate_local_polytope(&g, &lifted, 1e-12).unwrap().passed);
            let d = kikuchi_entropy(&g, &lifted, &rho).unwrap()
                - kikuchi_entropy(&sub, &small, &w).unwrap();
            match offset {
                None => offset = Some(d),
                Some(o) => assert!((d - o).abs() < 1e-12),
            }
        }
    }
}
