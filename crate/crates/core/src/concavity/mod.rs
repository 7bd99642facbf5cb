//! Concavity of the Kikuchi entropy `H(τ; ρ)` over the local polytope.
//!
//! [`check_kikuchi_concavity`] tests `Σ_{s ∈ ℱ(S)} ρ_s ≥ 0` for every set of
//! regions `S`; in the two-layer case it reduces to single factors plus
//! vertex subsets, which is what [`check_bethe_concavity`] enumerates. The
//! submodules hold the saturating-labeling construction behind the general
//! condition, the symmetric pseudomarginal family that witnesses
//! non-concavity, and a numeric curvature probe.

mod hall;
mod probe;
mod symmetric;

pub use hall::{hall_labeling, kikuchi_hall_instance, EdgeLabeling, HallInstance};
pub use probe::{
    curvature_along, hessian_probe, sample_interior_point, tangent_basis, HessianProbe,
    ProbeOptions,
};
pub use symmetric::{
    lift_from_restriction, restrict_to_vertices, symmetric_pseudomarginal, zeta, zeta_coefficients,
    zeta_hessian, zeta_q1_second_difference, SymmetricPoint, ZetaHessian,
};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::objective::check_weights;
use crate::region_graph::{RegionGraph, RegionId, TwoLayerView};

/// Largest set size enumerated exhaustively by default.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct ConcavityReport {
    pub satisfied: bool,
    /// Regions forming a minimizing set, present only on violation.
    pub violating_set: Option<Vec<RegionId>>,
    /// Minimum of the left-hand side over the enumerated sets (the empty set
    /// contributes 0, so this is never positive).
    pub min_value: f64,
}

impl ConcavityReport {
    fn from_min(min_value: f64, set: Vec<RegionId>) -> Self {
        let satisfied = min_value >= 0.0;
        Self {
            satisfied,
            violating_set: (!satisfied).then_some(set),
            min_value,
        }
    }
}

pub fn check_kikuchi_concavity(graph: &RegionGraph, rho: &[f64]) -> Result<ConcavityReport> {
    check_kikuchi_concavity_with_cap(graph, rho, DEFAULT_EXHAUSTIVE_CAP)
}

/// General sufficient condition. Two-layer graphs are routed through the
/// vertex-subset reduction; other graphs enumerate every up-set of the
/// containment order (the sets `ℱ(S)`).
pub fn check_kikuchi_concavity_with_cap(
    graph: &RegionGraph,
    rho: &[f64],
    cap: usize,
) -> Result<ConcavityReport> {
    check_weights(graph, rho)?;
    if let Ok(view) = graph.two_layer_view() {
        return check_bethe_concavity_with_cap(&view, rho, cap);
    }
    if graph.num_regions() > cap {
        return Err(Error::TooManyRegions {
            count: graph.num_regions(),
            cap,
        });
    }
    let order = graph.top_down_order();
    let mut included = alloc::vec![false; graph.num_regions()];
    let mut best = (0.0, Vec::new());
    let mut current = Vec::new();
    enumerate_up_sets(
        graph,
        rho,
        &order,
        0,
        0.0,
        &mut included,
        &mut current,
        &mut best,
    );
    let (min_value, mut set) = best;
    set.sort_unstable();
    Ok(ConcavityReport::from_min(min_value, set))
}

#[allow(clippy::too_many_arguments)]
fn enumerate_up_sets(
    graph: &RegionGraph,
    rho: &[f64],
    order: &[RegionId],
    pos: usize,
    value: f64,
    included: &mut [bool],
    current: &mut Vec<RegionId>,
    best: &mut (f64, Vec<RegionId>),
) {
    if pos == order.len() {
        if value < best.0 {
            *best = (value, current.clone());
        }
        return;
    }
    let r = order[pos];
    enumerate_up_sets(graph, rho, order, pos + 1, value, included, current, best);
    if graph.ancestors(r).iter().all(|&a| included[a]) {
        included[r] = true;
        current.push(r);
        enumerate_up_sets(
            graph,
            rho,
            order,
            pos + 1,
            value + rho[r],
            included,
            current,
            best,
        );
        current.pop();
        included[r] = false;
    }
}

pub fn check_bethe_concavity(view: &TwoLayerView<'_>, rho: &[f64]) -> Result<ConcavityReport> {
    check_bethe_concavity_with_cap(view, rho, DEFAULT_EXHAUSTIVE_CAP)
}

/// `ρ_α ≥ 0` for every factor and
/// `Σ_{s ∈ U} ρ_s + Σ_{α ∩ U ≠ ∅} ρ_α ≥ 0` for every vertex subset `U`.
pub fn check_bethe_concavity_with_cap(
    view: &TwoLayerView<'_>,
    rho: &[f64],
    cap: usize,
) -> Result<ConcavityReport> {
    check_weights(view.graph(), rho)?;
    let worst_factor = (0..view.num_factors())
        .map(|j| view.factor_region(j))
        .filter(|&r| rho[r] < 0.0)
        .min_by(|&a, &b| rho[a].total_cmp(&rho[b]));
    if let Some(r) = worst_factor {
        return Ok(ConcavityReport::from_min(rho[r], alloc::vec![r]));
    }
    let n = view.num_vertices();
    if n > cap {
        return Err(Error::TooManyVertices { count: n, cap });
    }
    let (min_value, mask) = min_vertex_subset(view, rho);
    let set = (0..n)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| view.vertex_region(i))
        .collect();
    Ok(ConcavityReport::from_min(min_value, set))
}

/// Exhaustive minimum of the vertex-subset functional; ties keep the first
/// mask in increasing order.
fn min_vertex_subset(view: &TwoLayerView<'_>, rho: &[f64]) -> (f64, u64) {
    let n = view.num_vertices();
    let vertex_w: Vec<f64> = (0..n).map(|i| rho[view.vertex_region(i)]).collect();
    let factors: Vec<(u64, f64)> = (0..view.num_factors())
        .map(|j| {
            let mask = view.factor_members(j).iter().fold(0u64, |m, &i| m | 1 << i);
            (mask, rho[view.factor_region(j)])
        })
        .collect();
    let mut best = (0.0, 0u64);
    for mask in 1u64..(1u64 << n) {
        let mut v: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| vertex_w[i])
            .sum();
        v += factors
            .iter()
            .filter(|(m, _)| m & mask != 0)
            .map(|(_, w)| w)
            .sum::<f64>();
        if v < best.0 {
            best = (v, mask);
        }
    }
    best
}
