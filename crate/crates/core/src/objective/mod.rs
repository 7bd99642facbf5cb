//! The reweighted Kikuchi objective `⟨θ, τ⟩ + Σ_r ρ_r H_r(τ_r)` over the local
//! polytope, its Bethe special forms, and exact oracles for small models.

mod exact;

pub use exact::{
    exact_entropy, exact_log_partition, exact_marginals, exact_solution, ExactEnumerator,
    ExactSolution, BLOCK_STATES, DEFAULT_STATE_CAP,
};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::region_graph::{RegionGraph, RegionId, TwoLayerView};
use crate::tables::{check_region_tables, FactorTable, Pseudomarginals};

/// Tolerance for accepting pseudomarginals as inputs.
pub const INPUT_TOL: f64 = 1e-6;
/// Tolerance for asserting message-passing fixed points.
pub const FIXED_POINT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub inner_product: f64,
    pub entropy: f64,
    pub total: f64,
}

impl ObjectiveValue {
    fn new(inner_product: f64, entropy: f64) -> Self {
        Self {
            inner_product,
            entropy,
            total: inner_product + entropy,
        }
    }
}

/// Outcome of a local-consistency check.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    /// Largest `|Σ_{x_{u∖t}} τ_u - τ_t|` over containment pairs `t ⊊ u`.
    pub max_residual: f64,
    /// `(u, t)` attaining `max_residual`.
    pub worst_pair: Option<(RegionId, RegionId)>,
    pub max_normalization_error: f64,
    pub min_entry: f64,
    pub passed: bool,
}

pub(crate) fn check_weights(graph: &RegionGraph, rho: &[f64]) -> Result<()> {
    if rho.len() != graph.num_regions() {
        return Err(Error::LengthMismatch {
            expected: graph.num_regions(),
            got: rho.len(),
        });
    }
    if rho.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidWeights("weights must be finite"));
    }
    Ok(())
}

/// Check membership of `tau` in the local polytope at tolerance `tol`.
pub fn validate_local_polytope(
    graph: &RegionGraph,
    tau: &Pseudomarginals,
    tol: f64,
) -> Result<ConsistencyReport> {
    tau.check_scopes(graph)?;
    let mut max_residual: f64 = 0.0;
    let mut worst_pair = None;
    for t in 0..graph.num_regions() {
        for &u in graph.ancestors(t) {
            let m = tau[u].marginalize(graph.region(t))?;
            let res = m
                .values()
                .iter()
                .zip(tau[t].values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if res > max_residual || (worst_pair.is_none() && res > tol) {
                max_residual = res;
                worst_pair = Some((u, t));
            }
        }
    }
    let max_normalization_error = tau
        .tables()
        .iter()
        .map(|t| (t.sum() - 1.0).abs())
        .fold(0.0, f64::max);
    let min_entry = tau.min_entry();
    let passed = max_residual <= tol && min_entry >= -tol && max_normalization_error <= tol;
    Ok(ConsistencyReport {
        max_residual,
        worst_pair: if max_residual > tol { worst_pair } else { None },
        max_normalization_error,
        min_entry,
        passed,
    })
}

/// `H(τ; ρ) = Σ_r ρ_r H_r(τ_r)`.
pub fn kikuchi_entropy(graph: &RegionGraph, tau: &Pseudomarginals, rho: &[f64]) -> Result<f64> {
    tau.check_scopes(graph)?;
    check_weights(graph, rho)?;
    let mut h = 0.0;
    for (t, &w) in tau.tables().iter().zip(rho) {
        let hr = t.entropy()?;
        h += w * hr;
    }
    Ok(h)
}

/// `⟨θ, τ⟩`.
pub fn inner_product(theta: &[FactorTable], tau: &Pseudomarginals) -> f64 {
    theta
        .iter()
        .zip(tau.tables())
        .map(|(th, t)| {
            th.values()
                .iter()
                .zip(t.values())
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .sum()
}

/// Objective value without checking local consistency. Non-converged
/// solver iterates are scored with this.
pub fn evaluate_objective(
    graph: &RegionGraph,
    theta: &[FactorTable],
    rho: &[f64],
    tau: &Pseudomarginals,
) -> Result<ObjectiveValue> {
    check_region_tables(graph, theta)?;
    tau.check_scopes(graph)?;
    check_weights(graph, rho)?;
    let entropy = tau
        .tables()
        .iter()
        .zip(rho)
        .map(|(t, &w)| w * t.entropy_unchecked())
        .sum();
    Ok(ObjectiveValue::new(inner_product(theta, tau), entropy))
}

/// `B_{θ,ρ}(τ)` for `τ` in the local polytope (checked at [`INPUT_TOL`]).
pub fn kikuchi_objective(
    graph: &RegionGraph,
    theta: &[FactorTable],
    rho: &[f64],
    tau: &Pseudomarginals,
) -> Result<ObjectiveValue> {
    let report = validate_local_polytope(graph, tau, INPUT_TOL)?;
    if !report.passed {
        return Err(Error::InvalidPseudomarginals {
            max_residual: report
                .max_residual
                .max(report.max_normalization_error)
                .max(-report.min_entry),
        });
    }
    check_region_tables(graph, theta)?;
    let entropy = kikuchi_entropy(graph, tau, rho)?;
    Ok(ObjectiveValue::new(inner_product(theta, tau), entropy))
}

/// Three algebraically equal ways of writing the Bethe entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetheEntropyForms {
    /// `Σ_s ρ_s H_s + Σ_α ρ_α H_α`.
    pub plain: f64,
    /// `Σ_s ρ'_s H_s - Σ_α ρ_α Ĩ_α` with `ρ'_s = ρ_s + Σ_{α ∋ s} ρ_α`.
    pub mi_form: f64,
    /// `Σ_s (1 - Σ_{α ∋ s} ρ_α) H_s + Σ_α ρ_α H_α`, only when every `ρ'_s = 1`.
    pub ones_form: Option<f64>,
}

/// `ρ'_s = ρ_s + Σ_{α ∋ s} ρ_α` for every vertex of the view.
pub fn effective_vertex_weights(view: &TwoLayerView<'_>, rho: &[f64]) -> Vec<f64> {
    (0..view.num_vertices())
        .map(|i| {
            rho[view.vertex_region(i)]
                + view
                    .vertex_factors(i)
                    .iter()
                    .map(|&j| rho[view.factor_region(j)])
                    .sum::<f64>()
        })
        .collect()
}

pub fn bethe_entropy_forms(
    view: &TwoLayerView<'_>,
    tau: &Pseudomarginals,
    rho: &[f64],
) -> Result<BetheEntropyForms> {
    let graph = view.graph();
    tau.check_scopes(graph)?;
    check_weights(graph, rho)?;
    for j in 0..view.num_factors() {
        if view.factor_members(j).len() != view.factor_size(j) {
            return Err(Error::ScopeMismatch(
                "factor vertex without a singleton region",
            ));
        }
    }
    let hv: Vec<f64> = (0..view.num_vertices())
        .map(|i| tau[view.vertex_region(i)].entropy())
        .collect::<Result<_>>()?;
    let hf: Vec<f64> = (0..view.num_factors())
        .map(|j| tau[view.factor_region(j)].entropy())
        .collect::<Result<_>>()?;

    let plain = (0..view.num_vertices())
        .map(|i| rho[view.vertex_region(i)] * hv[i])
        .sum::<f64>()
        + (0..view.num_factors())
            .map(|j| rho[view.factor_region(j)] * hf[j])
            .sum::<f64>();

    let eff = effective_vertex_weights(view, rho);
    let mutual: Vec<f64> = (0..view.num_factors())
        .map(|j| view.factor_members(j).iter().map(|&i| hv[i]).sum::<f64>() - hf[j])
        .collect();
    let mi_form = eff.iter().zip(&hv).map(|(w, h)| w * h).sum::<f64>()
        - (0..view.num_factors())
            .map(|j| rho[view.factor_region(j)] * mutual[j])
            .sum::<f64>();

    let ones_form = eff.iter().all(|&w| (w - 1.0).abs() <= 1e-12).then(|| {
        (0..view.num_vertices())
            .map(|i| {
                let s: f64 = view
                    .vertex_factors(i)
                    .iter()
                    .map(|&j| rho[view.factor_region(j)])
                    .sum();
                (1.0 - s) * hv[i]
            })
            .sum::<f64>()
            + (0..view.num_factors())
                .map(|j| rho[view.factor_region(j)] * hf[j])
                .sum::<f64>()
    });

    Ok(BetheEntropyForms {
        plain,
        mi_form,
        ones_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::ln;
    use crate::models::{complete_graph, sample_ising, CouplingKind};
    use alloc::vec;

    #[test]
    fn uniform_passes_validation() {
        let g = RegionGraph::new(
            4,
            2,
            vec![vec![0, 1, 2], vec![1, 2, 3], vec![1, 2], vec![1], vec![2]],
        )
        .unwrap();
        let r = validate_local_polytope(&g, &Pseudomarginals::uniform(&g), 1e-12).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.worst_pair, None);
    }

    #[test]
    fn transposed_edge_table_is_caught() {
        let g = RegionGraph::pairwise(2, 2, &[(0, 1)]).unwrap();
        let joint = FactorTable::new(vec![0, 1], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let mut tau = Pseudomarginals::new(vec![
            joint.marginalize(&[0]).unwrap(),
            joint.marginalize(&[1]).unwrap(),
            joint.clone(),
        ]);
        assert!(validate_local_polytope(&g, &tau, 1e-12).unwrap().passed);
        tau[2] = FactorTable::new(vec![0, 1], vec![2, 2], vec![0.1, 0.3, 0.2, 0.4]).unwrap();
        let r = validate_local_polytope(&g, &tau, 1e-9).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_pair, Some((2, 0)));
        assert!(matches!(
            kikuchi_objective(
                &g,
                &Pseudomarginals::uniform(&g).into_tables(),
                &[1.0; 3],
                &tau
            ),
            Err(Error::InvalidPseudomarginals { .. })
        ));
    }

    #[test]
    fn uniform_bethe_entropy_equals_vertex_count_log2() {
        let k4 = complete_graph(4).unwrap();
        let g = RegionGraph::pairwise(4, 2, k4.edges()).unwrap();
        let rho = g.overcounting_numbers();
        let h = kikuchi_entropy(&g, &Pseudomarginals::uniform(&g), &rho).unwrap();
        assert!((h - 4.0 * ln(2.0)).abs() < 1e-13);
        let zero = kikuchi_entropy(&g, &Pseudomarginals::uniform(&g), &[0.0; 10]).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn zero_theta_objective_is_entropy() {
        let g = RegionGraph::pairwise(3, 2, &[(0, 1), (1, 2)]).unwrap();
        let theta: Vec<FactorTable> = (0..g.num_regions())
            .map(|r| FactorTable::zeros_for(&g, r))
            .collect();
        let tau = Pseudomarginals::uniform(&g);
        let rho = [0.5, -0.25, 1.0, 0.3, 0.7];
        let v = kikuchi_objective(&g, &theta, &rho, &tau).unwrap();
        assert_eq!(v.inner_product, 0.0);
        assert_eq!(v.total, kikuchi_entropy(&g, &tau, &rho).unwrap());
    }

    #[test]
    fn exact_marginals_are_consistent() {
        let model = sample_ising(
            &complete_graph(4).unwrap(),
            CouplingKind::Mixed,
            0.1,
            2.0,
            11,
        )
        .unwrap();
        let g = model.region_graph();
        let m = exact_marginals(&g, &model.log_potentials()).unwrap();
        assert!(validate_local_polytope(&g, &m, 1e-10).unwrap().passed);
    }

    #[test]
    fn bethe_forms_on_uniform_point() {
        let g = RegionGraph::pairwise(3, 2, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let view = g.two_layer_view().unwrap();
        let rho = [0.2, -0.1, 0.4, 0.3, 0.6, 0.9];
        let f = bethe_entropy_forms(&view, &Pseudomarginals::uniform(&g), &rho).unwrap();
        let eff: f64 = effective_vertex_weights(&view, &rho).iter().sum();
        assert!((f.mi_form - eff * ln(2.0)).abs() < 1e-13);
        assert!((f.plain - f.mi_form).abs() < 1e-13);
        assert!(f.ones_form.is_none());
    }
}
