//! Plain-text reports behind the `check-concavity` and `polytope` commands.

use std::fmt::Write as _;

use kikuchi_core::concavity::check_kikuchi_concavity;
use kikuchi_core::objective::{exact_solution, ExactSolution, DEFAULT_STATE_CAP};
use kikuchi_core::polytope::{
    enumerate_f, in_concavity_polytope, in_conv_f, HullMembership, Violation, MAX_HULL_FACTORS,
};
use kikuchi_core::RegionGraph;

use crate::error::{invalid, Result};
use crate::formats::Model;

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    /// One weight per factor; vertex weights follow as `1 - Σ_{α ∋ s} ρ_α`.
    Factors(Vec<f64>),
    /// One weight per region.
    Regions(Vec<f64>),
}

fn set_string(items: impl IntoIterator<Item = usize>) -> String {
    let parts: Vec<String> = items.into_iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", parts.join(", "))
}

fn region_list(graph: &RegionGraph, regions: &[usize]) -> String {
    let parts: Vec<String> = regions
        .iter()
        .map(|&r| set_string(graph.region(r).iter().copied()))
        .collect();
    parts.join(" ")
}

fn full_weights(graph: &RegionGraph, weights: &Weights) -> Result<Vec<f64>> {
    match weights {
        Weights::Regions(w) => {
            if w.len() != graph.num_regions() {
                return Err(invalid(format!(
                    "expected {} region weights, got {}",
                    graph.num_regions(),
                    w.len()
                )));
            }
            Ok(w.clone())
        }
        Weights::Factors(w) => {
            let view = graph.two_layer_view()?;
            if w.len() != view.num_factors() {
                return Err(invalid(format!(
                    "expected {} factor weights, got {}",
                    view.num_factors(),
                    w.len()
                )));
            }
            Ok(view.weights_from_factors(w))
        }
    }
}

/// Concavity report for a model and a weight vector.
pub fn concavity_report(model: &Model, weights: &Weights) -> Result<String> {
    let graph = model.region_graph()?;
    let rho = full_weights(&graph, weights)?;
    let mut out = String::new();
    let rep = check_kikuchi_concavity(&graph, &rho)?;
    if rep.satisfied {
        writeln!(
            out,
            "kikuchi condition: satisfied (minimum {})",
            rep.min_value
        )
        .unwrap();
    } else {
        let set = rep.violating_set.as_deref().unwrap_or(&[]);
        writeln!(
            out,
            "kikuchi condition: violated (minimum {}) by regions {}",
            rep.min_value,
            region_list(&graph, set)
        )
        .unwrap();
    }
    if let Weights::Factors(w) = weights {
        out.push_str(&polytope_report(&graph, w)?);
    }
    Ok(out)
}

/// Membership of factor weights in `ℂ` and, when small enough, in the
/// single-cycle-forest hull.
pub fn polytope_report(graph: &RegionGraph, factor_weights: &[f64]) -> Result<String> {
    let view = graph.two_layer_view()?;
    let mut out = String::new();
    let m = in_concavity_polytope(&view, factor_weights)?;
    match m.violation {
        None => writeln!(out, "concavity polytope: member").unwrap(),
        Some(Violation::OutOfRange { factor, value }) => writeln!(
            out,
            "concavity polytope: violated: weight of factor {factor} is {value}, outside [0, 1]"
        )
        .unwrap(),
        Some(Violation::Subset {
            vertices,
            coefficients,
            lhs,
            rhs,
        }) => {
            let u = set_string(vertices.iter().map(|&i| view.vertex_id(i)));
            let terms: Vec<String> = coefficients
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0.0)
                .map(|(j, c)| format!("{c}*rho[{j}]"))
                .collect();
            writeln!(
                out,
                "concavity polytope: violated by U = {u}: {} = {lhs} > {rhs}",
                terms.join(" + ")
            )
            .unwrap();
        }
    }
    if view.num_factors() <= MAX_HULL_FACTORS {
        match in_conv_f(&view, factor_weights)? {
            HullMembership::Member { .. } => {
                writeln!(out, "single-cycle forest hull: member").unwrap()
            }
            HullMembership::NotMember { margin, .. } => writeln!(
                out,
                "single-cycle forest hull: outside (separating margin {margin})"
            )
            .unwrap(),
        }
    }
    Ok(out)
}

/// One line per element of `𝔽`, as a 0/1 string over the factors.
pub fn family_listing(graph: &RegionGraph) -> Result<String> {
    let view = graph.two_layer_view()?;
    let mut out = String::new();
    for v in enumerate_f(&view)? {
        let line: String = v.iter().map(|&b| if b { '1' } else { '0' }).collect();
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn oracle(model: &Model) -> Result<ExactSolution> {
    let graph = model.region_graph()?;
    Ok(exact_solution(
        &graph,
        &model.log_potentials()?,
        DEFAULT_STATE_CAP,
    )?)
}
