use alloc::vec;
use alloc::vec::Vec;

use super::{
    beliefs_to_tau, centered_max_diff, damp_and_measure, saturated, MessageSet, Schedule,
    SolverOptions, SolverResult, WEIGHT_EPS,
};
use crate::error::{Error, Result};
use crate::math::{ln, LogSumExp, LOG_FLOOR};
use crate::objective::{check_weights, evaluate_objective};
use crate::region_graph::{RegionGraph, RegionId};
use crate::tables::{check_region_tables, FactorTable, Pseudomarginals};

/// Index structure over the Hasse diagram shared by the update and the
/// residual computations.
struct Layout {
    edges: Vec<(RegionId, RegionId)>,
    /// Edges whose child is `r`.
    into: Vec<Vec<usize>>,
    /// Edges whose parent is `r`.
    out_of: Vec<Vec<usize>>,
    /// Per edge, the parent-index → child-index map.
    proj: Vec<Vec<usize>>,
}

impl Layout {
    fn new(graph: &RegionGraph) -> Result<Self> {
        let edges = graph.hasse_edges().to_vec();
        let mut into = vec![Vec::new(); graph.num_regions()];
        let mut out_of = vec![Vec::new(); graph.num_regions()];
        let mut proj = Vec::with_capacity(edges.len());
        for (e, &(p, c)) in edges.iter().enumerate() {
            into[c].push(e);
            out_of[p].push(e);
            proj.push(FactorTable::zeros_for(graph, p).projection(graph.region(c))?);
        }
        Ok(Self {
            edges,
            into,
            out_of,
            proj,
        })
    }

    /// `θ_r/ρ_r + Σ_{s ∈ P(r)} (ρ_s/ρ_r) m_sr - Σ_{t ∈ C(r)} m_rt`.
    fn log_belief(
        &self,
        r: RegionId,
        theta: &[FactorTable],
        rho: &[f64],
        msgs: &[FactorTable],
    ) -> Vec<f64> {
        let inv = 1.0 / rho[r];
        let mut b: Vec<f64> = theta[r].values().iter().map(|&t| t * inv).collect();
        for &e in &self.into[r] {
            let w = rho[self.edges[e].0] * inv;
            for (v, &m) in b.iter_mut().zip(msgs[e].values()) {
                *v += w * m;
            }
        }
        for &e in &self.out_of[r] {
            let m = msgs[e].values();
            for (v, &i) in b.iter_mut().zip(&self.proj[e]) {
                *v -= m[i];
            }
        }
        b
    }

    /// Undamped, unnormalized update of edge `e` given the parent's and
    /// child's current log-beliefs.
    fn update(
        &self,
        e: usize,
        rho: &[f64],
        msgs: &[FactorTable],
        b_parent: &[f64],
        b_child: &[f64],
    ) -> Vec<f64> {
        let (s, r) = self.edges[e];
        let m = msgs[e].values();
        let mut acc = vec![LogSumExp::new(); m.len()];
        for (&bs, &i) in b_parent.iter().zip(&self.proj[e]) {
            acc[i].push(bs + m[i]);
        }
        let ratio = rho[s] / rho[r];
        let expo = rho[r] / (rho[r] + rho[s]);
        acc.iter()
            .zip(b_child)
            .zip(m)
            .map(|((num, &br), &mi)| expo * (num.value() - (br - ratio * mi)))
            .collect()
    }
}

fn check_inputs(graph: &RegionGraph, theta: &[FactorTable], rho: &[f64]) -> Result<()> {
    check_region_tables(graph, theta)?;
    check_weights(graph, rho)?;
    if theta
        .iter()
        .any(|t| t.values().iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidWeights("log-potentials must be finite"));
    }
    if rho.iter().any(|w| w.abs() < WEIGHT_EPS) {
        return Err(Error::InvalidWeights("region weight is zero"));
    }
    if graph
        .hasse_edges()
        .iter()
        .any(|&(s, r)| (rho[s] + rho[r]).abs() < WEIGHT_EPS)
    {
        return Err(Error::InvalidWeights("parent and child weights cancel"));
    }
    Ok(())
}

/// Generalized reweighted sum-product. Every region weight must be nonzero
/// and no Hasse pair may have `ρ_s + ρ_r = 0`; see
/// [`prune_zero_weight_regions`] for graphs with zero weights.
pub fn run_kikuchi_rsp(
    graph: &RegionGraph,
    theta: &[FactorTable],
    rho: &[f64],
    opts: SolverOptions,
) -> Result<SolverResult> {
    opts.validate()?;
    check_inputs(graph, theta, rho)?;
    let layout = Layout::new(graph)?;
    let mut messages = MessageSet {
        pairs: layout.edges.clone(),
        tables: layout
            .edges
            .iter()
            .map(|&(_, c)| FactorTable::zeros_for(graph, c))
            .collect(),
    };
    messages.initialize(opts.init);
    let entries: usize = messages.tables.iter().map(|t| t.len()).sum();

    let mut history = Vec::new();
    let mut delta = 0.0;
    let mut converged = false;
    for iteration in 1..=opts.max_iters {
        let mut change = 0.0;
        match opts.schedule {
            Schedule::Parallel => {
                let beliefs: Vec<Vec<f64>> = (0..graph.num_regions())
                    .map(|r| layout.log_belief(r, theta, rho, &messages.tables))
                    .collect();
                let mut next = messages.tables.clone();
                for (e, &(s, r)) in layout.edges.iter().enumerate() {
                    let mut new = layout.update(e, rho, &messages.tables, &beliefs[s], &beliefs[r]);
                    change += damp_and_measure(&mut new, messages.tables[e].values(), opts.damping);
                    next[e].values_mut().copy_from_slice(&new);
                }
                messages.tables = next;
            }
            Schedule::Sequential => {
                for (e, &(s, r)) in layout.edges.iter().enumerate() {
                    let bs = layout.log_belief(s, theta, rho, &messages.tables);
                    let br = layout.log_belief(r, theta, rho, &messages.tables);
                    let mut new = layout.update(e, rho, &messages.tables, &bs, &br);
                    change += damp_and_measure(&mut new, messages.tables[e].values(), opts.damping);
                    messages.tables[e].values_mut().copy_from_slice(&new);
                }
            }
        }
        if messages
            .tables
            .iter()
            .any(|t| t.values().iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFiniteMessage { iteration });
        }
        delta = if entries == 0 {
            0.0
        } else {
            change / entries as f64
        };
        history.push(delta);
        if delta <= opts.tol && !saturated(messages.tables.iter().flat_map(|t| t.values())) {
            converged = true;
            break;
        }
    }

    let beliefs = (0..graph.num_regions())
        .map(|r| {
            let mut t = FactorTable::zeros_for(graph, r);
            t.values_mut()
                .copy_from_slice(&layout.log_belief(r, theta, rho, &messages.tables));
            t
        })
        .collect();
    let tau = beliefs_to_tau(beliefs);
    let objective = evaluate_objective(graph, theta, rho, &tau)?;
    Ok(SolverResult {
        messages,
        tau,
        objective,
        delta_final: delta,
        iterations: history.len(),
        delta_history: history,
        converged,
    })
}

/// Largest violation of the Lagrangian stationarity conditions: Hasse
/// consistency of `τ`, normalization, and the centered gradient
/// `θ_r - ρ_r ln τ_r + Σ_{s ∈ P(r)} ρ_s m_sr - ρ_r Σ_{t ∈ C(r)} m_rt`,
/// where the messages act as scaled multipliers.
pub fn stationarity_residual(
    graph: &RegionGraph,
    theta: &[FactorTable],
    rho: &[f64],
    messages: &MessageSet,
    tau: &Pseudomarginals,
) -> Result<f64> {
    check_region_tables(graph, theta)?;
    check_weights(graph, rho)?;
    tau.check_scopes(graph)?;
    let layout = Layout::new(graph)?;
    if messages.pairs != layout.edges {
        return Err(Error::ScopeMismatch(
            "messages do not match the Hasse diagram",
        ));
    }
    let mut residual: f64 = 0.0;
    for t in tau.tables() {
        residual = residual.max((t.sum() - 1.0).abs());
    }
    for (e, &(p, c)) in layout.edges.iter().enumerate() {
        let mut marg = vec![0.0; graph.table_size(c)];
        for (&v, &i) in tau[p].values().iter().zip(&layout.proj[e]) {
            marg[i] += v;
        }
        for (m, &t) in marg.iter().zip(tau[c].values()) {
            residual = residual.max((m - t).abs());
        }
    }
    for r in 0..graph.num_regions() {
        // ρ_r × log-belief reproduces θ_r plus the multiplier terms
        let lb = layout.log_belief(r, theta, rho, &messages.tables);
        let scaled: Vec<f64> = lb.iter().map(|&b| rho[r] * b).collect();
        let log_tau: Vec<f64> = tau[r]
            .values()
            .iter()
            .map(|&p| rho[r] * ln(p.max(LOG_FLOOR)))
            .collect();
        residual = residual.max(centered_max_diff(&scaled, &log_tau));
    }
    Ok(residual)
}

/// A region graph with its zero-weight regions removed.
#[derive(Clone, Debug, PartialEq)]
pub struct PrunedProblem {
    pub graph: RegionGraph,
    pub theta: Vec<FactorTable>,
    pub rho: Vec<f64>,
    /// Original id of every retained region.
    pub kept: Vec<RegionId>,
}

/// Drops regions with `|ρ_r| < WEIGHT_EPS`, adding each dropped
/// log-potential onto the smallest retained region that contains it. The
/// objective is unchanged on consistent pseudomarginals.
pub fn prune_zero_weight_regions(
    graph: &RegionGraph,
    theta: &[FactorTable],
    rho: &[f64],
) -> Result<PrunedProblem> {
    check_region_tables(graph, theta)?;
    check_weights(graph, rho)?;
    let kept: Vec<RegionId> = (0..graph.num_regions())
        .filter(|&r| rho[r].abs() >= WEIGHT_EPS)
        .collect();
    let mut new_theta: Vec<FactorTable> = kept.iter().map(|&r| theta[r].clone()).collect();
    for r in (0..graph.num_regions()).filter(|r| !kept.contains(r)) {
        let host = kept
            .iter()
            .enumerate()
            .filter(|(_, &k)| graph.contains(k, r))
            .min_by_key(|(_, &k)| (graph.region(k).len(), k))
            .map(|(i, _)| i)
            .ok_or(Error::InvalidWeights(
                "zero-weight region has no retained superset",
            ))?;
        let map = new_theta[host].projection(graph.region(r))?;
        let src = theta[r].values();
        for (v, &i) in new_theta[host].values_mut().iter_mut().zip(&map) {
            *v += src[i];
        }
    }
    let regions = kept.iter().map(|&r| graph.region(r).to_vec()).collect();
    let pruned = RegionGraph::with_domain_sizes(graph.domain_sizes().to_vec(), regions)?;
    Ok(PrunedProblem {
        graph: pruned,
        theta: new_theta,
        rho: kept.iter().map(|&r| rho[r]).collect(),
        kept,
    })
}
