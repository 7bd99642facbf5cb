//! Tree-reweighted sum-product on pairwise binary models.
//!
//! With edge weights `ρ_st` and the implied vertex weights
//! `ρ_s = 1 - Σ_t ρ_st`, the message from `t` to `s` is
//!
//! ```text
//! M_ts(x_s) ∝ Σ_{x_t} exp(γ_st/ρ_st + γ_t) Π_{u ∈ N(t)∖s} M_ut^ρ_ut / M_st^(1-ρ_st)
//! ```
//!
//! Message `2e` of edge `e = (s, t)`, `s < t`, goes from `s` to `t`; message
//! `2e + 1` goes back. Regions follow [`RegionGraph::from_ising`]:
//! vertices first, then edges.

use alloc::vec;
use alloc::vec::Vec;

use super::{
    beliefs_to_tau, centered_max_diff, damp_and_measure, saturated, MessageSet, Schedule,
    SolverOptions, SolverResult,
};
use crate::error::{Error, Result};
use crate::math::{ln, log_sum_exp, LOG_FLOOR};
use crate::models::IsingModel;
use crate::objective::evaluate_objective;
use crate::region_graph::RegionGraph;
use crate::tables::{FactorTable, Pseudomarginals};

/// Full region weight vector: vertices get `1 - Σ_{t} ρ_st`, edges their own weight.
pub fn pairwise_region_weights(model: &IsingModel, rho_edges: &[f64]) -> Result<Vec<f64>> {
    check_edge_weights(model, rho_edges)?;
    let n = model.num_vertices();
    let mut rho = vec![1.0; n];
    for (&(s, t), &w) in model.graph().edges().iter().zip(rho_edges) {
        rho[s] -= w;
        rho[t] -= w;
    }
    rho.extend_from_slice(rho_edges);
    Ok(rho)
}

fn check_edge_weights(model: &IsingModel, rho_edges: &[f64]) -> Result<()> {
    if rho_edges.len() != model.graph().num_edges() {
        return Err(Error::LengthMismatch {
            expected: model.graph().num_edges(),
            got: rho_edges.len(),
        });
    }
    if let Some((index, &value)) = rho_edges
        .iter()
        .enumerate()
        .find(|(_, &w)| !(w > 0.0 && w.is_finite()))
    {
        return Err(Error::NonPositiveEdgeWeight { index, value });
    }
    Ok(())
}

struct Pairwise<'a> {
    n: usize,
    edges: &'a [(usize, usize)],
    rho: &'a [f64],
    /// `γ_s x_s` per vertex, indexed by state.
    node: Vec<[f64; 2]>,
    /// `γ_st x_s x_t / ρ_st`, indexed `[x_s][x_t]` with `s < t`.
    edge: Vec<[[f64; 2]; 2]>,
    /// `(neighbour, edge)` per vertex.
    adj: Vec<Vec<(usize, usize)>>,
}

impl<'a> Pairwise<'a> {
    fn new(model: &'a IsingModel, rho: &'a [f64]) -> Self {
        let spins = [-1.0, 1.0];
        Self {
            n: model.num_vertices(),
            edges: model.graph().edges(),
            rho,
            node: model
                .gamma_s()
                .iter()
                .map(|&g| spins.map(|x| g * x))
                .collect(),
            edge: model
                .gamma_st()
                .iter()
                .zip(rho)
                .map(|(&g, &w)| spins.map(|a| spins.map(|b| g * a * b / w)))
                .collect(),
            adj: model.graph().adjacency(),
        }
    }

    /// Index of the message travelling along edge `e` into `to`.
    fn incoming(&self, e: usize, to: usize) -> usize {
        if self.edges[e].1 == to {
            2 * e
        } else {
            2 * e + 1
        }
    }

    /// `γ_v + Σ_{u ∈ N(v)} ρ_uv m_uv`, the node log-belief.
    fn node_belief(&self, v: usize, msgs: &[[f64; 2]]) -> [f64; 2] {
        let mut b = self.node[v];
        for &(_, e) in &self.adj[v] {
            let m = msgs[self.incoming(e, v)];
            for x in 0..2 {
                b[x] += self.rho[e] * m[x];
            }
        }
        b
    }

    /// New log-message `k` given the sender's current node belief.
    fn update(&self, k: usize, msgs: &[[f64; 2]], sender_belief: [f64; 2]) -> [f64; 2] {
        let e = k / 2;
        let forward = k.is_multiple_of(2);
        // the reverse message enters the sender with weight ρ and must be
        // removed entirely: ρ·m - m = -(1 - ρ)·m relative to the rest
        let reverse = msgs[k ^ 1];
        let pre = [sender_belief[0] - reverse[0], sender_belief[1] - reverse[1]];
        let mut out = [0.0; 2];
        for (x_recv, slot) in out.iter_mut().enumerate() {
            let terms: [f64; 2] = core::array::from_fn(|x_send| {
                let pair = if forward {
                    self.edge[e][x_send][x_recv]
                } else {
                    self.edge[e][x_recv][x_send]
                };
                pair + pre[x_send]
            });
            *slot = log_sum_exp(&terms);
        }
        out
    }

    fn sender(&self, k: usize) -> usize {
        let (s, t) = self.edges[k / 2];
        if k.is_multiple_of(2) {
            s
        } else {
            t
        }
    }

    fn beliefs(&self, msgs: &[[f64; 2]]) -> Vec<FactorTable> {
        let nb: Vec<[f64; 2]> = (0..self.n).map(|v| self.node_belief(v, msgs)).collect();
        let mut out: Vec<FactorTable> = nb
            .iter()
            .enumerate()
            .map(|(v, b)| FactorTable::new(vec![v], vec![2], b.to_vec()).expect("shape"))
            .collect();
        for (e, &(s, t)) in self.edges.iter().enumerate() {
            let into_s = msgs[2 * e + 1];
            let into_t = msgs[2 * e];
            let mut vals = Vec::with_capacity(4);
            for a in 0..2 {
                for b in 0..2 {
                    vals.push(self.edge[e][a][b] + nb[s][a] - into_s[a] + nb[t][b] - into_t[b]);
                }
            }
            out.push(FactorTable::new(vec![s, t], vec![2, 2], vals).expect("shape"));
        }
        out
    }
}

fn to_message_set(edges: &[(usize, usize)], msgs: &[[f64; 2]]) -> MessageSet {
    let mut pairs = Vec::with_capacity(msgs.len());
    let mut tables = Vec::with_capacity(msgs.len());
    for (e, &(s, t)) in edges.iter().enumerate() {
        pairs.push((s, t));
        tables.push(FactorTable::new(vec![t], vec![2], msgs[2 * e].to_vec()).expect("shape"));
        pairs.push((t, s));
        tables.push(FactorTable::new(vec![s], vec![2], msgs[2 * e + 1].to_vec()).expect("shape"));
    }
    MessageSet { pairs, tables }
}

fn from_message_set(edges: &[(usize, usize)], messages: &MessageSet) -> Result<Vec<[f64; 2]>> {
    let expected = to_message_set(edges, &vec![[0.0; 2]; 2 * edges.len()]);
    if messages.pairs != expected.pairs || messages.tables.iter().any(|t| t.len() != 2) {
        return Err(Error::ScopeMismatch(
            "messages do not match the model's edges",
        ));
    }
    Ok(messages.tables.iter().map(|t| [t[0], t[1]]).collect())
}

/// Reweighted sum-product for an Ising model with positive edge weights.
pub fn run_pairwise_rsp(
    model: &IsingModel,
    rho_edges: &[f64],
    opts: SolverOptions,
) -> Result<SolverResult> {
    opts.validate()?;
    let rho_full = pairwise_region_weights(model, rho_edges)?;
    let pw = Pairwise::new(model, rho_edges);
    let edges = pw.edges;
    let mut init = to_message_set(edges, &vec![[0.0; 2]; 2 * edges.len()]);
    init.initialize(opts.init);
    let mut msgs: Vec<[f64; 2]> = init.tables.iter().map(|t| [t[0], t[1]]).collect();
    let entries = 2 * msgs.len();

    let mut history = Vec::new();
    let mut delta = 0.0;
    let mut converged = false;
    for iteration in 1..=opts.max_iters {
        let mut change = 0.0;
        match opts.schedule {
            Schedule::Parallel => {
                let nb: Vec<[f64; 2]> = (0..pw.n).map(|v| pw.node_belief(v, &msgs)).collect();
                let next: Vec<[f64; 2]> = (0..msgs.len())
                    .map(|k| {
                        let mut new = pw.update(k, &msgs, nb[pw.sender(k)]);
                        change += damp_and_measure(&mut new, &msgs[k], opts.damping);
                        new
                    })
                    .collect();
                msgs = next;
            }
            Schedule::Sequential => {
                for k in 0..msgs.len() {
                    let b = pw.node_belief(pw.sender(k), &msgs);
                    let mut new = pw.update(k, &msgs, b);
                    change += damp_and_measure(&mut new, &msgs[k], opts.damping);
                    msgs[k] = new;
                }
            }
        }
        if msgs.iter().any(|m| !m[0].is_finite() || !m[1].is_finite()) {
            return Err(Error::NonFiniteMessage { iteration });
        }
        delta = if entries == 0 {
            0.0
        } else {
            change / entries as f64
        };
        history.push(delta);
        if delta <= opts.tol && !saturated(msgs.iter().flatten()) {
            converged = true;
            break;
        }
    }

    let tau = beliefs_to_tau(pw.beliefs(&msgs));
    let graph = RegionGraph::from_ising(model);
    let objective = evaluate_objective(&graph, &model.log_potentials(), &rho_full, &tau)?;
    Ok(SolverResult {
        messages: to_message_set(edges, &msgs),
        tau,
        objective,
        delta_final: delta,
        iterations: history.len(),
        delta_history: history,
        converged,
    })
}

/// Stationarity of `τ` for the pairwise problem, checked two ways.
///
/// Without messages: local consistency, additive separability of
/// `ρ_st ln τ_st - γ_st` (its two components are the edge multipliers), and
/// constancy of `γ_s - ρ_s ln τ_s - Σ_t λ_ts` over the states of `s`. With
/// messages: `τ` must coincide with the beliefs the messages produce.
pub fn pairwise_stationarity_residual(
    model: &IsingModel,
    rho_edges: &[f64],
    messages: &MessageSet,
    tau: &Pseudomarginals,
) -> Result<f64> {
    let rho = pairwise_region_weights(model, rho_edges)?;
    let graph = RegionGraph::from_ising(model);
    tau.check_scopes(&graph)?;
    let theta = model.log_potentials();
    let n = model.num_vertices();
    let edges = model.graph().edges();
    let log_tau: Vec<Vec<f64>> = tau
        .tables()
        .iter()
        .map(|t| t.values().iter().map(|&p| ln(p.max(LOG_FLOOR))).collect())
        .collect();

    let mut residual: f64 = 0.0;
    for t in tau.tables() {
        residual = residual.max((t.sum() - 1.0).abs());
    }
    let mut node_terms: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            theta[v]
                .values()
                .iter()
                .zip(&log_tau[v])
                .map(|(&th, &lt)| th - rho[v] * lt)
                .collect()
        })
        .collect();
    for (e, &(s, t)) in edges.iter().enumerate() {
        let r = n + e;
        let p = tau[r].values();
        residual = residual.max((p[0] + p[1] - tau[s][0]).abs());
        residual = residual.max((p[2] + p[3] - tau[s][1]).abs());
        residual = residual.max((p[0] + p[2] - tau[t][0]).abs());
        residual = residual.max((p[1] + p[3] - tau[t][1]).abs());
        let a: Vec<f64> = (0..4)
            .map(|i| rho[r] * log_tau[r][i] - theta[r][i])
            .collect();
        let row = [(a[0] + a[1]) / 2.0, (a[2] + a[3]) / 2.0];
        let col = [(a[0] + a[2]) / 2.0, (a[1] + a[3]) / 2.0];
        let grand = (a[0] + a[1] + a[2] + a[3]) / 4.0;
        for x in 0..2 {
            for y in 0..2 {
                residual = residual.max((a[2 * x + y] - row[x] - col[y] + grand).abs());
            }
        }
        for x in 0..2 {
            node_terms[s][x] -= row[x];
            node_terms[t][x] -= col[x];
        }
    }
    for terms in &node_terms {
        residual = residual.max(centered_max_diff(terms, &[0.0, 0.0]));
    }

    let msgs = from_message_set(edges, messages)?;
    let pw = Pairwise::new(model, rho_edges);
    for (b, lt) in pw.beliefs(&msgs).iter().zip(&log_tau) {
        residual = residual.max(centered_max_diff(b.values(), lt));
    }
    Ok(residual)
}
