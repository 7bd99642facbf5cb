//! Brute-force oracles: log partition function, marginals and entropy by
//! enumerating every joint assignment.
//!
//! The assignment range is cut into fixed blocks of [`BLOCK_STATES`] states.
//! Each block yields a partial log-sum-exp and partials are merged in block
//! order, so the result is identical whether blocks are evaluated one after
//! another or concurrently.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::LogSumExp;
use crate::region_graph::RegionGraph;
use crate::tables::{advance, check_region_tables, FactorTable, Pseudomarginals};

/// Default cap on the number of joint states (2^26).
pub const DEFAULT_STATE_CAP: u128 = 1 << 26;

/// Number of joint states evaluated per block.
pub const BLOCK_STATES: usize = 4096;

pub struct ExactEnumerator<'a> {
    graph: &'a RegionGraph,
    theta: &'a [FactorTable],
    num_states: usize,
    /// per region, per scope variable: (vertex, stride in the region table)
    strides: Vec<Vec<(usize, usize)>>,
}

impl<'a> ExactEnumerator<'a> {
    pub fn new(graph: &'a RegionGraph, theta: &'a [FactorTable], cap: u128) -> Result<Self> {
        check_region_tables(graph, theta)?;
        let states: u128 = graph.domain_sizes().iter().map(|&d| d as u128).product();
        if states > cap {
            return Err(Error::TooLarge { states, cap });
        }
        let strides = (0..graph.num_regions())
            .map(|r| {
                let scope = graph.region(r);
                let mut out = Vec::with_capacity(scope.len());
                let mut stride = 1;
                for &v in scope.iter().rev() {
                    out.push((v, stride));
                    stride *= graph.domain_size(v);
                }
                out
            })
            .collect();
        Ok(Self {
            graph,
            theta,
            num_states: states as usize,
            strides,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_blocks(&self) -> usize {
        self.num_states.div_ceil(BLOCK_STATES)
    }

    fn decode(&self, mut index: usize) -> Vec<usize> {
        let cards = self.graph.domain_sizes();
        let mut x = vec![0; cards.len()];
        for (slot, &c) in x.iter_mut().zip(cards).rev() {
            *slot = index % c;
            index /= c;
        }
        x
    }

    /// Σ_r θ_r(x_r).
    pub fn energy(&self, x: &[usize]) -> f64 {
        self.strides
            .iter()
            .zip(self.theta)
            .map(|(st, t)| {
                let idx: usize = st.iter().map(|&(v, s)| x[v] * s).sum();
                t[idx]
            })
            .sum()
    }

    /// Visit `(assignment, energy)` for every state in block `b`.
    pub fn for_each_in_block(&self, b: usize, mut f: impl FnMut(&[usize], f64)) {
        let start = b * BLOCK_STATES;
        let end = (start + BLOCK_STATES).min(self.num_states);
        let mut x = self.decode(start);
        for _ in start..end {
            let e = self.energy(&x);
            f(&x, e);
            advance(&mut x, self.graph.domain_sizes());
        }
    }

    pub fn block_log_sum_exp(&self, b: usize) -> LogSumExp {
        let mut acc = LogSumExp::new();
        self.for_each_in_block(b, |_, e| acc.push(e));
        acc
    }

    /// Merge per-block partials in block order.
    pub fn merge_blocks(parts: impl IntoIterator<Item = LogSumExp>) -> f64 {
        let mut total = LogSumExp::new();
        for p in parts {
            total.merge(p);
        }
        total.value()
    }

    pub fn log_partition(&self) -> f64 {
        Self::merge_blocks((0..self.num_blocks()).map(|b| self.block_log_sum_exp(b)))
    }

    /// Marginals and entropy given the log partition function.
    pub fn marginals_and_entropy(&self, log_z: f64) -> (Pseudomarginals, f64) {
        let mut tables: Vec<FactorTable> = (0..self.graph.num_regions())
            .map(|r| FactorTable::zeros_for(self.graph, r))
            .collect();
        let mut mean_energy = 0.0;
        for b in 0..self.num_blocks() {
            self.for_each_in_block(b, |x, e| {
                let p = crate::math::exp(e - log_z);
                mean_energy += p * e;
                for (st, t) in self.strides.iter().zip(tables.iter_mut()) {
                    let idx: usize = st.iter().map(|&(v, s)| x[v] * s).sum();
                    t[idx] += p;
                }
            });
        }
        (Pseudomarginals::new(tables), log_z - mean_energy)
    }
}

/// `log Σ_x exp(Σ_r θ_r(x_r))`.
pub fn exact_log_partition(graph: &RegionGraph, theta: &[FactorTable]) -> Result<f64> {
    Ok(ExactEnumerator::new(graph, theta, DEFAULT_STATE_CAP)?.log_partition())
}

/// True marginals of every region under `p ∝ exp(Σ_r θ_r)`.
pub fn exact_marginals(graph: &RegionGraph, theta: &[FactorTable]) -> Result<Pseudomarginals> {
    let en = ExactEnumerator::new(graph, theta, DEFAULT_STATE_CAP)?;
    Ok(en.marginals_and_entropy(en.log_partition()).0)
}

/// Entropy of `p ∝ exp(Σ_r θ_r)` in nats.
pub fn exact_entropy(graph: &RegionGraph, theta: &[FactorTable]) -> Result<f64> {
    let en = ExactEnumerator::new(graph, theta, DEFAULT_STATE_CAP)?;
    Ok(en.marginals_and_entropy(en.log_partition()).1)
}

/// Log partition function, marginals and entropy in one pass pair.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub log_partition: f64,
    pub entropy: f64,
    pub marginals: Pseudomarginals,
}

pub fn exact_solution(
    graph: &RegionGraph,
    theta: &[FactorTable],
    cap: u128,
) -> Result<ExactSolution> {
    let en = ExactEnumerator::new(graph, theta, cap)?;
    let log_partition = en.log_partition();
    let (marginals, entropy) = en.marginals_and_entropy(log_partition);
    Ok(ExactSolution {
        log_partition,
        entropy,
        marginals,
    })
}
