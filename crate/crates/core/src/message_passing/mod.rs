//! Reweighted sum-product message passing.
//!
//! [`run_kikuchi_rsp`] iterates the generalized update over the Hasse
//! diagram of an arbitrary region graph; [`run_pairwise_rsp`] is the
//! classical tree-reweighted update for pairwise Ising models, which only
//! involves edge weights and therefore tolerates vertex weights of any sign.
//! Both keep messages in the log domain, normalized so that the
//! exponentiated table sums to one, and damp them geometrically.

mod generalized;
mod pairwise;

pub use generalized::{
    prune_zero_weight_regions, run_kikuchi_rsp, stationarity_residual, PrunedProblem,
};
pub use pairwise::{pairwise_region_weights, pairwise_stationarity_residual, run_pairwise_rsp};

use alloc::vec::Vec;

use crate::math::{exp, log_normalize};
use crate::models::{seeded_rng, uniform};
use crate::objective::ObjectiveValue;
use crate::tables::{FactorTable, Pseudomarginals};

/// Weights smaller than this in magnitude are treated as zero.
pub const WEIGHT_EPS: f64 = 1e-9;

/// Normalized log-message entries below this no longer survive `exp`, so the
/// change measure cannot see them move. A run is never declared converged
/// while any entry sits down there: that is divergence, not a fixed point.
pub const SATURATION_LOG: f64 = -708.0;

fn saturated<'a>(mut values: impl Iterator<Item = &'a f64>) -> bool {
    values.any(|&v| v < SATURATION_LOG)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Every message is recomputed from the previous iteration's messages.
    Parallel,
    /// Messages are updated in place, in a fixed order.
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    Uniform,
    /// Log-messages drawn i.i.d. from `Uniform[-1, 1]`, then normalized.
    Random(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Fraction of the old log-message kept at each update, in `[0, 1)`.
    pub damping: f64,
    /// Convergence threshold on the mean absolute message change.
    pub tol: f64,
    pub max_iters: usize,
    pub schedule: Schedule,
    pub init: Init,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iters: 2500,
            schedule: Schedule::Parallel,
            init: Init::Uniform,
        }
    }
}

impl SolverOptions {
    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    fn validate(&self) -> crate::Result<()> {
        use crate::Error::InvalidWeights;
        if !(0.0..1.0).contains(&self.damping) {
            return Err(InvalidWeights("damping must lie in [0, 1)"));
        }
        if !(self.tol > 0.0) {
            return Err(InvalidWeights("tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(InvalidWeights("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Log-domain messages. `pairs[i]` names the sender and receiver of
/// `tables[i]`: Hasse pairs `(parent, child)` of region ids for the
/// generalized solver, `(from, to)` vertices for the pairwise one.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageSet {
    pub pairs: Vec<(usize, usize)>,
    pub tables: Vec<FactorTable>,
}

impl MessageSet {
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    fn initialize(&mut self, init: Init) {
        match init {
            Init::Uniform => {
                for t in &mut self.tables {
                    let v = -crate::math::ln(t.len() as f64);
                    t.values_mut().fill(v);
                }
            }
            Init::Random(seed) => {
                let mut rng = seeded_rng(seed);
                for t in &mut self.tables {
                    for v in t.values_mut() {
                        *v = uniform(&mut rng, -1.0, 1.0);
                    }
                    log_normalize(t.values_mut());
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverResult {
    pub messages: MessageSet,
    pub tau: Pseudomarginals,
    pub objective: ObjectiveValue,
    pub delta_final: f64,
    pub delta_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Damps `new` toward `old` in place, renormalizes, and returns the summed
/// absolute change of the exponentiated entries.
fn damp_and_measure(new: &mut [f64], old: &[f64], damping: f64) -> f64 {
    if damping > 0.0 {
        for (n, &o) in new.iter_mut().zip(old) {
            *n = (1.0 - damping) * *n + damping * o;
        }
    }
    log_normalize(new);
    new.iter()
        .zip(old)
        .map(|(&n, &o)| (exp(n) - exp(o)).abs())
        .sum()
}

fn beliefs_to_tau(mut tables: Vec<FactorTable>) -> Pseudomarginals {
    for t in &mut tables {
        log_normalize(t.values_mut());
        for v in t.values_mut() {
            *v = exp(*v);
        }
    }
    Pseudomarginals::new(tables)
}

/// `max_x |a(x) - b(x) - mean(a - b)|`.
fn centered_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let mean = a.iter().zip(b).map(|(x, y)| x - y).sum::<f64>() / a.len() as f64;
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y - mean).abs())
        .fold(0.0, f64::max)
}
