//! Numeric curvature of `H(τ; ρ)` restricted to the local polytope.
//!
//! Feasible directions are the null space of the linear consistency and
//! normalization constraints. The probe evaluates central second
//! differences along basis vectors, along the top eigenvector of the
//! analytic reduced Hessian, and along random combinations, and reports the
//! largest curvature found. A positive value certifies non-concavity at `τ`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::math::{atanh, ln_1p, sqrt};
use crate::models::{seeded_rng, uniform};
use crate::objective::{check_weights, exact_marginals};
use crate::region_graph::RegionGraph;
use crate::tables::{FactorTable, Pseudomarginals};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    /// Finite-difference step along unit-norm directions.
    pub step: f64,
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            step: 1e-4,
            random_directions: 64,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HessianProbe {
    /// Largest finite-difference curvature over the probed unit directions.
    pub max_curvature: f64,
    /// The direction attaining it.
    pub direction: Vec<FactorTable>,
    /// Top eigenvalue of the analytic Hessian restricted to the tangent space.
    pub analytic_max: f64,
    pub tangent_dim: usize,
}

fn offsets(graph: &RegionGraph) -> Vec<usize> {
    let mut off = Vec::with_capacity(graph.num_regions() + 1);
    let mut total = 0;
    off.push(0);
    for r in 0..graph.num_regions() {
        total += graph.table_size(r);
        off.push(total);
    }
    off
}

/// Orthonormal basis (as columns) of the directions that keep every Hasse
/// pair consistent and every table normalized.
pub fn tangent_basis(graph: &RegionGraph) -> Result<DMatrix<f64>> {
    let off = offsets(graph);
    let dim = off[graph.num_regions()];
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for r in 0..graph.num_regions() {
        rows.push((off[r]..off[r + 1]).map(|i| (i, 1.0)).collect());
    }
    for &(p, c) in graph.hasse_edges() {
        let parent = FactorTable::zeros_for(graph, p);
        let proj = parent.projection(graph.region(c))?;
        let mut per_child: Vec<Vec<(usize, f64)>> = (0..graph.table_size(c))
            .map(|y| vec![(off[c] + y, -1.0)])
            .collect();
        for (x, &y) in proj.iter().enumerate() {
            per_child[y].push((off[p] + x, 1.0));
        }
        rows.extend(per_child);
    }
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for row in &rows {
        for &(i, a) in row {
            for &(j, b) in row {
                gram[(i, j)] += a * b;
            }
        }
    }
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(1.0f64, |m, &v| m.max(v));
    let null: Vec<usize> = (0..dim)
        .filter(|&i| eig.eigenvalues[i] <= 1e-9 * top)
        .collect();
    let mut basis = DMatrix::<f64>::zeros(dim, null.len());
    for (k, &i) in null.iter().enumerate() {
        basis.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(basis)
}

fn to_tables(graph: &RegionGraph, flat: &DVector<f64>) -> Vec<FactorTable> {
    let off = offsets(graph);
    (0..graph.num_regions())
        .map(|r| {
            let mut t = FactorTable::zeros_for(graph, r);
            t.values_mut()
                .copy_from_slice(&flat.as_slice()[off[r]..off[r + 1]]);
            t
        })
        .collect()
}

/// `(H(τ + h d) - 2 H(τ) + H(τ - h d)) / h²`, with each entry's contribution
/// written as `-(a ln(1 - u²) + 2 b atanh(u))`, `u = b / a`, to avoid
/// cancellation.
pub fn curvature_along(
    graph: &RegionGraph,
    tau: &Pseudomarginals,
    rho: &[f64],
    direction: &[FactorTable],
    step: f64,
) -> Result<f64> {
    tau.check_scopes(graph)?;
    check_weights(graph, rho)?;
    if direction.len() != graph.num_regions() {
        return Err(Error::LengthMismatch {
            expected: graph.num_regions(),
            got: direction.len(),
        });
    }
    let mut total = 0.0;
    for ((t, d), &w) in tau.tables().iter().zip(direction).zip(rho) {
        if d.len() != t.len() {
            return Err(Error::ScopeMismatch("direction table size differs from τ"));
        }
        let mut region = 0.0;
        for (&a, &dx) in t.values().iter().zip(d.values()) {
            let b = step * dx;
            if b == 0.0 {
                continue;
            }
            if !(a > b.abs()) {
                return Err(Error::BoundaryPoint {
                    min_entry: tau.min_entry(),
                });
            }
            let u = b / a;
            region -= a * ln_1p(-u * u) + 2.0 * b * atanh(u);
        }
        total += w * region;
    }
    Ok(total / (step * step))
}

pub fn hessian_probe(
    graph: &RegionGraph,
    tau: &Pseudomarginals,
    rho: &[f64],
    opts: ProbeOptions,
) -> Result<HessianProbe> {
    tau.check_scopes(graph)?;
    check_weights(graph, rho)?;
    let min_entry = tau.min_entry();
    if !(min_entry >= 10.0 * opts.step) {
        return Err(Error::BoundaryPoint { min_entry });
    }
    let basis = tangent_basis(graph)?;
    let k = basis.ncols();
    if k == 0 {
        return Ok(HessianProbe {
            max_curvature: 0.0,
            direction: tau.tables().iter().map(|t| t.map(|_| 0.0)).collect(),
            analytic_max: 0.0,
            tangent_dim: 0,
        });
    }

    let diag: Vec<f64> = tau
        .tables()
        .iter()
        .zip(rho)
        .flat_map(|(t, &w)| t.values().iter().map(move |&p| -w / p))
        .collect();
    let scaled = DMatrix::from_fn(basis.nrows(), k, |i, j| diag[i] * basis[(i, j)]);
    let reduced = basis.transpose() * scaled;
    let eig = SymmetricEigen::new(reduced);
    let (top_idx, analytic_max) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            });

    let mut candidates: Vec<DVector<f64>> = Vec::with_capacity(k + 1 + opts.random_directions);
    candidates.push(&basis * eig.eigenvectors.column(top_idx));
    candidates.extend((0..k).map(|j| basis.column(j).into_owned()));
    let mut rng = seeded_rng(opts.seed);
    for _ in 0..opts.random_directions {
        let coeffs = DVector::from_fn(k, |_, _| uniform(&mut rng, -1.0, 1.0));
        candidates.push(&basis * coeffs);
    }

    let mut best: Option<(f64, Vec<FactorTable>)> = None;
    for mut v in candidates {
        let norm = sqrt(v.dot(&v));
        if norm == 0.0 {
            continue;
        }
        v /= norm;
        let d = to_tables(graph, &v);
        let c = curvature_along(graph, tau, rho, &d, opts.step)?;
        if best.as_ref().is_none_or(|(b, _)| c > *b) {
            best = Some((c, d));
        }
    }
    let (max_curvature, direction) = best.expect("tangent space is non-empty");
    Ok(HessianProbe {
        max_curvature,
        direction,
        analytic_max,
        tangent_dim: k,
    })
}

/// Marginals of a random joint distribution (random log-potentials on
/// every region), mixed with weight `mix` into the uniform point so every
/// entry is bounded away from zero.
pub fn sample_interior_point(graph: &RegionGraph, seed: u64, mix: f64) -> Result<Pseudomarginals> {
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::InvalidWeights("mixing weight must lie in [0, 1]"));
    }
    let mut rng = seeded_rng(seed);
    let theta: Vec<FactorTable> = (0..graph.num_regions())
        .map(|r| FactorTable::zeros_for(graph, r).map(|_| 0.0))
        .map(|t| {
            let mut t = t;
            for v in t.values_mut() {
                *v = uniform(&mut rng, -2.0, 2.0);
            }
            t
        })
        .collect();
    let mut tau = exact_marginals(graph, &theta)?;
    for t in tau.tables_mut() {
        let u = 1.0 / t.len() as f64;
        for v in t.values_mut() {
            *v = (1.0 - mix) * *v + mix * u;
        }
    }
    Ok(tau)
}
