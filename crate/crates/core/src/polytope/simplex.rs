//! Dense phase-one simplex for `{λ ≥ 0 : A λ = b}` with Bland's rule.
//!
//! Problems here are tiny (at most a few dozen rows), so a textbook tableau
//! is adequate. On infeasibility the phase-one duals give `y` with
//! `yᵀA ≤ 0 < yᵀb`, a separating certificate.

use alloc::vec;
use alloc::vec::Vec;

const PIVOT_EPS: f64 = 1e-11;
const FEASIBLE_EPS: f64 = 1e-9;

pub(crate) enum PhaseOne {
    Feasible(Vec<f64>),
    Infeasible(Vec<f64>),
}

/// `a` is row-major with `rows` rows of length `cols`.
pub(crate) fn phase_one(a: &[f64], b: &[f64], rows: usize, cols: usize) -> PhaseOne {
    let width = cols + rows + 1;
    let mut t = vec![0.0; rows * width];
    let mut flipped = vec![false; rows];
    for i in 0..rows {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        flipped[i] = sign < 0.0;
        for j in 0..cols {
            t[i * width + j] = sign * a[i * cols + j];
        }
        t[i * width + cols + i] = 1.0;
        t[i * width + width - 1] = sign * b[i];
    }
    // reduced costs of the phase-one objective (sum of artificials)
    let mut obj = vec![0.0; width];
    for i in 0..rows {
        for j in 0..cols {
            obj[j] -= t[i * width + j];
        }
        obj[width - 1] -= t[i * width + width - 1];
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    while let Some(enter) = (0..cols + rows).find(|&j| obj[j] < -PIVOT_EPS) {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let coef = t[i * width + enter];
            if coef > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some((l, r)) => {
                        ratio < r - 1e-15 || (ratio <= r + 1e-15 && basis[i] < basis[l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // phase one is bounded below by zero, so a pivot row always exists
        let Some((row, _)) = leave else { break };
        pivot(&mut t, &mut obj, width, rows, row, enter);
        basis[row] = enter;
    }

    let value = -obj[width - 1];
    if value <= FEASIBLE_EPS {
        let mut x = vec![0.0; cols];
        for (i, &var) in basis.iter().enumerate() {
            if var < cols {
                x[var] = t[i * width + width - 1].max(0.0);
            }
        }
        PhaseOne::Feasible(x)
    } else {
        let y = (0..rows)
            .map(|i| {
                let yi = 1.0 - obj[cols + i];
                if flipped[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        PhaseOne::Infeasible(y)
    }
}

fn pivot(t: &mut [f64], obj: &mut [f64], width: usize, rows: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for v in &mut t[row * width..(row + 1) * width] {
        *v /= p;
    }
    let pivot_row: Vec<f64> = t[row * width..(row + 1) * width].to_vec();
    for i in 0..rows {
        if i == row {
            continue;
        }
        let f = t[i * width + col];
        if f != 0.0 {
            for (v, &pr) in t[i * width..(i + 1) * width].iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for (v, &pr) in obj.iter_mut().zip(&pivot_row) {
            *v -= f * pr;
        }
    }
}
