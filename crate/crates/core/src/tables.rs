//! Dense tables over the joint assignments of a set of discrete variables.
//!
//! Layout is row-major in scope order with the last scope variable varying
//! fastest. The same layout is used by every table in the crate and by the
//! file formats built on top of it.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::{ln, xlogx, LOG_FLOOR};
use crate::region_graph::RegionGraph;

/// Tolerance used when a table must be a probability table.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FactorTable {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl FactorTable {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::ScopeMismatch("scope and cardinality lengths differ"));
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::LengthMismatch {
                expected: size,
                got: values.len(),
            });
        }
        Ok(Self {
            scope,
            cards,
            values,
        })
    }

    pub fn filled(scope: Vec<usize>, cards: Vec<usize>, value: f64) -> Self {
        let size = cards.iter().product();
        Self {
            scope,
            cards,
            values: vec![value; size],
        }
    }

    pub fn uniform(scope: Vec<usize>, cards: Vec<usize>) -> Self {
        let size: usize = cards.iter().product();
        Self::filled(scope, cards, 1.0 / size as f64)
    }

    /// Table whose entry at each assignment is `f(assignment)`.
    pub fn from_fn(
        scope: Vec<usize>,
        cards: Vec<usize>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0; cards.len()];
        for _ in 0..size {
            values.push(f(&assignment));
            advance(&mut assignment, &cards);
        }
        Self {
            scope,
            cards,
            values,
        }
    }

    /// Zero-filled table over region `r` of `graph`.
    pub fn zeros_for(graph: &RegionGraph, r: usize) -> Self {
        Self::filled(graph.region(r).to_vec(), graph.cards(r), 0.0)
    }

    pub fn uniform_for(graph: &RegionGraph, r: usize) -> Self {
        Self::uniform(graph.region(r).to_vec(), graph.cards(r))
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Flat index of an assignment given in scope order.
    pub fn index_of(&self, assignment: &[usize]) -> usize {
        assignment
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&x, &c)| acc * c + x)
    }

    /// Assignment (in scope order) at a flat index.
    pub fn assignment_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for (slot, &c) in out.iter_mut().zip(&self.cards).rev() {
            *slot = index % c;
            index /= c;
        }
        out
    }

    pub fn get(&self, assignment: &[usize]) -> f64 {
        self.values[self.index_of(assignment)]
    }

    /// Same table with `f` applied entrywise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// For every entry of this table, the flat index of the entry of a table
    /// over `sub_scope` that it projects onto.
    pub fn projection(&self, sub_scope: &[usize]) -> Result<Vec<usize>> {
        let positions: Vec<usize> = sub_scope
            .iter()
            .map(|v| self.scope.iter().position(|s| s == v))
            .collect::<Option<_>>()
            .ok_or(Error::ScopeMismatch(
                "target scope is not a subset of the table scope",
            ))?;
        let mut out = Vec::with_capacity(self.len());
        let mut assignment = vec![0; self.cards.len()];
        for _ in 0..self.len() {
            let idx = positions
                .iter()
                .fold(0, |acc, &p| acc * self.cards[p] + assignment[p]);
            out.push(idx);
            advance(&mut assignment, &self.cards);
        }
        Ok(out)
    }

    /// Sum out every variable not in `target_scope`. The result is laid out
    /// in `target_scope` order.
    pub fn marginalize(&self, target_scope: &[usize]) -> Result<Self> {
        let map = self.projection(target_scope)?;
        let cards: Vec<usize> = target_scope
            .iter()
            .map(|v| self.cards[self.scope.iter().position(|s| s == v).unwrap()])
            .collect();
        let mut out = Self::filled(target_scope.to_vec(), cards, 0.0);
        for (&i, &v) in map.iter().zip(&self.values) {
            out.values[i] += v;
        }
        Ok(out)
    }

    /// Scale to unit mass. Returns the previous total.
    pub fn normalize(&mut self) -> f64 {
        let z = self.sum();
        if z != 0.0 {
            for v in &mut self.values {
                *v /= z;
            }
        }
        z
    }

    /// Error unless entries are ≥ `-tol` and sum to one within `tol`.
    pub fn check_probability(&self, tol: f64) -> Result<()> {
        let sum = self.sum();
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        if (sum - 1.0).abs() > tol || min < -tol || !sum.is_finite() {
            return Err(Error::NotNormalized { sum, min });
        }
        Ok(())
    }

    /// Shannon entropy in nats, `0 ln 0 = 0`.
    pub fn entropy(&self) -> Result<f64> {
        self.check_probability(PROBABILITY_TOL)?;
        Ok(self.entropy_unchecked())
    }

    pub(crate) fn entropy_unchecked(&self) -> f64 {
        -self.values.iter().map(|&p| xlogx(p)).sum::<f64>()
    }

    /// `Σ p ln(p / q)`. Scopes must match exactly.
    pub fn kl_divergence(&self, q: &Self) -> Result<f64> {
        if self.scope != q.scope || self.cards != q.cards {
            return Err(Error::ScopeMismatch(
                "KL divergence requires identical scopes",
            ));
        }
        let mut kl = 0.0;
        for (&p, &qv) in self.values.iter().zip(&q.values) {
            if p <= 0.0 {
                continue;
            }
            if qv <= 0.0 {
                return Err(Error::SupportViolation);
            }
            kl += p * (ln(p.max(LOG_FLOOR)) - ln(qv.max(LOG_FLOOR)));
        }
        Ok(kl)
    }
}

impl Index<usize> for FactorTable {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl IndexMut<usize> for FactorTable {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Odometer step over a mixed-radix assignment, last position fastest.
pub(crate) fn advance(assignment: &mut [usize], cards: &[usize]) {
    for (x, &c) in assignment.iter_mut().zip(cards).rev() {
        *x += 1;
        if *x < c {
            return;
        }
        *x = 0;
    }
}

/// One table per region of a region graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Pseudomarginals {
    tables: Vec<FactorTable>,
}

impl Pseudomarginals {
    pub fn new(tables: Vec<FactorTable>) -> Self {
        Self { tables }
    }

    pub fn uniform(graph: &RegionGraph) -> Self {
        Self::new(
            (0..graph.num_regions())
                .map(|r| FactorTable::uniform_for(graph, r))
                .collect(),
        )
    }

    pub fn tables(&self) -> &[FactorTable] {
        &self.tables
    }

    pub fn tables_mut(&mut self) -> &mut [FactorTable] {
        &mut self.tables
    }

    pub fn into_tables(self) -> Vec<FactorTable> {
        self.tables
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Error unless table `r` is laid out over region `r` of `graph`.
    pub fn check_scopes(&self, graph: &RegionGraph) -> Result<()> {
        check_region_tables(graph, &self.tables)
    }

    /// Largest absolute entrywise difference from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.tables
            .iter()
            .zip(&other.tables)
            .flat_map(|(a, b)| a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Smallest entry over all tables.
    pub fn min_entry(&self) -> f64 {
        self.tables
            .iter()
            .flat_map(|t| t.values.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

impl Index<usize> for Pseudomarginals {
    type Output = FactorTable;
    fn index(&self, r: usize) -> &FactorTable {
        &self.tables[r]
    }
}

impl IndexMut<usize> for Pseudomarginals {
    fn index_mut(&mut self, r: usize) -> &mut FactorTable {
        &mut self.tables[r]
    }
}

pub(crate) fn check_region_tables(graph: &RegionGraph, tables: &[FactorTable]) -> Result<()> {
    if tables.len() != graph.num_regions() {
        return Err(Error::ScopeMismatch("one table per region is required"));
    }
    for (r, t) in tables.iter().enumerate() {
        if t.scope() != graph.region(r) || t.cards() != graph.cards(r).as_slice() {
            return Err(Error::ScopeMismatch("table scope differs from its region"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::ln;

    fn table3() -> FactorTable {
        let vals: Vec<f64> = (0..12).map(|i| (i as f64 + 1.0) / 78.0).collect();
        FactorTable::new(vec![4, 7, 9], vec![2, 3, 2], vals).unwrap()
    }

    #[test]
    fn marginalize_uniform_pair() {
        let t = FactorTable::uniform(vec![0, 1], vec![2, 2]);
        let m = t.marginalize(&[0]).unwrap();
        assert_eq!(m.values(), &[0.5, 0.5]);
    }

    #[test]
    fn marginalize_product_recovers_factor() {
        let p = [0.3, 0.7];
        let q = [0.1, 0.6, 0.3];
        let t = FactorTable::from_fn(vec![2, 5], vec![2, 3], |a| p[a[0]] * q[a[1]]);
        let ms = t.marginalize(&[2]).unwrap();
        let mt = t.marginalize(&[5]).unwrap();
        for i in 0..2 {
            assert!((ms[i] - p[i]).abs() < 1e-15);
        }
        for i in 0..3 {
            assert!((mt[i] - q[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn marginalize_matches_nested_loops() {
        let t = table3();
        let m = t.marginalize(&[9, 4]).unwrap();
        assert_eq!(m.scope(), &[9, 4]);
        for x9 in 0..2 {
            for x4 in 0..2 {
                let mut s = 0.0;
                for x7 in 0..3 {
                    s += t.get(&[x4, x7, x9]);
                }
                assert!((m.get(&[x9, x4]) - s).abs() < 1e-15);
            }
        }
        assert!((m.sum() - t.sum()).abs() < 1e-15);
        assert!(t.marginalize(&[1]).is_err());
    }

    #[test]
    fn entropy_edge_cases() {
        let u = FactorTable::uniform(vec![0, 1], vec![2, 2]);
        assert!((u.entropy().unwrap() - 2.0 * ln(2.0)).abs() < 1e-15);
        let point = FactorTable::new(vec![0], vec![2], vec![1.0, 0.0]).unwrap();
        assert_eq!(point.entropy().unwrap(), 0.0);
        let bad = FactorTable::new(vec![0], vec![2], vec![0.4, 0.4]).unwrap();
        assert!(matches!(bad.entropy(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn symmetric_family_entropy_by_hand() {
        // k = 2 table of the symmetric family at (q1, q2) = (0, 0.5):
        // all-equal entries (1 + 0.5)/4, the others (1 - 0.5)/4.
        let t = FactorTable::new(vec![0, 1], vec![2, 2], vec![0.375, 0.125, 0.125, 0.375]).unwrap();
        let eta = |x: f64| x * ln(x);
        let expected = -2.0 * eta(0.375) - 2.0 * eta(0.125);
        assert!((t.entropy().unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn kl_cases() {
        let point = FactorTable::new(vec![0, 1], vec![2, 2], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let u = FactorTable::uniform(vec![0, 1], vec![2, 2]);
        assert!((point.kl_divergence(&u).unwrap() - 2.0 * ln(2.0)).abs() < 1e-15);
        assert_eq!(u.kl_divergence(&u).unwrap(), 0.0);
        assert_eq!(u.kl_divergence(&point), Err(Error::SupportViolation));
        let other = FactorTable::uniform(vec![0, 2], vec![2, 2]);
        assert!(matches!(
            u.kl_divergence(&other),
            Err(Error::ScopeMismatch(_))
        ));
    }

    #[test]
    fn mutual_information_as_kl() {
        let joint = FactorTable::new(vec![0, 1], vec![2, 2], vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        let a = joint.marginalize(&[0]).unwrap();
        let b = joint.marginalize(&[1]).unwrap();
        let prod = FactorTable::from_fn(vec![0, 1], vec![2, 2], |x| a[x[0]] * b[x[1]]);
        let mi = a.entropy().unwrap() + b.entropy().unwrap() - joint.entropy().unwrap();
        assert!((joint.kl_divergence(&prod).unwrap() - mi).abs() < 1e-14);
    }

    #[test]
    fn index_round_trip() {
        let t = table3();
        for i in 0..t.len() {
            assert_eq!(t.index_of(&t.assignment_of(i)), i);
        }
        assert_eq!(t.assignment_of(1), vec![0, 0, 1]);
    }
}
