use std::collections::BTreeMap;

use super::{plogp, Dist};
use crate::error::{Error, Result};

/// A sparse joint distribution over `rows x cols`.
///
/// Only strictly positive entries are stored; iteration is in row-major
/// order, which is the canonical order used for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoupling {
    entries: BTreeMap<(usize, usize), f64>,
    rows: usize,
    cols: usize,
}

impl SparseCoupling {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { entries: BTreeMap::new(), rows, cols }
    }

    /// Build from `(row, col, mass)` triples. Non-positive masses are skipped,
    /// repeated cells accumulate.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut c = Self::new(rows, cols);
        for (r, col, p) in entries {
            c.add(r, col, p)?;
        }
        Ok(c)
    }

    pub(crate) fn add(&mut self, r: usize, c: usize, p: f64) -> Result<()> {
        if r >= self.rows {
            return Err(Error::OutOfRange { index: r, dim: self.rows });
        }
        if c >= self.cols {
            return Err(Error::OutOfRange { index: c, dim: self.cols });
        }
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!("invalid joint mass {p}")));
        }
        if p > 0.0 {
            *self.entries.entry((r, c)).or_insert(0.0) += p;
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries.get(&(r, c)).copied().unwrap_or(0.0)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(r, c), &p)| (r, c, p))
    }

    /// Entries of one row in ascending column order.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.range((r, 0)..(r + 1, 0)).map(|(&(_, c), &p)| (c, p))
    }

    /// Dense column `c` over rows (unnormalized joint masses).
    pub fn column(&self, c: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (&(r, cc), &p) in &self.entries {
            if cc == c {
                out[r] += p;
            }
        }
        out
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (&(r, _), &p) in &self.entries {
            out[r] += p;
        }
        out
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (&(_, c), &p) in &self.entries {
            out[c] += p;
        }
        out
    }

    /// Joint entropy in bits.
    pub fn entropy(&self) -> f64 {
        self.entries.values().map(|&p| plogp(p)).sum::<f64>().max(0.0)
    }

    /// Distribution over rows given a column.
    pub fn row_given_col(&self, col: usize) -> Result<Dist> {
        if col >= self.cols {
            return Err(Error::OutOfRange { index: col, dim: self.cols });
        }
        let w = self.column(col);
        if w.iter().all(|&p| p <= 0.0) {
            return Err(Error::ZeroConditioning { index: col });
        }
        Dist::from_weights(&w)
    }

    /// Distribution over columns given a row.
    pub fn col_given_row(&self, row: usize) -> Result<Dist> {
        if row >= self.rows {
            return Err(Error::OutOfRange { index: row, dim: self.rows });
        }
        let mut w = vec![0.0; self.cols];
        for (c, p) in self.row(row) {
            w[c] = p;
        }
        if w.iter().all(|&p| p <= 0.0) {
            return Err(Error::ZeroConditioning { index: row });
        }
        Dist::from_weights(&w)
    }

    /// Largest absolute deviation of the two marginals from `(mu, nu)`.
    pub fn marginal_residual(&self, mu: &[f64], nu: &[f64]) -> f64 {
        let r = self.row_marginal();
        let c = self.col_marginal();
        let dr = r.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dc = c.iter().zip(nu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let len_mismatch = if r.len() != mu.len() || c.len() != nu.len() { f64::INFINITY } else { 0.0 };
        dr.max(dc).max(len_mismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag() -> SparseCoupling {
        SparseCoupling::from_entries(2, 2, [(0, 0, 0.5), (1, 1, 0.5)]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(diag().entropy(), 1.0);
        let point = SparseCoupling::from_entries(1, 1, [(0, 0, 1.0)]).unwrap();
        assert_eq!(point.entropy(), 0.0);
        let c = SparseCoupling::from_entries(
            2,
            3,
            [(0, 0, 0.5), (1, 1, 0.3), (0, 2, 0.1), (1, 2, 0.1)],
        )
        .unwrap();
        assert!((c.entropy() - 1.6855).abs() < 1e-3);
    }

    #[test]
    fn conditionals() {
        assert_eq!(diag().col_given_row(0).unwrap().probs(), &[1.0, 0.0]);
        let c = SparseCoupling::from_entries(2, 2, [(0, 0, 0.25), (1, 0, 0.25), (1, 1, 0.5)]).unwrap();
        assert_eq!(c.row_given_col(0).unwrap().probs(), &[0.5, 0.5]);
        let point = SparseCoupling::from_entries(1, 3, [(0, 1, 1.0)]).unwrap();
        assert_eq!(point.col_given_row(0).unwrap().probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_conditioning_is_an_error() {
        let c = SparseCoupling::from_entries(2, 2, [(0, 0, 1.0)]).unwrap();
        assert_eq!(c.col_given_row(1), Err(Error::ZeroConditioning { index: 1 }));
        assert_eq!(c.row_given_col(1), Err(Error::ZeroConditioning { index: 1 }));
        assert!(c.row_given_col(5).is_err());
    }
}
