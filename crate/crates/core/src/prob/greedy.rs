use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Dist, SparseCoupling, PRUNE_EPS};

#[derive(Debug, Clone, Copy)]
struct Residual {
    mass: f64,
    index: usize,
}

impl PartialEq for Residual {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Residual {}

impl PartialOrd for Residual {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Max-heap on mass; equal masses pop the highest index first.
impl Ord for Residual {
    fn cmp(&self, other: &Self) -> Ordering {
        self.mass.total_cmp(&other.mass).then(self.index.cmp(&other.index))
    }
}

fn heap_of(probs: &[f64]) -> BinaryHeap<Residual> {
    probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= PRUNE_EPS)
        .map(|(index, &mass)| Residual { mass, index })
        .collect()
}

/// Greedy approximate minimum-entropy coupling.
///
/// Repeatedly pairs the largest remaining row mass with the largest remaining
/// column mass and places the smaller of the two at their intersection.
/// The result is within one bit of the minimum-entropy coupling and has at
/// most `rows + cols - 1` entries. Equal masses are resolved toward the
/// highest index on both sides, which keeps the construction deterministic.
pub fn greedy_mec(mu: &Dist, nu: &Dist) -> SparseCoupling {
    greedy_mec_slices(mu.probs(), nu.probs())
}

pub(crate) fn greedy_mec_slices(mu: &[f64], nu: &[f64]) -> SparseCoupling {
    let mut coupling = SparseCoupling::new(mu.len(), nu.len());
    let mut rows = heap_of(mu);
    let mut cols = heap_of(nu);
    while let (Some(r), Some(c)) = (rows.pop(), cols.pop()) {
        let placed = r.mass.min(c.mass);
        coupling
            .add(r.index, c.index, placed)
            .expect("greedy indices are in range");
        match r.mass.total_cmp(&c.mass) {
            Ordering::Greater => {
                let left = r.mass - c.mass;
                if left >= PRUNE_EPS {
                    rows.push(Residual { mass: left, index: r.index });
                }
            }
            Ordering::Less => {
                let left = c.mass - r.mass;
                if left >= PRUNE_EPS {
                    cols.push(Residual { mass: left, index: c.index });
                }
            }
            Ordering::Equal => {}
        }
    }
    coupling
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: &[f64]) -> Dist {
        Dist::new(p.to_vec()).unwrap()
    }

    fn assert_entries(c: &SparseCoupling, expected: &[(usize, usize, f64)]) {
        assert_eq!(c.nnz(), expected.len(), "{c:?}");
        for &(r, col, p) in expected {
            assert!((c.get(r, col) - p).abs() < 1e-12, "({r},{col}) in {c:?}");
        }
    }

    #[test]
    fn point_mass_row_forces_coupling() {
        let c = greedy_mec(&d(&[1.0]), &d(&[0.3, 0.7]));
        assert_entries(&c, &[(0, 0, 0.3), (0, 1, 0.7)]);
    }

    #[test]
    fn uniform_binary_is_diagonal() {
        let c = greedy_mec(&d(&[0.5, 0.5]), &d(&[0.5, 0.5]));
        assert_entries(&c, &[(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn stepwise_example() {
        let c = greedy_mec(&d(&[0.6, 0.4]), &d(&[0.5, 0.3, 0.2]));
        assert_entries(&c, &[(0, 0, 0.5), (1, 1, 0.3), (0, 2, 0.1), (1, 2, 0.1)]);
    }

    #[test]
    fn merging_worked_example_table() {
        let c = greedy_mec(&d(&[0.5, 0.5]), &d(&[0.25, 0.25, 0.5]));
        assert_entries(&c, &[(0, 0, 0.25), (0, 1, 0.25), (1, 2, 0.5)]);
    }

    #[test]
    fn zero_rows_are_skipped() {
        let c = greedy_mec(&d(&[0.0, 1.0, 0.0]), &d(&[0.5, 0.5]));
        assert_entries(&c, &[(1, 0, 0.5), (1, 1, 0.5)]);
    }
}
