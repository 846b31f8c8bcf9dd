use super::{Dist, SparseCoupling};
use crate::error::{Error, Result};

/// Largest `rows * cols` accepted by [`exact_mec`].
pub const EXACT_MEC_CAP: usize = 16;

/// Exhaustive minimum-entropy coupling for tiny marginals.
///
/// Entropy is concave, so its minimum over the transportation polytope sits
/// at a vertex. Vertices have forest-shaped supports, and a forest support
/// determines its masses uniquely by peeling leaves. Every cell subset of
/// size at most `rows + cols - 1` is tried.
pub fn exact_mec(mu: &Dist, nu: &Dist) -> Result<SparseCoupling> {
    let (rows, cols) = (mu.len(), nu.len());
    if rows * cols > EXACT_MEC_CAP {
        return Err(Error::SizeCap { rows, cols, cap: EXACT_MEC_CAP });
    }
    let live_rows: Vec<usize> = (0..rows).filter(|&r| mu.get(r) > 0.0).collect();
    let live_cols: Vec<usize> = (0..cols).filter(|&c| nu.get(c) > 0.0).collect();
    let cells: Vec<(usize, usize)> = live_rows
        .iter()
        .flat_map(|&r| live_cols.iter().map(move |&c| (r, c)))
        .collect();
    let max_support = live_rows.len() + live_cols.len() - 1;

    let mut best: Option<(f64, SparseCoupling)> = None;
    for mask in 1u32..(1u32 << cells.len()) {
        if mask.count_ones() as usize > max_support {
            continue;
        }
        let support: Vec<(usize, usize)> = (0..cells.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| cells[i])
            .collect();
        if let Some(c) = solve_forest(mu, nu, &support) {
            let h = c.entropy();
            if best.as_ref().is_none_or(|(bh, _)| h < *bh) {
                best = Some((h, c));
            }
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| Error::Invariant("no vertex of the transportation polytope found".into()))
}

/// Solve for the unique coupling supported on `support` if that support is a
/// forest and yields non-negative masses matching both marginals.
fn solve_forest(mu: &Dist, nu: &Dist, support: &[(usize, usize)]) -> Option<SparseCoupling> {
    let mut row_left: Vec<f64> = mu.probs().to_vec();
    let mut col_left: Vec<f64> = nu.probs().to_vec();
    let mut open: Vec<bool> = vec![true; support.len()];
    let mut remaining = support.len();
    let mut out = SparseCoupling::new(mu.len(), nu.len());

    while remaining > 0 {
        let mut row_deg = vec![0usize; mu.len()];
        let mut col_deg = vec![0usize; nu.len()];
        for (k, &(r, c)) in support.iter().enumerate() {
            if open[k] {
                row_deg[r] += 1;
                col_deg[c] += 1;
            }
        }
        let leaf = support.iter().enumerate().find_map(|(k, &(r, c))| {
            if !open[k] {
                None
            } else if row_deg[r] == 1 {
                Some((k, true))
            } else if col_deg[c] == 1 {
                Some((k, false))
            } else {
                None
            }
        });
        // No leaf among open edges means a cycle.
        let (k, row_is_leaf) = leaf?;
        let (r, c) = support[k];
        let mass = if row_is_leaf { row_left[r] } else { col_left[c] };
        if mass < -1e-12 {
            return None;
        }
        let mass = mass.max(0.0);
        row_left[r] -= mass;
        col_left[c] -= mass;
        open[k] = false;
        remaining -= 1;
        out.add(r, c, mass).ok()?;
    }
    let tol = 1e-9;
    if row_left.iter().chain(col_left.iter()).all(|x| x.abs() < tol) {
        Some(out)
    } else {
        None
    }
}
