//! Dense phase-I simplex for small linear feasibility problems
//! `A x = b, x >= 0`.
//!
//! The systems solved here are tiny (at most a few thousand highly
//! redundant rows over at most 64 variables), so the solver first reduces
//! the equality system to an independent subset by Gaussian elimination
//! with partial pivoting, then runs a textbook phase-I simplex with
//! Bland's rule on the reduced tableau.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;

/// Find any `x >= 0` with `rows · x = rhs`.
pub(crate) fn feasible_point(rows: &[Vec<f64>], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(rows.len(), rhs.len());
    // Augmented copy for rank reduction.
    let mut aug: Vec<Vec<f64>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            assert_eq!(row.len(), n);
            let mut r = row.clone();
            r.push(*b);
            r
        })
        .collect();

    let m0 = aug.len();
    let mut rank = 0;
    for col in 0..n {
        let Some((best, best_val)) = (rank..m0)
            .map(|r| (r, aug[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if best_val <= PIVOT_TOL {
            continue;
        }
        aug.swap(rank, best);
        let (pivot_rows, rest) = aug.split_at_mut(rank + 1);
        let pivot = &pivot_rows[rank];
        for row in rest.iter_mut() {
            let factor = row[col] / pivot[col];
            if factor != 0.0 {
                for (dst, src) in row[col..=n].iter_mut().zip(&pivot[col..=n]) {
                    *dst -= factor * src;
                }
                row[col] = 0.0;
            }
        }
        rank += 1;
        if rank == m0 {
            break;
        }
    }
    // Rows below the rank are all-zero combinations; a nonzero rhs there
    // means the system is inconsistent.
    for row in aug.iter().skip(rank) {
        if row[n].abs() > FEAS_TOL {
            return Err(Error::Internal(
                "equality system is inconsistent".to_string(),
            ));
        }
    }
    aug.truncate(rank);

    // Phase-I tableau over the independent rows.
    let m = rank;
    if m == 0 {
        return Ok(vec![0.0; n]);
    }
    for row in &mut aug {
        if row[n] < 0.0 {
            for c in row.iter_mut() {
                *c = -*c;
            }
        }
    }
    let width = n + m + 1;
    let mut tab: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in aug.iter().enumerate() {
        let mut t = vec![0.0; width];
        t[..n].copy_from_slice(&row[..n]);
        t[n + i] = 1.0;
        t[width - 1] = row[n];
        tab.push(t);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced costs for minimizing the sum of artificials; the last entry
    // holds minus the objective value.
    let mut cost = vec![0.0; width];
    for j in 0..n {
        cost[j] = -tab.iter().map(|r| r[j]).sum::<f64>();
    }
    cost[width - 1] = -tab.iter().map(|r| r[width - 1]).sum::<f64>();

    let max_pivots = 200 * (n + m) + 1000;
    for _ in 0..max_pivots {
        // Bland's rule: smallest improving column.
        let Some(entering) = (0..width - 1).find(|&j| cost[j] < -COST_TOL) else {
            let objective = -cost[width - 1];
            if objective > FEAS_TOL {
                return Err(Error::Internal(format!(
                    "no feasible point (phase-I objective {objective:.3e})"
                )));
            }
            let mut x = vec![0.0; n];
            for (i, &b) in basis.iter().enumerate() {
                if b < n {
                    x[b] = tab[i][width - 1];
                }
            }
            return Ok(x);
        };
        // Ratio test, ties broken toward the smallest basis label.
        let mut leaving: Option<(usize, f64)> = None;
        for (i, row) in tab.iter().enumerate() {
            let a = row[entering];
            if a > PIVOT_TOL {
                let ratio = row[width - 1] / a;
                let better = match leaving {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio < lr + 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leaving else {
            return Err(Error::Internal(
                "phase-I simplex became unbounded".to_string(),
            ));
        };
        // Pivot.
        let pv = tab[pivot_row][entering];
        for cell in tab[pivot_row].iter_mut() {
            *cell /= pv;
        }
        let pivot = tab[pivot_row].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != pivot_row {
                let factor = row[entering];
                if factor != 0.0 {
                    for (dst, src) in row.iter_mut().zip(&pivot) {
                        *dst -= factor * src;
                    }
                    row[entering] = 0.0;
                }
            }
        }
        let factor = cost[entering];
        if factor != 0.0 {
            for (dst, src) in cost.iter_mut().zip(&pivot) {
                *dst -= factor * src;
            }
            cost[entering] = 0.0;
        }
        basis[pivot_row] = entering;
    }
    Err(Error::Internal(
        "phase-I simplex exceeded its pivot budget".to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_feasible_system() {
        // x1 + x2 = 1, x1 - x2 = 0 -> (0.5, 0.5).
        let rows = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let x = feasible_point(&rows, &[1.0, 0.0], 2).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-12);
        assert!((x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_fine() {
        let rows = vec![
            vec![1.0, 1.0, 1.0],
            vec![2.0, 2.0, 2.0],
            vec![1.0, -1.0, 0.0],
            vec![1.0, -1.0, 0.0],
        ];
        let x = feasible_point(&rows, &[1.0, 2.0, 0.0, 0.0], 3).unwrap();
        assert!(x.iter().all(|&v| v >= -1e-12));
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((x[0] - x[1]).abs() < 1e-10);
    }

    #[test]
    fn sign_constrained_infeasibility_detected() {
        // x1 + x2 = -1 with x >= 0 is infeasible.
        let rows = vec![vec![1.0, 1.0]];
        assert!(feasible_point(&rows, &[-1.0], 2).is_err());
    }

    #[test]
    fn inconsistent_system_detected() {
        let rows = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!(feasible_point(&rows, &[1.0, 2.0], 2).is_err());
    }
}
