//! Exact invariant means on finite commutative semigroups, and the
//! indicator-intersection bounds they satisfy.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::{lp, FiniteMean};
use crate::error::{Error, Result};
use crate::semigroup::{FiniteSemigroup, Index};

/// Compute an invariant mean on a finite commutative semigroup.
///
/// Invariance of a weight vector `w` says that for every `s` the
/// pushforward of `w` under `t ↦ s + t` equals `w`; on the indicator basis
/// this is one equality per pair `(s, e)`:
/// `w_e = Σ_{t : s+t=e} w_t`. Together with `Σ w = 1` and `w >= 0` this is
/// a linear feasibility problem, solved by a small phase-I simplex. A
/// commutative semigroup always admits an invariant mean, so infeasibility
/// is reported as an internal error.
///
/// Any feasible point is accepted; the witness is unique only when the
/// structure forces it (e.g. groups, or a single absorbing element).
pub fn solve_invariant_mean(sg: &Arc<FiniteSemigroup>) -> Result<FiniteMean> {
    let n = sg.len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n * n + 1);
    let mut rhs: Vec<f64> = Vec::with_capacity(n * n + 1);
    for s in 0..n {
        for e in 0..n {
            let mut row = vec![0.0; n];
            row[e] += 1.0;
            for (t, cell) in row.iter_mut().enumerate() {
                if sg.combine(s, t) == e {
                    *cell -= 1.0;
                }
            }
            if row.iter().any(|&c| c != 0.0) {
                rows.push(row);
                rhs.push(0.0);
            }
        }
    }
    rows.push(vec![1.0; n]);
    rhs.push(1.0);

    let raw = lp::feasible_point(&rows, &rhs, n)?;
    let mut weights = Vec::with_capacity(n);
    for (id, w) in raw.iter().enumerate() {
        if *w < -1e-9 {
            return Err(Error::Internal(format!(
                "solver returned negative weight {w} at element {id}"
            )));
        }
        weights.push(w.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Internal(format!(
            "solver returned weights summing to {total}"
        )));
    }
    let support = weights
        .iter()
        .enumerate()
        .map(|(id, w)| {
            Ok((
                Index::finite_elem(sg, id)?,
                w / total,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteMean::new(support)
}

/// Result of [`indicator_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatorBound {
    /// `Σ_j μ(I_{A_j}) − k + 1`.
    pub alpha: f64,
    /// `μ(I_{∩ A_j})`.
    pub mass: f64,
    /// Vacuously true when `alpha <= 0`; otherwise `mass >= alpha` up to a
    /// `1e-12` slack.
    pub holds: bool,
}

fn finite_table(mu: &FiniteMean) -> Result<Arc<FiniteSemigroup>> {
    match &mu.support()[0].0 {
        Index::FiniteElem { table, .. } => Ok(Arc::clone(table)),
        other => Err(Error::invalid(format!(
            "mean must be supported on finite semigroup elements, found {other:?}"
        ))),
    }
}

fn indicator_mass(mu: &FiniteMean, set: &BTreeSet<usize>) -> f64 {
    mu.support()
        .iter()
        .filter_map(|(idx, w)| match idx {
            Index::FiniteElem { id, .. } if set.contains(id) => Some(*w),
            _ => None,
        })
        .sum()
}

/// For an invariant mean `μ` and subsets `A_1..A_k`, compute
/// `alpha = Σ_j μ(I_{A_j}) − k + 1` and the mass of the intersection.
/// When `alpha > 0` the intersection must carry at least `alpha` of the
/// mass; `holds` reports that conclusion.
///
/// The caller is responsible for `μ` actually being invariant (defect 0 on
/// the indicator basis); the bound has no content otherwise.
pub fn indicator_bound_check(
    mu: &FiniteMean,
    sets: &[BTreeSet<usize>],
) -> Result<IndicatorBound> {
    if sets.is_empty() {
        return Err(Error::invalid("at least one subset is required"));
    }
    let table = finite_table(mu)?;
    let n = table.len();
    for (j, set) in sets.iter().enumerate() {
        if set.iter().any(|&e| e >= n) {
            return Err(Error::invalid(format!(
                "set {j} contains ids outside the semigroup (size {n})"
            )));
        }
    }
    let k = sets.len() as f64;
    let alpha = sets.iter().map(|s| indicator_mass(mu, s)).sum::<f64>() - k + 1.0;
    let mut intersection = sets[0].clone();
    for set in &sets[1..] {
        intersection = intersection.intersection(set).copied().collect();
    }
    let mass = indicator_mass(mu, &intersection);
    let holds = alpha <= 0.0 || mass >= alpha - 1e-12;
    Ok(IndicatorBound { alpha, mass, holds })
}

/// True iff the translate `{s0 + t : t ∈ S}` meets `A` (exhaustive).
pub fn translate_intersection(
    sg: &FiniteSemigroup,
    s0: usize,
    a: &BTreeSet<usize>,
) -> Result<bool> {
    let n = sg.len();
    if s0 >= n {
        return Err(Error::invalid(format!("element {s0} out of range")));
    }
    if a.iter().any(|&e| e >= n) {
        return Err(Error::invalid("set contains ids outside the semigroup"));
    }
    Ok((0..n).any(|t| a.contains(&sg.combine(s0, t))))
}
