//! Means on semigroup index sets.
//!
//! A mean is a normalized positive weighting of bounded functions on the
//! index set: finitely supported weights for discrete semigroups, the
//! uniform density `(1/t_n)·1_{[0,t_n]}` for the half-line. The distance
//! between two means is measured in the dual norm, which for these
//! families is the total variation of the weights/densities.

mod invariant;
mod lp;

pub use invariant::{indicator_bound_check, solve_invariant_mean, translate_intersection, IndicatorBound};

use std::cmp::Ordering;
use std::sync::Arc;

use crate::accum::pairwise_sum;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson_scalar;
use crate::semigroup::Index;

/// Tolerance on `Σ weights = 1` accepted by [`FiniteMean::new`].
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

fn variant_rank(idx: &Index) -> u8 {
    match idx {
        Index::Grid2d { .. } => 0,
        Index::Time(_) => 1,
        Index::FiniteElem { .. } => 2,
    }
}

/// Total order on indices used for support normalization; indices of
/// different variants are ordered by variant so sorting never panics.
fn cmp_index(a: &Index, b: &Index) -> Ordering {
    match (a, b) {
        (Index::Grid2d { i: a1, j: a2 }, Index::Grid2d { i: b1, j: b2 }) => {
            (a1, a2).cmp(&(b1, b2))
        }
        (Index::Time(s), Index::Time(t)) => s.partial_cmp(t).unwrap_or(Ordering::Equal),
        (Index::FiniteElem { id: a, .. }, Index::FiniteElem { id: b, .. }) => a.cmp(b),
        _ => variant_rank(a).cmp(&variant_rank(b)),
    }
}

/// A finitely supported mean: distinct indices with nonnegative weights
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMean {
    support: Vec<(Index, f64)>,
}

impl FiniteMean {
    pub fn new(support: Vec<(Index, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("mean support must be nonempty"));
        }
        for (idx, w) in &support {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::invalid(format!(
                    "weight {w} at {idx:?} must be finite and nonnegative"
                )));
            }
        }
        let first = variant_rank(&support[0].0);
        if support.iter().any(|(idx, _)| variant_rank(idx) != first) {
            return Err(Error::invalid("mean support mixes index variants"));
        }
        if let Index::FiniteElem { table, .. } = &support[0].0 {
            for (idx, _) in &support[1..] {
                if let Index::FiniteElem { table: other, .. } = idx {
                    if !Arc::ptr_eq(table, other) && table != other {
                        return Err(Error::invalid(
                            "mean support mixes finite semigroup tables",
                        ));
                    }
                }
            }
        }
        let mut sorted: Vec<&Index> = support.iter().map(|(idx, _)| idx).collect();
        sorted.sort_by(|a, b| cmp_index(a, b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("mean support indices must be distinct"));
        }
        let total = pairwise_sum(&support.iter().map(|(_, w)| *w).collect::<Vec<_>>());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL:e}"
            )));
        }
        Ok(FiniteMean { support })
    }

    /// Point mass at a single index.
    pub fn dirac(at: Index) -> Self {
        FiniteMean {
            support: vec![(at, 1.0)],
        }
    }

    pub fn support(&self) -> &[(Index, f64)] {
        &self.support
    }

    /// Evaluate the mean on `a`: the weighted sum `Σ w_t a(t)`.
    pub fn apply(&self, a: impl Fn(&Index) -> f64) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.support.len());
        for (idx, w) in &self.support {
            let v = a(idx);
            if !v.is_finite() {
                return Err(Error::numeric(format!("a({idx:?}) is not finite")));
            }
            terms.push(w * v);
        }
        Ok(pairwise_sum(&terms))
    }

    /// Dual-norm (total variation) distance: `Σ |w_μ(t) − w_ν(t)|` over the
    /// union of both supports.
    pub fn tv_distance(&self, other: &FiniteMean) -> Result<f64> {
        if variant_rank(&self.support[0].0) != variant_rank(&other.support[0].0) {
            return Err(Error::invalid(
                "total variation requires means on the same index variant",
            ));
        }
        if let (Index::FiniteElem { table: a, .. }, Index::FiniteElem { table: b, .. }) =
            (&self.support[0].0, &other.support[0].0)
        {
            if !Arc::ptr_eq(a, b) && a != b {
                return Err(Error::invalid(
                    "total variation requires means on the same semigroup table",
                ));
            }
        }
        let mut a: Vec<(Index, f64)> = self.support.clone();
        let mut b: Vec<(Index, f64)> = other.support.clone();
        a.sort_by(|x, y| cmp_index(&x.0, &y.0));
        b.sort_by(|x, y| cmp_index(&x.0, &y.0));
        let mut terms = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if i == a.len() {
                terms.push(b[j].1.abs());
                j += 1;
            } else if j == b.len() {
                terms.push(a[i].1.abs());
                i += 1;
            } else {
                match cmp_index(&a[i].0, &b[j].0) {
                    Ordering::Less => {
                        terms.push(a[i].1.abs());
                        i += 1;
                    }
                    Ordering::Greater => {
                        terms.push(b[j].1.abs());
                        j += 1;
                    }
                    Ordering::Equal => {
                        terms.push((a[i].1 - b[j].1).abs());
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Translation defect `|μ_t(a(t)) − μ_t(a(s+t))|`.
    pub fn invariance_deficiency(&self, s: &Index, a: impl Fn(&Index) -> f64) -> Result<f64> {
        let direct = self.apply(&a)?;
        let mut terms = Vec::with_capacity(self.support.len());
        for (idx, w) in &self.support {
            let shifted = s.combine(idx)?;
            let v = a(&shifted);
            if !v.is_finite() {
                return Err(Error::numeric(format!("a({shifted:?}) is not finite")));
            }
            terms.push(w * v);
        }
        Ok((direct - pairwise_sum(&terms)).abs())
    }
}

/// The Cesàro mean on the grid: uniform weight `1/n²` on `{1..n}²`.
///
/// Support order is `j` outer, `i` inner, matching the fixed summation
/// order used by the ergodic evaluators.
pub fn cesaro2d(n: u32) -> Result<FiniteMean> {
    if n == 0 {
        return Err(Error::invalid("cesaro2d requires n >= 1"));
    }
    let w = 1.0 / (n as f64 * n as f64);
    let mut support = Vec::with_capacity((n as usize) * (n as usize));
    for j in 1..=u64::from(n) {
        for i in 1..=u64::from(n) {
            support.push((Index::Grid2d { i, j }, w));
        }
    }
    Ok(FiniteMean { support })
}

/// Exact total variation between consecutive Cesàro means,
/// `‖μ_n − μ_{n+1}‖ = 2(2n+1)/(n+1)²`: the `n²` shared cells each
/// contribute `1/n² − 1/(n+1)²` and the `2n+1` new cells `1/(n+1)²`.
pub fn cesaro2d_gap(n: u32) -> f64 {
    let nf = n as f64;
    2.0 * (2.0 * nf + 1.0) / ((nf + 1.0) * (nf + 1.0))
}

/// The uniform averaging mean `a ↦ (1/t_n) ∫_0^{t_n} a(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMean {
    horizon: f64,
}

impl TimeMean {
    pub fn new(t_n: f64) -> Result<Self> {
        if !t_n.is_finite() || t_n <= 0.0 {
            return Err(Error::invalid(format!(
                "time mean horizon must be positive and finite, got {t_n}"
            )));
        }
        Ok(TimeMean { horizon: t_n })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Evaluate the mean by adaptive quadrature. `quad_tol` is relative to
    /// the magnitude of the result (with a floor of 1 so near-zero means
    /// stop refining).
    pub fn apply(&self, a: impl Fn(f64) -> f64, quad_tol: f64) -> Result<f64> {
        let h = self.horizon;
        // Coarse 3-point estimate to scale the absolute tolerance.
        let coarse = (a(0.0) + 4.0 * a(0.5 * h) + a(h)) / 6.0;
        if !coarse.is_finite() {
            return Err(Error::numeric("non-finite integrand value"));
        }
        let tol = quad_tol * h * (1.0 + coarse.abs());
        let mut f = |t: f64| Ok(a(t));
        let (integral, _) = adaptive_simpson_scalar(&mut f, 0.0, h, tol)?;
        Ok(integral / h)
    }

    /// Exact total variation between the uniform densities on `[0, t_n]`
    /// and `[0, t_m]`: `2 − 2·min/max`.
    pub fn tv_distance(&self, other: &TimeMean) -> f64 {
        let m = self.horizon.min(other.horizon);
        let big = self.horizon.max(other.horizon);
        2.0 - 2.0 * m / big
    }

    /// Translation defect `|μ_t(a(t)) − μ_t(a(s+t))|`.
    pub fn invariance_deficiency(
        &self,
        s: f64,
        a: impl Fn(f64) -> f64 + Copy,
        quad_tol: f64,
    ) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::invalid(format!(
                "shift must be finite and >= 0, got {s}"
            )));
        }
        let direct = self.apply(a, quad_tol)?;
        let shifted = self.apply(|t| a(s + t), quad_tol)?;
        Ok((direct - shifted).abs())
    }
}

/// Exact total variation between consecutive uniform time means with
/// `t_n = rate·n`: the rate cancels, leaving `2/(n+1)`.
pub fn time_mean_gap(n: u32) -> f64 {
    2.0 / (n as f64 + 1.0)
}
