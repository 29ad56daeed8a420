//! Mean operators: the image of a point under an averaged family action.
//!
//! For a finitely supported mean the operator is the explicit convex
//! combination `Σ w_t T(t)x`; for the uniform time mean it is the average
//! `(1/τ) ∫_0^τ T(t)x dt`, computed by adaptive Simpson quadrature with
//! per-coordinate error control. Summation order is fixed (`j` outer, `i`
//! inner for Cesàro grids, pairwise-neutral accumulation) so results are
//! reproducible bit-for-bit on a given platform.

use nalgebra::DVector;

use crate::accum::pairwise_sum_vectors;
use crate::error::{Error, Result};
use crate::mean::FiniteMean;
use crate::operators::{IndexKind, OperatorFamily, DOMAIN_TOL};
use crate::quad::adaptive_simpson;
use crate::semigroup::Index;

/// Value of a mean operator applied to a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicResult {
    /// The averaged point; lies in the domain by convexity.
    pub point: DVector<f64>,
    /// Accumulated quadrature error estimate (0 for finite sums).
    pub quad_error_estimate: f64,
}

fn require_in_domain(family: &OperatorFamily, x: &DVector<f64>) -> Result<()> {
    if x.len() != family.dim() {
        return Err(Error::invalid(format!(
            "point dimension {} does not match domain dimension {}",
            x.len(),
            family.dim()
        )));
    }
    if !family.domain().contains(x, DOMAIN_TOL) {
        return Err(Error::OutsideDomain(format!(
            "input point {x:?} is not in the domain"
        )));
    }
    Ok(())
}

/// Apply the mean operator of a finitely supported mean:
/// `Σ_{t ∈ supp μ} w_t · T(t)x`.
pub fn apply_finite_mean(
    family: &OperatorFamily,
    mu: &FiniteMean,
    x: &DVector<f64>,
) -> Result<ErgodicResult> {
    require_in_domain(family, x)?;
    let mut terms = Vec::with_capacity(mu.support().len());
    for (idx, w) in mu.support() {
        terms.push(family.act(idx, x)? * *w);
    }
    Ok(ErgodicResult {
        point: pairwise_sum_vectors(&terms),
        quad_error_estimate: 0.0,
    })
}

/// The double Cesàro average `(1/n²) Σ_{i=1}^n Σ_{j=1}^n T^i U^j x` for a
/// commuting pair, computed with cached powers: `n` applications of `U`
/// and `n²` of `T` in total.
pub fn apply_cesaro2d(family: &OperatorFamily, n: u32, x: &DVector<f64>) -> Result<ErgodicResult> {
    let OperatorFamily::CommutingPair { t, u, .. } = family else {
        return Err(Error::invalid(
            "cesaro averaging requires a commuting-pair family",
        ));
    };
    if n == 0 {
        return Err(Error::invalid("cesaro averaging requires n >= 1"));
    }
    require_in_domain(family, x)?;
    let n_us = n as usize;
    let mut terms = Vec::with_capacity(n_us * n_us);
    let mut u_pow = x.clone();
    for _j in 0..n_us {
        u_pow = u.apply(&u_pow);
        let mut z = u_pow.clone();
        for _i in 0..n_us {
            z = t.apply(&z);
            terms.push(z.clone());
        }
    }
    let scale = 1.0 / (n as f64 * n as f64);
    Ok(ErgodicResult {
        point: pairwise_sum_vectors(&terms) * scale,
        quad_error_estimate: 0.0,
    })
}

/// All Cesàro averages `T_{μ_n} x` for `n = 1..=n_max` in one pass.
///
/// Each step extends the previous square by its new border, so the whole
/// sweep costs `O(n_max²)` map applications instead of `O(n_max³)`. The
/// incremental accumulation differs from [`apply_cesaro2d`]'s pairwise
/// order only at roundoff level.
pub fn cesaro2d_prefix(
    family: &OperatorFamily,
    n_max: u32,
    x: &DVector<f64>,
) -> Result<Vec<ErgodicResult>> {
    let OperatorFamily::CommutingPair { t, u, .. } = family else {
        return Err(Error::invalid(
            "cesaro averaging requires a commuting-pair family",
        ));
    };
    if n_max == 0 {
        return Err(Error::invalid("cesaro averaging requires n >= 1"));
    }
    require_in_domain(family, x)?;
    let dim = x.len();
    let mut results = Vec::with_capacity(n_max as usize);
    let mut u_pow = x.clone();
    // t_tops[j - 1] = T^n U^j x after finishing step n.
    let mut t_tops: Vec<DVector<f64>> = Vec::with_capacity(n_max as usize);
    let mut total = DVector::zeros(dim);
    for n in 1..=n_max as usize {
        u_pow = u.apply(&u_pow);
        let mut border = DVector::zeros(dim);
        let mut z = u_pow.clone();
        for _i in 0..n {
            z = t.apply(&z);
            border += &z;
        }
        for top in t_tops.iter_mut() {
            *top = t.apply(top);
            border += &*top;
        }
        t_tops.push(z);
        total += &border;
        let scale = 1.0 / (n as f64 * n as f64);
        results.push(ErgodicResult {
            point: &total * scale,
            quad_error_estimate: 0.0,
        });
    }
    Ok(results)
}

/// The time average `(1/τ) ∫_0^τ T(t)x dt` for a flow family.
pub fn apply_time_mean(
    family: &OperatorFamily,
    t_n: f64,
    x: &DVector<f64>,
    quad_tol: f64,
) -> Result<ErgodicResult> {
    if family.index_kind() != IndexKind::Time {
        return Err(Error::invalid("time averaging requires a flow family"));
    }
    if !t_n.is_finite() || t_n <= 0.0 {
        return Err(Error::invalid(format!(
            "averaging horizon must be positive and finite, got {t_n}"
        )));
    }
    require_in_domain(family, x)?;
    let abs_tol = quad_tol * t_n * (1.0 + x.norm());
    let mut f = |t: f64| family.act(&Index::Time(t), x);
    let q = adaptive_simpson(&mut f, 0.0, t_n, abs_tol)?;
    Ok(ErgodicResult {
        point: q.value / t_n,
        quad_error_estimate: q.error_estimate / t_n,
    })
}

/// Time averages at each of the given (strictly increasing, positive)
/// horizons, reusing the integral over earlier segments.
pub fn time_mean_prefix(
    family: &OperatorFamily,
    horizons: &[f64],
    x: &DVector<f64>,
    quad_tol: f64,
) -> Result<Vec<ErgodicResult>> {
    if family.index_kind() != IndexKind::Time {
        return Err(Error::invalid("time averaging requires a flow family"));
    }
    if horizons.is_empty() {
        return Err(Error::invalid("at least one horizon is required"));
    }
    let mut prev = 0.0;
    for &h in horizons {
        if !h.is_finite() || h <= prev {
            return Err(Error::invalid(
                "horizons must be strictly increasing, positive and finite",
            ));
        }
        prev = h;
    }
    require_in_domain(family, x)?;
    let scale = 1.0 + x.norm();
    let mut f = |t: f64| family.act(&Index::Time(t), x);
    let mut integral = DVector::zeros(x.len());
    let mut err = 0.0;
    let mut results = Vec::with_capacity(horizons.len());
    let mut lo = 0.0;
    for &h in horizons {
        let q = adaptive_simpson(&mut f, lo, h, quad_tol * (h - lo) * scale)?;
        integral += q.value;
        err += q.error_estimate;
        results.push(ErgodicResult {
            point: &integral / h,
            quad_error_estimate: err / h,
        });
        lo = h;
    }
    Ok(results)
}

/// Mean selector for [`ergodic_residual`].
#[derive(Debug, Clone)]
pub enum ErgodicMean<'a> {
    /// An explicit finitely supported mean.
    Finite(&'a FiniteMean),
    /// The Cesàro mean on `{1..n}²`, evaluated with cached powers.
    Cesaro2d(u32),
    /// The uniform time mean on `[0, τ]`.
    Time(f64),
}

/// The fixed-point residual `‖T_μ z − z‖`.
pub fn ergodic_residual(
    family: &OperatorFamily,
    mean: &ErgodicMean<'_>,
    z: &DVector<f64>,
    quad_tol: f64,
) -> Result<f64> {
    let result = match mean {
        ErgodicMean::Finite(mu) => apply_finite_mean(family, mu, z)?,
        ErgodicMean::Cesaro2d(n) => apply_cesaro2d(family, *n, z)?,
        ErgodicMean::Time(tau) => apply_time_mean(family, *tau, z, quad_tol)?,
    };
    Ok((result.point - z).norm())
}
