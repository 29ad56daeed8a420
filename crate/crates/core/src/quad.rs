//! Adaptive Simpson quadrature for vector-valued integrands.
//!
//! Classic recursive scheme: compare the whole-interval Simpson value with
//! the two-half refinement, accept when the Richardson error estimate is
//! below the (halved per side) tolerance, otherwise split. Error control is
//! per coordinate; an interval is accepted only when every coordinate
//! passes.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Interval-halving budget before giving up.
pub(crate) const MAX_HALVINGS: u32 = 20;

pub(crate) struct Quadrature {
    pub value: DVector<f64>,
    /// Sum of accepted per-interval Richardson estimates (max over coords).
    pub error_estimate: f64,
}

fn eval<F>(f: &mut F, t: f64) -> Result<DVector<f64>>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    let v = f(t)?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::numeric(format!(
            "non-finite integrand value at t = {t}"
        )));
    }
    Ok(v)
}

fn simpson(a: f64, b: f64, fa: &DVector<f64>, fm: &DVector<f64>, fb: &DVector<f64>) -> DVector<f64> {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol` (per
/// coordinate, on the whole interval).
pub(crate) fn adaptive_simpson<F>(f: &mut F, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    if !a.is_finite() || !b.is_finite() || b <= a {
        return Err(Error::invalid(format!(
            "quadrature interval [{a}, {b}] must be finite and nonempty"
        )));
    }
    if !abs_tol.is_finite() || abs_tol <= 0.0 {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    let fa = eval(f, a)?;
    let m = 0.5 * (a + b);
    let fm = eval(f, m)?;
    let fb = eval(f, b)?;
    let whole = simpson(a, b, &fa, &fm, &fb);
    let mut error_estimate = 0.0;
    let value = refine(f, a, b, &fa, &fm, &fb, &whole, abs_tol, MAX_HALVINGS, &mut error_estimate)?;
    Ok(Quadrature {
        value,
        error_estimate,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: &DVector<f64>,
    fm: &DVector<f64>,
    fb: &DVector<f64>,
    whole: &DVector<f64>,
    tol: f64,
    depth: u32,
    error_estimate: &mut f64,
) -> Result<DVector<f64>>
where
    F: FnMut(f64) -> Result<DVector<f64>>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = eval(f, lm)?;
    let frm = eval(f, rm)?;
    let left = simpson(a, m, fa, &flm, fm);
    let right = simpson(m, b, fm, &frm, fb);
    let diff = &left + &right - whole;
    let worst = diff.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
    if worst <= 15.0 * tol {
        *error_estimate += worst / 15.0;
        return Ok(&left + &right + diff / 15.0);
    }
    if depth == 0 {
        return Err(Error::numeric(format!(
            "quadrature did not converge after {MAX_HALVINGS} interval halvings \
             (interval [{a}, {b}], error {worst:.3e})"
        )));
    }
    let half_tol = 0.5 * tol;
    let lv = refine(f, a, m, fa, &flm, fm, &left, half_tol, depth - 1, error_estimate)?;
    let rv = refine(f, m, b, fm, &frm, fb, &right, half_tol, depth - 1, error_estimate)?;
    Ok(lv + rv)
}

/// Scalar convenience wrapper. Returns `(integral, error_estimate)`.
pub(crate) fn adaptive_simpson_scalar<F>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut vf = |t: f64| f(t).map(|v| DVector::from_element(1, v));
    let q = adaptive_simpson(&mut vf, a, b, abs_tol)?;
    Ok((q.value[0], q.error_estimate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_near_exact() {
        let mut f = |t: f64| Ok(t * t);
        let (v, _) = adaptive_simpson_scalar(&mut f, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn full_sine_period_cancels() {
        let mut f = |t: f64| Ok(t.sin());
        let (v, _) = adaptive_simpson_scalar(&mut f, 0.0, 2.0 * std::f64::consts::PI, 1e-12).unwrap();
        assert!(v.abs() < 1e-11);
    }

    #[test]
    fn exponential_vector() {
        let mut f = |t: f64| Ok(DVector::from_vec(vec![(-t).exp(), 1.0]));
        let q = adaptive_simpson(&mut f, 0.0, 2.0, 1e-11).unwrap();
        assert!((q.value[0] - (1.0 - (-2.0_f64).exp())).abs() < 1e-10);
        assert!((q.value[1] - 2.0).abs() < 1e-12);
        assert!(q.error_estimate <= 1e-10);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let mut f = |t: f64| Ok(if t > 0.5 { f64::NAN } else { 1.0 });
        let err = adaptive_simpson_scalar(&mut f, 0.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn jump_discontinuity_exhausts_halvings() {
        let cut = 0.3 * std::f64::consts::SQRT_2;
        let mut f = |t: f64| Ok(if t < cut { 0.0 } else { 1.0 });
        let err = adaptive_simpson_scalar(&mut f, 0.0, 1.0, 1e-13).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn rejects_bad_interval() {
        let mut f = |_| Ok(1.0);
        assert!(adaptive_simpson_scalar(&mut f, 1.0, 1.0, 1e-10).is_err());
    }
}
