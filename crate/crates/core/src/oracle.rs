//! Independent closed-form references used to validate the ergodic and
//! iteration machinery.
//!
//! Nothing here shares code with the paths it checks: rotation averages
//! come from factored geometric sums of unit complex numbers, linear-flow
//! averages from the scalar integral `(1/τ)∫ e^{−λt} dt` per eigenvalue,
//! and invariant means are verified by exhaustive brute force over the
//! operation table.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mean::FiniteMean;
use crate::operators::{Domain, IndexKind, OperatorFamily};
use crate::semigroup::{FiniteSemigroup, Index};

/// Eigenvalues at or below this threshold count as kernel directions.
pub const KERNEL_EIGENVALUE_TOL: f64 = 1e-12;

/// `(1/n) Σ_{k=1}^n e^{ikθ}`, with the `θ ≡ 0 (mod 2π)` degenerate case
/// handled as 1.
fn cesaro_factor(theta: f64, n: u32) -> Complex64 {
    let e = Complex64::from_polar(1.0, theta);
    if (e - 1.0).norm() < 1e-15 {
        return Complex64::new(1.0, 0.0);
    }
    let top = Complex64::from_polar(1.0, n as f64 * theta) - 1.0;
    e * top / ((e - 1.0) * n as f64)
}

/// Closed form of the double Cesàro average of two plane rotations about a
/// common center: `center + c_T·c_U·(x − center)` with the geometric-sum
/// factors interpreted as complex multiplication.
pub fn rotation_cesaro_closed_form(
    theta: f64,
    phi: f64,
    n: u32,
    x: &DVector<f64>,
    center: &DVector<f64>,
) -> Result<DVector<f64>> {
    if n == 0 {
        return Err(Error::invalid("closed form requires n >= 1"));
    }
    if x.len() != 2 || center.len() != 2 {
        return Err(Error::invalid("rotation closed form is planar"));
    }
    let c = cesaro_factor(theta, n) * cesaro_factor(phi, n);
    let z = Complex64::new(x[0] - center[0], x[1] - center[1]);
    let w = c * z;
    Ok(DVector::from_vec(vec![center[0] + w.re, center[1] + w.im]))
}

fn symmetric_psd_eigen(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !a.is_square() {
        return Err(Error::invalid("matrix must be square"));
    }
    let asym = (a - a.transpose()).abs().max();
    if asym > 1e-10 {
        return Err(Error::invalid(format!(
            "matrix is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let eig = ((a + a.transpose()) * 0.5).symmetric_eigen();
    let mut values = eig.eigenvalues;
    for v in values.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-10 {
                return Err(Error::invalid(format!(
                    "matrix has negative eigenvalue {v:.3e}"
                )));
            }
            *v = 0.0;
        }
    }
    Ok((values, eig.eigenvectors))
}

/// Closed form of the time average of `exp(−tA)x` over `[0, τ]`: per
/// eigenvalue the factor is `(1 − e^{−λτ})/(λτ)` for `λ > 0` and `1` on
/// the kernel.
pub fn linear_flow_mean_closed_form(
    a: &DMatrix<f64>,
    tau: f64,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::invalid("averaging horizon must be positive"));
    }
    let (values, vectors) = symmetric_psd_eigen(a)?;
    if x.len() != values.len() {
        return Err(Error::invalid("vector/matrix dimension mismatch"));
    }
    let mut coeffs = vectors.transpose() * x;
    for (c, lambda) in coeffs.iter_mut().zip(values.iter()) {
        if *lambda > KERNEL_EIGENVALUE_TOL {
            *c *= (1.0 - (-lambda * tau).exp()) / (lambda * tau);
        }
    }
    Ok(vectors * coeffs)
}

/// Orthogonal projection onto the null space of a symmetric PSD matrix —
/// the `τ → ∞` limit of [`linear_flow_mean_closed_form`] and the reference
/// for the retraction on linear flows.
pub fn kernel_projection(a: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    let (values, vectors) = symmetric_psd_eigen(a)?;
    if x.len() != values.len() {
        return Err(Error::invalid("vector/matrix dimension mismatch"));
    }
    let mut coeffs = vectors.transpose() * x;
    for (c, lambda) in coeffs.iter_mut().zip(values.iter()) {
        if *lambda > KERNEL_EIGENVALUE_TOL {
            *c = 0.0;
        }
    }
    Ok(vectors * coeffs)
}

/// Brute-force invariance defect of a candidate mean on a finite
/// semigroup: `max_{s, e} |w_e − Σ_{t : s+t=e} w_t|` over all translations
/// and all indicator-basis functions.
pub fn verify_invariant_mean(sg: &FiniteSemigroup, mu: &FiniteMean) -> Result<f64> {
    let n = sg.len();
    let mut weights = vec![0.0; n];
    for (idx, w) in mu.support() {
        match idx {
            Index::FiniteElem { table, id } => {
                if table.as_ref() != sg {
                    return Err(Error::invalid(
                        "mean is supported on a different semigroup table",
                    ));
                }
                weights[*id] += w;
            }
            other => {
                return Err(Error::invalid(format!(
                    "mean must be supported on finite semigroup elements, found {other:?}"
                )))
            }
        }
    }
    let mut worst = 0.0_f64;
    for s in 0..n {
        for e in 0..n {
            let pushed: f64 = (0..n)
                .filter(|&t| sg.combine(s, t) == e)
                .map(|t| weights[t])
                .sum();
            worst = worst.max((weights[e] - pushed).abs());
        }
    }
    Ok(worst)
}

/// An analytically known common fixed-point set.
#[derive(Debug, Clone)]
pub enum AnalyticFixedSet {
    /// A single common fixed point.
    SinglePoint(DVector<f64>),
    /// `(offset + span basis) ∩ domain`, with an orthonormalized basis.
    AffineSubspace {
        basis: Vec<DVector<f64>>,
        offset: DVector<f64>,
        domain: Domain,
    },
}

impl AnalyticFixedSet {
    /// Build an affine-subspace fixed set; the basis is orthonormalized
    /// (near-dependent directions are dropped).
    pub fn affine_subspace(
        basis: Vec<DVector<f64>>,
        offset: DVector<f64>,
        domain: Domain,
    ) -> Result<Self> {
        let dim = offset.len();
        if domain.dim() != dim || basis.iter().any(|b| b.len() != dim) {
            return Err(Error::invalid("fixed-set dimensions are inconsistent"));
        }
        let mut ortho: Vec<DVector<f64>> = Vec::new();
        for mut b in basis {
            for q in &ortho {
                let proj = q.dot(&b);
                b -= q * proj;
            }
            let norm = b.norm();
            if norm > 1e-10 {
                ortho.push(b / norm);
            }
        }
        if ortho.is_empty() {
            return Err(Error::invalid(
                "basis spans nothing; use SinglePoint instead",
            ));
        }
        Ok(AnalyticFixedSet::AffineSubspace {
            basis: ortho,
            offset,
            domain,
        })
    }

    /// Distance from `x` to the set. For the affine variant the point is
    /// first projected onto the subspace and then onto the domain; the two
    /// projections agree with the exact distance whenever the domain's
    /// metric projection preserves the subspace (true for the built-ins,
    /// where the domain is a ball centered on the subspace).
    pub fn distance(&self, x: &DVector<f64>) -> f64 {
        match self {
            AnalyticFixedSet::SinglePoint(p) => (x - p).norm(),
            AnalyticFixedSet::AffineSubspace {
                basis,
                offset,
                domain,
            } => {
                let mut p = offset.clone();
                let d = x - offset;
                for q in basis {
                    p += q * q.dot(&d);
                }
                (x - domain.project(&p)).norm()
            }
        }
    }

    /// Sampled validation that every point of the set is fixed by the
    /// family: the maximum of `‖T(s)p − p‖` over sampled points `p` and a
    /// small deterministic index set.
    pub fn max_fixed_defect(
        &self,
        family: &OperatorFamily,
        samples: usize,
        seed: u64,
    ) -> Result<f64> {
        let indices: Vec<Index> = match family.index_kind() {
            IndexKind::Grid2d => vec![
                Index::grid2d(1, 1)?,
                Index::grid2d(2, 3)?,
                Index::grid2d(5, 2)?,
            ],
            IndexKind::Time => vec![
                Index::time(0.5)?,
                Index::time(1.7)?,
                Index::time(6.3)?,
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples.max(1) {
            let p = match self {
                AnalyticFixedSet::SinglePoint(p) => p.clone(),
                AnalyticFixedSet::AffineSubspace {
                    basis,
                    offset,
                    domain,
                } => {
                    let mut p = offset.clone();
                    for q in basis {
                        p += q * rng.random_range(-1.0..1.0);
                    }
                    domain.project(&p)
                }
            };
            for s in &indices {
                let moved = family.act(s, &p)?;
                worst = worst.max((moved - &p).norm());
            }
        }
        Ok(worst)
    }
}
