//! Compact convex domains and built-in commutative families of
//! nonexpansive maps.
//!
//! Three families are provided, each satisfying the semigroup law exactly
//! by construction:
//!
//! * [`OperatorFamily::CommutingPair`] — `T(i, j) = T^i ∘ U^j` for two
//!   commuting nonexpansive maps, indexed by the grid ℕ×ℕ;
//! * [`OperatorFamily::LinearFlow`] — `T(t) = exp(−tA)` for a symmetric
//!   positive-semidefinite `A`, evaluated through the cached
//!   eigendecomposition;
//! * [`OperatorFamily::RotationFlow`] — planar rotation by angle `ωt`
//!   about a center.
//!
//! Everything acts on a fixed compact convex domain in Euclidean space.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::semigroup::Index;

/// Tolerance used when testing membership `x ∈ C`.
pub const DOMAIN_TOL: f64 = 1e-9;
/// Build-time commutation tolerance for [`OperatorFamily::commuting_pair`].
pub const COMMUTATION_TOL: f64 = 1e-10;

/// A compact convex subset of Euclidean space with a metric projection.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Ball { center: DVector<f64>, radius: f64 },
    Box { lower: DVector<f64>, upper: DVector<f64> },
}

impl Domain {
    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::invalid(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("ball center must be finite"));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn new_box(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("box bounds must have equal dimension"));
        }
        if lower
            .iter()
            .zip(upper.iter())
            .any(|(l, u)| !l.is_finite() || !u.is_finite() || l >= u)
        {
            return Err(Error::invalid(
                "box requires finite lower < upper componentwise",
            ));
        }
        Ok(Domain::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Ball { center, radius } => (x - center).norm() <= radius + tol,
            Domain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
        }
    }

    /// Metric projection onto the domain (nonexpansive and idempotent).
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Domain::Ball { center, radius } => {
                let d = x - center;
                let norm = d.norm();
                if norm <= *radius {
                    x.clone()
                } else {
                    center + d * (*radius / norm)
                }
            }
            Domain::Box { lower, upper } => DVector::from_iterator(
                x.len(),
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(v, (l, u))| v.max(*l).min(*u)),
            ),
        }
    }

    /// Draw a point of the domain (uniform for boxes, radially uniform for
    /// balls).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        match self {
            Domain::Ball { center, radius } => {
                let d = center.len();
                let mut dir = DVector::from_iterator(
                    d,
                    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)),
                );
                let mut norm = dir.norm();
                while norm < 1e-12 {
                    dir = DVector::from_iterator(
                        d,
                        (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)),
                    );
                    norm = dir.norm();
                }
                let u: f64 = rng.random::<f64>();
                let r = radius * u.powf(1.0 / d as f64);
                center + dir * (r / norm)
            }
            Domain::Box { lower, upper } => DVector::from_iterator(
                lower.len(),
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| rng.random_range(*l..*u)),
            ),
        }
    }
}

/// A single nonexpansive map.
#[derive(Debug, Clone, PartialEq)]
pub enum NonexpansiveMap {
    /// Planar rotation by `theta` about `center` (an isometry).
    Rotation { theta: f64, center: DVector<f64> },
    /// `x ↦ Lx + b` with operator norm `‖L‖ ≤ 1`.
    Affine {
        linear: DMatrix<f64>,
        offset: DVector<f64>,
    },
    /// Metric projection onto a domain.
    Projection { target: Domain },
}

impl NonexpansiveMap {
    pub fn rotation(theta: f64, center: DVector<f64>) -> Result<Self> {
        if center.len() != 2 {
            return Err(Error::invalid("rotation is a planar map (dimension 2)"));
        }
        if !theta.is_finite() {
            return Err(Error::invalid("rotation angle must be finite"));
        }
        Ok(NonexpansiveMap::Rotation { theta, center })
    }

    pub fn affine(linear: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if !linear.is_square() || linear.nrows() != offset.len() {
            return Err(Error::invalid("affine map has inconsistent dimensions"));
        }
        let op_norm = linear
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .fold(0.0_f64, |acc, s| acc.max(*s));
        if op_norm > 1.0 + 1e-12 {
            return Err(Error::invalid(format!(
                "affine map has operator norm {op_norm} > 1"
            )));
        }
        Ok(NonexpansiveMap::Affine { linear, offset })
    }

    pub fn projection(target: Domain) -> Self {
        NonexpansiveMap::Projection { target }
    }

    pub fn dim(&self) -> usize {
        match self {
            NonexpansiveMap::Rotation { center, .. } => center.len(),
            NonexpansiveMap::Affine { offset, .. } => offset.len(),
            NonexpansiveMap::Projection { target } => target.dim(),
        }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            NonexpansiveMap::Rotation { theta, center } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let (s, c) = theta.sin_cos();
                DVector::from_vec(vec![center[0] + c * dx - s * dy, center[1] + s * dx + c * dy])
            }
            NonexpansiveMap::Affine { linear, offset } => linear * x + offset,
            NonexpansiveMap::Projection { target } => target.project(x),
        }
    }
}

/// A built-in commutative semigroup action on a domain.
#[derive(Debug, Clone)]
pub enum OperatorFamily {
    /// `T(i, j) = T^i ∘ U^j` for commuting nonexpansive `T`, `U`.
    CommutingPair {
        t: NonexpansiveMap,
        u: NonexpansiveMap,
        domain: Domain,
    },
    /// `T(t) = exp(−tA)` for symmetric PSD `A`, via eigendecomposition.
    LinearFlow {
        matrix: DMatrix<f64>,
        eigenvalues: DVector<f64>,
        eigenvectors: DMatrix<f64>,
        domain: Domain,
    },
    /// Planar rotation by `ωt` about `center`.
    RotationFlow {
        omega: f64,
        center: DVector<f64>,
        domain: Domain,
    },
}

/// Which index variant a family is driven by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexKind {
    Grid2d,
    Time,
}

impl OperatorFamily {
    /// Build a commuting-pair family. Commutation of `T` and `U` is
    /// checked on 1000 sampled points of the domain.
    pub fn commuting_pair(t: NonexpansiveMap, u: NonexpansiveMap, domain: Domain) -> Result<Self> {
        if t.dim() != domain.dim() || u.dim() != domain.dim() {
            return Err(Error::invalid("map/domain dimension mismatch"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        let mut worst = 0.0_f64;
        for _ in 0..1000 {
            let x = domain.sample(&mut rng);
            let tu = t.apply(&u.apply(&x));
            let ut = u.apply(&t.apply(&x));
            worst = worst.max((tu - ut).norm());
        }
        if worst > COMMUTATION_TOL {
            return Err(Error::invalid(format!(
                "maps do not commute: sampled defect {worst:.3e} > {COMMUTATION_TOL:e}"
            )));
        }
        Ok(OperatorFamily::CommutingPair { t, u, domain })
    }

    /// Build a linear flow from a symmetric positive-semidefinite matrix.
    pub fn linear_flow(matrix: DMatrix<f64>, domain: Domain) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != domain.dim() {
            return Err(Error::invalid("matrix/domain dimension mismatch"));
        }
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > 1e-10 {
            return Err(Error::invalid(format!(
                "matrix is not symmetric (asymmetry {asym:.3e})"
            )));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut eigenvalues = eig.eigenvalues;
        for v in eigenvalues.iter_mut() {
            if *v < 0.0 {
                if *v < -1e-10 {
                    return Err(Error::invalid(format!(
                        "matrix has negative eigenvalue {v:.3e}"
                    )));
                }
                *v = 0.0;
            }
        }
        Ok(OperatorFamily::LinearFlow {
            matrix,
            eigenvalues,
            eigenvectors: eig.eigenvectors,
            domain,
        })
    }

    pub fn rotation_flow(omega: f64, center: DVector<f64>, domain: Domain) -> Result<Self> {
        if center.len() != 2 || domain.dim() != 2 {
            return Err(Error::invalid("rotation flow is planar (dimension 2)"));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("angular rate must be finite"));
        }
        Ok(OperatorFamily::RotationFlow {
            omega,
            center,
            domain,
        })
    }

    pub fn domain(&self) -> &Domain {
        match self {
            OperatorFamily::CommutingPair { domain, .. } => domain,
            OperatorFamily::LinearFlow { domain, .. } => domain,
            OperatorFamily::RotationFlow { domain, .. } => domain,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn index_kind(&self) -> IndexKind {
        match self {
            OperatorFamily::CommutingPair { .. } => IndexKind::Grid2d,
            _ => IndexKind::Time,
        }
    }

    /// Apply `T(s)` to `x ∈ C`.
    pub fn act(&self, s: &Index, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "point dimension {} does not match domain dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.domain().contains(x, DOMAIN_TOL) {
            return Err(Error::OutsideDomain(format!(
                "input point {x:?} is not in the domain"
            )));
        }
        match (self, s) {
            (OperatorFamily::CommutingPair { t, u, .. }, Index::Grid2d { i, j }) => {
                if *i == 0 || *j == 0 {
                    return Err(Error::invalid("grid index components must be >= 1"));
                }
                let mut y = x.clone();
                for _ in 0..*j {
                    y = u.apply(&y);
                }
                for _ in 0..*i {
                    y = t.apply(&y);
                }
                Ok(y)
            }
            (
                OperatorFamily::LinearFlow {
                    eigenvalues,
                    eigenvectors,
                    ..
                },
                Index::Time(tval),
            ) => {
                if !tval.is_finite() || *tval < 0.0 {
                    return Err(Error::invalid("time index must be finite and >= 0"));
                }
                let mut coeffs = eigenvectors.transpose() * x;
                for (c, lambda) in coeffs.iter_mut().zip(eigenvalues.iter()) {
                    *c *= (-tval * lambda).exp();
                }
                Ok(eigenvectors * coeffs)
            }
            (OperatorFamily::RotationFlow { omega, center, .. }, Index::Time(tval)) => {
                if !tval.is_finite() || *tval < 0.0 {
                    return Err(Error::invalid("time index must be finite and >= 0"));
                }
                let angle = omega * tval;
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                let (sn, cs) = angle.sin_cos();
                Ok(DVector::from_vec(vec![
                    center[0] + cs * dx - sn * dy,
                    center[1] + sn * dx + cs * dy,
                ]))
            }
            _ => Err(Error::invalid(
                "index variant does not match the family's index set",
            )),
        }
    }

    /// Largest sampled violation of `‖T(s)x − T(s)y‖ ≤ ‖x − y‖`, i.e.
    /// `max ‖T(s)x − T(s)y‖ − ‖x − y‖` over seeded pairs in the domain.
    pub fn check_nonexpansive(&self, s: &Index, samples: usize, seed: u64) -> Result<f64> {
        if samples == 0 {
            return Err(Error::invalid("at least one sample is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let x = self.domain().sample(&mut rng);
            let y = self.domain().sample(&mut rng);
            let tx = self.act(s, &x)?;
            let ty = self.act(s, &y)?;
            worst = worst.max((tx - ty).norm() - (x - y).norm());
        }
        Ok(worst)
    }

    /// Largest sampled defect of the semigroup law,
    /// `max ‖T(s+t)x − T(s)(T(t)x)‖` over seeded points.
    pub fn check_semigroup_law(
        &self,
        s: &Index,
        t: &Index,
        samples: usize,
        seed: u64,
    ) -> Result<f64> {
        if samples == 0 {
            return Err(Error::invalid("at least one sample is required"));
        }
        let st = s.combine(t)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let x = self.domain().sample(&mut rng);
            let joint = self.act(&st, &x)?;
            let nested = self.act(s, &self.act(t, &x)?)?;
            worst = worst.max((joint - nested).norm());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    fn unit_ball2() -> Domain {
        Domain::ball(v2(0.0, 0.0), 1.0).unwrap()
    }

    fn quarter_pair() -> OperatorFamily {
        let t = NonexpansiveMap::rotation(FRAC_PI_2, v2(0.0, 0.0)).unwrap();
        let u = NonexpansiveMap::rotation(FRAC_PI_2, v2(0.0, 0.0)).unwrap();
        OperatorFamily::commuting_pair(t, u, unit_ball2()).unwrap()
    }

    #[test]
    fn rotation_flow_quarter_turn() {
        let flow =
            OperatorFamily::rotation_flow(FRAC_PI_2, v2(0.0, 0.0), unit_ball2()).unwrap();
        let y = flow
            .act(&Index::time(1.0).unwrap(), &v2(1.0, 0.0))
            .unwrap();
        assert!((y - v2(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn linear_flow_coordinatewise_exponential() {
        let a = DMatrix::from_diagonal(&v2(0.0, 1.0));
        let flow = OperatorFamily::linear_flow(a, Domain::ball(v2(0.0, 0.0), 2.0).unwrap())
            .unwrap();
        let y = flow
            .act(&Index::time(2.0).unwrap(), &v2(1.0, 1.0))
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15);
        assert!((y[1] - (-2.0_f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn pair_act_is_half_turn() {
        let pair = quarter_pair();
        let y = pair
            .act(&Index::grid2d(1, 1).unwrap(), &v2(1.0, 0.0))
            .unwrap();
        assert!((y - v2(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn act_validates_inputs() {
        let pair = quarter_pair();
        // Outside the domain.
        assert!(matches!(
            pair.act(&Index::grid2d(1, 1).unwrap(), &v2(5.0, 0.0)),
            Err(Error::OutsideDomain(_))
        ));
        // Wrong index variant.
        assert!(pair
            .act(&Index::time(1.0).unwrap(), &v2(0.1, 0.0))
            .is_err());
        let flow =
            OperatorFamily::rotation_flow(1.0, v2(0.0, 0.0), unit_ball2()).unwrap();
        assert!(flow
            .act(&Index::grid2d(1, 1).unwrap(), &v2(0.1, 0.0))
            .is_err());
    }

    #[test]
    fn nonexpansiveness_of_builtins() {
        let pair = quarter_pair();
        let viol = pair
            .check_nonexpansive(&Index::grid2d(2, 3).unwrap(), 1000, 7)
            .unwrap();
        assert!(viol <= 1e-12, "violation {viol}");

        let a = DMatrix::from_diagonal(&v2(0.0, 1.0));
        let flow =
            OperatorFamily::linear_flow(a, Domain::ball(v2(0.0, 0.0), 2.0).unwrap()).unwrap();
        let viol = flow
            .check_nonexpansive(&Index::time(1.0).unwrap(), 1000, 7)
            .unwrap();
        assert!(viol <= 1e-12, "violation {viol}");

        // Strict contraction wrapped as a pair.
        let c = NonexpansiveMap::affine(
            DMatrix::from_diagonal(&v2(0.5, 0.5)),
            v2(0.0, 0.0),
        )
        .unwrap();
        let pair = OperatorFamily::commuting_pair(
            c.clone(),
            c,
            Domain::ball(v2(0.0, 0.0), 1.0).unwrap(),
        )
        .unwrap();
        let viol = pair
            .check_nonexpansive(&Index::grid2d(1, 2).unwrap(), 1000, 7)
            .unwrap();
        assert!(viol <= 1e-12, "violation {viol}");
    }

    #[test]
    fn semigroup_law_of_builtins() {
        let a = DMatrix::from_diagonal(&v2(0.0, 1.0));
        let flow =
            OperatorFamily::linear_flow(a, Domain::ball(v2(0.0, 0.0), 2.0).unwrap()).unwrap();
        let defect = flow
            .check_semigroup_law(
                &Index::time(1.0).unwrap(),
                &Index::time(2.0).unwrap(),
                100,
                11,
            )
            .unwrap();
        assert!(defect <= 1e-10, "defect {defect}");

        let pair = quarter_pair();
        let defect = pair
            .check_semigroup_law(
                &Index::grid2d(1, 2).unwrap(),
                &Index::grid2d(2, 1).unwrap(),
                100,
                11,
            )
            .unwrap();
        assert!(defect <= 1e-12, "defect {defect}");
    }

    #[test]
    fn semigroup_law_defect_vanishes_at_fixed_point() {
        let flow =
            OperatorFamily::rotation_flow(PI / 3.0, v2(0.0, 0.0), unit_ball2()).unwrap();
        let s = Index::time(1.3).unwrap();
        let origin = v2(0.0, 0.0);
        let joint = flow.act(&s.combine(&s).unwrap(), &origin).unwrap();
        let nested = flow.act(&s, &flow.act(&s, &origin).unwrap()).unwrap();
        assert!((joint - nested).norm() <= 1e-14);
    }

    #[test]
    fn commutation_check_rejects_noncommuting_maps() {
        // Rotations about different centers do not commute.
        let t = NonexpansiveMap::rotation(FRAC_PI_2, v2(0.0, 0.0)).unwrap();
        let u = NonexpansiveMap::rotation(FRAC_PI_2, v2(0.3, 0.0)).unwrap();
        let res = OperatorFamily::commuting_pair(t, u, Domain::ball(v2(0.0, 0.0), 1.0).unwrap());
        assert!(res.is_err());
    }

    #[test]
    fn linear_flow_validation() {
        let dom = Domain::ball(v2(0.0, 0.0), 1.0).unwrap();
        let nonsym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(OperatorFamily::linear_flow(nonsym, dom.clone()).is_err());
        let negdef = DMatrix::from_diagonal(&v2(-1.0, 1.0));
        assert!(OperatorFamily::linear_flow(negdef, dom).is_err());
    }

    #[test]
    fn affine_norm_validation() {
        let expanding = DMatrix::from_diagonal(&v2(1.5, 0.5));
        assert!(NonexpansiveMap::affine(expanding, v2(0.0, 0.0)).is_err());
    }

    #[test]
    fn projection_map_and_box_domain() {
        let small = Domain::ball(v2(0.0, 0.0), 0.5).unwrap();
        let p = NonexpansiveMap::projection(small);
        assert!((p.apply(&v2(2.0, 0.0)) - v2(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(p.apply(&v2(0.1, 0.1)), v2(0.1, 0.1));

        let b = Domain::new_box(v2(-1.0, -1.0), v2(1.0, 2.0)).unwrap();
        assert_eq!(b.project(&v2(3.0, -4.0)), v2(1.0, -1.0));
        assert!(b.contains(&v2(0.0, 1.5), 0.0));
        assert!(!b.contains(&v2(0.0, 2.5), 1e-9));
        assert!(Domain::new_box(v2(1.0, 0.0), v2(0.0, 1.0)).is_err());
    }

    #[test]
    fn domain_preservation_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let pair = quarter_pair();
        let flow = OperatorFamily::rotation_flow(0.7, v2(0.0, 0.0), unit_ball2()).unwrap();
        let a = DMatrix::from_diagonal(&v2(0.0, 1.0));
        let lin =
            OperatorFamily::linear_flow(a, Domain::ball(v2(0.0, 0.0), 2.0).unwrap()).unwrap();
        for k in 0..1000 {
            let sp = Index::grid2d(1 + k % 5, 1 + k % 3).unwrap();
            let x = pair.domain().sample(&mut rng);
            assert!(pair.domain().contains(&pair.act(&sp, &x).unwrap(), DOMAIN_TOL));
            let st = Index::time((k % 17) as f64 * 0.37).unwrap();
            let y = flow.domain().sample(&mut rng);
            assert!(flow.domain().contains(&flow.act(&st, &y).unwrap(), DOMAIN_TOL));
            let z = lin.domain().sample(&mut rng);
            assert!(lin.domain().contains(&lin.act(&st, &z).unwrap(), DOMAIN_TOL));
        }
    }

    mod random_families {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            // Any pair of rotations about a common center commutes and
            // forms a valid nonexpansive semigroup action.
            #[test]
            fn random_rotation_pairs(
                theta in -3.2f64..3.2,
                phi in -3.2f64..3.2,
                i in 1u64..5,
                j in 1u64..5,
                seed in 0u64..1000,
            ) {
                let t = NonexpansiveMap::rotation(theta, v2(0.0, 0.0)).unwrap();
                let u = NonexpansiveMap::rotation(phi, v2(0.0, 0.0)).unwrap();
                let pair = OperatorFamily::commuting_pair(t, u, unit_ball2()).unwrap();
                let s = Index::grid2d(i, j).unwrap();
                let w = Index::grid2d(j, i).unwrap();
                prop_assert!(pair.check_nonexpansive(&s, 50, seed).unwrap() <= 1e-12);
                prop_assert!(pair.check_semigroup_law(&s, &w, 50, seed).unwrap() <= 1e-12);
            }

            // Random symmetric PSD matrices (built from a rotation and
            // nonnegative eigenvalues) give contractive flows obeying the
            // exponential law.
            #[test]
            fn random_linear_flows(
                angle in 0.0f64..3.0,
                l1 in 0.0f64..4.0,
                l2 in 0.0f64..4.0,
                s in 0.01f64..5.0,
                t in 0.01f64..5.0,
                seed in 0u64..1000,
            ) {
                let (sn, cs) = angle.sin_cos();
                let q = DMatrix::from_row_slice(2, 2, &[cs, -sn, sn, cs]);
                let a = &q * DMatrix::from_diagonal(&v2(l1, l2)) * q.transpose();
                let flow = OperatorFamily::linear_flow(a, unit_ball2()).unwrap();
                let si = Index::time(s).unwrap();
                let ti = Index::time(t).unwrap();
                prop_assert!(flow.check_nonexpansive(&si, 50, seed).unwrap() <= 1e-12);
                prop_assert!(flow.check_semigroup_law(&si, &ti, 50, seed).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn strong_continuity_bound() {
        let h = 1e-6;
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 0.5]);
        let norm_a = a
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0_f64, |m, v: &f64| m.max(v.abs()));
        let flow =
            OperatorFamily::linear_flow(a, Domain::ball(v2(0.0, 0.0), 1.0).unwrap()).unwrap();
        let x = v2(0.4, -0.3);
        for t in [0.0, 0.5, 2.0] {
            let near = flow.act(&Index::time(t + h).unwrap(), &x).unwrap();
            let at = flow.act(&Index::time(t).unwrap(), &x).unwrap();
            assert!((near - at).norm() <= norm_a * h * x.norm() + 1e-15);
        }
        let omega = 0.9;
        let rf = OperatorFamily::rotation_flow(omega, v2(0.0, 0.0), unit_ball2()).unwrap();
        for t in [0.0, 1.0, 10.0] {
            let near = rf.act(&Index::time(t + h).unwrap(), &x).unwrap();
            let at = rf.act(&Index::time(t).unwrap(), &x).unwrap();
            assert!((near - at).norm() <= omega.abs() * h * x.norm() + 1e-15);
        }
    }
}
