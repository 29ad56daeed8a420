//! Common fixed points of commutative semigroups of nonexpansive maps,
//! computed through ergodic means.
//!
//! The crate provides:
//!
//! * [`semigroup`] — index sets (discrete grid, half-line, finite tables),
//!   the directed order they carry, and tail-limit estimation;
//! * [`mean`] — Cesàro means on the grid, uniform time averages, finitely
//!   supported means, total-variation distances, and exact invariant means
//!   on finite semigroups solved as a linear feasibility problem;
//! * [`operators`] — compact convex domains and built-in commuting
//!   nonexpansive actions (commuting map pairs, symmetric-PSD linear flows,
//!   planar rotation flows) with nonexpansiveness / semigroup-law checkers;
//! * [`ergodic`] — the mean operator `x ↦ Σ w_t T(t)x` (resp. the time
//!   average `(1/τ)∫ T(t)x dt`) for those means;
//! * [`iterate`] — the averaged (Mann) iteration toward a common fixed
//!   point, a nonexpansive retraction onto the fixed-point set, and
//!   characterization verdicts with residual/λ diagnostics;
//! * [`oracle`] — independent closed forms used to cross-check everything.
//!
//! All computations are in finite-dimensional Euclidean space, where weak
//! and strong limits coincide and every built-in family satisfies the
//! hypotheses needed for the ergodic characterizations to be exact.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use semimean::iterate::{mann_iterate, MannConfig, MeanSchedule};
//! use semimean::operators::{Domain, OperatorFamily};
//!
//! // The flow exp(-t)·x on [-1, 1] has 0 as its only common fixed point.
//! let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0]));
//! let domain = Domain::ball(DVector::from_vec(vec![0.0]), 1.0)?;
//! let flow = OperatorFamily::linear_flow(a, domain)?;
//!
//! let config = MannConfig::new(MeanSchedule::Time { rate: 1.0 });
//! let run = mann_iterate(&flow, &config, &DVector::from_vec(vec![1.0])).unwrap();
//! assert!(run.converged);
//! assert!(run.final_point[0].abs() < 1e-6);
//! # Ok::<(), semimean::Error>(())
//! ```

pub mod error;
pub mod semigroup;

mod accum;
mod quad;

pub mod ergodic;
pub mod iterate;
pub mod mean;
pub mod operators;
pub mod oracle;

pub use error::{Error, Result};
