//! Averaged iteration toward a common fixed point, the retraction built
//! from repeated averaging, and fixed-point characterization verdicts.
//!
//! The iteration is `x_{n+1} = α_n T_{μ_n} x_n + (1 − α_n) x_n` with a
//! mean schedule whose consecutive total-variation gaps vanish; its limit
//! is a common fixed point of the whole family. The retraction composes
//! the mean operator with repeated `(T_μ + I)/2` averaging. Verdicts
//! combine residuals of the mean operators with the tail estimate of
//! `λ = limsup_t ‖T(t)z − z‖`.

use nalgebra::DVector;

use crate::ergodic::{
    apply_cesaro2d, apply_time_mean, cesaro2d_prefix, time_mean_prefix, ErgodicResult,
};
use crate::error::{Error, Result};
use crate::mean::{cesaro2d_gap, time_mean_gap};
use crate::operators::{IndexKind, OperatorFamily, DOMAIN_TOL};
use crate::semigroup::{tail_limsup_grid2d, tail_limsup_time, Index};

/// Quadrature tolerance used where an operation has no explicit knob.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Averaging weights `α_n`, bounded away from 0 and 1.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSchedule {
    Constant(f64),
    /// Explicit per-step table; steps beyond the end reuse the last entry.
    Table(Vec<f64>),
}

impl AlphaSchedule {
    /// `α_n` for the 1-based step `n`.
    pub fn value(&self, n: usize) -> f64 {
        match self {
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::Table(t) => t[(n - 1).min(t.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |a: f64| (0.01..=0.99).contains(&a);
        let fine = match self {
            AlphaSchedule::Constant(a) => ok(*a),
            AlphaSchedule::Table(t) => !t.is_empty() && t.iter().all(|a| ok(*a)),
        };
        if fine {
            Ok(())
        } else {
            Err(Error::invalid(
                "alpha schedule must stay within [0.01, 0.99]",
            ))
        }
    }
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule::Constant(0.5)
    }
}

/// The canonical asymptotically invariant mean schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanSchedule {
    /// `μ_n` = Cesàro mean on `{1..n}²` (commuting pairs).
    Cesaro2d,
    /// `μ_n` = uniform time mean on `[0, rate·n]` (flows).
    Time { rate: f64 },
}

impl MeanSchedule {
    pub fn compatible_with(&self, family: &OperatorFamily) -> bool {
        matches!(
            (self, family.index_kind()),
            (MeanSchedule::Cesaro2d, IndexKind::Grid2d) | (MeanSchedule::Time { .. }, IndexKind::Time)
        )
    }

    fn validate(&self, family: &OperatorFamily) -> Result<()> {
        if let MeanSchedule::Time { rate } = self {
            if !rate.is_finite() || *rate <= 0.0 {
                return Err(Error::invalid("time schedule rate must be positive"));
            }
        }
        if !self.compatible_with(family) {
            return Err(Error::invalid(
                "mean schedule does not match the family's index set",
            ));
        }
        Ok(())
    }

    /// `T_{μ_n} x`.
    pub fn evaluate(
        &self,
        family: &OperatorFamily,
        n: usize,
        x: &DVector<f64>,
        quad_tol: f64,
    ) -> Result<ErgodicResult> {
        match self {
            MeanSchedule::Cesaro2d => apply_cesaro2d(family, n as u32, x),
            MeanSchedule::Time { rate } => apply_time_mean(family, rate * n as f64, x, quad_tol),
        }
    }

    /// `T_{μ_n} x` for every `n = 1..=n_max` via the incremental
    /// evaluators.
    pub fn evaluate_prefix(
        &self,
        family: &OperatorFamily,
        n_max: usize,
        x: &DVector<f64>,
        quad_tol: f64,
    ) -> Result<Vec<ErgodicResult>> {
        match self {
            MeanSchedule::Cesaro2d => cesaro2d_prefix(family, n_max as u32, x),
            MeanSchedule::Time { rate } => {
                let horizons: Vec<f64> = (1..=n_max).map(|n| rate * n as f64).collect();
                time_mean_prefix(family, &horizons, x, quad_tol)
            }
        }
    }

    /// Exact dual-norm gap `‖μ_n − μ_{n+1}‖` of the schedule. Closed form,
    /// equal to the enumerated total variation of the two means; avoids
    /// materializing `O(n²)` supports on every trace row.
    pub fn mean_gap(&self, n: usize) -> f64 {
        match self {
            MeanSchedule::Cesaro2d => cesaro2d_gap(n as u32),
            // The rate cancels in 2 − 2·t_n/t_{n+1}.
            MeanSchedule::Time { .. } => time_mean_gap(n as u32),
        }
    }
}

/// Configuration of [`mann_iterate`].
#[derive(Debug, Clone)]
pub struct MannConfig {
    pub alpha: AlphaSchedule,
    pub schedule: MeanSchedule,
    /// Joint stopping tolerance on the step norm and the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub quad_tol: f64,
}

impl MannConfig {
    pub fn new(schedule: MeanSchedule) -> Self {
        MannConfig {
            alpha: AlphaSchedule::default(),
            schedule,
            tol: 1e-8,
            max_iter: 10_000,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    fn validate(&self, family: &OperatorFamily) -> Result<()> {
        self.alpha.validate()?;
        self.schedule.validate(family)?;
        let tol_ok = |t: f64| t.is_finite() && t > 0.0;
        if !tol_ok(self.tol) || !tol_ok(self.quad_tol) || self.max_iter == 0 {
            return Err(Error::invalid(
                "tolerances must be positive and max_iter >= 1",
            ));
        }
        Ok(())
    }
}

/// One step of the averaged iteration.
#[derive(Debug, Clone)]
pub struct TraceStep {
    /// 1-based step number.
    pub n: usize,
    /// Iterate `x_n` entering the step.
    pub x: DVector<f64>,
    /// `w_n = T_{μ_n} x_n`.
    pub w: DVector<f64>,
    /// `α_n` used by the step, so `x_{n+1} = α_n w_n + (1−α_n) x_n` is
    /// reconstructible from the record.
    pub alpha: f64,
    /// `‖x_{n+1} − x_n‖`.
    pub step_norm: f64,
    /// `‖w_n − x_n‖`.
    pub residual: f64,
    /// `‖μ_n − μ_{n+1}‖` of the schedule.
    pub mean_gap: f64,
}

/// Full record of a run.
#[derive(Debug, Clone)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub converged: bool,
    pub final_point: DVector<f64>,
}

/// A failed run carrying the partial trace accumulated so far.
#[derive(Debug, Clone)]
pub struct MannFailure {
    pub error: Error,
    pub partial: Trace,
}

/// Number of consecutive below-tolerance steps demanded before stopping
/// when an exactly-zero residual was seen (a single mean fixing the
/// iterate is weak evidence; later means may reveal non-fixedness).
const CONFIRM_WINDOW: usize = 5;

/// Run the averaged iteration `x_{n+1} = α_n T_{μ_n} x_n + (1 − α_n) x_n`
/// from `x1` until both the step norm and the residual fall below
/// `config.tol` (confirmed over `CONFIRM_WINDOW` consecutive steps when
/// an exact fixed point of some `μ_n` is hit), or `max_iter`.
#[allow(clippy::result_large_err)] // the failure intentionally carries the partial trace
pub fn mann_iterate(
    family: &OperatorFamily,
    config: &MannConfig,
    x1: &DVector<f64>,
) -> Result<Trace, MannFailure> {
    let empty = |error: Error, x: &DVector<f64>| MannFailure {
        error,
        partial: Trace {
            steps: Vec::new(),
            converged: false,
            final_point: x.clone(),
        },
    };
    if let Err(e) = config.validate(family) {
        return Err(empty(e, x1));
    }

    let mut steps: Vec<TraceStep> = Vec::new();
    let mut x = x1.clone();
    let mut consecutive_ok = 0usize;
    let mut zero_seen = false;
    let mut converged = false;

    for n in 1..=config.max_iter {
        let w = match config.schedule.evaluate(family, n, &x, config.quad_tol) {
            Ok(r) => r.point,
            Err(error) => {
                return Err(MannFailure {
                    error,
                    partial: Trace {
                        steps,
                        converged: false,
                        final_point: x,
                    },
                })
            }
        };
        let alpha = config.alpha.value(n);
        let x_next = &w * alpha + &x * (1.0 - alpha);
        if x_next.iter().any(|c| !c.is_finite()) {
            return Err(MannFailure {
                error: Error::numeric(format!("iterate became non-finite at step {n}")),
                partial: Trace {
                    steps,
                    converged: false,
                    final_point: x,
                },
            });
        }
        let residual = (&w - &x).norm();
        let step_norm = (&x_next - &x).norm();
        steps.push(TraceStep {
            n,
            x: x.clone(),
            w,
            alpha,
            step_norm,
            residual,
            mean_gap: config.schedule.mean_gap(n),
        });
        x = x_next;

        if step_norm <= config.tol && residual <= config.tol {
            consecutive_ok += 1;
            if residual == 0.0 {
                zero_seen = true;
            }
        } else {
            consecutive_ok = 0;
            zero_seen = false;
        }
        let needed = if zero_seen { CONFIRM_WINDOW } else { 1 };
        if consecutive_ok >= needed {
            converged = true;
            break;
        }
    }

    Ok(Trace {
        steps,
        converged,
        final_point: x,
    })
}

/// Running minimum `m_n = min_{k ≤ n} residual_k` of a trace — the
/// computable form of the `liminf ‖w_n − x_n‖ = 0` diagnostic.
pub fn mann_gap_diagnostic(trace: &Trace) -> Vec<f64> {
    let mut out = Vec::with_capacity(trace.steps.len());
    let mut best = f64::INFINITY;
    for step in &trace.steps {
        best = best.min(step.residual);
        out.push(best);
    }
    out
}

/// Mean index used by [`retraction_apply`]: the Cesàro order for pairs or
/// the averaging horizon for flows, standing in for a true invariant mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanIndex {
    Cesaro2d(u32),
    Time(f64),
}

/// One inner step of the averaged retraction.
#[derive(Debug, Clone)]
pub struct RetractionStep {
    /// 1-based inner iteration count.
    pub k: usize,
    /// Iterate after the averaging update.
    pub z: DVector<f64>,
    /// `‖z_k − z_{k−1}‖`.
    pub step_norm: f64,
}

/// Full record of a retraction run.
#[derive(Debug, Clone)]
pub struct RetractionTrace {
    pub steps: Vec<RetractionStep>,
    pub converged: bool,
    pub final_point: DVector<f64>,
}

/// Traced form of [`retraction_apply`]: runs the inner averaging loop and
/// reports every iterate. Hitting `max_inner` is returned as
/// `converged = false` rather than an error so the partial record stays
/// available.
pub fn retraction_iterate(
    family: &OperatorFamily,
    mean_index: MeanIndex,
    x: &DVector<f64>,
    inner_tol: f64,
    max_inner: usize,
) -> Result<RetractionTrace> {
    if !inner_tol.is_finite() || inner_tol <= 0.0 || max_inner == 0 {
        return Err(Error::invalid(
            "inner tolerance must be positive and max_inner >= 1",
        ));
    }
    let apply_mu = |p: &DVector<f64>| -> Result<DVector<f64>> {
        match mean_index {
            MeanIndex::Cesaro2d(n) => Ok(apply_cesaro2d(family, n, p)?.point),
            MeanIndex::Time(tau) => Ok(apply_time_mean(family, tau, p, DEFAULT_QUAD_TOL)?.point),
        }
    };
    let mut z = apply_mu(x)?;
    let mut steps = Vec::new();
    let mut converged = false;
    for k in 1..=max_inner {
        let w = apply_mu(&z)?;
        let z_next = (&w + &z) * 0.5;
        let step_norm = (&z_next - &z).norm();
        z = z_next;
        steps.push(RetractionStep {
            k,
            z: z.clone(),
            step_norm,
        });
        if step_norm <= inner_tol {
            converged = true;
            break;
        }
    }
    Ok(RetractionTrace {
        steps,
        converged,
        final_point: z,
    })
}

/// The retraction `Qx = lim_k ((T_μ + I)/2)^k ∘ T_μ x` onto the common
/// fixed-point set, with `μ` the surrogate invariant mean selected by
/// `mean_index`. Iterates until the inner step falls below `inner_tol`;
/// exceeding `max_inner` yields an iteration-limit error carrying the last
/// iterate.
pub fn retraction_apply(
    family: &OperatorFamily,
    mean_index: MeanIndex,
    x: &DVector<f64>,
    inner_tol: f64,
    max_inner: usize,
) -> Result<DVector<f64>> {
    let run = retraction_iterate(family, mean_index, x, inner_tol, max_inner)?;
    if run.converged {
        Ok(run.final_point)
    } else {
        Err(Error::IterationLimit {
            what: "retraction averaging",
            limit: max_inner,
            last_step: run.steps.last().map_or(f64::INFINITY, |s| s.step_norm),
            last_iterate: run.final_point,
        })
    }
}

/// Tail estimate of `λ = limsup_t ‖T(t)z − z‖` over the family's index
/// set, using the deterministic tail grids of the semigroup module.
pub fn lambda_estimate(family: &OperatorFamily, z: &DVector<f64>, horizon: f64) -> Result<f64> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::invalid("horizon must be positive and finite"));
    }
    if z.len() != family.dim() || !family.domain().contains(z, DOMAIN_TOL) {
        return Err(Error::OutsideDomain("z is not in the domain".to_string()));
    }
    match family.index_kind() {
        IndexKind::Grid2d => {
            let h = horizon.ceil().max(1.0) as u64;
            tail_limsup_grid2d(
                |i, j| {
                    let moved = family
                        .act(&Index::Grid2d { i, j }, z)
                        .expect("act on validated input");
                    (moved - z).norm()
                },
                h,
            )
        }
        IndexKind::Time => tail_limsup_time(
            |t| {
                let moved = family
                    .act(&Index::Time(t), z)
                    .expect("act on validated input");
                (moved - z).norm()
            },
            horizon,
        ),
    }
}

/// Largest sampled excess of `‖T(s)z − z‖` over `lambda` on a
/// deterministic head+tail sample of the index set; nonpositive values
/// confirm that `λ` dominates every translate distance.
fn translate_excess(
    family: &OperatorFamily,
    z: &DVector<f64>,
    lambda: f64,
    horizon: f64,
) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    match family.index_kind() {
        IndexKind::Grid2d => {
            let h = horizon.ceil().max(1.0) as u64;
            for i in 1..=2 * h {
                for j in 1..=2 * h {
                    let moved = family.act(&Index::Grid2d { i, j }, z)?;
                    worst = worst.max((moved - z).norm() - lambda);
                }
            }
        }
        IndexKind::Time => {
            let m = (10.0 * horizon).ceil() as usize;
            let step = horizon / m as f64;
            for k in 1..=2 * m {
                let moved = family.act(&Index::Time(k as f64 * step), z)?;
                worst = worst.max((moved - z).norm() - lambda);
            }
        }
    }
    Ok(worst)
}

/// Outcome of [`characterize`].
#[derive(Debug, Clone)]
pub struct CharacterizationReport {
    /// `‖T_{μ_n} z − z‖` for `n = 1..=n_max`.
    pub residual_sequence: Vec<f64>,
    /// Tail estimate of `λ = limsup ‖T(t)z − z‖`.
    pub lambda_estimate: f64,
    /// Max over sampled `s` of `‖T(s)z − z‖ − λ`.
    pub max_translate_excess: f64,
    /// True iff the last five residuals and the λ estimate are all ≤ tol.
    pub verdict: bool,
}

/// Decide whether `z` behaves like a common fixed point: the mean-operator
/// residuals along the schedule must collapse and the tail estimate of
/// `λ` must vanish. In finite dimension this is equivalent to membership
/// in the common fixed-point set.
pub fn characterize(
    family: &OperatorFamily,
    z: &DVector<f64>,
    schedule: MeanSchedule,
    n_max: usize,
    tol: f64,
    horizon: f64,
) -> Result<CharacterizationReport> {
    if n_max == 0 || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid("n_max >= 1 and tol > 0 are required"));
    }
    schedule.validate(family)?;
    let prefix = schedule.evaluate_prefix(family, n_max, z, DEFAULT_QUAD_TOL)?;
    let residual_sequence: Vec<f64> = prefix.iter().map(|r| (&r.point - z).norm()).collect();
    let lambda = lambda_estimate(family, z, horizon)?;
    let excess = translate_excess(family, z, lambda, horizon)?;
    let window = residual_sequence.len().min(5);
    let tail_ok = residual_sequence[residual_sequence.len() - window..]
        .iter()
        .all(|r| *r <= tol);
    Ok(CharacterizationReport {
        residual_sequence,
        lambda_estimate: lambda,
        max_translate_excess: excess,
        verdict: tail_ok && lambda <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergodic::{ergodic_residual, ErgodicMean};
    use crate::operators::{Domain, NonexpansiveMap};
    use crate::oracle::kernel_projection;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn v2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    fn quarter_pair() -> OperatorFamily {
        let t = NonexpansiveMap::rotation(FRAC_PI_2, v2(0.0, 0.0)).unwrap();
        let u = NonexpansiveMap::rotation(FRAC_PI_2, v2(0.0, 0.0)).unwrap();
        OperatorFamily::commuting_pair(t, u, Domain::ball(v2(0.0, 0.0), 1.0).unwrap()).unwrap()
    }

    fn diag_flow() -> OperatorFamily {
        let a = DMatrix::from_diagonal(&v2(0.0, 1.0));
        OperatorFamily::linear_flow(a, Domain::ball(v2(0.0, 0.0), 2.0).unwrap()).unwrap()
    }

    fn scalar_flow() -> OperatorFamily {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0]));
        OperatorFamily::linear_flow(
            a,
            Domain::ball(DVector::from_vec(vec![0.0]), 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn mann_two_step_rotation_example() {
        let pair = quarter_pair();
        let config = MannConfig::new(MeanSchedule::Cesaro2d);
        let trace = mann_iterate(&pair, &config, &v2(1.0, 0.0)).unwrap();
        // Step 1 uses the point mass at (1,1): w_1 = TUx = (-1, 0).
        assert!((trace.steps[0].w.clone() - v2(-1.0, 0.0)).norm() < 1e-15);
        assert!((trace.steps[0].residual - 2.0).abs() < 1e-15);
        // x_2 = (0,0) up to roundoff, and every later residual vanishes.
        assert!(trace.steps[1].x.norm() < 1e-15);
        for step in &trace.steps[1..] {
            assert!(step.residual <= 1e-15);
        }
        assert!(trace.converged);
        assert!(trace.final_point.norm() < 1e-15);
    }

    #[test]
    fn mann_scalar_flow_first_step() {
        let flow = scalar_flow();
        let config = MannConfig::new(MeanSchedule::Time { rate: 1.0 });
        let trace = mann_iterate(&flow, &config, &DVector::from_vec(vec![1.0])).unwrap();
        let expected_x2 = 0.5 * (1.0 - (-1.0_f64).exp()) + 0.5;
        assert!((trace.steps[1].x[0] - expected_x2).abs() < 1e-9);
        assert!((trace.steps[1].x[0] - 0.8160602794).abs() < 1e-9);
        assert!(trace.converged);
        assert!(trace.final_point[0].abs() < 1e-6);
    }

    #[test]
    fn mann_fixed_start_is_stationary() {
        let pair = quarter_pair();
        let config = MannConfig::new(MeanSchedule::Cesaro2d);
        let trace = mann_iterate(&pair, &config, &v2(0.0, 0.0)).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.steps[0].residual, 0.0);
        assert!(trace.final_point.norm() == 0.0);
        // Confirmation window: an exact zero keeps the run alive for a few
        // more steps rather than stopping instantly.
        assert_eq!(trace.steps.len(), CONFIRM_WINDOW);
    }

    #[test]
    fn trace_reconstructs_the_update() {
        let flow = diag_flow();
        let mut config = MannConfig::new(MeanSchedule::Time { rate: 1.0 });
        config.tol = 1e-10;
        let trace = mann_iterate(&flow, &config, &v2(0.9, 0.8)).unwrap();
        for pair in trace.steps.windows(2) {
            let rebuilt = &pair[0].w * pair[0].alpha + &pair[0].x * (1.0 - pair[0].alpha);
            assert!((rebuilt - &pair[1].x).norm() <= 1e-15);
        }
        let last = trace.steps.last().unwrap();
        let rebuilt = &last.w * last.alpha + &last.x * (1.0 - last.alpha);
        assert!((rebuilt - trace.final_point).norm() <= 1e-15);
    }

    #[test]
    fn final_point_has_small_ergodic_residual() {
        let pair = quarter_pair();
        let config = MannConfig::new(MeanSchedule::Cesaro2d);
        let trace = mann_iterate(&pair, &config, &v2(0.7, -0.2)).unwrap();
        assert!(trace.converged);
        let n_last = trace.steps.last().unwrap().n;
        let r = ergodic_residual(
            &pair,
            &ErgodicMean::Cesaro2d(n_last as u32),
            &trace.final_point,
            config.quad_tol,
        )
        .unwrap();
        assert!(r <= 10.0 * config.tol);
    }

    #[test]
    fn fejer_monotonicity_toward_the_limit() {
        let pair = quarter_pair();
        let config = MannConfig::new(MeanSchedule::Cesaro2d);
        let trace = mann_iterate(&pair, &config, &v2(0.9, 0.3)).unwrap();
        assert!(trace.converged);
        let z0 = &trace.final_point;
        let mut prev = f64::INFINITY;
        for step in &trace.steps {
            let d = (&step.x - z0).norm();
            assert!(d <= prev + 1e-12);
            prev = d;
        }
    }

    #[test]
    fn gap_diagnostic_running_minimum() {
        let flow = scalar_flow();
        let mut config = MannConfig::new(MeanSchedule::Time { rate: 1.0 });
        config.tol = 1e-15;
        config.max_iter = 50;
        let trace = mann_iterate(&flow, &config, &DVector::from_vec(vec![1.0])).unwrap();
        assert_eq!(trace.steps.len(), 50);
        let mins = mann_gap_diagnostic(&trace);
        assert_eq!(mins[0], trace.steps[0].residual);
        for w in mins.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(mins[49] <= 1e-8);
    }

    #[test]
    fn alpha_schedule_validation() {
        let pair = quarter_pair();
        let mut config = MannConfig::new(MeanSchedule::Cesaro2d);
        config.alpha = AlphaSchedule::Constant(0.005);
        let err = mann_iterate(&pair, &config, &v2(0.1, 0.1)).unwrap_err();
        assert!(matches!(err.error, Error::InvalidArgument(_)));
        assert!(err.partial.steps.is_empty());

        config.alpha = AlphaSchedule::Table(vec![0.3, 0.6, 0.9]);
        assert!(mann_iterate(&pair, &config, &v2(0.1, 0.1)).is_ok());
    }

    #[test]
    fn schedule_family_mismatch_is_rejected() {
        let pair = quarter_pair();
        let config = MannConfig::new(MeanSchedule::Time { rate: 1.0 });
        assert!(mann_iterate(&pair, &config, &v2(0.1, 0.1)).is_err());
    }

    #[test]
    fn retraction_matches_kernel_projection() {
        let flow = diag_flow();
        let x = v2(0.5, 0.8);
        let q = retraction_apply(&flow, MeanIndex::Time(50.0), &x, 1e-9, 10_000).unwrap();
        let a = DMatrix::from_diagonal(&v2(0.0, 1.0));
        let exact = kernel_projection(&a, &x).unwrap();
        assert!((q - exact).norm() <= 1e-6);
    }

    #[test]
    fn retraction_fixes_fixed_points() {
        let flow = diag_flow();
        let fixed = v2(0.6, 0.0);
        let q = retraction_apply(&flow, MeanIndex::Time(10.0), &fixed, 1e-10, 10_000).unwrap();
        assert!((q - fixed).norm() <= 1e-9);
    }

    #[test]
    fn retraction_on_rotation_pair() {
        let pair = quarter_pair();
        let q = retraction_apply(&pair, MeanIndex::Cesaro2d(64), &v2(0.9, 0.0), 1e-8, 10_000)
            .unwrap();
        assert!(q.norm() <= 1e-4);
    }

    #[test]
    fn retraction_iteration_limit_carries_last_iterate() {
        let flow = diag_flow();
        let err =
            retraction_apply(&flow, MeanIndex::Time(5.0), &v2(0.1, 0.9), 1e-13, 3).unwrap_err();
        match err {
            Error::IterationLimit {
                limit,
                last_iterate,
                ..
            } => {
                assert_eq!(limit, 3);
                assert_eq!(last_iterate.len(), 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn retraction_is_nonexpansive_and_keeps_invariant_subsets() {
        let flow = diag_flow();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let small = Domain::ball(v2(0.0, 0.0), 0.5).unwrap();
        for _ in 0..200 {
            let x = flow.domain().sample(&mut rng);
            let y = flow.domain().sample(&mut rng);
            let qx = retraction_apply(&flow, MeanIndex::Time(50.0), &x, 1e-12, 10_000).unwrap();
            let qy = retraction_apply(&flow, MeanIndex::Time(50.0), &y, 1e-12, 10_000).unwrap();
            assert!((qx.clone() - qy).norm() <= (&x - &y).norm() + 1e-9);
            // A smaller invariant ball stays invariant under Q.
            let xs = small.sample(&mut rng);
            let qxs = retraction_apply(&flow, MeanIndex::Time(50.0), &xs, 1e-12, 10_000).unwrap();
            assert!(small.contains(&qxs, 1e-9));
        }
    }

    #[test]
    fn lambda_examples() {
        let pair = quarter_pair();
        assert!(lambda_estimate(&pair, &v2(0.0, 0.0), 10.0).unwrap() < 1e-15);
        let l = lambda_estimate(&pair, &v2(1.0, 0.0), 10.0).unwrap();
        assert!((l - 2.0).abs() < 1e-12);

        let flow = OperatorFamily::rotation_flow(
            FRAC_PI_2,
            v2(0.0, 0.0),
            Domain::ball(v2(0.0, 0.0), 1.0).unwrap(),
        )
        .unwrap();
        let l = lambda_estimate(&flow, &v2(1.0, 0.0), 10.0).unwrap();
        assert!((l - 2.0).abs() < 1e-6);
    }

    #[test]
    fn characterize_fixed_point_of_pair() {
        let pair = quarter_pair();
        let report =
            characterize(&pair, &v2(0.0, 0.0), MeanSchedule::Cesaro2d, 50, 1e-6, 10.0).unwrap();
        assert!(report.verdict);
        assert!(report.residual_sequence.iter().all(|r| *r < 1e-14));
        assert!(report.lambda_estimate < 1e-14);
        assert!(report.max_translate_excess <= 1e-14);
    }

    #[test]
    fn characterize_moving_point_of_pair() {
        let pair = quarter_pair();
        let report =
            characterize(&pair, &v2(1.0, 0.0), MeanSchedule::Cesaro2d, 200, 1e-6, 10.0).unwrap();
        assert!(!report.verdict);
        // Residuals approach ‖z‖ = 1 as the averages collapse to 0.
        let last = *report.residual_sequence.last().unwrap();
        assert!((last - 1.0).abs() < 0.05);
        assert!(report.lambda_estimate > 1.0);
    }

    #[test]
    fn characterize_kernel_axis_of_flow() {
        let flow = diag_flow();
        let report = characterize(
            &flow,
            &v2(0.7, 0.0),
            MeanSchedule::Time { rate: 1.0 },
            50,
            1e-6,
            10.0,
        )
        .unwrap();
        assert!(report.verdict);
        assert!(report
            .residual_sequence
            .iter()
            .all(|r| *r <= DEFAULT_QUAD_TOL * 10.0));
    }

    #[test]
    fn characterize_rejects_bad_arguments() {
        let pair = quarter_pair();
        assert!(characterize(&pair, &v2(0.0, 0.0), MeanSchedule::Cesaro2d, 0, 1e-6, 10.0).is_err());
        assert!(
            characterize(&pair, &v2(0.0, 0.0), MeanSchedule::Time { rate: 1.0 }, 5, 1e-6, 10.0)
                .is_err()
        );
    }
}
