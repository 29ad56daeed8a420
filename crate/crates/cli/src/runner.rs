//! Run expansion and execution. A config yields one run, or several under
//! a sweep; runs execute concurrently up to a jobs limit and each writes
//! only its own trace file.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semimean::iterate::{characterize, mann_iterate, retraction_iterate, MeanIndex, MeanSchedule};
use semimean::mean::{cesaro2d, cesaro2d_gap, solve_invariant_mean, time_mean_gap, TimeMean};
use semimean::oracle::verify_invariant_mean;
use semimean::semigroup::Index;
use semimean::Error;

use crate::config::{ExperimentConfig, MeanKind, Mode};
use crate::report::{write_summaries, write_trace, Cell, Summary, Tolerances};

/// How a single run ended, for the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    /// Numeric failure or iteration-limit hit; a partial trace was flushed.
    NumericFailure,
}

pub struct RunReport {
    pub summary: Summary,
    pub status: RunStatus,
}

fn trace_path(dir: &Path, prefix: &str, run: usize) -> PathBuf {
    dir.join(format!("{prefix}.run{run:03}.trace.csv"))
}

/// Expand the sweep section into the list of per-run start points.
/// `None` entries mean "the mode's own single point".
fn expand_runs(config: &ExperimentConfig, seed: u64) -> anyhow::Result<Vec<Option<Vec<f64>>>> {
    let Some(sweep) = &config.sweep else {
        return Ok(vec![config.base_point()]);
    };
    if let Some(starts) = &sweep.starts {
        if starts.is_empty() {
            bail!("[sweep] starts must be nonempty");
        }
        return Ok(starts.iter().cloned().map(Some).collect());
    }
    let count = sweep.count.unwrap_or(0);
    if count == 0 {
        bail!("[sweep] count must be >= 1");
    }
    let family = config
        .family
        .as_ref()
        .context("sweeps with `count` need a [family] to sample from")?
        .build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| Some(family.domain().sample(&mut rng).iter().copied().collect()))
        .collect())
}

fn point_from(config_point: Option<Vec<f64>>, what: &str) -> anyhow::Result<DVector<f64>> {
    match config_point {
        Some(p) if !p.is_empty() => Ok(DVector::from_vec(p)),
        _ => bail!("mode needs a {what} point (set it in the mode section or via [sweep])"),
    }
}

fn is_numeric_failure(err: &Error) -> bool {
    matches!(err, Error::Numeric(_) | Error::IterationLimit { .. })
}

struct RunOutput {
    converged: bool,
    final_point: Vec<f64>,
    iterations: usize,
    max_residual_last5: f64,
    inner_tol: Option<f64>,
    details: serde_json::Value,
    status: RunStatus,
}

fn run_mann(
    config: &ExperimentConfig,
    start: Option<Vec<f64>>,
    trace_file: &Path,
) -> anyhow::Result<RunOutput> {
    let family = config.family.as_ref().unwrap().build()?;
    let mann_config = config.schedule.mann_config(&family)?;
    let x1 = point_from(start, "start")?;
    let (trace, status, error) = match mann_iterate(&family, &mann_config, &x1) {
        Ok(trace) => (trace, RunStatus::Ok, None),
        Err(failure) => {
            if is_numeric_failure(&failure.error) {
                (
                    failure.partial,
                    RunStatus::NumericFailure,
                    Some(failure.error.to_string()),
                )
            } else {
                bail!("{}", failure.error);
            }
        }
    };
    let dim = x1.len();
    let mut header: Vec<String> = vec!["n".to_string()];
    header.extend((0..dim).map(|k| format!("x{k}")));
    header.extend(["residual", "step_norm", "mean_gap"].map(str::to_string));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Cell>> = trace
        .steps
        .iter()
        .map(|s| {
            let mut row = vec![Cell::Int(s.n)];
            row.extend(s.x.iter().map(|v| Cell::Num(*v)));
            row.push(Cell::Num(s.residual));
            row.push(Cell::Num(s.step_norm));
            row.push(Cell::Num(s.mean_gap));
            row
        })
        .collect();
    write_trace(trace_file, &header_refs, &rows)?;

    let last5 = trace.steps.iter().rev().take(5);
    let max_residual_last5 = last5.fold(0.0_f64, |m, s| m.max(s.residual));
    let mut details = serde_json::json!({
        "schedule": match mann_config.schedule {
            MeanSchedule::Cesaro2d => "cesaro",
            MeanSchedule::Time { .. } => "time",
        },
        "last_mean_gap": trace.steps.last().map(|s| s.mean_gap),
    });
    if let Some(msg) = error {
        details["error"] = serde_json::Value::String(msg);
    }
    Ok(RunOutput {
        converged: trace.converged,
        final_point: trace.final_point.iter().copied().collect(),
        iterations: trace.steps.len(),
        max_residual_last5,
        inner_tol: None,
        details,
        status,
    })
}

fn run_retraction(
    config: &ExperimentConfig,
    start: Option<Vec<f64>>,
    trace_file: &Path,
) -> anyhow::Result<RunOutput> {
    let family = config.family.as_ref().unwrap().build()?;
    let section = config.retraction.as_ref().unwrap();
    let x = point_from(start.or_else(|| section.x.clone()), "probe")?;
    let mean_index = match config.schedule.mean_schedule(Some(&family))? {
        MeanSchedule::Cesaro2d => {
            let n = section.mean_index;
            if n < 1.0 || n.fract() != 0.0 || n > u32::MAX as f64 {
                bail!("mean-index must be a positive integer for cesaro means");
            }
            MeanIndex::Cesaro2d(n as u32)
        }
        MeanSchedule::Time { .. } => MeanIndex::Time(section.mean_index),
    };
    let run = retraction_iterate(&family, mean_index, &x, section.inner_tol, section.max_inner)?;

    let dim = x.len();
    let mut header: Vec<String> = vec!["k".to_string()];
    header.extend((0..dim).map(|k| format!("z{k}")));
    header.push("step_norm".to_string());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<Cell>> = run
        .steps
        .iter()
        .map(|s| {
            let mut row = vec![Cell::Int(s.k)];
            row.extend(s.z.iter().map(|v| Cell::Num(*v)));
            row.push(Cell::Num(s.step_norm));
            row
        })
        .collect();
    write_trace(trace_file, &header_refs, &rows)?;

    let last5 = run.steps.iter().rev().take(5);
    let max_residual_last5 = last5.fold(0.0_f64, |m, s| m.max(s.step_norm));
    let mut details = serde_json::json!({
        "mean_index": section.mean_index,
        "last_step": run.steps.last().map(|s| s.step_norm),
    });
    let status = if run.converged {
        RunStatus::Ok
    } else {
        details["error"] = serde_json::Value::String(format!(
            "retraction averaging did not converge within {} iterations",
            section.max_inner
        ));
        RunStatus::NumericFailure
    };
    Ok(RunOutput {
        converged: run.converged,
        final_point: run.final_point.iter().copied().collect(),
        iterations: run.steps.len(),
        max_residual_last5,
        inner_tol: Some(section.inner_tol),
        details,
        status,
    })
}

fn run_characterize(
    config: &ExperimentConfig,
    start: Option<Vec<f64>>,
    trace_file: &Path,
) -> anyhow::Result<RunOutput> {
    let family = config.family.as_ref().unwrap().build()?;
    let section = config.characterize.clone().unwrap_or(crate::config::CharacterizeSection {
        z: None,
        n_max: 200,
        horizon: 10.0,
        tol: 1e-6,
    });
    let z = point_from(start.or_else(|| section.z.clone()), "probe")?;
    let schedule = config.schedule.mean_schedule(Some(&family))?;
    let report = characterize(&family, &z, schedule, section.n_max, section.tol, section.horizon)?;

    let rows: Vec<Vec<Cell>> = report
        .residual_sequence
        .iter()
        .enumerate()
        .map(|(k, r)| vec![Cell::Int(k + 1), Cell::Num(*r)])
        .collect();
    write_trace(trace_file, &["n", "residual"], &rows)?;

    let window = report.residual_sequence.len().min(5);
    let max_residual_last5 = report.residual_sequence[report.residual_sequence.len() - window..]
        .iter()
        .fold(0.0_f64, |m, r| m.max(*r));
    Ok(RunOutput {
        converged: report.verdict,
        final_point: z.iter().copied().collect(),
        iterations: report.residual_sequence.len(),
        max_residual_last5,
        inner_tol: None,
        details: serde_json::json!({
            "lambda": report.lambda_estimate,
            "max_translate_excess": report.max_translate_excess,
            "verdict": report.verdict,
        }),
        status: RunStatus::Ok,
    })
}

fn run_verify_means(config: &ExperimentConfig, trace_file: &Path) -> anyhow::Result<RunOutput> {
    let n_max = config.verify_means.as_ref().map_or(100, |v| v.n_max.max(1));
    let kind = config.schedule.mean.unwrap_or(MeanKind::Cesaro);
    let rate = config.schedule.time_rate;
    let mut rows = Vec::with_capacity(n_max);
    let mut worst = 0.0_f64;
    for n in 1..=n_max as u32 {
        let (tv, formula) = match kind {
            MeanKind::Cesaro => {
                let a = cesaro2d(n)?;
                let b = cesaro2d(n + 1)?;
                (a.tv_distance(&b)?, cesaro2d_gap(n))
            }
            MeanKind::Time => {
                let a = TimeMean::new(rate * n as f64)?;
                let b = TimeMean::new(rate * (n + 1) as f64)?;
                (a.tv_distance(&b), time_mean_gap(n))
            }
        };
        let dev = (tv - formula).abs();
        worst = worst.max(dev);
        rows.push(vec![
            Cell::Int(n as usize),
            Cell::Num(tv),
            Cell::Num(formula),
            Cell::Num(dev),
        ]);
    }
    write_trace(trace_file, &["n", "tv", "formula", "deviation"], &rows)?;
    Ok(RunOutput {
        converged: worst <= 1e-12,
        final_point: Vec::new(),
        iterations: n_max,
        max_residual_last5: worst,
        inner_tol: None,
        details: serde_json::json!({
            "family": match kind { MeanKind::Cesaro => "cesaro", MeanKind::Time => "time" },
            "max_deviation": worst,
        }),
        status: RunStatus::Ok,
    })
}

fn run_invariant_mean(config: &ExperimentConfig, trace_file: &Path) -> anyhow::Result<RunOutput> {
    let sg = config.semigroup.as_ref().unwrap().build()?;
    let mu = solve_invariant_mean(&sg)?;
    let defect = verify_invariant_mean(&sg, &mu)?;
    let mut weights = vec![0.0; sg.len()];
    for (idx, w) in mu.support() {
        if let Index::FiniteElem { id, .. } = idx {
            weights[*id] += w;
        }
    }
    let rows: Vec<Vec<Cell>> = weights
        .iter()
        .enumerate()
        .map(|(id, w)| vec![Cell::Int(id), Cell::Num(*w)])
        .collect();
    write_trace(trace_file, &["element", "weight"], &rows)?;
    Ok(RunOutput {
        converged: defect <= 1e-9,
        final_point: weights,
        iterations: sg.len(),
        max_residual_last5: defect,
        inner_tol: None,
        details: serde_json::json!({
            "defect": defect,
            "elements": sg.len(),
        }),
        status: RunStatus::Ok,
    })
}

fn execute_run(
    config: &ExperimentConfig,
    seed: u64,
    run_idx: usize,
    start: Option<Vec<f64>>,
    dir: &Path,
    prefix: &str,
) -> anyhow::Result<RunReport> {
    let trace_file = trace_path(dir, prefix, run_idx);
    let began = Instant::now();
    let out = match config.mode {
        Mode::Mann => run_mann(config, start, &trace_file)?,
        Mode::Retraction => run_retraction(config, start, &trace_file)?,
        Mode::Characterize => run_characterize(config, start, &trace_file)?,
        Mode::VerifyMeans => run_verify_means(config, &trace_file)?,
        Mode::InvariantMean => run_invariant_mean(config, &trace_file)?,
    };
    let summary = Summary {
        mode: config.mode.name().to_string(),
        converged: out.converged,
        final_point: out.final_point,
        iterations: out.iterations,
        max_residual_last5: out.max_residual_last5,
        tolerances: Tolerances {
            tol: config.schedule.tol,
            quad_tol: config.schedule.quad_tol,
            inner_tol: out.inner_tol,
        },
        seed,
        wall_time: began.elapsed().as_secs_f64(),
        run: run_idx,
        details: out.details,
    };
    Ok(RunReport {
        summary,
        status: out.status,
    })
}

/// Execute every run of the config. Returns the worst run status.
pub fn run_all(
    config: &ExperimentConfig,
    seed: u64,
    dir: &Path,
    prefix: &str,
    jobs: usize,
) -> anyhow::Result<RunStatus> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let runs = expand_runs(config, seed)?;
    let total = runs.len();
    let results: Mutex<Vec<Option<anyhow::Result<RunReport>>>> =
        Mutex::new((0..total).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(total);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= total {
                    break;
                }
                let report = execute_run(config, seed, idx, runs[idx].clone(), dir, prefix);
                results.lock().unwrap()[idx] = Some(report);
            });
        }
    });

    let collected = results.into_inner().unwrap();
    let mut summaries = Vec::with_capacity(total);
    let mut status = RunStatus::Ok;
    for slot in collected {
        let report = slot.expect("every run index was claimed")?;
        if report.status == RunStatus::NumericFailure {
            status = RunStatus::NumericFailure;
        }
        summaries.push(report.summary);
    }
    write_summaries(&dir.join(format!("{prefix}.summary.ndjson")), &summaries)?;
    Ok(status)
}
