//! Experiment configuration: one TOML document per experiment, with an
//! optional sweep section expanding into multiple runs.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use semimean::iterate::{AlphaSchedule, MannConfig, MeanSchedule};
use semimean::operators::{Domain, IndexKind, NonexpansiveMap, OperatorFamily};
use semimean::semigroup::FiniteSemigroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Mann,
    Retraction,
    Characterize,
    VerifyMeans,
    InvariantMean,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Mann => "mann",
            Mode::Retraction => "retraction",
            Mode::Characterize => "characterize",
            Mode::VerifyMeans => "verify-means",
            Mode::InvariantMean => "invariant-mean",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainConfig {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl DomainConfig {
    pub fn build(&self) -> anyhow::Result<Domain> {
        let domain = match self {
            DomainConfig::Ball { center, radius } => Domain::ball(
                DVector::from_vec(center.clone()),
                *radius,
            )?,
            DomainConfig::Box { lower, upper } => Domain::new_box(
                DVector::from_vec(lower.clone()),
                DVector::from_vec(upper.clone()),
            )?,
        };
        Ok(domain)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyConfig {
    RotationPair {
        theta: f64,
        phi: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        domain: DomainConfig,
    },
    LinearFlow {
        matrix: Vec<Vec<f64>>,
        domain: DomainConfig,
    },
    RotationFlow {
        omega: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        domain: DomainConfig,
    },
}

impl FamilyConfig {
    pub fn build(&self) -> anyhow::Result<OperatorFamily> {
        let family = match self {
            FamilyConfig::RotationPair {
                theta,
                phi,
                center,
                domain,
            } => {
                let c = DVector::from_vec(center.clone().unwrap_or_else(|| vec![0.0, 0.0]));
                let t = NonexpansiveMap::rotation(*theta, c.clone())?;
                let u = NonexpansiveMap::rotation(*phi, c)?;
                OperatorFamily::commuting_pair(t, u, domain.build()?)?
            }
            FamilyConfig::LinearFlow { matrix, domain } => {
                let rows = matrix.len();
                if rows == 0 || matrix.iter().any(|r| r.len() != rows) {
                    bail!("linear-flow matrix must be square and nonempty");
                }
                let flat: Vec<f64> = matrix.iter().flatten().copied().collect();
                let a = DMatrix::from_row_slice(rows, rows, &flat);
                OperatorFamily::linear_flow(a, domain.build()?)?
            }
            FamilyConfig::RotationFlow {
                omega,
                center,
                domain,
            } => {
                let c = DVector::from_vec(center.clone().unwrap_or_else(|| vec![0.0, 0.0]));
                OperatorFamily::rotation_flow(*omega, c, domain.build()?)?
            }
        };
        Ok(family)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SemigroupConfig {
    Saturating { size: usize },
    Cyclic { size: usize },
    Table { table: Vec<Vec<usize>> },
}

impl SemigroupConfig {
    pub fn build(&self) -> anyhow::Result<Arc<FiniteSemigroup>> {
        let sg = match self {
            SemigroupConfig::Saturating { size } => {
                if *size == 0 {
                    bail!("saturating semigroup needs size >= 1");
                }
                FiniteSemigroup::saturating(*size)
            }
            SemigroupConfig::Cyclic { size } => {
                if *size == 0 {
                    bail!("cyclic group needs size >= 1");
                }
                FiniteSemigroup::cyclic(*size)
            }
            SemigroupConfig::Table { table } => FiniteSemigroup::new(table.clone())?,
        };
        Ok(Arc::new(sg))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanKind {
    Cesaro,
    Time,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub alpha: f64,
    pub alpha_table: Option<Vec<f64>>,
    pub mean: Option<MeanKind>,
    pub time_rate: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub quad_tol: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            alpha: 0.5,
            alpha_table: None,
            mean: None,
            time_rate: 1.0,
            tol: 1e-8,
            max_iter: 10_000,
            quad_tol: 1e-10,
        }
    }
}

impl ScheduleConfig {
    /// Resolve the mean schedule, inferring the kind from the family when
    /// not set explicitly.
    pub fn mean_schedule(&self, family: Option<&OperatorFamily>) -> anyhow::Result<MeanSchedule> {
        let kind = match (self.mean, family.map(|f| f.index_kind())) {
            (Some(k), _) => k,
            (None, Some(IndexKind::Grid2d)) => MeanKind::Cesaro,
            (None, Some(IndexKind::Time)) => MeanKind::Time,
            (None, None) => MeanKind::Cesaro,
        };
        let schedule = match kind {
            MeanKind::Cesaro => MeanSchedule::Cesaro2d,
            MeanKind::Time => MeanSchedule::Time {
                rate: self.time_rate,
            },
        };
        if let Some(f) = family {
            if !schedule.compatible_with(f) {
                bail!(
                    "mean schedule {kind:?} does not match the family's index set; \
                     use mean = \"cesaro\" for pairs and mean = \"time\" for flows"
                );
            }
        }
        Ok(schedule)
    }

    pub fn alpha_schedule(&self) -> AlphaSchedule {
        match &self.alpha_table {
            Some(t) => AlphaSchedule::Table(t.clone()),
            None => AlphaSchedule::Constant(self.alpha),
        }
    }

    pub fn mann_config(&self, family: &OperatorFamily) -> anyhow::Result<MannConfig> {
        let mut config = MannConfig::new(self.mean_schedule(Some(family))?);
        config.alpha = self.alpha_schedule();
        config.tol = self.tol;
        config.max_iter = self.max_iter;
        config.quad_tol = self.quad_tol;
        Ok(config)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MannSection {
    #[serde(default)]
    pub start: Option<Vec<f64>>,
}

fn default_char_n_max() -> usize {
    200
}
fn default_horizon() -> f64 {
    10.0
}
fn default_char_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CharacterizeSection {
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default = "default_char_n_max")]
    pub n_max: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_char_tol")]
    pub tol: f64,
}

fn default_inner_tol() -> f64 {
    1e-9
}
fn default_max_inner() -> usize {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RetractionSection {
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    pub mean_index: f64,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_max_inner")]
    pub max_inner: usize,
}

fn default_verify_n_max() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VerifyMeansSection {
    #[serde(default = "default_verify_n_max")]
    pub n_max: usize,
}

fn default_prefix() -> String {
    "run".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit list of start points (one run each).
    #[serde(default)]
    pub starts: Option<Vec<Vec<f64>>>,
    /// Number of seeded random start points in the family's domain.
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub semigroup: Option<SemigroupConfig>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub mann: Option<MannSection>,
    #[serde(default)]
    pub characterize: Option<CharacterizeSection>,
    #[serde(default)]
    pub retraction: Option<RetractionSection>,
    #[serde(default)]
    pub verify_means: Option<VerifyMeansSection>,
    #[serde(default)]
    pub output: Option<OutputSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).context("config parse error")?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        let needs_family = matches!(
            self.mode,
            Mode::Mann | Mode::Retraction | Mode::Characterize
        );
        if needs_family && self.family.is_none() {
            bail!("mode {} requires a [family] section", self.mode.name());
        }
        if self.mode == Mode::InvariantMean && self.semigroup.is_none() {
            bail!("mode invariant-mean requires a [semigroup] section");
        }
        if self.mode == Mode::Retraction && self.retraction.is_none() {
            bail!("mode retraction requires a [retraction] section with mean-index");
        }
        if matches!(self.mode, Mode::VerifyMeans | Mode::InvariantMean) && self.sweep.is_some() {
            bail!("mode {} does not support sweeps", self.mode.name());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.starts.is_some() == sweep.count.is_some() {
                bail!("[sweep] needs exactly one of `starts` or `count`");
            }
        } else {
            let (point, field) = match self.mode {
                Mode::Mann => (self.mann.as_ref().and_then(|m| m.start.as_ref()), "[mann] start"),
                Mode::Characterize => (
                    self.characterize.as_ref().and_then(|c| c.z.as_ref()),
                    "[characterize] z",
                ),
                Mode::Retraction => (
                    self.retraction.as_ref().and_then(|r| r.x.as_ref()),
                    "[retraction] x",
                ),
                _ => (None, ""),
            };
            if !field.is_empty() && point.is_none() {
                bail!("mode {} needs {field} or a [sweep] section", self.mode.name());
            }
        }
        Ok(())
    }

    /// The single start/probe point for non-sweep runs, if the mode has one.
    pub fn base_point(&self) -> Option<Vec<f64>> {
        match self.mode {
            Mode::Mann => self.mann.as_ref().and_then(|m| m.start.clone()),
            Mode::Characterize => self.characterize.as_ref().and_then(|c| c.z.clone()),
            Mode::Retraction => self.retraction.as_ref().and_then(|r| r.x.clone()),
            _ => None,
        }
    }
}
