//! End-to-end data-update loop for the Klein-Gordon instance.
//!
//! Starting from `d̂(0)`, the iterated scheme applies `M_r = 𝟙 + δt M′_r`
//! `2^N` times; the direct scheme evaluates `exp(t M′_r) d̂(0)`. Every step
//! records the relative entropy between the exactly and the linearly evolved
//! posterior, its running sum, the matching branch, and the distance to the
//! noise-free reference trajectory `R A_r^i W d̂(0)`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::push_forward;
use crate::error::{IfdError, Result};
use crate::gaussian::{kl_divergence, GaussianDensity};
use crate::kleingordon::{DataLayout, KgModel, KgSystem, PackedField};
use crate::matching::Branch;
use crate::matfun::{expm_general, spectral_norm, SymmetricMatrix};

/// Source of `d̂(0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialData {
    /// Draw `φ̂ ~ N(0, Φ_r)` and noise `N(0, σ²𝟙)` from the seeded generator.
    Generate,
    /// JSON array of `2Y` pixel values (`φ` pixels then `χ` pixels).
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Iterated,
    Direct,
    Both,
}

/// Run description, read from a flat JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_modes: usize,
    #[serde(rename = "Y")]
    pub pixels: usize,
    pub mu: f64,
    pub beta: f64,
    pub sigma_n2: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub log2_steps: u32,
    pub seed: u64,
    pub initial_data: InitialData,
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "is_default_layout")]
    pub data_layout: DataLayout,
    /// Directory that relative `initial_data` paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn is_default_layout(layout: &DataLayout) -> bool {
    *layout == DataLayout::default()
}

/// Upper bound on `N`; `2^N` records are held in memory.
pub const MAX_LOG2_STEPS: u32 = 24;

impl RunConfig {
    /// Default desk-scale configuration: `n = 4`, `Y = 5`, `μ = β = 1`,
    /// `σ² = 0.01`, `T = 1`.
    pub fn desk_default(log2_steps: u32) -> Self {
        Self {
            n_modes: 4,
            pixels: 5,
            mu: 1.0,
            beta: 1.0,
            sigma_n2: 0.01,
            horizon: 1.0,
            log2_steps,
            seed: 1,
            initial_data: InitialData::Generate,
            scheme: Scheme::Iterated,
            data_layout: DataLayout::default(),
            base_dir: None,
        }
    }

    pub fn steps(&self) -> usize {
        1usize << self.log2_steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    pub fn with_log2_steps(&self, log2_steps: u32) -> Self {
        Self {
            log2_steps,
            ..self.clone()
        }
    }

    /// Builds the model, mapping every violation to the offending field.
    pub fn model(&self) -> Result<KgModel<f64>> {
        let model =
            KgModel::new(self.n_modes, self.pixels, self.mu, self.beta, self.sigma_n2).map_err(|e| match e {
                IfdError::UnsupportedPixelCount(y) => {
                    IfdError::config("Y", format!("pixel count must be odd and greater than one, got {y}"))
                }
                IfdError::DegenerateMass => IfdError::config("mu", "must be nonzero"),
                IfdError::InvalidInput(msg) => {
                    let field = ["n_modes", "beta", "sigma_n2", "mu"]
                        .into_iter()
                        .find(|f| msg.starts_with(f))
                        .unwrap_or("model");
                    IfdError::config(field, msg)
                }
                other => other,
            })?;
        Ok(model.with_layout(self.data_layout))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(IfdError::config(
                "T",
                format!("horizon must be positive, got {}", self.horizon),
            ));
        }
        if self.log2_steps > MAX_LOG2_STEPS {
            return Err(IfdError::config("N", format!("must be at most {MAX_LOG2_STEPS}")));
        }
        let model = self.model()?;
        let dt = self.dt();
        if dt >= model.max_step() {
            return Err(IfdError::config(
                "N",
                format!("step {dt} violates dt² < ω_(n-1)⁻² (needs dt < {})", model.max_step()),
            ));
        }
        model
            .update_generator()
            .map_err(|e| IfdError::config("n_modes", e.to_string()))?;
        Ok(())
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.contains("field"))
            .unwrap_or("config")
            .to_string();
        IfdError::Config { field, message: msg }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// One row of simulator output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub data: Vec<f64>,
    pub kl_step: f64,
    pub kl_cumulative: f64,
    pub exact_deviation: f64,
    /// `None` when no matching was performed, or when the first-order
    /// evolved precision is indefinite at this step size.
    pub branch: Option<Branch>,
}

/// Everything a run needs, built once from a configuration.
#[derive(Clone, Debug)]
pub struct Simulation {
    cfg: RunConfig,
    system: KgSystem<f64>,
    initial: DVector<f64>,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let system = KgSystem::new(cfg.model()?)?;
        log::info!(
            "data-space condition number of RΦRᵀ + N: {:.6e}",
            system.data_condition_number()?
        );
        let initial = initial_data(cfg, system.model())?;
        Ok(Self {
            cfg: cfg.clone(),
            system,
            initial,
        })
    }

    #[inline]
    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    #[inline]
    pub fn system(&self) -> &KgSystem<f64> {
        &self.system
    }

    /// `d̂(0)`.
    #[inline]
    pub fn initial_data(&self) -> &DVector<f64> {
        &self.initial
    }

    /// Noise-free reference data `R A_r^i W d̂(0)` for `i = 0..=2^N`.
    pub fn exact_reference(&self) -> ExactReference {
        exact_reference(&self.system, &self.initial, self.cfg.dt(), self.cfg.steps())
    }

    /// `M_r^i d̂(0)` for `i = 0..=2^N`.
    pub fn iterated_trajectory(&self) -> Result<Vec<DVector<f64>>> {
        let m = self.system.model().build_update_matrix(self.cfg.dt())?;
        Ok(iterate(&m, &self.initial, self.cfg.steps()))
    }

    /// `exp(t_i M′_r) d̂(0)` for `i = 0..=2^N`.
    pub fn direct_trajectory(&self) -> Result<Vec<DVector<f64>>> {
        let gen = self.system.model().update_generator()?;
        let step = expm_general(&(gen * self.cfg.dt()))?;
        Ok(iterate(&step, &self.initial, self.cfg.steps()))
    }

    /// `exp(T M′_r) d̂(0)` by a single matrix exponential.
    pub fn direct_final(&self) -> Result<DVector<f64>> {
        self.system.model().direct_simulate(&self.initial, self.cfg.horizon)
    }

    /// Step records for a data trajectory (`trajectory[0] = d̂(0)`).
    pub fn records(&self, trajectory: &[DVector<f64>], with_matching: bool) -> Result<Vec<StepRecord>> {
        let dt = self.cfg.dt();
        let reference = self.exact_reference();
        let kl = StepDivergence::new(&self.system, dt)?;
        let mut records = Vec::with_capacity(trajectory.len().saturating_sub(1));
        let mut cumulative = 0.0;
        let mut irregular = 0usize;
        let mut undefined = 0usize;
        for (i, window) in trajectory.windows(2).enumerate() {
            let (u, next) = (&window[0], &window[1]);
            let kl_step = kl.evaluate(u)?;
            cumulative += kl_step;
            let branch = if with_matching {
                match self.system.match_step(u, dt) {
                    Ok(res) => {
                        if res.branch != Branch::Regular {
                            if irregular == 0 {
                                log::warn!(
                                    "step {}: entropic matching left the regular branch ({})",
                                    i + 1,
                                    res.branch
                                );
                            }
                            irregular += 1;
                        }
                        Some(res.branch)
                    }
                    Err(IfdError::StepTooLarge(msg)) => {
                        if undefined == 0 {
                            log::warn!("step {}: matching undefined at dt = {dt}: {msg}", i + 1);
                        }
                        undefined += 1;
                        None
                    }
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            records.push(StepRecord {
                step: i + 1,
                t: (i + 1) as f64 * dt,
                data: next.iter().copied().collect(),
                kl_step,
                kl_cumulative: cumulative,
                exact_deviation: (next - &reference.data[i + 1]).norm(),
                branch,
            });
        }
        if irregular > 0 {
            log::warn!(
                "{irregular} of {} steps matched outside the regular branch",
                records.len()
            );
        }
        if undefined > 0 {
            log::warn!(
                "{undefined} of {} steps had an indefinite evolved precision",
                records.len()
            );
        }
        Ok(records)
    }
}

/// `KL(N(A m, A D Aᵀ) ‖ N(G m, G D Gᵀ))` with `m = W u`, for fixed `δt`.
struct StepDivergence {
    filter: DMatrix<f64>,
    exact_step: DMatrix<f64>,
    exact_cov: SymmetricMatrix<f64>,
    linear: crate::dynamics::AffineDynamics<f64>,
    linear_cov: SymmetricMatrix<f64>,
}

impl StepDivergence {
    fn new(system: &KgSystem<f64>, dt: f64) -> Result<Self> {
        let a = system.model().exact_step(dt);
        let d = system.posterior_cov();
        let exact_cov = SymmetricMatrix::new(&a * d.matrix() * a.transpose())?;
        let linear = system.dynamics(dt)?;
        let pushed = push_forward(&GaussianDensity::new(DVector::zeros(d.dim()), d.clone())?, &linear)?;
        Ok(Self {
            filter: system.filter().clone(),
            exact_step: a,
            exact_cov,
            linear,
            linear_cov: pushed.covariance().clone(),
        })
    }

    fn evaluate(&self, u: &DVector<f64>) -> Result<f64> {
        let m = &self.filter * u;
        let exact = GaussianDensity::new(&self.exact_step * &m, self.exact_cov.clone())?;
        let approx = GaussianDensity::new(self.linear.apply(&m)?, self.linear_cov.clone())?;
        kl_divergence(&exact, &approx)
    }
}

fn iterate(m: &DMatrix<f64>, d0: &DVector<f64>, steps: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(d0.clone());
    for i in 0..steps {
        let next = m * &out[i];
        out.push(next);
    }
    out
}

/// Exactly evolved posterior means `A_r^i W d̂(0)` and their noise-free data.
#[derive(Clone, Debug)]
pub struct ExactReference {
    pub means: Vec<DVector<f64>>,
    pub data: Vec<DVector<f64>>,
}

pub fn exact_reference(system: &KgSystem<f64>, d0: &DVector<f64>, dt: f64, steps: usize) -> ExactReference {
    let a = system.model().exact_step(dt);
    let r = system.measurement().response();
    let mut means = Vec::with_capacity(steps + 1);
    means.push(system.filter() * d0);
    for i in 0..steps {
        let next = &a * &means[i];
        means.push(next);
    }
    let data = means.iter().map(|m| r * m).collect();
    ExactReference { means, data }
}

impl ExactReference {
    /// Field energies of the reference means.
    pub fn energies(&self, model: &KgModel<f64>) -> Result<Vec<f64>> {
        self.means
            .iter()
            .map(|m| model.field_energy(&PackedField::from_vector(m.clone(), model.n_modes())?))
            .collect()
    }
}

fn initial_data(cfg: &RunConfig, model: &KgModel<f64>) -> Result<DVector<f64>> {
    match &cfg.initial_data {
        InitialData::Generate => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let signal = model.prior()?.sample_with(&mut rng, 1)?.remove(0);
            let sigma = cfg.sigma_n2.sqrt();
            let noise = DVector::from_fn(model.data_dim(), |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
            Ok(model.build_response() * signal + noise)
        }
        InitialData::File(path) => {
            let path = match (&cfg.base_dir, path.is_relative()) {
                (Some(dir), true) => dir.join(path),
                _ => path.clone(),
            };
            let text = std::fs::read_to_string(&path)?;
            let values: Vec<f64> = serde_json::from_str(&text)
                .map_err(|e| IfdError::config("initial_data", format!("{}: {e}", path.display())))?;
            model
                .dft_data(&DVector::from_vec(values))
                .map_err(|e| IfdError::config("initial_data", e.to_string()))
        }
    }
}

/// Iterated scheme with matching diagnostics: `2^N` records.
pub fn run_ifd(cfg: &RunConfig) -> Result<Vec<StepRecord>> {
    let sim = Simulation::new(cfg)?;
    sim.records(&sim.iterated_trajectory()?, true)
}

/// Direct scheme: records along `exp(t_i M′_r) d̂(0)`, no matching.
pub fn run_direct(cfg: &RunConfig) -> Result<Vec<StepRecord>> {
    let sim = Simulation::new(cfg)?;
    sim.records(&sim.direct_trajectory()?, false)
}

/// Noise-free reference trajectory, steps `0..=2^N`.
pub fn run_exact_reference(cfg: &RunConfig) -> Result<Vec<StepRecord>> {
    let sim = Simulation::new(cfg)?;
    let dt = cfg.dt();
    Ok(sim
        .exact_reference()
        .data
        .into_iter()
        .enumerate()
        .map(|(i, d)| StepRecord {
            step: i,
            t: i as f64 * dt,
            data: d.iter().copied().collect(),
            kl_step: 0.0,
            kl_cumulative: 0.0,
            exact_deviation: 0.0,
            branch: None,
        })
        .collect())
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> SlopeFit {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    SlopeFit {
        slope,
        intercept,
        residual,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub log2_steps: u32,
    pub dt: f64,
    /// Sum of the per-step KL over the run.
    pub kl_total: f64,
    /// KL of the first step, evaluated at `d̂(0)`.
    pub kl_first_step: f64,
    /// `‖d̂(T) − R A_r^{2^N} W d̂(0)‖`.
    pub final_deviation: f64,
    /// `‖M_r^{2^N} d̂(0) − exp(T M′_r) d̂(0)‖`.
    pub scheme_gap: f64,
    pub regular_steps: usize,
    pub undefined_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub kl_total_slope: SlopeFit,
    pub kl_step_slope: SlopeFit,
    pub final_deviation_slope: SlopeFit,
    pub scheme_gap_slope: SlopeFit,
}

/// Runs the iterated scheme for every `N` in `n_list` (in parallel) and fits
/// log-log slopes against `δt`.
pub fn convergence_sweep(cfg: &RunConfig, n_list: &[u32]) -> Result<SweepReport> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(IfdError::InsufficientSweep(ns.len()));
    }
    let rows = ns
        .par_iter()
        .map(|&n| sweep_row(&cfg.with_log2_steps(n)))
        .collect::<Result<Vec<_>>>()?;
    let dts: Vec<f64> = rows.iter().map(|r| r.dt).collect();
    let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(SweepReport {
        kl_total_slope: fit_log_log(&dts, &col(|r| r.kl_total)),
        kl_step_slope: fit_log_log(&dts, &col(|r| r.kl_first_step)),
        final_deviation_slope: fit_log_log(&dts, &col(|r| r.final_deviation)),
        scheme_gap_slope: fit_log_log(&dts, &col(|r| r.scheme_gap)),
        rows,
    })
}

fn sweep_row(cfg: &RunConfig) -> Result<SweepRow> {
    let sim = Simulation::new(cfg)?;
    let trajectory = sim.iterated_trajectory()?;
    let records = sim.records(&trajectory, true)?;
    let last = records.last().expect("at least one step");
    let direct = sim.direct_final()?;
    Ok(SweepRow {
        log2_steps: cfg.log2_steps,
        dt: cfg.dt(),
        kl_total: last.kl_cumulative,
        kl_first_step: records[0].kl_step,
        final_deviation: last.exact_deviation,
        scheme_gap: (&trajectory[trajectory.len() - 1] - direct).norm(),
        regular_steps: records.iter().filter(|r| r.branch == Some(Branch::Regular)).count(),
        undefined_steps: records.iter().filter(|r| r.branch.is_none()).count(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with columns `step,t,kl_step,kl_cumulative,exact_deviation,branch,data_0..`.
pub fn write_csv<W: Write>(records: &[StepRecord], mut out: W) -> Result<()> {
    let width = records.first().map_or(0, |r| r.data.len());
    let mut header = String::from("step,t,kl_step,kl_cumulative,exact_deviation,branch");
    for i in 0..width {
        let _ = write!(header, ",data_{i}");
    }
    writeln!(out, "{header}")?;
    for r in records {
        let mut line = format!(
            "{},{},{},{},{},{}",
            r.step,
            fmt_float(r.t),
            fmt_float(r.kl_step),
            fmt_float(r.kl_cumulative),
            fmt_float(r.exact_deviation),
            r.branch.map_or("none", Branch::as_str)
        );
        for v in &r.data {
            line.push(',');
            line.push_str(&fmt_float(*v));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[StepRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

pub fn write_report(records: &[StepRecord], path: &Path, format: ReportFormat) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        ReportFormat::Csv => write_csv(records, file),
        ReportFormat::Json => write_json(records, file),
    }
}

/// Spectral norm of `E = M′_r`, the growth rate in `‖M_r^i d‖ ≤ e^{T‖E‖} ‖d‖`.
pub fn update_growth_rate(model: &KgModel<f64>) -> Result<f64> {
    Ok(spectral_norm(&model.update_generator()?))
}
