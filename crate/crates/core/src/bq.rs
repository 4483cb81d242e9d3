//! Integral posteriors, integral-variance-reduction acquisition and the
//! active sampling loop, plus a plain Monte Carlo baseline.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{build_embedding_table, EmbeddingTable, Measure};
use crate::error::{check_dim, Error, Result};
use crate::gp::{fit, optimize_hyperparameters, Dataset, GpPosterior, SearchConfig};
use crate::group::SignFlipGroup;
use crate::kernel::{KernelSpec, RbfParams};
use crate::par;

/// Gaussian belief `Z ~ N(mean, variance)` over the integral value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralPosterior {
    pub mean: f64,
    pub variance: f64,
}

impl IntegralPosterior {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A black-box integrand together with the symmetries it is known to have.
#[derive(Clone)]
pub struct Integrand {
    dim: usize,
    declared_group: SignFlipGroup,
    f: ScalarFn,
}

impl Integrand {
    pub fn new<F>(dim: usize, declared_group: SignFlipGroup, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            declared_group,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn declared_group(&self) -> &SignFlipGroup {
        &self.declared_group
    }

    /// Evaluates `f(x)`, rejecting non-finite values.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand {
                point: x.to_vec(),
                value: v,
            })
        }
    }
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("dim", &self.dim)
            .field("declared_group", &self.declared_group)
            .finish_non_exhaustive()
    }
}

/// `z_n = Σ_{i,j} qK_ij(x_n)` for every training location.
fn kernel_mean_column(table: &EmbeddingTable, data: &Dataset) -> DVector<f64> {
    DVector::from_iterator(
        data.len(),
        data.x().iter().map(|x| table.kernel_mean_sum_unchecked(x)),
    )
}

fn check_compatible(gp: &GpPosterior, table: &EmbeddingTable, measure: &Measure) -> Result<()> {
    if gp.spec().params != *table.params() || gp.spec().group != *table.group() {
        return Err(Error::Configuration(
            "GP posterior and embedding table were built from different kernels".into(),
        ));
    }
    if measure != table.measure() {
        return Err(Error::Configuration(
            "embedding table was built for a different measure".into(),
        ));
    }
    Ok(())
}

fn clamp_variance(raw: f64, prior: f64) -> f64 {
    if raw < -1e-8 * prior {
        log::warn!(
            "integral variance {raw:e} is significantly negative (prior {prior:e}); \
             the Gram matrix is likely ill-conditioned"
        );
    }
    raw.max(0.0)
}

/// Posterior mean and variance of `∫ f π` under the (invariant) GP.
///
/// With `z = Σ_{i,j} qK_ij(X)`: `μ_Z = zᵀ G⁻¹ Y` and
/// `σ²_Z = Σ_{i,j} qKq_ij − zᵀ G⁻¹ z`.
pub fn bq_posterior(
    gp: &GpPosterior,
    table: &EmbeddingTable,
    measure: &Measure,
) -> Result<IntegralPosterior> {
    check_compatible(gp, table, measure)?;
    let prior = table.prior_variance_sum();
    if gp.data().is_empty() {
        return Ok(IntegralPosterior {
            mean: 0.0,
            variance: prior,
        });
    }
    let z = kernel_mean_column(table, gp.data());
    let mean = z.dot(gp.weights());
    let vz = gp.solve_lower(&z);
    Ok(IntegralPosterior {
        mean,
        variance: clamp_variance(prior - vz.norm_squared(), prior),
    })
}

/// One entry of the run history, recorded after each (re)fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub params: RbfParams,
    pub wall_ms: f64,
}

/// Everything the acquisition needs about the current model.
#[derive(Clone, Debug)]
pub struct BqState {
    pub gp: GpPosterior,
    pub table: EmbeddingTable,
    pub measure: Measure,
    pub integral: IntegralPosterior,
    pub history: Vec<HistoryEntry>,
    /// `L⁻¹ z`, cached for the acquisition numerator.
    solved_kernel_mean: DVector<f64>,
}

impl BqState {
    pub fn new(gp: GpPosterior, measure: &Measure) -> Result<Self> {
        let table = build_embedding_table(measure, &gp.spec().params, &gp.spec().group)?;
        let integral = bq_posterior(&gp, &table, measure)?;
        let z = kernel_mean_column(&table, gp.data());
        let solved_kernel_mean = gp.solve_lower(&z);
        Ok(Self {
            gp,
            table,
            measure: measure.clone(),
            integral,
            history: Vec::new(),
            solved_kernel_mean,
        })
    }

    /// Conditions a kernel on data and builds the state in one go.
    pub fn from_data(spec: &KernelSpec, data: &Dataset, measure: &Measure) -> Result<Self> {
        Self::new(fit(spec, data)?, measure)
    }

    pub fn data(&self) -> &Dataset {
        self.gp.data()
    }

    fn acquisition_unchecked(&self, x: &[f64]) -> f64 {
        let spec = self.gp.spec();
        let prior_x = spec.eval_unchecked(x, x);
        let q = self.table.kernel_mean_sum_unchecked(x);
        if self.data().is_empty() {
            return q * q / (prior_x + self.gp.jitter());
        }
        let vk = self.gp.solve_lower(&self.gp.cross(x));
        let cov = q - self.solved_kernel_mean.dot(&vk);
        let var = (prior_x - vk.norm_squared()).max(0.0) + self.gp.jitter();
        if var <= 0.0 {
            return 0.0;
        }
        cov * cov / var
    }

    /// Whether `x` (or one of its orbit images) coincides with a training
    /// location within `tol`.
    fn duplicates_training_point(&self, x: &[f64], tol: f64) -> bool {
        let group = &self.gp.spec().group;
        group.orbit_unchecked(x).iter().any(|img| {
            self.data().x().iter().any(|xi| {
                xi.iter()
                    .zip(img)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    <= tol
            })
        })
    }
}

/// Integral variance reduction from observing `f(x)`:
/// `cov(Z, f(x) | D)² / (var(f(x) | D) + jitter)`.
pub fn acquisition_ivr(x: &[f64], state: &BqState) -> Result<f64> {
    check_dim(state.measure.dim(), x.len())?;
    if !state.measure.contains(x) {
        return Err(Error::InvalidInput(format!(
            "candidate {x:?} lies outside the integration domain"
        )));
    }
    Ok(state.acquisition_unchecked(x))
}

/// Candidate search settings for [`select_next`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectConfig {
    pub n_candidates: usize,
    pub refine_steps: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            n_candidates: 500,
            refine_steps: 10,
        }
    }
}

/// Training points closer than this (in any orbit image) are never proposed.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Maximizes the acquisition over seeded random candidates drawn from the
/// measure, then polishes the winner with coordinate-wise golden-section
/// search. Candidates that duplicate a training point (up to the group
/// action) are skipped. A single candidate is returned unrefined.
pub fn select_next(state: &BqState, rng_seed: u64, config: &SelectConfig) -> Vec<f64> {
    let n = config.n_candidates.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let candidates: Vec<Vec<f64>> = (0..n).map(|_| state.measure.sample(&mut rng)).collect();
    let scores = par::map_slice(&candidates, |x| {
        if state.duplicates_training_point(x, DUPLICATE_TOLERANCE) {
            f64::NEG_INFINITY
        } else {
            state.acquisition_unchecked(x)
        }
    });
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let start = candidates[best].clone();
    if n == 1 || config.refine_steps == 0 || scores[best] == f64::NEG_INFINITY {
        return start;
    }

    let (lo, hi) = state.measure.search_box();
    let mut x = start.clone();
    let mut fx = scores[best];
    let mut radius: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.1 * (h - l)).collect();
    for _ in 0..config.refine_steps {
        for q in 0..x.len() {
            let a = (x[q] - radius[q]).max(lo[q]);
            let b = (x[q] + radius[q]).min(hi[q]);
            let eval = |t: f64| {
                let mut y = x.clone();
                y[q] = t;
                if state.duplicates_training_point(&y, DUPLICATE_TOLERANCE) {
                    f64::NEG_INFINITY
                } else {
                    state.acquisition_unchecked(&y)
                }
            };
            let (t, ft) = golden_section_max(eval, a, b, 16);
            if ft > fx {
                x[q] = t;
                fx = ft;
            }
        }
        radius.iter_mut().for_each(|r| *r *= 0.5);
    }
    x
}

/// How kernel hyperparameters are chosen during a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperMode {
    /// Maximize the marginal likelihood after every new observation.
    Mll(SearchConfig),
    /// Hold the given values for the whole run.
    Fixed(RbfParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveConfig {
    pub n_initial: usize,
    pub n_total: usize,
    pub seed: u64,
    pub group: SignFlipGroup,
    pub hyper: HyperMode,
    pub select: SelectConfig,
}

/// `n` points drawn from the (normalized) measure.
pub fn initial_design(measure: &Measure, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| measure.sample(&mut rng)).collect()
}

fn step_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs active BQ from a freshly sampled initial design.
pub fn run_active_bq(f: &Integrand, measure: &Measure, config: &ActiveConfig) -> Result<BqState> {
    let design = initial_design(measure, config.n_initial, config.seed);
    run_active_bq_from(f, measure, config, &design)
}

/// Runs active BQ from a given initial design.
pub fn run_active_bq_from(
    f: &Integrand,
    measure: &Measure,
    config: &ActiveConfig,
    design: &[Vec<f64>],
) -> Result<BqState> {
    measure.validate()?;
    check_dim(measure.dim(), f.dim())?;
    check_dim(measure.dim(), config.group.dim())?;
    if config.n_initial == 0 || config.n_total < config.n_initial {
        return Err(Error::Configuration(format!(
            "need 1 <= n_initial <= n_total, got n_initial={}, n_total={}",
            config.n_initial, config.n_total
        )));
    }
    if design.len() != config.n_initial {
        return Err(Error::Configuration(format!(
            "initial design has {} points, expected {}",
            design.len(),
            config.n_initial
        )));
    }
    if matches!(config.hyper, HyperMode::Mll(_)) && config.n_initial < 2 {
        return Err(Error::Configuration(
            "marginal-likelihood fitting needs n_initial >= 2".into(),
        ));
    }

    let started = Instant::now();
    let mut data = Dataset::empty(measure.dim());
    for x in design {
        let y = f.evaluate(x)?;
        data.push(x.clone(), y)?;
    }
    let mut history = Vec::new();
    loop {
        let params = match &config.hyper {
            HyperMode::Mll(search) => optimize_hyperparameters(&data, &config.group, search)?,
            HyperMode::Fixed(p) => *p,
        };
        let spec = KernelSpec::new(params, config.group.clone());
        let mut state = BqState::from_data(&spec, &data, measure)?;
        history.push(HistoryEntry {
            n: data.len(),
            mean: state.integral.mean,
            variance: state.integral.variance,
            params,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });
        if data.len() >= config.n_total {
            state.history = history;
            return Ok(state);
        }
        let x = select_next(&state, step_seed(config.seed, data.len()), &config.select);
        let y = f.evaluate(&x)?;
        data.push(x, y)?;
    }
}

/// Running mean/variance (Welford).
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

/// Monte Carlo estimates after each of the requested sample counts, from a
/// single seeded stream. `checkpoints` must be increasing.
pub fn mc_path(
    f: &Integrand,
    measure: &Measure,
    checkpoints: &[usize],
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    measure.validate()?;
    check_dim(measure.dim(), f.dim())?;
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("checkpoints must be increasing".into()));
    }
    let mass = measure.total_mass();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Welford::default();
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        while acc.n < c {
            let x = measure.sample(&mut rng);
            acc.push(f.evaluate(&x)?);
        }
        let stderr = mass * (acc.sample_variance() / acc.n as f64).sqrt();
        out.push((mass * acc.mean, stderr));
    }
    Ok(out)
}

/// Plain Monte Carlo estimate of `∫ f π` and its standard error.
pub fn mc_estimate(f: &Integrand, measure: &Measure, n: usize, seed: u64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "Monte Carlo needs n >= 2 samples, got {n}"
        )));
    }
    Ok(mc_path(f, measure, &[n], seed)?[0])
}
