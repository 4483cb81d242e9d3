//! The benchmark grid: test function × method × seed, with the initial design
//! shared by every method of a seed.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bq::{
    initial_design, mc_path, run_active_bq_from, ActiveConfig, HyperMode, SelectConfig,
};
use crate::embedding::Measure;
use crate::error::{Error, Result};
use crate::gp::{optimize_hyperparameters, Dataset, SearchConfig};
use crate::group::SignFlipGroup;
use crate::kernel::RbfParams;
use crate::par;
use crate::testbed::TestFunctionDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Standard,
    InvariantPoint,
    InvariantAll,
    Mc,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Standard,
        Method::InvariantPoint,
        Method::InvariantAll,
        Method::Mc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::InvariantPoint => "invariant-point",
            Method::InvariantAll => "invariant-all",
            Method::Mc => "mc",
        }
    }

    /// Kernel group for the BQ methods; `None` for Monte Carlo.
    pub fn group(self, descriptor: &TestFunctionDescriptor) -> Option<SignFlipGroup> {
        match self {
            Method::Standard => Some(SignFlipGroup::identity(descriptor.dim)),
            Method::InvariantPoint => Some(SignFlipGroup::point_symmetry(descriptor.dim)),
            Method::InvariantAll => Some(descriptor.declared_group()),
            Method::Mc => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown method '{s}'")))
    }
}

/// How hyperparameters are set for the BQ methods of a grid.
#[derive(Clone, Debug, PartialEq)]
pub enum HyperPolicy {
    /// Refit by marginal likelihood after every observation.
    Mll,
    /// Same values for every method and step.
    Fixed(RbfParams),
    /// Per method, maximize the marginal likelihood once on `points` samples
    /// drawn from the measure, then hold those values.
    Oversample { points: usize, seed: u64 },
}

/// One row of a result file.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub function: String,
    pub method: Method,
    pub measure: String,
    pub seed: u64,
    pub n: usize,
    pub mu_z: f64,
    pub sigma_z: f64,
    pub reference: f64,
    pub rel_abs_err: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct GridSpec {
    pub descriptor: TestFunctionDescriptor,
    pub measure: Measure,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub n_initial: usize,
    pub n_total: usize,
    pub hyper: HyperPolicy,
    pub search: SearchConfig,
    pub select: SelectConfig,
    pub reference: f64,
}

/// Search settings scaled to a measure.
pub fn search_for(measure: &Measure) -> SearchConfig {
    SearchConfig::with_reference_length(measure.characteristic_length())
}

/// Maximizes the marginal likelihood on a large random sample of the
/// integrand.
pub fn oversampled_params(
    descriptor: &TestFunctionDescriptor,
    measure: &Measure,
    group: &SignFlipGroup,
    points: usize,
    seed: u64,
    search: &SearchConfig,
) -> Result<RbfParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Dataset::empty(descriptor.dim);
    for _ in 0..points {
        let x = measure.sample(&mut rng);
        let y = descriptor.evaluate(&x);
        data.push(x, y)?;
    }
    optimize_hyperparameters(&data, group, search)
}

fn rel_err(mu: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (mu - reference).abs()
    } else {
        ((mu - reference) / reference).abs()
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.descriptor.dim != self.measure.dim() {
            return Err(Error::Configuration(format!(
                "function '{}' is {}-dimensional but the measure is {}-dimensional",
                self.descriptor.name,
                self.descriptor.dim,
                self.measure.dim()
            )));
        }
        if self.methods.is_empty() || self.seeds.is_empty() {
            return Err(Error::Configuration(
                "need at least one method and one seed".into(),
            ));
        }
        if self.n_initial == 0 || self.n_initial > self.n_total {
            return Err(Error::Configuration(format!(
                "need 1 <= n_initial <= n_total, got {} and {}",
                self.n_initial, self.n_total
            )));
        }
        Ok(())
    }

    fn hyper_mode(&self, params: &Option<RbfParams>) -> HyperMode {
        match params {
            Some(p) => HyperMode::Fixed(*p),
            None => HyperMode::Mll(self.search.clone()),
        }
    }

    fn row(
        &self,
        method: Method,
        seed: u64,
        n: usize,
        mu: f64,
        sigma: f64,
        wall_ms: f64,
    ) -> ResultRow {
        ResultRow {
            function: self.descriptor.name.clone(),
            method,
            measure: self.measure.label().to_string(),
            seed,
            n,
            mu_z: mu,
            sigma_z: sigma,
            reference: self.reference,
            rel_abs_err: rel_err(mu, self.reference),
            wall_ms,
        }
    }

    fn run_cell(
        &self,
        method: Method,
        seed: u64,
        params: &Option<RbfParams>,
    ) -> Result<Vec<ResultRow>> {
        let started = Instant::now();
        let f = self.descriptor.integrand();
        let Some(group) = method.group(&self.descriptor) else {
            let checkpoints: Vec<usize> = (self.n_initial.max(2)..=self.n_total.max(2)).collect();
            let path = mc_path(&f, &self.measure, &checkpoints, seed)?;
            let wall = started.elapsed().as_secs_f64() * 1e3;
            return Ok(checkpoints
                .iter()
                .zip(path)
                .map(|(n, (est, se))| self.row(method, seed, *n, est, se, wall))
                .collect());
        };
        let design = initial_design(&self.measure, self.n_initial, seed);
        let config = ActiveConfig {
            n_initial: self.n_initial,
            n_total: self.n_total,
            seed,
            group,
            hyper: self.hyper_mode(params),
            select: self.select,
        };
        let state = run_active_bq_from(&f, &self.measure, &config, &design)?;
        Ok(state
            .history
            .iter()
            .map(|h| self.row(method, seed, h.n, h.mean, h.variance.sqrt(), h.wall_ms))
            .collect())
    }

    /// Hyperparameters held fixed for `method`, or `None` for per-step MLL.
    pub fn fixed_params(&self, method: Method) -> Result<Option<RbfParams>> {
        let Some(group) = method.group(&self.descriptor) else {
            return Ok(None);
        };
        match &self.hyper {
            HyperPolicy::Mll => Ok(None),
            HyperPolicy::Fixed(p) => Ok(Some(*p)),
            HyperPolicy::Oversample { points, seed } => oversampled_params(
                &self.descriptor,
                &self.measure,
                &group,
                *points,
                *seed,
                &self.search,
            )
            .map(Some),
        }
    }

    /// Runs every (method, seed) cell, in parallel when enabled. Rows are
    /// sorted by (method, seed, N), so output is independent of scheduling.
    pub fn run(&self) -> Result<Vec<ResultRow>> {
        self.validate()?;
        let params: Vec<(Method, Option<RbfParams>)> = self
            .methods
            .iter()
            .map(|m| self.fixed_params(*m).map(|p| (*m, p)))
            .collect::<Result<_>>()?;
        let cells: Vec<(Method, Option<RbfParams>, u64)> = params
            .iter()
            .flat_map(|(m, p)| self.seeds.iter().map(move |s| (*m, *p, *s)))
            .collect();
        let results = par::map_slice(&cells, |(m, p, s)| self.run_cell(*m, *s, p));
        let mut rows = Vec::new();
        for r in results {
            rows.extend(r?);
        }
        rows.sort_by_key(|r| (r.method, r.seed, r.n));
        Ok(rows)
    }
}

/// Rows for one method at one sample count, keyed by seed.
pub fn rows_at(rows: &[ResultRow], method: Method, n: usize) -> Vec<&ResultRow> {
    let mut out: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.method == method && r.n == n)
        .collect();
    out.sort_by_key(|r| r.seed);
    out
}
