//! Run configuration files.
//!
//! A config is a TOML document:
//!
//! ```toml
//! function = "hennig2d"
//! methods = ["standard", "invariant-point"]
//! n_initial = 5
//! n_total = 25
//! seeds = [0, 1, 2]
//! output = "results/hennig2d.csv"
//!
//! [measure]            # optional; defaults to the function's own domain
//! kind = "lebesgue"    # or "gaussian" with `mean = [...]` and `variance = ...`
//! lower = [-3.0, -3.0]
//! upper = [3.0, 3.0]
//!
//! [hyperparameters]
//! mode = "mll"         # or "fixed" with `variance`, `lengthscale`;
//!                      # or "oversample" with `points`, `seed`
//!
//! [parameters]         # optional test-function overrides
//! c = 1.0
//!
//! [acquisition]        # optional candidate search settings
//! n_candidates = 500
//! refine_steps = 10
//! ```
//!
//! A relative `output` path is resolved against the config file's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use invbq::experiment::{search_for, GridSpec, HyperPolicy, Method};
use invbq::quadrature::QuadOptions;
use invbq::{reference_integral, Measure, RbfParams, SelectConfig, TestFunctionDescriptor};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub function: String,
    pub methods: Vec<String>,
    pub n_initial: usize,
    pub n_total: usize,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    pub hyperparameters: Hyperparameters,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acquisition: Option<SelectConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum Hyperparameters {
    Mll,
    Fixed {
        variance: f64,
        lengthscale: f64,
    },
    Oversample {
        points: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a config and resolves its output path.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if config.output.is_relative() {
            if let Some(dir) = path.parent() {
                config.output = dir.join(&config.output);
            }
        }
        Ok(config)
    }

    pub fn with_seed_offset(mut self, offset: u64) -> Self {
        for s in &mut self.seeds {
            *s += offset;
        }
        self
    }

    pub fn descriptor(&self) -> Result<TestFunctionDescriptor> {
        let mut d = TestFunctionDescriptor::by_name(&self.function)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        for (k, v) in &self.parameters {
            d = d
                .with_parameter(k, *v)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(d)
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("`methods` must not be empty".into()));
        }
        let mut out = Vec::new();
        for m in &self.methods {
            let method: Method = m
                .parse()
                .map_err(|e: invbq::Error| CliError::Usage(e.to_string()))?;
            if out.contains(&method) {
                return Err(CliError::Usage(format!("method '{m}' listed twice")));
            }
            out.push(method);
        }
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Usage("`seeds` must not be empty".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(CliError::Usage("`seeds` must be distinct".into()));
        }
        if self.n_initial == 0 || self.n_initial > self.n_total {
            return Err(CliError::Usage(format!(
                "need 1 <= n_initial <= n_total, got {} and {}",
                self.n_initial, self.n_total
            )));
        }
        Ok(())
    }

    /// Validates the config and computes the reference integral.
    pub fn grid(&self) -> Result<GridSpec> {
        self.check()?;
        let descriptor = self.descriptor()?;
        let methods = self.methods()?;
        let measure = self
            .measure
            .clone()
            .unwrap_or_else(|| descriptor.default_domain.clone());
        measure
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if measure.dim() != descriptor.dim {
            return Err(CliError::Usage(format!(
                "function '{}' is {}-dimensional but the measure is {}-dimensional",
                descriptor.name,
                descriptor.dim,
                measure.dim()
            )));
        }
        let hyper = match self.hyperparameters {
            Hyperparameters::Mll => HyperPolicy::Mll,
            Hyperparameters::Fixed {
                variance,
                lengthscale,
            } => HyperPolicy::Fixed(
                RbfParams::new(variance, lengthscale)
                    .map_err(|e| CliError::Usage(e.to_string()))?,
            ),
            Hyperparameters::Oversample { points, seed } => {
                HyperPolicy::Oversample { points, seed }
            }
        };
        let reference = reference_integral(&descriptor, &measure, &QuadOptions::default())
            .map_err(|e| CliError::Oracle(e.to_string()))?;
        Ok(GridSpec {
            search: search_for(&measure),
            descriptor,
            measure,
            methods,
            seeds: self.seeds.clone(),
            n_initial: self.n_initial,
            n_total: self.n_total,
            hyper,
            select: self.acquisition.unwrap_or_default(),
            reference,
        })
    }
}

/// Parses a measure given on the command line: `default`, `box:LO,HI` (a
/// cube) or `gaussian:MEAN,VARIANCE` (isotropic, every mean coordinate equal
/// to MEAN).
pub fn parse_measure(spec: &str, dim: usize, default: &Measure) -> Result<Measure> {
    let bad = || CliError::Usage(format!("cannot parse measure '{spec}'"));
    if spec == "default" {
        return Ok(default.clone());
    }
    let (kind, args) = spec.split_once(':').ok_or_else(bad)?;
    let (a, b) = args.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let measure = match kind {
        "box" => Measure::cube(dim, a, b),
        "gaussian" => Measure::gaussian(vec![a; dim], b),
        _ => return Err(bad()),
    };
    measure.map_err(|e| CliError::Usage(e.to_string()))
}
