//! Symmetric test integrands and their reference integrals.
//!
//! Parameter defaults for `circular_gaussian` (μ = 2, σ = 1), `sombrero2d`
//! (c = 1) and `airy_psf` (scale = 2) are our own choices; every descriptor
//! carries its parameters so they can be overridden from configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::bq::Integrand;
use crate::embedding::Measure;
use crate::error::{Error, Result};
use crate::group::{SignFlipGroup, SignVector};
use crate::quadrature::{integrate_box, QuadOptions};

/// `exp(-x² - sin²(3x))`.
pub fn hennig1d(x: f64) -> f64 {
    let s = (3.0 * x).sin();
    (-x * x - s * s).exp()
}

/// `exp(-sin(3‖x‖²) - xᵀ S x)` with `S = [[1, 0.5], [0.5, 1]]`.
pub fn hennig2d(x: &[f64; 2]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let quad = x[0] * x[0] + x[0] * x[1] + x[1] * x[1];
    (-(3.0 * r2).sin() - quad).exp()
}

/// `‖x‖² exp(-(‖x‖ - μ)² / (2σ²)) / (2πσ²)`.
pub fn circular_gaussian(x: &[f64], mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "circular_gaussian needs sigma > 0, got {sigma}"
        )));
    }
    Ok(circular_gaussian_unchecked(x, mu, sigma))
}

fn circular_gaussian_unchecked(x: &[f64], mu: f64, sigma: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    r2 * (-(r - mu) * (r - mu) / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma)
}

/// `sin(π c ‖x‖) / (π c ‖x‖)`, equal to 1 at the origin.
pub fn sombrero2d(x: &[f64; 2], c: f64) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let arg = PI * r * c;
    if arg.abs() < 1e-8 {
        1.0 - arg * arg / 6.0
    } else {
        arg.sin() / arg
    }
}

/// First-order Bessel function of the first kind. Backed by the
/// rational/asymptotic approximations of the FreeBSD/musl math library
/// (relative error near machine precision away from the zeros).
pub fn bessel_j1(v: f64) -> f64 {
    libm::j1(v)
}

/// Normalized Airy pattern `(2 J₁(v) / v)²` with `v = scale · ‖x‖`.
pub fn airy_psf(x: &[f64; 2], scale: f64) -> f64 {
    let v = scale * (x[0] * x[0] + x[1] * x[1]).sqrt();
    if v < 1e-6 {
        // 2 J₁(v)/v = 1 - v²/8 + O(v⁴)
        let a = 1.0 - v * v / 8.0;
        return a * a;
    }
    let a = 2.0 * bessel_j1(v) / v;
    a * a
}

type Evaluator = dyn Fn(&[f64], &BTreeMap<String, f64>) -> f64 + Send + Sync;

/// A named integrand with its declared invariances and default domain.
#[derive(Clone)]
pub struct TestFunctionDescriptor {
    pub name: String,
    pub dim: usize,
    pub generators: Vec<SignVector>,
    pub default_domain: Measure,
    pub parameters: BTreeMap<String, f64>,
    eval: Arc<Evaluator>,
}

impl std::fmt::Debug for TestFunctionDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunctionDescriptor")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("generators", &self.generators)
            .field("parameters", &self.parameters)
            .finish()
    }
}

pub const FUNCTION_NAMES: [&str; 5] = [
    "hennig1d",
    "hennig2d",
    "circular_gaussian",
    "sombrero2d",
    "airy_psf",
];

fn two(x: &[f64]) -> [f64; 2] {
    [x[0], x[1]]
}

impl TestFunctionDescriptor {
    pub fn by_name(name: &str) -> Result<Self> {
        let cube = |d| Measure::cube(d, -3.0, 3.0).expect("valid cube");
        let params = |kv: &[(&str, f64)]| {
            kv.iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect::<BTreeMap<_, _>>()
        };
        let all_flips = |d| SignFlipGroup::all_flips(d).generators();
        let d = match name {
            "hennig1d" => Self {
                name: name.into(),
                dim: 1,
                generators: vec![SignVector::point_reflection(1)],
                default_domain: cube(1),
                parameters: BTreeMap::new(),
                eval: Arc::new(|x, _| hennig1d(x[0])),
            },
            "hennig2d" => Self {
                name: name.into(),
                dim: 2,
                generators: vec![SignVector::point_reflection(2)],
                default_domain: cube(2),
                parameters: BTreeMap::new(),
                eval: Arc::new(|x, _| hennig2d(&two(x))),
            },
            "circular_gaussian" => Self {
                name: name.into(),
                dim: 2,
                generators: all_flips(2),
                default_domain: cube(2),
                parameters: params(&[("mu", 2.0), ("sigma", 1.0)]),
                eval: Arc::new(|x, p| circular_gaussian_unchecked(x, p["mu"], p["sigma"])),
            },
            "sombrero2d" => Self {
                name: name.into(),
                dim: 2,
                generators: all_flips(2),
                default_domain: cube(2),
                parameters: params(&[("c", 1.0)]),
                eval: Arc::new(|x, p| sombrero2d(&two(x), p["c"])),
            },
            "airy_psf" => Self {
                name: name.into(),
                dim: 2,
                generators: all_flips(2),
                default_domain: cube(2),
                parameters: params(&[("scale", 2.0)]),
                eval: Arc::new(|x, p| airy_psf(&two(x), p["scale"])),
            },
            other => {
                return Err(Error::Configuration(format!(
                    "unknown test function '{other}' (known: {})",
                    FUNCTION_NAMES.join(", ")
                )))
            }
        };
        Ok(d)
    }

    /// Overrides a named parameter; unknown names and invalid values are
    /// rejected.
    pub fn with_parameter(mut self, key: &str, value: f64) -> Result<Self> {
        if !self.parameters.contains_key(key) {
            return Err(Error::Configuration(format!(
                "function '{}' has no parameter '{key}'",
                self.name
            )));
        }
        let positive = matches!(key, "sigma" | "c" | "scale");
        if !value.is_finite() || (positive && value <= 0.0) {
            return Err(Error::Configuration(format!(
                "invalid value {value} for parameter '{key}'"
            )));
        }
        self.parameters.insert(key.to_string(), value);
        Ok(self)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.eval)(x, &self.parameters)
    }

    pub fn declared_group(&self) -> SignFlipGroup {
        SignFlipGroup::from_generators(&self.generators, self.dim)
            .expect("descriptor generators match its dimension")
    }

    pub fn integrand(&self) -> Integrand {
        let eval = self.eval.clone();
        let params = self.parameters.clone();
        Integrand::new(self.dim, self.declared_group(), move |x| eval(x, &params))
    }
}

/// Half-width, in standard deviations, of the window used for Gaussian
/// measures. The neglected mass is at most `d · erfc(10/√2) ≈ d · 1.5e-23`
/// times `sup |f|`.
pub const GAUSSIAN_TRUNCATION_SIGMAS: f64 = 10.0;

/// Ground-truth `∫ f π` by nested adaptive quadrature.
pub fn reference_integral(
    descriptor: &TestFunctionDescriptor,
    measure: &Measure,
    opts: &QuadOptions,
) -> Result<f64> {
    integrate_against(|x| descriptor.evaluate(x), descriptor.dim, measure, opts)
}

/// `∫ f π` for an arbitrary integrand of dimension 1 or 2.
pub fn integrate_against<F: Fn(&[f64]) -> f64>(
    f: F,
    dim: usize,
    measure: &Measure,
    opts: &QuadOptions,
) -> Result<f64> {
    measure.validate()?;
    crate::error::check_dim(dim, measure.dim())?;
    if dim > 2 {
        return Err(Error::InvalidInput(format!(
            "reference integrals are limited to dim <= 2, got {dim}"
        )));
    }
    let r = match measure {
        Measure::BoxLebesgue { lower, upper } => integrate_box(&f, lower, upper, opts)?,
        Measure::GaussianIso { mean, variance } => {
            let w = GAUSSIAN_TRUNCATION_SIGMAS * variance.sqrt();
            let lower: Vec<f64> = mean.iter().map(|m| m - w).collect();
            let upper: Vec<f64> = mean.iter().map(|m| m + w).collect();
            integrate_box(|x| f(x) * measure.density(x), &lower, &upper, opts)?
        }
    };
    Ok(r.value)
}
