//! Closed-form kernel integrals for the RBF kernel under sign-flip groups.
//!
//! Notation: `qK(x) = ∫ k(t, x) π(t) dt` is the kernel mean and
//! `qKq = ∬ k(t, s) π(t) π(s) dt ds` the prior variance of the integral.
//! For group elements `T_i x = c_i ⊙ x` the pairwise versions are
//!
//! ```text
//! qK_ij(x) = ∫ k(T_i t, T_j x) π(t) dt        = qK(c_i c_j ⊙ x)
//! qKq_ij   = ∬ k(T_i t, T_j s) π(t) π(s) dt ds
//! ```
//!
//! The second reduces to the base double integral with the bounds of every
//! flipped axis mirrored (`[l, u] → [-u, -l]`) for the Lebesgue measure, and
//! with the mean of one factor mirrored for the Gaussian measure.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::group::{SignFlipGroup, SignVector};
use crate::kernel::RbfParams;

/// Integration measure: Lebesgue on a box, or an isotropic Gaussian density
/// on all of `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Measure {
    #[serde(rename = "lebesgue")]
    BoxLebesgue { lower: Vec<f64>, upper: Vec<f64> },
    #[serde(rename = "gaussian")]
    GaussianIso { mean: Vec<f64>, variance: f64 },
}

impl Measure {
    pub fn lebesgue(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let m = Self::BoxLebesgue { lower, upper };
        m.validate()?;
        Ok(m)
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::lebesgue(vec![lo; dim], vec![hi; dim])
    }

    pub fn gaussian(mean: Vec<f64>, variance: f64) -> Result<Self> {
        let m = Self::GaussianIso { mean, variance };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::BoxLebesgue { lower, upper } => {
                check_dim(lower.len(), upper.len())?;
                if lower.is_empty() {
                    return Err(Error::InvalidInput("box measure needs dim >= 1".into()));
                }
                for (q, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if !(l.is_finite() && u.is_finite() && l < u) {
                        return Err(Error::InvalidInput(format!(
                            "box bounds for axis {q} must be finite with lower < upper, got [{l}, {u}]"
                        )));
                    }
                }
            }
            Self::GaussianIso { mean, variance } => {
                if mean.is_empty() || mean.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "gaussian mean must be non-empty and finite, got {mean:?}"
                    )));
                }
                if !(variance.is_finite() && *variance > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "gaussian variance must be positive, got {variance}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::BoxLebesgue { lower, .. } => lower.len(),
            Self::GaussianIso { mean, .. } => mean.len(),
        }
    }

    /// Short label used in result files.
    pub fn label(&self) -> &'static str {
        match self {
            Self::BoxLebesgue { .. } => "lebesgue",
            Self::GaussianIso { .. } => "gaussian",
        }
    }

    /// Whether `x` lies in the support `Ω`.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::BoxLebesgue { lower, upper } => {
                x.len() == lower.len()
                    && x.iter()
                        .zip(lower.iter().zip(upper))
                        .all(|(v, (l, u))| *v >= *l && *v <= *u)
            }
            Self::GaussianIso { mean, .. } => {
                x.len() == mean.len() && x.iter().all(|v| v.is_finite())
            }
        }
    }

    /// Box used for candidate search and local refinement: the domain itself,
    /// or `mean ± 5σ` for the Gaussian measure.
    pub fn search_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::BoxLebesgue { lower, upper } => (lower.clone(), upper.clone()),
            Self::GaussianIso { mean, variance } => {
                let r = 5.0 * variance.sqrt();
                (
                    mean.iter().map(|m| m - r).collect(),
                    mean.iter().map(|m| m + r).collect(),
                )
            }
        }
    }

    /// Length of the diagonal of the region that carries the mass: the box
    /// itself, or `mean ± 3σ` for the Gaussian measure.
    pub fn characteristic_length(&self) -> f64 {
        match self {
            Self::BoxLebesgue { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum::<f64>()
                .sqrt(),
            Self::GaussianIso { mean, variance } => {
                6.0 * variance.sqrt() * (mean.len() as f64).sqrt()
            }
        }
    }

    /// Draws a point distributed according to the (normalized) measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Self::BoxLebesgue { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            Self::GaussianIso { mean, variance } => {
                let sd = variance.sqrt();
                mean.iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(rng);
                        m + sd * z
                    })
                    .collect()
            }
        }
    }

    /// Total mass: the box volume, or 1 for a probability density.
    pub fn total_mass(&self) -> f64 {
        match self {
            Self::BoxLebesgue { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| u - l).product()
            }
            Self::GaussianIso { .. } => 1.0,
        }
    }

    /// Density `π(x)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        match self {
            Self::BoxLebesgue { .. } => {
                if self.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::GaussianIso { mean, variance } => {
                let d = mean.len() as f64;
                let sq: f64 = x.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
                (2.0 * PI * variance).powf(-0.5 * d) * (-0.5 * sq / variance).exp()
            }
        }
    }
}

/// `erf(b) - erf(a)` without cancellation when both arguments sit in the
/// same tail.
pub(crate) fn erf_diff(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if a <= 0.0 && b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

/// Antiderivative pair for the squared-exponential profile: `ψ'' (z) =
/// exp(-z² / (2λ²))`. The additive constant `λ²` of the textbook form
/// `√(π/2) λ z erf(z/(√2 λ)) + λ² exp(-z²/(2λ²))` is dropped because it cancels
/// in [`double_box_1d`], and `expm1` keeps small arguments accurate.
pub(crate) fn psi(z: f64, lengthscale: f64) -> f64 {
    let l = lengthscale;
    (PI / 2.0).sqrt() * l * z * libm::erf(z / (2f64.sqrt() * l))
        + l * l * (-(z * z) / (2.0 * l * l)).exp_m1()
}

/// `∫_a^b ∫_c^d exp(-(s - t)² / (2λ²)) dt ds`.
pub(crate) fn double_box_1d(a: f64, b: f64, c: f64, d: f64, lengthscale: f64) -> f64 {
    psi(b - c, lengthscale) - psi(a - c, lengthscale) - psi(b - d, lengthscale)
        + psi(a - d, lengthscale)
}

/// Kernel mean `qK(x) = ∫ k(t, x) π(t) dt`.
pub fn kernel_mean_base(measure: &Measure, params: &RbfParams, x: &[f64]) -> Result<f64> {
    check_dim(measure.dim(), x.len())?;
    Ok(kernel_mean_unchecked(measure, params, x))
}

pub(crate) fn kernel_mean_unchecked(measure: &Measure, params: &RbfParams, x: &[f64]) -> f64 {
    let l = params.lengthscale;
    match measure {
        Measure::BoxLebesgue { lower, upper } => {
            let scale = 2f64.sqrt() * l;
            let per_axis = (PI / 2.0).sqrt() * l;
            params.variance
                * x.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(xq, (lq, uq))| per_axis * erf_diff((lq - xq) / scale, (uq - xq) / scale))
                    .product::<f64>()
        }
        Measure::GaussianIso { mean, variance } => {
            let d = mean.len() as f64;
            let s = l * l + variance;
            let sq: f64 = x.iter().zip(mean).map(|(a, b)| (a - b) * (a - b)).sum();
            params.variance * (l * l / s).powf(0.5 * d) * (-0.5 * sq / s).exp()
        }
    }
}

/// Prior variance of the integral under the base kernel.
pub fn prior_variance_base(measure: &Measure, params: &RbfParams) -> Result<f64> {
    measure.validate()?;
    Ok(prior_variance_flipped(
        measure,
        params,
        &SignVector::identity(measure.dim()),
    ))
}

/// `|det(Q_iᵀ Q_j)|⁻¹` for the change of variables `s = Q_iᵀ Q_j t`; always 1
/// for sign flips.
pub fn jacobian_factor(composed: &SignVector) -> f64 {
    composed
        .signs()
        .iter()
        .map(|s| f64::from(*s))
        .product::<f64>()
        .abs()
        .recip()
}

/// `∬ k(t, c ⊙ s) π(t) π(s) dt ds`.
fn prior_variance_flipped(measure: &Measure, params: &RbfParams, composed: &SignVector) -> f64 {
    let l = params.lengthscale;
    let jac = jacobian_factor(composed);
    match measure {
        Measure::BoxLebesgue { lower, upper } => {
            let prod: f64 = composed
                .signs()
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(c, (lq, uq))| {
                    let (a, b) = if *c == 1 { (*lq, *uq) } else { (-uq, -lq) };
                    double_box_1d(a, b, *lq, *uq, l)
                })
                .product();
            params.variance * jac * prod
        }
        Measure::GaussianIso { mean, variance } => {
            let d = mean.len() as f64;
            let s = l * l + 2.0 * variance;
            let sq: f64 = composed
                .signs()
                .iter()
                .zip(mean)
                .map(|(c, b)| {
                    let diff = f64::from(*c) * b - b;
                    diff * diff
                })
                .sum();
            params.variance * jac * (l * l / s).powf(0.5 * d) * (-0.5 * sq / s).exp()
        }
    }
}

fn check_group(measure: &Measure, group: &SignFlipGroup) -> Result<()> {
    check_dim(measure.dim(), group.dim())
}

/// `qK_ij(x) = qK(c_i c_j ⊙ x)`.
pub fn kernel_mean_transformed(
    measure: &Measure,
    params: &RbfParams,
    group: &SignFlipGroup,
    i: usize,
    j: usize,
    x: &[f64],
) -> Result<f64> {
    check_group(measure, group)?;
    check_dim(measure.dim(), x.len())?;
    let c = group.element(group.compose_index(i, j)?)?;
    Ok(kernel_mean_unchecked(
        measure,
        params,
        &c.apply_unchecked(x),
    ))
}

/// `qKq_ij`.
pub fn prior_variance_transformed(
    measure: &Measure,
    params: &RbfParams,
    group: &SignFlipGroup,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_group(measure, group)?;
    measure.validate()?;
    let c = group.element(group.compose_index(i, j)?)?;
    Ok(prior_variance_flipped(measure, params, c))
}

/// All pairwise embeddings for one (measure, params, group) triple.
///
/// `qK_ij` and `qKq_ij` depend on `(i, j)` only through the composed element
/// `c_i c_j`, so only `J` distinct kernel-mean maps and `J` distinct scalars
/// exist; the table stores those and a `J × J` index into them.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    group: SignFlipGroup,
    measure: Measure,
    params: RbfParams,
    qkq_pair: DMatrix<f64>,
    /// `Σ_{i,j} qKq_ij`.
    qkq_total: f64,
    /// Number of `(i, j)` pairs composing to each element; `J` for every
    /// element of a group.
    multiplicity: Vec<usize>,
}

impl EmbeddingTable {
    pub fn group(&self) -> &SignFlipGroup {
        &self.group
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn params(&self) -> &RbfParams {
        &self.params
    }

    pub fn qkq(&self, i: usize, j: usize) -> Result<f64> {
        let size = self.group.len();
        if i >= size || j >= size {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                size,
            });
        }
        Ok(self.qkq_pair[(i, j)])
    }

    pub fn qkq_matrix(&self) -> &DMatrix<f64> {
        &self.qkq_pair
    }

    pub fn qk(&self, i: usize, j: usize, x: &[f64]) -> Result<f64> {
        kernel_mean_transformed(&self.measure, &self.params, &self.group, i, j, x)
    }

    /// `Σ_{i,j} qK_ij(x)`: the kernel mean of the invariant kernel.
    pub fn kernel_mean_sum(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.measure.dim(), x.len())?;
        Ok(self.kernel_mean_sum_unchecked(x))
    }

    pub(crate) fn kernel_mean_sum_unchecked(&self, x: &[f64]) -> f64 {
        if self.group.is_trivial() {
            return kernel_mean_unchecked(&self.measure, &self.params, x);
        }
        self.group
            .elements()
            .iter()
            .zip(&self.multiplicity)
            .map(|(c, m)| {
                *m as f64
                    * kernel_mean_unchecked(&self.measure, &self.params, &c.apply_unchecked(x))
            })
            .sum()
    }

    /// `Σ_{i,j} qKq_ij`: the prior variance of the integral under the
    /// invariant kernel.
    pub fn prior_variance_sum(&self) -> f64 {
        self.qkq_total
    }
}

pub fn build_embedding_table(
    measure: &Measure,
    params: &RbfParams,
    group: &SignFlipGroup,
) -> Result<EmbeddingTable> {
    measure.validate()?;
    check_group(measure, group)?;
    let size = group.len();
    let distinct: Vec<f64> = group
        .elements()
        .iter()
        .map(|c| prior_variance_flipped(measure, params, c))
        .collect();
    let mut qkq_pair = DMatrix::zeros(size, size);
    let mut multiplicity = vec![0; size];
    for i in 0..size {
        for j in 0..size {
            let k = group.compose_index(i, j)?;
            qkq_pair[(i, j)] = distinct[k];
            multiplicity[k] += 1;
        }
    }
    let qkq_total = qkq_pair.iter().sum();
    Ok(EmbeddingTable {
        group: group.clone(),
        measure: measure.clone(),
        params: *params,
        qkq_pair,
        qkq_total,
        multiplicity,
    })
}
