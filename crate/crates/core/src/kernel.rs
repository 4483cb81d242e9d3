//! Squared-exponential kernel and its sign-flip invariant lift.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::group::SignFlipGroup;
use crate::par;

/// `θ²` (output variance) and `λ` (isotropic lengthscale).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbfParams {
    pub variance: f64,
    pub lengthscale: f64,
}

impl RbfParams {
    pub fn new(variance: f64, lengthscale: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(variance) || !ok(lengthscale) {
            return Err(Error::InvalidInput(format!(
                "RBF parameters must be positive and finite, got variance={variance}, lengthscale={lengthscale}"
            )));
        }
        Ok(Self {
            variance,
            lengthscale,
        })
    }
}

/// Base kernel parameters plus the group the kernel is made invariant under.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub params: RbfParams,
    pub group: SignFlipGroup,
}

impl KernelSpec {
    pub fn new(params: RbfParams, group: SignFlipGroup) -> Self {
        Self { params, group }
    }

    /// Plain RBF kernel in `dim` dimensions.
    pub fn standard(params: RbfParams, dim: usize) -> Self {
        Self::new(params, SignFlipGroup::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    pub fn with_params(&self, params: RbfParams) -> Self {
        Self {
            params,
            group: self.group.clone(),
        }
    }

    /// `k_f(x, y) = Σ_g Σ_h k(g x, h y)` over the full `J × J` element pairs.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        check_finite(x)?;
        check_finite(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Since `k(g x, h y) = k(x, g h y)` for sign flips, the double sum
    /// collapses to `J · Σ_g k(x, g y)`; the terms are still enumerated pairwise
    /// so that `J = 1` is bit-identical to the base kernel.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let elems = self.group.elements();
        if elems.len() == 1 {
            return rbf_unchecked(x, y, &self.params);
        }
        let inv_two_l2 = 0.5 / (self.params.lengthscale * self.params.lengthscale);
        let mut sum = 0.0;
        for g in elems {
            for h in elems {
                let sq: f64 = g
                    .signs()
                    .iter()
                    .zip(h.signs())
                    .zip(x.iter().zip(y))
                    .map(|((sg, sh), (xv, yv))| {
                        let d = f64::from(*sg) * xv - f64::from(*sh) * yv;
                        d * d
                    })
                    .sum();
                sum += (-sq * inv_two_l2).exp();
            }
        }
        self.params.variance * sum
    }
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite point {x:?}")))
    }
}

/// `θ² exp(-‖x - y‖² / (2λ²))`.
pub fn rbf(x: &[f64], y: &[f64], params: &RbfParams) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    check_finite(x)?;
    check_finite(y)?;
    Ok(rbf_unchecked(x, y, params))
}

pub(crate) fn rbf_unchecked(x: &[f64], y: &[f64], params: &RbfParams) -> f64 {
    let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    params.variance * (-sq / (2.0 * params.lengthscale * params.lengthscale)).exp()
}

/// Invariant kernel, free-function form.
pub fn invariant_kernel(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<f64> {
    spec.eval(x, y)
}

/// `N × N` Gram matrix of the invariant kernel. Its size does not depend on
/// the group order.
pub fn gram(xs: &[Vec<f64>], spec: &KernelSpec) -> Result<DMatrix<f64>> {
    for x in xs {
        check_dim(spec.dim(), x.len())?;
        check_finite(x)?;
    }
    Ok(gram_unchecked(xs, spec))
}

pub(crate) fn gram_unchecked(xs: &[Vec<f64>], spec: &KernelSpec) -> DMatrix<f64> {
    let n = xs.len();
    // Upper triangle rows in parallel, mirrored afterwards.
    let rows = par::map_range(n, |i| {
        (i..n)
            .map(|j| spec.eval_unchecked(&xs[i], &xs[j]))
            .collect::<Vec<_>>()
    });
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Column `k_f(X, x)`.
pub(crate) fn cross_column(xs: &[Vec<f64>], x: &[f64], spec: &KernelSpec) -> Vec<f64> {
    xs.iter().map(|xi| spec.eval_unchecked(xi, x)).collect()
}
