//! Zero-mean GP regression with exact observations.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::group::SignFlipGroup;
use crate::kernel::{cross_column, gram_unchecked, KernelSpec, RbfParams};
use crate::par;

/// Evaluation locations and values.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            x: Vec::new(),
            y: Vec::new(),
        }
    }

    pub fn new(dim: usize, x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        check_dim(x.len(), y.len())?;
        let mut data = Self::empty(dim);
        for (xi, yi) in x.into_iter().zip(y) {
            data.push(xi, yi)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        check_dim(self.dim, x.len())?;
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite observation y={y} at {x:?}"
            )));
        }
        self.x.push(x);
        self.y.push(y);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// First `n` observations.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            dim: self.dim,
            x: self.x[..n.min(self.len())].to_vec(),
            y: self.y[..n.min(self.len())].to_vec(),
        }
    }

    fn y_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.y)
    }
}

/// Jitter ladder: relative to the mean Gram diagonal, multiplied by 10 per
/// failed factorization.
pub const JITTER_START: f64 = 1e-12;
pub const JITTER_MAX: f64 = 1e-6;

/// Factorizes `gram + jitter·I`, escalating jitter along the ladder.
fn factorize(gram: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = gram.nrows();
    if n == 0 {
        let chol = Cholesky::new(gram).expect("empty matrix factorizes");
        return Ok((chol, 0.0));
    }
    let scale = gram.trace() / n as f64;
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::SingularGram { max_jitter: 0.0 });
    }
    let mut rel = JITTER_START;
    while rel <= JITTER_MAX * (1.0 + 1e-9) {
        let jitter = rel * scale;
        let mut m = gram.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(m) {
            let l = chol.l_dirty();
            if (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] > 0.0) {
                return Ok((chol, jitter));
            }
        }
        rel *= 10.0;
    }
    Err(Error::SingularGram {
        max_jitter: JITTER_MAX * scale,
    })
}

/// A GP conditioned on a dataset.
#[derive(Clone, Debug)]
pub struct GpPosterior {
    spec: KernelSpec,
    data: Dataset,
    chol: Cholesky<f64, Dyn>,
    weights: DVector<f64>,
    jitter: f64,
}

/// Conditions the zero-mean GP with kernel `spec` on `data`.
pub fn fit(spec: &KernelSpec, data: &Dataset) -> Result<GpPosterior> {
    check_dim(spec.dim(), data.dim())?;
    let gram = gram_unchecked(data.x(), spec);
    let (chol, jitter) = factorize(gram)?;
    let weights = chol.solve(&data.y_vector());
    Ok(GpPosterior {
        spec: spec.clone(),
        data: data.clone(),
        chol,
        weights,
        jitter,
    })
}

impl GpPosterior {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// `(G + jitter·I)⁻¹ Y`.
    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower Cholesky factor of the jittered Gram matrix.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `L⁻¹ b`.
    pub(crate) fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        if b.is_empty() {
            return b.clone();
        }
        self.chol
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("cholesky factor has a positive diagonal")
    }

    /// `(G + jitter·I)⁻¹ b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if b.is_empty() {
            return b.clone();
        }
        self.chol.solve(b)
    }

    pub(crate) fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(cross_column(self.data.x(), x, &self.spec))
    }

    /// Posterior mean and (clamped) variance of `f(x)`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.spec.dim(), x.len())?;
        let prior = self.spec.eval(x, x)?;
        if self.data.is_empty() {
            return Ok((0.0, prior));
        }
        let k = self.cross(x);
        let mean = k.dot(&self.weights);
        let v = self.solve_lower(&k);
        Ok((mean, (prior - v.norm_squared()).max(0.0)))
    }

    /// Posterior covariance `k(x, y) - k(x, X) G⁻¹ k(X, y)`.
    pub fn covariance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let prior = self.spec.eval(x, y)?;
        if self.data.is_empty() {
            return Ok(prior);
        }
        let vx = self.solve_lower(&self.cross(x));
        let vy = self.solve_lower(&self.cross(y));
        Ok(prior - vx.dot(&vy))
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.data.len() as f64;
        let fit = self.data.y_vector().dot(&self.weights);
        let log_det: f64 = self.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        -0.5 * fit - log_det - 0.5 * n * (2.0 * PI).ln()
    }
}

/// `log p(Y | X, θ², λ)` using the jittered factorization.
pub fn log_marginal_likelihood(spec: &KernelSpec, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidInput(
            "log marginal likelihood needs at least one observation".into(),
        ));
    }
    Ok(fit(spec, data)?.log_marginal_likelihood())
}

/// Grid-plus-refinement search over `(λ, θ²)`.
///
/// The grid is log₁₀-uniform over `λ ∈ [lengthscale_range.0 · L,
/// lengthscale_range.1 · L]` with `L` the reference length (the domain
/// diagonal), and `θ² ∈ [variance_range.0 · s, variance_range.1 · s]` with `s`
/// the sample variance of `Y`. The best grid point is then refined by
/// coordinate search in log space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub reference_length: f64,
    pub lengthscale_range: (f64, f64),
    pub variance_range: (f64, f64),
    pub lengthscale_points: usize,
    pub variance_points: usize,
    pub refine_steps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            reference_length: 1.0,
            lengthscale_range: (1e-2, 1e1),
            variance_range: (1e-2, 1e3),
            lengthscale_points: 25,
            variance_points: 25,
            refine_steps: 20,
        }
    }
}

impl SearchConfig {
    pub fn with_reference_length(reference_length: f64) -> Self {
        Self {
            reference_length,
            ..Self::default()
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

fn variance_scale(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        return var;
    }
    let second = y.iter().map(|v| v * v).sum::<f64>() / n;
    if second > 0.0 {
        second
    } else {
        1.0
    }
}

/// LML as a function of `θ²` for a fixed lengthscale, from one factorization
/// of the unit-variance Gram matrix. Since the jitter is relative to the
/// diagonal, `chol(θ² K + θ² ε I) = θ chol(K + ε I)`.
struct ProfiledLengthscale {
    fit_term: f64,
    log_det_unit: f64,
    n: f64,
}

impl ProfiledLengthscale {
    fn new(lengthscale: f64, group: &SignFlipGroup, data: &Dataset) -> Option<Self> {
        let params = RbfParams::new(1.0, lengthscale).ok()?;
        let post = fit(&KernelSpec::new(params, group.clone()), data).ok()?;
        let fit_term = data.y_vector().dot(&post.weights);
        let log_det_unit = post.chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        Some(Self {
            fit_term,
            log_det_unit,
            n: data.len() as f64,
        })
    }

    fn lml(&self, variance: f64) -> f64 {
        -0.5 * self.fit_term / variance
            - self.log_det_unit
            - 0.5 * self.n * variance.ln()
            - 0.5 * self.n * (2.0 * PI).ln()
    }
}

/// Maximizes the log marginal likelihood over the search grid, then refines.
/// Ties go to the lowest grid index, so the result does not depend on the
/// evaluation order.
pub fn optimize_hyperparameters(
    data: &Dataset,
    group: &SignFlipGroup,
    search: &SearchConfig,
) -> Result<RbfParams> {
    check_dim(group.dim(), data.dim())?;
    if data.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "hyperparameter search needs at least 2 observations, got {}",
            data.len()
        )));
    }
    let l_ref = search.reference_length;
    let s = variance_scale(data.y());
    let (l_lo, l_hi) = (
        search.lengthscale_range.0 * l_ref,
        search.lengthscale_range.1 * l_ref,
    );
    let (v_lo, v_hi) = (search.variance_range.0 * s, search.variance_range.1 * s);
    let lengthscales = log_grid(l_lo, l_hi, search.lengthscale_points.max(1));
    let variances = log_grid(v_lo, v_hi, search.variance_points.max(1));

    let profiles = par::map_slice(&lengthscales, |l| ProfiledLengthscale::new(*l, group, data));

    let mut best: Option<(f64, f64, f64)> = None;
    for (l, prof) in lengthscales.iter().zip(&profiles) {
        let Some(prof) = prof else { continue };
        for v in &variances {
            let score = prof.lml(*v);
            if score.is_finite() && best.is_none_or(|(b, _, _)| score > b) {
                best = Some((score, *l, *v));
            }
        }
    }
    let Some((mut best_score, mut l, mut v)) = best else {
        return Err(Error::SingularGram {
            max_jitter: JITTER_MAX,
        });
    };

    // Coordinate refinement in log₁₀ space, clamped to the grid box.
    let step0 = |lo: f64, hi: f64, n: usize| {
        if n > 1 {
            (hi.log10() - lo.log10()) / (n - 1) as f64
        } else {
            0.0
        }
    };
    let mut step_l = step0(l_lo, l_hi, lengthscales.len());
    let mut step_v = step0(v_lo, v_hi, variances.len());
    let mut cache: Option<(f64, ProfiledLengthscale)> = None;
    for _ in 0..search.refine_steps {
        if step_l == 0.0 && step_v == 0.0 {
            break;
        }
        let mut moved = false;
        for dir in [-1.0, 1.0] {
            let cand_l = 10f64.powf(l.log10() + dir * step_l).clamp(l_lo, l_hi);
            if step_l > 0.0 && cand_l != l {
                if let Some(prof) = ProfiledLengthscale::new(cand_l, group, data) {
                    let score = prof.lml(v);
                    if score.is_finite() && score > best_score {
                        best_score = score;
                        l = cand_l;
                        cache = Some((cand_l, prof));
                        moved = true;
                    }
                }
            }
        }
        if cache.as_ref().is_none_or(|(cl, _)| *cl != l) {
            cache = ProfiledLengthscale::new(l, group, data).map(|p| (l, p));
        }
        if let Some((_, prof)) = &cache {
            for dir in [-1.0, 1.0] {
                let cand_v = 10f64.powf(v.log10() + dir * step_v).clamp(v_lo, v_hi);
                if step_v > 0.0 && cand_v != v {
                    let score = prof.lml(cand_v);
                    if score.is_finite() && score > best_score {
                        best_score = score;
                        v = cand_v;
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            step_l *= 0.5;
            step_v *= 0.5;
        }
    }
    RbfParams::new(v, l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::SignVector;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn p(v: f64, l: f64) -> RbfParams {
        RbfParams::new(v, l).unwrap()
    }

    fn random_data(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let y = x
            .iter()
            .map(|xi| xi.iter().map(|v| (1.3 * v).sin()).sum::<f64>() + xi[0] * xi[0] * 0.1)
            .collect();
        Dataset::new(dim, x, y).unwrap()
    }

    #[test]
    fn empty_posterior_is_prior() {
        let spec = KernelSpec::new(p(2.0, 1.0), SignFlipGroup::point_symmetry(2));
        let post = fit(&spec, &Dataset::empty(2)).unwrap();
        let x = [0.3, -0.2];
        let (m, v) = post.predict(&x).unwrap();
        assert_eq!(m, 0.0);
        assert_eq!(v, spec.eval(&x, &x).unwrap());
    }

    #[test]
    fn single_observation_weight() {
        let spec = KernelSpec::standard(p(2.0, 1.0), 1);
        let data = Dataset::new(1, vec![vec![0.0]], vec![3.0]).unwrap();
        let post = fit(&spec, &data).unwrap();
        assert_relative_eq!(
            post.weights()[0],
            3.0 / (2.0 + post.jitter()),
            max_relative = 1e-15
        );
        assert_relative_eq!(post.weights()[0], 1.5, max_relative = 1e-10);
    }

    #[test]
    fn nan_observation_is_rejected() {
        assert!(Dataset::new(1, vec![vec![0.0]], vec![f64::NAN]).is_err());
        assert!(Dataset::new(1, vec![vec![f64::INFINITY]], vec![1.0]).is_err());
        assert!(Dataset::new(2, vec![vec![0.0]], vec![1.0]).is_err());
    }

    #[test]
    fn orbit_duplicates_succeed_with_jitter_and_interpolate() {
        let spec = KernelSpec::new(p(1.0, 1.0), SignFlipGroup::point_symmetry(1));
        let data = Dataset::new(
            1,
            vec![vec![0.7], vec![-0.7], vec![1.5]],
            vec![2.0, 2.0, -1.0],
        )
        .unwrap();
        match fit(&spec, &data) {
            Ok(post) => {
                assert!(post.jitter() > 0.0);
                let (m, _) = post.predict(&[0.7]).unwrap();
                assert!((m - 2.0).abs() < 1e-6, "{m}");
                let (m, _) = post.predict(&[1.5]).unwrap();
                assert!((m + 1.0).abs() < 1e-6, "{m}");
            }
            Err(e) => assert!(matches!(e, Error::SingularGram { .. })),
        }
    }

    #[test]
    fn exact_duplicates_with_conflicting_values_do_not_interpolate_silently() {
        // Two identical rows with different y: the jittered system must either
        // refuse or split the difference, never reproduce both values.
        let spec = KernelSpec::standard(p(1.0, 1.0), 1);
        let data = Dataset::new(1, vec![vec![0.2], vec![0.2]], vec![1.0, 3.0]).unwrap();
        if let Ok(post) = fit(&spec, &data) {
            let (m, _) = post.predict(&[0.2]).unwrap();
            assert!((m - 2.0).abs() < 1e-3, "{m}");
        }
    }

    #[test]
    fn interpolates_training_points_and_orbit_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_data(&mut rng, 8, 2);
        let group = SignFlipGroup::all_flips(2);
        let spec = KernelSpec::new(p(1.0, 0.8), group.clone());
        let post = fit(&spec, &data).unwrap();
        for (x, y) in data.x().iter().zip(data.y()) {
            let (m, v) = post.predict(x).unwrap();
            assert!((m - y).abs() < 1e-6, "{m} vs {y}");
            assert!(v < 1e-6);
            for g in group.elements() {
                let (m, _) = post.predict(&g.apply(x).unwrap()).unwrap();
                assert!((m - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn posterior_is_group_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = random_data(&mut rng, 10, 2);
        let group = SignFlipGroup::from_generators(&[SignVector::point_reflection(2)], 2).unwrap();
        let spec = KernelSpec::new(p(1.5, 1.1), group.clone());
        let post = fit(&spec, &data).unwrap();
        for _ in 0..100 {
            let x = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let (m0, v0) = post.predict(&x).unwrap();
            for g in group.elements() {
                let (m, v) = post.predict(&g.apply(&x).unwrap()).unwrap();
                assert!((m - m0).abs() <= 1e-8 * spec.params.variance.sqrt());
                assert!((v - v0).abs() <= 1e-8);
            }
            assert!(v0 >= 0.0 && v0 <= spec.eval(&x, &x).unwrap() + 1e-8);
        }
    }

    #[test]
    fn variance_contracts_with_more_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_data(&mut rng, 12, 1);
        let spec = KernelSpec::new(p(1.0, 0.6), SignFlipGroup::point_symmetry(1));
        let small = fit(&spec, &data.truncated(5)).unwrap();
        let large = fit(&spec, &data).unwrap();
        for i in 0..200 {
            let x = [-3.0 + 6.0 * i as f64 / 199.0];
            let (_, vs) = small.predict(&x).unwrap();
            let (_, vl) = large.predict(&x).unwrap();
            assert!(vl <= vs + 1e-8);
        }
    }

    #[test]
    fn lml_single_zero_observation() {
        let spec = KernelSpec::standard(p(2.0, 1.0), 1);
        let data = Dataset::new(1, vec![vec![0.4]], vec![0.0]).unwrap();
        let post = fit(&spec, &data).unwrap();
        let want = -0.5 * (2.0 + post.jitter()).ln() - 0.5 * (2.0 * PI).ln();
        assert_relative_eq!(
            log_marginal_likelihood(&spec, &data).unwrap(),
            want,
            max_relative = 1e-14
        );
        assert!(log_marginal_likelihood(&spec, &Dataset::empty(1)).is_err());
    }

    #[test]
    fn lml_matches_dense_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=5 {
            let data = random_data(&mut rng, n, 2);
            let spec = KernelSpec::new(p(1.3, 1.4), SignFlipGroup::point_symmetry(2));
            let post = fit(&spec, &data).unwrap();
            let mut g = crate::kernel::gram(data.x(), &spec).unwrap();
            for i in 0..n {
                g[(i, i)] += post.jitter();
            }
            let y = DVector::from_column_slice(data.y());
            let inv = g.clone().try_inverse().unwrap();
            let want = -0.5 * (y.transpose() * &inv * &y)[(0, 0)]
                - 0.5 * g.determinant().ln()
                - 0.5 * n as f64 * (2.0 * PI).ln();
            let got = log_marginal_likelihood(&spec, &data).unwrap();
            assert!(
                (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn zero_data_prefers_small_variance() {
        let data = Dataset::new(1, vec![vec![-1.0], vec![0.5], vec![2.0]], vec![0.0; 3]).unwrap();
        let spec_of = |v| KernelSpec::standard(p(v, 1.0), 1);
        let grid = [1e-3, 1e-2, 1e-1, 1.0, 10.0];
        let scores: Vec<f64> = grid
            .iter()
            .map(|v| log_marginal_likelihood(&spec_of(*v), &data).unwrap())
            .collect();
        let best = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(best, 0);
    }

    #[test]
    fn profiled_lml_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = random_data(&mut rng, 10, 2);
        let group = SignFlipGroup::point_symmetry(2);
        let prof = ProfiledLengthscale::new(0.9, &group, &data).unwrap();
        for v in [0.01, 0.3, 4.0, 120.0] {
            let direct =
                log_marginal_likelihood(&KernelSpec::new(p(v, 0.9), group.clone()), &data).unwrap();
            assert!((prof.lml(v) - direct).abs() <= 1e-8 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn single_candidate_grid_returns_it() {
        let data = Dataset::new(1, vec![vec![0.0], vec![1.0]], vec![1.0, 2.0]).unwrap();
        let search = SearchConfig {
            reference_length: 2.0,
            lengthscale_range: (0.5, 0.5),
            variance_range: (3.0, 3.0),
            lengthscale_points: 1,
            variance_points: 1,
            refine_steps: 20,
        };
        let got = optimize_hyperparameters(&data, &SignFlipGroup::identity(1), &search).unwrap();
        assert_relative_eq!(got.lengthscale, 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            got.variance,
            3.0 * variance_scale(data.y()),
            max_relative = 1e-15
        );
    }

    #[test]
    fn recovers_lengthscale_of_rbf_draw() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 30;
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
            .collect();
        let spec = KernelSpec::standard(p(1.0, 1.0), 2);
        let mut g = crate::kernel::gram(&x, &spec).unwrap();
        for i in 0..n {
            g[(i, i)] += 1e-8;
        }
        let l = g.cholesky().unwrap().l();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let y = (l * z).iter().cloned().collect();
        let data = Dataset::new(2, x, y).unwrap();
        let search = SearchConfig {
            lengthscale_points: 20,
            variance_points: 20,
            ..SearchConfig::with_reference_length(6.0 * 2f64.sqrt())
        };
        let got = optimize_hyperparameters(&data, &SignFlipGroup::identity(2), &search).unwrap();
        assert!(got.lengthscale > 0.5 && got.lengthscale < 2.0, "{got:?}");
    }

    #[test]
    fn search_is_deterministic_and_needs_two_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = random_data(&mut rng, 12, 2);
        let group = SignFlipGroup::all_flips(2);
        let search = SearchConfig::with_reference_length(8.5);
        let a = optimize_hyperparameters(&data, &group, &search).unwrap();
        let b = optimize_hyperparameters(&data, &group, &search).unwrap();
        assert_eq!(a, b);
        assert!(optimize_hyperparameters(&data.truncated(1), &group, &search).is_err());
    }
}
