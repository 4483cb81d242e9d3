//! Adaptive Gauss–Kronrod quadrature used as the reference oracle for the
//! closed-form embeddings and for ground-truth integrals of the test
//! integrands.
//!
//! The 1D driver is a globally adaptive G7/K15 scheme: the interval with the
//! largest error estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol · |I|)`. Error estimates follow the usual
//! QUADPACK heuristic, which is conservative for smooth integrands. 2D
//! integrals over rectangles are computed by nesting the 1D driver.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [-1, 1] (non-negative half, descending).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the 7-point rule (nodes are `XGK[1], XGK[3], XGK[5], XGK[7]`).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand {
                point: vec![x],
                value: v,
            })
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "quadrature bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult {
            value: -r.value,
            ..r
        });
    }

    let first = gk15(&mut f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_abs = first.abs_value;
    // Errors at the roundoff floor of the rule cannot be reduced further.
    let target = |total: f64, total_abs: f64| {
        opts.abs_tol
            .max(opts.rel_tol * total.abs())
            .max(100.0 * f64::EPSILON * total_abs)
    };
    let mut heap = BinaryHeap::from([first]);
    let mut subdivisions = 0;
    // Bisection stops helping once segments approach machine resolution; a
    // segment that small is retired with its error left in the total.
    let mut retired_err = 0.0;

    while total_err > target(total, total_abs) {
        let Some(worst) = heap.pop() else { break };
        if subdivisions >= opts.max_subdivisions {
            return Err(Error::QuadratureFailure {
                estimate: total,
                error: total_err,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a) <= 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(1.0) {
            retired_err += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        subdivisions += 1;
        heap.push(left);
        heap.push(right);
        total = heap.iter().map(|s| s.value).sum();
        total_err = heap.iter().map(|s| s.error).sum::<f64>() + retired_err;
        total_abs = heap.iter().map(|s| s.abs_value).sum();
    }
    if total_err > target(total, total_abs) {
        return Err(Error::QuadratureFailure {
            estimate: total,
            error: total_err,
            subdivisions,
        });
    }
    Ok(QuadResult {
        value: total,
        error: total_err,
        subdivisions,
    })
}

/// Integrates `f(x, y)` over `[ax, bx] × [ay, by]` by nesting the 1D driver.
/// The inner integrals are solved to a tighter tolerance than the outer one.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    opts: &QuadOptions,
) -> Result<QuadResult> {
    let inner = QuadOptions {
        rel_tol: (opts.rel_tol * 1e-2).max(1e-15),
        abs_tol: opts.abs_tol * 1e-2,
        ..*opts
    };
    let mut inner_err: Option<Error> = None;
    let outer = integrate(
        |x| {
            if inner_err.is_some() {
                return 0.0;
            }
            match integrate(|y| f(x, y), ay, by, &inner) {
                Ok(r) => r.value,
                Err(e) => {
                    inner_err = Some(e);
                    0.0
                }
            }
        },
        ax,
        bx,
        opts,
    );
    if let Some(e) = inner_err {
        return Err(e);
    }
    outer
}

/// Integrates over a rectangle in 1 or 2 dimensions.
pub fn integrate_box<F: Fn(&[f64]) -> f64>(
    f: F,
    lower: &[f64],
    upper: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult> {
    match (lower, upper) {
        ([a], [b]) => integrate(|x| f(&[x]), *a, *b, opts),
        ([ax, ay], [bx, by]) => integrate_2d(|x, y| f(&[x, y]), (*ax, *bx), (*ay, *by), opts),
        _ => Err(Error::InvalidInput(format!(
            "box quadrature supports 1 or 2 dimensions, got {}",
            lower.len()
        ))),
    }
}
