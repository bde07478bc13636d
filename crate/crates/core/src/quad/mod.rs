//! Globally adaptive 7/15-point Gauss–Kronrod quadrature and the limit
//! functional `J(f) = L ∫₀¹ α x^(α-1) f(x) dx`.
//!
//! Every node of the 15-point rule lies strictly inside its interval, so an
//! integrand is never sampled at `lo` or `hi`. This matters for integrands
//! such as `arctan(x)/(x(1+x))` which have a removable singularity at 0.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Params};
use crate::sums::Neumaier;

/// Maximum bisection depth of any subinterval.
pub const MAX_DEPTH: u32 = 60;

/// Maximum number of subintervals held at once.
pub const MAX_INTERVALS: usize = 10_000;

// Kronrod abscissae on [-1, 1] (positive half, descending). Odd indices are
// the 7-point Gauss nodes; the last entry is the centre.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tolerance not reached ({reason}); best estimate {} ± {}", best.value, best.error_estimate)]
    Accuracy {
        best: QuadResult,
        reason: &'static str,
    },
    #[error("integrand: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    // roundoff floor included in `error`
    floor: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.lo.total_cmp(&self.lo))
    }
}

/// One 15-point Kronrod estimate on [lo, hi] with its error estimate.
fn kronrod<F>(f: &mut F, lo: f64, hi: f64, depth: u32) -> Result<Segment, EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut pairs = [(0.0, 0.0); 7];

    for (j, pair) in pairs.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        *pair = (f1, f2);
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for (j, (f1, f2)) in pairs.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    error = error.max(floor);
    Ok(Segment {
        lo,
        hi,
        value,
        error,
        floor,
        depth,
    })
}

/// Integrates a closure over [lo, hi].
///
/// Stops when the summed error estimate is at most `tol · max(1, |value|)`,
/// or when it is entirely made of floating-point roundoff.
pub fn integrate_fn<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadError::InvalidArgument(format!(
            "need finite lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(QuadError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }

    let mut evaluations = 15u64;
    let first = kronrod(&mut f, lo, hi, 0)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut floor = first.floor;
    let mut heap = BinaryHeap::from([first]);

    let finish = |heap: BinaryHeap<Segment>, evaluations| {
        let mut segs = heap.into_vec();
        segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let value: Neumaier = segs.iter().map(|s| s.value).collect();
        let error: f64 = segs.iter().map(|s| s.error).sum();
        QuadResult {
            value: value.value(),
            error_estimate: error,
            evaluations,
        }
    };

    loop {
        if error <= tol * value.abs().max(1.0) || error <= 2.0 * floor {
            return Ok(finish(heap, evaluations));
        }
        let worst = *heap.peek().unwrap();
        let scale = worst.lo.abs().max(worst.hi.abs());
        let reason = if worst.depth >= MAX_DEPTH {
            Some("maximum subdivision depth reached")
        } else if worst.hi - worst.lo <= 1e3 * f64::EPSILON * scale {
            // nodes would round onto the endpoints
            Some("subinterval too small")
        } else if heap.len() >= MAX_INTERVALS {
            Some("too many subintervals")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(QuadError::Accuracy {
                best: finish(heap, evaluations),
                reason,
            });
        }

        heap.pop();
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod(&mut f, worst.lo, mid, worst.depth + 1)?;
        let right = kronrod(&mut f, mid, worst.hi, worst.depth + 1)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        floor += left.floor + right.floor - worst.floor;
        heap.push(left);
        heap.push(right);
    }
}

/// ∫ f(x) dx over [lo, hi] for an expression in `x`.
pub fn integrate(
    f: &Expr,
    params: &Params,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    let f = f.bind(params)?;
    integrate_fn(|x| f.eval(x), lo, hi, tol)
}

/// `J(f) = L ∫₀¹ α x^(α-1) f(x) dx`, computed as `L ∫₀¹ f(u^(1/α)) du`.
///
/// The substitution x = u^(1/α) absorbs the weight exactly, so the
/// integrand stays bounded when f is, even for α < 1. f is only sampled on
/// (0, 1].
pub fn limit_functional(
    f: &Expr,
    params: &Params,
    alpha: f64,
    mean: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(QuadError::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !mean.is_finite() {
        return Err(QuadError::InvalidArgument(format!(
            "mean value must be finite, got {mean}"
        )));
    }
    let f = f.bind(params)?;
    let inv = 1.0 / alpha;
    let scale = mean.abs();
    let inner_tol = if scale > 1.0 { tol / scale } else { tol };
    let r = integrate_fn(
        |u| f.eval(if alpha == 1.0 { u } else { u.powf(inv) }),
        0.0,
        1.0,
        inner_tol,
    )
    .map_err(|e| match e {
        QuadError::Accuracy { best, reason } => QuadError::Accuracy {
            best: scaled(best, mean),
            reason,
        },
        other => other,
    })?;
    Ok(scaled(r, mean))
}

fn scaled(r: QuadResult, mean: f64) -> QuadResult {
    QuadResult {
        value: mean * r.value,
        error_estimate: mean.abs() * r.error_estimate,
        ..r
    }
}

/// `∫₀¹ x^α log x dx = -1/(α+1)²`, in closed form. Diverges to -∞ for
/// α ≤ -1.
pub fn log_moment(alpha: f64) -> f64 {
    if alpha <= -1.0 {
        return f64::NEG_INFINITY;
    }
    -1.0 / ((alpha + 1.0) * (alpha + 1.0))
}
