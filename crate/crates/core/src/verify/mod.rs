//! Convergence checks against known limits.
//!
//! [`run_entry`] evaluates `I_n(f)` of a catalog entry along a ladder of `n`,
//! extrapolates the sequence and compares it with the entry's closed form.
//! [`moment_ladder_check`] and [`asymptotic_check`] cover the moment limits
//! `α L/(α+p)` and the log-weighted totient asymptotic, and
//! [`lipschitz_check`] replays the polynomial-approximation bound
//! `|I_n(f) - I_n(P)| <= sup|f - P| · max_m m^(-α) Σ_{k≤m} a_k`.

mod catalog;

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithError, ArithFn, ArithSource, TableStore};
use crate::expr::{BinOp, EvalError, Expr, Params, ParseError};
use crate::quad::QuadError;
use crate::sums::{
    max_normalised_partial_sum, moment_sum, weighted_sum, weighted_total, SumError, WeightSpec,
};

pub use catalog::{Catalog, CatalogEntry, DEFAULT_TOLERANCE, LIMIT_CONSISTENCY};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("catalog: {0}")]
    CatalogFile(String),
    #[error("catalog entry '{id}': {reason}")]
    Catalog { id: String, reason: String },
    #[error("catalog entry '{id}', {field}: {source}")]
    Expression {
        id: String,
        field: &'static str,
        source: ParseError,
    },
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),
    #[error(transparent)]
    Sum(#[from] SumError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    /// Pass iff `error <= tolerance`; a tie passes.
    pub fn judge(error: f64, tolerance: f64) -> Self {
        if error <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub entry_id: String,
    pub rows: Vec<ConvergenceRow>,
    pub extrapolated_limit: f64,
    pub target: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    pub fn extrapolation_error(&self) -> f64 {
        (self.extrapolated_limit - self.target).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: u32,
    pub value: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub alpha: f64,
    pub rows: Vec<AsymptoticRow>,
}

fn check_ladder(ladder: &[u64]) -> Result<(), VerifyError> {
    if ladder.is_empty() {
        return Err(VerifyError::InvalidArgument("empty n ladder".into()));
    }
    if ladder[0] == 0 {
        return Err(VerifyError::InvalidArgument(
            "ladder values must be positive".into(),
        ));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(VerifyError::InvalidArgument(
            "ladder must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// The source backing `w` for indices up to `n`, if it needs one.
pub fn weight_source(
    w: &WeightSpec,
    n: u64,
    store: &TableStore,
) -> Result<Option<std::sync::Arc<dyn ArithSource>>, VerifyError> {
    Ok(match w.kind.table_fn() {
        Some(func) => Some(store.source(func, n)?),
        None => None,
    })
}

/// Runs `entry` along `ladder` and judges the extrapolated limit against
/// the entry's closed form with tolerance `tol`.
///
/// With fewer than three rungs the last value stands in for the
/// extrapolated limit.
pub fn run_entry(
    entry: &CatalogEntry,
    ladder: &[u64],
    tol: f64,
    store: &TableStore,
) -> Result<ConvergenceReport, VerifyError> {
    check_ladder(ladder)?;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(VerifyError::InvalidArgument(format!(
            "tolerance must be non-negative, got {tol}"
        )));
    }
    let n_max = *ladder.last().unwrap();
    let source = weight_source(&entry.weight, n_max, store)?;
    let target = entry.limit_value;

    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let value = weighted_sum(&entry.f, &entry.params, &entry.weight, source.as_deref(), n)?;
        rows.push(ConvergenceRow {
            n,
            value,
            abs_error: (value - target).abs(),
        });
    }

    let extrapolated_limit = if rows.len() >= 3 {
        let pts: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.value)).collect();
        extrapolate(&pts)?
    } else {
        rows.last().unwrap().value
    };
    let verdict = Verdict::judge((extrapolated_limit - target).abs(), tol);
    Ok(ConvergenceReport {
        entry_id: entry.id.clone(),
        rows,
        extrapolated_limit,
        target,
        tolerance: tol,
        verdict,
    })
}

/// [`run_entry`] for several entries in parallel, each with its own
/// tolerance. Results keep the input order.
pub fn run_entries(
    entries: &[&CatalogEntry],
    ladder: &[u64],
    store: &TableStore,
) -> Vec<Result<ConvergenceReport, VerifyError>> {
    entries
        .par_iter()
        .map(|e| run_entry(e, ladder, e.tolerance, store))
        .collect()
}

/// Least-squares fit of `value_n ≈ limit + (c₁ + c₂ log n)/n`, returning
/// the fitted limit.
///
/// Falls back to the last value when the design matrix is numerically rank
/// deficient.
pub fn extrapolate(rows: &[(u64, f64)]) -> Result<f64, VerifyError> {
    if rows.len() < 3 {
        return Err(VerifyError::InvalidArgument(format!(
            "extrapolation needs at least 3 rows, got {}",
            rows.len()
        )));
    }
    if rows.iter().any(|&(n, v)| n == 0 || !v.is_finite()) {
        return Err(VerifyError::InvalidArgument(
            "rows need n >= 1 and finite values".into(),
        ));
    }
    if rows.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(VerifyError::InvalidArgument(
            "rows must have strictly increasing n".into(),
        ));
    }

    // Fit the offsets from the last value so that constant input returns
    // that constant exactly.
    let last = rows.last().unwrap().1;
    let m = rows.len();
    let mut a = DMatrix::<f64>::zeros(m, 3);
    let mut b = DVector::<f64>::zeros(m);
    for (i, &(n, v)) in rows.iter().enumerate() {
        let nf = n as f64;
        a[(i, 0)] = 1.0;
        a[(i, 1)] = 1.0 / nf;
        a[(i, 2)] = nf.ln() / nf;
        b[i] = v - last;
    }
    let scales: Vec<f64> = (0..3).map(|j| a.column(j).amax()).collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / s);
    }

    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    if sv.min() <= 1e-12 * sv.max() {
        return Ok(last);
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| VerifyError::InvalidArgument(e.to_string()))?;
    Ok(last + coef[0] / scales[0])
}

/// `M_p(n)` for `p = 0..=p_max` next to the limits `α L/(α+p)`.
pub fn moment_ladder_check(
    w: &WeightSpec,
    table: Option<&dyn ArithSource>,
    params: &Params,
    p_max: u32,
    n: u64,
) -> Result<Vec<MomentRow>, VerifyError> {
    (0..=p_max)
        .map(|p| {
            let value = moment_sum(p, w, table, params, n)?;
            let target = w.alpha * w.mean / (w.alpha + p as f64);
            Ok(MomentRow { p, value, target })
        })
        .collect()
}

/// Right-hand side `6((1+α) log n − 1)/(π²(1+α)²)` of the log-weighted
/// totient asymptotic.
pub fn asymptotic_rhs(alpha: f64, n: u64) -> f64 {
    let s = 1.0 + alpha;
    6.0 * (s * (n as f64).ln() - 1.0) / (PI * PI * s * s)
}

/// Compares `n^(-(α+1)) Σ_{k≤n} k^(α-1) log k · φ(k)` with
/// [`asymptotic_rhs`] along `ladder`.
///
/// The k = 1 term is exactly zero (log 1 = 0), including at α = 0 where
/// k^(α-1) = 1/k.
pub fn asymptotic_check(
    alpha: f64,
    ladder: &[u64],
    phi: &dyn ArithSource,
) -> Result<AsymptoticReport, VerifyError> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(VerifyError::InvalidArgument(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    check_ladder(ladder)?;
    if phi.func() != ArithFn::Phi {
        return Err(ArithError::WrongFunction {
            expected: ArithFn::Phi,
            found: phi.func(),
        }
        .into());
    }
    let spec = WeightSpec::phi();
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let total = weighted_total(&spec, Some(phi), &Params::new(), n, |k| {
            Ok(if k == 1 {
                0.0
            } else {
                let kf = k as f64;
                kf.powf(alpha - 1.0) * kf.ln()
            })
        })?;
        let lhs = total / (n as f64).powf(alpha + 1.0);
        let rhs = asymptotic_rhs(alpha, n);
        rows.push(AsymptoticRow {
            n,
            lhs,
            rhs,
            residual: lhs - rhs,
        });
    }
    Ok(AsymptoticReport { alpha, rows })
}

/// Interpolating polynomial of `f` at the `degree + 1` Chebyshev nodes of
/// [0, 1], returned as an expression in Horner form.
///
/// The nodes are interior, so f need not be defined at 0 or 1.
pub fn chebyshev_proxy(f: &Expr, params: &Params, degree: usize) -> Result<Expr, VerifyError> {
    let f = f.bind(params)?;
    let count = degree + 1;
    let nodes: Vec<f64> = (0..count)
        .map(|j| ((j as f64 + 0.5) * PI / count as f64).cos())
        .collect();
    let values = nodes
        .iter()
        .map(|&t| f.eval(0.5 * (t + 1.0)))
        .collect::<Result<Vec<_>, _>>()?;

    // Chebyshev coefficients in t = 2x - 1
    let cheb: Vec<f64> = (0..count)
        .map(|m| {
            let s: f64 = nodes
                .iter()
                .zip(&values)
                .map(|(&t, &v)| v * (m as f64 * t.acos()).cos())
                .sum();
            let c = 2.0 * s / count as f64;
            if m == 0 {
                c / 2.0
            } else {
                c
            }
        })
        .collect();

    // monomial coefficients in x via T_{m+1} = 2t T_m - T_{m-1}, t = 2x - 1
    let mul_t = |p: &[f64]| {
        let mut out = vec![0.0; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            out[i + 1] += 2.0 * c;
            out[i] -= c;
        }
        out
    };
    let mut poly = vec![0.0; count];
    let mut prev = vec![1.0];
    let mut cur = vec![-1.0, 2.0];
    for (m, &c) in cheb.iter().enumerate() {
        let basis = match m {
            0 => prev.clone(),
            1 => cur.clone(),
            _ => {
                let mut next: Vec<f64> = mul_t(&cur).into_iter().map(|v| 2.0 * v).collect();
                for (i, &v) in prev.iter().enumerate() {
                    next[i] -= v;
                }
                prev = std::mem::replace(&mut cur, next);
                cur.clone()
            }
        };
        for (i, &b) in basis.iter().enumerate() {
            poly[i] += c * b;
        }
    }

    let coef = |c: f64| {
        if c < 0.0 {
            Expr::negate(Expr::num(-c))
        } else {
            Expr::num(c)
        }
    };
    let mut horner = coef(poly[degree]);
    for &c in poly[..degree].iter().rev() {
        horner = Expr::binary(
            BinOp::Add,
            coef(c),
            Expr::binary(BinOp::Mul, Expr::Variable, horner),
        );
    }
    Ok(horner)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRow {
    pub n: u64,
    pub value_f: f64,
    pub value_proxy: f64,
    pub difference: f64,
    pub bound: f64,
}

impl LipschitzRow {
    pub fn holds(&self) -> bool {
        self.difference <= self.bound
    }
}

/// Checks `|I_n(f) - I_n(P)| <= sup|f - P| · max_{m≤n_max} m^(-α) Σ_{k≤m} a_k`
/// along `ladder` for the degree-`degree` Chebyshev proxy P of f.
///
/// The sup norm is taken over a uniform grid of `grid` points in (0, 1].
pub fn lipschitz_check(
    f: &Expr,
    params: &Params,
    w: &WeightSpec,
    table: Option<&dyn ArithSource>,
    degree: usize,
    grid: usize,
    ladder: &[u64],
) -> Result<Vec<LipschitzRow>, VerifyError> {
    check_ladder(ladder)?;
    let proxy = chebyshev_proxy(f, params, degree)?;
    let fb = f.bind(params)?;
    let pb = proxy.bind(params)?;
    let mut sup: f64 = 0.0;
    for i in 1..=grid {
        let x = i as f64 / grid as f64;
        sup = sup.max((fb.eval(x)? - pb.eval(x)?).abs());
    }

    let n_max = *ladder.last().unwrap();
    let scale = max_normalised_partial_sum(w, table, params, n_max)?;
    ladder
        .iter()
        .map(|&n| {
            let value_f = weighted_sum(f, params, w, table, n)?;
            let value_proxy = weighted_sum(&proxy, params, w, table, n)?;
            Ok(LipschitzRow {
                n,
                value_f,
                value_proxy,
                difference: (value_f - value_proxy).abs(),
                bound: sup * scale,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve;
    use crate::expr::parse;

    #[test]
    fn extrapolate_examples() {
        let rows: Vec<(u64, f64)> = [100u64, 1000, 10_000]
            .iter()
            .map(|&n| (n, 0.5 + 1.0 / n as f64))
            .collect();
        assert!((extrapolate(&rows).unwrap() - 0.5).abs() < 1e-6);

        let rows = vec![(10, 7.0), (20, 7.0), (40, 7.0), (80, 7.0)];
        assert_eq!(extrapolate(&rows).unwrap(), 7.0);

        let rows: Vec<(u64, f64)> = [1_000u64, 10_000, 100_000, 1_000_000]
            .iter()
            .map(|&n| (n, 0.3 + (n as f64).ln() / n as f64))
            .collect();
        assert!((extrapolate(&rows).unwrap() - 0.3).abs() < 1e-5);
    }

    #[test]
    fn extrapolate_rejects_bad_rows() {
        assert!(extrapolate(&[(1, 1.0), (2, 1.0)]).is_err());
        assert!(extrapolate(&[(1, 1.0), (3, 1.0), (2, 1.0)]).is_err());
        assert!(extrapolate(&[(1, 1.0), (2, f64::NAN), (3, 1.0)]).is_err());
    }

    #[test]
    fn verdict_tie_passes() {
        assert_eq!(Verdict::judge(1e-3, 1e-3), Verdict::Pass);
        assert_eq!(Verdict::judge(1.0000001e-3, 1e-3), Verdict::Fail);
    }

    #[test]
    fn eq3_single_rung() {
        let c = Catalog::builtin();
        let store = TableStore::new();
        let r = run_entry(c.get("eq3").unwrap(), &[10], 1.0, &store).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].value, 0.32);
        assert!((r.rows[0].abs_error - (0.32 - 0.3039635509270133)).abs() < 1e-15);
        assert_eq!(r.extrapolated_limit, 0.32);
    }

    #[test]
    fn unit_entry_is_exact() {
        let c = Catalog::builtin();
        let store = TableStore::new();
        let r = run_entry(c.get("unit").unwrap(), &[1, 10, 100, 1000], 0.0, &store).unwrap();
        assert!(r
            .rows
            .iter()
            .all(|row| row.value == 1.0 && row.abs_error == 0.0));
        assert_eq!(r.extrapolated_limit, 1.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn run_entry_rejects_bad_ladders() {
        let c = Catalog::builtin();
        let store = TableStore::new();
        let e = c.get("eq3").unwrap();
        assert!(run_entry(e, &[], 1e-3, &store).is_err());
        assert!(run_entry(e, &[10, 10], 1e-3, &store).is_err());
        assert!(run_entry(e, &[0, 10], 1e-3, &store).is_err());
    }

    #[test]
    fn moment_ladder_small() {
        let phi = sieve(ArithFn::Phi, 10).unwrap();
        let rows =
            moment_ladder_check(&WeightSpec::phi(), Some(&phi), &Params::new(), 0, 10).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].value, 0.32);
        assert!((rows[0].target - 0.3039635509270133).abs() < 1e-16);

        let ones = WeightSpec::synthetic(parse("1").unwrap(), 1.0, 1.0).unwrap();
        let rows = moment_ladder_check(&ones, None, &Params::new(), 1, 1000).unwrap();
        assert!((rows[1].value - 1001.0 / 2000.0).abs() < 1e-15);
        assert_eq!(rows[1].target, 0.5);

        let rows =
            moment_ladder_check(&WeightSpec::phi(), Some(&phi), &Params::new(), 2, 10).unwrap();
        assert!((rows[2].target - 3.0 / (2.0 * PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn asymptotic_identity_alpha_one() {
        // log k = log n - log(n/k) splits the left side into two weighted sums
        let phi = sieve(ArithFn::Phi, 50_000).unwrap();
        let p = Params::new();
        for n in [10u64, 1000, 50_000] {
            let r = asymptotic_check(1.0, &[n], &phi).unwrap();
            let mean =
                weighted_sum(&parse("1").unwrap(), &p, &WeightSpec::phi(), Some(&phi), n).unwrap();
            let log_part = weighted_sum(
                &parse("-log(x)").unwrap(),
                &p,
                &WeightSpec::phi(),
                Some(&phi),
                n,
            )
            .unwrap();
            let split = (n as f64).ln() * mean - log_part;
            assert!((r.rows[0].lhs - split).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn asymptotic_alpha_zero_first_term() {
        let phi = sieve(ArithFn::Phi, 2).unwrap();
        let r = asymptotic_check(0.0, &[1], &phi).unwrap();
        assert_eq!(r.rows[0].lhs, 0.0);
        // n = 2: only k = 2 contributes, 2^-1 · log 2 · φ(2) / 2
        let r = asymptotic_check(0.0, &[2], &phi).unwrap();
        assert!((r.rows[0].lhs - 0.25 * std::f64::consts::LN_2).abs() < 1e-16);
        assert!(asymptotic_check(-0.5, &[2], &phi).is_err());
    }

    #[test]
    fn chebyshev_proxy_reproduces_polynomials() {
        let p = Params::new();
        let f = parse("1 - 2*x + 3*x^3").unwrap();
        let proxy = chebyshev_proxy(&f, &p, 4).unwrap();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            let a = crate::expr::evaluate(&f, x, &p).unwrap();
            let b = crate::expr::evaluate(&proxy, x, &p).unwrap();
            assert!((a - b).abs() < 1e-12, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn max_partial_sum_small() {
        let phi = sieve(ArithFn::Phi, 10).unwrap();
        // m^-2 Σφ is largest at m = 1 (value 1)
        let m =
            max_normalised_partial_sum(&WeightSpec::phi(), Some(&phi), &Params::new(), 10).unwrap();
        assert_eq!(m, 1.0);
    }
}
