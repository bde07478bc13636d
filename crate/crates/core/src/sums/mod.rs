//! Finite sums: plain Riemann sums, weighted sums
//! `I_n(f) = n^(-α) Σ_{k≤n} f(k/n)·a_k`, and moment sums
//! `M_p(n) = n^(-(α+p)) Σ_{k≤n} k^p·a_k`.
//!
//! All sums use compensated accumulation over a fixed chunking of `1..=n`
//! and are bit-reproducible across runs and thread counts.

mod accum;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{ArithFn, ArithSource};
use crate::expr::{Bound, EvalError, Expr, Params};

pub use accum::{chunked_sum, Neumaier, CHUNK_LEN};

#[derive(Debug, Error)]
pub enum SumError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("weight kind '{kind}' needs a {func} table")]
    MissingTable { kind: &'static str, func: ArithFn },
    #[error("weight kind '{kind}' needs a {expected} table, got {found}")]
    WrongTable {
        kind: &'static str,
        expected: ArithFn,
        found: ArithFn,
    },
    #[error("table covers 1..={len}, but n = {needed}")]
    TooShort { len: u64, needed: u64 },
    #[error("f at k = {k}: {source}")]
    Eval { k: u64, source: EvalError },
    #[error("weight a_k at k = {k}: {source}")]
    Weight { k: u64, source: EvalError },
    #[error("sum is not finite")]
    NonFinite,
}

/// Which sequence a_k the weights come from.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightKind {
    /// a_k = φ(k)
    Phi,
    /// a_k = σ(k)
    Sigma,
    /// a_k = φ(k)/k
    PhiOverK,
    /// a_k given by an expression in `k`
    Synthetic(Expr),
}

impl WeightKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightKind::Phi => "phi",
            WeightKind::Sigma => "sigma",
            WeightKind::PhiOverK => "phi-over-k",
            WeightKind::Synthetic(_) => "synthetic",
        }
    }

    /// The arithmetic table this kind reads, if any.
    pub fn table_fn(&self) -> Option<ArithFn> {
        match self {
            WeightKind::Phi | WeightKind::PhiOverK => Some(ArithFn::Phi),
            WeightKind::Sigma => Some(ArithFn::Sigma),
            WeightKind::Synthetic(_) => None,
        }
    }

    /// Known (α, L) with n^(-α) Σ_{k≤n} a_k → L.
    pub fn default_exponent_and_mean(&self) -> Option<(f64, f64)> {
        match self {
            WeightKind::Phi => Some((2.0, 3.0 / (PI * PI))),
            WeightKind::Sigma => Some((2.0, PI * PI / 12.0)),
            WeightKind::PhiOverK => Some((1.0, 6.0 / (PI * PI))),
            WeightKind::Synthetic(_) => None,
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Synthetic(e) => write!(f, "synthetic({e})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Built-in kinds by name; synthetic weights are built with
/// [`WeightKind::Synthetic`] directly.
impl FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "phi" => Ok(WeightKind::Phi),
            "sigma" => Ok(WeightKind::Sigma),
            "phi-over-k" | "phi_over_k" | "phioverk" => Ok(WeightKind::PhiOverK),
            other => Err(format!(
                "unknown weight kind '{other}' (expected phi, sigma or phi-over-k)"
            )),
        }
    }
}

/// A weight sequence together with its growth exponent α > 0 and mean
/// value L.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub alpha: f64,
    pub mean: f64,
}

impl WeightSpec {
    pub fn new(kind: WeightKind, alpha: f64, mean: f64) -> Result<Self, SumError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(SumError::InvalidArgument(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !mean.is_finite() {
            return Err(SumError::InvalidArgument(format!(
                "mean value must be finite, got {mean}"
            )));
        }
        Ok(Self { kind, alpha, mean })
    }

    /// Built-in kind with its default (α, L). Fails for synthetic weights.
    pub fn with_defaults(kind: WeightKind) -> Result<Self, SumError> {
        let (alpha, mean) = kind.default_exponent_and_mean().ok_or_else(|| {
            SumError::InvalidArgument("synthetic weights need an explicit alpha and mean".into())
        })?;
        Self::new(kind, alpha, mean)
    }

    pub fn phi() -> Self {
        Self::with_defaults(WeightKind::Phi).unwrap()
    }

    pub fn sigma() -> Self {
        Self::with_defaults(WeightKind::Sigma).unwrap()
    }

    pub fn phi_over_k() -> Self {
        Self::with_defaults(WeightKind::PhiOverK).unwrap()
    }

    pub fn synthetic(expr: Expr, alpha: f64, mean: f64) -> Result<Self, SumError> {
        Self::new(WeightKind::Synthetic(expr), alpha, mean)
    }
}

/// Weights resolved against their data source.
enum Weights<'a> {
    Table(&'a dyn ArithSource),
    OverK(&'a dyn ArithSource),
    Sequence(Bound),
}

impl<'a> Weights<'a> {
    fn resolve(
        w: &WeightSpec,
        table: Option<&'a dyn ArithSource>,
        params: &Params,
        n: u64,
    ) -> Result<Self, SumError> {
        if n == 0 {
            return Err(SumError::InvalidArgument("n must be at least 1".into()));
        }
        let expected = match &w.kind {
            WeightKind::Synthetic(e) => {
                return e
                    .bind_as("k", params)
                    .map(Weights::Sequence)
                    .map_err(|source| SumError::Weight { k: 0, source });
            }
            kind => kind.table_fn().unwrap(),
        };
        let kind = w.kind.name();
        let table = table.ok_or(SumError::MissingTable {
            kind,
            func: expected,
        })?;
        if table.func() != expected {
            return Err(SumError::WrongTable {
                kind,
                expected,
                found: table.func(),
            });
        }
        if table.len() < n {
            return Err(SumError::TooShort {
                len: table.len(),
                needed: n,
            });
        }
        Ok(match w.kind {
            WeightKind::PhiOverK => Weights::OverK(table),
            _ => Weights::Table(table),
        })
    }

    fn fill(&self, first: u64, out: &mut [f64]) -> Result<(), SumError> {
        match self {
            Weights::Table(t) | Weights::OverK(t) => {
                let mut raw = vec![0u64; out.len()];
                t.fill(first, &mut raw);
                let over_k = matches!(self, Weights::OverK(_));
                for ((o, &v), k) in out.iter_mut().zip(&raw).zip(first..) {
                    *o = if over_k {
                        v as f64 / k as f64
                    } else {
                        v as f64
                    };
                }
            }
            Weights::Sequence(b) => {
                for (o, k) in out.iter_mut().zip(first..) {
                    *o = b
                        .eval(k as f64)
                        .map_err(|source| SumError::Weight { k, source })?;
                }
            }
        }
        Ok(())
    }
}

/// Σ_{k≤n} factor(k)·a_k, unnormalised, compensated and deterministic.
///
/// `params` binds parameters of a synthetic weight expression.
pub fn weighted_total<F>(
    w: &WeightSpec,
    table: Option<&dyn ArithSource>,
    params: &Params,
    n: u64,
    factor: F,
) -> Result<f64, SumError>
where
    F: Fn(u64) -> Result<f64, SumError> + Sync,
{
    let weights = Weights::resolve(w, table, params, n)?;
    let total = chunked_sum(n, |first, last, acc| {
        let mut a = vec![0.0; (last - first + 1) as usize];
        weights.fill(first, &mut a)?;
        for (k, a_k) in (first..=last).zip(a) {
            acc.add(factor(k)? * a_k);
        }
        Ok(())
    })?;
    if total.is_finite() {
        Ok(total)
    } else {
        Err(SumError::NonFinite)
    }
}

/// `max_{m≤n} m^(-α) Σ_{k≤m} a_k`, from one sequential scan of running
/// sums.
pub fn max_normalised_partial_sum(
    w: &WeightSpec,
    table: Option<&dyn ArithSource>,
    params: &Params,
    n: u64,
) -> Result<f64, SumError> {
    let weights = Weights::resolve(w, table, params, n)?;
    let mut running = Neumaier::default();
    let mut best = f64::NEG_INFINITY;
    let mut buf = vec![0.0; CHUNK_LEN.min(n) as usize];
    let mut first = 1;
    while first <= n {
        let len = (n - first + 1).min(CHUNK_LEN) as usize;
        weights.fill(first, &mut buf[..len])?;
        for (k, &a) in (first..).zip(&buf[..len]) {
            running.add(a);
            best = best.max(running.value() / (k as f64).powf(w.alpha));
        }
        first += len as u64;
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(SumError::NonFinite)
    }
}

/// `(1/n) Σ_{k≤n} f(k/n)`.
pub fn riemann_sum(f: &Expr, params: &Params, n: u64) -> Result<f64, SumError> {
    if n == 0 {
        return Err(SumError::InvalidArgument("n must be at least 1".into()));
    }
    let f = f
        .bind(params)
        .map_err(|source| SumError::Eval { k: 0, source })?;
    let nf = n as f64;
    let total = chunked_sum(n, |first, last, acc| {
        for k in first..=last {
            acc.add(
                f.eval(k as f64 / nf)
                    .map_err(|source| SumError::Eval { k, source })?,
            );
        }
        Ok(())
    })?;
    Ok(total / nf)
}

/// `I_n(f) = n^(-α) Σ_{k≤n} f(k/n)·a_k`.
///
/// f is sampled at k/n for k = 1..=n only, never at 0. `params` binds the
/// parameters of f and of a synthetic weight expression.
pub fn weighted_sum(
    f: &Expr,
    params: &Params,
    w: &WeightSpec,
    table: Option<&dyn ArithSource>,
    n: u64,
) -> Result<f64, SumError> {
    let f = f
        .bind(params)
        .map_err(|source| SumError::Eval { k: 0, source })?;
    let nf = n as f64;
    let total = weighted_total(w, table, params, n, |k| {
        f.eval(k as f64 / nf)
            .map_err(|source| SumError::Eval { k, source })
    })?;
    Ok(total / nf.powf(w.alpha))
}

/// `M_p(n) = n^(-(α+p)) Σ_{k≤n} k^p·a_k`.
pub fn moment_sum(
    p: u32,
    w: &WeightSpec,
    table: Option<&dyn ArithSource>,
    params: &Params,
    n: u64,
) -> Result<f64, SumError> {
    let exp = i32::try_from(p)
        .map_err(|_| SumError::InvalidArgument(format!("moment order {p} too large")))?;
    let total = weighted_total(w, table, params, n, |k| Ok((k as f64).powi(exp)))?;
    let v = total / (n as f64).powf(w.alpha + p as f64);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SumError::NonFinite)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingRow {
    pub n: u64,
    /// n^(-(β+1)) Σ_{k≤n} k^β λ_k
    pub value: f64,
    /// max |λ_k| over n/2 < k ≤ n
    pub tail_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingReport {
    pub beta: f64,
    pub rows: Vec<DampingRow>,
    /// Set when λ does not look like it tends to zero, in which case the
    /// damped sums are not expected to vanish either.
    pub note: Option<String>,
}

impl DampingReport {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// Damped sums `n^(-(β+1)) Σ_{k≤n} k^β λ_k` of a sequence λ given as an
/// expression in `k`, one per entry of `n_values`.
///
/// For λ_k → 0 these tend to zero. The sup of |λ_k| over the upper half of
/// each range is reported alongside; if it has not decreased between the
/// first and the last n, a note flags the input as not vanishing.
pub fn cesaro_damping_check(
    lambda: &Expr,
    params: &Params,
    beta: f64,
    n_values: &[u64],
) -> Result<DampingReport, SumError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(SumError::InvalidArgument(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(SumError::InvalidArgument(
            "n values must be non-empty and positive".into(),
        ));
    }
    let seq = lambda
        .bind_as("k", params)
        .map_err(|source| SumError::Weight { k: 0, source })?;
    let eval = |k: u64| {
        seq.eval(k as f64)
            .map_err(|source| SumError::Weight { k, source })
    };

    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let total = chunked_sum(n, |first, last, acc| {
            for k in first..=last {
                acc.add((k as f64).powf(beta) * eval(k)?);
            }
            Ok(())
        })?;
        let mut tail_sup: f64 = 0.0;
        for k in n / 2 + 1..=n {
            tail_sup = tail_sup.max(eval(k)?.abs());
        }
        rows.push(DampingRow {
            n,
            value: total / (n as f64).powf(beta + 1.0),
            tail_sup,
        });
    }

    let first = rows.first().unwrap().tail_sup;
    let last = rows.last().unwrap().tail_sup;
    let note = (rows.len() > 1 && last > 0.0 && last >= first).then(|| {
        format!(
            "lambda_k does not appear to tend to 0 (sup |lambda_k| on the upper half: {first} at n = {}, {last} at n = {}); the damped sums need not vanish",
            rows.first().unwrap().n,
            rows.last().unwrap().n
        )
    });
    Ok(DampingReport { beta, rows, note })
}
