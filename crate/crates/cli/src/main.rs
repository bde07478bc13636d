//! `cesaro`: sieve tables, weighted sums, quadrature and convergence checks
//! from the command line.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on usage,
//! parse or evaluation errors.

mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use cesaro::arith::{ArithFn, ArithSource, TableStore};
use cesaro::expr::{parse, Expr, Params};
use cesaro::quad::{integrate, limit_functional};
use cesaro::sums::{moment_sum, riemann_sum, weighted_sum, WeightKind, WeightSpec};
use cesaro::verify::{asymptotic_check, run_entries, Catalog, ConvergenceReport, Verdict};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use report::{Format, Report, Table};

/// Tolerance for the quadrature that produces reference values.
const TARGET_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(
    name = "cesaro",
    version,
    about = "Weighted arithmetic sums and their limits"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Directory for cached sieve tables; without it tables live in memory only.
    #[arg(long, global = true, env = "CESARO_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Parameter binding NAME=VALUE for f, weight expressions and means; repeatable.
    #[arg(long = "param", global = true, value_parser = parse_param)]
    params: Vec<(String, f64)>,

    /// Catalog file to use instead of the built-in one.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Values of φ or σ on a range of k.
    Sieve {
        #[arg(long, default_value = "phi")]
        func: ArithFn,
        /// Largest k.
        #[arg(long, value_parser = parse_count)]
        n: u64,
        /// First k to print (default: only k = n).
        #[arg(long, value_parser = parse_count)]
        from: Option<u64>,
    },
    /// I_n(f) = n^-α Σ f(k/n) a_k against the limit L ∫ α x^(α-1) f(x) dx.
    Wsum {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_count)]
        n: u64,
    },
    /// Moment sums n^-(α+p) Σ k^p a_k for p = 0..=p_max against αL/(α+p).
    Moment {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = 3)]
        p_max: u32,
        #[arg(long, value_parser = parse_count)]
        n: u64,
    },
    /// (1/n) Σ f(k/n) against ∫₀¹ f.
    Riemann {
        #[arg(long)]
        f: String,
        #[arg(long, value_parser = parse_count)]
        n: u64,
    },
    /// Adaptive Gauss–Kronrod quadrature of f over [lo, hi].
    Integrate {
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Convergence of catalog entries along a ladder of n.
    Verify {
        /// Entry id; repeatable. Default: every entry.
        #[arg(long = "entry")]
        entries: Vec<String>,
        /// "B^a..B^b" (one rung per exponent) or a comma-separated list.
        #[arg(long, default_value = "2^16..2^20")]
        ladder: String,
        /// Override the per-entry tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Print the catalog ids and exit.
        #[arg(long)]
        list: bool,
    },
    /// n^-(α+1) Σ k^(α-1) log k φ(k) against 6((1+α) log n - 1)/(π²(1+α)²).
    Asymptotic {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value = "10^4..10^6")]
        ladder: String,
    },
}

#[derive(Debug, Args)]
struct WeightArgs {
    /// phi, sigma, phi-over-k or synthetic.
    #[arg(long, default_value = "phi")]
    weight: String,
    /// a_k as an expression in k (synthetic weights).
    #[arg(long)]
    weight_expr: Option<String>,
    /// Growth exponent α (default per weight kind).
    #[arg(long)]
    alpha: Option<f64>,
    /// Mean value L as an expression (default per weight kind).
    #[arg(long)]
    mean: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(cesaro::Error),
}

impl<E: Into<cesaro::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Lib(e.into())
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("'{value}' is not a number"))?;
    if !value.is_finite() {
        return Err(format!("'{name}' must be finite"));
    }
    Ok((name.trim().to_string(), value))
}

/// A positive count written as an integer or as `B^e`.
fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((b, e)) => {
            let b: u64 = b.trim().parse().map_err(|_| format!("bad base in '{s}'"))?;
            let e: u32 = e
                .trim()
                .parse()
                .map_err(|_| format!("bad exponent in '{s}'"))?;
            b.checked_pow(e).ok_or_else(|| format!("'{s}' overflows"))?
        }
        None => s
            .parse()
            .map_err(|_| format!("'{s}' is not a positive integer"))?,
    };
    if v == 0 {
        return Err("counts must be positive".into());
    }
    Ok(v)
}

/// `B^a..B^b` → B^a, B^(a+1), …, B^b; otherwise a comma-separated list of
/// counts, which must be strictly increasing.
fn parse_ladder(s: &str) -> Result<Vec<u64>, Failure> {
    let s = s.trim();
    if s.is_empty() {
        return Err(usage("empty ladder"));
    }
    let ladder = if let Some((lo, hi)) = s.split_once("..") {
        let split = |p: &str| -> Result<(u64, u32), Failure> {
            let (b, e) = p
                .trim()
                .split_once('^')
                .ok_or_else(|| usage(format!("ladder bound '{p}' is not B^e")))?;
            let b = b
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad base in '{p}'")))?;
            let e = e
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad exponent in '{p}'")))?;
            Ok((b, e))
        };
        let ((b1, a), (b2, b)) = (split(lo)?, split(hi)?);
        if b1 != b2 || b1 < 2 {
            return Err(usage(format!(
                "ladder '{s}' needs one base of at least 2 on both ends"
            )));
        }
        (a..=b)
            .map(|e| {
                b1.checked_pow(e)
                    .ok_or_else(|| usage(format!("{b1}^{e} overflows")))
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        s.split(',')
            .map(|p| parse_count(p).map_err(usage))
            .collect::<Result<Vec<_>, _>>()?
    };
    if ladder.is_empty() {
        return Err(usage(format!("ladder '{s}' is empty")));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(format!("ladder '{s}' must be strictly increasing")));
    }
    Ok(ladder)
}

fn expr(src: &str) -> Result<Expr, Failure> {
    Ok(parse(src)?)
}

fn weight_spec(args: &WeightArgs, params: &Params) -> Result<WeightSpec, Failure> {
    let kind = match (args.weight.as_str(), &args.weight_expr) {
        ("synthetic", Some(src)) => WeightKind::Synthetic(expr(src)?),
        ("synthetic", None) => return Err(usage("--weight synthetic needs --weight-expr")),
        (_, Some(_)) => return Err(usage("--weight-expr is only valid with --weight synthetic")),
        (name, None) => name.parse::<WeightKind>().map_err(usage)?,
    };
    let defaults = kind.default_exponent_and_mean();
    let alpha = args
        .alpha
        .or(defaults.map(|d| d.0))
        .ok_or_else(|| usage("--alpha is required for synthetic weights"))?;
    let mean = match &args.mean {
        Some(src) => {
            let e = expr(src)?;
            if e.uses_variable() {
                return Err(usage("--mean must not depend on x"));
            }
            e.bind(params)?.eval(0.0)?
        }
        None => defaults
            .map(|d| d.1)
            .ok_or_else(|| usage("--mean is required for synthetic weights"))?,
    };
    Ok(WeightSpec::new(kind, alpha, mean)?)
}

fn source(
    w: &WeightSpec,
    store: &TableStore,
    n: u64,
) -> Result<Option<Arc<dyn ArithSource>>, Failure> {
    Ok(match w.kind.table_fn() {
        Some(func) => Some(store.source(func, n)?),
        None => None,
    })
}

fn catalog(cli: &Cli) -> Result<Catalog, Failure> {
    Ok(match &cli.catalog {
        Some(path) => Catalog::load(path)?,
        None => Catalog::builtin(),
    })
}

#[derive(Serialize)]
struct ValueRow {
    n: u64,
    value: f64,
    target: f64,
    abs_error: f64,
}

impl ValueRow {
    fn new(n: u64, value: f64, target: f64) -> Self {
        Self {
            n,
            value,
            target,
            abs_error: (value - target).abs(),
        }
    }

    fn report(&self) -> Report {
        let mut t = Table::new(&["n", "value", "target", "abs_error"]);
        t.push(vec![
            self.n.into(),
            self.value.into(),
            self.target.into(),
            self.abs_error.into(),
        ]);
        Report::new(self, t)
    }
}

#[derive(Serialize)]
struct SieveOut {
    func: ArithFn,
    n: u64,
    summatory: String,
    values: Vec<SieveRow>,
}

#[derive(Serialize)]
struct SieveRow {
    k: u64,
    value: u64,
}

#[derive(Serialize)]
struct MomentOut {
    p: u32,
    value: f64,
    target: f64,
    abs_error: f64,
}

/// The report and whether every verification in it passed.
fn run(cli: &Cli) -> Result<(Report, bool), Failure> {
    let params: Params = cli.params.iter().cloned().collect();
    let mut store = TableStore::new();
    if let Some(dir) = &cli.cache_dir {
        store = store.with_cache_dir(dir);
    }

    let report = match &cli.command {
        Command::Sieve { func, n, from } => {
            let from = from.unwrap_or(*n);
            if from > *n {
                return Err(usage(format!("--from {from} exceeds --n {n}")));
            }
            let table = store.table(*func, *n)?;
            let values: Vec<SieveRow> = (from..=*n)
                .map(|k| SieveRow {
                    k,
                    value: table.get(k),
                })
                .collect();
            let mut t = Table::new(&["k", "value"]);
            for r in &values {
                t.push(vec![r.k.into(), r.value.into()]);
            }
            let summatory = table.summatory(*n);
            let out = SieveOut {
                func: *func,
                n: *n,
                summatory: summatory.to_string(),
                values,
            };
            Report::new(&out, t)
                .with_preamble(vec![format!("sum of {func}(k) for k <= {n}: {summatory}")])
        }
        Command::Wsum { weight, f, n } => {
            let w = weight_spec(weight, &params)?;
            let f = expr(f)?;
            let table = source(&w, &store, *n)?;
            let value = weighted_sum(&f, &params, &w, table.as_deref(), *n)?;
            let target = limit_functional(&f, &params, w.alpha, w.mean, TARGET_TOL)?.value;
            ValueRow::new(*n, value, target).report()
        }
        Command::Moment { weight, p_max, n } => {
            let w = weight_spec(weight, &params)?;
            let table = source(&w, &store, *n)?;
            let mut rows = Vec::new();
            let mut t = Table::new(&["p", "value", "target", "abs_error"]);
            for p in 0..=*p_max {
                let value = moment_sum(p, &w, table.as_deref(), &params, *n)?;
                let target = w.alpha * w.mean / (w.alpha + p as f64);
                let row = MomentOut {
                    p,
                    value,
                    target,
                    abs_error: (value - target).abs(),
                };
                t.push(vec![
                    p.into(),
                    value.into(),
                    target.into(),
                    row.abs_error.into(),
                ]);
                rows.push(row);
            }
            Report::new(&rows, t).with_preamble(vec![format!("n = {n}")])
        }
        Command::Riemann { f, n } => {
            let f = expr(f)?;
            let value = riemann_sum(&f, &params, *n)?;
            let target = integrate(&f, &params, 0.0, 1.0, TARGET_TOL)?.value;
            ValueRow::new(*n, value, target).report()
        }
        Command::Integrate { f, lo, hi, tol } => {
            let f = expr(f)?;
            let r = integrate(&f, &params, *lo, *hi, *tol)?;
            let mut t = Table::new(&["value", "error_estimate", "evaluations"]);
            t.push(vec![
                r.value.into(),
                r.error_estimate.into(),
                r.evaluations.into(),
            ]);
            Report::new(&r, t)
        }
        Command::Verify {
            entries,
            ladder,
            tol,
            list,
        } => {
            let catalog = catalog(cli)?;
            if *list {
                let mut t = Table::new(&["id", "weight", "f", "limit"]);
                for e in catalog.entries() {
                    t.push(vec![
                        e.id.as_str().into(),
                        e.weight.kind.name().into(),
                        e.f_source.as_str().into(),
                        e.limit_source.as_str().into(),
                    ]);
                }
                let ids: Vec<&str> = catalog.ids().collect();
                return Ok((Report::new(&ids, t), true));
            }
            let ladder = parse_ladder(ladder)?;
            if let Some(t) = tol {
                if !(t.is_finite() && *t >= 0.0) {
                    return Err(usage("--tol must be non-negative"));
                }
            }
            let chosen: Vec<_> = if entries.is_empty() {
                catalog.entries().iter().collect()
            } else {
                entries
                    .iter()
                    .map(|id| {
                        catalog
                            .get(id)
                            .ok_or_else(|| usage(format!("unknown catalog entry '{id}'")))
                    })
                    .collect::<Result<_, _>>()?
            };
            let reports: Vec<ConvergenceReport> = match tol {
                Some(t) => {
                    let tolerant: Vec<_> = chosen
                        .iter()
                        .map(|e| {
                            let mut e = (*e).clone();
                            e.tolerance = *t;
                            e
                        })
                        .collect();
                    run_entries(&tolerant.iter().collect::<Vec<_>>(), &ladder, &store)
                }
                None => run_entries(&chosen, &ladder, &store),
            }
            .into_iter()
            .collect::<Result<_, _>>()?;
            let passed = reports.iter().all(|r| r.verdict == Verdict::Pass);
            return Ok((verify_report(&reports), passed));
        }
        Command::Asymptotic { alpha, ladder } => {
            let ladder = parse_ladder(ladder)?;
            let phi = store.source(ArithFn::Phi, *ladder.last().unwrap())?;
            let r = asymptotic_check(*alpha, &ladder, &*phi)?;
            let mut t = Table::new(&["n", "lhs", "rhs", "residual"]);
            for row in &r.rows {
                t.push(vec![
                    row.n.into(),
                    row.lhs.into(),
                    row.rhs.into(),
                    row.residual.into(),
                ]);
            }
            Report::new(&r, t).with_preamble(vec![format!("alpha = {alpha}")])
        }
    };
    Ok((report, true))
}

fn verify_report(reports: &[ConvergenceReport]) -> Report {
    let mut t = Table::new(&[
        "entry",
        "n",
        "value",
        "abs_error",
        "extrapolated",
        "target",
        "tolerance",
        "verdict",
    ]);
    let mut preamble = Vec::new();
    for r in reports {
        for row in &r.rows {
            t.push(vec![
                r.entry_id.as_str().into(),
                row.n.into(),
                row.value.into(),
                row.abs_error.into(),
                r.extrapolated_limit.into(),
                r.target.into(),
                r.tolerance.into(),
                r.verdict.to_string().into(),
            ]);
        }
        preamble.push(format!(
            "{}: {} (extrapolated {:?}, target {:?}, |difference| {:e} vs tolerance {:e})",
            r.entry_id,
            r.verdict,
            r.extrapolated_limit,
            r.target,
            r.extrapolation_error(),
            r.tolerance
        ));
    }
    Report::new(&reports, t).with_preamble(preamble)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("cesaro: usage: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("cesaro: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok((report, passed)) => {
            let mut out = std::io::stdout().lock();
            if out
                .write_all(report.render(cli.format).as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("cesaro: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders() {
        assert_eq!(parse_ladder("2^3..2^6").unwrap(), vec![8, 16, 32, 64]);
        assert_eq!(
            parse_ladder("10^4..10^7").unwrap(),
            vec![10_000, 100_000, 1_000_000, 10_000_000]
        );
        assert_eq!(parse_ladder("10, 100,2^10").unwrap(), vec![10, 100, 1024]);
        for bad in [
            "", " ", "2^5..2^3", "2^3..3^4", "10,10", "0,1", "1^1..1^3", "x",
        ] {
            assert!(parse_ladder(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn counts_and_params() {
        assert_eq!(parse_count("1048576").unwrap(), 1 << 20);
        assert_eq!(parse_count("2^20").unwrap(), 1 << 20);
        assert!(parse_count("0").is_err());
        assert!(parse_count("2^70").is_err());
        assert_eq!(parse_param("a=0.5").unwrap(), ("a".to_string(), 0.5));
        assert!(parse_param("a").is_err());
        assert!(parse_param("a=inf").is_err());
    }
}
