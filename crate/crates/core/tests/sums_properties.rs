use cesaro::arith::{sieve, ArithFn};
use cesaro::expr::{parse, Expr, Params};
use cesaro::sums::{cesaro_damping_check, riemann_sum, weighted_sum, WeightSpec};
use proptest::prelude::*;

fn e(src: &str) -> Expr {
    parse(src).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_in_f(c1 in -5.0..5.0f64, c2 in -5.0..5.0f64, n in 1u64..5000) {
        let phi = sieve(ArithFn::Phi, 5000).unwrap();
        let w = WeightSpec::phi();
        let mut p = Params::new();
        p.insert("c".into(), c1);
        p.insert("d".into(), c2);
        let f = e("sin(3*x)");
        let g = e("exp(-x)/(1+x)");
        let combo = e("c*sin(3*x) + d*(exp(-x)/(1+x))");
        let lhs = weighted_sum(&combo, &p, &w, Some(&phi), n).unwrap();
        let rhs = c1 * weighted_sum(&f, &p, &w, Some(&phi), n).unwrap()
            + c2 * weighted_sum(&g, &p, &w, Some(&phi), n).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn nonnegative_f_gives_nonnegative_sum(a in 0.0..10.0f64, n in 1u64..5000) {
        let sigma = sieve(ArithFn::Sigma, 5000).unwrap();
        let mut p = Params::new();
        p.insert("a".into(), a);
        let v = weighted_sum(&e("abs(sin(a*x))*x^2"), &p, &WeightSpec::sigma(), Some(&sigma), n).unwrap();
        prop_assert!(v >= 0.0);
    }
}

#[test]
fn thread_count_does_not_change_bits() {
    let n = 1 << 20;
    let phi = sieve(ArithFn::Phi, n).unwrap();
    let f = e("arctan(x)/(x*(1+x))");
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                weighted_sum(&f, &Params::new(), &WeightSpec::phi(), Some(&phi), n).unwrap()
            })
    };
    let one = run(1);
    for threads in [2, 4, 7] {
        assert_eq!(run(threads).to_bits(), one.to_bits(), "{threads} threads");
    }
}

#[test]
fn literal_sum_agrees() {
    // I_n for f = arctan(x)/(x(1+x)) is Σ arctan(k/n)/(n+k) · φ(k)/k
    let n = 20_000u64;
    let phi = sieve(ArithFn::Phi, n).unwrap();
    let v = weighted_sum(
        &e("arctan(x)/(x*(1+x))"),
        &Params::new(),
        &WeightSpec::phi(),
        Some(&phi),
        n,
    )
    .unwrap();
    let nf = n as f64;
    let literal: f64 = (1..=n)
        .map(|k| {
            let kf = k as f64;
            (kf / nf).atan() / (nf + kf) * phi.get(k) as f64 / kf
        })
        .sum();
    assert!((v - literal).abs() < 1e-12, "{v} vs {literal}");
}

#[test]
fn riemann_sums_of_powers() {
    for (beta, n) in [(0.5, 10_000u64), (2.0, 1000), (7.0, 100_000)] {
        let mut p = Params::new();
        p.insert("b".into(), beta);
        let v = riemann_sum(&e("x^b"), &p, n).unwrap();
        assert!(
            (v - 1.0 / (beta + 1.0)).abs() < 1.0 / n as f64,
            "beta={beta}"
        );
    }
}

#[test]
fn damping_inverse_sqrt() {
    let r = cesaro_damping_check(
        &e("1/sqrt(k)"),
        &Params::new(),
        2.0,
        &[1000, 10_000, 100_000],
    )
    .unwrap();
    let v = r.values();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    assert!(v[2] <= 0.01);
    assert!(r.note.is_none());

    let r = cesaro_damping_check(&e("1"), &Params::new(), 2.0, &[1000, 10_000]).unwrap();
    assert!(r.note.is_some());
}
