use cesaro::arith::{sieve, ArithFn, TableStore};
use cesaro::sums::WeightSpec;
use cesaro::verify::{
    asymptotic_check, lipschitz_check, run_entries, run_entry, Catalog, ConvergenceReport, Verdict,
};

fn ladder() -> Vec<u64> {
    (16..=20).map(|e| 1u64 << e).collect()
}

#[test]
fn closed_forms_match_quadrature() {
    for e in Catalog::builtin().entries() {
        let q = e.limit_by_quadrature(1e-13).unwrap();
        assert!(
            (q.value - e.limit_value).abs() <= 1e-9,
            "{}: {} vs {}",
            e.id,
            q.value,
            e.limit_value
        );
    }
}

#[test]
fn every_entry_passes_and_its_error_shrinks() {
    let c = Catalog::builtin();
    let store = TableStore::new();
    let entries: Vec<_> = c.entries().iter().collect();
    let reports = run_entries(&entries, &ladder(), &store);
    for (e, r) in entries.iter().zip(reports) {
        let r = r.unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}: {:?}", e.id, r);
        assert!(r.rows.windows(2).all(|w| w[0].n < w[1].n));
        let first = r.rows.first().unwrap().abs_error;
        let last = r.rows.last().unwrap().abs_error;
        assert!(last < first || last == 0.0, "{}: {first} -> {last}", e.id);
    }
}

#[test]
fn reports_round_trip_through_serde() {
    let c = Catalog::builtin();
    let r = run_entry(
        c.get("eq3").unwrap(),
        &[10, 100, 1000],
        1e-2,
        &TableStore::new(),
    )
    .unwrap();
    let text = toml::to_string(&r).unwrap();
    let back: ConvergenceReport = toml::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn asymptotic_residual_shrinks_at_alpha_one() {
    let phi = sieve(ArithFn::Phi, 1_000_000).unwrap();
    let r = asymptotic_check(1.0, &[100_000, 1_000_000], &phi).unwrap();
    let (a, b) = (r.rows[0].residual.abs(), r.rows[1].residual.abs());
    assert!(b < a, "{a} -> {b}");
    assert!(b < 5e-3);
}

#[test]
fn chebyshev_path_respects_lipschitz_bound() {
    let c = Catalog::builtin();
    let e = c.get("eq1").unwrap();
    let store = TableStore::new();
    let phi = store.table(ArithFn::Phi, 1 << 16).unwrap();
    let rows = lipschitz_check(
        &e.f,
        &e.params,
        &WeightSpec::phi(),
        Some(&*phi),
        6,
        10_000,
        &[1 << 10, 1 << 13, 1 << 16],
    )
    .unwrap();
    for r in rows {
        assert!(r.holds(), "{r:?}");
        assert!(r.bound < 1e-3);
    }
}
