use cesaro::expr::{evaluate, parse, BinOp, Expr, Func, Params, ParseErrorKind};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0..1e6f64).prop_map(Expr::num),
        (0u32..1000).prop_map(|v| Expr::num(v as f64)),
        Just(Expr::Variable),
        Just(Expr::Pi),
        "[a-z][a-z0-9_]{0,3}"
            .prop_filter("reserved identifier", |s| s != "x"
                && s != "pi"
                && Func::from_name(s).is_none())
            .prop_map(Expr::Param),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let op = prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Pow)
    ];
    let func = (0..Func::ALL.len()).prop_map(|i| Func::ALL[i]);
    leaf().prop_recursive(5, 48, 2, move |inner| {
        prop_oneof![
            (op.clone(), inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::binary(o, a, b)),
            (func.clone(), inner.clone()).prop_map(|(f, a)| Expr::call(f, a)),
            inner.prop_map(Expr::negate),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_parse_round_trip(e in expr()) {
        let printed = e.to_string();
        let back = parse(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn parser_never_panics(s in "[-+*/^()x0-9a-z. ,]{0,24}") {
        let _ = parse(&s);
    }
}

#[test]
fn canonical_forms() {
    for (src, canon) in [
        ("2^3^2", "2^3^2"),
        ("(2^3)^2", "(2^3)^2"),
        ("-2^2", "-2^2"),
        ("(-2)^2", "(-2)^2"),
        ("a-(b-c)", "a - (b - c)"),
        ("(a-b)-c", "a - b - c"),
        ("1/(1+a*x^2)", "1/(1 + a*x^2)"),
    ] {
        let printed = parse(src).unwrap().to_string();
        let normalise = |s: &str| s.replace(' ', "");
        assert_eq!(normalise(&printed), normalise(canon), "{src}");
    }
}

#[test]
fn precedence_values() {
    let p = Params::new();
    let v = |s: &str| evaluate(&parse(s).unwrap(), 0.0, &p).unwrap();
    assert_eq!(v("2+3*4"), 14.0);
    assert_eq!(v("2^3^2"), 512.0);
    assert_eq!(v("-2^2"), -4.0);
    assert_eq!(v("(-2)^2"), 4.0);
}

#[test]
fn error_offsets() {
    let err = parse("1 + * 2").unwrap_err();
    assert_eq!(err.offset, 4);
    assert!(matches!(
        parse("(1+2").unwrap_err().kind,
        ParseErrorKind::Unbalanced
    ));
    assert!(matches!(
        parse("foo(1)").unwrap_err().kind,
        ParseErrorKind::UnknownFunction(_)
    ));
    assert!(matches!(parse("").unwrap_err().kind, ParseErrorKind::Empty));
}
