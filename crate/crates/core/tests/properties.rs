use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hysmc::bltl::{check, horizon, to_nnf, Formula, StateTrace};
use hysmc::expr::{parse_expr, BinaryOp, Expr, SymbolKind, SymbolTable, UnaryOp};
use hysmc::flow::{CompiledSystem, FlowConfig};
use hysmc::model::{guard_sat, parse_model, Guard};
use hysmc::oracle::{brute_force_bltl, random_formula, random_trace};
use hysmc::smc::sample_size;

fn symbols() -> SymbolTable {
    SymbolTable::new()
        .with("x", SymbolKind::Variable)
        .with("y", SymbolKind::Variable)
        .with("k", SymbolKind::Parameter)
        .with("stim", SymbolKind::Input)
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0..1e3f64).prop_map(Expr::Const),
        Just(Expr::Const(0.5)),
        Just(Expr::Var("x".into())),
        Just(Expr::Var("y".into())),
        Just(Expr::Param("k".into())),
        Just(Expr::Input("stim".into())),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    let unary = prop_oneof![
        Just(UnaryOp::Neg),
        Just(UnaryOp::Exp),
        Just(UnaryOp::Ln),
        Just(UnaryOp::Tanh),
        Just(UnaryOp::Sqrt),
        Just(UnaryOp::Abs),
    ];
    let binary = prop_oneof![
        Just(BinaryOp::Add),
        Just(BinaryOp::Sub),
        Just(BinaryOp::Mul),
        Just(BinaryOp::Div),
        Just(BinaryOp::Pow),
        Just(BinaryOp::Min),
        Just(BinaryOp::Max),
    ];
    leaf().prop_recursive(4, 32, 3, move |inner| {
        prop_oneof![
            (unary.clone(), inner.clone()).prop_map(|(op, a)| Expr::unary(op, a)),
            (binary.clone(), inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, a, b)| Expr::select(c, a, b)),
        ]
    })
}

fn guard() -> impl Strategy<Value = Guard> {
    let atom = (0..2usize, -10.0..10.0f64, any::<bool>()).prop_map(|(var, bound, lower)| {
        if lower {
            Guard::Lower { var, bound }
        } else {
            Guard::Upper { var, bound }
        }
    });
    atom.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Guard::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Guard::or(a, b)),
        ]
    })
}

fn atoms(g: &Guard, out: &mut Vec<(usize, f64)>) {
    match g {
        Guard::Lower { var, bound } | Guard::Upper { var, bound } => out.push((*var, *bound)),
        Guard::And(a, b) | Guard::Or(a, b) => {
            atoms(a, out);
            atoms(b, out);
        }
    }
}

fn formula_and_trace() -> impl Strategy<Value = (Formula, StateTrace)> {
    (any::<u64>(), 0..=3usize, 1..=8usize).prop_map(|(seed, depth, len)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (random_formula(&mut rng, depth), random_trace(&mut rng, len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expr_print_parse_round_trip(e in expr()) {
        let text = e.to_string();
        let back = parse_expr(&text, &symbols()).unwrap();
        prop_assert_eq!(back, e, "{}", text);
    }

    #[test]
    fn expr_eval_never_returns_nan(e in expr(), x in -5.0..5.0f64, y in -5.0..5.0f64, k in -5.0..5.0f64) {
        let env = |name: &str| match name {
            "x" => Some(x),
            "y" => Some(y),
            "k" => Some(k),
            "stim" => Some(1.0),
            _ => None,
        };
        if let Ok(v) = e.eval(&env) {
            prop_assert!(v.is_finite());
        }
    }

    #[test]
    fn guards_are_open(g in guard(), other in -10.0..10.0f64) {
        let mut list = Vec::new();
        atoms(&g, &mut list);
        for (var, bound) in list {
            let lower = Guard::Lower { var, bound };
            let upper = Guard::Upper { var, bound };
            let mut v = vec![other; 2];
            v[var] = bound;
            prop_assert!(!guard_sat(&lower, &v));
            prop_assert!(!guard_sat(&upper, &v));
        }
    }

    #[test]
    fn nnf_preserves_semantics((f, tr) in formula_and_trace()) {
        let nnf = to_nnf(&f);
        prop_assert!(nnf.is_nnf());
        if tr.values.len() > horizon(&f) {
            prop_assert_eq!(check(&f, &tr, 0).unwrap(), check(&nnf, &tr, 0).unwrap());
        }
        prop_assert_eq!(brute_force_bltl(&f, &tr), brute_force_bltl(&nnf, &tr));
    }

    #[test]
    fn verdict_ignores_positions_past_horizon(seed in any::<u64>(), depth in 0..=3usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, depth);
        let hz = horizon(&f);
        let base = random_trace(&mut rng, hz + 1);
        let mut longer = base.clone();
        let tail = random_trace(&mut rng, 4);
        longer.labels.extend(tail.labels);
        longer.values.extend(tail.values);
        prop_assert_eq!(check(&f, &base, 0).unwrap(), check(&f, &longer, 0).unwrap());
    }

    #[test]
    fn negation_is_consistent((f, tr) in formula_and_trace()) {
        let hz = horizon(&f);
        let n = tr.values.len();
        for j in 0..n.saturating_sub(hz) {
            let a = check(&f, &tr, j).unwrap();
            let b = check(&Formula::not(f.clone()), &tr, j).unwrap();
            prop_assert!(a != b);
        }
    }

    #[test]
    fn eventually_is_monotone_in_bound((f, tr) in formula_and_trace(), k in 1..4usize) {
        let weak = Formula::eventually(k, f.clone());
        let strong = Formula::eventually(k + 1, f);
        if tr.values.len() > horizon(&strong) && check(&weak, &tr, 0).unwrap() {
            prop_assert!(check(&strong, &tr, 0).unwrap());
        }
    }

    #[test]
    fn sample_size_monotone(d1 in 0.001..0.5f64, d2 in 0.001..0.5f64, a1 in 0.001..0.5f64, a2 in 0.001..0.5f64) {
        let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (al, ah) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        prop_assert!(sample_size(dh, al).unwrap() <= sample_size(dl, al).unwrap());
        prop_assert!(sample_size(dl, al).unwrap() >= sample_size(dl, ah).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_semigroup(a in 1usize..10, b in 1usize..10, x0 in -1.0..1.0f64, y0 in -1.0..1.0f64) {
        // t1 and t2 land on substep boundaries of a 20-substep grid
        let h = parse_model(
            "delta 1\nhorizon 1\n[variables]\nx y\n[init]\ndistribution = uniform\nx = (0, 1)\ny = (0, 1)\n\
             [modes]\nmode q\n  ode x = y\n  ode y = -x - 0.1 * y\n",
        )
        .unwrap();
        let sys = CompiledSystem::new(&h).unwrap();
        let cfg = FlowConfig { substeps: 20 };
        let t1 = a as f64 / 20.0;
        let t2 = b as f64 / 20.0;
        let direct = sys.flow(0, t1 + t2, &[x0, y0], 0.0, cfg).unwrap();
        let mid = sys.flow(0, t1, &[x0, y0], 0.0, cfg).unwrap();
        let composed = sys.flow(0, t2, &mid, 0.0, cfg).unwrap();
        for (p, q) in direct.iter().zip(&composed) {
            prop_assert!((p - q).abs() < 1e-9, "{} vs {}", p, q);
        }
    }
}
