use std::sync::Arc;

use proptest::prelude::*;
use warpcurv::expr::{BinOp, Func, Node, ScalarExpr};
use warpcurv::jet::{Elementary, Jet};

fn jet(dim: usize, order: usize) -> impl Strategy<Value = Jet> {
    let len = warpcurv::jet::layout(dim, order).len();
    prop::collection::vec(-2.0f64..2.0, len)
        .prop_map(move |c| Jet::from_coeffs(dim, order, c).unwrap())
}

fn triple() -> impl Strategy<Value = (Jet, Jet, Jet)> {
    (1usize..=3, 0usize..=3).prop_flat_map(|(d, o)| (jet(d, o), jet(d, o), jet(d, o)))
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

fn with_value(j: Jet, v: f64) -> Jet {
    j.add_scalar(v - j.value())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws((a, b, c) in triple()) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(close(&ab, &b.mul(&a).unwrap(), 1e-13));
        let left = ab.mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
        let dist = a.mul(&b.add(&c).unwrap()).unwrap();
        let expanded = ab.add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&dist, &expanded, 1e-12));
        prop_assert!(close(&a.sub(&a).unwrap(), &a.scale(0.0), 0.0));
    }

    #[test]
    fn reciprocal_inverts((a, _, _) in triple(), v in prop_oneof![-3.0f64..-0.5, 0.5f64..3.0]) {
        let a = with_value(a, v);
        let one = a.mul(&a.recip().unwrap()).unwrap();
        let expected = Jet::constant(1.0, a.dim(), a.order()).unwrap();
        prop_assert!(close(&one, &expected, 1e-11));
    }

    #[test]
    fn exp_log_round_trip((a, _, _) in triple(), v in 0.3f64..3.0) {
        let a = with_value(a, v);
        let back = a.compose(Elementary::Log).unwrap().compose(Elementary::Exp).unwrap();
        prop_assert!(close(&back, &a, 1e-11));
        let s = a.compose(Elementary::Sin).unwrap();
        let c = a.compose(Elementary::Cos).unwrap();
        let pyth = s.mul(&s).unwrap().add(&c.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&pyth, &Jet::constant(1.0, a.dim(), a.order()).unwrap(), 1e-12));
    }

    #[test]
    fn integer_powers_agree_with_products((a, _, _) in triple(), v in 0.5f64..2.0, n in -3i64..=4) {
        let a = with_value(a, v);
        let mut expected = Jet::constant(1.0, a.dim(), a.order()).unwrap();
        let base = if n < 0 { a.recip().unwrap() } else { a.clone() };
        for _ in 0..n.unsigned_abs() {
            expected = expected.mul(&base).unwrap();
        }
        prop_assert!(close(&a.powi(n).unwrap(), &expected, 1e-11));
    }
}

fn node(depth: u32) -> BoxedStrategy<Node> {
    let leaf = prop_oneof![
        (0u32..2000).prop_map(|k| Node::Num(k as f64 / 100.0)),
        (0usize..3).prop_map(Node::Coord),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let sub = node(depth - 1);
    prop_oneof![
        2 => leaf,
        1 => sub.clone().prop_map(|a| Node::Neg(Box::new(a))),
        3 => (
            prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)],
            sub.clone(),
            sub.clone()
        )
            .prop_map(|(op, a, b)| Node::Binary(op, Box::new(a), Box::new(b))),
        1 => (
            prop_oneof![
                Just(Func::Sin), Just(Func::Cos), Just(Func::Exp), Just(Func::Log),
                Just(Func::Tanh), Just(Func::Sqrt), Just(Func::Cosh)
            ],
            sub
        )
            .prop_map(|(f, a)| Node::Call(f, Box::new(a))),
    ]
    .boxed()
}

fn chart() -> Arc<[String]> {
    Arc::from(vec!["x".to_string(), "y".to_string(), "z".to_string()])
}

fn same_value(a: Result<f64, impl std::fmt::Debug>, b: Result<f64, impl std::fmt::Debug>) -> bool {
    match (a, b) {
        (Ok(x), Ok(y)) => x == y || (x.is_nan() && y.is_nan()) || (x - y).abs() <= 1e-12 * x.abs().max(y.abs()),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn print_parse_round_trip(root in node(4), p in prop::array::uniform3(-1.5f64..1.5)) {
        let e = ScalarExpr::from_node(root, chart());
        let text = e.to_string();
        let back = ScalarExpr::parse(&text, &chart()).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        prop_assert!(same_value(e.eval(&p), back.eval(&p)), "{}", text);
    }

    #[test]
    fn jet_value_and_gradient_match_evaluation(root in node(3), p in prop::array::uniform3(-1.5f64..1.5)) {
        let e = ScalarExpr::from_node(root, chart());
        let (Ok(v), Ok(j)) = (e.eval(&p), e.eval_jet(&p, 1)) else { return Ok(()) };
        prop_assume!(v.is_finite() && j.is_finite());
        prop_assert!((j.value() - v).abs() <= 1e-12 * v.abs().max(1.0));
        for k in 0..3 {
            let h = 1e-5;
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            let (Ok(fa), Ok(fb)) = (e.eval(&a), e.eval(&b)) else { return Ok(()) };
            let fd = (fa - fb) / (2.0 * h);
            prop_assume!(fd.abs() < 1e4);
            let roundoff = 1e-15 * fa.abs().max(fb.abs()) / h;
            prop_assert!((j.d1(k) - fd).abs() <= 1e-4 * fd.abs().max(1.0) + roundoff, "{} d{}: {} vs {}", e, k, j.d1(k), fd);
        }
    }
}

#[test]
fn jet_second_derivatives_of_a_known_function() {
    let e = ScalarExpr::parse("exp(x*y) + sin(z)^2", &["x", "y", "z"]).unwrap();
    let p = [0.3, -0.7, 0.4];
    let j = e.eval_jet(&p, 3).unwrap();
    let exy = (p[0] * p[1]).exp();
    assert!((j.partial(&[1, 1, 0]).unwrap() - exy * (1.0 + p[0] * p[1])).abs() < 1e-13);
    assert!((j.partial(&[2, 0, 0]).unwrap() - p[1] * p[1] * exy).abs() < 1e-13);
    assert!((j.partial(&[0, 0, 2]).unwrap() - 2.0 * (2.0 * p[2]).cos()).abs() < 1e-13);
    assert!((j.partial(&[0, 0, 3]).unwrap() + 4.0 * (2.0 * p[2]).sin()).abs() < 1e-12);
}
