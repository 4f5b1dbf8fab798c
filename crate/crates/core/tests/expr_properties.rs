mod common;

use common::{arb_expr, env_at, points, SYMS};
use poissym::exprcore::{diff, normalize, eval_num, Expr, RatFn, Symbol};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn normalize_is_idempotent(e in arb_expr()) {
        common::idempotent(&e).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn derivative_matches_finite_differences(e in arb_expr(), which in 0usize..3, seed in any::<u64>()) {
        common::derivative_agrees(&e, which, seed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn derivative_is_linear(a in arb_expr(), b in arb_expr(), which in 0usize..3, al in -3i64..=3, be in -3i64..=3) {
        let s = Symbol::new(SYMS[which]);
        let combo = Expr::add(vec![Expr::mul(vec![Expr::int(al), a.clone()]), Expr::mul(vec![Expr::int(be), b.clone()])]);
        let (Ok(dc), Ok(da), Ok(db)) = (diff(&combo, &s), diff(&a, &s), diff(&b, &s)) else { return Ok(()); };
        let rhs = normalize(&Expr::add(vec![Expr::mul(vec![Expr::int(al), da]), Expr::mul(vec![Expr::int(be), db])]));
        prop_assert_eq!(normalize(&dc), rhs);
    }

    #[test]
    fn canonical_value_matches_tree(e in arb_expr(), seed in any::<u64>()) {
        let Ok(r) = RatFn::from_expr(&e) else { return Ok(()); };
        for p in points(seed) {
            let env = env_at(p);
            if let (Ok(a), Ok(b)) = (eval_num(&e, &env), r.eval(&env)) {
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{} vs {}: {} {}", e, r, a, b);
            }
        }
    }
}
