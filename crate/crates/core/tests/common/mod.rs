//! Random expression trees shared by the property tests.
#![allow(dead_code)]

use poissym::exprcore::{diff, eval_num, normalize, Env, Expr, Func, Symbol};
use proptest::prelude::*;

pub const SYMS: [&str; 3] = ["x", "y", "z"];

pub fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        (1i64..=4, 2i64..=5).prop_map(|(n, d)| Expr::rational(n, d)),
        (0usize..3).prop_map(|i| Expr::sym(SYMS[i])),
    ]
}

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(8, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul),
            (inner.clone(), -2i64..=3).prop_map(|(b, k)| Expr::powi(b, k)),
            inner.clone().prop_map(Expr::neg),
            inner.clone().prop_map(|a| Expr::func(Func::Exp, Expr::mul(vec![Expr::rational(1, 4), a]))),
            (0usize..3).prop_map(|i| Expr::func(Func::Ln, Expr::sym(SYMS[i]))),
            (0usize..3).prop_map(|i| Expr::func(Func::Sin, Expr::sym(SYMS[i]))),
        ]
    })
}

pub fn env_at(p: [f64; 3]) -> Env {
    Env::new().bind("x", p[0]).bind("y", p[1]).bind("z", p[2])
}

pub fn points(seed: u64) -> Vec<[f64; 3]> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..10)
        .map(|_| [rng.gen_range(0.6..1.4), rng.gen_range(0.6..1.4), rng.gen_range(0.6..1.4)])
        .collect()
}

/// Normalizing twice changes nothing.
pub fn idempotent(e: &Expr) -> Result<(), String> {
    let once = normalize(e);
    let twice = normalize(&once);
    if once == twice {
        Ok(())
    } else {
        Err(format!("{e}: {once} then {twice}"))
    }
}

/// Symbolic derivative against a five point stencil, 1e-6 relative.
pub fn derivative_agrees(e: &Expr, which: usize, seed: u64) -> Result<(), String> {
    let s = Symbol::new(SYMS[which]);
    let Ok(d) = diff(e, &s) else { return Ok(()) };
    for p in points(seed) {
        let at = |h: f64| {
            let mut q = p;
            q[which] += h;
            eval_num(e, &env_at(q))
        };
        let stencil = |h: f64| -> Option<f64> {
            let v = [at(-2.0 * h).ok()?, at(-h).ok()?, at(h).ok()?, at(2.0 * h).ok()?];
            Some((v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h))
        };
        let (Some(fd), Some(fd_half)) = (stencil(1e-3), stencil(5e-4)) else { continue };
        let Ok(exact) = eval_num(&d, &env_at(p)) else { continue };
        let scale = 1.0f64.max(exact.abs());
        // Too close to a singularity for the stencil to be trusted.
        if (fd - fd_half).abs() > 1e-7 * scale {
            continue;
        }
        if (fd - exact).abs() > 1e-6 * scale {
            return Err(format!("{e} d/d{s}: fd {fd} exact {exact}"));
        }
    }
    Ok(())
}
