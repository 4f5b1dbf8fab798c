//! Two-sided zero test: canonical form plus seeded numeric sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::canon::RatFn;
use super::eval::{eval_abs, eval_num, Env};
use super::expr::{Expr, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Zero,
    NonZero,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct ZeroTestPolicy {
    pub samples: usize,
    /// Absolute tolerance, scaled by the magnitude of the expression.
    pub tol: f64,
    pub seed: u64,
    pub ranges: BTreeMap<Symbol, (f64, f64)>,
    pub default_range: (f64, f64),
}

impl Default for ZeroTestPolicy {
    fn default() -> Self {
        ZeroTestPolicy {
            samples: 16,
            tol: 1e-9,
            seed: 0x5eed,
            ranges: BTreeMap::new(),
            default_range: (-1.0, 1.0),
        }
    }
}

impl ZeroTestPolicy {
    pub fn with_range(mut self, name: &str, lo: f64, hi: f64) -> Self {
        self.ranges.insert(Symbol::new(name), (lo, hi));
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn range(&self, s: &Symbol) -> (f64, f64) {
        self.ranges.get(s).copied().unwrap_or(self.default_range)
    }

    /// Draws one environment over `syms`, with a fresh generic realization.
    pub fn draw(&self, syms: &[Symbol], rng: &mut impl Rng) -> Env {
        let mut env = Env::new().with_generic_seed(rng.gen());
        for s in syms {
            let (lo, hi) = self.range(s);
            env.set(s, if hi > lo { rng.gen_range(lo..hi) } else { lo });
        }
        env
    }
}

#[derive(Debug, Clone)]
pub struct ZeroReport {
    pub verdict: Verdict,
    pub canonical_zero: bool,
    pub max_abs: f64,
    pub max_scaled: f64,
    pub samples_used: usize,
}

const ATTEMPTS: usize = 25;
const MARGIN: f64 = 100.0;
const HARD_CEILING: f64 = 1e-3;

fn sample<F>(policy: &ZeroTestPolicy, syms: &[Symbol], mut eval: F) -> (f64, f64, usize)
where
    F: FnMut(&Env) -> Option<(f64, f64)>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    let (mut max_abs, mut max_scaled, mut used) = (0.0f64, 0.0f64, 0);
    for _ in 0..policy.samples {
        for _ in 0..ATTEMPTS {
            let env = policy.draw(syms, &mut rng);
            if let Some((v, mag)) = eval(&env) {
                max_abs = max_abs.max(v.abs());
                max_scaled = max_scaled.max(v.abs() / mag.max(1.0));
                used += 1;
                break;
            }
        }
    }
    (max_abs, max_scaled, used)
}

fn decide(policy: &ZeroTestPolicy, canonical_zero: bool, max_abs: f64, max_scaled: f64, used: usize) -> Verdict {
    if max_scaled > MARGIN * policy.tol || (max_abs > HARD_CEILING && max_scaled > policy.tol) {
        return Verdict::NonZero;
    }
    if canonical_zero && max_scaled <= policy.tol && max_abs <= HARD_CEILING {
        return Verdict::Zero;
    }
    let _ = used;
    Verdict::Inconclusive
}

/// Full report for an expression tree: canonical form and sampling of the
/// tree as written.
pub fn zero_report(e: &Expr, policy: &ZeroTestPolicy) -> ZeroReport {
    let canonical_zero = RatFn::from_expr(e).map(|r| r.is_zero()).unwrap_or(false);
    let syms = e.free_symbols();
    let (max_abs, max_scaled, used) = sample(policy, &syms, |env| {
        let v = eval_num(e, env).ok()?;
        let mag = eval_abs(e, env).ok()?;
        Some((v, mag))
    });
    ZeroReport {
        verdict: decide(policy, canonical_zero, max_abs, max_scaled, used),
        canonical_zero,
        max_abs,
        max_scaled,
        samples_used: used,
    }
}

pub fn is_zero(e: &Expr, policy: &ZeroTestPolicy) -> Verdict {
    zero_report(e, policy).verdict
}

/// Zero test for an already canonical value. A literal zero needs no
/// sampling; otherwise sampling separates real residuals from identities
/// the canonical form cannot see.
pub fn rat_report(r: &RatFn, policy: &ZeroTestPolicy) -> ZeroReport {
    if r.is_zero() {
        return ZeroReport {
            verdict: Verdict::Zero,
            canonical_zero: true,
            max_abs: 0.0,
            max_scaled: 0.0,
            samples_used: 0,
        };
    }
    let syms = r.symbols();
    let (max_abs, max_scaled, used) = sample(policy, &syms, |env| {
        let v = r.eval(env).ok()?;
        let mag = r.eval_abs(env).ok()?;
        Some((v, mag))
    });
    ZeroReport {
        verdict: decide(policy, false, max_abs, max_scaled, used),
        canonical_zero: false,
        max_abs,
        max_scaled,
        samples_used: used,
    }
}

pub fn rat_is_zero(r: &RatFn, policy: &ZeroTestPolicy) -> Verdict {
    rat_report(r, policy).verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::{parse, SymbolTable};

    fn p(s: &str) -> Expr {
        parse(s, &SymbolTable::new(&["x", "y", "z"]).unwrap()).unwrap()
    }

    #[test]
    fn binomial_identity() {
        assert_eq!(is_zero(&p("(x+y)^2 - x^2 - 2*x*y - y^2"), &ZeroTestPolicy::default()), Verdict::Zero);
    }

    #[test]
    fn jets_commute() {
        assert_eq!(is_zero(&p("u_x*u_y - u_y*u_x"), &ZeroTestPolicy::default()), Verdict::Zero);
    }

    #[test]
    fn distinct_symbols() {
        assert_eq!(is_zero(&p("x - y"), &ZeroTestPolicy::default()), Verdict::NonZero);
    }

    #[test]
    fn trig_identity_is_not_certified() {
        let v = is_zero(&p("sin(x)^2 + cos(x)^2 - 1"), &ZeroTestPolicy::default());
        assert_eq!(v, Verdict::Inconclusive);
    }

    #[test]
    fn branch_mismatch_is_caught() {
        let v = is_zero(&p("sqrt(x^2) - x"), &ZeroTestPolicy::default());
        assert_eq!(v, Verdict::NonZero);
    }
}
