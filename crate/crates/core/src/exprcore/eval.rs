//! Floating-point evaluation.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::canon::pow_f64;
use super::expr::{Expr, Node, Symbol};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("generic function `{0}` has no realization")]
    UnboundGeneric(String),
    #[error("non-finite result")]
    NonFinite,
}

/// Symbol bindings plus an optional pseudo-random realization of generic
/// functions: each `(name, order, argument)` jet value is an independent
/// hash of the seed, so `F`, `f`, `fp` at one point are unrelated numbers.
#[derive(Debug, Clone, Default)]
pub struct Env {
    vals: HashMap<Symbol, f64>,
    generic_seed: Option<u64>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with_generic_seed(mut self, seed: u64) -> Self {
        self.generic_seed = Some(seed);
        self
    }

    pub fn set(&mut self, s: &Symbol, v: f64) {
        self.vals.insert(s.clone(), v);
    }

    pub fn bind(mut self, name: &str, v: f64) -> Self {
        self.vals.insert(Symbol::new(name), v);
        self
    }

    pub fn get(&self, s: &Symbol) -> Result<f64, EvalError> {
        self.vals
            .get(s)
            .copied()
            .ok_or_else(|| EvalError::Unbound(s.name().to_string()))
    }

    pub fn generic(&self, base: &Symbol, order: u32, arg: f64) -> Result<f64, EvalError> {
        let seed = self
            .generic_seed
            .ok_or_else(|| EvalError::UnboundGeneric(base.name().to_string()))?;
        // Quantized so that algebraically equal arguments computed along
        // different float paths land on the same value.
        let q = (arg * 1e8).round() as i64;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
        for b in base
            .name()
            .bytes()
            .chain(order.to_le_bytes())
            .chain(q.to_le_bytes())
        {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h = splitmix(h);
        Ok((h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// IEEE evaluation of the tree as written (no normalization).
pub fn eval_num(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    let v = match e.node() {
        Node::Num(q) => q.to_f64().unwrap_or(f64::NAN),
        Node::Sym(s) => env.get(s)?,
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_num(t, env)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_num(f, env)?;
            }
            acc
        }
        Node::Pow(b, x) => {
            let bv = eval_num(b, env)?;
            match x.as_num() {
                Some(q) => pow_f64(bv, q),
                None => bv.powf(eval_num(x, env)?),
            }
        }
        Node::Neg(x) => -eval_num(x, env)?,
        Node::Func(f, a) => f.apply(eval_num(a, env)?),
        Node::Generic { base, order, arg } => env.generic(base, *order, eval_num(arg, env)?)?,
    };
    finite(v)
}

/// Same tree with every sum replaced by a sum of absolute values.
pub fn eval_abs(e: &Expr, env: &Env) -> Result<f64, EvalError> {
    let v = match e.node() {
        Node::Add(ts) => {
            let mut acc = 0.0;
            for t in ts {
                acc += eval_abs(t, env)?;
            }
            acc
        }
        Node::Mul(fs) => {
            let mut acc = 1.0;
            for f in fs {
                acc *= eval_abs(f, env)?;
            }
            acc
        }
        Node::Neg(x) => eval_abs(x, env)?,
        _ => eval_num(e, env)?.abs(),
    };
    finite(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprcore::expr::Func;

    #[test]
    fn inverse_square() {
        let z = Expr::sym("z");
        let e = Expr::powi(z, -2);
        let env = Env::new().bind("z", 2.0);
        assert_eq!(eval_num(&e, &env).unwrap(), 0.25);
    }

    #[test]
    fn log_of_negative_is_error() {
        let e = Expr::func(Func::Ln, Expr::sym("z"));
        let env = Env::new().bind("z", -1.0);
        assert_eq!(eval_num(&e, &env), Err(EvalError::NonFinite));
    }

    #[test]
    fn unbound_symbol() {
        let e = Expr::sym("q");
        assert!(matches!(eval_num(&e, &Env::new()), Err(EvalError::Unbound(_))));
    }

    #[test]
    fn generic_values_are_stable() {
        let env = Env::new().with_generic_seed(7);
        let f = Symbol::new("F");
        let a = env.generic(&f, 1, 0.3).unwrap();
        let b = env.generic(&f, 1, 0.1 + 0.2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, env.generic(&f, 0, 0.3).unwrap());
    }
}
