use std::fmt;

use num_traits::{One, Zero};

use crate::exprcore::{qi, qr, Func, RatFn, SymbolTable, Q};

use super::DetError;

/// Nonlinearity `f(u)` of `Δ_g u + f(u) = 0`, grouped by symmetry behaviour.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityClass {
    Arbitrary,
    Zero,
    /// `f = k`, with `k` a nonzero constant or parameter.
    Constant(RatFn),
    Linear,
    Exponential,
    Power(Q),
    /// `u^{(n+2)/(n-2)}`.
    Critical,
    /// `u^2` in dimension six.
    PowerTwoDimSix,
}

pub fn critical_exponent(n: usize) -> Q {
    qr(n as i64 + 2, n as i64 - 2)
}

impl NonlinearityClass {
    /// `u^p`, routed to the critical classes when `p(n-2) = n+2`.
    pub fn power(p: Q, n: usize) -> Result<Self, DetError> {
        if n >= 3 && p == critical_exponent(n) {
            return Ok(if n == 6 {
                NonlinearityClass::PowerTwoDimSix
            } else {
                NonlinearityClass::Critical
            });
        }
        let c = NonlinearityClass::Power(p);
        c.validate(n)?;
        Ok(c)
    }

    /// Inverse of [`tag`](Self::tag). `p` is required for `power`, `k` for `constant`.
    pub fn from_tag(tag: &str, n: usize, p: Option<Q>, k: Option<RatFn>) -> Result<Self, DetError> {
        let c = match tag {
            "arbitrary" => NonlinearityClass::Arbitrary,
            "zero" => NonlinearityClass::Zero,
            "constant" => NonlinearityClass::Constant(k.ok_or_else(|| DetError::Class("constant class needs k".into()))?),
            "linear" => NonlinearityClass::Linear,
            "exponential" => NonlinearityClass::Exponential,
            "power" => {
                return NonlinearityClass::power(p.ok_or_else(|| DetError::Class("power class needs p".into()))?, n)
            }
            "critical" => NonlinearityClass::Critical,
            "p2n6" => NonlinearityClass::PowerTwoDimSix,
            other => return Err(DetError::Class(format!("unknown class `{other}`"))),
        };
        c.validate(n)?;
        Ok(c)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            NonlinearityClass::Arbitrary => "arbitrary",
            NonlinearityClass::Zero => "zero",
            NonlinearityClass::Constant(_) => "constant",
            NonlinearityClass::Linear => "linear",
            NonlinearityClass::Exponential => "exponential",
            NonlinearityClass::Power(_) => "power",
            NonlinearityClass::Critical => "critical",
            NonlinearityClass::PowerTwoDimSix => "p2n6",
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), DetError> {
        if n < 3 {
            return Err(DetError::Dimension(n));
        }
        match self {
            NonlinearityClass::Power(p) => {
                if p.is_zero() || p.is_one() {
                    return Err(DetError::Class(format!("power {p} belongs to the constant or linear class")));
                }
                if *p == critical_exponent(n) {
                    return Err(DetError::Class(format!("power {p} is critical for n = {n}")));
                }
            }
            NonlinearityClass::Critical if n == 6 => {
                return Err(DetError::Class("critical power for n = 6 is the p2n6 class".into()));
            }
            NonlinearityClass::PowerTwoDimSix if n != 6 => {
                return Err(DetError::Class(format!("p2n6 requires n = 6, got n = {n}")));
            }
            NonlinearityClass::Constant(k) => {
                if k.is_zero() {
                    return Err(DetError::Class("constant class needs k != 0".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Exponent of a pure power class.
    pub fn exponent(&self, n: usize) -> Option<Q> {
        match self {
            NonlinearityClass::Power(p) => Some(p.clone()),
            NonlinearityClass::Critical => Some(critical_exponent(n)),
            NonlinearityClass::PowerTwoDimSix => Some(qi(2)),
            _ => None,
        }
    }

    /// True when the ansatz carries no `b` unknowns.
    pub fn forces_b_zero(&self) -> bool {
        matches!(self, NonlinearityClass::Power(_) | NonlinearityClass::Critical)
    }

    pub fn f(&self, t: &SymbolTable) -> RatFn {
        let u = RatFn::symbol(t.u());
        let n = t.dim();
        match self {
            NonlinearityClass::Arbitrary => RatFn::generic(t.generic_base(), 1, u),
            NonlinearityClass::Zero => RatFn::zero(),
            NonlinearityClass::Constant(k) => k.clone(),
            NonlinearityClass::Linear => u,
            NonlinearityClass::Exponential => RatFn::exp(u),
            _ => power(&u, &self.exponent(n).expect("power class")),
        }
    }

    /// Antiderivative `F` with `F' = f`; `F(0) = 0` except `e^u` and `ln u`.
    pub fn antiderivative(&self, t: &SymbolTable) -> RatFn {
        let u = RatFn::symbol(t.u());
        let n = t.dim();
        match self {
            NonlinearityClass::Arbitrary => RatFn::generic(t.generic_base(), 0, u),
            NonlinearityClass::Zero => RatFn::zero(),
            NonlinearityClass::Constant(k) => k.mul(&u),
            NonlinearityClass::Linear => u.powi(2).scale(&qr(1, 2)),
            NonlinearityClass::Exponential => RatFn::exp(u),
            _ => {
                let p = self.exponent(n).expect("power class");
                if p == -Q::one() {
                    RatFn::func(Func::Ln, u)
                } else {
                    let q = &p + Q::one();
                    power(&u, &q).scale(&q.recip())
                }
            }
        }
    }
}

fn power(u: &RatFn, p: &Q) -> RatFn {
    u.pow_q(p).expect("u is nonzero")
}

impl fmt::Display for NonlinearityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NonlinearityClass::Constant(k) => write!(f, "constant(k={k})"),
            NonlinearityClass::Power(p) => write!(f, "power(p={p})"),
            other => f.write_str(other.tag()),
        }
    }
}
