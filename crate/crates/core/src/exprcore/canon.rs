//! Canonical rational-function form.
//!
//! A [`RatFn`] is `N / (P_1^m_1 ... P_k^m_k)` where `N` is a Laurent
//! polynomial with rational exponents over opaque kernels (symbols,
//! elementary functions of canonical arguments, generic functions, surds),
//! each monomial optionally carrying an `exp(A)` factor, and each `P_i` is
//! a primitive non-monomial polynomial with positive leading coefficient.
//!
//! Monomials are ordered by a group order (lex on kernel exponents, then the
//! sign of the difference of exp arguments), so exact division and content
//! extraction are well defined.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::eval::{Env, EvalError};
use super::expr::{Expr, Func, Node, Symbol};

pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CanonError {
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Kernel {
    Sym(Symbol),
    Func(Func, Box<RatFn>),
    Generic {
        base: Symbol,
        order: u32,
        arg: Box<RatFn>,
    },
    /// Irrational power base; the monomial exponent is kept in (0, 1).
    Surd(Box<RatFn>),
}

impl Kernel {
    fn to_expr(&self) -> Expr {
        match self {
            Kernel::Sym(s) => Expr::symbol(s),
            Kernel::Func(f, a) => Expr::func(*f, a.to_expr()),
            Kernel::Generic { base, order, arg } => Expr::generic(base, *order, arg.to_expr()),
            Kernel::Surd(b) => b.to_expr(),
        }
    }

    fn depends_on(&self, s: &Symbol) -> bool {
        match self {
            Kernel::Sym(t) => t == s,
            Kernel::Func(_, a) | Kernel::Surd(a) => a.depends_on(s),
            Kernel::Generic { arg, .. } => arg.depends_on(s),
        }
    }

    fn diff(&self, s: &Symbol) -> RatFn {
        match self {
            Kernel::Sym(t) => {
                if t == s {
                    RatFn::one()
                } else {
                    RatFn::zero()
                }
            }
            Kernel::Func(f, a) => {
                let da = a.diff(s);
                if da.is_zero() {
                    return da;
                }
                let outer = match f {
                    Func::Ln => a.inv(),
                    Func::Sin => RatFn::func(Func::Cos, (**a).clone()),
                    Func::Cos => RatFn::func(Func::Sin, (**a).clone()).neg(),
                    Func::Tan => RatFn::one().add(&RatFn::func(Func::Tan, (**a).clone()).powi(2)),
                    Func::Sinh => RatFn::func(Func::Cosh, (**a).clone()),
                    Func::Cosh => RatFn::func(Func::Sinh, (**a).clone()),
                    Func::Tanh => RatFn::one().sub(&RatFn::func(Func::Tanh, (**a).clone()).powi(2)),
                    Func::Exp => RatFn::exp((**a).clone()),
                    Func::Sqrt => RatFn::func(Func::Sqrt, (**a).clone()).inv().scale(&qr(1, 2)),
                };
                outer.mul(&da)
            }
            Kernel::Generic { base, order, arg } => {
                let da = arg.diff(s);
                if da.is_zero() {
                    return da;
                }
                RatFn::kernel(Kernel::Generic {
                    base: base.clone(),
                    order: order + 1,
                    arg: arg.clone(),
                })
                .mul(&da)
            }
            Kernel::Surd(b) => b.diff(s),
        }
    }

    fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        match self {
            Kernel::Sym(s) => env.get(s),
            Kernel::Func(f, a) => Ok(f.apply(a.eval(env)?)),
            Kernel::Generic { base, order, arg } => env.generic(base, *order, arg.eval(env)?),
            Kernel::Surd(b) => b.eval(env),
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Kernel::Sym(s) => {
                out.insert(s.clone());
            }
            Kernel::Func(_, a) | Kernel::Surd(a) => a.collect_symbols(out),
            Kernel::Generic { arg, .. } => arg.collect_symbols(out),
        }
    }

    fn is_surd(&self) -> bool {
        matches!(self, Kernel::Surd(_))
    }
}

fn sign_of(r: &RatFn) -> Ordering {
    match r.num.leading() {
        None => Ordering::Equal,
        Some((_, c)) => {
            if c.is_positive() {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }
}

fn compare_exp(a: Option<&RatFn>, b: Option<&RatFn>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (Some(x), None) => sign_of(x),
        (None, Some(y)) => sign_of(y).reverse(),
        (Some(x), Some(y)) => {
            if x == y {
                Ordering::Equal
            } else {
                sign_of(&x.sub(y))
            }
        }
    }
}

/// Product of kernel powers times an optional `exp(A)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Mono {
    pows: Vec<(Kernel, Q)>,
    exp: Option<Box<RatFn>>,
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.pows, &other.pows);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => break,
                (Some((_, e)), None) => return if e.is_positive() { Ordering::Greater } else { Ordering::Less },
                (None, Some((_, e))) => return if e.is_positive() { Ordering::Less } else { Ordering::Greater },
                (Some((ka, ea)), Some((kb, eb))) => match ka.cmp(kb) {
                    Ordering::Less => {
                        return if ea.is_positive() { Ordering::Greater } else { Ordering::Less };
                    }
                    Ordering::Greater => {
                        return if eb.is_positive() { Ordering::Less } else { Ordering::Greater };
                    }
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
        compare_exp(self.exp.as_deref(), other.exp.as_deref())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn is_one(&self) -> bool {
        self.pows.is_empty() && self.exp.is_none()
    }

    pub fn kernel(k: Kernel, e: Q) -> Mono {
        if e.is_zero() {
            return Mono::one();
        }
        Mono {
            pows: vec![(k, e)],
            exp: None,
        }
    }

    pub fn exponent_of(&self, k: &Kernel) -> Q {
        self.pows
            .iter()
            .find(|(kk, _)| kk == k)
            .map(|(_, e)| e.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn pows(&self) -> &[(Kernel, Q)] {
        &self.pows
    }

    pub fn exp_arg(&self) -> Option<&RatFn> {
        self.exp.as_deref()
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        let mut pows = Vec::with_capacity(self.pows.len() + o.pows.len());
        let (a, b) = (&self.pows, &o.pows);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                pows.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                pows.push(b[j].clone());
                j += 1;
            } else {
                let e = &a[i].1 + &b[j].1;
                if !e.is_zero() {
                    pows.push((a[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
        let exp = match (&self.exp, &o.exp) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (Some(x), Some(y)) => {
                let s = x.add(y);
                if s.is_zero() {
                    None
                } else {
                    Some(Box::new(s))
                }
            }
        };
        Mono { pows, exp }
    }

    pub fn inv(&self) -> Mono {
        Mono {
            pows: self.pows.iter().map(|(k, e)| (k.clone(), -e)).collect(),
            exp: self.exp.as_ref().map(|a| Box::new(a.neg())),
        }
    }

    pub fn pow(&self, q: &Q) -> Mono {
        if q.is_zero() {
            return Mono::one();
        }
        Mono {
            pows: self.pows.iter().map(|(k, e)| (k.clone(), e * q)).collect(),
            exp: self.exp.as_ref().map(|a| Box::new(a.scale(q))),
        }
    }

    fn has_bad_surd(&self) -> bool {
        self.pows
            .iter()
            .any(|(k, e)| k.is_surd() && (e < &Q::zero() || e >= &Q::one()))
    }

    fn depends_on(&self, s: &Symbol) -> bool {
        self.pows.iter().any(|(k, _)| k.depends_on(s)) || self.exp.as_ref().is_some_and(|a| a.depends_on(s))
    }

    fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let mut v = 1.0;
        for (k, e) in &self.pows {
            let x = k.eval(env)?;
            v *= pow_f64(x, e);
        }
        if let Some(a) = &self.exp {
            v *= a.eval(env)?.exp();
        }
        Ok(v)
    }

    fn to_factors(&self, c: &Q) -> Vec<Expr> {
        let mut out = Vec::new();
        if !c.is_one() {
            out.push(Expr::num(c.clone()));
        }
        for (k, e) in &self.pows {
            let ke = k.to_expr();
            if e.is_one() {
                out.push(ke);
            } else {
                out.push(Expr::pow(ke, Expr::num(e.clone())));
            }
        }
        if let Some(a) = &self.exp {
            out.push(Expr::exp(a.to_expr()));
        }
        if out.is_empty() {
            out.push(Expr::one());
        }
        out
    }
}

pub(crate) fn pow_f64(x: f64, e: &Q) -> f64 {
    if e.is_integer() {
        if let Some(n) = e.to_integer().to_i32() {
            return x.powi(n);
        }
    }
    x.powf(e.to_f64().unwrap_or(f64::NAN))
}

/// Sparse Laurent polynomial, terms ordered by the monomial group order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Q) -> Poly {
        Poly::term(Mono::one(), c)
    }

    pub fn term(m: Mono, c: Q) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms.last_key_value()
    }

    pub fn trailing(&self) -> Option<(&Mono, &Q)> {
        self.terms.first_key_value()
    }

    pub fn single_term(&self) -> Option<(&Mono, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let (mut big, small) = if self.len() >= o.len() { (self.clone(), o) } else { (o.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, q: &Q) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Mono, c: &Q) -> Poly {
        let mut out = Poly::zero();
        if c.is_zero() {
            return out;
        }
        if m.is_one() {
            return self.scale(c);
        }
        for (tm, tc) in &self.terms {
            out.add_term(tm.mul(m), tc * c);
        }
        out
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let (a, b) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        let mut out = Poly::zero();
        for (m, c) in &a.terms {
            for (tm, tc) in &b.terms {
                out.add_term(tm.mul(m), tc * c);
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> Poly {
        let mut result = Poly::constant(Q::one());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn depends_on(&self, s: &Symbol) -> bool {
        self.terms.keys().any(|m| m.depends_on(s))
    }

    fn has_bad_surd(&self) -> bool {
        self.terms.keys().any(|m| m.has_bad_surd())
    }

    fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let mut v = 0.0;
        for (m, c) in &self.terms {
            v += c.to_f64().unwrap_or(f64::NAN) * m.eval(env)?;
        }
        Ok(v)
    }

    fn eval_abs(&self, env: &Env) -> Result<f64, EvalError> {
        let mut v = 0.0;
        for (m, c) in &self.terms {
            v += (c.to_f64().unwrap_or(f64::NAN) * m.eval(env)?).abs();
        }
        Ok(v)
    }

    fn diff(&self, s: &Symbol) -> RatFn {
        let mut acc = RatFn::zero();
        for (m, c) in &self.terms {
            if !m.depends_on(s) {
                continue;
            }
            for (idx, (k, e)) in m.pows.iter().enumerate() {
                let dk = k.diff(s);
                if dk.is_zero() {
                    continue;
                }
                let mut lowered = m.clone();
                let ne = e - Q::one();
                if ne.is_zero() {
                    lowered.pows.remove(idx);
                } else {
                    lowered.pows[idx].1 = ne;
                }
                acc = acc.add(&RatFn::from_poly(Poly::term(lowered, c * e)).mul(&dk));
            }
            if let Some(a) = &m.exp {
                let da = a.diff(s);
                if !da.is_zero() {
                    acc = acc.add(&RatFn::from_poly(Poly::term(m.clone(), c.clone())).mul(&da));
                }
            }
        }
        acc
    }

    fn to_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        let terms: Vec<Expr> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| Expr::mul(m.to_factors(c)))
            .collect();
        Expr::add(terms)
    }

    /// Exact `d`-th root, if `self` is a perfect power.
    pub fn nth_root(&self, d: u32) -> Option<Poly> {
        if d == 1 {
            return Some(self.clone());
        }
        let inv_d = qr(1, d as i64);
        let (lm, lc) = self.leading()?;
        let rm = lm.pow(&inv_d);
        let rc = exact_rational_root(lc, d)?;
        let bound = self.trailing()?.0.pow(&inv_d);
        let lead_m = rm.pow(&qi(d as i64 - 1));
        let lead_c = num_traits::pow(rc.clone(), d as usize - 1) * qi(d as i64);
        let mut root = Poly::term(rm.clone(), rc);
        let mut last = rm;
        for _ in 0..(4 * self.len() + 8) {
            let rem = self.sub(&root.powi(d));
            let Some((m, c)) = rem.leading() else {
                return if root.has_bad_surd() { None } else { Some(root) };
            };
            let tm = m.mul(&lead_m.inv());
            if tm < bound || tm >= last {
                return None;
            }
            let tc = c / &lead_c;
            root.add_term(tm.clone(), tc);
            last = tm;
        }
        None
    }

    /// Exact quotient `self / d`, if `d` divides `self`.
    pub fn divide(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = d.leading()?;
        let (tm, _) = d.trailing()?;
        let bound = self.trailing()?.0.mul(&tm.inv());
        let degrees = quotient_degrees(self, d)?;
        let lm_inv = lm.inv();
        let cap = 64 + 8 * self.len() * d.len();
        let mut r = self.clone();
        let mut q = Poly::zero();
        let mut steps = 0;
        while let Some((rm, rc)) = r.leading() {
            steps += 1;
            if steps > cap {
                return None;
            }
            let qm = rm.mul(&lm_inv);
            if qm < bound || !within_degrees(&qm, &degrees) {
                return None;
            }
            let qc = rc / lc;
            for (dm, dc) in &d.terms {
                r.add_term(dm.mul(&qm), -(dc * &qc));
            }
            q.add_term(qm, qc);
        }
        if q.has_bad_surd() {
            return None;
        }
        Some(q)
    }

    /// Splits `self = c * m * P` with `P` primitive, free of monomial content,
    /// and with positive leading coefficient.
    fn factor_content(&self) -> (Q, Mono, Poly) {
        let mut kernels: BTreeSet<&Kernel> = BTreeSet::new();
        for m in self.terms.keys() {
            for (k, _) in &m.pows {
                kernels.insert(k);
            }
        }
        let mut content = Mono::one();
        for k in kernels {
            let min = self
                .terms
                .keys()
                .map(|m| m.exponent_of(k))
                .min()
                .unwrap_or_else(Q::zero);
            if !min.is_zero() {
                content.pows.push((k.clone(), min));
            }
        }
        let mut min_exp: Option<Option<&RatFn>> = None;
        for m in self.terms.keys() {
            let e = m.exp.as_deref();
            min_exp = match min_exp {
                None => Some(e),
                Some(cur) => {
                    if compare_exp(e, cur) == Ordering::Less {
                        Some(e)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        content.exp = min_exp.flatten().map(|a| Box::new(a.clone()));
        let inv = content.inv();
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            p.add_term(m.mul(&inv), c.clone());
        }
        let mut lcm = BigInt::one();
        let mut gcd = BigInt::zero();
        for c in p.terms.values() {
            lcm = lcm.lcm(c.denom());
            gcd = gcd.gcd(c.numer());
        }
        let mut scalar = Q::new(gcd, lcm);
        if p.leading().is_some_and(|(_, c)| c.is_negative()) {
            scalar = -scalar;
        }
        let p = p.scale(&scalar.recip());
        (scalar, content, p)
    }
}

/// Canonical rational function over kernels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct RatFn {
    num: Poly,
    den: Vec<(Poly, u32)>,
}

impl RatFn {
    pub fn zero() -> RatFn {
        RatFn::default()
    }

    pub fn one() -> RatFn {
        RatFn::constant(Q::one())
    }

    pub fn constant(c: Q) -> RatFn {
        RatFn {
            num: Poly::constant(c),
            den: Vec::new(),
        }
    }

    pub fn int(n: i64) -> RatFn {
        RatFn::constant(qi(n))
    }

    pub fn symbol(s: &Symbol) -> RatFn {
        RatFn::kernel(Kernel::Sym(s.clone()))
    }

    pub fn sym(name: &str) -> RatFn {
        RatFn::symbol(&Symbol::new(name))
    }

    pub fn kernel(k: Kernel) -> RatFn {
        RatFn {
            num: Poly::term(Mono::kernel(k, Q::one()), Q::one()),
            den: Vec::new(),
        }
    }

    pub fn generic(base: &Symbol, order: u32, arg: RatFn) -> RatFn {
        RatFn::kernel(Kernel::Generic {
            base: base.clone(),
            order,
            arg: Box::new(arg),
        })
    }

    pub fn from_poly(p: Poly) -> RatFn {
        if p.has_bad_surd() {
            return reduce(p, Vec::new());
        }
        RatFn { num: p, den: Vec::new() }
    }

    pub fn exp(a: RatFn) -> RatFn {
        if a.is_zero() {
            return RatFn::one();
        }
        RatFn {
            num: Poly::term(
                Mono {
                    pows: Vec::new(),
                    exp: Some(Box::new(a)),
                },
                Q::one(),
            ),
            den: Vec::new(),
        }
    }

    pub fn func(f: Func, a: RatFn) -> RatFn {
        match f {
            Func::Exp => RatFn::exp(a),
            Func::Ln if a.is_one() => RatFn::zero(),
            Func::Sqrt => a.pow_q(&qr(1, 2)).unwrap_or_else(|_| RatFn::zero()),
            _ => RatFn::kernel(Kernel::Func(f, Box::new(a))),
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<&Q> {
        if !self.den.is_empty() {
            return None;
        }
        match self.num.single_term() {
            Some((m, c)) if m.is_one() => Some(c),
            None if self.num.is_zero() => None,
            _ => None,
        }
    }

    /// Constant value, treating the zero function as 0.
    pub fn constant_value(&self) -> Option<Q> {
        if self.is_zero() {
            Some(Q::zero())
        } else {
            self.as_constant().cloned()
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let num = self.num.add(&o.num);
            if self.den.is_empty() {
                return RatFn { num, den: Vec::new() };
            }
            return reduce(num, self.den.clone());
        }
        let mut lcm: Vec<(Poly, u32)> = self.den.clone();
        for (p, m) in &o.den {
            match lcm.iter_mut().find(|(q, _)| q == p) {
                Some(entry) => entry.1 = entry.1.max(*m),
                None => lcm.push((p.clone(), *m)),
            }
        }
        let lift = |r: &RatFn| -> Poly {
            let mut n = r.num.clone();
            for (p, m) in &lcm {
                let have = r.den.iter().find(|(q, _)| q == p).map(|(_, k)| *k).unwrap_or(0);
                if *m > have {
                    n = n.mul(&p.powi(m - have));
                }
            }
            n
        };
        let num = lift(self).add(&lift(o));
        reduce(num, lcm)
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn scale(&self, q: &Q) -> RatFn {
        if q.is_zero() {
            return RatFn::zero();
        }
        RatFn {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::zero();
        }
        if let Some(c) = o.as_constant() {
            return self.scale(c);
        }
        if let Some(c) = self.as_constant() {
            return o.scale(c);
        }
        let num = self.num.mul(&o.num);
        if self.den.is_empty() && o.den.is_empty() {
            return RatFn::from_poly(num);
        }
        let mut den = self.den.clone();
        den.extend(o.den.iter().cloned());
        reduce(num, den)
    }

    pub fn checked_inv(&self) -> Result<RatFn, CanonError> {
        if self.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        let mut num = Poly::constant(Q::one());
        for (p, m) in &self.den {
            num = num.mul(&p.powi(*m));
        }
        let (c, mono, p) = match self.num.single_term() {
            Some((m, c)) => (c.clone(), m.clone(), None),
            None => {
                let (c, m, p) = self.num.factor_content();
                (c, m, Some(p))
            }
        };
        let num = num.mul_term(&mono.inv(), &c.recip());
        let den = match p {
            Some(p) => vec![(p, 1)],
            None => Vec::new(),
        };
        Ok(reduce(num, den))
    }

    pub fn inv(&self) -> RatFn {
        self.checked_inv().expect("inverse of zero rational function")
    }

    pub fn div(&self, o: &RatFn) -> RatFn {
        self.mul(&o.inv())
    }

    pub fn checked_div(&self, o: &RatFn) -> Result<RatFn, CanonError> {
        Ok(self.mul(&o.checked_inv()?))
    }

    pub fn powi(&self, n: i64) -> RatFn {
        if n == 0 {
            return RatFn::one();
        }
        if n < 0 {
            return self.inv().powi(-n);
        }
        let k = n as u32;
        if let Some((m, c)) = self.num.single_term() {
            let q = Q::from_integer(BigInt::from(n));
            let num = Poly::term(m.pow(&q), num_traits::pow(c.clone(), k as usize));
            let den = self.den.iter().map(|(p, e)| (p.clone(), e * k)).collect();
            return reduce(num, den);
        }
        let num = self.num.powi(k);
        if self.den.is_empty() {
            return RatFn::from_poly(num);
        }
        let den = self.den.iter().map(|(p, e)| (p.clone(), e * k)).collect();
        reduce(num, den)
    }

    /// Rational power. Exact when the base is a perfect power, otherwise the
    /// fractional part goes into a surd kernel. Assumes positive bases.
    pub fn pow_q(&self, q: &Q) -> Result<RatFn, CanonError> {
        if q.is_integer() {
            let n = q.to_integer().to_i64().expect("exponent fits in i64");
            if n < 0 && self.is_zero() {
                return Err(CanonError::DivisionByZero);
            }
            return Ok(self.powi(n));
        }
        if self.is_zero() {
            return if q.is_positive() {
                Ok(RatFn::zero())
            } else {
                Err(CanonError::DivisionByZero)
            };
        }
        if let Some(r) = self.exact_root_pow(q) {
            return Ok(r);
        }
        Ok(surd_pow(self, q))
    }

    fn exact_root_pow(&self, q: &Q) -> Option<RatFn> {
        let d = q.denom().to_u32()?;
        let a = q.numer().to_i64()?;
        let num_root = match self.num.single_term() {
            Some((m, c)) => Poly::term(m.pow(&qr(1, d as i64)), exact_rational_root(c, d)?),
            None => self.num.nth_root(d)?,
        };
        let mut den = Vec::new();
        for (p, e) in &self.den {
            if e % d == 0 {
                den.push((p.clone(), e / d));
            } else {
                den.push((p.nth_root(d)?, *e));
            }
        }
        Some(reduce(num_root, den).powi(a))
    }

    pub fn depends_on(&self, s: &Symbol) -> bool {
        self.num.depends_on(s) || self.den.iter().any(|(p, _)| p.depends_on(s))
    }

    pub fn diff(&self, s: &Symbol) -> RatFn {
        if !self.depends_on(s) {
            return RatFn::zero();
        }
        let dnum = self.num.diff(s);
        if self.den.is_empty() {
            return dnum;
        }
        let inv_den = RatFn {
            num: Poly::constant(Q::one()),
            den: self.den.clone(),
        };
        let mut out = dnum.mul(&inv_den);
        let here = self.clone();
        for (p, m) in &self.den {
            let dp = p.diff(s);
            if dp.is_zero() {
                continue;
            }
            let inv_p = RatFn {
                num: Poly::constant(Q::one()),
                den: vec![(p.clone(), 1)],
            };
            let term = here.mul(&dp).mul(&inv_p).scale(&-qi(*m as i64));
            out = out.add(&term);
        }
        out
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out.into_iter().collect()
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        let polys = std::iter::once(&self.num).chain(self.den.iter().map(|(p, _)| p));
        for p in polys {
            for m in p.terms.keys() {
                for (k, _) in &m.pows {
                    k.collect_symbols(out);
                }
                if let Some(a) = &m.exp {
                    a.collect_symbols(out);
                }
            }
        }
    }

    fn den_value(&self, env: &Env) -> Result<f64, EvalError> {
        let mut d = 1.0;
        for (p, m) in &self.den {
            d *= p.eval(env)?.powi(*m as i32);
        }
        Ok(d)
    }

    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let v = self.num.eval(env)? / self.den_value(env)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Sum of absolute values of numerator terms over the absolute
    /// denominator; the scale against which cancellation is judged.
    pub fn eval_abs(&self, env: &Env) -> Result<f64, EvalError> {
        let v = self.num.eval_abs(env)? / self.den_value(env)?.abs();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    pub fn to_expr(&self) -> Expr {
        if self.den.is_empty() {
            return self.num.to_expr();
        }
        let mut factors = match self.num.single_term() {
            Some((m, c)) => {
                let mut f = m.to_factors(c);
                if f.len() > 1 && f[0].as_num().is_some_and(|q| q.is_one()) {
                    f.remove(0);
                }
                f
            }
            None => vec![self.num.to_expr()],
        };
        for (p, m) in &self.den {
            factors.push(Expr::powi(p.to_expr(), -(*m as i64)));
        }
        Expr::mul(factors)
    }

    pub fn from_expr(e: &Expr) -> Result<RatFn, CanonError> {
        Ok(match e.node() {
            Node::Num(q) => RatFn::constant(q.clone()),
            Node::Sym(s) => RatFn::symbol(s),
            Node::Add(ts) => {
                let mut acc = RatFn::zero();
                for t in ts {
                    acc = acc.add(&RatFn::from_expr(t)?);
                }
                acc
            }
            Node::Mul(fs) => {
                let mut acc = RatFn::one();
                for f in fs {
                    acc = acc.mul(&RatFn::from_expr(f)?);
                }
                acc
            }
            Node::Neg(x) => RatFn::from_expr(x)?.neg(),
            Node::Pow(b, x) => {
                let base = RatFn::from_expr(b)?;
                let ex = RatFn::from_expr(x)?;
                match ex.constant_value() {
                    Some(q) => base.pow_q(&q)?,
                    None => {
                        if base.is_zero() {
                            return Err(CanonError::DivisionByZero);
                        }
                        RatFn::exp(ex.mul(&RatFn::func(Func::Ln, base)))
                    }
                }
            }
            Node::Func(Func::Sqrt, a) => RatFn::from_expr(a)?.pow_q(&qr(1, 2))?,
            Node::Func(f, a) => RatFn::func(*f, RatFn::from_expr(a)?),
            Node::Generic { base, order, arg } => RatFn::generic(base, *order, RatFn::from_expr(arg)?),
        })
    }

    /// Exact square root when `self` is a perfect square monomial quotient,
    /// sign chosen by the caller.
    pub fn exact_sqrt(&self) -> Option<RatFn> {
        self.exact_root_pow(&qr(1, 2))
    }
}

fn exact_rational_root(c: &Q, d: u32) -> Option<Q> {
    if c.is_negative() {
        if d % 2 == 0 {
            return None;
        }
        return exact_rational_root(&-c, d).map(|r| -r);
    }
    let n = c.numer().nth_root(d);
    let m = c.denom().nth_root(d);
    if num_traits::pow(n.clone(), d as usize) == *c.numer() && num_traits::pow(m.clone(), d as usize) == *c.denom() {
        Some(Q::new(n, m))
    } else {
        None
    }
}

fn surd_pow(base: &RatFn, q: &Q) -> RatFn {
    let fl = q.floor();
    let frac = q - &fl;
    let whole = base.powi(fl.to_integer().to_i64().expect("exponent fits in i64"));
    let surd = RatFn {
        num: Poly::term(Mono::kernel(Kernel::Surd(Box::new(base.clone())), frac), Q::one()),
        den: Vec::new(),
    };
    whole.mul(&surd)
}

/// Inserts `p^m` into a factor list, splitting against existing factors that
/// divide or are divided by it. Scalar and monomial leftovers go to `extra`.
fn insert_factor(list: &mut Vec<(Poly, u32)>, extra: &mut Poly, p: Poly, m: u32) {
    if m == 0 {
        return;
    }
    if let Some(entry) = list.iter_mut().find(|(q, _)| *q == p) {
        entry.1 += m;
        return;
    }
    for idx in 0..list.len() {
        let q = list[idx].0.clone();
        if p.len() > q.len() {
            if let Some(r) = p.divide(&q) {
                list[idx].1 += m;
                push_normalized(list, extra, r, m);
                return;
            }
        } else if q.len() > p.len() {
            if let Some(r) = q.divide(&p) {
                let mq = list.remove(idx).1;
                insert_factor(list, extra, p, m + mq);
                push_normalized(list, extra, r, mq);
                return;
            }
        }
    }
    list.push((p, m));
}

fn push_normalized(list: &mut Vec<(Poly, u32)>, extra: &mut Poly, r: Poly, m: u32) {
    let (c, mono, p) = r.factor_content();
    if !(c.is_one() && mono.is_one()) {
        let inv = Poly::term(mono.inv().pow(&qi(m as i64)), num_traits::pow(c.recip(), m as usize));
        *extra = extra.mul(&inv);
    }
    if p.len() > 1 {
        insert_factor(list, extra, p, m);
    }
}

/// Canonicalizes `num / prod den`.
/// Per-kernel exponent range an exact quotient `p / d` must stay inside.
fn quotient_degrees(p: &Poly, d: &Poly) -> Option<Vec<(Kernel, Q, Q)>> {
    let mut kernels: BTreeSet<&Kernel> = BTreeSet::new();
    for m in p.terms.keys().chain(d.terms.keys()) {
        for (k, _) in &m.pows {
            kernels.insert(k);
        }
    }
    let span = |q: &Poly, k: &Kernel| {
        let mut it = q.terms.keys().map(|m| m.exponent_of(k));
        let first = it.next().unwrap_or_else(Q::zero);
        it.fold((first.clone(), first), |(lo, hi), e| (lo.min(e.clone()), hi.max(e)))
    };
    let mut out = Vec::new();
    for k in kernels {
        let (plo, phi) = span(p, k);
        let (dlo, dhi) = span(d, k);
        let lo = plo - dlo;
        let hi = phi - dhi;
        if lo > hi {
            return None;
        }
        out.push((k.clone(), lo, hi));
    }
    Some(out)
}

fn within_degrees(m: &Mono, degrees: &[(Kernel, Q, Q)]) -> bool {
    degrees.iter().all(|(k, lo, hi)| {
        let e = m.exponent_of(k);
        &e >= lo && &e <= hi
    })
}

fn reduce(num: Poly, den: Vec<(Poly, u32)>) -> RatFn {
    if num.is_zero() {
        return RatFn::zero();
    }
    if num.has_bad_surd() {
        return fix_surds(num, den);
    }
    let mut list: Vec<(Poly, u32)> = Vec::new();
    let mut extra = Poly::constant(Q::one());
    for (p, m) in den {
        insert_factor(&mut list, &mut extra, p, m);
    }
    let mut num = if extra.single_term().is_some_and(|(m, c)| m.is_one() && c.is_one()) {
        num
    } else {
        num.mul(&extra)
    };
    for entry in list.iter_mut() {
        while entry.1 > 0 && num.len() >= entry.0.len() {
            match num.divide(&entry.0) {
                Some(q) => {
                    num = q;
                    entry.1 -= 1;
                }
                None => break,
            }
        }
    }
    list.retain(|(_, m)| *m > 0);
    list.sort();
    if num.has_bad_surd() {
        return fix_surds(num, list);
    }
    RatFn { num, den: list }
}

fn fix_surds(num: Poly, den: Vec<(Poly, u32)>) -> RatFn {
    let mut good = Poly::zero();
    let mut fixed = RatFn::zero();
    for (m, c) in num.terms {
        if !m.has_bad_surd() {
            good.add_term(m, c);
            continue;
        }
        let mut mono = m.clone();
        let mut factor = RatFn::one();
        for (k, e) in mono.pows.iter_mut() {
            if let Kernel::Surd(b) = k {
                let fl = e.floor();
                if !fl.is_zero() {
                    *e = &*e - &fl;
                    factor = factor.mul(&b.powi(fl.to_integer().to_i64().expect("small exponent")));
                }
            }
        }
        mono.pows.retain(|(_, e)| !e.is_zero());
        fixed = fixed.add(&RatFn::from_poly(Poly::term(mono, c)).mul(&factor));
    }
    let inv_den = RatFn {
        num: Poly::constant(Q::one()),
        den: den.clone(),
    };
    reduce(good, den).add(&fixed.mul(&inv_den))
}

pub fn normalize(e: &Expr) -> Expr {
    match RatFn::from_expr(e) {
        Ok(r) => r.to_expr(),
        Err(_) => e.clone(),
    }
}

pub fn diff(e: &Expr, s: &Symbol) -> Result<Expr, CanonError> {
    Ok(RatFn::from_expr(e)?.diff(s).to_expr())
}

impl std::fmt::Display for RatFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl std::ops::Add for &RatFn {
    type Output = RatFn;
    fn add(self, o: &RatFn) -> RatFn {
        RatFn::add(self, o)
    }
}

impl std::ops::Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, o: &RatFn) -> RatFn {
        RatFn::sub(self, o)
    }
}

impl std::ops::Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, o: &RatFn) -> RatFn {
        RatFn::mul(self, o)
    }
}

impl std::ops::Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn::neg(self)
    }
}

impl std::ops::Add for RatFn {
    type Output = RatFn;
    fn add(self, o: RatFn) -> RatFn {
        RatFn::add(&self, &o)
    }
}

impl std::ops::Sub for RatFn {
    type Output = RatFn;
    fn sub(self, o: RatFn) -> RatFn {
        RatFn::sub(&self, &o)
    }
}

impl std::ops::Mul for RatFn {
    type Output = RatFn;
    fn mul(self, o: RatFn) -> RatFn {
        RatFn::mul(&self, &o)
    }
}

impl std::ops::Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn::neg(&self)
    }
}

impl From<i64> for RatFn {
    fn from(n: i64) -> RatFn {
        RatFn::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RatFn {
        RatFn::sym("x")
    }
    fn y() -> RatFn {
        RatFn::sym("y")
    }
    fn z() -> RatFn {
        RatFn::sym("z")
    }

    #[test]
    fn like_terms_collect() {
        assert_eq!(x().add(&x()), x().scale(&qi(2)));
    }

    #[test]
    fn monomial_cancellation() {
        let r = z().powi(2).mul(&z().powi(-2));
        assert!(r.is_one());
    }

    #[test]
    fn exp_arguments_merge() {
        let a = RatFn::exp(x().scale(&qi(2)));
        let b = RatFn::exp(x().scale(&qi(-2)));
        assert!(a.mul(&b).is_one());
    }

    #[test]
    fn binomial_square_cancels() {
        let s = x().add(&y());
        let r = s
            .powi(2)
            .sub(&x().powi(2))
            .sub(&x().mul(&y()).scale(&qi(2)))
            .sub(&y().powi(2));
        assert!(r.is_zero());
    }

    #[test]
    fn fraction_cancels_common_factor() {
        let p = RatFn::one().add(&x().powi(2));
        let r = p.powi(3).div(&p.powi(2));
        assert_eq!(r, p);
    }

    #[test]
    fn expanded_factor_splits() {
        let a = RatFn::one().add(&x());
        let b = RatFn::one().add(&y());
        let ab = a.mul(&b);
        let lhs = ab.inv();
        let rhs = a.inv().mul(&b.inv());
        assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn partial_fraction_sum() {
        let a = RatFn::one().add(&x());
        let b = RatFn::one().sub(&x());
        let s = a.inv().add(&b.inv());
        let expected = RatFn::int(2).div(&RatFn::one().sub(&x().powi(2)));
        assert!(s.sub(&expected).is_zero());
    }

    #[test]
    fn power_rule() {
        let s = Symbol::new("z");
        let d = z().powi(-2).diff(&s);
        assert_eq!(d, z().powi(-3).scale(&qi(-2)));
    }

    #[test]
    fn exp_chain_rule() {
        let s = Symbol::new("x");
        let e = RatFn::exp(x().scale(&qi(2)));
        assert_eq!(e.diff(&s), e.scale(&qi(2)));
    }

    #[test]
    fn quotient_derivative() {
        let s = Symbol::new("x");
        let r = RatFn::one().add(&x().powi(2)).inv();
        let expected = x().scale(&qi(-2)).div(&RatFn::one().add(&x().powi(2)).powi(2));
        assert!(r.diff(&s).sub(&expected).is_zero());
    }

    #[test]
    fn exact_square_roots() {
        let r = RatFn::int(64).div(&RatFn::one().add(&x().powi(2)).powi(6));
        let s = r.exact_sqrt().unwrap();
        assert!(s.sub(&RatFn::int(8).div(&RatFn::one().add(&x().powi(2)).powi(3))).is_zero());
    }

    #[test]
    fn surd_squares_back() {
        let two = RatFn::int(2);
        let s = two.pow_q(&qr(1, 2)).unwrap();
        assert_eq!(s.mul(&s), two);
        let p = RatFn::one().add(&x().powi(2));
        let sp = p.pow_q(&qr(1, 2)).unwrap();
        assert!(sp.mul(&sp).sub(&p).is_zero());
    }

    #[test]
    fn round_trip_is_identity() {
        let p = RatFn::one().add(&x().powi(2)).add(&y().powi(2));
        let r = RatFn::exp(x().scale(&qi(2)))
            .mul(&y())
            .div(&p.powi(2))
            .add(&z().powi(-3));
        let back = RatFn::from_expr(&r.to_expr()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn laurent_content_pulled_out() {
        let e2 = RatFn::exp(x().scale(&qi(2)));
        let em2 = RatFn::exp(x().scale(&qi(-2)));
        let r = e2.add(&em2).inv();
        let back = RatFn::from_expr(&r.to_expr()).unwrap();
        assert_eq!(back, r);
        assert!(r.mul(&e2.add(&em2)).is_one());
    }
}
