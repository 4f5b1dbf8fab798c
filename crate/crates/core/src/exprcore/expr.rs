//! Immutable expression trees.
//!
//! `Expr` is the interchange form: it is what the parser produces, what
//! reports print, and what manifests store. Arithmetic on large expressions
//! goes through [`RatFn`](super::RatFn), the canonical form.

use std::fmt;
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Interned-by-value symbol name. Ordering is lexicographic on the name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Elementary functions recognized by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Ln,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

/// Name printed for the `order`-th derivative of a generic function whose
/// zeroth member is `base`: `F`, `f`, `fp`, `fpp`, ...
///
/// Order 0 is the antiderivative `F`, order 1 is the nonlinearity `f`.
pub fn generic_name(base: &str, order: u32) -> String {
    match order {
        0 => base.to_string(),
        1 => base.to_lowercase(),
        k => format!("{}{}", base.to_lowercase(), "p".repeat(k as usize - 1)),
    }
}

/// Inverse of [`generic_name`] for one base.
pub fn generic_order(base: &str, name: &str) -> Option<u32> {
    if name == base {
        return Some(0);
    }
    let lower = base.to_lowercase();
    if lower == base {
        return None;
    }
    let rest = name.strip_prefix(lower.as_str())?;
    if rest.chars().all(|c| c == 'p') {
        Some(1 + rest.len() as u32)
    } else {
        None
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Node {
    Num(BigRational),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Expr),
    Neg(Expr),
    Func(Func, Expr),
    /// Opaque function of one argument with tracked derivative order.
    Generic {
        base: Symbol,
        order: u32,
        arg: Expr,
    },
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn num(q: BigRational) -> Self {
        Expr::from_node(Node::Num(q))
    }

    pub fn int(n: i64) -> Self {
        Expr::num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Expr::num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Self {
        Expr::from_node(Node::Sym(Symbol::new(name)))
    }

    pub fn symbol(s: &Symbol) -> Self {
        Expr::from_node(Node::Sym(s.clone()))
    }

    pub fn add(terms: Vec<Expr>) -> Self {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Add(terms)),
        }
    }

    pub fn mul(factors: Vec<Expr>) -> Self {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::from_node(Node::Mul(factors)),
        }
    }

    pub fn pow(base: Expr, exp: Expr) -> Self {
        Expr::from_node(Node::Pow(base, exp))
    }

    pub fn powi(base: Expr, exp: i64) -> Self {
        Expr::pow(base, Expr::int(exp))
    }

    pub fn neg(e: Expr) -> Self {
        Expr::from_node(Node::Neg(e))
    }

    pub fn func(f: Func, arg: Expr) -> Self {
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn exp(arg: Expr) -> Self {
        Expr::func(Func::Exp, arg)
    }

    pub fn generic(base: &Symbol, order: u32, arg: Expr) -> Self {
        Expr::from_node(Node::Generic {
            base: base.clone(),
            order,
            arg,
        })
    }

    pub fn as_num(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_literal_zero(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_zero())
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => vec![],
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
            Node::Pow(b, e) => vec![b, e],
            Node::Neg(e) | Node::Func(_, e) => vec![e],
            Node::Generic { arg, .. } => vec![arg],
        }
    }

    /// All symbols occurring in the tree (generic-function bases excluded).
    pub fn free_symbols(&self) -> Vec<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out.into_iter().collect()
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<Symbol>) {
        if let Node::Sym(s) = self.node() {
            out.insert(s.clone());
        }
        for c in self.children() {
            c.collect_symbols(out);
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

// Printing. Precedence levels follow the grammar: sum < product < unary < power < atom.
const PREC_SUM: u8 = 1;
const PREC_PROD: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn num_prec(q: &BigRational) -> u8 {
    if q.is_negative() {
        PREC_UNARY
    } else if q.is_integer() {
        PREC_ATOM
    } else {
        PREC_PROD
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, q: &BigRational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self.node() {
            Node::Num(q) => num_prec(q),
            Node::Sym(_) | Node::Func(..) | Node::Generic { .. } => PREC_ATOM,
            Node::Add(_) => PREC_SUM,
            Node::Mul(v) => {
                if let Some(q) = v.first().and_then(|e| e.as_num()) {
                    if q.is_negative() {
                        return PREC_UNARY;
                    }
                }
                PREC_PROD
            }
            Node::Pow(..) => PREC_POW,
            Node::Neg(_) => PREC_UNARY,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.write_inner(f)?;
            f.write_str(")")
        } else {
            self.write_inner(f)
        }
    }

    fn write_inner(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Num(q) => write_num(f, q),
            Node::Sym(s) => write!(f, "{s}"),
            Node::Func(func, arg) => {
                write!(f, "{}(", func.name())?;
                arg.write_prec(f, PREC_SUM)?;
                f.write_str(")")
            }
            Node::Generic { base, order, arg } => {
                write!(f, "{}(", generic_name(base.name(), *order))?;
                arg.write_prec(f, PREC_SUM)?;
                f.write_str(")")
            }
            Node::Neg(e) => {
                f.write_str("-")?;
                e.write_prec(f, PREC_UNARY)
            }
            Node::Pow(b, e) => {
                // '^' is right-associative and binds tighter than unary minus.
                b.write_prec(f, PREC_ATOM)?;
                f.write_str("^")?;
                e.write_prec(f, PREC_POW)
            }
            Node::Add(terms) => {
                for (i, t) in terms.iter().enumerate() {
                    if i == 0 {
                        t.write_prec(f, PREC_SUM)?;
                        continue;
                    }
                    match t.negated_view() {
                        Some(pos) => {
                            f.write_str(" - ")?;
                            pos.write_prec(f, PREC_PROD)?;
                        }
                        None => {
                            f.write_str(" + ")?;
                            t.write_prec(f, PREC_PROD)?;
                        }
                    }
                }
                Ok(())
            }
            Node::Mul(factors) => self.write_product(f, factors),
        }
    }

    /// For a term that prints with a leading minus, the positive counterpart.
    fn negated_view(&self) -> Option<Expr> {
        match self.node() {
            Node::Neg(e) => Some(e.clone()),
            Node::Num(q) if q.is_negative() => Some(Expr::num(-q.clone())),
            Node::Mul(v) => {
                let q = v.first()?.as_num()?;
                if !q.is_negative() {
                    return None;
                }
                let mut rest: Vec<Expr> = v[1..].to_vec();
                let pos = -q.clone();
                if !pos.is_one() {
                    rest.insert(0, Expr::num(pos));
                }
                Some(Expr::mul(rest))
            }
            _ => None,
        }
    }

    fn write_product(&self, f: &mut fmt::Formatter<'_>, factors: &[Expr]) -> fmt::Result {
        let mut coeff = BigRational::one();
        let mut numer: Vec<Expr> = Vec::new();
        let mut denom: Vec<Expr> = Vec::new();
        for (i, fac) in factors.iter().enumerate() {
            if i == 0 {
                if let Some(q) = fac.as_num() {
                    coeff = q.clone();
                    continue;
                }
            }
            match fac.node() {
                Node::Pow(b, e) => match e.as_num() {
                    Some(q) if q.is_negative() => {
                        let p = -q.clone();
                        if p.is_one() {
                            denom.push(b.clone());
                        } else {
                            denom.push(Expr::pow(b.clone(), Expr::num(p)));
                        }
                    }
                    _ => numer.push(fac.clone()),
                },
                _ => numer.push(fac.clone()),
            }
        }
        if coeff.is_negative() {
            f.write_str("-")?;
            coeff = -coeff;
        }
        let num_int = BigRational::from_integer(coeff.numer().clone());
        let den_int = coeff.denom().clone();
        let mut wrote = false;
        if !num_int.is_one() || numer.is_empty() {
            write_num(f, &num_int)?;
            wrote = true;
        }
        for n in &numer {
            if wrote {
                f.write_str("*")?;
            }
            n.write_prec(f, PREC_UNARY.max(PREC_POW))?;
            wrote = true;
        }
        if !den_int.is_one() {
            write!(f, "/{den_int}")?;
        }
        for d in &denom {
            f.write_str("/")?;
            d.write_prec(f, PREC_POW)?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_inner(f)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add(vec![a, Expr::neg(b)]));
binop!(Mul, mul, |a, b| Expr::mul(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul(vec![a, Expr::powi(b, -1)]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_products_with_denominators() {
        let z = Expr::sym("z");
        let e = Expr::mul(vec![Expr::int(-2), Expr::powi(z, -3)]);
        assert_eq!(e.to_string(), "-2/z^3");
    }

    #[test]
    fn prints_sums_with_subtraction() {
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        let e = Expr::add(vec![x, Expr::mul(vec![Expr::int(-1), y])]);
        assert_eq!(e.to_string(), "x - y");
    }

    #[test]
    fn prints_rational_coefficients() {
        let x = Expr::sym("x");
        let e = Expr::mul(vec![Expr::rational(3, 4), x]);
        assert_eq!(e.to_string(), "3*x/4");
    }

    #[test]
    fn generic_names() {
        assert_eq!(generic_name("F", 0), "F");
        assert_eq!(generic_name("F", 1), "f");
        assert_eq!(generic_name("F", 3), "fpp");
        assert_eq!(generic_order("F", "fpp"), Some(3));
        assert_eq!(generic_order("F", "f"), Some(1));
        assert_eq!(generic_order("F", "g"), None);
    }
}
