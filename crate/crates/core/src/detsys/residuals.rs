use std::fmt;

use crate::exprcore::{qr, RatFn, Verdict, Q};
use crate::geom::{conformal_factor_of, lie_derivative_metric, MetricSpace, VectorField};

use super::{DetError, NonlinearityClass};

/// `ξ^i ∂_i + (a u + b) ∂_u` with `a`, `b` functions of the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryGenerator {
    pub xi: VectorField,
    pub a: RatFn,
    pub b: RatFn,
    /// Constant part of `a` beyond its conformal value, when the class has one.
    pub c: Option<Q>,
}

impl SymmetryGenerator {
    pub fn new(xi: VectorField, a: RatFn, b: RatFn) -> Self {
        SymmetryGenerator { xi, a, b, c: None }
    }

    pub fn from_field(xi: VectorField) -> Self {
        SymmetryGenerator::new(xi, RatFn::zero(), RatFn::zero())
    }

    pub fn from_strings<S: AsRef<str>>(m: &MetricSpace, xi: &[S], a: &str, b: &str) -> Result<Self, DetError> {
        let xi = VectorField::from_strings(m, xi)?;
        let a = m.parse_scalar(a)?;
        let b = m.parse_scalar(b)?;
        let g = SymmetryGenerator::new(xi, a, b);
        g.check_canonical(m)?;
        Ok(g)
    }

    pub fn check_canonical(&self, m: &MetricSpace) -> Result<(), DetError> {
        let t = m.table();
        for e in [&self.a, &self.b] {
            if e.depends_on(t.u()) || crate::geom::has_jets(m, e) {
                return Err(DetError::NotCanonical);
            }
        }
        Ok(())
    }

    pub fn add(&self, o: &SymmetryGenerator) -> SymmetryGenerator {
        SymmetryGenerator::new(self.xi.add(&o.xi), self.a.add(&o.a), self.b.add(&o.b))
    }

    pub fn scale(&self, q: &Q) -> SymmetryGenerator {
        SymmetryGenerator::new(self.xi.scale(q), self.a.scale(q), self.b.scale(q))
    }

    /// `η = a u + b`.
    pub fn eta(&self, m: &MetricSpace) -> RatFn {
        self.a.mul(&RatFn::symbol(m.table().u())).add(&self.b)
    }

    /// `λ = a − μ`.
    pub fn lambda(&self, m: &MetricSpace) -> RatFn {
        self.a.sub(&conformal_factor_of(m, &lie_derivative_metric(m, &self.xi)))
    }

    pub fn strings(&self) -> (Vec<String>, String, String) {
        (self.xi.strings(), self.a.to_expr().to_string(), self.b.to_expr().to_string())
    }

    pub fn display<'a>(&'a self, m: &'a MetricSpace) -> GeneratorDisplay<'a> {
        GeneratorDisplay { g: self, m }
    }
}

pub struct GeneratorDisplay<'a> {
    g: &'a SymmetryGenerator,
    m: &'a MetricSpace,
}

impl fmt::Display for GeneratorDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let eta = self.g.eta(self.m);
        let xi_zero = self.g.xi.is_zero();
        if !xi_zero {
            write!(f, "{}", self.g.xi.display(self.m))?;
        }
        if !eta.is_zero() {
            if !xi_zero {
                f.write_str(" + ")?;
            }
            write!(f, "({eta})*d/du")?;
        } else if xi_zero {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DeterminingReport {
    pub mu: RatFn,
    /// `(L_ξ g)_{ij} − μ g_{ij}`.
    pub conformal: Vec<Vec<RatFn>>,
    /// `a_i − ((2−n)/4) μ_i`.
    pub gradient: Vec<RatFn>,
    /// Source equation with the curvature term.
    pub source: RatFn,
    /// Source equation with `Δ_g μ` in place of the curvature term.
    pub source_laplacian_form: RatFn,
    /// `λ_i − ((n+2)/(n−2)) a_i`.
    pub lambda_chain: Vec<RatFn>,
    pub max_conformal: f64,
    pub max_gradient: f64,
    pub max_source: f64,
    pub verdict: bool,
    pub inconclusive: bool,
    /// Verdict on `source − source_laplacian_form`; meaningful once the
    /// conformal residual vanishes.
    pub forms_agree: Verdict,
}

impl DeterminingReport {
    pub fn max_residual(&self) -> f64 {
        self.max_conformal.max(self.max_gradient).max(self.max_source)
    }
}

pub(crate) struct Parts {
    pub mu: RatFn,
    pub conformal: Vec<Vec<RatFn>>,
    pub gradient: Vec<RatFn>,
    pub source: RatFn,
}

/// Symbolic residuals without any zero testing; linear in `(ξ, a, b)`.
pub(crate) fn parts(m: &MetricSpace, g: &SymmetryGenerator, f: &RatFn, fp: &RatFn) -> Parts {
    let n = m.dim();
    let nq = n as i64;
    let u = RatFn::symbol(m.table().u());
    let lg = lie_derivative_metric(m, &g.xi);
    let mu = conformal_factor_of(m, &lg);
    let conformal: Vec<Vec<RatFn>> = (0..n)
        .map(|i| (0..n).map(|j| lg[i][j].sub(&mu.mul(m.g(i, j)))).collect())
        .collect();
    let w = conformal_weight(n);
    let gradient = (0..n)
        .map(|i| g.a.diff(m.coord(i)).sub(&mu.diff(m.coord(i)).scale(&w)))
        .collect();
    let r = m.scalar_curvature();
    let mut curv = g.xi.apply(m, r);
    if !mu.is_zero() && !r.is_zero() {
        curv = curv.add(&mu.mul(r));
    }
    let kappa = qr(nq - 2, 4 * (nq - 1));
    let mut source = g.a.mul(&u).add(&g.b).mul(fp);
    source = source.add(&mu.sub(&g.a).mul(f));
    source = source.add(&curv.mul(&u).scale(&kappa));
    source = source.add(&m.laplacian(&g.b));
    Parts {
        mu,
        conformal,
        gradient,
        source,
    }
}

pub fn determining_residuals(
    m: &MetricSpace,
    g: &SymmetryGenerator,
    cls: &NonlinearityClass,
) -> Result<DeterminingReport, DetError> {
    let n = m.dim();
    cls.validate(n)?;
    g.check_canonical(m)?;
    let t = m.table();
    let nq = n as i64;
    let f = cls.f(t);
    let fp = f.diff(t.u());
    let p = parts(m, g, &f, &fp);
    let u = RatFn::symbol(t.u());

    let alt = g
        .a
        .mul(&u)
        .add(&g.b)
        .mul(&fp)
        .add(&p.mu.sub(&g.a).mul(&f))
        .add(&m.laplacian(&p.mu).mul(&u).scale(&qr(2 - nq, 4)))
        .add(&m.laplacian(&g.b));

    let lam = g.a.sub(&p.mu);
    let lambda_chain = (0..n)
        .map(|i| {
            lam.diff(m.coord(i))
                .sub(&g.a.diff(m.coord(i)).scale(&qr(nq + 2, nq - 2)))
        })
        .collect();

    let mut inconclusive = false;
    let mut all_zero = true;
    let mut scan = |rs: &mut dyn Iterator<Item = &RatFn>| -> f64 {
        let mut mx: f64 = 0.0;
        for r in rs {
            let rep = m.check(r);
            mx = mx.max(rep.max_abs);
            match rep.verdict {
                Verdict::Zero => {}
                Verdict::NonZero => all_zero = false,
                Verdict::Inconclusive => {
                    all_zero = false;
                    inconclusive = true;
                }
            }
        }
        mx
    };
    let max_conformal = scan(&mut p.conformal.iter().enumerate().flat_map(|(i, row)| row[i..].iter()));
    let max_gradient = scan(&mut p.gradient.iter());
    let max_source = scan(&mut std::iter::once(&p.source));
    let forms_agree = m.verdict(&p.source.sub(&alt));
    Ok(DeterminingReport {
        mu: p.mu,
        conformal: p.conformal,
        gradient: p.gradient,
        source: p.source,
        source_laplacian_form: alt,
        lambda_chain,
        max_conformal,
        max_gradient,
        max_source,
        verdict: all_zero,
        inconclusive,
        forms_agree,
    })
}

/// `(2−n)/4`.
pub fn conformal_weight(n: usize) -> Q {
    qr(2 - n as i64, 4)
}
