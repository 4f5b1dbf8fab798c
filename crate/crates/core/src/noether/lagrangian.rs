use crate::detsys::{DetError, NonlinearityClass, SymmetryGenerator};
use crate::exprcore::{qr, RatFn};
use crate::geom::{covariant_divergence, raised_jet, total_derivative, MetricSpace};

use super::NoetherError;

/// `L = (√g/2) g^{ij} u_i u_j − √g F(u)`.
#[derive(Debug, Clone)]
pub struct Lagrangian<'m> {
    pub metric: &'m MetricSpace,
    pub class: NonlinearityClass,
    pub l: RatFn,
    pub f: RatFn,
    pub big_f: RatFn,
}

impl<'m> Lagrangian<'m> {
    pub fn new(m: &'m MetricSpace, cls: &NonlinearityClass) -> Result<Self, DetError> {
        cls.validate(m.dim())?;
        let t = m.table();
        let f = cls.f(t);
        let big_f = cls.antiderivative(t);
        let sg = m.sqrt_g();
        let raised = raised_jet(m);
        let mut kin = RatFn::zero();
        for (i, r) in raised.iter().enumerate() {
            kin = kin.add(&r.mul(&RatFn::symbol(t.u1(i))));
        }
        let l = sg.mul(&kin.scale(&qr(1, 2)).sub(&big_f));
        Ok(Lagrangian {
            metric: m,
            class: cls.clone(),
            l,
            f,
            big_f,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// `∂L/∂u_k = √g g^{kj} u_j`.
    pub fn momentum(&self, k: usize) -> RatFn {
        self.l.diff(self.metric.table().u1(k))
    }
}

/// `E(L) = ∂L/∂u − D_k ∂L/∂u_k`.
pub fn euler_lagrange(lag: &Lagrangian) -> RatFn {
    let m = lag.metric;
    let mut e = lag.l.diff(m.table().u());
    for k in 0..m.dim() {
        e = e.sub(&total_derivative(m, &lag.momentum(k), k));
    }
    e
}

/// First prolongation coefficient `a_i u + b_i + (a δ^j_i − ξ^j_{,i}) u_j`.
pub fn prolongation_coefficient(m: &MetricSpace, g: &SymmetryGenerator, i: usize) -> RatFn {
    let t = m.table();
    let x = m.coord(i);
    let u = RatFn::symbol(t.u());
    let mut out = g.a.diff(x).mul(&u).add(&g.b.diff(x));
    out = out.add(&g.a.mul(&RatFn::symbol(t.u1(i))));
    for j in 0..m.dim() {
        let d = g.xi.comp(j).diff(x);
        if !d.is_zero() {
            out = out.sub(&d.mul(&RatFn::symbol(t.u1(j))));
        }
    }
    out
}

/// `X^{(1)} L + L D_i ξ^i`, computed from the prolongation and from the
/// closed form; the two must agree.
pub fn prolong_apply(lag: &Lagrangian, g: &SymmetryGenerator) -> Result<RatFn, NoetherError> {
    let direct = prolong_direct(lag, g);
    let closed = prolong_closed(lag, g)?;
    if lag.metric.verdict(&direct.sub(&closed)) != crate::exprcore::Verdict::Zero {
        return Err(NoetherError::Inconsistent(format!(
            "prolongation paths disagree for {}",
            g.display(lag.metric)
        )));
    }
    Ok(closed)
}

pub fn prolong_direct(lag: &Lagrangian, g: &SymmetryGenerator) -> RatFn {
    let m = lag.metric;
    let t = m.table();
    let l = &lag.l;
    let mut out = RatFn::zero();
    let mut div = RatFn::zero();
    for i in 0..m.dim() {
        let xi = g.xi.comp(i);
        if !xi.is_zero() {
            out = out.add(&xi.mul(&l.diff(m.coord(i))));
            div = div.add(&xi.diff(m.coord(i)));
        }
        out = out.add(&prolongation_coefficient(m, g, i).mul(&l.diff(t.u1(i))));
    }
    out = out.add(&g.eta(m).mul(&l.diff(t.u())));
    out.add(&l.mul(&div))
}

/// `½[g^{ks} div ξ + 2a g^{ks} − ∇^kξ^s − ∇^sξ^k]√g u_k u_s − √g div ξ F
///  − √g (a u + b) f + (a_i u + b_i) √g g^{is} u_s`.
pub fn prolong_closed(lag: &Lagrangian, g: &SymmetryGenerator) -> Result<RatFn, NoetherError> {
    let m = lag.metric;
    let n = m.dim();
    let t = m.table();
    let sg = m.sqrt_g();
    let u = RatFn::symbol(t.u());
    let div = covariant_divergence(m, &g.xi)?;
    // ∇_j ξ^s
    let nabla: Vec<Vec<RatFn>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|s| {
                    let mut acc = g.xi.comp(s).diff(m.coord(j));
                    for l in 0..n {
                        if !g.xi.comp(l).is_zero() {
                            acc = acc.add(&m.christoffel(s, j, l).mul(g.xi.comp(l)));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    // ∇^k ξ^s = g^{kj} ∇_j ξ^s
    let up: Vec<Vec<RatFn>> = (0..n)
        .map(|k| {
            (0..n)
                .map(|s| {
                    let mut acc = RatFn::zero();
                    for (j, row) in nabla.iter().enumerate() {
                        if !m.ginv(k, j).is_zero() && !row[s].is_zero() {
                            acc = acc.add(&m.ginv(k, j).mul(&row[s]));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut quad = RatFn::zero();
    let two_a = g.a.scale(&crate::exprcore::qi(2));
    for k in 0..n {
        for s in 0..n {
            let coef = m
                .ginv(k, s)
                .mul(&div.add(&two_a))
                .sub(&up[k][s])
                .sub(&up[s][k]);
            if !coef.is_zero() {
                quad = quad.add(&coef.mul(&RatFn::symbol(t.u1(k))).mul(&RatFn::symbol(t.u1(s))));
            }
        }
    }
    let mut out = quad.scale(&qr(1, 2));
    out = out.sub(&div.mul(&lag.big_f));
    out = out.sub(&g.eta(m).mul(&lag.f));
    let raised = raised_jet(m);
    for (i, r) in raised.iter().enumerate() {
        let x = m.coord(i);
        let c = g.a.diff(x).mul(&u).add(&g.b.diff(x));
        if !c.is_zero() {
            out = out.add(&c.mul(r));
        }
    }
    Ok(out.mul(sg))
}
