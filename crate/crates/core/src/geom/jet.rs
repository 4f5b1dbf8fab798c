use crate::exprcore::RatFn;

use super::MetricSpace;

/// `D_i E = ∂_i E + u_i ∂_u E + u_{ij} ∂_{u_j} E` for `E` of first order.
pub fn total_derivative(m: &MetricSpace, e: &RatFn, i: usize) -> RatFn {
    let t = m.table();
    let mut out = e.diff(m.coord(i));
    let du = e.diff(t.u());
    if !du.is_zero() {
        out = out.add(&RatFn::symbol(t.u1(i)).mul(&du));
    }
    for j in 0..m.dim() {
        let dj = e.diff(t.u1(j));
        if !dj.is_zero() {
            out = out.add(&RatFn::symbol(t.u2(i, j)).mul(&dj));
        }
    }
    out
}

/// `D_k A^k`.
pub fn total_divergence(m: &MetricSpace, a: &[RatFn]) -> RatFn {
    let mut acc = RatFn::zero();
    for (k, ak) in a.iter().enumerate() {
        if !ak.is_zero() {
            acc = acc.add(&total_derivative(m, ak, k));
        }
    }
    acc
}

/// `g^{ij} u_j`, raised gradient of `u` as jet expressions.
pub fn raised_jet(m: &MetricSpace) -> Vec<RatFn> {
    let n = m.dim();
    (0..n)
        .map(|i| {
            let mut acc = RatFn::zero();
            for j in 0..n {
                if !m.ginv(i, j).is_zero() {
                    acc = acc.add(&m.ginv(i, j).mul(&RatFn::symbol(m.table().u1(j))));
                }
            }
            acc
        })
        .collect()
}

/// True if `e` involves any first or second jet symbol.
pub fn has_jets(m: &MetricSpace, e: &RatFn) -> bool {
    let t = m.table();
    (0..m.dim()).any(|i| e.depends_on(t.u1(i)) || (i..m.dim()).any(|j| e.depends_on(t.u2(i, j))))
}
