use std::fmt;

use crate::detsys::{conformal_weight, determining_residuals, NonlinearityClass, SymmetryGenerator};
use crate::exprcore::{qi, qr, RatFn, Verdict, Q};
use crate::geom::{conformal_factor, total_divergence, MetricSpace};

use super::{prolong_apply, Lagrangian, NoetherError};

#[derive(Debug, Clone, PartialEq)]
pub enum NoetherKind {
    Variational,
    Divergence { potential: Vec<RatFn> },
    ScaledNonNoether { c: Q, potential: Vec<RatFn> },
    NotNoether,
}

#[derive(Debug, Clone)]
pub struct NoetherVerdict {
    pub kind: NoetherKind,
    /// `X^{(1)} L + L D_i ξ^i`.
    pub residual: RatFn,
    pub warning: Option<String>,
}

impl NoetherVerdict {
    pub fn is_noether(&self) -> bool {
        matches!(self.kind, NoetherKind::Variational | NoetherKind::Divergence { .. })
    }

    pub fn potential(&self) -> Option<&[RatFn]> {
        match &self.kind {
            NoetherKind::Divergence { potential } | NoetherKind::ScaledNonNoether { potential, .. } => Some(potential),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            NoetherKind::Variational => "Variational",
            NoetherKind::Divergence { .. } => "Divergence",
            NoetherKind::ScaledNonNoether { .. } => "ScaledNonNoether",
            NoetherKind::NotNoether => "NotNoether",
        }
    }
}

impl fmt::Display for NoetherVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            NoetherKind::Variational => f.write_str("Variational"),
            NoetherKind::Divergence { potential } => {
                write!(f, "Divergence (phi = [")?;
                for (i, p) in potential.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("])")
            }
            NoetherKind::ScaledNonNoether { c, .. } => write!(f, "ScaledNonNoether (c = {})", RatFn::constant(c.clone())),
            NoetherKind::NotNoether => write!(f, "NotNoether (residual = {})", self.residual),
        }
    }
}

/// `√g g^{ij} ψ_j` for each `i`.
fn flux(m: &MetricSpace, psi: &RatFn) -> Vec<RatFn> {
    let n = m.dim();
    let grad = m.gradient(psi);
    (0..n)
        .map(|i| {
            let mut acc = RatFn::zero();
            for (j, gj) in grad.iter().enumerate() {
                if !gj.is_zero() && !m.ginv(i, j).is_zero() {
                    acc = acc.add(&m.ginv(i, j).mul(gj));
                }
            }
            acc.mul(m.sqrt_g())
        })
        .collect()
}

/// Closed-form divergence potential for the classes that have one.
pub fn class_potential(m: &MetricSpace, cls: &NonlinearityClass, g: &SymmetryGenerator) -> Option<Vec<RatFn>> {
    let n = m.dim();
    let u = RatFn::symbol(m.table().u());
    let u2 = u.powi(2);
    let mu = conformal_factor(m, &g.xi);
    let fm = flux(m, &mu);
    match cls {
        NonlinearityClass::Critical => Some(fm.iter().map(|p| p.mul(&u2).scale(&qr(2 - n as i64, 8))).collect()),
        NonlinearityClass::PowerTwoDimSix => {
            let fl = flux(m, &m.laplacian(&mu));
            Some(
                fm.iter()
                    .zip(&fl)
                    .map(|(a, b)| a.mul(&u2).scale(&qr(-1, 2)).add(&b.mul(&u).scale(&qr(1, 2))))
                    .collect(),
            )
        }
        NonlinearityClass::Zero | NonlinearityClass::Linear | NonlinearityClass::Constant(_) => {
            let fb = flux(m, &g.b);
            Some(
                fm.iter()
                    .zip(&fb)
                    .map(|(a, b)| a.mul(&u2).scale(&qr(2 - n as i64, 8)).add(&b.mul(&u)))
                    .collect(),
            )
        }
        _ => None,
    }
}

/// `a − ((2−n)/4)μ` when constant.
pub fn scaling_constant(m: &MetricSpace, g: &SymmetryGenerator) -> Option<Q> {
    let mu = conformal_factor(m, &g.xi);
    let e = g.a.sub(&mu.scale(&conformal_weight(m.dim())));
    e.constant_value()
}

pub fn noether_classify(lag: &Lagrangian, g: &SymmetryGenerator) -> Result<NoetherVerdict, NoetherError> {
    let m = lag.metric;
    let rep = determining_residuals(m, g, &lag.class)?;
    if !rep.verdict {
        return Err(NoetherError::NotSymmetry(Box::new(rep)));
    }
    let residual = prolong_apply(lag, g)?;
    let mut inconclusive = false;
    let mut test = |e: &RatFn| match m.verdict(e) {
        Verdict::Zero => true,
        Verdict::NonZero => false,
        Verdict::Inconclusive => {
            inconclusive = true;
            false
        }
    };
    if test(&residual) {
        return Ok(NoetherVerdict {
            kind: NoetherKind::Variational,
            residual,
            warning: None,
        });
    }
    let potential = class_potential(m, &lag.class, g);
    if let Some(phi) = &potential {
        if test(&residual.sub(&total_divergence(m, phi))) {
            return Ok(NoetherVerdict {
                kind: NoetherKind::Divergence { potential: phi.clone() },
                residual,
                warning: None,
            });
        }
        if let Some(c) = scaling_constant(m, g) {
            if !num_traits::Zero::is_zero(&c) {
                // Strip the c·u∂u part before forming the potential.
                let unit = SymmetryGenerator::new(crate::geom::VectorField::zero(m.dim()), RatFn::one(), RatFn::zero());
                let rest = g.add(&unit.scale(&-c.clone()));
                let phi = class_potential(m, &lag.class, &rest).expect("same class");
                let two_c_l = lag.l.scale(&(qi(2) * &c));
                if test(&residual.sub(&two_c_l).sub(&total_divergence(m, &phi))) {
                    return Ok(NoetherVerdict {
                        kind: NoetherKind::ScaledNonNoether { c, potential: phi },
                        residual,
                        warning: None,
                    });
                }
            }
        }
    }
    Ok(NoetherVerdict {
        kind: NoetherKind::NotNoether,
        residual,
        warning: inconclusive.then(|| "inconclusive zero test".to_string()),
    })
}
