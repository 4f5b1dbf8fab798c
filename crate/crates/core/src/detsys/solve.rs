use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exprcore::{Env, RatFn, Q};
use crate::geom::{conformal_factor, field_rank, MetricSpace, VectorField, U_RANGE};
use crate::linalg;

use super::residuals::{conformal_weight, parts};
use super::{determining_residuals, DetError, NonlinearityClass, SymmetryGenerator};

/// Finite list of coordinate functions used to expand `ξ^i`, `a` and `b`.
#[derive(Debug, Clone)]
pub struct AnsatzBasis {
    funcs: Vec<RatFn>,
}

impl AnsatzBasis {
    pub fn new(funcs: Vec<RatFn>) -> Result<Self, DetError> {
        if funcs.is_empty() {
            return Err(DetError::EmptyBasis);
        }
        for (i, f) in funcs.iter().enumerate() {
            if f.is_zero() || funcs[..i].contains(f) {
                return Err(DetError::Basis(format!("duplicate or zero basis function {f}")));
            }
        }
        Ok(AnsatzBasis { funcs })
    }

    pub fn parse<S: AsRef<str>>(m: &MetricSpace, items: &[S]) -> Result<Self, DetError> {
        let funcs = items
            .iter()
            .map(|s| m.parse_scalar(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        for f in &funcs {
            if f.depends_on(m.table().u()) || crate::geom::has_jets(m, f) {
                return Err(DetError::Basis(format!("basis function {f} is not a function of the coordinates")));
            }
        }
        AnsatzBasis::new(funcs)
    }

    pub fn funcs(&self) -> &[RatFn] {
        &self.funcs
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn strings(&self) -> Vec<String> {
        self.funcs.iter().map(|f| f.to_expr().to_string()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub seed: u64,
    /// Sample points per unknown.
    pub oversample: usize,
    pub max_denominator: i64,
    pub rational_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0x501e,
            oversample: 3,
            max_denominator: 1000,
            rational_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub coefficients: Vec<f64>,
    pub generator: Option<SymmetryGenerator>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub generators: Vec<SymmetryGenerator>,
    pub inconclusive: Vec<Candidate>,
    pub basis: AnsatzBasis,
    pub unknowns: usize,
    pub sample_points: usize,
    pub singular_values: Vec<f64>,
    /// Largest dropped over smallest kept singular value.
    pub gap: f64,
}

impl SolveResult {
    /// Rank of the `ξ` parts.
    pub fn xi_dimension(&self, m: &MetricSpace) -> usize {
        let xs: Vec<VectorField> = self.generators.iter().map(|g| g.xi.clone()).collect();
        field_rank(m, &xs)
    }

    /// True if `target` is an exact rational combination of the found generators.
    pub fn contains(&self, m: &MetricSpace, target: &SymmetryGenerator) -> bool {
        // Stack (ξ, a, b) into one field of length n + 2.
        let lift = |g: &SymmetryGenerator| {
            let mut c = g.xi.comps().to_vec();
            c.push(g.a.clone());
            c.push(g.b.clone());
            VectorField::from_comps_unchecked(c)
        };
        let basis: Vec<VectorField> = self.generators.iter().map(lift).collect();
        if basis.is_empty() {
            return target.xi.is_zero() && target.a.is_zero() && target.b.is_zero();
        }
        crate::geom::express_in_span(m, &basis, &lift(target)).is_some()
    }
}

fn unknown_columns(n: usize, basis: &AnsatzBasis, with_b: bool) -> Vec<SymmetryGenerator> {
    let mut cols = Vec::new();
    for i in 0..n {
        for phi in basis.funcs() {
            let mut c = vec![RatFn::zero(); n];
            c[i] = phi.clone();
            cols.push(SymmetryGenerator::from_field(VectorField::from_comps_unchecked(c)));
        }
    }
    for phi in basis.funcs() {
        cols.push(SymmetryGenerator::new(VectorField::zero(n), phi.clone(), RatFn::zero()));
    }
    if with_b {
        for phi in basis.funcs() {
            cols.push(SymmetryGenerator::new(VectorField::zero(n), RatFn::zero(), phi.clone()));
        }
    }
    cols
}

fn draw_env(m: &MetricSpace, rng: &mut ChaCha8Rng) -> Env {
    let mut env = m.sample_env(rng);
    env.set(m.table().u(), rng.gen_range(U_RANGE.0..U_RANGE.1));
    for p in m.table().params() {
        env.set(p, rng.gen_range(0.5..2.0));
    }
    env
}

/// Finds every generator whose components lie in the span of `basis`.
pub fn solve_linear_ansatz(
    m: &MetricSpace,
    cls: &NonlinearityClass,
    basis: &AnsatzBasis,
    opts: &SolveOptions,
) -> Result<SolveResult, DetError> {
    let n = m.dim();
    cls.validate(n)?;
    let t = m.table();
    let f = cls.f(t);
    let fp = f.diff(t.u());
    m.scalar_curvature();
    let cols = unknown_columns(n, basis, !cls.forces_b_zero());
    let unknowns = cols.len();
    let residuals: Vec<Vec<RatFn>> = cols
        .par_iter()
        .map(|g| {
            let p = parts(m, g, &f, &fp);
            let mut out = Vec::new();
            for i in 0..n {
                out.extend(p.conformal[i][i..].iter().cloned());
            }
            out.extend(p.gradient);
            out.push(p.source);
            out
        })
        .collect();
    let per_point = residuals[0].len();
    let points = opts.oversample.max(1) * unknowns;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ m.seed());
    let mut envs = Vec::with_capacity(points);
    while envs.len() < points {
        envs.push(draw_env(m, &mut rng));
    }
    let rows: Vec<Option<Vec<f64>>> = envs
        .par_iter()
        .map(|env| {
            let mut block = vec![0.0; per_point * unknowns];
            for (c, res) in residuals.iter().enumerate() {
                for (r, e) in res.iter().enumerate() {
                    let v = e.eval(env).ok()?;
                    if !v.is_finite() {
                        return None;
                    }
                    block[r * unknowns + c] = v;
                }
            }
            Some(block)
        })
        .collect();
    let good: Vec<Vec<f64>> = rows.into_iter().flatten().collect();
    if good.len() < points / 2 {
        return Err(DetError::Sampling);
    }
    let mut a = DMatrix::zeros(good.len() * per_point, unknowns);
    for (p, block) in good.iter().enumerate() {
        for r in 0..per_point {
            for c in 0..unknowns {
                a[(p * per_point + r, c)] = block[r * unknowns + c];
            }
        }
    }
    linalg::normalize_rows(&mut a);
    let ns = linalg::nullspace(&a);
    let sample_points = good.len();

    let mut generators = Vec::new();
    let mut inconclusive = Vec::new();
    if ns.basis.ncols() > 0 {
        let rr = linalg::rref_rows(&ns.basis);
        for row in rr.row_iter() {
            let coeffs: Vec<f64> = row.iter().copied().collect();
            let qs: Option<Vec<Q>> = coeffs
                .iter()
                .map(|v| linalg::rationalize(*v, opts.max_denominator, opts.rational_tol))
                .collect();
            let Some(qs) = qs else {
                inconclusive.push(Candidate {
                    coefficients: coeffs,
                    generator: None,
                    reason: "coefficients do not round to small rationals".into(),
                });
                continue;
            };
            let mut g = SymmetryGenerator::new(VectorField::zero(n), RatFn::zero(), RatFn::zero());
            for (col, q) in cols.iter().zip(&qs) {
                if !num_traits::Zero::is_zero(q) {
                    g = g.add(&col.scale(q));
                }
            }
            let rep = determining_residuals(m, &g, cls)?;
            if rep.verdict {
                generators.push(g);
            } else {
                inconclusive.push(Candidate {
                    coefficients: coeffs,
                    generator: Some(g),
                    reason: format!("fails symbolic check (max residual {:.3e})", rep.max_residual()),
                });
            }
        }
    }
    if matches!(
        cls,
        NonlinearityClass::Zero | NonlinearityClass::Linear | NonlinearityClass::Constant(_)
    ) {
        normalize_scaling(m, &mut generators);
    }
    Ok(SolveResult {
        generators,
        inconclusive,
        basis: basis.clone(),
        unknowns,
        sample_points,
        singular_values: ns.singular_values,
        gap: ns.gap,
    })
}

/// Moves the constant `c = a − ((2−n)/4)μ` of each generator onto the pure
/// `u∂u` generator when one was found, and records `c` on every generator.
fn normalize_scaling(m: &MetricSpace, gens: &mut [SymmetryGenerator]) {
    let w = conformal_weight(m.dim());
    let excess = |g: &SymmetryGenerator| -> Option<Q> {
        let mu = conformal_factor(m, &g.xi);
        g.a.sub(&mu.scale(&w)).constant_value()
    };
    let pure = gens
        .iter()
        .position(|g| g.xi.is_zero() && g.b.is_zero() && g.a.as_constant().is_some_and(|c| !num_traits::Zero::is_zero(c)));
    if let Some(p) = pure {
        let unit = {
            let g = &gens[p];
            let c = g.a.constant_value().expect("constant");
            g.scale(&c.recip())
        };
        gens[p] = unit.clone();
        for (i, g) in gens.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            if let Some(c) = excess(g) {
                if !num_traits::Zero::is_zero(&c) {
                    *g = g.add(&unit.scale(&-c));
                }
            }
        }
    }
    for g in gens.iter_mut() {
        g.c = excess(g);
    }
}
