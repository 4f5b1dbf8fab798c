use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metric::{GeomError, MetricSpace};
use crate::exprcore::{qi, qr, RatFn, Verdict, ZeroReport, Q};
use crate::linalg;

/// Vector field `ξ^i ∂_i` whose components depend on coordinates only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    comps: Vec<RatFn>,
}

impl VectorField {
    pub fn new(m: &MetricSpace, comps: Vec<RatFn>) -> Result<Self, GeomError> {
        if comps.len() != m.dim() {
            return Err(GeomError::Dimension {
                expected: m.dim(),
                got: comps.len(),
            });
        }
        let t = m.table();
        for c in &comps {
            let jet = c.depends_on(t.u())
                || (0..m.dim()).any(|i| {
                    c.depends_on(t.u1(i)) || (i..m.dim()).any(|j| c.depends_on(t.u2(i, j)))
                });
            if jet {
                return Err(GeomError::JetDependence);
            }
        }
        Ok(VectorField { comps })
    }

    pub fn from_strings<S: AsRef<str>>(m: &MetricSpace, comps: &[S]) -> Result<Self, GeomError> {
        let parsed = comps
            .iter()
            .map(|s| m.parse_scalar(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        VectorField::new(m, parsed)
    }

    /// Coordinate field `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        VectorField {
            comps: (0..n).map(|j| if i == j { RatFn::one() } else { RatFn::zero() }).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        VectorField {
            comps: vec![RatFn::zero(); n],
        }
    }

    pub fn from_comps_unchecked(comps: Vec<RatFn>) -> Self {
        VectorField { comps }
    }

    pub fn comps(&self) -> &[RatFn] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &RatFn {
        &self.comps[i]
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(RatFn::is_zero)
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField {
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn scale(&self, q: &Q) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|a| a.scale(q)).collect(),
        }
    }

    pub fn strings(&self) -> Vec<String> {
        self.comps.iter().map(|c| c.to_expr().to_string()).collect()
    }

    /// `ξ(φ) = ξ^i ∂_i φ`.
    pub fn apply(&self, m: &MetricSpace, phi: &RatFn) -> RatFn {
        let mut acc = RatFn::zero();
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&c.mul(&phi.diff(m.coord(i))));
            }
        }
        acc
    }

    pub fn display<'a>(&'a self, m: &'a MetricSpace) -> FieldDisplay<'a> {
        FieldDisplay { f: self, m }
    }
}

pub struct FieldDisplay<'a> {
    f: &'a VectorField,
    m: &'a MetricSpace,
}

impl fmt::Display for FieldDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.f.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                out.write_str(" + ")?;
            }
            first = false;
            let d = self.m.coord(i);
            if c.is_one() {
                write!(out, "d/d{d}")?;
            } else {
                write!(out, "({c})*d/d{d}")?;
            }
        }
        if first {
            out.write_str("0")?;
        }
        Ok(())
    }
}

/// `(L_ξ g)_{ij} = ξ^k g_{ij,k} + g_{kj} ξ^k_{,i} + g_{ik} ξ^k_{,j}`.
pub fn lie_derivative_metric(m: &MetricSpace, xi: &VectorField) -> Vec<Vec<RatFn>> {
    let n = m.dim();
    let dxi: Vec<Vec<RatFn>> = (0..n)
        .map(|k| (0..n).map(|i| xi.comp(k).diff(m.coord(i))).collect())
        .collect();
    let mut out = vec![vec![RatFn::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = RatFn::zero();
            for k in 0..n {
                if !xi.comp(k).is_zero() {
                    acc = acc.add(&xi.comp(k).mul(&m.g(i, j).diff(m.coord(k))));
                }
                if !dxi[k][i].is_zero() {
                    acc = acc.add(&m.g(k, j).mul(&dxi[k][i]));
                }
                if !dxi[k][j].is_zero() {
                    acc = acc.add(&m.g(i, k).mul(&dxi[k][j]));
                }
            }
            out[j][i] = acc.clone();
            out[i][j] = acc;
        }
    }
    out
}

/// `μ = g^{ij}(L_ξ g)_{ij} / n`.
pub fn conformal_factor_of(m: &MetricSpace, lg: &[Vec<RatFn>]) -> RatFn {
    let n = m.dim();
    let mut tr = RatFn::zero();
    for i in 0..n {
        for j in 0..n {
            if !m.ginv(i, j).is_zero() && !lg[i][j].is_zero() {
                tr = tr.add(&m.ginv(i, j).mul(&lg[i][j]));
            }
        }
    }
    tr.scale(&qr(1, n as i64))
}

pub fn conformal_factor(m: &MetricSpace, xi: &VectorField) -> RatFn {
    conformal_factor_of(m, &lie_derivative_metric(m, xi))
}

/// `(L_ξ g)_{ij} − μ g_{ij}` for `i ≤ j`.
pub fn conformal_residuals(m: &MetricSpace, xi: &VectorField) -> (RatFn, Vec<RatFn>) {
    let lg = lie_derivative_metric(m, xi);
    let mu = conformal_factor_of(m, &lg);
    let n = m.dim();
    let mut res = Vec::new();
    for i in 0..n {
        for j in i..n {
            res.push(lg[i][j].sub(&mu.mul(m.g(i, j))));
        }
    }
    (mu, res)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConformalVerdict {
    Killing,
    Homothety(Q),
    ConformalKilling,
    NotConformal,
}

impl ConformalVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ConformalVerdict::Killing => "Killing",
            ConformalVerdict::Homothety(_) => "Homothety",
            ConformalVerdict::ConformalKilling => "ConformalKilling",
            ConformalVerdict::NotConformal => "NotConformal",
        }
    }

    pub fn is_conformal(&self) -> bool {
        !matches!(self, ConformalVerdict::NotConformal)
    }
}

#[derive(Debug, Clone)]
pub struct ConformalReport {
    pub verdict: ConformalVerdict,
    pub mu: RatFn,
    /// Largest sampled magnitude of `(L_ξ g)_{ij} − μ g_{ij}`.
    pub max_residual: f64,
    /// `div ξ − (n/2) μ`.
    pub divergence_check: Verdict,
    pub warning: Option<String>,
}

impl fmt::Display for ConformalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.verdict {
            ConformalVerdict::Killing => write!(f, "Killing (μ=0)"),
            ConformalVerdict::Homothety(c) => write!(f, "Homothety (μ={})", RatFn::constant(c.clone())),
            ConformalVerdict::ConformalKilling => write!(f, "ConformalKilling (μ={})", self.mu),
            ConformalVerdict::NotConformal => write!(f, "NotConformal"),
        }
    }
}

pub fn conformal_check(m: &MetricSpace, xi: &VectorField) -> ConformalReport {
    let (mu, res) = conformal_residuals(m, xi);
    let reports: Vec<ZeroReport> = res.iter().map(|r| m.check(r)).collect();
    let max_residual = reports.iter().map(|r| r.max_abs).fold(0.0, f64::max);
    let mut warning = None;
    let verdict = if reports.iter().all(|r| r.verdict == Verdict::Zero) {
        if mu.is_zero() {
            ConformalVerdict::Killing
        } else if let Some(c) = mu.as_constant() {
            ConformalVerdict::Homothety(c.clone())
        } else {
            ConformalVerdict::ConformalKilling
        }
    } else {
        if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
            warning = Some("inconclusive zero test on conformal residual".to_string());
        }
        ConformalVerdict::NotConformal
    };
    let divergence_check = match covariant_divergence(m, xi) {
        Ok(div) => m.verdict(&div.sub(&mu.scale(&qr(m.dim() as i64, 2)))),
        Err(_) => Verdict::NonZero,
    };
    ConformalReport {
        verdict,
        mu,
        max_residual,
        divergence_check,
        warning,
    }
}

/// `∇_j ξ^j`, computed as `ξ^j_{,j} + Γ^l_{jl} ξ^j` and as
/// `(1/√g)(√g ξ^j)_{,j}`; the two must agree.
pub fn covariant_divergence(m: &MetricSpace, xi: &VectorField) -> Result<RatFn, GeomError> {
    let n = m.dim();
    let mut a = RatFn::zero();
    for j in 0..n {
        a = a.add(&xi.comp(j).diff(m.coord(j)));
        if xi.comp(j).is_zero() {
            continue;
        }
        for l in 0..n {
            a = a.add(&m.christoffel(l, j, l).mul(xi.comp(j)));
        }
    }
    let sg = m.sqrt_det()?;
    let mut b = RatFn::zero();
    for j in 0..n {
        b = b.add(&sg.mul(xi.comp(j)).diff(m.coord(j)));
    }
    let b = b.div(sg);
    if a.sub(&b).is_zero() {
        Ok(a)
    } else {
        Err(GeomError::Inconsistent("divergence forms differ".into()))
    }
}

/// `[ξ,η]^i = ξ^j η^i_{,j} − η^j ξ^i_{,j}`.
pub fn lie_bracket(m: &MetricSpace, xi: &VectorField, eta: &VectorField) -> Result<VectorField, GeomError> {
    if xi.dim() != m.dim() || eta.dim() != m.dim() {
        return Err(GeomError::Dimension {
            expected: m.dim(),
            got: xi.dim().min(eta.dim()),
        });
    }
    let comps = (0..m.dim())
        .map(|i| xi.apply(m, eta.comp(i)).sub(&eta.apply(m, xi.comp(i))))
        .collect();
    Ok(VectorField { comps })
}

/// `∇_k ξ^i` as `[i][k]`.
fn covariant_gradient(m: &MetricSpace, xi: &VectorField) -> Vec<Vec<RatFn>> {
    let n = m.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut acc = xi.comp(i).diff(m.coord(k));
                    for l in 0..n {
                        if !xi.comp(l).is_zero() {
                            acc = acc.add(&m.christoffel(i, k, l).mul(xi.comp(l)));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Rough Laplacian `g^{jk}∇_j∇_k ξ^i`.
pub fn vector_laplacian(m: &MetricSpace, xi: &VectorField) -> Vec<RatFn> {
    let n = m.dim();
    let t = covariant_gradient(m, xi);
    (0..n)
        .map(|i| {
            let mut acc = RatFn::zero();
            for j in 0..n {
                for k in 0..n {
                    let gjk = m.ginv(j, k);
                    if gjk.is_zero() {
                        continue;
                    }
                    let mut h = t[i][k].diff(m.coord(j));
                    for l in 0..n {
                        h = h.add(&m.christoffel(i, j, l).mul(&t[l][k]));
                        h = h.sub(&m.christoffel(l, j, k).mul(&t[i][l]));
                    }
                    acc = acc.add(&gjk.mul(&h));
                }
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct IdentityReport {
    /// `div ξ − (n/2)μ`.
    pub divergence: ZeroReport,
    /// `Δ_g ξ^i + R^i_j ξ^j − ((2−n)/2) g^{ij} μ_j`, per component.
    pub vector: Vec<ZeroReport>,
    /// `Δ_g μ + (ξ^i R_{,i} + μR)/(n−1)`.
    pub scalar: ZeroReport,
}

impl IdentityReport {
    pub fn all_zero(&self) -> bool {
        self.divergence.verdict == Verdict::Zero
            && self.vector.iter().all(|r| r.verdict == Verdict::Zero)
            && self.scalar.verdict == Verdict::Zero
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.divergence.verdict != Verdict::Zero {
            out.push("divergence identity".to_string());
        }
        for (i, r) in self.vector.iter().enumerate() {
            if r.verdict != Verdict::Zero {
                out.push(format!("vector identity component {i}"));
            }
        }
        if self.scalar.verdict != Verdict::Zero {
            out.push("conformal factor identity".to_string());
        }
        out
    }
}

/// Identities satisfied by every conformal field with factor `μ`.
pub fn conformal_identity_checks(m: &MetricSpace, xi: &VectorField, mu: &RatFn) -> Result<IdentityReport, GeomError> {
    let n = m.dim();
    let nq = n as i64;
    let div = covariant_divergence(m, xi)?;
    let divergence = m.check(&div.sub(&mu.scale(&qr(nq, 2))));
    let lap = vector_laplacian(m, xi);
    let dmu = m.gradient(mu);
    let coeff = qr(2 - nq, 2);
    let vector = (0..n)
        .map(|i| {
            let mut acc = lap[i].clone();
            for j in 0..n {
                if !xi.comp(j).is_zero() {
                    acc = acc.add(&m.ricci(i, j).mul(xi.comp(j)));
                }
                if !m.ginv(i, j).is_zero() && !dmu[j].is_zero() {
                    acc = acc.sub(&m.ginv(i, j).mul(&dmu[j]).scale(&coeff));
                }
            }
            m.check(&acc)
        })
        .collect();
    let r = m.scalar_curvature();
    let lhs = m.laplacian(mu);
    let inner = xi.apply(m, r).add(&mu.mul(r));
    let scalar = m.check(&lhs.add(&inner.scale(&qr(1, nq - 1))));
    Ok(IdentityReport {
        divergence,
        vector,
        scalar,
    })
}

fn sample_matrix(m: &MetricSpace, fields: &[VectorField], points: usize, seed: u64) -> Option<DMatrix<f64>> {
    let n = fields.first().map_or(m.dim(), VectorField::dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(points * n, fields.len());
    let mut p = 0;
    let mut attempts = 0;
    while p < points {
        attempts += 1;
        if attempts > points * 20 {
            return None;
        }
        let env = m.sample_env(&mut rng);
        let vals: Option<Vec<Vec<f64>>> = fields
            .iter()
            .map(|f| f.comps().iter().map(|c| c.eval(&env).ok()).collect())
            .collect();
        let Some(vals) = vals else { continue };
        for (c, v) in vals.iter().enumerate() {
            for i in 0..n {
                a[(p * n + i, c)] = v[i];
            }
        }
        p += 1;
    }
    Some(a)
}

/// Rank of a family of fields over sampled evaluations.
pub fn field_rank(m: &MetricSpace, fields: &[VectorField]) -> usize {
    if fields.is_empty() {
        return 0;
    }
    match sample_matrix(m, fields, 3 * fields.len() + 4, m.seed() ^ 0xf1e1d) {
        Some(a) => linalg::rank(&a),
        None => 0,
    }
}

#[derive(Debug, Clone)]
pub struct ClosureReport {
    /// `c[a][b][k]`: `[ξ_a, ξ_b] ≈ Σ_k c_k ξ_k`.
    pub constants: Vec<Vec<Vec<f64>>>,
    pub max_residual: f64,
}

impl ClosureReport {
    pub fn closes(&self) -> bool {
        self.max_residual < 1e-9
    }
}

/// Checks that brackets of `basis` lie in its span by least squares over
/// sampled evaluations.
pub fn bracket_closure(m: &MetricSpace, basis: &[VectorField]) -> Result<ClosureReport, GeomError> {
    let k = basis.len();
    let points = 3 * k + 4;
    let seed = m.seed() ^ 0xb7ac;
    let a = sample_matrix(m, basis, points, seed).ok_or(GeomError::Singular)?;
    let mut constants = vec![vec![vec![0.0; k]; k]; k];
    let mut max_residual: f64 = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let br = lie_bracket(m, &basis[i], &basis[j])?;
            let b = sample_matrix(m, std::slice::from_ref(&br), points, seed).ok_or(GeomError::Singular)?;
            let rhs = DVector::from_column_slice(b.column(0).as_slice());
            let (x, r) = linalg::least_squares(&a, &rhs);
            let scale = 1.0 + rhs.norm();
            max_residual = max_residual.max(r / scale);
            for c in 0..k {
                constants[i][j][c] = x[c];
                constants[j][i][c] = -x[c];
            }
        }
    }
    Ok(ClosureReport {
        constants,
        max_residual,
    })
}

/// Exact coefficient vector of `target` in the span of `basis`, if the
/// sampled least-squares solution rounds to small rationals that verify
/// symbolically.
pub fn express_in_span(m: &MetricSpace, basis: &[VectorField], target: &VectorField) -> Option<Vec<Q>> {
    let k = basis.len();
    let points = 3 * k + 4;
    let seed = m.seed() ^ 0x5ba7;
    let a = sample_matrix(m, basis, points, seed)?;
    let b = sample_matrix(m, std::slice::from_ref(target), points, seed)?;
    let rhs = DVector::from_column_slice(b.column(0).as_slice());
    let (x, _) = linalg::least_squares(&a, &rhs);
    let coeffs: Vec<Q> = x
        .iter()
        .map(|v| linalg::rationalize(*v, 10_000, 1e-7))
        .collect::<Option<_>>()?;
    let mut acc = VectorField::zero(target.dim());
    for (f, c) in basis.iter().zip(&coeffs) {
        acc = acc.add(&f.scale(c));
    }
    let diff = acc.add(&target.scale(&qi(-1)));
    diff.is_zero().then_some(coeffs)
}
