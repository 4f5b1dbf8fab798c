use std::collections::BTreeMap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exprcore::{
    parse, qi, qr, rat_report, Env, Expr, ParseError, RatFn, Symbol, SymbolTable, Verdict, ZeroReport,
    ZeroTestPolicy,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("metric is singular on the sample box")]
    Singular,
    #[error("metric is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("chart dimension must be at least 2")]
    TooSmall,
    #[error("vector field depends on jet variables")]
    JetDependence,
    #[error("determinant changes sign on the sample box")]
    IndefiniteDeterminant,
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("parse error in {what}: {err}")]
    Parse { what: String, err: ParseError },
    #[error("division by zero in {0}")]
    DivisionByZero(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn name(self) -> &'static str {
        match self {
            Signature::Riemannian => "riemannian",
            Signature::Lorentzian => "lorentzian",
        }
    }
}

/// Range used for the dependent variable when sampling.
pub const U_RANGE: (f64, f64) = (0.5, 2.0);
/// Range used for first and second jets when sampling.
pub const JET_RANGE: (f64, f64) = (-2.0, 2.0);

#[derive(Default)]
struct Cache {
    inverse: OnceLock<Result<(Vec<Vec<RatFn>>, RatFn), GeomError>>,
    sqrt_det: OnceLock<Result<RatFn, GeomError>>,
    christoffel: OnceLock<Vec<RatFn>>,
    contracted: OnceLock<Vec<RatFn>>,
    riemann: OnceLock<Vec<RatFn>>,
    ricci: OnceLock<Vec<RatFn>>,
    scalar: OnceLock<RatFn>,
}

/// A chart with a symmetric metric and lazily derived tensors.
pub struct MetricSpace {
    table: SymbolTable,
    g: Vec<Vec<RatFn>>,
    signature: Signature,
    bbox: Vec<(f64, f64)>,
    seed: u64,
    cache: Cache,
}

impl std::fmt::Debug for MetricSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricSpace")
            .field("coords", &self.table.coords())
            .field("g", &self.g)
            .field("signature", &self.signature)
            .field("box", &self.bbox)
            .finish()
    }
}

impl Clone for MetricSpace {
    fn clone(&self) -> Self {
        MetricSpace {
            table: self.table.clone(),
            g: self.g.clone(),
            signature: self.signature,
            bbox: self.bbox.clone(),
            seed: self.seed,
            cache: Cache::default(),
        }
    }
}

impl MetricSpace {
    /// Builds from canonical components. `bbox` gives the sampling range of
    /// each coordinate.
    pub fn new(
        table: SymbolTable,
        g: Vec<Vec<RatFn>>,
        signature: Signature,
        bbox: Vec<(f64, f64)>,
    ) -> Result<Self, GeomError> {
        let n = table.dim();
        if n < 2 {
            return Err(GeomError::TooSmall);
        }
        if g.len() != n {
            return Err(GeomError::Dimension { expected: n, got: g.len() });
        }
        for row in &g {
            if row.len() != n {
                return Err(GeomError::Dimension { expected: n, got: row.len() });
            }
        }
        if bbox.len() != n {
            return Err(GeomError::Dimension { expected: n, got: bbox.len() });
        }
        for i in 0..n {
            for j in i + 1..n {
                if !g[i][j].sub(&g[j][i]).is_zero() {
                    return Err(GeomError::NotSymmetric(i, j));
                }
            }
        }
        let m = MetricSpace {
            table,
            g,
            signature,
            bbox,
            seed: 0x9e0_5eed,
            cache: Cache::default(),
        };
        m.inverse()?;
        m.sqrt_det().map_err(|e| match e {
            GeomError::IndefiniteDeterminant => GeomError::Singular,
            other => other,
        })?;
        Ok(m)
    }

    /// Builds from expression strings in the grammar.
    pub fn from_strings<S: AsRef<str>>(
        coords: &[S],
        g: &[Vec<String>],
        signature: Signature,
        bbox: Vec<(f64, f64)>,
    ) -> Result<Self, GeomError> {
        let table = SymbolTable::new(coords).map_err(|e| GeomError::Inconsistent(e.to_string()))?;
        let mut rows = Vec::new();
        for (i, row) in g.iter().enumerate() {
            let mut out = Vec::new();
            for (j, s) in row.iter().enumerate() {
                let e = parse(s, &table).map_err(|err| GeomError::Parse {
                    what: format!("g[{i}][{j}]"),
                    err,
                })?;
                out.push(RatFn::from_expr(&e).map_err(|_| GeomError::DivisionByZero(format!("g[{i}][{j}]")))?);
            }
            rows.push(out);
        }
        MetricSpace::new(table, rows, signature, bbox)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.table.dim()
    }

    pub fn table(&self) -> &SymbolTable {
        &self.table
    }

    pub fn coord(&self, i: usize) -> &Symbol {
        self.table.coord(i)
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn sample_box(&self) -> &[(f64, f64)] {
        &self.bbox
    }

    pub fn g(&self, i: usize, j: usize) -> &RatFn {
        &self.g[i][j]
    }

    pub fn metric(&self) -> &[Vec<RatFn>] {
        &self.g
    }

    /// Zero-test policy with this chart's box, `u` in [0.5, 2], jets and
    /// parameters in their standard ranges.
    pub fn policy(&self) -> ZeroTestPolicy {
        let mut ranges = BTreeMap::new();
        for (i, s) in self.table.coords().iter().enumerate() {
            ranges.insert(s.clone(), self.bbox[i]);
        }
        ranges.insert(self.table.u().clone(), U_RANGE);
        for i in 0..self.dim() {
            ranges.insert(self.table.u1(i).clone(), JET_RANGE);
            for j in i..self.dim() {
                ranges.insert(self.table.u2(i, j).clone(), JET_RANGE);
            }
        }
        for p in self.table.params() {
            ranges.insert(p.clone(), (0.5, 2.0));
        }
        ZeroTestPolicy {
            ranges,
            seed: self.seed,
            ..ZeroTestPolicy::default()
        }
    }

    pub fn check(&self, r: &RatFn) -> ZeroReport {
        rat_report(r, &self.policy())
    }

    pub fn verdict(&self, r: &RatFn) -> Verdict {
        self.check(r).verdict
    }

    /// Random coordinate environment inside the box.
    pub fn sample_env(&self, rng: &mut impl Rng) -> Env {
        let mut env = Env::new().with_generic_seed(rng.gen());
        for (i, s) in self.table.coords().iter().enumerate() {
            let (lo, hi) = self.bbox[i];
            env.set(s, if hi > lo { rng.gen_range(lo..hi) } else { lo });
        }
        env
    }

    fn inverse(&self) -> Result<&(Vec<Vec<RatFn>>, RatFn), GeomError> {
        self.cache
            .inverse
            .get_or_init(|| invert(&self.g))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `g^{ij}`.
    pub fn g_inv(&self) -> &[Vec<RatFn>] {
        &self.inverse().expect("checked at construction").0
    }

    pub fn ginv(&self, i: usize, j: usize) -> &RatFn {
        &self.g_inv()[i][j]
    }

    pub fn det(&self) -> &RatFn {
        &self.inverse().expect("checked at construction").1
    }

    /// `√|det g|`, with the branch that is positive on the box.
    pub fn sqrt_det(&self) -> Result<&RatFn, GeomError> {
        self.cache
            .sqrt_det
            .get_or_init(|| self.compute_sqrt_det())
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Like [`sqrt_det`](Self::sqrt_det) for metrics known to be well formed.
    pub fn sqrt_g(&self) -> &RatFn {
        self.sqrt_det().expect("determinant has constant sign on the box")
    }

    fn sign_on_box(&self, r: &RatFn) -> Result<f64, GeomError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xde7);
        let (mut pos, mut neg) = (0, 0);
        for _ in 0..32 {
            if let Ok(v) = r.eval(&self.sample_env(&mut rng)) {
                if v > 0.0 {
                    pos += 1;
                } else if v < 0.0 {
                    neg += 1;
                }
            }
        }
        match (pos, neg) {
            (_, 0) if pos > 0 => Ok(1.0),
            (0, _) if neg > 0 => Ok(-1.0),
            _ => Err(GeomError::IndefiniteDeterminant),
        }
    }

    fn compute_sqrt_det(&self) -> Result<RatFn, GeomError> {
        let mut d = self.det().clone();
        if self.sign_on_box(&d)? < 0.0 {
            d = d.neg();
        }
        let root = match d.exact_sqrt() {
            Some(r) => r,
            None => d
                .pow_q(&qr(1, 2))
                .map_err(|_| GeomError::DivisionByZero("sqrt det".into()))?,
        };
        Ok(if self.sign_on_box(&root)? < 0.0 { root.neg() } else { root })
    }

    fn dg(&self) -> Vec<Vec<Vec<RatFn>>> {
        let n = self.dim();
        (0..n)
            .map(|l| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.g[l][j].diff(self.coord(k))).collect())
                    .collect()
            })
            .collect()
    }

    fn idx3(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.dim();
        (i * n + j) * n + k
    }

    fn idx4(&self, i: usize, j: usize, k: usize, s: usize) -> usize {
        let n = self.dim();
        ((i * n + j) * n + k) * n + s
    }

    /// `Γ^i_{jk}`.
    pub fn christoffel(&self, i: usize, j: usize, k: usize) -> &RatFn {
        let all = self.cache.christoffel.get_or_init(|| {
            let n = self.dim();
            let dg = self.dg();
            let half = qr(1, 2);
            let mut out = vec![RatFn::zero(); n * n * n];
            let entries: Vec<(usize, usize, usize)> = (0..n)
                .flat_map(|i| (0..n).flat_map(move |j| (j..n).map(move |k| (i, j, k))))
                .collect();
            let vals: Vec<RatFn> = entries
                .par_iter()
                .map(|&(i, j, k)| {
                    let mut acc = RatFn::zero();
                    for l in 0..n {
                        let gil = self.ginv(i, l);
                        if gil.is_zero() {
                            continue;
                        }
                        let s = dg[l][j][k].add(&dg[l][k][j]).sub(&dg[j][k][l]);
                        acc = acc.add(&gil.mul(&s));
                    }
                    acc.scale(&half)
                })
                .collect();
            for (&(i, j, k), v) in entries.iter().zip(vals) {
                out[self.idx3(i, j, k)] = v.clone();
                out[self.idx3(i, k, j)] = v;
            }
            out
        });
        &all[self.idx3(i, j, k)]
    }

    /// `Γ^i = g^{pq} Γ^i_{pq}`.
    pub fn contracted_christoffel(&self, i: usize) -> &RatFn {
        let all = self.cache.contracted.get_or_init(|| {
            let n = self.dim();
            (0..n)
                .map(|i| {
                    let mut acc = RatFn::zero();
                    for p in 0..n {
                        for q in 0..n {
                            let gpq = self.ginv(p, q);
                            if !gpq.is_zero() {
                                acc = acc.add(&gpq.mul(self.christoffel(i, p, q)));
                            }
                        }
                    }
                    acc
                })
                .collect()
        });
        &all[i]
    }

    /// `R^i_{jks} = Γ^i_{jk,s} − Γ^i_{js,k} + Γ^i_{ls}Γ^l_{jk} − Γ^i_{lk}Γ^l_{js}`.
    pub fn riemann(&self, i: usize, j: usize, k: usize, s: usize) -> &RatFn {
        let all = self.cache.riemann.get_or_init(|| {
            let n = self.dim();
            let _ = self.christoffel(0, 0, 0);
            let entries: Vec<(usize, usize, usize, usize)> = (0..n)
                .flat_map(|i| {
                    (0..n).flat_map(move |j| (0..n).flat_map(move |k| (k + 1..n).map(move |s| (i, j, k, s))))
                })
                .collect();
            let vals: Vec<RatFn> = entries
                .par_iter()
                .map(|&(i, j, k, s)| {
                    let mut acc = self
                        .christoffel(i, j, k)
                        .diff(self.coord(s))
                        .sub(&self.christoffel(i, j, s).diff(self.coord(k)));
                    for l in 0..n {
                        acc = acc
                            .add(&self.christoffel(i, l, s).mul(self.christoffel(l, j, k)))
                            .sub(&self.christoffel(i, l, k).mul(self.christoffel(l, j, s)));
                    }
                    acc
                })
                .collect();
            let mut out = vec![RatFn::zero(); n * n * n * n];
            for (&(i, j, k, s), v) in entries.iter().zip(vals) {
                out[self.idx4(i, j, s, k)] = v.neg();
                out[self.idx4(i, j, k, s)] = v;
            }
            out
        });
        &all[self.idx4(i, j, k, s)]
    }

    /// Mixed Ricci tensor `R^i_s = g^{jk} R^i_{jks}`.
    pub fn ricci(&self, i: usize, s: usize) -> &RatFn {
        let all = self.cache.ricci.get_or_init(|| {
            let n = self.dim();
            let _ = self.riemann(0, 0, 0, 0);
            let entries: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |s| (i, s))).collect();
            entries
                .par_iter()
                .map(|&(i, s)| {
                    let mut acc = RatFn::zero();
                    for j in 0..n {
                        for k in 0..n {
                            let gjk = self.ginv(j, k);
                            if !gjk.is_zero() {
                                acc = acc.add(&gjk.mul(self.riemann(i, j, k, s)));
                            }
                        }
                    }
                    acc
                })
                .collect()
        });
        &all[i * self.dim() + s]
    }

    /// Ricci with both indices down, `R_{ks} = g_{ki} R^i_s`.
    pub fn ricci_lower(&self, k: usize, s: usize) -> RatFn {
        let mut acc = RatFn::zero();
        for i in 0..self.dim() {
            acc = acc.add(&self.g[k][i].mul(self.ricci(i, s)));
        }
        acc
    }

    pub fn scalar_curvature(&self) -> &RatFn {
        self.cache.scalar.get_or_init(|| {
            let mut acc = RatFn::zero();
            for i in 0..self.dim() {
                acc = acc.add(self.ricci(i, i));
            }
            acc
        })
    }

    pub fn gradient(&self, phi: &RatFn) -> Vec<RatFn> {
        (0..self.dim()).map(|i| phi.diff(self.coord(i))).collect()
    }

    /// `(1/√|g|) ∂_i(√|g| g^{ij} ∂_j φ)`.
    pub fn laplace_divergence_form(&self, phi: &RatFn) -> RatFn {
        let n = self.dim();
        let sg = self.sqrt_g();
        let grad = self.gradient(phi);
        let mut acc = RatFn::zero();
        for i in 0..n {
            let mut flux = RatFn::zero();
            for (j, gj) in grad.iter().enumerate() {
                if !gj.is_zero() && !self.ginv(i, j).is_zero() {
                    flux = flux.add(&self.ginv(i, j).mul(gj));
                }
            }
            if flux.is_zero() {
                continue;
            }
            acc = acc.add(&sg.mul(&flux).diff(self.coord(i)));
        }
        acc.div(sg)
    }

    /// `g^{ij} φ_{ij} − Γ^i φ_i`.
    pub fn laplace_second_order_form(&self, phi: &RatFn) -> RatFn {
        let n = self.dim();
        let grad = self.gradient(phi);
        let mut acc = RatFn::zero();
        for i in 0..n {
            if grad[i].is_zero() {
                continue;
            }
            for j in 0..n {
                let gij = self.ginv(i, j);
                if !gij.is_zero() {
                    acc = acc.add(&gij.mul(&grad[i].diff(self.coord(j))));
                }
            }
            acc = acc.sub(&self.contracted_christoffel(i).mul(&grad[i]));
        }
        acc
    }

    /// Laplace–Beltrami operator; both forms are computed and must agree.
    pub fn laplace_beltrami(&self, phi: &RatFn) -> Result<RatFn, GeomError> {
        let a = self.laplace_divergence_form(phi);
        let b = self.laplace_second_order_form(phi);
        if a.sub(&b).is_zero() {
            Ok(b)
        } else {
            Err(GeomError::Inconsistent(format!("Laplacian forms differ for {phi}")))
        }
    }

    pub fn laplacian(&self, phi: &RatFn) -> RatFn {
        self.laplace_second_order_form(phi)
    }

    /// `(√g g^{ik})_{,k} + g^{pq}Γ^i_{pq} √g` for each `i`.
    pub fn a4_residuals(&self) -> Vec<RatFn> {
        let n = self.dim();
        let sg = self.sqrt_g();
        (0..n)
            .map(|i| {
                let mut acc = self.contracted_christoffel(i).mul(sg);
                for k in 0..n {
                    acc = acc.add(&sg.mul(self.ginv(i, k)).diff(self.coord(k)));
                }
                acc
            })
            .collect()
    }

    /// `R^i_{jks} + R^i_{ksj} + R^i_{sjk}` over all index tuples.
    pub fn bianchi_residuals(&self) -> Vec<RatFn> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for s in 0..n {
                        out.push(
                            self.riemann(i, j, k, s)
                                .add(self.riemann(i, k, s, j))
                                .add(self.riemann(i, s, j, k)),
                        );
                    }
                }
            }
        }
        out
    }

    /// `g · g^{-1} − I`, entrywise.
    pub fn inverse_residuals(&self) -> Vec<RatFn> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut acc = if i == j { RatFn::int(-1) } else { RatFn::zero() };
                for k in 0..n {
                    acc = acc.add(&self.g[i][k].mul(self.ginv(k, j)));
                }
                out.push(acc);
            }
        }
        out
    }

    /// `g_{ik}R^k_j − g_{jk}R^k_i` for `i < j`.
    pub fn ricci_symmetry_residuals(&self) -> Vec<RatFn> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.ricci_lower(i, j).sub(&self.ricci_lower(j, i)));
            }
        }
        out
    }

    /// Exports components as grammar strings.
    pub fn metric_strings(&self) -> Vec<Vec<String>> {
        self.g
            .iter()
            .map(|row| row.iter().map(|r| r.to_expr().to_string()).collect())
            .collect()
    }

    pub fn parse_scalar(&self, text: &str) -> Result<RatFn, GeomError> {
        let e: Expr = parse(text, &self.table).map_err(|err| GeomError::Parse {
            what: text.to_string(),
            err,
        })?;
        RatFn::from_expr(&e).map_err(|_| GeomError::DivisionByZero(text.to_string()))
    }

    pub fn table_mut(&mut self) -> &mut SymbolTable {
        &mut self.table
    }

    pub fn n_q(&self) -> crate::exprcore::Q {
        qi(self.dim() as i64)
    }
}

/// Gauss–Jordan inverse with exact pivoting; also returns the determinant.
fn invert(g: &[Vec<RatFn>]) -> Result<(Vec<Vec<RatFn>>, RatFn), GeomError> {
    let n = g.len();
    let mut a: Vec<Vec<RatFn>> = g.to_vec();
    let mut inv: Vec<Vec<RatFn>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { RatFn::one() } else { RatFn::zero() }).collect())
        .collect();
    let mut det = RatFn::one();
    for c in 0..n {
        let pivot = (c..n)
            .filter(|&r| !a[r][c].is_zero())
            .min_by_key(|&r| a[r][c].numer().len() + a[r][c].denom().len())
            .ok_or(GeomError::Singular)?;
        if pivot != c {
            a.swap(pivot, c);
            inv.swap(pivot, c);
            det = det.neg();
        }
        let p = a[c][c].clone();
        det = det.mul(&p);
        let pinv = p.inv();
        for j in 0..n {
            a[c][j] = a[c][j].mul(&pinv);
            inv[c][j] = inv[c][j].mul(&pinv);
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone();
            for j in 0..n {
                if !a[c][j].is_zero() {
                    a[r][j] = a[r][j].sub(&f.mul(&a[c][j]));
                }
                if !inv[c][j].is_zero() {
                    inv[r][j] = inv[r][j].sub(&f.mul(&inv[c][j]));
                }
            }
        }
    }
    Ok((inv, det))
}
