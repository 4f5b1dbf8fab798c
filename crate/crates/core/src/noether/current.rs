use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detsys::{conformal_weight, poisson_equation, NonlinearityClass, SymmetryGenerator};
use crate::exprcore::{qi, qr, Env, RatFn, Verdict};
use crate::geom::{conformal_factor, raised_jet, total_divergence, MetricSpace, Signature, VectorField, JET_RANGE};

use super::{noether_classify, Lagrangian, NoetherError, NoetherVerdict};

#[derive(Debug, Clone)]
pub struct ConservedCurrent {
    pub components: Vec<RatFn>,
    pub generator: SymmetryGenerator,
    pub class: NonlinearityClass,
    pub verdict: NoetherVerdict,
}

impl ConservedCurrent {
    pub fn strings(&self) -> Vec<String> {
        self.components.iter().map(|c| c.to_expr().to_string()).collect()
    }
}

/// `√g(½ g^{ij} ξ^k − g^{kj} ξ^i) u_i u_j`.
fn kinetic_part(m: &MetricSpace, xi: &VectorField) -> Vec<RatFn> {
    let t = m.table();
    let n = m.dim();
    let raised = raised_jet(m);
    let mut grad2 = RatFn::zero();
    let mut xu = RatFn::zero();
    for i in 0..n {
        grad2 = grad2.add(&raised[i].mul(&RatFn::symbol(t.u1(i))));
        if !xi.comp(i).is_zero() {
            xu = xu.add(&xi.comp(i).mul(&RatFn::symbol(t.u1(i))));
        }
    }
    (0..n)
        .map(|k| {
            xi.comp(k)
                .mul(&grad2)
                .scale(&qr(1, 2))
                .sub(&raised[k].mul(&xu))
                .mul(m.sqrt_g())
        })
        .collect()
}

/// `√g g^{kj}((2−n)/4 (μ u u_j − ½ μ_j u²) + b u_j − b_j u)`.
fn conformal_part(m: &MetricSpace, mu: &RatFn, b: &RatFn) -> Vec<RatFn> {
    let t = m.table();
    let n = m.dim();
    let u = RatFn::symbol(t.u());
    let w = conformal_weight(n);
    let inner: Vec<RatFn> = (0..n)
        .map(|j| {
            let uj = RatFn::symbol(t.u1(j));
            let x = m.coord(j);
            mu.mul(&u)
                .mul(&uj)
                .sub(&mu.diff(x).mul(&u.powi(2)).scale(&qr(1, 2)))
                .scale(&w)
                .add(&b.mul(&uj))
                .sub(&b.diff(x).mul(&u))
        })
        .collect();
    raise(m, &inner)
}

fn raise(m: &MetricSpace, v: &[RatFn]) -> Vec<RatFn> {
    let n = m.dim();
    (0..n)
        .map(|k| {
            let mut acc = RatFn::zero();
            for (j, vj) in v.iter().enumerate() {
                if !vj.is_zero() && !m.ginv(k, j).is_zero() {
                    acc = acc.add(&m.ginv(k, j).mul(vj));
                }
            }
            acc.mul(m.sqrt_g())
        })
        .collect()
}

fn add_all(a: &[RatFn], b: &[RatFn]) -> Vec<RatFn> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

/// `√g ξ^k ψ` for each `k`.
fn transport(m: &MetricSpace, xi: &VectorField, psi: &RatFn) -> Vec<RatFn> {
    (0..m.dim()).map(|k| xi.comp(k).mul(psi).mul(m.sqrt_g())).collect()
}

/// Per-class closed form of the current.
pub fn closed_form_current(lag: &Lagrangian, g: &SymmetryGenerator) -> Vec<RatFn> {
    let m = lag.metric;
    let n = m.dim();
    let t = m.table();
    let u = RatFn::symbol(t.u());
    let kin = kinetic_part(m, &g.xi);
    let mu = conformal_factor(m, &g.xi);
    match &lag.class {
        NonlinearityClass::Zero => add_all(&kin, &conformal_part(m, &mu, &g.b)),
        NonlinearityClass::Constant(_) => {
            let c = add_all(&kin, &conformal_part(m, &mu, &RatFn::zero()));
            add_all(&c, &transport(m, &g.xi, &lag.big_f.neg()))
        }
        NonlinearityClass::Linear => {
            let c = add_all(&kin, &conformal_part(m, &mu, &g.b));
            add_all(&c, &transport(m, &g.xi, &u.powi(2).scale(&qr(-1, 2))))
        }
        NonlinearityClass::Critical => {
            let nq = n as i64;
            let top = u.pow_q(&qr(2 * nq, nq - 2)).expect("u nonzero");
            let c = add_all(&kin, &conformal_part(m, &mu, &RatFn::zero()));
            add_all(&c, &transport(m, &g.xi, &top.scale(&qr(2 - nq, 2 * nq))))
        }
        NonlinearityClass::PowerTwoDimSix => {
            let lmu = m.laplacian(&mu);
            let inner: Vec<RatFn> = (0..n)
                .map(|j| {
                    let uj = RatFn::symbol(t.u1(j));
                    let x = m.coord(j);
                    lmu.mul(&uj)
                        .add(&mu.diff(x).mul(&u.powi(2)))
                        .scale(&qr(1, 2))
                        .sub(&mu.mul(&u).mul(&uj))
                        .sub(&lmu.diff(x).mul(&u).scale(&qr(1, 2)))
                })
                .collect();
            let c = add_all(&kin, &raise(m, &inner));
            add_all(&c, &transport(m, &g.xi, &u.powi(3).scale(&qr(-1, 3))))
        }
        _ => add_all(&kin, &transport(m, &g.xi, &lag.big_f.neg())),
    }
}

/// `A^k = L ξ^k + Q √g g^{kj} u_j − φ^k` with `Q = a u + b − ξ^j u_j`.
pub fn general_current(lag: &Lagrangian, g: &SymmetryGenerator, potential: Option<&[RatFn]>) -> Vec<RatFn> {
    let m = lag.metric;
    let q = characteristic(m, g);
    (0..m.dim())
        .map(|k| {
            let mut a = lag.l.mul(g.xi.comp(k)).add(&q.mul(&lag.momentum(k)));
            if let Some(phi) = potential {
                a = a.sub(&phi[k]);
            }
            a
        })
        .collect()
}

/// `Q = η − ξ^k u_k`.
pub fn characteristic(m: &MetricSpace, g: &SymmetryGenerator) -> RatFn {
    let t = m.table();
    let mut q = g.eta(m);
    for k in 0..m.dim() {
        if !g.xi.comp(k).is_zero() {
            q = q.sub(&g.xi.comp(k).mul(&RatFn::symbol(t.u1(k))));
        }
    }
    q
}

pub fn build_current(lag: &Lagrangian, g: &SymmetryGenerator) -> Result<ConservedCurrent, NoetherError> {
    let verdict = noether_classify(lag, g)?;
    if !verdict.is_noether() {
        return Err(NoetherError::NotNoether(verdict.label().to_string()));
    }
    let m = lag.metric;
    let closed = closed_form_current(lag, g);
    let general = general_current(lag, g, verdict.potential());
    for (k, (c, e)) in closed.iter().zip(&general).enumerate() {
        if m.verdict(&c.sub(e)) != Verdict::Zero {
            return Err(NoetherError::Inconsistent(format!(
                "closed-form current component {k} differs from the Noether formula for {}",
                g.display(m)
            )));
        }
    }
    Ok(ConservedCurrent {
        components: closed,
        generator: g.clone(),
        class: lag.class.clone(),
        verdict,
    })
}

/// Sign `σ` in `D_k A^k = σ √g Q H`, fixed once from the Euclidean
/// translation current with an arbitrary nonlinearity.
pub fn characteristic_sign() -> i64 {
    static SIGMA: OnceLock<i64> = OnceLock::new();
    *SIGMA.get_or_init(|| {
        let one = || "1".to_string();
        let zero = || "0".to_string();
        let g = vec![vec![one(), zero(), zero()], vec![zero(), one(), zero()], vec![zero(), zero(), one()]];
        let m = MetricSpace::from_strings(&["x", "y", "z"], &g, Signature::Riemannian, vec![(-1.0, 1.0); 3])
            .expect("flat metric");
        let lag = Lagrangian::new(&m, &NonlinearityClass::Arbitrary).expect("class");
        let gen = SymmetryGenerator::from_field(VectorField::coordinate(3, 0));
        let a = general_current(&lag, &gen, None);
        let lhs = total_divergence(&m, &a);
        let rhs = m
            .sqrt_g()
            .mul(&characteristic(&m, &gen))
            .mul(&poisson_equation(&m, &NonlinearityClass::Arbitrary).h);
        for s in [1, -1] {
            if m.verdict(&lhs.sub(&rhs.scale(&qi(s)))) == Verdict::Zero {
                return s;
            }
        }
        panic!("translation current satisfies neither sign");
    })
}

#[derive(Debug, Clone)]
pub struct SymbolicCheck {
    pub sigma: i64,
    pub verdict: Verdict,
    pub residual: RatFn,
}

impl SymbolicCheck {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Zero
    }
}

/// `D_k A^k − σ √g Q H`, which must vanish identically.
pub fn verify_current_symbolic(m: &MetricSpace, cur: &ConservedCurrent) -> SymbolicCheck {
    verify_components_symbolic(m, &cur.components, &cur.generator, &cur.class)
}

pub fn verify_components_symbolic(
    m: &MetricSpace,
    components: &[RatFn],
    g: &SymmetryGenerator,
    cls: &NonlinearityClass,
) -> SymbolicCheck {
    let sigma = characteristic_sign();
    let h = poisson_equation(m, cls).h;
    let rhs = m.sqrt_g().mul(&characteristic(m, g)).mul(&h).scale(&qi(sigma));
    let residual = total_divergence(m, components).sub(&rhs);
    SymbolicCheck {
        sigma,
        verdict: m.verdict(&residual),
        residual,
    }
}

/// Numeric jet: coordinates, `u`, `u_i` and symmetric `u_{ij}`.
#[derive(Debug, Clone)]
pub struct JetPoint {
    pub x: Vec<f64>,
    pub u: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<Vec<f64>>,
    pub on_shell: bool,
    generic_seed: u64,
}

impl JetPoint {
    pub fn env(&self, m: &MetricSpace) -> Env {
        let t = m.table();
        let mut env = Env::new().with_generic_seed(self.generic_seed);
        let n = m.dim();
        for i in 0..n {
            env.set(m.coord(i), self.x[i]);
            env.set(t.u1(i), self.u1[i]);
            for j in i..n {
                env.set(t.u2(i, j), self.u2[i][j]);
            }
        }
        env.set(t.u(), self.u);
        for p in t.params() {
            env.set(p, 1.25);
        }
        env
    }

    /// Draws a jet; with `on_shell`, `u_{11}` is solved from `H = 0`.
    pub fn sample(m: &MetricSpace, h: &RatFn, on_shell: bool, rng: &mut impl Rng) -> Option<JetPoint> {
        let n = m.dim();
        let (lo, hi) = JET_RANGE;
        let mut jet = JetPoint {
            x: m.sample_box().iter().map(|&(a, b)| if b > a { rng.gen_range(a..b) } else { a }).collect(),
            u: rng.gen_range(lo..hi),
            u1: (0..n).map(|_| rng.gen_range(lo..hi)).collect(),
            u2: vec![vec![0.0; n]; n],
            on_shell: false,
            generic_seed: rng.gen(),
        };
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(lo..hi);
                jet.u2[i][j] = v;
                jet.u2[j][i] = v;
            }
        }
        if on_shell {
            jet.u2[0][0] = 0.0;
            let env = jet.env(m);
            let rest = h.eval(&env).ok()?;
            let c = m.ginv(0, 0).eval(&env).ok()?;
            if !rest.is_finite() || c.abs() < 1e-6 {
                return None;
            }
            jet.u2[0][0] = -rest / c;
            let check = h.eval(&jet.env(m)).ok()?;
            jet.on_shell = check.abs() < 1e-12 * (1.0 + rest.abs());
            if !jet.on_shell {
                return None;
            }
        }
        Some(jet)
    }
}

#[derive(Debug, Clone)]
pub struct NumericCheck {
    pub samples: usize,
    pub max_divergence: f64,
    /// Largest `|A^k|` seen.
    pub scale: f64,
    /// Samples whose divergence exceeds `1e-3`.
    pub above_control: usize,
}

impl NumericCheck {
    pub fn passed(&self) -> bool {
        self.max_divergence < 1e-7 * (1.0 + self.scale)
    }
}

fn numeric(m: &MetricSpace, cur: &ConservedCurrent, samples: usize, seed: u64, on_shell: bool) -> Result<NumericCheck, NoetherError> {
    let h = poisson_equation(m, &cur.class).h;
    let div = total_divergence(m, &cur.components);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jets = Vec::with_capacity(samples);
    let mut attempts = 0;
    while jets.len() < samples {
        attempts += 1;
        if attempts > samples * 50 {
            return Err(NoetherError::Sampling);
        }
        let Some(j) = JetPoint::sample(m, &h, on_shell, &mut rng) else { continue };
        let env = j.env(m);
        let ok = div.eval(&env).is_ok_and(f64::is_finite)
            && cur.components.iter().all(|a| a.eval(&env).is_ok_and(f64::is_finite));
        if ok {
            jets.push(env);
        }
    }
    let vals: Vec<(f64, f64)> = jets
        .par_iter()
        .map(|env| {
            let d = div.eval(env).expect("checked").abs();
            let s = cur
                .components
                .iter()
                .map(|a| a.eval(env).expect("checked").abs())
                .fold(0.0, f64::max);
            (d, s)
        })
        .collect();
    Ok(NumericCheck {
        samples,
        max_divergence: vals.iter().map(|v| v.0).fold(0.0, f64::max),
        scale: vals.iter().map(|v| v.1).fold(0.0, f64::max),
        above_control: vals.iter().filter(|v| v.0 > 1e-3).count(),
    })
}

/// Largest `|D_k A^k|` over on-shell jets.
pub fn verify_current_numeric(m: &MetricSpace, cur: &ConservedCurrent, samples: usize, seed: u64) -> Result<NumericCheck, NoetherError> {
    numeric(m, cur, samples, seed, true)
}

/// Same sampling with `u_{11}` left random.
pub fn off_shell_control(m: &MetricSpace, cur: &ConservedCurrent, samples: usize, seed: u64) -> Result<NumericCheck, NoetherError> {
    numeric(m, cur, samples, seed, false)
}

