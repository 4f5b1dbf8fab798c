use std::fmt;

use crate::exprcore::{qi, qr, RatFn, Verdict};
use crate::geom::{conformal_factor, total_derivative, MetricSpace};

use super::residuals::conformal_weight;
use super::{solve_linear_ansatz, AnsatzBasis, DetError, NonlinearityClass, SolveOptions, SolveResult, SymmetryGenerator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Isometry,
    Homothety,
    ConformalKilling,
}

impl GeneratorKind {
    pub fn label(self) -> &'static str {
        match self {
            GeneratorKind::Isometry => "Isometry",
            GeneratorKind::Homothety => "Homothety",
            GeneratorKind::ConformalKilling => "ConformalKilling",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SideCheck {
    pub name: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct ClassifiedGenerator {
    pub generator: SymmetryGenerator,
    pub mu: RatFn,
    pub kind: GeneratorKind,
    pub case: String,
    pub checks: Vec<SideCheck>,
}

impl ClassifiedGenerator {
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Zero)
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationTable {
    pub class: NonlinearityClass,
    pub rows: Vec<ClassifiedGenerator>,
    pub solve: SolveResult,
    pub inconsistencies: Vec<String>,
}

impl ClassificationTable {
    pub fn generators(&self) -> Vec<SymmetryGenerator> {
        self.rows.iter().map(|r| r.generator.clone()).collect()
    }
}

fn kind_of(mu: &RatFn) -> GeneratorKind {
    if mu.is_zero() {
        GeneratorKind::Isometry
    } else if mu.as_constant().is_some() {
        GeneratorKind::Homothety
    } else {
        GeneratorKind::ConformalKilling
    }
}

fn case_of(cls: &NonlinearityClass, g: &SymmetryGenerator, kind: GeneratorKind) -> String {
    let part = if g.xi.is_zero() {
        match (g.a.is_zero(), g.b.is_zero()) {
            (false, true) => "scaling",
            (true, false) => "superposition",
            _ => "dependent",
        }
    } else {
        match kind {
            GeneratorKind::Isometry => "isometry",
            GeneratorKind::Homothety => "homothety",
            GeneratorKind::ConformalKilling => "conformal",
        }
    };
    format!("{}/{part}", cls.tag())
}

/// `φ` has vanishing gradient.
fn constant_check(m: &MetricSpace, name: &str, phi: &RatFn) -> SideCheck {
    let mut verdict = Verdict::Zero;
    for i in 0..m.dim() {
        match m.verdict(&phi.diff(m.coord(i))) {
            Verdict::Zero => {}
            v => {
                verdict = v;
                break;
            }
        }
    }
    SideCheck {
        name: name.to_string(),
        verdict,
    }
}

fn zero_check(m: &MetricSpace, name: &str, e: &RatFn) -> SideCheck {
    SideCheck {
        name: name.to_string(),
        verdict: m.verdict(e),
    }
}

/// Side conditions each class imposes on `(μ, a, b)`.
pub fn side_checks(m: &MetricSpace, cls: &NonlinearityClass, g: &SymmetryGenerator, mu: &RatFn) -> Vec<SideCheck> {
    let n = m.dim();
    let w = conformal_weight(n);
    let lap = |e: &RatFn| m.laplacian(e);
    let excess = g.a.sub(&mu.scale(&w));
    match cls {
        NonlinearityClass::Arbitrary => vec![
            zero_check(m, "mu = 0", mu),
            zero_check(m, "a = 0", &g.a),
            zero_check(m, "b = 0", &g.b),
        ],
        NonlinearityClass::Zero => vec![
            zero_check(m, "lap b = 0", &lap(&g.b)),
            zero_check(m, "lap mu = 0", &lap(mu)),
            constant_check(m, "a - (2-n)/4 mu = c", &excess),
        ],
        NonlinearityClass::Constant(k) => vec![
            zero_check(m, "lap mu = 0", &lap(mu)),
            zero_check(m, "lap lap b = 0", &lap(&lap(&g.b))),
            zero_check(m, "(mu - a) k + lap b = 0", &mu.sub(&g.a).mul(k).add(&lap(&g.b))),
            constant_check(m, "a - (2-n)/4 mu = c", &excess),
        ],
        NonlinearityClass::Linear => vec![
            zero_check(m, "lap b + b = 0", &lap(&g.b).add(&g.b)),
            zero_check(m, "(2-n)/4 lap mu + mu = 0", &lap(mu).scale(&w).add(mu)),
            constant_check(m, "a - (2-n)/4 mu = c", &excess),
        ],
        NonlinearityClass::Exponential => vec![
            constant_check(m, "mu constant", mu),
            zero_check(m, "b + mu = 0", &g.b.add(mu)),
            zero_check(m, "a = 0", &g.a),
        ],
        NonlinearityClass::Power(p) => {
            let one_minus = qi(1) - p;
            vec![
                constant_check(m, "mu constant", mu),
                zero_check(m, "a - mu/(1-p) = 0", &g.a.sub(&mu.scale(&one_minus.recip()))),
                zero_check(m, "b = 0", &g.b),
            ]
        }
        NonlinearityClass::Critical => vec![
            zero_check(m, "lap mu = 0", &lap(mu)),
            zero_check(m, "a - (2-n)/4 mu = 0", &excess),
            zero_check(m, "b = 0", &g.b),
        ],
        NonlinearityClass::PowerTwoDimSix => vec![
            zero_check(m, "lap lap mu = 0", &lap(&lap(mu))),
            zero_check(m, "a + mu = 0", &g.a.add(mu)),
            zero_check(m, "b - lap mu / 2 = 0", &g.b.sub(&lap(mu).scale(&qr(1, 2)))),
        ],
    }
}

pub fn classify_generators(
    m: &MetricSpace,
    cls: &NonlinearityClass,
    gens: &[SymmetryGenerator],
) -> (Vec<ClassifiedGenerator>, Vec<String>) {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for g in gens {
        let mu = conformal_factor(m, &g.xi);
        let kind = kind_of(&mu);
        let checks = side_checks(m, cls, g, &mu);
        for c in &checks {
            if c.verdict != Verdict::Zero {
                bad.push(format!("{}: {} is {:?}", g.display(m), c.name, c.verdict));
            }
        }
        rows.push(ClassifiedGenerator {
            case: case_of(cls, g, kind),
            generator: g.clone(),
            mu,
            kind,
            checks,
        });
    }
    (rows, bad)
}

pub fn classify(
    m: &MetricSpace,
    cls: &NonlinearityClass,
    basis: &AnsatzBasis,
    opts: &SolveOptions,
) -> Result<ClassificationTable, DetError> {
    let solve = solve_linear_ansatz(m, cls, basis, opts)?;
    let (rows, inconsistencies) = classify_generators(m, cls, &solve.generators);
    Ok(ClassificationTable {
        class: cls.clone(),
        rows,
        solve,
        inconsistencies,
    })
}

/// `H` in second-order and divergence form.
#[derive(Debug, Clone)]
pub struct PoissonEquation {
    /// `g^{ij}u_{ij} − Γ^i u_i + f(u)`.
    pub h: RatFn,
    /// `(1/√g) D_i(√g g^{ij} u_j) + f(u)`.
    pub divergence_form: RatFn,
    pub agree: Verdict,
}

impl fmt::Display for PoissonEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.h)
    }
}

pub fn poisson_equation(m: &MetricSpace, cls: &NonlinearityClass) -> PoissonEquation {
    let n = m.dim();
    let t = m.table();
    let f = cls.f(t);
    let mut h = f.clone();
    for i in 0..n {
        for j in 0..n {
            if !m.ginv(i, j).is_zero() {
                h = h.add(&m.ginv(i, j).mul(&RatFn::symbol(t.u2(i, j))));
            }
        }
        h = h.sub(&m.contracted_christoffel(i).mul(&RatFn::symbol(t.u1(i))));
    }
    let sg = m.sqrt_g();
    let raised = crate::geom::raised_jet(m);
    let mut div = RatFn::zero();
    for (i, r) in raised.iter().enumerate() {
        div = div.add(&total_derivative(m, &sg.mul(r), i));
    }
    let divergence_form = div.div(sg).add(&f);
    let agree = m.verdict(&h.sub(&divergence_form));
    PoissonEquation {
        h,
        divergence_form,
        agree,
    }
}
