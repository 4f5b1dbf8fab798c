use nalgebra::DMatrix;
use poissym::catalog::{self, GeometryFixture};
use poissym::exprcore::{qi, Env, RatFn, Verdict};
use poissym::geom::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn euclidean() -> MetricSpace {
    catalog::load("euclidean").unwrap().metric
}

fn field(m: &MetricSpace, c: &[&str]) -> VectorField {
    VectorField::from_strings(m, c).unwrap()
}

fn zero(m: &MetricSpace, r: &RatFn) -> bool {
    m.verdict(r) == Verdict::Zero
}

fn env_at(m: &MetricSpace, p: &[f64]) -> Env {
    let mut env = Env::new();
    for (i, v) in p.iter().enumerate() {
        env.set(m.coord(i), *v);
    }
    env
}

fn metric_at(m: &MetricSpace, p: &[f64]) -> DMatrix<f64> {
    let n = m.dim();
    let env = env_at(m, p);
    DMatrix::from_fn(n, n, |i, j| m.g(i, j).eval(&env).unwrap())
}

/// Christoffel symbols from central differences of the sampled metric.
fn christoffel_oracle(m: &MetricSpace, p: &[f64]) -> Vec<f64> {
    let n = m.dim();
    let h = 1e-5;
    let dg: Vec<DMatrix<f64>> = (0..n)
        .map(|k| {
            let mut a = p.to_vec();
            let mut b = p.to_vec();
            a[k] += h;
            b[k] -= h;
            (metric_at(m, &a) - metric_at(m, &b)) / (2.0 * h)
        })
        .collect();
    let ginv = metric_at(m, p).try_inverse().unwrap();
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(i, l)] * (dg[k][(l, j)] + dg[j][(l, k)] - dg[l][(j, k)]);
                }
                out[(i * n + j) * n + k] = 0.5 * s;
            }
        }
    }
    out
}

fn check_christoffel_against_oracle(m: &MetricSpace) {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p: Vec<f64> = m.sample_box().iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let env = env_at(m, &p);
        let oracle = christoffel_oracle(m, &p);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let got = m.christoffel(i, j, k).eval(&env).unwrap();
                    let want = oracle[(i * n + j) * n + k];
                    assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "Γ^{i}_{j}{k}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn euclidean_christoffels_vanish() {
    let m = euclidean();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                assert!(m.christoffel(i, j, k).is_zero());
            }
        }
    }
    assert!(m.scalar_curvature().is_zero());
}

#[test]
fn hyperbolic_christoffels() {
    let m = catalog::load("hyperbolic3").unwrap().metric;
    check_christoffel_against_oracle(&m);
    let expect = |i, j, k, s: &str| {
        let want = m.parse_scalar(s).unwrap();
        assert!(zero(&m, &m.christoffel(i, j, k).sub(&want)), "Γ^{i}_{j}{k}");
    };
    expect(0, 0, 2, "-1/z");
    expect(0, 2, 0, "-1/z");
    expect(2, 0, 0, "1/z");
    expect(2, 2, 2, "-1/z");
    expect(0, 0, 0, "0");
}

#[test]
fn sol_christoffels() {
    let m = catalog::load("sol").unwrap().metric;
    check_christoffel_against_oracle(&m);
    // Coordinates (x, y, z) with g = diag(1, e^{2x}, e^{-2x}).
    let expect = |i, j, k, s: &str| {
        let want = m.parse_scalar(s).unwrap();
        assert!(zero(&m, &m.christoffel(i, j, k).sub(&want)), "Γ^{i}_{j}{k} = {}", m.christoffel(i, j, k));
    };
    expect(0, 1, 1, "-exp(2*x)");
    expect(0, 2, 2, "exp(-2*x)");
    expect(1, 0, 1, "1");
    expect(2, 0, 2, "-1");
}

#[test]
fn scalar_curvature_examples() {
    let h = catalog::load("hyperbolic3").unwrap().metric;
    assert_eq!(h.scalar_curvature().as_constant(), Some(&qi(-6)));
    let heis = catalog::load("heisenberg").unwrap().metric;
    assert_eq!(heis.scalar_curvature().as_constant(), Some(&qi(-8)));
}

#[test]
fn laplace_beltrami_examples() {
    let m = euclidean();
    let r2 = m.parse_scalar("x^2+y^2+z^2").unwrap();
    assert_eq!(m.laplace_beltrami(&r2).unwrap(), RatFn::int(6));
    assert!(m.laplace_beltrami(&RatFn::int(7)).unwrap().is_zero());

    let h = catalog::load("hyperbolic3").unwrap().metric;
    let lnz = h.parse_scalar("ln(z)").unwrap();
    let lap = h.laplace_beltrami(&lnz).unwrap();
    // z^2 φ'' − z φ' evaluated directly.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let z: f64 = rng.gen_range(0.5..2.0);
        let oracle = z * z * (-1.0 / (z * z)) - z * (1.0 / z);
        let env = env_at(&h, &[0.3, -0.2, z]);
        assert!((lap.eval(&env).unwrap() - oracle).abs() < 1e-12);
    }
    assert_eq!(lap, RatFn::int(-2));
}

#[test]
fn lie_derivative_examples() {
    let m = euclidean();
    let lg = lie_derivative_metric(&m, &field(&m, &["1", "0", "0"]));
    assert!(lg.iter().flatten().all(RatFn::is_zero));
    let lg = lie_derivative_metric(&m, &field(&m, &["x", "y", "z"]));
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(lg[i][j], m.g(i, j).scale(&qi(2)));
        }
    }
    let h = catalog::load("hyperbolic3").unwrap().metric;
    let lg = lie_derivative_metric(&h, &field(&h, &["x", "y", "z"]));
    assert!(lg.iter().flatten().all(RatFn::is_zero));
}

/// `L_ξ g` from finite differences of ξ and g at one point.
fn lie_oracle(m: &MetricSpace, xi: &VectorField, p: &[f64]) -> DMatrix<f64> {
    let n = m.dim();
    let h = 1e-5;
    let xi_at = |q: &[f64]| -> Vec<f64> {
        let env = env_at(m, q);
        xi.comps().iter().map(|c| c.eval(&env).unwrap()).collect()
    };
    let g = metric_at(m, p);
    let v = xi_at(p);
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        let dg = (metric_at(m, &a) - metric_at(m, &b)) / (2.0 * h);
        let (va, vb) = (xi_at(&a), xi_at(&b));
        out += dg * v[k];
        for i in 0..n {
            let dxi_i = (va[i] - vb[i]) / (2.0 * h);
            for j in 0..n {
                out[(k, j)] += g[(i, j)] * dxi_i;
                out[(j, k)] += g[(j, i)] * dxi_i;
            }
        }
    }
    out
}

#[test]
fn conformal_examples() {
    let m = euclidean();
    let rep = conformal_check(&m, &field(&m, &["x", "y", "z"]));
    assert_eq!(rep.verdict, ConformalVerdict::Homothety(qi(2)));
    assert_eq!(covariant_divergence(&m, &field(&m, &["x", "y", "z"])).unwrap(), RatFn::int(3));
    assert_eq!(rep.to_string(), "Homothety (μ=2)");

    let r8 = field(&m, &["x*z", "y*z", "(z^2-x^2-y^2)/2"]);
    let rep = conformal_check(&m, &r8);
    assert_eq!(rep.verdict, ConformalVerdict::ConformalKilling);
    assert_eq!(rep.mu, m.parse_scalar("2*z").unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lg = lie_oracle(&m, &r8, &p);
        let want = metric_at(&m, &p) * (2.0 * p[2]);
        assert!((lg - want).abs().max() < 1e-6);
    }

    let sol = catalog::load("sol").unwrap().metric;
    let rep = conformal_check(&sol, &field(&sol, &["1", "-y", "z"]));
    assert_eq!(rep.verdict, ConformalVerdict::Killing);
    assert!(rep.mu.is_zero());
    assert!(covariant_divergence(&sol, &field(&sol, &["0", "1", "0"])).unwrap().is_zero());

    let h = catalog::load("hyperbolic3").unwrap();
    let h5 = h.field("H5").unwrap();
    assert!(covariant_divergence(&h.metric, h5).unwrap().is_zero());
}

#[test]
fn not_conformal_is_reported() {
    let m = euclidean();
    let rep = conformal_check(&m, &field(&m, &["x", "0", "0"]));
    assert_eq!(rep.verdict, ConformalVerdict::NotConformal);
}

#[test]
fn bracket_examples() {
    let m = euclidean();
    let dx = field(&m, &["1", "0", "0"]);
    let rot = field(&m, &["y", "-x", "0"]);
    assert_eq!(lie_bracket(&m, &dx, &rot).unwrap(), field(&m, &["0", "-1", "0"]));
    assert!(lie_bracket(&m, &rot, &rot).unwrap().is_zero());

    let fx = catalog::load("heisenberg").unwrap();
    let hm = &fx.metric;
    let x = field(hm, &["1", "0", "2*y"]);
    let y = field(hm, &["0", "1", "-2*x"]);
    let t = field(hm, &["0", "0", "1"]);
    assert_eq!(lie_bracket(hm, &x, &y).unwrap(), t.scale(&qi(-4)));
    assert!(lie_bracket(hm, &x, &t).unwrap().is_zero());
    assert!(lie_bracket(hm, &y, &t).unwrap().is_zero());
}

#[test]
fn conformal_identity_examples() {
    let m = euclidean();
    let rot = field(&m, &["y", "-x", "0"]);
    assert!(conformal_identity_checks(&m, &rot, &RatFn::zero()).unwrap().all_zero());
    let r8 = field(&m, &["x*z", "y*z", "(z^2-x^2-y^2)/2"]);
    let mu = m.parse_scalar("2*z").unwrap();
    assert!(m.laplacian(&mu).is_zero());
    let rep = conformal_identity_checks(&m, &r8, &mu).unwrap();
    assert!(rep.all_zero(), "{:?}", rep.failures());

    let h = catalog::load("hyperbolic3").unwrap();
    let h4 = h.field("H4").unwrap();
    let rep = conformal_identity_checks(&h.metric, h4, &RatFn::zero()).unwrap();
    assert!(rep.all_zero(), "{:?}", rep.failures());
    let lap = vector_laplacian(&h.metric, h4);
    for (i, l) in lap.iter().enumerate() {
        let mut acc = l.clone();
        for j in 0..3 {
            acc = acc.add(&h.metric.ricci(i, j).mul(h4.comp(j)));
        }
        assert!(zero(&h.metric, &acc));
    }
}

fn random_poly(m: &MetricSpace, rng: &mut impl Rng) -> RatFn {
    let mut acc = RatFn::zero();
    for _ in 0..4 {
        let mut t = RatFn::int(rng.gen_range(-3..=3));
        for i in 0..m.dim() {
            t = t.mul(&RatFn::symbol(m.coord(i)).powi(rng.gen_range(0..=2)));
        }
        acc = acc.add(&t);
    }
    acc
}

fn fixture_invariants(fx: &GeometryFixture) {
    let m = &fx.metric;
    let n = m.dim();
    for r in m.inverse_residuals() {
        assert!(zero(m, &r), "{}: g g^-1", fx.name);
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                assert_eq!(m.christoffel(i, j, k), m.christoffel(i, k, j));
            }
        }
    }
    let bianchi = m.bianchi_residuals();
    assert_eq!(bianchi.len(), 81);
    for r in &bianchi {
        assert!(zero(m, r), "{}: Bianchi", fx.name);
    }
    for r in m.ricci_symmetry_residuals() {
        assert!(zero(m, &r), "{}: Ricci symmetry", fx.name);
    }
    for r in m.a4_residuals() {
        assert!(zero(m, &r), "{}: a4", fx.name);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let phi = random_poly(m, &mut rng);
        let d = m.laplace_divergence_form(&phi).sub(&m.laplace_second_order_form(&phi));
        assert!(zero(m, &d), "{}: Laplacian forms", fx.name);
    }
    let basis = fx.killing_fields();
    for (name, f) in &fx.killing {
        let rep = conformal_check(m, f);
        assert_eq!(rep.verdict, ConformalVerdict::Killing, "{}: {name}", fx.name);
        assert!(zero(m, &covariant_divergence(m, f).unwrap()));
        let ids = conformal_identity_checks(m, f, &rep.mu).unwrap();
        assert!(ids.all_zero(), "{}: {name} {:?}", fx.name, ids.failures());
    }
    assert_eq!(field_rank(m, &basis), fx.isometry_dim);
    let closure = bracket_closure(m, &basis).unwrap();
    assert!(closure.closes(), "{}: bracket closure {}", fx.name, closure.max_residual);
    for b in &fx.brackets {
        let l = VectorField::from_strings(m, &b.left).unwrap();
        let r = VectorField::from_strings(m, &b.right).unwrap();
        let e = VectorField::from_strings(m, &b.expected).unwrap();
        assert_eq!(lie_bracket(m, &l, &r).unwrap(), e);
    }
    let d = m.scalar_curvature().sub(&RatFn::constant(fx.scalar_curvature.clone()));
    assert!(zero(m, &d), "{}: R = {}", fx.name, m.scalar_curvature());
}

#[test]
fn catalog_metric_invariants() {
    for fx in catalog::load_all().unwrap() {
        fixture_invariants(&fx);
    }
}

#[test]
fn lorentzian_determinant_uses_absolute_value() {
    let g = vec![
        vec!["-1".to_string(), "0".into(), "0".into()],
        vec!["0".to_string(), "1".into(), "0".into()],
        vec!["0".to_string(), "0".into(), "1".into()],
    ];
    let m = MetricSpace::from_strings(&["t", "x", "y"], &g, Signature::Lorentzian, vec![(-1.0, 1.0); 3]).unwrap();
    assert_eq!(m.sqrt_g(), &RatFn::one());
    let phi = m.parse_scalar("t^2+x^2").unwrap();
    assert!(m.laplace_beltrami(&phi).unwrap().is_zero());
}

#[test]
fn singular_metric_rejected() {
    let g = vec![
        vec!["1".to_string(), "1".into(), "0".into()],
        vec!["1".to_string(), "1".into(), "0".into()],
        vec!["0".to_string(), "0".into(), "1".into()],
    ];
    let err = MetricSpace::from_strings(&["x", "y", "z"], &g, Signature::Riemannian, vec![(-1.0, 1.0); 3]);
    assert!(matches!(err, Err(GeomError::Singular)));
    let g = vec![vec!["1".to_string(), "x".into()], vec!["0".to_string(), "1".into()]];
    let err = MetricSpace::from_strings(&["x", "y"], &g, Signature::Riemannian, vec![(-1.0, 1.0); 2]);
    assert!(matches!(err, Err(GeomError::NotSymmetric(0, 1))));
}
