use poissym::catalog;
use poissym::detsys::*;
use poissym::exprcore::{qi, RatFn, Verdict};
use poissym::geom::*;
use poissym::noether::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> MetricSpace {
    catalog::load(name).unwrap().metric
}

fn gen(m: &MetricSpace, xi: &[&str], a: &str, b: &str) -> SymmetryGenerator {
    SymmetryGenerator::from_strings(m, xi, a, b).unwrap()
}

fn zero(m: &MetricSpace, r: &RatFn) -> bool {
    m.verdict(r) == Verdict::Zero
}

fn classes() -> Vec<NonlinearityClass> {
    vec![
        NonlinearityClass::Arbitrary,
        NonlinearityClass::Zero,
        NonlinearityClass::Constant(RatFn::int(3)),
        NonlinearityClass::Linear,
        NonlinearityClass::Exponential,
        NonlinearityClass::Power(qi(3)),
        NonlinearityClass::Critical,
    ]
}

/// `−√g f − ∂_k(√g g^{kj}) u_j − √g g^{kj} u_{kj}`, expanded by hand.
fn euler_oracle(m: &MetricSpace, f: &RatFn) -> RatFn {
    let t = m.table();
    let n = m.dim();
    let sg = m.sqrt_g();
    let mut e = sg.mul(f).neg();
    for k in 0..n {
        for j in 0..n {
            let w = sg.mul(m.ginv(k, j));
            e = e.sub(&w.diff(m.coord(k)).mul(&RatFn::symbol(t.u1(j))));
            e = e.sub(&w.mul(&RatFn::symbol(t.u2(k, j))));
        }
    }
    e
}

#[test]
fn euler_operator_is_minus_sqrt_g_times_h() {
    for fx in catalog::load_all().unwrap() {
        let m = &fx.metric;
        for cls in classes() {
            let lag = Lagrangian::new(m, &cls).unwrap();
            let e = euler_lagrange(&lag);
            let h = poisson_equation(m, &cls).h;
            assert!(zero(m, &e.add(&m.sqrt_g().mul(&h))), "{} {cls}", fx.name);
            assert!(zero(m, &e.sub(&euler_oracle(m, &lag.f))), "{} {cls}", fx.name);
        }
    }
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Zero).unwrap();
    let expect = m.parse_scalar("-(u_xx + u_yy + u_zz)").unwrap();
    assert!(euler_lagrange(&lag).sub(&expect).is_zero());
}

fn random_poly(m: &MetricSpace, basis: &[RatFn], rng: &mut ChaCha8Rng) -> RatFn {
    let _ = m;
    let mut acc = RatFn::zero();
    for _ in 0..3 {
        let f = &basis[rng.gen_range(0..basis.len())];
        acc = acc.add(&f.scale(&qi(rng.gen_range(-3..=3))));
    }
    acc
}

#[test]
fn prolongation_paths_agree_on_random_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fx in catalog::load_all().unwrap() {
        let m = &fx.metric;
        let basis = fx.basis().unwrap();
        let funcs = basis.funcs();
        let lag = Lagrangian::new(m, &NonlinearityClass::Arbitrary).unwrap();
        for _ in 0..50 {
            let xi = VectorField::from_comps_unchecked((0..3).map(|_| random_poly(m, funcs, &mut rng)).collect());
            let g = SymmetryGenerator::new(xi, random_poly(m, funcs, &mut rng), random_poly(m, funcs, &mut rng));
            let d = prolong_direct(&lag, &g);
            let c = prolong_closed(&lag, &g).unwrap();
            assert!(zero(m, &d.sub(&c)), "{}", fx.name);
        }
    }
}

#[test]
fn isometries_are_variational_everywhere() {
    for fx in catalog::load_all().unwrap() {
        let m = &fx.metric;
        for cls in [NonlinearityClass::Arbitrary, NonlinearityClass::Exponential, NonlinearityClass::Critical] {
            let lag = Lagrangian::new(m, &cls).unwrap();
            for k in fx.killing_fields() {
                let g = SymmetryGenerator::from_field(k);
                assert!(prolong_apply(&lag, &g).unwrap().is_zero() || zero(m, &prolong_apply(&lag, &g).unwrap()));
                let v = noether_classify(&lag, &g).unwrap();
                assert_eq!(v.kind, NoetherKind::Variational, "{} {cls}", fx.name);
            }
        }
    }
}

#[test]
fn exponential_dilation_residual_is_l() {
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Exponential).unwrap();
    let g = gen(&m, &["x", "y", "z"], "0", "-2");
    let v = noether_classify(&lag, &g).unwrap();
    assert_eq!(v.kind, NoetherKind::NotNoether);
    // ((n−2)/2) μ L with n = 3, μ = 2
    assert!(zero(&m, &v.residual.sub(&lag.l)));
    assert!(v.residual.sub(&lag.l).is_zero());
}

#[test]
fn dilation_is_noether_only_at_the_critical_power() {
    let m = load("euclidean");
    for p in [-1i64, 2, 3, 4, 5, 6] {
        let cls = NonlinearityClass::power(qi(p), 3).unwrap();
        let lag = Lagrangian::new(&m, &cls).unwrap();
        // a = μ/(1−p) with μ = 2
        let a = RatFn::constant(poissym::exprcore::qr(2, 1 - p));
        let g = SymmetryGenerator::new(VectorField::from_strings(&m, &["x", "y", "z"]).unwrap(), a, RatFn::zero());
        let v = noether_classify(&lag, &g).unwrap();
        if p == 5 {
            assert_eq!(cls, NonlinearityClass::Critical);
            assert!(v.residual.is_zero());
            assert_eq!(v.kind, NoetherKind::Variational);
        } else {
            assert_eq!(v.kind, NoetherKind::NotNoether, "p = {p}");
        }
    }
}

#[test]
fn special_conformal_is_divergence_for_critical() {
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Critical).unwrap();
    let g = gen(&m, &["x*z", "y*z", "(z^2-x^2-y^2)/2"], "-z/2", "0");
    let v = noether_classify(&lag, &g).unwrap();
    let NoetherKind::Divergence { potential } = &v.kind else { panic!("{v}") };
    // φ = ((2−n)/8) ∇μ u², μ = 2z
    assert!(potential[0].is_zero() && potential[1].is_zero());
    assert!(potential[2].sub(&m.parse_scalar("-u^2/4").unwrap()).is_zero());
}

#[test]
fn scaling_generators_are_scaled_non_noether() {
    let m = load("euclidean");
    for cls in [NonlinearityClass::Linear, NonlinearityClass::Zero] {
        let lag = Lagrangian::new(&m, &cls).unwrap();
        let v = noether_classify(&lag, &gen(&m, &["0", "0", "0"], "1", "0")).unwrap();
        assert_eq!(v.kind, NoetherKind::ScaledNonNoether { c: qi(1), potential: vec![RatFn::zero(); 3] }, "{cls}");
    }
    // dilation with c = 1 on top of the conformal weight
    let lag = Lagrangian::new(&m, &NonlinearityClass::Zero).unwrap();
    let v = noether_classify(&lag, &gen(&m, &["x", "y", "z"], "1/2", "0")).unwrap();
    assert!(matches!(v.kind, NoetherKind::ScaledNonNoether { ref c, .. } if *c == qi(1)));
    // c = 0 gives a divergence symmetry
    let v = noether_classify(&lag, &gen(&m, &["x", "y", "z"], "-1/2", "x*y")).unwrap();
    assert!(v.is_noether(), "{v}");
}

#[test]
fn constant_class_rejects_b_and_c() {
    let mut m = load("euclidean");
    let k = m.table_mut().add_param("k").unwrap();
    let cls = NonlinearityClass::Constant(RatFn::symbol(&k));
    let lag = Lagrangian::new(&m, &cls).unwrap();
    let with_c = gen(&m, &["0", "0", "0"], "1", "k*x^2/2");
    assert!(!noether_classify(&lag, &with_c).unwrap().is_noether());
    let trans = gen(&m, &["1", "0", "0"], "0", "0");
    assert_eq!(noether_classify(&lag, &trans).unwrap().kind, NoetherKind::Variational);
}

#[test]
fn non_symmetry_is_rejected() {
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Arbitrary).unwrap();
    let g = gen(&m, &["x", "y", "z"], "0", "0");
    assert!(matches!(noether_classify(&lag, &g), Err(NoetherError::NotSymmetry(_))));
}

#[test]
fn euclidean_translation_current() {
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Arbitrary).unwrap();
    let cur = build_current(&lag, &gen(&m, &["1", "0", "0"], "0", "0")).unwrap();
    let expect = ["(u_y^2 + u_z^2 - u_x^2)/2 - F(u)", "-u_x*u_y", "-u_x*u_z"];
    for (a, e) in cur.components.iter().zip(expect) {
        assert!(a.sub(&m.parse_scalar(e).unwrap()).is_zero(), "{a}");
    }
    assert_eq!(characteristic_sign(), 1);
    assert!(verify_current_symbolic(&m, &cur).passed());
}

#[test]
fn sol_and_hyperbolic_currents() {
    let s = load("sol");
    let lag = Lagrangian::new(&s, &NonlinearityClass::Arbitrary).unwrap();
    let cur = build_current(&lag, &gen(&s, &["0", "1", "0"], "0", "0")).unwrap();
    let expect = [
        "-u_x*u_y",
        "(u_x^2 - exp(-2*x)*u_y^2 + exp(2*x)*u_z^2)/2 - F(u)",
        "-exp(2*x)*u_y*u_z",
    ];
    for (a, e) in cur.components.iter().zip(expect) {
        assert!(zero(&s, &a.sub(&s.parse_scalar(e).unwrap())), "{a}");
    }

    let h = load("hyperbolic3");
    let lag = Lagrangian::new(&h, &NonlinearityClass::Arbitrary).unwrap();
    let cur = build_current(&lag, &gen(&h, &["1", "0", "0"], "0", "0")).unwrap();
    let expect = ["(u_y^2 + u_z^2 - u_x^2)/(2*z) - F(u)/z^3", "-u_x*u_y/z", "-u_x*u_z/z"];
    for (a, e) in cur.components.iter().zip(expect) {
        assert!(zero(&h, &a.sub(&h.parse_scalar(e).unwrap())), "{a}");
    }
    assert!(verify_current_symbolic(&h, &cur).passed());
}

#[test]
fn flipped_term_fails_symbolic_check() {
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Arbitrary).unwrap();
    let mut cur = build_current(&lag, &gen(&m, &["1", "0", "0"], "0", "0")).unwrap();
    cur.components[1] = cur.components[1].neg();
    assert!(!verify_current_symbolic(&m, &cur).passed());
    assert!(!verify_current_numeric(&m, &cur, 50, 3).unwrap().passed());
}

#[test]
fn numeric_verification_and_off_shell_control() {
    let m = load("euclidean");
    let lag = Lagrangian::new(&m, &NonlinearityClass::Critical).unwrap();
    let cur = build_current(&lag, &gen(&m, &["x", "y", "z"], "-1/2", "0")).unwrap();
    assert!(verify_current_symbolic(&m, &cur).passed());
    let on = verify_current_numeric(&m, &cur, 100, 7).unwrap();
    assert!(on.passed(), "{on:?}");
    let off = off_shell_control(&m, &cur, 100, 7).unwrap();
    assert!(off.above_control >= 95, "{off:?}");

    let h = load("heisenberg");
    let fx = catalog::load("heisenberg").unwrap();
    let lag = Lagrangian::new(&h, &NonlinearityClass::Arbitrary).unwrap();
    for k in fx.killing_fields() {
        let cur = build_current(&lag, &SymmetryGenerator::from_field(k)).unwrap();
        assert!(verify_current_symbolic(&h, &cur).passed());
        assert!(verify_current_numeric(&h, &cur, 100, 9).unwrap().passed());
    }
}

#[test]
fn linear_and_zero_class_currents() {
    let m = load("euclidean");
    let lin = Lagrangian::new(&m, &NonlinearityClass::Linear).unwrap();
    // b = sin-free polynomial solutions of Δb + b = 0 do not exist; use a translation
    let cur = build_current(&lin, &gen(&m, &["0", "1", "0"], "0", "0")).unwrap();
    assert!(verify_current_symbolic(&m, &cur).passed());
    let zero_lag = Lagrangian::new(&m, &NonlinearityClass::Zero).unwrap();
    for g in [
        gen(&m, &["0", "0", "0"], "0", "x*y"),
        gen(&m, &["x", "y", "z"], "-1/2", "0"),
        gen(&m, &["x*z", "y*z", "(z^2-x^2-y^2)/2"], "-z/2", "x^2-y^2"),
    ] {
        let cur = build_current(&zero_lag, &g).unwrap();
        assert!(verify_current_symbolic(&m, &cur).passed());
        assert!(verify_current_numeric(&m, &cur, 100, 5).unwrap().passed());
    }
    assert!(matches!(
        build_current(&zero_lag, &gen(&m, &["0", "0", "0"], "1", "0")),
        Err(NoetherError::NotNoether(_))
    ));
}

fn flat(n: usize) -> MetricSpace {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let g: Vec<Vec<String>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { "1".into() } else { "0".into() }).collect())
        .collect();
    MetricSpace::from_strings(&names, &g, Signature::Riemannian, vec![(-1.0, 1.0); n]).unwrap()
}

#[test]
fn dimension_six_potential_matches_residual_for_biharmonic_mu() {
    let m = flat(6);
    let t = m.table();
    let u = RatFn::symbol(t.u());
    for mu_s in ["x1^3", "x1^2*x2 - x2^3/3 + x3", "x1*x2*x3"] {
        let mu = m.parse_scalar(mu_s).unwrap();
        let lap = m.laplacian(&mu);
        assert!(m.laplacian(&lap).is_zero());
        // residual for conformal ξ with a = −μ, b = ½Δμ, f = u²
        let mut expect = lap.mul(&u.powi(2)).scale(&poissym::exprcore::qr(-1, 2));
        for i in 0..6 {
            let ui = RatFn::symbol(t.u1(i));
            let x = m.coord(i);
            expect = expect.sub(&mu.diff(x).mul(&u).mul(&ui));
            expect = expect.add(&lap.diff(x).mul(&ui).scale(&poissym::exprcore::qr(1, 2)));
        }
        let phi: Vec<RatFn> = (0..6)
            .map(|i| {
                let x = m.coord(i);
                mu.diff(x)
                    .mul(&u.powi(2))
                    .scale(&poissym::exprcore::qr(-1, 2))
                    .add(&lap.diff(x).mul(&u).scale(&poissym::exprcore::qr(1, 2)))
            })
            .collect();
        assert!(total_divergence(&m, &phi).sub(&expect).is_zero(), "{mu_s}");
    }
}

#[test]
fn dimension_six_special_conformal() {
    let m = flat(6);
    // ξ = 2 x1 x − |x|² e1, μ = 4 x1
    let xi = [
        "x1^2 - x2^2 - x3^2 - x4^2 - x5^2 - x6^2",
        "2*x1*x2",
        "2*x1*x3",
        "2*x1*x4",
        "2*x1*x5",
        "2*x1*x6",
    ];
    let g = gen(&m, &xi, "-4*x1", "0");
    let cls = NonlinearityClass::PowerTwoDimSix;
    assert!(determining_residuals(&m, &g, &cls).unwrap().verdict);
    let lag = Lagrangian::new(&m, &cls).unwrap();
    let cur = build_current(&lag, &g).unwrap();
    assert!(verify_current_symbolic(&m, &cur).passed());
}
