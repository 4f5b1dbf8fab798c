use std::sync::OnceLock;

use poissym::catalog::{load, reconcile, run_all, tables_for, Agreement, CatalogError, SuiteReport, NAMES, TABLES};
use poissym::detsys::{classify, NonlinearityClass, SolveOptions};
use poissym::exprcore::{qi, qr, Verdict};
use poissym::geom::lie_bracket;

fn reports() -> &'static [SuiteReport] {
    static R: OnceLock<Vec<SuiteReport>> = OnceLock::new();
    R.get_or_init(|| run_all().expect("fixtures load"))
}

fn report(name: &str) -> &'static SuiteReport {
    reports().iter().find(|r| r.geometry == name).unwrap()
}

#[test]
fn load_examples() {
    assert_eq!(load("sol").unwrap().scalar_curvature, qi(-2));
    assert_eq!(load("sl2tilde").unwrap().isometry_dim, 4);
    assert_eq!(load("sl2tilde").unwrap().scalar_curvature, qr(-5, 2));
    let e = load("euclidean").unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                assert!(e.metric.christoffel(i, j, k).is_zero());
            }
        }
    }
    assert!(matches!(load("nosuch"), Err(CatalogError::Unknown(_))));
}

#[test]
fn every_suite_passes() {
    for r in reports() {
        let bad: Vec<String> = r.failures().map(ToString::to_string).collect();
        assert!(bad.is_empty(), "{}:\n{}", r.geometry, bad.join("\n"));
    }
    assert_eq!(reports().len(), NAMES.len());
}

#[test]
fn isometry_dimensions() {
    let want = [6, 6, 6, 3, 4, 4, 4, 4];
    for (name, d) in NAMES.iter().zip(want) {
        let c = report(name).class("arbitrary").unwrap();
        assert_eq!((c.generators, c.xi_dimension, c.noether), (d, d, d), "{name}");
    }
}

#[test]
fn euclidean_critical_is_fully_noether() {
    let c = report("euclidean").class("critical").unwrap();
    assert_eq!((c.generators, c.xi_dimension, c.noether), (10, 10, 10));
}

#[test]
fn currents_are_conserved_everywhere() {
    let mut n = 0;
    for r in reports() {
        for c in &r.currents {
            assert!(c.symbolic, "{} {} {}", r.geometry, c.class, c.generator);
            assert!(c.max_divergence < 1e-7, "{} {}: {:e}", r.geometry, c.generator, c.max_divergence);
            assert!(c.above_control >= 95, "{} {}: {}", r.geometry, c.generator, c.above_control);
            n += 1;
        }
    }
    assert!(n > 100, "{n}");
}

#[test]
fn sphere_linear_class() {
    let fx = load("sphere3").unwrap();
    let t = classify(&fx.metric, &NonlinearityClass::Linear, &fx.basis().unwrap(), &SolveOptions::default()).unwrap();
    let m = &fx.metric;
    assert!(t.rows.iter().any(|r| r.generator.xi.is_zero() && r.generator.b.is_zero() && !r.generator.a.is_zero()));
    for r in &t.rows {
        let b = &r.generator.b;
        let lap = m.laplace_beltrami(b).unwrap().add(b);
        assert_eq!(m.verdict(&lap), Verdict::Zero);
    }
    assert_eq!(t.rows.len(), 7);
}

#[test]
fn heisenberg_bracket_pattern() {
    let fx = load("heisenberg").unwrap();
    let (x, y, t) = (fx.field("Xt").unwrap(), fx.field("Yt").unwrap(), fx.field("T").unwrap());
    assert_eq!(lie_bracket(&fx.metric, x, y).unwrap(), t.scale(&qi(4)));
    assert!(report("heisenberg").checks_in("killing").all(|c| c.passed));
}

#[test]
fn required_tables_match() {
    for name in ["euclidean", "sol", "h2xr"] {
        let fx = load(name).unwrap();
        let mut matched = 0;
        for t in tables_for(name) {
            let r = reconcile(&fx, t);
            match (&r.agreement, t.typo) {
                (Agreement::Match, None) => matched += 1,
                (Agreement::Documented(..), Some(_)) => {}
                (a, _) => panic!("{name} {}: {a:?}", t.label),
            }
        }
        assert!(matched >= 3, "{name}: {matched}");
    }
}

#[test]
fn documented_typos_really_differ() {
    for r in reports() {
        for w in r.warnings() {
            let Agreement::Documented(_, differ) = &w.agreement else { unreachable!() };
            assert!(!differ.is_empty(), "{} {} is flagged but matches", w.entry.geometry, w.entry.label);
        }
    }
    let flagged = |g: &str| TABLES.iter().filter(|t| t.geometry == g && t.typo.is_some()).count();
    assert!(flagged("hyperbolic3") > 0 && flagged("sphere3") > 0 && flagged("heisenberg") > 0);
}
