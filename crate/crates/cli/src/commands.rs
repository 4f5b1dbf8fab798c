use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use poissym::catalog::{self, polynomial_basis, run_all, run_fixture_suite, Agreement, CatalogError, SuiteReport};
use poissym::detsys::{classify as classify_table, AnsatzBasis, GeneratorKind, NonlinearityClass, SolveOptions, SymmetryGenerator};
use poissym::exprcore::{parse_rational, RatFn, Verdict};
use poissym::geom::{conformal_check, field_rank, MetricSpace, VectorField};
use poissym::linalg::rationalize;
use poissym::noether::{
    build_current, noether_classify, off_shell_control, verify_current_numeric, verify_current_symbolic, Lagrangian,
    NoetherError, NoetherKind,
};

use crate::manifest::{Manifest, Nonlinearity};
use crate::{ClassArgs, CliError, Ctx, GeneratorArgs, Source};

/// Like `println!`, but a closed pipe is not a panic.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

const DEFAULT_VERIFY_SEED: u64 = 0xc0de;

struct Loaded {
    metric: MetricSpace,
    fields: BTreeMap<String, Vec<String>>,
    nonlinearity: Option<Nonlinearity>,
    basis: Option<Vec<String>>,
}

fn fixture(name: &str) -> Result<catalog::GeometryFixture, CliError> {
    catalog::load(name).map_err(|e| match e {
        CatalogError::Unknown(_) => CliError::Input(e.to_string()),
        CatalogError::Geom(g) => g.into(),
    })
}

fn load(ctx: &Ctx, src: &Source) -> Result<Loaded, CliError> {
    let man = match (&src.manifest, &src.geometry) {
        (Some(p), _) => Manifest::read(p)?,
        (None, Some(name)) => Manifest::from_fixture(&fixture(name)?),
        (None, None) => return Err(CliError::Input("give a manifest file or --geometry".into())),
    };
    let mut metric = man.metric()?;
    if let Some(s) = ctx.seed {
        metric = metric.with_seed(s);
    }
    Ok(Loaded {
        metric,
        fields: man.vectorfields,
        nonlinearity: man.nonlinearity,
        basis: man.ansatz.map(|a| a.basis),
    })
}

fn options(ctx: &Ctx) -> SolveOptions {
    let mut o = SolveOptions::default();
    if let Some(s) = ctx.seed {
        o.seed = s;
    }
    o
}

/// Splits on commas outside parentheses.
fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn is_identifier(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|h| h.is_ascii_alphabetic()) && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn nonlinearity(l: &mut Loaded, args: &ClassArgs) -> Result<NonlinearityClass, CliError> {
    let from_manifest = l.nonlinearity.clone();
    let tag = args
        .class
        .clone()
        .or_else(|| from_manifest.as_ref().map(|n| n.class.clone()))
        .unwrap_or_else(|| "arbitrary".into());
    let p = match (&args.p, from_manifest.as_ref().and_then(|n| n.p)) {
        (Some(s), _) => Some(parse_rational(s).ok_or_else(|| CliError::Input(format!("bad exponent `{s}`")))?),
        (None, Some(x)) => Some(rationalize(x, 1000, 1e-9).ok_or_else(|| CliError::Input(format!("exponent {x} is not a small rational")))?),
        (None, None) => None,
    };
    let k_text = args.k.clone().or_else(|| from_manifest.and_then(|n| n.k));
    let k = match k_text {
        Some(t) => {
            let t = t.trim().to_string();
            if is_identifier(&t) && l.metric.table().lookup(&t).is_none() {
                l.metric
                    .table_mut()
                    .add_param(&t)
                    .map_err(|e| CliError::Input(e.to_string()))?;
            }
            Some(l.metric.parse_scalar(&t)?)
        }
        None => None,
    };
    Ok(NonlinearityClass::from_tag(&tag, l.metric.dim(), p, k)?)
}

fn xi_strings(l: &Loaded, gen: &GeneratorArgs) -> Result<Vec<String>, CliError> {
    match (&gen.field, &gen.xi) {
        (Some(name), _) => l
            .fields
            .get(name)
            .cloned()
            .ok_or_else(|| CliError::Input(format!("unknown vector field `{name}`"))),
        (None, Some(inline)) => Ok(split_top(inline)),
        (None, None) => Ok(vec!["0".into(); l.metric.dim()]),
    }
}

fn generator(l: &Loaded, gen: &GeneratorArgs) -> Result<SymmetryGenerator, CliError> {
    let xi = xi_strings(l, gen)?;
    if xi.len() != l.metric.dim() {
        return Err(CliError::Input(format!("field has {} components, chart has {}", xi.len(), l.metric.dim())));
    }
    Ok(SymmetryGenerator::from_strings(&l.metric, &xi, &gen.a, &gen.b)?)
}

fn basis(l: &Loaded, arg: Option<&str>) -> Result<AnsatzBasis, CliError> {
    let items = match arg {
        Some(a) if Path::new(a).is_file() => {
            let text = std::fs::read_to_string(a).map_err(|e| CliError::Input(format!("{a}: {e}")))?;
            match serde_json::from_str::<Vec<String>>(&text) {
                Ok(v) => v,
                Err(_) => text
                    .lines()
                    .map(str::trim)
                    .filter(|s| !s.is_empty() && !s.starts_with('#'))
                    .map(String::from)
                    .collect(),
            }
        }
        Some(a) => split_top(a),
        None => match &l.basis {
            Some(b) => b.clone(),
            None => {
                let names: Vec<&str> = l.metric.table().coords().iter().map(|s| s.name()).collect();
                polynomial_basis(&names, 2)
            }
        },
    };
    Ok(AnsatzBasis::parse(&l.metric, &items)?)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Zero => "zero",
        Verdict::NonZero => "nonzero",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn print_json(v: &Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn strs(v: &[RatFn]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

pub fn curvature(ctx: &Ctx, src: &Source) -> Result<(), CliError> {
    let l = load(ctx, src)?;
    let m = &l.metric;
    let n = m.dim();
    let name = |i: usize| m.coord(i).name().to_string();
    let mut christoffel = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let c = m.christoffel(i, j, k);
                if !c.is_zero() {
                    christoffel.push((i, j, k, c.to_string()));
                }
            }
        }
    }
    let ricci: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| m.ricci_lower(i, j).to_string()).collect()).collect();
    let r = m.scalar_curvature().to_string();
    if ctx.json {
        let ch: Vec<Value> = christoffel
            .iter()
            .map(|(i, j, k, v)| json!({"upper": name(*i), "lower": [name(*j), name(*k)], "value": v}))
            .collect();
        print_json(&json!({"christoffel": ch, "ricci": ricci, "scalar_curvature": r}));
        return Ok(());
    }
    out!("Christoffel symbols (nonzero, j <= k):");
    for (i, j, k, v) in &christoffel {
        out!("  Gamma^{}_{{{} {}}} = {v}", name(*i), name(*j), name(*k));
    }
    if christoffel.is_empty() {
        out!("  none");
    }
    out!("Ricci tensor (nonzero, i <= j):");
    let mut any = false;
    for (i, row) in ricci.iter().enumerate() {
        for (j, v) in row.iter().enumerate().skip(i) {
            if v != "0" {
                out!("  R_{{{} {}}} = {v}", name(i), name(j));
                any = true;
            }
        }
    }
    if !any {
        out!("  none");
    }
    out!("R = {r}");
    Ok(())
}

fn kind_rank(k: GeneratorKind) -> u8 {
    match k {
        GeneratorKind::Isometry => 0,
        GeneratorKind::Homothety => 1,
        GeneratorKind::ConformalKilling => 2,
    }
}

pub fn killing(ctx: &Ctx, src: &Source, gen: &GeneratorArgs, solve: bool, basis_arg: Option<&str>) -> Result<(), CliError> {
    let l = load(ctx, src)?;
    let m = &l.metric;
    if !solve {
        let xi = VectorField::from_strings(m, &xi_strings(&l, gen)?)?;
        let rep = conformal_check(m, &xi);
        let label = gen.field.clone().unwrap_or_else(|| xi.display(m).to_string());
        if ctx.json {
            print_json(&json!({
                "field": label,
                "xi": xi.strings(),
                "verdict": rep.verdict.label(),
                "mu": rep.mu.to_string(),
                "max_residual": rep.max_residual,
            }));
        } else {
            out!("{label}: {rep}");
        }
        return Ok(());
    }
    let b = basis(&l, basis_arg)?;
    let table = classify_table(m, &NonlinearityClass::Zero, &b, &options(ctx))?;
    let mut rows: Vec<_> = table.rows.iter().filter(|r| !r.generator.xi.is_zero()).collect();
    rows.sort_by_key(|r| kind_rank(r.kind));
    let mut chosen: Vec<VectorField> = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        let mut trial = chosen.clone();
        trial.push(r.generator.xi.clone());
        if field_rank(m, &trial) > chosen.len() {
            chosen = trial;
            out.push((r.generator.xi.clone(), conformal_check(m, &r.generator.xi)));
        }
    }
    let count = |l: &str| out.iter().filter(|(_, rep)| rep.verdict.label() == l).count();
    let (ki, ho, co) = (count("Killing"), count("Homothety"), count("ConformalKilling"));
    if ctx.json {
        let fields: Vec<Value> = out
            .iter()
            .map(|(xi, rep)| json!({"xi": xi.strings(), "verdict": rep.verdict.label(), "mu": rep.mu.to_string()}))
            .collect();
        print_json(&json!({"dimension": out.len(), "killing": ki, "homothety": ho, "conformal": co, "fields": fields}));
    } else {
        for (xi, rep) in &out {
            out!("{}: {rep}", xi.display(m));
        }
        out!("conformal algebra: dimension {} ({ki} Killing, {ho} homothety, {co} conformal)", out.len());
    }
    Ok(())
}

pub fn classify(ctx: &Ctx, src: &Source, args: &ClassArgs, basis_arg: Option<&str>) -> Result<(), CliError> {
    let mut l = load(ctx, src)?;
    let cls = nonlinearity(&mut l, args)?;
    let b = basis(&l, basis_arg)?;
    let m = &l.metric;
    let table = classify_table(m, &cls, &b, &options(ctx))?;
    if ctx.json {
        let rows: Vec<Value> = table
            .rows
            .iter()
            .map(|r| {
                let (xi, a, b) = r.generator.strings();
                let checks: Vec<Value> = r
                    .checks
                    .iter()
                    .map(|c| json!({"name": c.name, "verdict": verdict_word(c.verdict)}))
                    .collect();
                json!({
                    "generator": r.generator.display(m).to_string(),
                    "xi": xi,
                    "a": a,
                    "b": b,
                    "mu": r.mu.to_string(),
                    "case": r.case,
                    "checks": checks,
                })
            })
            .collect();
        print_json(&json!({
            "class": cls.to_string(),
            "generators": rows,
            "xi_dimension": table.solve.xi_dimension(m),
            "inconclusive": table.solve.inconclusive.len(),
            "inconsistencies": table.inconsistencies,
        }));
    } else {
        out!(
            "class {cls}: {} generators, xi-dimension {}",
            table.rows.len(),
            table.solve.xi_dimension(m)
        );
        for r in &table.rows {
            out!("[{}] {}", r.case, r.generator.display(m));
            out!("    mu = {}, {}", r.mu, r.kind.label());
            for c in &r.checks {
                out!("    {:<4} {}", if c.verdict == Verdict::Zero { "ok" } else { "FAIL" }, c.name);
            }
        }
        if !table.solve.inconclusive.is_empty() {
            out!("{} candidates could not be verified", table.solve.inconclusive.len());
        }
    }
    if !table.inconsistencies.is_empty() {
        return Err(CliError::Symmetry(format!("side conditions violated: {}", table.inconsistencies.join("; "))));
    }
    Ok(())
}

fn not_symmetry(e: NoetherError) -> CliError {
    if let NoetherError::NotSymmetry(r) = &e {
        return CliError::Symmetry(format!(
            "not a symmetry: max residuals conformal {:.3e}, gradient {:.3e}, source {:.3e}",
            r.max_conformal, r.max_gradient, r.max_source
        ));
    }
    e.into()
}

pub fn noether(ctx: &Ctx, src: &Source, args: &ClassArgs, gen: &GeneratorArgs) -> Result<(), CliError> {
    let mut l = load(ctx, src)?;
    let cls = nonlinearity(&mut l, args)?;
    let m = &l.metric;
    let g = generator(&l, gen)?;
    let lag = Lagrangian::new(m, &cls)?;
    let v = noether_classify(&lag, &g).map_err(not_symmetry)?;
    if ctx.json {
        let c = match &v.kind {
            NoetherKind::ScaledNonNoether { c, .. } => Some(RatFn::constant(c.clone()).to_string()),
            _ => None,
        };
        print_json(&json!({
            "generator": g.display(m).to_string(),
            "verdict": v.label(),
            "potential": v.potential().map(strs),
            "c": c,
            "residual": v.residual.to_string(),
        }));
    } else {
        out!("{}: {v}", g.display(m));
        if let Some(w) = &v.warning {
            out!("warning: {w}");
        }
    }
    Ok(())
}

pub fn current(ctx: &Ctx, src: &Source, args: &ClassArgs, gen: &GeneratorArgs, verify: Option<usize>) -> Result<(), CliError> {
    let mut l = load(ctx, src)?;
    let cls = nonlinearity(&mut l, args)?;
    let m = &l.metric;
    let g = generator(&l, gen)?;
    let lag = Lagrangian::new(m, &cls)?;
    let cur = build_current(&lag, &g).map_err(not_symmetry)?;
    let mut checked = None;
    if let Some(n) = verify {
        let seed = ctx.seed.unwrap_or(DEFAULT_VERIFY_SEED);
        let sym = verify_current_symbolic(m, &cur);
        let on = verify_current_numeric(m, &cur, n, seed)?;
        let off = off_shell_control(m, &cur, n, seed)?;
        checked = Some((sym, on, off));
    }
    let names: Vec<String> = (0..m.dim()).map(|i| m.coord(i).name().to_string()).collect();
    if ctx.json {
        let mut v = json!({
            "component": cur.strings(),
            "max_divergence": checked.as_ref().map(|c| c.1.max_divergence),
            "verdict": cur.verdict.label(),
        });
        if let Some((sym, _, off)) = &checked {
            v["symbolic"] = json!(sym.passed());
            v["off_shell_above"] = json!(off.above_control);
        }
        print_json(&v);
    } else {
        out!("{}: {}", g.display(m), cur.verdict);
        for (k, a) in cur.strings().iter().enumerate() {
            out!("A^{} = {a}", names[k]);
        }
    }
    if let Some((sym, on, off)) = checked {
        let num_ok = on.max_divergence < 1e-7;
        if !ctx.json {
            out!(
                "symbolic: {} (sigma = {:+})",
                if sym.passed() { "PASS" } else { "FAIL" },
                sym.sigma
            );
            out!(
                "max |div| = {:.3e} < 1e-7: {}",
                on.max_divergence,
                if num_ok { "PASS" } else { "FAIL" }
            );
            out!("off-shell control: {}/{} samples above 1e-3", off.above_control, off.samples);
        }
        if !sym.passed() || !num_ok {
            return Err(CliError::Symmetry("current failed verification".into()));
        }
    }
    Ok(())
}

fn suite_json(r: &SuiteReport) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| json!({"group": c.group, "name": c.name, "passed": c.passed, "detail": c.detail}))
        .collect();
    let tables: Vec<Value> = r
        .reconciliation
        .iter()
        .map(|t| {
            let (status, note) = match &t.agreement {
                Agreement::Match => ("match", None),
                Agreement::Documented(n, _) => ("documented", Some(n.to_string())),
                Agreement::Mismatch(_) => ("mismatch", None),
                Agreement::Error(e) => ("error", Some(e.clone())),
            };
            json!({"label": t.entry.label, "status": status, "note": note})
        })
        .collect();
    json!({"geometry": r.geometry, "passed": r.passed(), "checks": checks, "tables": tables})
}

pub fn suite(ctx: &Ctx, geometry: Option<&str>, all: bool) -> Result<(), CliError> {
    let reports = match (geometry, all) {
        (Some(name), _) => {
            let mut fx = fixture(name)?;
            if let Some(s) = ctx.seed {
                fx.metric = fx.metric.with_seed(s);
            }
            vec![run_fixture_suite(&fx)]
        }
        (None, true) => run_all().map_err(|e| CliError::Geometry(e.to_string()))?,
        (None, false) => return Err(CliError::Input("give --geometry NAME or --all".into())),
    };
    if ctx.json {
        print_json(&Value::Array(reports.iter().map(suite_json).collect()));
    } else {
        for r in &reports {
            out!("{r}\n");
        }
        if reports.len() > 1 {
            out!("{:<12} {:>7} {:>9}  result", "geometry", "checks", "warnings");
            for r in &reports {
                out!(
                    "{:<12} {:>3}/{:<3} {:>9}  {}",
                    r.geometry,
                    r.checks.iter().filter(|c| c.passed).count(),
                    r.checks.len(),
                    r.warnings().count(),
                    if r.passed() { "PASS" } else { "FAIL" }
                );
            }
        }
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.geometry).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Symmetry(format!("suite failed for {}", failed.join(", "))))
    }
}

pub fn export(name: &str, output: Option<&Path>) -> Result<(), CliError> {
    let man = Manifest::from_fixture(&fixture(name)?);
    let text = serde_json::to_string_pretty(&man).expect("json");
    match output {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}
