//! One function per subcommand: validate, run the probe, package the outcome.

use std::fmt::Display;

use hardylab::analytic::Analytic;
use hardylab::counting::{change_of_variables_check, nevanlinna, PolarGrid};
use hardylab::cyclic::{
    convergence_probe, distance, distance_profile, krylov_basis, nonminimality_gap, singular_invariance_check,
};
use hardylab::eigen::{
    afscan, afscan_grid, continue_analytically, eigen_residual, orbit_trace, spectrum_sample, zero_orbit_check,
    OrbitThresholds, ZeroOrbitVerdict, ZeroSearch,
};
use hardylab::halfplane::{
    build_shift_model, caradus_precheck, h2_halfplane_norm_sq, paley_wiener, shift_eigenvector, spectral_map,
    CaradusVerdict, HalfLineGrid, ShiftVerdict, DEFAULT_T_MAX, DEFAULT_T_MIN,
};
use hardylab::moebius::{classify_disk, classify_halfplane, Domain};
use hardylab::Complex64;
use serde_json::{json, Value};

use crate::args::*;
use crate::parse;
use crate::report::{Outcome, Table, Verdict};

pub type Run = Result<Outcome, String>;

fn e(err: impl Display) -> String {
    err.to_string()
}

fn cx(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn to_value(v: &impl serde::Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Snake-case name of a unit or internally tagged enum variant.
fn label(v: &impl serde::Serialize) -> String {
    match to_value(v) {
        Value::String(s) => s,
        Value::Object(o) => o.get("kind").and_then(Value::as_str).unwrap_or_default().to_string(),
        other => other.to_string(),
    }
}

fn row(cells: &[&dyn Display]) -> Vec<String> {
    cells.iter().map(|c| c.to_string()).collect()
}

pub fn classify(args: &ClassifyArgs) -> Run {
    let domain = if args.domain.disk { Domain::Disk } else { Domain::HalfPlane };
    let m = parse::map(&args.map, domain)?;
    let class = match domain {
        Domain::Disk => classify_disk(&m),
        _ => classify_halfplane(&m),
    }
    .map_err(e)?;
    let region = class
        .lambda_region
        .map(|r| format!(" lambda-region ({}, {:.6})", r.inner, r.outer))
        .unwrap_or_default();
    let summary = format!("{:?} universal_translate={}{}", class.kind, class.universal_translate, region);
    Ok(Outcome::new(to_value(&class), Verdict::None, summary))
}

pub fn eigencheck(args: &EigencheckArgs, scale: f64) -> Run {
    let s = parse::complex(&args.s)?;
    let tol = args.tol.unwrap_or(1e-8 * scale);
    let r = eigen_residual(args.a, s, args.order).map_err(e)?;
    let lambda = (s * args.a.ln()).exp();
    let verdict = Verdict::from_bool(r.passes(tol));
    let summary = format!(
        "residual {:.3e} on rows 0..={} (budget {:.3e}, tol {:.1e}) lambda {}",
        r.window_residual,
        r.window,
        r.budget,
        tol,
        cx(lambda)
    );
    Ok(Outcome::new(json!({ "lambda": lambda, "residual": r }), verdict, summary)
        .with_tolerances(json!({ "residual": tol })))
}

pub fn spectrum(args: &SpectrumArgs, scale: f64) -> Run {
    let tol = args.tol.unwrap_or(1e-8 * scale);
    if args.radii == 0 || args.angles == 0 {
        return Err("need at least one radius and one angle".into());
    }
    let pts = spectrum_sample(args.a, args.radii, args.angles, args.r_min, args.frac, args.order, tol).map_err(e)?;
    let mut table = Table::new(&["re_lambda", "im_lambda", "re_s", "im_s", "window_residual", "budget", "pass"]);
    for p in &pts {
        table.push(row(&[
            &p.lambda.re,
            &p.lambda.im,
            &p.s.re,
            &p.s.im,
            &p.residual.window_residual,
            &p.residual.budget,
            &p.pass,
        ]));
    }
    let passed = pts.iter().filter(|p| p.pass).count();
    let worst = pts.iter().map(|p| p.residual.window_residual).fold(0.0, f64::max);
    let failing: Vec<Complex64> = pts.iter().filter(|p| !p.pass).map(|p| p.lambda).collect();
    let summary = format!("{passed} of {} grid points pass, worst residual {worst:.3e}", pts.len());
    Ok(Outcome::new(
        json!({ "points": pts.len(), "passed": passed, "worst_residual": worst, "failing": failing }),
        Verdict::from_bool(passed == pts.len()),
        summary,
    )
    .with_table(table)
    .with_tolerances(json!({ "residual": tol })))
}

pub fn afscan_cmd(args: &AfscanArgs, scale: f64) -> Run {
    if !(args.grid > 0.0 && args.grid < 0.5) {
        return Err(format!("grid spacing must lie in (0, 0.5), got {}", args.grid));
    }
    let tol = args.tol.unwrap_or(1e-9 * scale);
    let f = parse::function(&args.f, args.a0)?.coefficients(args.order);
    let r = afscan(&f, &afscan_grid(args.grid), tol).map_err(e)?;
    let mut table = Table::new(&["a", "misalignment"]);
    for (a, m) in r.grid.iter().zip(&r.misalignment) {
        table.push(row(&[a, m]));
    }
    let summary = format!(
        "hits {:?} fitted_c {} hits_on_powers {} full_interval {}",
        r.hits,
        r.fitted_c.map_or("none".to_string(), |c| c.to_string()),
        r.hits_on_powers,
        r.full_interval
    );
    Ok(Outcome::new(to_value(&r), Verdict::None, summary).with_table(table).with_tolerances(json!({ "misalignment": tol })))
}

pub fn orbit(args: &OrbitArgs, scale: f64) -> Run {
    let f = parse::function(&args.f, Some(args.a))?;
    let w = parse::complex(&args.w)?;
    let th = OrbitThresholds::default().scaled(scale);
    let t = orbit_trace(&f, w, args.a, args.n_max, &th).map_err(e)?;
    let mut table = Table::new(&["n", "re", "im", "modulus"]);
    for (n, v) in t.values.iter().enumerate() {
        table.push(row(&[&n, &v.re, &v.im, &v.norm()]));
    }
    let summary = format!(
        "{} fitted_ratio {} low_confidence {}",
        label(&t.verdict),
        t.fitted_ratio.map_or("none".to_string(), |r| format!("{r:.6}")),
        t.low_confidence
    );
    Ok(Outcome::new(to_value(&t), Verdict::None, summary).with_table(table).with_tolerances(to_value(&th)))
}

pub fn zeros(args: &ZerosArgs) -> Run {
    let f = parse::function(&args.f, Some(args.a))?;
    if !(args.u_min > 0.0 && args.u_min < 1.0) || args.points < 2 {
        return Err("need 0 < u_min < 1 and at least two search points".into());
    }
    let r = zero_orbit_check(&f, args.a, &ZeroSearch { u_min: args.u_min, points: args.points }).map_err(e)?;
    let mut table = Table::new(&["index", "zero", "closure_residual"]);
    for (k, (z, c)) in r.zeros.iter().zip(&r.closure_residuals).enumerate() {
        table.push(row(&[&k, z, c]));
    }
    let verdict = match r.verdict {
        ZeroOrbitVerdict::SingleOrbit => Verdict::Pass,
        ZeroOrbitVerdict::Mismatch => Verdict::Fail,
        ZeroOrbitVerdict::NoZeros => Verdict::None,
    };
    let summary = format!("{} zeros, {} max mismatch {:.3e}", r.zeros.len(), label(&r.verdict), r.max_mismatch);
    Ok(Outcome::new(to_value(&r), verdict, summary).with_table(table))
}

pub fn continuation(args: &ContinueArgs) -> Run {
    let f = parse::function(&args.f, Some(args.a))?;
    let lambda = match (&args.lambda, &args.s) {
        (Some(l), _) => parse::complex(l)?,
        (None, Some(s)) => (parse::complex(s)? * args.a.ln()).exp(),
        (None, None) => return Err("continue needs --lambda or --s".into()),
    };
    let z = parse::complex(&args.z)?;
    let c = continue_analytically(&f, lambda, args.a, z).map_err(e)?;
    let summary = format!("f({}) = {} using n = {}", cx(z), cx(c.value), c.n);
    Ok(Outcome::new(json!({ "lambda": lambda, "z": z, "value": c.value, "n": c.n }), Verdict::None, summary))
}

pub fn krylov(args: &KrylovArgs) -> Run {
    let f = parse::function(&args.f, Some(args.a))?;
    let basis = krylov_basis(&f, args.a, args.depth, args.order).map_err(e)?;
    let mut results = json!({
        "rank": basis.rank(),
        "depth": basis.depth,
        "dropped": basis.dropped,
        "gram_defect": basis.gram_defect(),
    });
    let mut summary = format!("rank {} of {} gram_defect {:.3e}", basis.rank(), args.depth + 1, basis.gram_defect());
    let mut outcome_table = None;
    if let Some(target) = &args.target {
        let t = parse::function(target, Some(args.a))?.coefficients(args.order);
        let profile = distance_profile(&t, &f, args.a, args.depth, args.order).map_err(e)?;
        let mut table = Table::new(&["depth", "distance"]);
        for (m, d) in profile.iter().enumerate() {
            table.push(row(&[&m, d]));
        }
        let last = distance(&t, &basis);
        results["distance"] = json!(last);
        results["profile"] = json!(profile);
        summary.push_str(&format!(" distance {last:.3e}"));
        outcome_table = Some(table);
    }
    let out = Outcome::new(results, Verdict::None, summary);
    Ok(match outcome_table {
        Some(t) => out.with_table(t),
        None => out,
    })
}

pub fn converge(args: &ConvergeArgs, scale: f64) -> Run {
    let g = parse::function(&args.g, Some(args.a))?;
    let s = parse::complex(&args.s)?;
    let tol = args.tol.unwrap_or(1e-3 * scale);
    let p = convergence_probe(&g, s, args.a, args.n_max, args.order).map_err(e)?;
    let fs = Analytic::power(s);
    let basis = krylov_basis(&Analytic::Product(vec![fs.clone(), g]), args.a, args.depth, args.order).map_err(e)?;
    let dist = distance(&fs.coefficients(args.order), &basis);
    let last = p.residuals.last().copied().unwrap_or(f64::NAN);
    let mut table = Table::new(&["n", "residual"]);
    for (n, r) in p.residuals.iter().enumerate() {
        table.push(row(&[&n, r]));
    }
    let verdict = Verdict::from_bool(last < tol && dist < tol);
    let summary = format!(
        "r_{} = {last:.3e} ratio {} distance(f_s, K) {dist:.3e}",
        p.residuals.len().saturating_sub(1),
        p.ratio.map_or("none".to_string(), |r| format!("{r:.4}"))
    );
    Ok(Outcome::new(json!({ "probe": p, "krylov_distance": dist, "krylov_rank": basis.rank() }), verdict, summary)
        .with_table(table)
        .with_tolerances(json!({ "residual": tol, "distance": tol })))
}

pub fn inner_invariance(args: &InnerArgs, scale: f64) -> Run {
    let tol = args.tol.unwrap_or(1e-8 * scale);
    let r = singular_invariance_check(args.a, args.b, args.order).map_err(e)?;
    let summary = format!("residual {:.3e} on rows 0..={} factor {:.6}", r.residual, r.window, r.factor);
    Ok(Outcome::new(to_value(&r), Verdict::from_bool(r.residual <= tol + r.budget), summary)
        .with_tolerances(json!({ "residual": tol })))
}

pub fn nonminimal_gap(args: &GapArgs, scale: f64) -> Run {
    if !(args.b >= 0.0) {
        return Err(format!("need b >= 0, got {}", args.b));
    }
    let zero = 1e-8 * scale;
    let r = nonminimality_gap(&Analytic::singular_inner(args.b), args.a, args.n0, args.depth, args.order).map_err(e)?;
    let mut table = Table::new(&["depth", "gap"]);
    for (m, g) in r.gaps.iter().enumerate() {
        table.push(row(&[&m, g]));
    }
    let summary = format!("gap {:.6} floor {:.6} non_decreasing {} rank {}", r.gap, r.floor, r.tail_non_decreasing, r.rank);
    Ok(Outcome::new(to_value(&r), Verdict::from_bool(r.floor > zero && r.tail_non_decreasing), summary)
        .with_table(table)
        .with_tolerances(json!({ "positive_floor": zero })))
}

enum TimeFn {
    Exp(f64),
    TExp(f64),
}

impl TimeFn {
    fn parse(text: &str) -> Result<Self, String> {
        let (kind, r) = text.split_once(':').ok_or_else(|| format!("expected exp:R or texp:R, got '{text}'"))?;
        let r: f64 = r.parse().map_err(|_| format!("bad rate in '{text}'"))?;
        if !(r > 0.0) || !r.is_finite() {
            return Err(format!("rate must be positive, got {r}"));
        }
        match kind {
            "exp" => Ok(TimeFn::Exp(r)),
            "texp" => Ok(TimeFn::TExp(r)),
            _ => Err(format!("unknown time function '{kind}'")),
        }
    }

    fn at(&self, t: f64) -> Complex64 {
        match *self {
            TimeFn::Exp(r) => Complex64::new((-r * t).exp(), 0.0),
            TimeFn::TExp(r) => Complex64::new(t * (-r * t).exp(), 0.0),
        }
    }

    fn laplace(&self, w: Complex64) -> Complex64 {
        match *self {
            TimeFn::Exp(r) => 1.0 / (w + r),
            TimeFn::TExp(r) => 1.0 / ((w + r) * (w + r)),
        }
    }

    fn norm_sq(&self) -> f64 {
        match *self {
            TimeFn::Exp(r) => 1.0 / (2.0 * r),
            TimeFn::TExp(r) => 1.0 / (4.0 * r * r * r),
        }
    }
}

fn rel(x: Complex64, exact: Complex64) -> f64 {
    (x - exact).norm() / exact.norm().max(f64::MIN_POSITIVE)
}

pub fn paley_wiener_cmd(args: &PaleyWienerArgs, scale: f64) -> Run {
    let tf = TimeFn::parse(&args.time_fn)?;
    let ws = parse::complex_list(&args.w)?;
    if args.k == 0 {
        return Err("k must be positive".into());
    }
    let tol = args.tol.unwrap_or(1e-6 * scale);
    let grid = HalfLineGrid::sample(|t| tf.at(t), 2f64.powf(1.0 / args.k as f64), DEFAULT_T_MIN, DEFAULT_T_MAX).map_err(e)?;
    let mut table = Table::new(&["re_w", "im_w", "re_value", "im_value", "re_exact", "im_exact", "defect", "error_estimate"]);
    let mut worst: f64 = 0.0;
    let mut warnings = 0;
    for &w in &ws {
        let l = paley_wiener(&grid, w).map_err(e)?;
        let exact = tf.laplace(w);
        let d = rel(l.value, exact);
        worst = worst.max(d);
        warnings += l.decay_warning as usize;
        table.push(row(&[&w.re, &w.im, &l.value.re, &l.value.im, &exact.re, &exact.im, &d, &l.error_estimate]));
    }
    let exact = tf.norm_sq();
    let l2 = grid.norm_sq();
    let h2 = h2_halfplane_norm_sq(|w| tf.laplace(w), 0.0, 256);
    let isometry = (l2 - exact).abs().max((h2 - exact).abs()) / exact;
    let ok = worst < tol && isometry < tol && warnings == 0;
    let summary = format!("worst relative defect {worst:.3e} isometry defect {isometry:.3e}");
    Ok(Outcome::new(
        json!({
            "points": ws.len(),
            "worst_defect": worst,
            "decay_warnings": warnings,
            "l2_norm_sq": l2,
            "h2_norm_sq": h2,
            "exact_norm_sq": exact,
            "isometry_defect": isometry,
            "grid_points": grid.len(),
        }),
        Verdict::from_bool(ok),
        summary,
    )
    .with_table(table)
    .with_tolerances(json!({ "relative": tol })))
}

pub fn shift_model(args: &ShiftModelArgs) -> Run {
    let b = parse::complex(&args.b)?;
    let m = build_shift_model(args.a, b, args.window, args.cell_points).map_err(e)?;
    let mut table = Table::new(&["n", "t", "weight", "reversed_weight"]);
    let mi = m.window as i64;
    for n in -mi..=mi {
        for &t in &m.cell {
            table.push(row(&[&n, &t, &m.weight(n, t), &m.reversed_weight(n, t)]));
        }
    }
    let summary = format!(
        "ratio {:.6} tails ({:.6}, {:.6}) degenerate {}",
        m.ratio(),
        m.tail_minus,
        m.tail_plus,
        m.degenerate
    );
    Ok(Outcome::new(to_value(&m), Verdict::None, summary).with_table(table))
}

pub fn shift_eigen(args: &ShiftEigenArgs) -> Run {
    let b = parse::complex(&args.b)?;
    let m = build_shift_model(args.a, b, args.window, args.cell_points).map_err(e)?;
    if let (Some(nr), Some(na)) = (args.grid_radii, args.grid_angles) {
        if nr == 0 || na == 0 {
            return Err("grid needs at least one radius and one angle".into());
        }
        let r_max = args.r_max.unwrap_or(2.0 * args.a.powf(-0.5));
        if !(r_max > 0.0) {
            return Err(format!("r_max must be positive, got {r_max}"));
        }
        let lambdas: Vec<Complex64> = (1..=nr)
            .flat_map(|i| {
                let r = r_max * i as f64 / nr as f64;
                (0..na).map(move |k| Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / na as f64))
            })
            .collect();
        let pts = spectral_map(&m, &lambdas);
        let mut table = Table::new(&["re_lambda", "im_lambda", "residual", "verdict"]);
        for p in &pts {
            table.push(row(&[&p.lambda.re, &p.lambda.im, &p.residual, &label(&p.verdict)]));
        }
        let hits = pts.iter().filter(|p| p.verdict == ShiftVerdict::Eigenvector).count();
        let summary = format!("{hits} of {} grid points carry eigenvectors", pts.len());
        return Ok(Outcome::new(json!({ "points": pts }), Verdict::None, summary).with_table(table));
    }
    let lambda = parse::complex(args.lambda.as_deref().unwrap_or_default())?;
    let x0 = vec![Complex64::new(1.0, 0.0); m.cell.len()];
    let r = shift_eigenvector(&m, lambda, &x0).map_err(e)?;
    let mut table = Table::new(&["n", "block_norm"]);
    for (k, nrm) in r.block_norms.iter().enumerate() {
        table.push(row(&[&(k as i64 - m.window as i64), nrm]));
    }
    let summary = format!(
        "{} residual {:.3e} tail ratios ({:.4}, {:.4}) expected ({:.4}, {:.4})",
        label(&r.verdict),
        r.residual,
        r.ratio_minus,
        r.ratio_plus,
        r.expected_minus,
        r.expected_plus
    );
    let verdict = Verdict::from_bool(r.verdict == ShiftVerdict::Eigenvector);
    let mut results = to_value(&r);
    results.as_object_mut().map(|o| o.remove("blocks"));
    Ok(Outcome::new(results, verdict, summary).with_table(table))
}

pub fn caradus(args: &CaradusArgs) -> Run {
    let b = parse::complex(&args.b)?;
    let lambda = parse::complex(&args.lambda)?;
    let windows: Vec<usize> = args
        .windows
        .split(',')
        .map(|w| w.trim().parse::<usize>().map_err(|_| format!("bad window '{w}'")))
        .collect::<Result<_, _>>()?;
    let max = *windows.iter().max().ok_or("need at least one window")?;
    let m = build_shift_model(args.a, b, max, args.cell_points).map_err(e)?;
    let r = caradus_precheck(&m, lambda, &windows);
    let mut table = Table::new(&["window", "kernel_proxy", "surjectivity_proxy"]);
    for en in &r.entries {
        table.push(row(&[&en.window, &en.kernel_proxy, &en.surjectivity_proxy]));
    }
    let verdict = match r.verdict {
        CaradusVerdict::ConsistentWithCaradus => Verdict::Pass,
        CaradusVerdict::NotConsistent => Verdict::Fail,
        CaradusVerdict::Descriptive => Verdict::None,
    };
    let kernels: Vec<usize> = r.entries.iter().map(|x| x.kernel_proxy).collect();
    let summary = format!("{} kernel proxies {kernels:?}", label(&r.verdict));
    Ok(Outcome::new(to_value(&r), verdict, summary).with_table(table))
}

pub fn counting(args: &CountingArgs) -> Run {
    let m = parse::map(&args.map, Domain::Disk)?;
    let w = parse::complex(&args.w)?;
    let c = nevanlinna(&m, w).map_err(e)?;
    let summary = if c.singular { format!("N({}) = inf (w = phi(0))", cx(w)) } else { format!("N({}) = {}", cx(w), c.value) };
    Ok(Outcome::new(to_value(&c), Verdict::None, summary))
}

pub fn cov_check(args: &CovArgs, scale: f64) -> Run {
    let m = parse::map(&args.map, Domain::Disk)?;
    let Analytic::Poly(f) = parse::function(&args.f, None)? else {
        return Err("cov-check needs a polynomial, given as poly:c0,c1,...".into());
    };
    if args.radial == 0 || args.angular == 0 {
        return Err("quadrature grid must be non-empty".into());
    }
    let tol = args.tol.unwrap_or(1e-4 * scale);
    let r = change_of_variables_check(&m, &f, PolarGrid { radial: args.radial, angular: args.angular }).map_err(e)?;
    let summary = format!("lhs {:.12} rhs {:.12} defect {:.3e} converged {}", r.lhs, r.rhs, r.defect, r.converged);
    Ok(Outcome::new(to_value(&r), Verdict::from_bool(r.defect < tol), summary).with_tolerances(json!({ "defect": tol })))
}
