//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use commute_calc::{format_number, run, CurveSpec};
use commute_core::applications::{
    check_convex_segment, check_local_monotone, haar_unitary, random_commuting_segment, random_commuting_tuple,
    random_tangent_direction, Certificate, MonotoneOptions, Verdict,
};
use commute_core::curve::{Curve, RellichPair, RotatingCurve};
use commute_core::derivative::{derivative_bound, derivative_entrywise, derivative_formula, df_map, fd_derivative_oracle};
use commute_core::divdiff::{contour_dd_auto, divided_difference, mean_value_check};
use commute_core::expr::parse_function;
use commute_core::higher::{contour_higher_derivative, default_contour, fd_higher_derivative, higher_derivative_from_jet, CurveJet};
use commute_core::io::{from_json, to_json, DiagJson, MatrixJson, TupleJson};
use commute_core::matfun::{eval_matfun, eval_poly_direct};
use commute_core::spectral_flow::{eigenvector_discontinuity_report, track_eigenvalues, uniform_grid, DetectorConfig};
use commute_core::tangency::{tangency_check, witness_curve};
use commute_core::types::{commutator, max_entry_norm};
use commute_core::{
    validate_commuting, CMatrix, Complex64, HermitianMatrix, Polynomial, ScalarFunction, SelfAdjointTuple, Settings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_hermitian(n: usize, r: &mut ChaCha8Rng) -> HermitianMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    HermitianMatrix::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

fn random_polynomial(d: usize, r: &mut ChaCha8Rng) -> Polynomial {
    let mut p = Polynomial::zero(d);
    for _ in 0..r.random_range(1..6) {
        let mut e = vec![0u32; d];
        let deg = r.random_range(0..=4u32);
        for _ in 0..deg {
            e[r.random_range(0..d)] += 1;
        }
        p.add_term(e, r.random_range(-2.0..2.0));
    }
    p
}

fn pattern_for(n: usize, repeated: bool) -> Option<Vec<usize>> {
    (repeated && n >= 2).then(|| {
        let mut p = vec![2];
        p.extend(std::iter::repeat_n(1, n - 2));
        p
    })
}

fn relative(a: &CMatrix, b: &CMatrix) -> f64 {
    max_entry_norm(&(a - b)) / (1.0 + max_entry_norm(a))
}

fn smooth_function(d: usize) -> ScalarFunction {
    parse_function(["exp(x)", "exp(x)*cos(y)", "exp(x)*cos(y) + x*z^2"][d - 1], d, &[]).unwrap()
}

fn spectral_vs_polynomial() -> Outcome {
    let mut r = rng(1);
    let set = Settings::default();
    let mut worst = 0.0f64;
    for case in 0..50u64 {
        let n = r.random_range(1..=6);
        let d = r.random_range(1..=3);
        let s = random_commuting_tuple(n, &vec![(-1.5, 1.5); d], case, pattern_for(n, case % 3 == 0).as_deref()).map_err(|e| e.to_string())?;
        let p = random_polynomial(d, &mut r);
        let a = eval_matfun(&ScalarFunction::from_polynomial(p.clone()), &s, &set).map_err(|e| e.to_string())?;
        let b = eval_poly_direct(&p, s.as_tuple()).map_err(|e| e.to_string())?;
        worst = worst.max(relative(a.matrix(), b.matrix()));
    }
    let msg = format!("50 cases, max error/(1+|F|) = {worst:.2e} (limit 1e-8)");
    if worst <= 1e-8 { Ok(msg) } else { Err(msg) }
}

fn tangency_round_trip() -> Outcome {
    let set = Settings::default();
    let mut worst_comm = 0.0f64;
    let mut worst_origin = 0.0f64;
    let mut min_order = f64::INFINITY;
    for case in 0..50u64 {
        let n = 2 + (case as usize % 5);
        let d = 2 + (case as usize % 2);
        // At least two eigenvalue groups, so Y is nonzero and the witness curve is not affine.
        let s = random_commuting_tuple(n, &vec![(-1.0, 1.0); d], 100 + case, pattern_for(n, case % 2 == 0 && n >= 3).as_deref()).map_err(|e| e.to_string())?;
        let delta = random_tangent_direction(&s, 200 + case, false, &set).map_err(|e| e.to_string())?;
        let rep = tangency_check(&s, &delta, &set).map_err(|e| e.to_string())?;
        let td = rep.data.ok_or(format!("case {case}: derived tangent pair rejected"))?;
        let curve = witness_curve(&td).map_err(|e| e.to_string())?;
        for t in uniform_grid(-1.0, 1.0, 20).unwrap() {
            let v = curve.value(t);
            for a in 0..d {
                for b in a + 1..d {
                    let c = commutator(v.component(a).matrix(), v.component(b).matrix());
                    let scale = (1.0 + v.component(a).max_entry_norm()) * (1.0 + v.component(b).max_entry_norm());
                    worst_comm = worst_comm.max(max_entry_norm(&c) / scale);
                }
            }
        }
        let at0 = curve.value(0.0);
        for r in 0..d {
            worst_origin = worst_origin.max(max_entry_norm(&(at0.component(r).matrix() - s.as_tuple().component(r).matrix())));
        }
        let slope_error = |h: f64| -> f64 {
            let (p, m) = (curve.value(h), curve.value(-h));
            (0..d)
                .map(|r| max_entry_norm(&((p.component(r).matrix() - m.component(r).matrix()) / Complex64::new(2.0 * h, 0.0) - delta.component(r).matrix())))
                .fold(0.0, f64::max)
        };
        let order = (slope_error(1e-3) / slope_error(1e-4)).log10();
        min_order = min_order.min(order);
    }

    let mut r = rng(2);
    let mut min_residual = f64::INFINITY;
    let mut accepted = 0;
    for case in 0..50u64 {
        let n = 2 + (case as usize % 5);
        let s = random_commuting_tuple(n, &[(-1.0, 1.0), (-1.0, 1.0)], 300 + case, None).map_err(|e| e.to_string())?;
        let delta = random_tangent_direction(&s, 400 + case, false, &set).map_err(|e| e.to_string())?;
        let kick = SelfAdjointTuple::new(vec![random_hermitian(n, &mut r).scale(0.1), random_hermitian(n, &mut r).scale(0.1)]).unwrap();
        let rep = tangency_check(&s, &delta.add(&kick).unwrap(), &set).map_err(|e| e.to_string())?;
        accepted += rep.tangent as usize;
        min_residual = min_residual.min(rep.commutation_residual.max(rep.block_residual));
    }
    let msg = format!(
        "witness commutator {worst_comm:.1e} (limit 1e-10), |S(0)-S| {worst_origin:.1e}, min FD order {min_order:.2} (limit 1.9); perturbed: {accepted} accepted, min residual {min_residual:.1e} (limit 1e-4)"
    );
    let ok = worst_comm <= 1e-10 && worst_origin <= 1e-12 && min_order >= 1.9 && accepted == 0 && min_residual >= 1e-4;
    if ok { Ok(msg) } else { Err(msg) }
}

fn first_derivative_triangle() -> Outcome {
    let set = Settings::default();
    let (mut routes, mut fd_worst, mut repeated) = (0.0f64, 0.0f64, 0);
    for case in 0..50u64 {
        let n = 1 + (case as usize % 6);
        let d = 1 + (case as usize % 3);
        let rep = case % 2 == 0 && n >= 2;
        let s = random_commuting_tuple(n, &vec![(-1.0, 1.0); d], 500 + case, pattern_for(n, rep).as_deref()).map_err(|e| e.to_string())?;
        let delta = random_tangent_direction(&s, 600 + case, false, &set).map_err(|e| e.to_string())?;
        let f = smooth_function(d);
        let td = tangency_check(&s, &delta, &set).map_err(|e| e.to_string())?.data.ok_or("tangent pair rejected")?;
        let a = df_map(&s, &delta, &f, &set).map_err(|e| e.to_string())?;
        let b = derivative_entrywise(&td, &f).map_err(|e| e.to_string())?;
        routes = routes.max(relative(a.matrix(), b.matrix()));
        let fd = fd_derivative_oracle(&f, &witness_curve(&td).unwrap(), 0.0, 1e-4, &set).map_err(|e| e.to_string())?;
        fd_worst = fd_worst.max(relative(a.matrix(), fd.matrix())).max(relative(b.matrix(), fd.matrix()));
        repeated += (td.diag.groups.len() < n) as usize;
    }
    let msg = format!("50 cases ({repeated} repeated): closed vs entrywise {routes:.1e} (limit 1e-9), vs FD h=1e-4 {fd_worst:.1e} (limit 1e-6)");
    if routes <= 1e-9 && fd_worst <= 1e-6 && repeated >= 10 { Ok(msg) } else { Err(msg) }
}

fn derivative_bound_holds() -> Outcome {
    let set = Settings::default();
    let mut violations = 0;
    let mut tightest = 0.0f64;
    for case in 0..100u64 {
        let n = 1 + (case as usize % 6);
        let d = 1 + (case as usize % 3);
        let s = random_commuting_tuple(n, &vec![(-1.0, 1.0); d], 700 + case, pattern_for(n, case % 4 == 0).as_deref()).map_err(|e| e.to_string())?;
        let delta = random_tangent_direction(&s, 800 + case, false, &set).map_err(|e| e.to_string())?;
        let td = tangency_check(&s, &delta, &set).map_err(|e| e.to_string())?.data.ok_or("tangent pair rejected")?;
        let f = smooth_function(d);
        let norm = derivative_formula(&td, &f).map_err(|e| e.to_string())?.spectral_norm();
        let bound = derivative_bound(&td, &f, &vec![(-1.0, 1.0); d]).map_err(|e| e.to_string())?;
        violations += (norm > bound) as usize;
        tightest = tightest.max(norm / bound);
    }
    let msg = format!("100 cases, {violations} violations, largest norm/bound {tightest:.3}");
    if violations == 0 { Ok(msg) } else { Err(msg) }
}

/// Curves of pairs `V e^{Yt} diag(p(t)) e^{-Yt} V*`; with `collide`, two joint eigenvalue paths meet at `t = 0`.
fn pair_curve(seed: u64, n: usize, collide: bool) -> RotatingCurve {
    let mut r = rng(seed);
    let v = haar_unitary(n, &mut r);
    let y = random_hermitian(n, &mut r).matrix() * Complex64::new(0.0, 0.5);
    let coeffs = (0..2)
        .map(|_| {
            let mut c: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
            if collide && n >= 2 {
                c[0][1] = c[0][0];
            }
            c.into_iter().map(|diag| commute_core::types::real_diagonal(&diag)).collect()
        })
        .collect();
    RotatingCurve::new(v, y, coeffs, (-1.0, 1.0)).unwrap()
}

fn higher_route_triangle() -> Outcome {
    let set = Settings::default();
    let f = parse_function("exp(x)*cos(y)", 2, &[]).unwrap();
    let (mut contour, mut fd2, mut fd3, mut l1, mut collisions) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0);
    for case in 0..20u64 {
        let n = 2 + (case as usize % 4);
        let collide = case % 2 == 0;
        let curve = pair_curve(900 + case, n, collide);
        let jet = CurveJet::from_curve(&curve, 0.0, 3, &set).map_err(|e| e.to_string())?;
        if collide {
            collisions += 1;
        }
        for l in [2u32, 3] {
            let dd = higher_derivative_from_jet(&f, &jet, l, &set).map_err(|e| e.to_string())?.matrix;
            let ct = contour_higher_derivative(&f, &jet, l, &default_contour(&f, &jet).unwrap()).map_err(|e| e.to_string())?;
            let fd = fd_higher_derivative(&f, &curve, 0.0, l, 1e-3, &set).map_err(|e| e.to_string())?;
            contour = contour.max(relative(dd.matrix(), ct.matrix()));
            let e = relative(dd.matrix(), fd.matrix()).max(relative(ct.matrix(), fd.matrix()));
            if l == 2 { fd2 = fd2.max(e) } else { fd3 = fd3.max(e) }
        }
        let one = higher_derivative_from_jet(&f, &jet, 1, &set).map_err(|e| e.to_string())?.matrix;
        let first = df_map(&jet.value, &jet.derivs[0], &f, &set).map_err(|e| e.to_string())?;
        l1 = l1.max(relative(one.matrix(), first.matrix()));
    }
    let msg = format!(
        "20 curves ({collisions} with collisions): contour {contour:.1e} (limit 1e-7), FD l=2 {fd2:.1e} (limit 1e-3), FD l=3 {fd3:.1e} (limit 1e-2), l=1 vs first derivative {l1:.1e} (limit 1e-9)"
    );
    if contour <= 1e-7 && fd2 <= 1e-3 && fd3 <= 1e-2 && l1 <= 1e-9 { Ok(msg) } else { Err(msg) }
}

fn divided_differences_vs_contour() -> Outcome {
    let mut r = rng(3);
    let f = parse_function("exp(x)*sin(y) + x^3*y^2", 2, &[]).unwrap();
    let (mut worst, mut uncertified) = (0.0f64, 0);
    for case in 0..50 {
        let k = r.random_range(0..=3usize);
        // Total order j stays within the fourth-order symbolic partials.
        let j = k + r.random_range(0..=(4 - k).min(3));
        let mut xs: Vec<f64> = (0..=k).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut ys: Vec<f64> = (0..=j - k).map(|_| r.random_range(-1.0..1.0)).collect();
        if case % 3 == 0 {
            if xs.len() > 1 {
                xs[1] = xs[0];
            }
            if ys.len() > 1 {
                ys[0] = ys[ys.len() - 1];
            }
        }
        let a = divided_difference(&f, k, j, &xs, &ys).map_err(|e| e.to_string())?;
        let b = contour_dd_auto(&f, k, j, &xs, &ys).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).abs() / (1.0 + a.abs()));
        let mv = mean_value_check(&f, k, j, &xs, &ys, (-1.0, 1.0), (-1.0, 1.0)).map_err(|e| e.to_string())?;
        uncertified += (!mv.certified) as usize;
    }
    let msg = format!("50 cases: recursion vs contour {worst:.1e} (limit 1e-8), mean-value failures {uncertified}");
    if worst <= 1e-8 && uncertified == 0 { Ok(msg) } else { Err(msg) }
}

fn rellich_fixture() -> Outcome {
    let set = Settings::default();
    let grid = uniform_grid(-1.0, 1.0, 401).unwrap();
    let b = track_eigenvalues(&RellichPair::default(), &grid, &set).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (k, &t) in grid.iter().enumerate() {
        let e = if t == 0.0 { 0.0 } else { (-1.0 / (t * t)).exp() };
        let mut got: Vec<f64> = b.paths.iter().map(|p| p[k][0]).collect();
        got.sort_by(f64::total_cmp);
        worst = worst.max((got[0] + e).abs()).max((got[1] - e).abs());
    }
    let rep = eigenvector_discontinuity_report(&b, &DetectorConfig::default());
    let near_zero = rep.steps.iter().filter(|s| s.t0.abs() <= 0.25 && s.t1.abs() <= 0.25);
    let near_rate = near_zero.clone().map(|s| s.angle_rate).fold(0.0, f64::max);
    let near_flags = near_zero.filter(|s| s.flagged).count();
    let mut lips = vec![b.lipschitz_estimate];
    for count in [801, 1601] {
        let g = uniform_grid(-1.0, 1.0, count).unwrap();
        lips.push(track_eigenvalues(&RellichPair::default(), &g, &set).map_err(|e| e.to_string())?.lipschitz_estimate);
    }
    let spread = lips.iter().cloned().fold(0.0, f64::max) / lips.iter().cloned().fold(f64::INFINITY, f64::min);
    let msg = format!(
        "eigenvalue error {worst:.1e} (limit 1e-9); near t=0 angle rate {near_rate:.1} vs 10 x Lipschitz {:.2}, {near_flags} flagged; Lipschitz over 401/801/1601 points {:.4}/{:.4}/{:.4}",
        10.0 * b.lipschitz_estimate, lips[0], lips[1], lips[2]
    );
    let bounded = lips.iter().all(|&l| l.is_finite() && l <= 1.0) && spread <= 1.1;
    if worst <= 1e-9 && near_rate > 10.0 * b.lipschitz_estimate && near_flags > 0 && bounded { Ok(msg) } else { Err(msg) }
}

fn identity_example() -> Outcome {
    let set = Settings::default();
    let id = validate_commuting(&SelfAdjointTuple::new(vec![HermitianMatrix::identity(3); 2]).unwrap(), &set.tol).unwrap();
    let mut r = rng(4);
    let mut accepted = 0;
    for case in 0..50 {
        let delta = random_commuting_tuple(3, &[(-1.0, 1.0), (-1.0, 1.0)], 1000 + case, None).map_err(|e| e.to_string())?;
        accepted += tangency_check(&id, delta.as_tuple(), &set).map_err(|e| e.to_string())?.tangent as usize;
    }
    let mut rejected = 0;
    for _ in 0..50 {
        let delta = SelfAdjointTuple::new(vec![random_hermitian(3, &mut r), random_hermitian(3, &mut r)]).unwrap();
        rejected += (!tangency_check(&id, &delta, &set).map_err(|e| e.to_string())?.tangent) as usize;
    }
    let msg = format!("commuting directions accepted {accepted}/50, non-commuting rejected {rejected}/50");
    if accepted == 50 && rejected == 50 { Ok(msg) } else { Err(msg) }
}

fn census() -> Outcome {
    let set = Settings::default();
    let opts = MonotoneOptions { n: 4, samples: 500, seed: 1 };
    let mut lines = Vec::new();
    let mut ok = true;
    for (text, want) in [
        ("x", Verdict::CertifiedPositive),
        ("-1/x", Verdict::CertifiedPositive),
        ("sqrt(x)", Verdict::CertifiedPositive),
        ("x^2", Verdict::Refuted),
        ("x^3", Verdict::Refuted),
    ] {
        let f = parse_function(text, 1, &[]).unwrap();
        let cert = check_local_monotone(&f, &opts, &set).map_err(|e| e.to_string())?;
        ok &= cert.verdict == want;
        lines.push(format!("{text}: {:?}", cert.verdict));
    }
    let mut agree = 0;
    let mut disagreements = Vec::new();
    let mut counts = [0usize; 2];
    for text in ["x^2+y^2", "x^3", "exp(x)*cos(y)"] {
        let f = parse_function(text, 2, &[]).unwrap();
        for seed in 0..20 {
            let (a, b) = random_commuting_segment(3, &[(-1.0, 1.0), (-1.0, 1.0)], 1100 + seed).map_err(|e| e.to_string())?;
            let c = check_convex_segment(&f, &a, &b, 11, &set).map_err(|e| e.to_string())?;
            let chord = c.chord.as_ref().map(|ch| ch.verdict);
            if c.verdict != Verdict::Inconclusive && chord == Some(c.verdict) {
                agree += 1;
            } else {
                disagreements.push(format!("{text} seed {}: {:?} min eig {:.2e}, chord {:?} min eig {:.2e}", 1100 + seed, c.verdict, c.min_eigenvalue_observed, chord, c.chord.as_ref().map_or(f64::NAN, |ch| ch.min_eigenvalue)));
            }
            counts[(c.verdict == Verdict::Refuted) as usize] += 1;
        }
    }
    ok &= agree == 60;
    let msg = format!(
        "monotone [{}]; convexity agrees with chord oracle on {agree}/60 segments ({} certified, {} refuted){}",
        lines.join(", "),
        counts[0],
        counts[1],
        if disagreements.is_empty() { String::new() } else { format!("; disagreements: {}", disagreements.join("; ")) }
    );
    if ok { Ok(msg) } else { Err(msg) }
}

fn cli_once(args: &[String]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("commute-calc".to_string()).chain(args.iter().cloned());
    let code = run(argv, &mut out, &mut err);
    (code, out)
}

fn determinism_and_round_trip() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let set = Settings::default();
    let base = random_commuting_tuple(4, &[(-1.0, 1.0), (-1.0, 1.0)], 5, Some(&[2, 1, 1])).unwrap();
    let delta = random_tangent_direction(&base, 6, false, &set).unwrap();
    let tuple_text = to_json(&TupleJson::from_tuple(base.as_tuple()));
    std::fs::write(path("base.json"), &tuple_text).unwrap();
    std::fs::write(path("dir.json"), to_json(&TupleJson::from_tuple(&delta))).unwrap();
    let tuple_back: TupleJson = from_json(&tuple_text).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    if tuple_back.to_tuple().unwrap() != *base.as_tuple() {
        failures.push("tuple JSON".to_string());
    }
    let curve = CurveSpec::Witness { base: TupleJson::from_tuple(base.as_tuple()), dir: TupleJson::from_tuple(&delta) };
    std::fs::write(path("curve.json"), to_json(&curve)).unwrap();

    let commands: Vec<Vec<String>> = [
        vec!["diag", "--in", &path("base.json"), "--seed", "7"],
        vec!["eval", "--f", "exp(x)*cos(y)", "--in", &path("base.json")],
        vec!["tangent", "--base", &path("base.json"), "--dir", &path("dir.json")],
        vec!["dfirst", "--f", "x^2*y", "--base", &path("base.json"), "--dir", &path("dir.json"), "--check-fd", "1e-4"],
        vec!["dhigh", "--f", "exp(x)*cos(y)", "--curve", &path("curve.json"), "--t", "0.25", "--order", "2", "--check", "both"],
        vec!["track", "--curve", &path("curve.json"), "--grid", "-1:1:41"],
        vec!["demo", "rellich"],
        vec!["monotone", "--f", "x^3", "--n", "4", "--d", "2", "--samples", "200", "--seed", "1"],
    ]
    .iter()
    .map(|v| v.iter().map(|s| s.to_string()).collect())
    .collect();
    for cmd in &commands {
        let (c1, o1) = cli_once(cmd);
        let (c2, o2) = cli_once(cmd);
        if c1 != 0 || c2 != 0 || o1 != o2 {
            failures.push(format!("{} not deterministic (exit {c1}/{c2})", cmd[0]));
            continue;
        }
        let text = String::from_utf8(o1).unwrap();
        let exact = match cmd[0].as_str() {
            "diag" => from_json::<DiagJson>(&text).map(|v| to_json(&v) == text),
            "eval" => from_json::<MatrixJson>(&text).map(|v| to_json(&v) == text),
            "monotone" => from_json::<Certificate>(&text).map(|v| to_json(&v) == text),
            "track" | "demo" => Ok(text.lines().skip(1).flat_map(|l| l.split(',')).all(|f| f.parse::<f64>().is_ok_and(|v| format_number(v) == f))),
            _ => from_json::<serde_json::Value>(&text).map(|_| true),
        };
        if !exact.unwrap_or(false) {
            failures.push(format!("{} output does not round-trip", cmd[0]));
        }
    }
    let msg = format!("{} commands run twice, byte-identical and round-tripping; failures: {failures:?}", commands.len());
    if failures.is_empty() { Ok(msg) } else { Err(msg) }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("spectral evaluation matches direct polynomial evaluation", spectral_vs_polynomial),
        ("tangency check and witness curves", tangency_round_trip),
        ("first derivative: closed form, entrywise form, finite differences", first_derivative_triangle),
        ("first derivative norm bound", derivative_bound_holds),
        ("higher derivatives: divided differences, contour, finite differences", higher_route_triangle),
        ("divided differences against contour integrals", divided_differences_vs_contour),
        ("eigenvalue tracking on the smooth curve without continuous eigenvectors", rellich_fixture),
        ("tangent directions at the identity", identity_example),
        ("monotonicity and convexity census", census),
        ("CLI determinism and round trips", determinism_and_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(m) => println!("PASS {:>2} {name}: {m} [{secs:.1}s]", i + 1),
            Err(m) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {m} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
