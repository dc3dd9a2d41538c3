//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use per3_core::classify::scan::{find_capture_parameters, ScanConfig};
use per3_core::classify::{
    sierpinski_verdict, triple_contact_test, ClassificationReport, ClassifyConfig, HyperbolicType, Verdict,
};
use per3_core::doubling::{cycles_of_period, mixed_check, Angle};
use per3_core::orbit::Stability;
use per3_core::params::{
    center_conjugacy, center_residual, conjugate_polynomial_constant, parabolic_parameters, polynomial_centers,
    special_parameters, SpecialParameters,
};
use per3_core::periodic::{fixed_points, periodic_cycles};
use per3_core::render::{parameter_fate, parameter_fates, render_parameter, ParameterFate, RenderConfig, SLICE_WINDOW};
use per3_core::{chordal_distance, mobius_conjugate, per3_map, Complex, Per3Parameter, RationalMap, SpherePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn close(x: Complex, y: Complex, tol: f64) -> bool {
    (x - y).norm() <= tol
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn param(a: Complex) -> Per3Parameter {
    Per3Parameter::new(a).expect("admissible parameter")
}

fn centers() -> Outcome {
    let [a1, a2, a3] = polynomial_centers();
    check(close(a1, c(2.32472, 0.0), 1e-4), format!("a1 = {a1}"))?;
    check(close(a2, c(0.33764, 0.56228), 1e-4), format!("a2 = {a2}"))?;
    check(close(a3, c(0.33764, -0.56228), 1e-4), format!("a3 = {a3}"))?;
    let worst = [a1, a2, a3].iter().map(|&a| center_residual(a)).fold(0.0, f64::max);
    check(worst < 1e-12, format!("residual {worst:e}"))?;
    Ok(format!("a1 = {a1:.6}, a2 = {a2:.6}, residual {worst:.1e}"))
}

/// Real root of `c^3 + 2c^2 + c + 1` by bisection on [-2, -1].
fn cubic_oracle() -> f64 {
    let g = |x: f64| ((x + 2.0) * x + 1.0) * x + 1.0;
    let (mut lo, mut hi) = (-2.0, -1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn conjugate_constants() -> Outcome {
    let [a1, a2, a3] = polynomial_centers();
    let (c1, c2, c3) = (
        conjugate_polynomial_constant(a1),
        conjugate_polynomial_constant(a2),
        conjugate_polynomial_constant(a3),
    );
    check(close(c2, c(-0.122561, 0.744861), 1e-4), format!("c(a2) = {c2}"))?;
    check(close(c3, c2.conj(), 1e-4), format!("c(a3) = {c3}"))?;
    check(close(c1, c(-1.75488, 0.0), 1e-4), format!("c(a1) = {c1}"))?;
    let oracle = cubic_oracle();
    check(
        close(c1, c(oracle, 0.0), 1e-9),
        format!("c(a1) = {c1}, oracle {oracle}"),
    )?;
    let mut worst: f64 = 0.0;
    for a in [a1, a2, a3] {
        let g = mobius_conjugate(&per3_map(param(a)), &center_conjugacy(a)).map_err(|e| e.to_string())?;
        let d = g.coefficient_distance(&RationalMap::quadratic(conjugate_polynomial_constant(a)));
        worst = worst.max(d);
    }
    check(worst < 1e-6, format!("conjugated coefficients off by {worst:e}"))?;
    Ok(format!(
        "c(a1) = {:.9} (oracle {oracle:.9}), c(a2) = {c2:.6}, conjugacy error {worst:.1e}",
        c1.re
    ))
}

fn parabolics() -> Outcome {
    let omega = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut all: Vec<(Complex, bool)> = Vec::new();
    for lambda in [omega, omega.conj()] {
        for p in parabolic_parameters(lambda).map_err(|e| e.to_string())? {
            if !all.iter().any(|(q, _)| close(*q, p.a, 1e-6)) {
                all.push((p.a, p.excluded));
            }
        }
    }
    let expected = [
        (c(0.0, 0.0), true),
        (c(1.84445, 0.893455), false),
        (c(1.84445, -0.893455), false),
        (c(0.441264, 0.59116), false),
        (c(0.441264, -0.59116), false),
    ];
    check(all.len() == 5, format!("{} distinct values: {all:?}", all.len()))?;
    for (e, flagged) in expected {
        let hit = all.iter().find(|(q, _)| close(*q, e, 1e-4));
        check(
            hit.is_some_and(|h| h.1 == flagged),
            format!("{e} missing or wrongly flagged"),
        )?;
    }
    Ok("0 (flagged), 1.84445±0.893455i, 0.441264±0.59116i".into())
}

fn doubling() -> Outcome {
    let report = mixed_check(10);
    check(
        report.all_mixed && report.exceptions.is_empty(),
        format!("exceptions {:?}", report.exceptions),
    )?;
    check(report.pairs_tested == 24753, format!("{} pairs", report.pairs_tested))?;
    let two = cycles_of_period(2);
    let third = |n| Angle::new(n, 3).unwrap();
    check(
        two.len() == 1 && two[0].angles == vec![third(1), third(2)],
        format!("period-2 cycles {two:?}"),
    )?;
    Ok(format!(
        "{} cycles, {} pairs, all mixed; unique period-2 cycle {{1/3, 2/3}}",
        report.cycles, report.pairs_tested
    ))
}

fn triple_phases(a: Complex) -> Result<Vec<usize>, String> {
    let f = per3_map(param(a));
    let fixed = fixed_points(&f).map_err(|e| e.to_string())?;
    Ok(fixed
        .iter()
        .filter(|q| q.stability == Stability::Repelling)
        .map(|q| triple_contact_test(&f, q.location).phases_seen.len())
        .collect())
}

fn dichotomy() -> Outcome {
    let [a1, a2, _] = polynomial_centers();
    let rabbit = triple_phases(a2)?;
    let airplane = triple_phases(a1)?;
    check(rabbit.contains(&3), format!("rabbit phase counts {rabbit:?}"))?;
    check(!airplane.contains(&3), format!("airplane phase counts {airplane:?}"))?;
    Ok(format!(
        "phases per repelling fixed point: rabbit {rabbit:?}, airplane {airplane:?}"
    ))
}

fn verdicts() -> Outcome {
    let [a1, a2, _] = polynomial_centers();
    let r = sierpinski_verdict(param(c(1.0, 0.0)));
    check(
        r.verdict == Verdict::NotSierpinski && r.reason.starts_with("C(a)"),
        format!("a = 1: {}", r.reason),
    )?;
    let r = sierpinski_verdict(param(a2));
    check(
        r.verdict == Verdict::NotSierpinski && r.reason.starts_with("C(b)"),
        format!("a2: {}", r.reason),
    )?;
    let r = sierpinski_verdict(param(a1));
    let superattracting = r
        .second_cycle
        .as_ref()
        .is_some_and(|cy| cy.period == 1 && cy.multiplier.norm() < 1e-6);
    check(
        r.verdict == Verdict::NotSierpinski && superattracting,
        format!("a1: {:?}", r.second_cycle),
    )?;
    let scan =
        find_capture_parameters(&ScanConfig::default(), &ClassifyConfig::default(), 1).map_err(|e| e.to_string())?;
    let Some(&(a, _)) = scan.found.first() else {
        return Err(format!("no capture parameter among {} checked", scan.checked));
    };
    let r = sierpinski_verdict(param(a));
    check(
        r.hyperbolic_type == HyperbolicType::Capture
            && r.verdict == Verdict::Sierpinski
            && r.reason.starts_with("C(c)"),
        format!("scan found {a}: {} / {}", r.verdict, r.reason),
    )?;
    Ok(format!(
        "C(a) at 1, C(b) at a2, fixed point at a1; scan: {} candidates, capture {a:.4} -> Sierpinski",
        scan.candidates
    ))
}

fn random_parameter(rng: &mut ChaCha8Rng) -> Complex {
    loop {
        let a = c(rng.gen_range(-1.0..3.5), rng.gen_range(-2.0..2.0));
        if Per3Parameter::new(a).is_ok() {
            return a;
        }
    }
}

fn periodic_counts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_parameter(&mut rng);
        let f = per3_map(param(a));
        let fixed = fixed_points(&f).map_err(|e| format!("{a}: {e}"))?;
        let total: usize = fixed.iter().map(|q| q.multiplicity).sum();
        check(total == 3, format!("{a}: multiplicities add to {total}"))?;
        worst = fixed.iter().map(|q| q.residual).fold(worst, f64::max);
        check(worst < 1e-9, format!("{a}: fixed point residual {worst:e}"))?;
        let cycles = periodic_cycles(&f, 3).map_err(|e| format!("{a}: {e}"))?;
        check(cycles.len() <= 2, format!("{a}: {} three-cycles", cycles.len()))?;
        let critical = cycles.iter().any(|pc| {
            let pts = &pc.cycle.points;
            [SpherePoint::ZERO, SpherePoint::Infinity, SpherePoint::ONE]
                .iter()
                .all(|t| pts.iter().any(|p| chordal_distance(*p, *t) < 1e-8))
                && pc.cycle.multiplier.norm() < 1e-8
        });
        check(critical, format!("{a}: critical cycle missing"))?;
    }
    Ok(format!("20 parameters, worst fixed-point residual {worst:.1e}"))
}

/// Every point of `xs` has its conjugate in `ys`, and conversely.
fn mirrored(xs: &[SpherePoint], ys: &[SpherePoint], tol: f64) -> bool {
    xs.len() == ys.len()
        && xs
            .iter()
            .all(|x| ys.iter().any(|y| chordal_distance(x.conj(), *y) <= tol))
        && ys
            .iter()
            .all(|y| xs.iter().any(|x| chordal_distance(x.conj(), *y) <= tol))
}

fn mirrored_reports(r: &ClassificationReport, s: &ClassificationReport) -> Result<(), String> {
    let a = r.a;
    check(r.hyperbolic_type == s.hyperbolic_type, format!("{a}: types differ"))?;
    check(
        r.region.conj() == s.region,
        format!("{a}: regions {} and {}", r.region, s.region),
    )?;
    // reasons may quote locations, which are compared below
    let label = |x: &str| x.split(':').next().unwrap_or_default().to_string();
    check(
        r.verdict == s.verdict && label(&r.reason) == label(&s.reason),
        format!("{a}: verdicts differ: {} / {}", r.reason, s.reason),
    )?;
    match (&r.second_cycle, &s.second_cycle) {
        (None, None) => {}
        (Some(x), Some(y)) => {
            check(
                mirrored(&x.points, &y.points, 1e-8) && close(x.multiplier.conj(), y.multiplier, 1e-8),
                format!("{a}: second cycles not mirrored"),
            )?;
        }
        _ => return Err(format!("{a}: second cycle on one side only")),
    }
    check(
        r.evidence.len() == s.evidence.len(),
        format!("{a}: evidence counts differ"),
    )?;
    // a point is tested once per target cycle, and the confirmation kind
    // tells the targets apart
    for e in &r.evidence {
        let twin = s
            .evidence
            .iter()
            .find(|t| t.confirmation == e.confirmation && chordal_distance(e.point.conj(), t.point) <= 1e-8)
            .ok_or(format!("{a}: no mirrored evidence for {}", e.point))?;
        check(
            twin.phases_seen == e.phases_seen && twin.sampled == e.sampled && twin.low_confidence == e.low_confidence,
            format!("{a}: phases at {} differ", e.point),
        )?;
    }
    Ok(())
}

fn special_mirror(sp: &SpecialParameters) -> f64 {
    let m = sp.conj();
    let pairs = [
        (sp.airplane_a, m.airplane_a),
        (sp.rabbit_a, m.rabbit_a),
        (sp.corabbit_a, m.corabbit_a),
        (sp.cut_x, m.cut_x),
        (sp.cut_xbar, m.cut_xbar),
        (sp.bif_delta2, m.bif_delta2),
        (sp.bif_delta3, m.bif_delta3),
        (sp.zero, m.zero),
    ];
    pairs.iter().map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut kinds = std::collections::BTreeMap::new();
    for _ in 0..500 {
        let a = random_parameter(&mut rng);
        let r = sierpinski_verdict(param(a));
        let s = sierpinski_verdict(param(a.conj()));
        mirrored_reports(&r, &s)?;
        *kinds.entry(r.region.to_string()).or_insert(0usize) += 1;
        let (fa, fb) = (parameter_fate(a, 2000), parameter_fate(a.conj(), 2000));
        check(fa == fb, format!("{a}: pixel fates {fa:?} and {fb:?}"))?;
    }
    // the raster of the slice window is mirror-symmetric row by row
    let cfg = RenderConfig::new(SLICE_WINDOW, 180, 160);
    let fates = parameter_fates(&cfg).map_err(|e| e.to_string())?;
    let (w, h) = (cfg.pixels_x, cfg.pixels_y);
    let rows = (0..h).all(|y| fates[y * w..(y + 1) * w] == fates[(h - 1 - y) * w..(h - y) * w]);
    check(rows, "parameter raster is not mirror-symmetric")?;
    let sp = special_parameters().map_err(|e| e.to_string())?;
    let d = special_mirror(&sp);
    check(d < 1e-8, format!("special parameters off by {d:e} under conjugation"))?;
    Ok(format!(
        "500 parameters mirrored, regions {kinds:?}; raster and special parameters symmetric"
    ))
}

fn render() -> Outcome {
    let mut cfg = RenderConfig::new(SLICE_WINDOW, 800, 800);
    cfg.threads = Some(1);
    let one = render_parameter(&cfg).map_err(|e| e.to_string())?;
    cfg.threads = Some(8);
    let many = render_parameter(&cfg).map_err(|e| e.to_string())?;
    check(one.to_ppm() == many.to_ppm(), "1-thread and 8-thread images differ")?;
    let pal = cfg.palette;
    let at = |a: Complex| cfg.pixel_of(a).map(|(x, y)| one.get(x, y));
    let [_, a2, _] = polynomial_centers();
    let bitransitive = pal.parameter_color(ParameterFate::Critical { entry: 0 });
    let disjoint = pal.parameter_color(ParameterFate::Disjoint { period: 1 });
    check(
        at(c(1.0, 0.0)) == Some(bitransitive),
        format!("pixel at 1 is {:?}", at(c(1.0, 0.0))),
    )?;
    check(at(a2) == Some(disjoint), format!("pixel at a2 is {:?}", at(a2)))?;
    Ok(format!(
        "800x800, {} bytes identical across thread counts",
        one.to_ppm().len()
    ))
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            name: "polynomial centers",
            limit: Some(Duration::from_millis(1)),
            run: centers,
        },
        Criterion {
            name: "conjugate polynomial constants",
            limit: None,
            run: conjugate_constants,
        },
        Criterion {
            name: "parabolic parameters",
            limit: Some(Duration::from_secs(5)),
            run: parabolics,
        },
        Criterion {
            name: "doubling cycles pairwise mixed",
            limit: Some(Duration::from_secs(10)),
            run: doubling,
        },
        Criterion {
            name: "triple contact dichotomy",
            limit: Some(Duration::from_secs(30)),
            run: dichotomy,
        },
        Criterion {
            name: "Sierpinski verdicts and capture scan",
            limit: Some(Duration::from_secs(120)),
            run: verdicts,
        },
        Criterion {
            name: "periodic point counts",
            limit: None,
            run: periodic_counts,
        },
        Criterion {
            name: "conjugation symmetry",
            limit: None,
            run: symmetry,
        },
        Criterion {
            name: "render determinism",
            limit: Some(Duration::from_secs(60)),
            run: render,
        },
    ];
    let mut failed = 0;
    for (i, cr) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = (cr.run)();
        let dt = t.elapsed();
        let outcome = match (outcome, cr.limit) {
            (Ok(_), Some(limit)) if dt > limit => Err(format!("took {dt:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {}: {detail} [{dt:.2?}]", i + 1, cr.name),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {}: {why} [{dt:.2?}]", i + 1, cr.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
