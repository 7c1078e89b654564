//! Acceptance gate: one line per criterion (and per sub-check), then a
//! summary. Exits nonzero iff a gating check fails.
//!
//! Two statements in the source material are refuted by computation and are
//! run literally, reported `[FAIL]`, and paired with a corrected check:
//! the vertices of the cubic spinal sphere are `(0, ±1, 0)`, not `(±1, 0, 0)`,
//! and the displayed closed-form curvature has the wrong sign for `y < 0`.
//! These literal checks do not gate the exit status.

use heisbis::bisector::{bisector_field, equidistance_defect, sample_bisector, Aabb};
use heisbis::boundary::{bergman_distance, BoundaryPoint, SiegelPoint};
use heisbis::curvature::{
    characteristic_locus_s1, characteristic_scan, definitional_curvature, horizontal_jet, mean_curvature, plane_field,
    s1_curvature, s1_curvature_oriented, s1_field, s1_height,
};
use heisbis::heis::HeisPoint;
use heisbis::poly::Monomial;
use heisbis::spinal::{fit_spinal, vertex_pair_distance, SpinalSphere};
use heisbis::verify::{coefficient_error, cubic_terms, random_cubic, run_verify, Suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::Instant;

const SEED: u64 = 20_240_601;

#[derive(Default)]
struct Gate {
    lines: Vec<String>,
    gating_failures: usize,
    literal_failures: usize,
}

impl Gate {
    fn check(&mut self, id: &str, label: &str, passed: bool, detail: String) {
        self.emit(id, label, passed, detail, true);
    }

    /// A literal sub-check whose statement is refuted; reported, not gating.
    fn literal(&mut self, id: &str, label: &str, passed: bool, detail: String) {
        self.emit(id, label, passed, detail, false);
    }

    fn emit(&mut self, id: &str, label: &str, passed: bool, detail: String, gating: bool) {
        let tag = if passed { "PASS" } else { "FAIL" };
        let kind = if gating { "" } else { " (literal)" };
        let line = format!("[{tag}] {id}{kind} {label}: {detail}");
        println!("{line}");
        self.lines.push(line);
        if !passed {
            if gating {
                self.gating_failures += 1;
            } else {
                self.literal_failures += 1;
            }
        }
    }
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() || v.abs() > m { v.abs() } else { m })
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn c01_metric(g: &mut Gate) {
    let t = Instant::now();
    let r = run_verify(Suite::Metric, SEED, 10_000).expect("metric suite");
    let el = secs(t);
    let get = |n: &str| r.check(n).expect("check present");
    let sym = get("symmetry");
    let tri = get("triangle_inequality");
    let inv = get("left_invariance");
    let dil = get("dilation_scaling");
    g.check(
        "C1",
        "metric axioms on 1e4 triples, gauge radius 10",
        sym.max_error == 0.0 && tri.max_error <= 1e-12 && inv.max_error <= 1e-10 && dil.max_error <= 1e-10 && el < 5.0,
        format!(
            "symmetry {:e}, triangle deficit {:e}, invariance {:e}, scaling {:e}, {el:.2}s",
            sym.max_error, tri.max_error, inv.max_error, dil.max_error
        ),
    );
}

fn c02_vertical(g: &mut Gate) {
    let f = bisector_field(&HeisPoint::new(0.0, 0.0, -1.0), &HeisPoint::new(0.0, 0.0, 1.0)).expect("field");
    let others = max_abs(f.coefficients().into_iter().filter(|(m, _)| *m != Monomial([0, 0, 1])).map(|(_, c)| c));
    let t = f.coefficient(Monomial([0, 0, 1]));
    g.check(
        "C2",
        "vertical bisector is {t = 0}",
        t.abs() == 1.0 && others <= 1e-12,
        format!("t coefficient {t}, others max {others:e}"),
    );
}

fn c03_planar(g: &mut Gate) {
    let f = bisector_field(&HeisPoint::new(-1.0, 0.0, 0.0), &HeisPoint::new(1.0, 0.0, 0.0)).expect("field");
    let err = coefficient_error(&f, &cubic_terms()).min(coefficient_error(
        &f,
        &cubic_terms().map(|(m, c)| (m, -c)),
    ));
    g.check("C3", "planar bisector is x(x²+y²+1) − yt", err <= 1e-12, format!("max coefficient error {err:e}"));
}

fn c04_theorem(g: &mut Gate) {
    let t = Instant::now();
    let (v1, v2) = (HeisPoint::new(0.0, 0.0, -1.0), HeisPoint::new(0.0, 0.0, 1.0));
    let (h1, h2) = (HeisPoint::new(-1.0, 0.0, 0.0), HeisPoint::new(1.0, 0.0, 0.0));
    let region = Aabb::cube(3.0);
    let n = 10_000;
    let vertical = sample_bisector(&v1, &v2, &region, n, SEED).expect("samples");
    let planar = sample_bisector(&h1, &h2, &region, n, SEED + 1).expect("samples");

    let residual = |s: &SpinalSphere, pts: &[HeisPoint]| {
        max_abs(pts.iter().map(|p| s.residual(&BoundaryPoint::Finite(*p)).unwrap_or(f64::NAN)))
    };
    let s0 = SpinalSphere::from_vertices(BoundaryPoint::ORIGIN, BoundaryPoint::Infinity).expect("sphere");
    let literal = SpinalSphere::from_vertices(h1.into(), h2.into()).expect("sphere");
    let corrected =
        SpinalSphere::from_vertices(HeisPoint::new(0.0, -1.0, 0.0).into(), HeisPoint::new(0.0, 1.0, 0.0).into())
            .expect("sphere");
    let r_vertical = residual(&s0, &vertical);
    let r_literal = residual(&literal, &planar);
    let r_corrected = residual(&corrected, &planar);

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let plane: Vec<HeisPoint> =
        (0..n).map(|_| HeisPoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0)).collect();
    let cubic = corrected.sample_in(&region, n, SEED + 3).expect("sphere samples");
    let d0 = max_abs(plane.iter().map(|p| equidistance_defect(&v1, &v2, p)));
    let d1 = max_abs(cubic.iter().map(|p| equidistance_defect(&h1, &h2, p)));
    let el = secs(t);

    g.check(
        "C4a",
        "vertical bisector samples on sphere (o, ∞)",
        r_vertical <= 1e-8,
        format!("max residual {r_vertical:e} over {} samples", vertical.len()),
    );
    g.literal(
        "C4b",
        "planar bisector samples on sphere with vertices (±1, 0, 0)",
        r_literal <= 1e-8,
        format!("max residual {r_literal:e}; that sphere is not the planar bisector"),
    );
    g.check(
        "C4c",
        "planar bisector samples on sphere with vertices (0, ±1, 0)",
        r_corrected <= 1e-8,
        format!("max residual {r_corrected:e} over {} samples", planar.len()),
    );
    g.check(
        "C4d",
        "samples of both spheres are Korányi-equidistant",
        d0 <= 1e-8 && d1 <= 1e-8 && el < 30.0,
        format!("plane defect {d0:e}, cubic sphere defect {d1:e}, {el:.2}s"),
    );
}

fn c05_bergman(g: &mut Gate) {
    let rho = bergman_distance(&SiegelPoint::new((-1.0).into(), 0.0.into()), &SiegelPoint::new((-2.0).into(), 0.0.into()))
        .expect("interior points");
    // ⟨z, w⟩ = z₁ w̄₃ + z₂ w̄₂ + z₃ w̄₁ on the lifts (z₁, z₂, 1)
    let pair = |a: (f64, f64), b: (f64, f64)| a.0 + b.0 + a.1 * b.1;
    let (z, w) = ((-1.0, 0.0), (-2.0, 0.0));
    let ratio = pair(z, w).powi(2) / (pair(z, z) * pair(w, w));
    let brute = 2.0 * ratio.sqrt().acosh();
    g.check(
        "C5",
        "Bergman distance of (−1,0), (−2,0) is ln 2",
        (rho - 2f64.ln()).abs() <= 1e-12 && (rho - brute).abs() <= 1e-12,
        format!("rho {rho}, |rho − ln 2| {:e}, brute force {brute}", (rho - 2f64.ln()).abs()),
    );
}

fn c06_plane(g: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let plane = plane_field();
    let mut worst = 0.0f64;
    let mut k = 0;
    while k < 10_000 {
        let p = HeisPoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0);
        if p.x.hypot(p.y) <= 1e-3 {
            continue;
        }
        worst = worst.max(mean_curvature(&plane, &p).map_or(f64::NAN, f64::abs));
        k += 1;
    }
    let scan = characteristic_scan(&plane, &Aabb::cube(1.0), 201, 1e-12);
    g.check(
        "C6",
        "plane is horizontally minimal, characteristic locus is the origin",
        worst <= 1e-9 && scan == vec![HeisPoint::ORIGIN],
        format!("max |H| {worst:e}; 201³ scan found {:?}", scan.iter().map(|p| p.to_array()).collect::<Vec<_>>()),
    );
}

fn c07_cubic_curvature(g: &mut Gate) {
    let s1 = s1_field();
    let h = mean_curvature(&s1, &HeisPoint::new(1.0, 1.0, 3.0)).expect("non-characteristic");
    let expected = 3.0 / 10f64.sqrt();
    g.check("C7a", "curvature at (1,1,3) is 3/√10", (h - expected).abs() <= 1e-10, format!("{h} vs {expected}"));

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let mut literal = 0.0f64;
    let mut upper = 0.0f64;
    let mut oriented = 0.0f64;
    let mut k = 0;
    while k < 10_000 {
        let (x, y): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if y == 0.0 || x == 0.0 {
            continue;
        }
        k += 1;
        let h = mean_curvature(&s1, &HeisPoint::new(x, y, s1_height(x, y))).unwrap_or(f64::NAN);
        // the displayed closed form, typed independently of the library
        let a = 3.0 * x * x - y * y + 1.0;
        let b = 3.0 * y * y - x * x - 1.0;
        let displayed = 3.0 * x * y / (y * y * a * a + x * x * b * b).sqrt();
        let lib = s1_curvature(x, y).unwrap_or(f64::NAN);
        assert!((lib - displayed).abs() <= 1e-15 * displayed.abs().max(1.0));
        let rel = (h - displayed).abs() / displayed.abs();
        literal = literal.max(rel);
        if y > 0.0 {
            upper = upper.max(rel);
        }
        let o = s1_curvature_oriented(x, y).unwrap_or(f64::NAN);
        oriented = oriented.max((h - o).abs() / o.abs());
    }
    g.literal(
        "C7b",
        "closed form 3xy/√(…) matches the curvature at 1e4 surface points",
        literal <= 1e-8,
        format!("max relative error {literal:e}; sign is reversed for y < 0"),
    );
    g.check(
        "C7c",
        "closed form matches for y > 0 and 3x|y|/√(…) matches everywhere",
        upper <= 1e-8 && oriented <= 1e-8,
        format!("y > 0: {upper:e}; oriented: {oriented:e}"),
    );

    let locus = characteristic_locus_s1();
    let ok = locus.len() == 2
        && locus.contains(&HeisPoint::new(0.0, 1.0, 0.0))
        && locus.contains(&HeisPoint::new(0.0, -1.0, 0.0));
    g.check(
        "C7d",
        "characteristic locus is {(0,±1,0)}",
        ok,
        format!("{:?}", locus.iter().map(|p| p.to_array()).collect::<Vec<_>>()),
    );
}

fn c08_limits(g: &mut Gate) {
    let along: Vec<f64> = (1..=20).map(|k| s1_curvature(0.5f64.powi(k), 1.0).expect("off the locus")).collect();
    let last = along[19];
    let monotone = along.windows(2).all(|w| w[1] >= w[0]);
    let far = s1_curvature(10.0, 10.0).expect("off the locus");
    g.check(
        "C8a",
        "curvature along y = 1 tends to 3/2, decays at (10,10)",
        (last - 1.5).abs() <= 1e-4 && (far - 0.106066).abs() <= 1e-5,
        format!("H(2^-20, 1) = {last}, monotone {monotone}, H(10,10) = {far}"),
    );
    let axis = max_abs((0..100).map(|k| s1_curvature(0.0, -4.95 + 0.1 * k as f64).unwrap_or(f64::NAN)));
    println!(
        "[INFO] C8b divergence near the characteristic points is not asserted: limit along y = 1 is {last:.6}, \
         along x = 0 the curvature is {axis} (no two-sided limit, bounded)"
    );
}

fn c09_two_routes(g: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 9);
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..10 {
        let f = random_cubic(&mut rng);
        let mut k = 0;
        while k < 100 {
            let p = Aabb::cube(2.0).sample(&mut rng);
            if horizontal_jet(&f, &p).gradient_norm() < 0.1 {
                continue;
            }
            k += 1;
            let (a, b) = (mean_curvature(&f, &p), definitional_curvature(&f, &p));
            worst = worst.max(match (a, b) {
                (Ok(a), Ok(b)) => (a - b).abs(),
                _ => f64::NAN,
            });
            count += 1;
        }
    }
    g.check(
        "C9",
        "divergence of the unit normal agrees with the closed expression",
        worst <= 1e-5,
        format!("max difference {worst:e} over {count} points of 10 random cubic fields"),
    );
}

fn c10_fit(g: &mut Gate) {
    let t = Instant::now();
    let s1 = SpinalSphere::s1();
    let samples = s1.sample_in(&Aabb::cube(3.0), 1000, SEED + 10).expect("samples");
    let fit1 = fit_spinal(&samples, None);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 11);
    let plane: Vec<HeisPoint> =
        (0..1000).map(|_| HeisPoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0)).collect();
    let fit0 = fit_spinal(&plane, None);
    let el = secs(t);

    let (Ok((_, r1)), Ok((_, r0))) = (&fit1, &fit0) else {
        g.check("C10", "spinal fit round trip", false, format!("fit failed: {:?} / {:?}", fit1.err(), fit0.err()));
        return;
    };
    let literal = vertex_pair_distance(&r1.vertices, &[HeisPoint::new(-1.0, 0.0, 0.0).into(), HeisPoint::new(1.0, 0.0, 0.0).into()]);
    let corrected =
        vertex_pair_distance(&r1.vertices, &[HeisPoint::new(0.0, -1.0, 0.0).into(), HeisPoint::new(0.0, 1.0, 0.0).into()]);
    let plane_dist = vertex_pair_distance(&r0.vertices, &[BoundaryPoint::ORIGIN, BoundaryPoint::Infinity]);
    g.literal(
        "C10a",
        "vertices fitted to the cubic sphere are (±1, 0, 0)",
        literal <= 1e-6,
        format!("distance {literal:e}"),
    );
    g.check(
        "C10b",
        "vertices fitted to the cubic sphere are (0, ±1, 0)",
        corrected <= 1e-6 && r1.rms <= 1e-8,
        format!("distance {corrected:e}, rms {:e}", r1.rms),
    );
    g.check(
        "C10c",
        "vertices fitted to {t = 0} are (o, ∞)",
        plane_dist <= 1e-6 && r0.rms <= 1e-8 && el < 60.0,
        format!("distance {plane_dist:e}, rms {:e}, {el:.2}s for both fits", r0.rms),
    );
}

fn cli(args: &[&str]) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_heisbis")).args(args).output().expect("run heisbis");
    (out.status.success(), out.stdout)
}

fn c11_c12_cli(g: &mut Gate) {
    let seed = SEED.to_string();
    let generic = ["verify", "--suite", "generic-experiment", "--seed", &seed, "--samples", "1000"];
    let (ok, first) = cli(&generic);
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap_or_default();
    let value = |name: &str| {
        report["checks"]
            .as_array()
            .and_then(|cs| cs.iter().find(|c| c["name"] == name))
            .map(|c| c["max_error"].clone())
            .filter(|v| !v.is_null())
    };
    let (rms, max) = (value("fit_rms_residual"), value("fit_max_residual"));
    g.check(
        "C11",
        "generic-pair experiment runs and reports fit residuals",
        ok && rms.is_some() && max.is_some(),
        format!("rms {}, max {}", rms.unwrap_or_default(), max.unwrap_or_default()),
    );

    let mut runs: Vec<(String, Vec<String>)> = vec![(
        "generic-experiment".into(),
        generic.iter().map(|s| s.to_string()).collect(),
    )];
    for suite in ["metric", "similarity", "theorem", "curvature"] {
        runs.push((suite.into(), ["verify", "--suite", suite, "--seed", &seed, "--samples", "10000"].map(String::from).to_vec()));
    }
    for fmt in ["obj", "ply"] {
        runs.push((
            format!("mesh {fmt}"),
            ["bisector", "--p1", "-1,0,0", "--p2", "1,0,0", "--emit", "mesh", "--format", fmt].map(String::from).to_vec(),
        ));
    }
    let mut differing = Vec::new();
    for (name, args) in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = if name == "generic-experiment" { first.clone() } else { cli(&args).1 };
        let b = cli(&args).1;
        if a != b || a.is_empty() {
            differing.push(name.clone());
        }
    }
    g.check(
        "C12",
        "repeated CLI runs are byte-identical",
        differing.is_empty(),
        format!("{} commands compared, differing: {differing:?}", runs.len()),
    );
}

fn main() {
    let mut g = Gate::default();
    c01_metric(&mut g);
    c02_vertical(&mut g);
    c03_planar(&mut g);
    c04_theorem(&mut g);
    c05_bergman(&mut g);
    c06_plane(&mut g);
    c07_cubic_curvature(&mut g);
    c08_limits(&mut g);
    c09_two_routes(&mut g);
    c10_fit(&mut g);
    c11_c12_cli(&mut g);
    println!(
        "acceptance: {} checks, {} gating failures, {} literal failures",
        g.lines.len(),
        g.gating_failures,
        g.literal_failures
    );
    if g.gating_failures > 0 {
        std::process::exit(1);
    }
}
