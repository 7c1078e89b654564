//! Seeded invariant suites with JSON reports.

use crate::bisector::{bisector_field, equidistance_defect, sample_bisector, Aabb, CubicField};
use crate::boundary::{bergman_distance, BoundaryPoint, SiegelPoint};
use crate::curvature::{
    characteristic_locus_s1, characteristic_scan, definitional_curvature, horizontal_jet, mean_curvature, plane_field,
    s1_curvature, s1_curvature_oriented, s1_field, s1_height, FiniteDifference, ScalarField,
};
use crate::error::{Error, Result};
use crate::heis::{dist_k, HeisPoint};
use crate::poly::{Monomial, Polynomial};
use crate::similarity::{canonical_pair, classify_pair, normalize_pair, PairClass, Similarity};
use crate::spinal::{fit_spinal_report, vertex_pair_distance, FitOptions, SpinalSphere};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Metric,
    Similarity,
    Theorem,
    Curvature,
    GenericExperiment,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Metric, Suite::Similarity, Suite::Theorem, Suite::Curvature, Suite::GenericExperiment];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Metric => "metric",
            Suite::Similarity => "similarity",
            Suite::Theorem => "theorem",
            Suite::Curvature => "curvature",
            Suite::GenericExperiment => "generic-experiment",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: Option<f64>,
    pub asserted: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Asserted check, passing when `max_error <= tolerance`.
    pub fn bound(name: &str, max_error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_error, tolerance: Some(tolerance), asserted: true, passed: max_error <= tolerance, note: None }
    }

    /// Recorded only; never fails the suite.
    pub fn record(name: &str, value: f64, note: &str) -> Self {
        Self { name: name.into(), max_error: value, tolerance: None, asserted: false, passed: true, note: Some(note.into()) }
    }

    /// Evaluated against a tolerance but not asserted.
    pub fn informational(name: &str, max_error: f64, tolerance: f64, note: &str) -> Self {
        Self { asserted: false, note: Some(note.into()), ..Self::bound(name, max_error, tolerance) }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }
}

pub fn run_verify(suite: Suite, seed: u64, samples: usize) -> Result<Report> {
    let checks = match suite {
        Suite::Metric => metric_suite(seed, samples),
        Suite::Similarity => similarity_suite(seed, samples)?,
        Suite::Theorem => theorem_suite(seed, samples)?,
        Suite::Curvature => curvature_suite(seed, samples)?,
        Suite::GenericExperiment => generic_experiment(seed, samples)?,
    };
    let passed = checks.iter().all(|c| !c.asserted || c.passed);
    Ok(Report { suite, seed, samples, passed, checks })
}

fn max_of<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() || v > m { v } else { m })
}

/// Uniform point of the gauge ball of radius `r`, by rejection from its
/// bounding box.
pub fn sample_gauge_ball<R: Rng>(rng: &mut R, r: f64) -> HeisPoint {
    loop {
        let p = HeisPoint::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r * r..r * r));
        if p.gauge() <= r {
            return p;
        }
    }
}

pub fn random_similarity<R: Rng>(rng: &mut R) -> Similarity {
    Similarity::new(
        sample_gauge_ball(rng, 3.0),
        rng.gen_range(-PI..PI),
        rng.gen_range(0.2..5.0),
        rng.gen(),
    )
    .expect("positive dilation")
}

fn metric_suite(seed: u64, samples: usize) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<([HeisPoint; 4], f64)> =
        (0..samples).map(|_| ([0; 4].map(|_| sample_gauge_ball(&mut rng, 10.0)), rng.gen_range(0.1..10.0))).collect();
    let errs: Vec<[f64; 5]> = cases
        .par_iter()
        .map(|([p, q, r, g], delta)| {
            let d = dist_k(p, q);
            let symmetry = (d - dist_k(q, p)).abs();
            let slack = d + dist_k(q, r) - dist_k(p, r);
            let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b };
            let invariance = rel(dist_k(&g.mul(p), &g.mul(q)), d);
            let dil = |x: &HeisPoint| crate::similarity::dilate(*delta, x);
            let scaling = rel(dist_k(&dil(p), &dil(q)), delta * d);
            [symmetry, (-slack).max(0.0), invariance, scaling, dist_k(p, p)]
        })
        .collect();
    let col = |i: usize| max_of(errs.iter().map(|e| e[i]));
    vec![
        Check::bound("symmetry", col(0), 0.0),
        Check::bound("triangle_inequality", col(1), 1e-12).with_note("max of -(d(p,q)+d(q,r)-d(p,r))"),
        Check::bound("left_invariance", col(2), 1e-10),
        Check::bound("dilation_scaling", col(3), 1e-10),
        Check::bound("identity", col(4), 0.0),
    ]
}

fn similarity_suite(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut equivariance = 0.0f64;
    let mut composition = 0.0f64;
    let mut inversion = 0.0f64;
    for _ in 0..samples {
        let (g, h) = (random_similarity(&mut rng), random_similarity(&mut rng));
        let (p, q) = (sample_gauge_ball(&mut rng, 5.0), sample_gauge_ball(&mut rng, 5.0));
        let d = dist_k(&p, &q);
        if d > 0.0 {
            equivariance = equivariance.max((dist_k(&g.apply(&p), &g.apply(&q)) - g.scale_factor() * d).abs() / (g.scale_factor() * d));
        }
        let scale = 1.0 + p.gauge().powi(2) * g.scale_factor().powi(2) * h.scale_factor().powi(2);
        let a = g.compose(&h).apply(&p).to_array();
        let b = g.apply(&h.apply(&p)).to_array();
        composition = composition.max((0..3).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max) / scale);
        let back = g.invert().apply(&g.apply(&p)).to_array();
        let pa = p.to_array();
        inversion = inversion.max((0..3).map(|i| (back[i] - pa[i]).abs()).fold(0.0, f64::max) / (1.0 + p.gauge().powi(2)));
    }

    let mut normalization = 0.0f64;
    let mut classes_ok = 0.0f64;
    let pairs = samples.min(2000);
    for k in 0..pairs {
        let p1 = sample_gauge_ball(&mut rng, 3.0);
        // vertical, planar and generic pairs in turn
        let p2 = match k % 3 {
            0 => p1.mul(&HeisPoint::new(0.0, 0.0, rng.gen_range(0.5..4.0))),
            1 => p1.mul(&HeisPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.5..2.0), 0.0)),
            _ => sample_gauge_ball(&mut rng, 3.0),
        };
        let class = classify_pair(&p1, &p2)?;
        let expected = match k % 3 {
            0 => matches!(class, PairClass::Vertical),
            1 => matches!(class, PairClass::Planar),
            _ => matches!(class, PairClass::Generic { .. }),
        };
        if !expected {
            classes_ok = 1.0;
        }
        let n = normalize_pair(&p1, &p2)?;
        let (c1, c2) = canonical_pair(&n.class);
        for (src, dst) in [(p1, c1), (p2, c2)] {
            let img = n.similarity.apply(&src).to_array();
            let dst = dst.to_array();
            normalization = normalization.max((0..3).map(|i| (img[i] - dst[i]).abs()).fold(0.0, f64::max));
        }
    }
    Ok(vec![
        Check::bound("metric_equivariance", equivariance, 1e-10),
        Check::bound("composition", composition, 1e-12),
        Check::bound("inversion", inversion, 1e-12),
        Check::bound("pair_classification", classes_ok, 0.0).with_note("1 if any constructed pair was misclassified"),
        Check::bound("normalization_to_canonical_pair", normalization, 1e-9),
    ])
}

/// Largest coefficient of `field` away from `expected` (monomial, value).
pub fn coefficient_error(field: &CubicField, expected: &[(Monomial, f64)]) -> f64 {
    max_of(field.coefficients().into_iter().map(|(m, c)| {
        let e = expected.iter().find(|(k, _)| *k == m).map_or(0.0, |(_, v)| *v);
        (c - e).abs()
    }))
}

pub fn cubic_terms() -> [(Monomial, f64); 4] {
    [
        (Monomial([3, 0, 0]), 1.0),
        (Monomial([1, 2, 0]), 1.0),
        (Monomial([1, 0, 0]), 1.0),
        (Monomial([0, 1, 1]), -1.0),
    ]
}

fn spinal_residuals(sphere: &SpinalSphere, pts: &[HeisPoint]) -> Result<f64> {
    let r: Vec<f64> = pts.par_iter().map(|p| sphere.residual(&BoundaryPoint::Finite(*p))).collect::<Result<_>>()?;
    Ok(max_of(r.into_iter().map(f64::abs)))
}

fn equidistance(p1: &HeisPoint, p2: &HeisPoint, pts: &[HeisPoint]) -> f64 {
    max_of(pts.par_iter().map(|p| equidistance_defect(p1, p2, p)).collect::<Vec<_>>())
}

fn theorem_suite(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let (v1, v2) = (HeisPoint::new(0.0, 0.0, -1.0), HeisPoint::new(0.0, 0.0, 1.0));
    let (h1, h2) = (HeisPoint::new(-1.0, 0.0, 0.0), HeisPoint::new(1.0, 0.0, 0.0));
    let region = Aabb::cube(3.0);
    let vertical = bisector_field(&v1, &v2)?;
    let planar = bisector_field(&h1, &h2)?;

    let forward_v = sample_bisector(&v1, &v2, &region, samples, seed)?;
    let forward_h = sample_bisector(&h1, &h2, &region, samples, seed.wrapping_add(1))?;
    let s0 = SpinalSphere::s0();
    let s1 = SpinalSphere::s1();
    let literal = SpinalSphere::from_vertices(h1.into(), h2.into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let plane: Vec<HeisPoint> =
        (0..samples).map(|_| HeisPoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0)).collect();
    let sphere1 = s1.sample_in(&region, samples, seed.wrapping_add(3))?;

    let a = SiegelPoint::new((-1.0).into(), 0.0.into());
    let b = SiegelPoint::new((-2.0).into(), 0.0.into());
    let rho = bergman_distance(&a, &b)?;
    // cosh²(ρ/2) = |⟨a,b⟩|² / (⟨a,a⟩⟨b,b⟩) with ⟨a,b⟩ = a₁ + b₁ for real points on the axis
    let ratio: f64 = (-1.0f64 - 2.0).powi(2) / ((-2.0) * (-4.0));
    let brute = 2.0 * ratio.sqrt().acosh();

    Ok(vec![
        Check::bound("vertical_field_is_t", coefficient_error(&vertical, &[(Monomial([0, 0, 1]), 1.0)]), 1e-12),
        Check::bound("planar_field_is_the_cubic", coefficient_error(&planar, &cubic_terms()), 1e-12),
        Check::bound("forward_vertical_on_plane_sphere", spinal_residuals(&s0, &forward_v)?, 1e-8),
        Check::bound("forward_planar_on_cubic_sphere", spinal_residuals(&s1, &forward_h)?, 1e-8)
            .with_note("sphere vertices (0,-1,0) and (0,1,0)"),
        Check::informational(
            "forward_planar_on_sphere_with_vertices_at_foci",
            spinal_residuals(&literal, &forward_h)?,
            1e-8,
            "vertices (-1,0,0) and (1,0,0); that sphere is not the planar bisector",
        ),
        Check::bound("converse_plane_sphere_equidistant", equidistance(&v1, &v2, &plane), 1e-8),
        Check::bound("converse_cubic_sphere_equidistant", equidistance(&h1, &h2, &sphere1), 1e-8),
        Check::bound("bergman_distance_ln2", (rho - 2f64.ln()).abs(), 1e-12),
        Check::bound("bergman_distance_brute_force", (rho - brute).abs(), 1e-12),
    ])
}

/// Random polynomial of degree three with coefficients uniform in `[-1, 1]`.
pub fn random_cubic<R: Rng>(rng: &mut R) -> Polynomial {
    Polynomial::from_terms(Monomial::up_to_degree(3).into_iter().map(|m| (m, rng.gen_range(-1.0..1.0))))
}

fn curvature_suite(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plane = plane_field();

    let plane_pts: Vec<HeisPoint> = (0..samples)
        .map(|_| loop {
            let p = HeisPoint::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), 0.0);
            if p.x.hypot(p.y) > 1e-3 {
                break p;
            }
        })
        .collect();
    let minimal = max_of(plane_pts.par_iter().map(|p| mean_curvature(&plane, p).map_or(f64::NAN, f64::abs)).collect::<Vec<_>>());

    let moved: Vec<(Similarity, HeisPoint)> =
        (0..samples.min(1000)).map(|k| (random_similarity(&mut rng), plane_pts[k % plane_pts.len()])).collect();
    let moved_minimal = max_of(
        moved
            .par_iter()
            .map(|(g, p)| mean_curvature(&plane.transport(g), &g.apply(p)).map_or(f64::NAN, |h| h.abs() / g.scale_factor()))
            .collect::<Vec<_>>(),
    );

    let s1 = s1_field();
    let at_113 = (mean_curvature(&s1, &HeisPoint::new(1.0, 1.0, 3.0))? - 3.0 / 10f64.sqrt()).abs();

    let xy: Vec<(f64, f64)> = (0..samples)
        .map(|_| loop {
            let (x, y) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if y != 0.0 && x != 0.0 {
                break (x, y);
            }
        })
        .collect();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let triples: Vec<(f64, f64, f64)> = xy
        .par_iter()
        .map(|&(x, y)| {
            let h = mean_curvature(&s1, &HeisPoint::new(x, y, s1_height(x, y))).unwrap_or(f64::NAN);
            (y, rel(h, s1_curvature(x, y).unwrap_or(f64::NAN)), rel(h, s1_curvature_oriented(x, y).unwrap_or(f64::NAN)))
        })
        .collect();
    let literal = max_of(triples.iter().map(|t| t.1));
    let upper = max_of(triples.iter().filter(|t| t.0 > 0.0).map(|t| t.1));
    let oriented = max_of(triples.iter().map(|t| t.2));

    // two routes on random cubic fields
    let per_field = (samples / 10).max(1);
    let mut route_cases = Vec::new();
    for _ in 0..10 {
        let f = random_cubic(&mut rng);
        let mut pts = Vec::with_capacity(per_field);
        while pts.len() < per_field {
            let p = Aabb::cube(2.0).sample(&mut rng);
            if horizontal_jet(&f, &p).gradient_norm() >= 0.1 {
                pts.push(p);
            }
        }
        route_cases.push((f, pts));
    }
    let routes = max_of(
        route_cases
            .par_iter()
            .map(|(f, pts)| {
                max_of(pts.iter().map(|p| match (mean_curvature(f, p), definitional_curvature(f, p)) {
                    (Ok(a), Ok(b)) => (a - b).abs(),
                    _ => f64::NAN,
                }))
            })
            .collect::<Vec<_>>(),
    );

    let fd_err = max_of(route_cases.iter().take(3).flat_map(|(f, pts)| {
        let g = f.clone();
        let fd = FiniteDifference::new(move |p: &HeisPoint| g.eval(p.to_array()));
        pts.iter()
            .take(100)
            .map(|p| {
                let (a, b) = (ScalarField::jet(f, p), fd.jet(p));
                max_of((0..3).flat_map(|i| {
                    let row = (a.hess[i], b.hess[i]);
                    std::iter::once((a.grad[i] - b.grad[i]).abs()).chain((0..3).map(move |j| (row.0[j] - row.1[j]).abs()))
                }))
            })
            .collect::<Vec<_>>()
    }));

    let along: Vec<f64> = (1..=20).map(|k| s1_curvature(0.5f64.powi(k), 1.0)).collect::<Result<_>>()?;
    let monotone = along.windows(2).all(|w| w[1] > w[0]);
    let axis = max_of((0..100).map(|k| s1_curvature(0.0, -4.95 + 0.1 * k as f64).map_or(f64::NAN, f64::abs)));
    let near_characteristic = max_of((1..=40).flat_map(|k| {
        let r = 0.5f64.powi(k);
        (0..16).map(move |j| {
            let a = j as f64 * PI / 8.0;
            s1_curvature(r * a.cos(), 1.0 + r * a.sin()).map_or(0.0, f64::abs)
        })
    }));

    let locus = characteristic_locus_s1();
    let expected = [HeisPoint::new(0.0, 1.0, 0.0), HeisPoint::new(0.0, -1.0, 0.0)];
    let locus_ok = locus.len() == 2 && expected.iter().all(|e| locus.contains(e));
    let scan = characteristic_scan(&plane, &Aabb::cube(1.0), 201, 1e-12);

    Ok(vec![
        Check::bound("plane_is_minimal", minimal, 1e-9),
        Check::bound("similar_planes_are_minimal", moved_minimal, 1e-9).with_note("curvature divided by the dilation factor"),
        Check::bound("cubic_curvature_at_1_1_3", at_113, 1e-10),
        Check::informational(
            "closed_form_agreement_all_y",
            literal,
            1e-8,
            "displayed closed form 3xy/sqrt(...) has the opposite sign to the gradient orientation for y < 0",
        ),
        Check::bound("closed_form_agreement_y_positive", upper, 1e-8),
        Check::bound("oriented_closed_form_agreement", oriented, 1e-8).with_note("3x|y|/sqrt(...)"),
        Check::bound("two_route_agreement", routes, 1e-5),
        Check::bound("finite_difference_partials", fd_err, 1e-5),
        Check::bound("limit_along_y_eq_1", (along[19] - 1.5).abs(), 1e-4),
        Check::bound("limit_along_y_eq_1_monotone", if monotone { 0.0 } else { 1.0 }, 0.0),
        Check::bound("zero_along_x_eq_0", axis, 0.0),
        Check::bound("decay_at_10_10", (s1_curvature(10.0, 10.0)? - 0.106066).abs(), 1e-5),
        Check::record(
            "sup_abs_curvature_near_characteristic_point",
            near_characteristic,
            "over circles of radius 2^-k (k<=40) about (0,1): bounded, no divergence observed",
        ),
        Check::bound("cubic_characteristic_locus", if locus_ok { 0.0 } else { 1.0 }, 0.0),
        Check::bound(
            "plane_characteristic_scan_201",
            if scan == vec![HeisPoint::ORIGIN] { 0.0 } else { scan.len().max(1) as f64 },
            0.0,
        ),
    ])
}

/// Korányi bisector of a generic pair: sampled, then fitted by a spinal
/// sphere. Nothing is asserted.
fn generic_experiment(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let (p1, p2) = (HeisPoint::ORIGIN, HeisPoint::new(1.0, 0.0, 1.0));
    let class = classify_pair(&p1, &p2)?;
    let n = samples.clamp(crate::spinal::MIN_FIT_POINTS, 1000);
    let pts = sample_bisector(&p1, &p2, &Aabb::cube(3.0), n, seed)?;
    let (_, report) = fit_spinal_report(&pts, None, &FitOptions { seed, ..Default::default() })?;
    let norm = normalize_pair(&p1, &p2)?;
    let field = bisector_field(&p1, &p2)?;
    let moved = field.transport(&norm.similarity);
    let canonical = bisector_field(&canonical_pair(&class).0, &canonical_pair(&class).1)?;
    let transport_err = max_of(moved.coefficients().into_iter().map(|(m, c)| (c - canonical.coefficient(m)).abs()));
    let scale = pts.iter().map(|p| p.gauge()).fold(0.0, f64::max);
    let sampson = SpinalSphere::from_vertices(report.vertices[0], report.vertices[1])
        .map(|s| max_of(pts.iter().map(|p| s.sampson_distance(p))))
        .unwrap_or(f64::NAN);
    let vertical_pair = vertex_pair_distance(&report.vertices, &[BoundaryPoint::ORIGIN, BoundaryPoint::Infinity]);
    Ok(vec![
        Check::record("iota", class.iota().unwrap_or(f64::NAN), "|s|/|w|^2 of p1^-1 p2 for foci (0,0,0),(1,0,1)"),
        Check::record("normalized_field_matches_canonical", transport_err, "max coefficient difference"),
        Check::record("fit_rms_residual", report.rms, "spinal residual of the fitted sphere"),
        Check::record("fit_max_residual", report.max, "spinal residual of the fitted sphere"),
        Check::record("fit_max_distance", sampson, "first-order distance of the samples to the fitted sphere"),
        Check::record("fit_converged", if report.converged { 1.0 } else { 0.0 }, "1 if the simplex search converged"),
        Check::record("fit_evaluations", report.evaluations as f64, "objective evaluations of the best start"),
        Check::record("sample_extent", scale, "largest gauge among samples"),
        Check::record("fit_distance_to_plane_vertices", vertical_pair, "chart distance of the fitted vertices to (o, infinity)"),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), s.name());
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass_and_repeat() {
        for suite in [Suite::Metric, Suite::Similarity, Suite::Theorem] {
            let a = run_verify(suite, 7, 300).unwrap();
            assert!(a.passed, "{}", a.to_json());
            assert_eq!(a.to_json(), run_verify(suite, 7, 300).unwrap().to_json());
        }
    }

    #[test]
    fn informational_checks_do_not_fail_the_suite() {
        let r = run_verify(Suite::Theorem, 1, 200).unwrap();
        let c = r.check("forward_planar_on_sphere_with_vertices_at_foci").unwrap();
        assert!(!c.asserted && !c.passed);
        assert!(r.passed);
    }
}
