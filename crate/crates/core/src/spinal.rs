//! Spinal spheres: construction from vertices, membership, and fitting to
//! point clouds.
//!
//! A spinal sphere with vertices `(v₁, v₂)` is `G⁻¹({t = 0} ∪ {∞})` for any
//! `G ∈ SU(2,1)` taking `v₁ ↦ o` and `v₂ ↦ ∞`. The stabilizer of the ordered
//! pair `(o, ∞)` consists of rotations and dilations, which preserve the plane
//! `t = 0` and the sign of `t`, so membership and orientation do not depend on
//! the choice of `G`.
//!
//! The residual is the `t`-coordinate of the image of a point under a
//! normalizer. Near the vertex sent to `∞` that coordinate amplifies rounding
//! in the point by the inverse fourth power of the distance, so each point is
//! evaluated with the normalizer that sends its nearer vertex to `o`. The two
//! normalizers differ by a map swapping `o` and `∞`, which reverses the sign
//! of `t`; the swapped value is negated to keep one orientation.

use crate::bisector::Aabb;
use crate::boundary::{hermitian, lift_boundary, project_null, BoundaryPoint, C21Vector, Su21Matrix};
use crate::error::{Error, Result};
use crate::heis::{dist_k, gauge, HeisPoint};
use crate::simplex::{self, NelderMeadOptions};
use crate::similarity::Similarity;
use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinalSphere {
    v1: BoundaryPoint,
    v2: BoundaryPoint,
    /// Takes `v1` to the origin and `v2` to `∞`.
    normalizer: Su21Matrix,
    /// Takes `v2` to the origin and `v1` to `∞`.
    swapped: Su21Matrix,
}

impl SpinalSphere {
    pub fn from_vertices(v1: BoundaryPoint, v2: BoundaryPoint) -> Result<Self> {
        spinal_from_vertices(&v1, &v2)
    }

    /// The plane `t = 0`, vertices `(o, ∞)`.
    pub fn s0() -> Self {
        Self {
            v1: BoundaryPoint::ORIGIN,
            v2: BoundaryPoint::Infinity,
            normalizer: Su21Matrix::identity(),
            swapped: normalizer_to(&BoundaryPoint::Infinity, &BoundaryPoint::ORIGIN).expect("distinct vertices"),
        }
    }

    /// The cubic surface `x(x² + y² + 1) − yt = 0`, with vertices `(0, ∓1, 0)`
    /// (its characteristic points). Oriented so the residual has the sign of
    /// the cubic.
    pub fn s1() -> Self {
        spinal_from_vertices(&HeisPoint::new(0.0, -1.0, 0.0).into(), &HeisPoint::new(0.0, 1.0, 0.0).into())
            .expect("distinct vertices")
    }

    pub fn vertices(&self) -> (BoundaryPoint, BoundaryPoint) {
        (self.v1, self.v2)
    }

    pub fn normalizer(&self) -> &Su21Matrix {
        &self.normalizer
    }

    pub fn residual(&self, b: &BoundaryPoint) -> Result<f64> {
        spinal_residual(self, b)
    }

    /// Whether `b` is strictly nearer `v2` than `v1`.
    fn nearer_second(&self, b: &BoundaryPoint) -> bool {
        let gap = |v: &BoundaryPoint| match (b, v) {
            (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => dist_k(p, q),
            (BoundaryPoint::Infinity, BoundaryPoint::Infinity) => 0.0,
            _ => f64::INFINITY,
        };
        gap(&self.v2) < gap(&self.v1)
    }

    /// The residual without validating the null condition.
    fn residual_fast(&self, p: &HeisPoint) -> f64 {
        let b = BoundaryPoint::Finite(*p);
        let (g, sign) = if self.nearer_second(&b) { (&self.swapped, -1.0) } else { (&self.normalizer, 1.0) };
        let v = g.apply(&lift_boundary(&b)).0;
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if v[2].norm() <= crate::boundary::INFINITY_THRESHOLD * norm {
            return 0.0;
        }
        sign * 2.0 * (v[0] / v[2]).im
    }

    /// First-order Euclidean distance `|r| / |∇r|` from `p` to the sphere,
    /// where `r` is the residual. Scaling `G` scales `r` and `∇r` alike, so
    /// this depends only on the sphere.
    pub fn sampson_distance(&self, p: &HeisPoint) -> f64 {
        let g = self.normalizer.matrix();
        let v = self.normalizer.apply(&lift_boundary(&BoundaryPoint::Finite(*p))).0;
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if v[2].norm() <= crate::boundary::INFINITY_THRESHOLD * norm {
            return 0.0;
        }
        let r = 2.0 * (v[0] / v[2]).im;
        let i = Complex64::i();
        let partials = [
            nalgebra::Vector3::new(Complex64::from(-p.x), Complex64::from(1.0), Complex64::from(0.0)),
            nalgebra::Vector3::new(Complex64::from(-p.y), i, Complex64::from(0.0)),
            nalgebra::Vector3::new(0.5 * i, Complex64::from(0.0), Complex64::from(0.0)),
        ];
        let grad2: f64 = partials
            .iter()
            .map(|d| {
                let dv = g * d;
                (2.0 * ((dv[0] * v[2] - v[0] * dv[2]) / (v[2] * v[2])).im).powi(2)
            })
            .sum();
        if grad2 == 0.0 {
            return if r == 0.0 { 0.0 } else { f64::INFINITY };
        }
        r.abs() / grad2.sqrt()
    }

    /// The point `G⁻¹(z, 0)` of the sphere.
    pub fn point_from_plane(&self, z: Complex64) -> Result<BoundaryPoint> {
        let q = BoundaryPoint::Finite(HeisPoint::from_complex(z, 0.0));
        project_null(&self.normalizer.inverse().apply(&lift_boundary(&q)))
    }

    /// Images of `n` points drawn uniformly from the disk `|z| <= radius` of
    /// the plane `t = 0`. Images at infinity are skipped.
    pub fn sample(&self, n: usize, radius: f64, seed: u64) -> Vec<HeisPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let r = radius * rng.gen::<f64>().sqrt();
            let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
            if let Ok(BoundaryPoint::Finite(p)) = self.point_from_plane(z) {
                out.push(p);
            }
        }
        out
    }

    /// `n` points of the sphere inside `region`, from preimages spread over
    /// the whole plane `t = 0` (radius `tan(πu/2)`, `u` uniform).
    pub fn sample_in(&self, region: &Aabb, n: usize, seed: u64) -> Result<Vec<HeisPoint>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let budget = 1000 * n.max(1);
        let mut out = Vec::with_capacity(n);
        for _ in 0..budget {
            if out.len() == n {
                break;
            }
            let r = (std::f64::consts::FRAC_PI_2 * rng.gen::<f64>()).tan();
            let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
            if let Ok(BoundaryPoint::Finite(p)) = self.point_from_plane(z) {
                if region.contains(&p) {
                    out.push(p);
                }
            }
        }
        match out.len() {
            0 => Err(Error::EmptyIntersection { attempts: budget }),
            k if k < n => Err(Error::InsufficientSamples { found: k, requested: n }),
            _ => Ok(out),
        }
    }
}

/// `|⟨v̂₁, v̂₂⟩|` below this fraction of `‖v̂₁‖‖v̂₂‖` means the vertices coincide.
const COINCIDENCE_TOLERANCE: f64 = 1e-14;

pub fn spinal_from_vertices(v1: &BoundaryPoint, v2: &BoundaryPoint) -> Result<SpinalSphere> {
    Ok(SpinalSphere { v1: *v1, v2: *v2, normalizer: normalizer_to(v1, v2)?, swapped: normalizer_to(v2, v1)? })
}

/// An element of SU(2,1) taking `v1` to `o` and `v2` to `∞`.
fn normalizer_to(v1: &BoundaryPoint, v2: &BoundaryPoint) -> Result<Su21Matrix> {
    let (a, b) = (lift_boundary(v1), lift_boundary(v2));
    let pairing = hermitian(&a, &b);
    if pairing.norm() <= COINCIDENCE_TOLERANCE * (a.norm_sqr() * b.norm_sqr()).sqrt() {
        return Err(Error::CoincidentVertices);
    }
    // ⟨v̂₁, v̂₂⟩ = 1
    let a = a.scale(pairing.inv());
    // n ⊥ both: ⟨n, v⟩ = n · conj(Hv) is a bilinear dot product
    let h = crate::boundary::form_matrix();
    let ha = (h * a.0).map(|c| c.conj());
    let hb = (h * b.0).map(|c| c.conj());
    let mut n = C21Vector(ha.cross(&hb));
    let nn = hermitian(&n, &n).re;
    n = n.scale(Complex64::from(1.0 / nn.sqrt()));

    let mut inv = Matrix3::from_columns(&[b.0, n.0, a.0]);
    // |det| = 1 already; fix the phase through the middle column
    let det = inv.determinant();
    let phase = det.conj() / det.norm();
    inv.set_column(1, &(n.0 * phase));
    Ok(Su21Matrix::new(inv)?.inverse())
}

/// `t`-coordinate of `G(b)`, or `0` when the image is `∞`. `G` sends the
/// vertex nearer `b` to `o`; when that is the second vertex the sign is
/// reversed so the residual keeps the orientation of the first normalizer.
pub fn spinal_residual(sphere: &SpinalSphere, b: &BoundaryPoint) -> Result<f64> {
    let (g, sign) = if sphere.nearer_second(b) { (&sphere.swapped, -1.0) } else { (&sphere.normalizer, 1.0) };
    match project_null(&g.apply(&lift_boundary(b)))? {
        BoundaryPoint::Finite(p) => Ok(sign * p.t),
        BoundaryPoint::Infinity => Ok(0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub vertices: [BoundaryPoint; 2],
    pub rms: f64,
    pub max: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub evaluations_per_start: usize,
    pub starts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { evaluations_per_start: 10_000, starts: 8, seed: 0x5eed }
    }
}

pub const MIN_FIT_POINTS: usize = 12;

/// Charts on the boundary used by the fit: `Direct` covers a ball around the
/// data, `Inverted` (through the Korányi inversion) covers its complement and
/// reaches `∞` at the parameter origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    Direct,
    Inverted,
}

/// Normalized coordinates `u = D_{1/s}(c⁻¹ * v)` centered on the data.
#[derive(Debug, Clone, Copy)]
struct DataFrame {
    to_world: Similarity,
    to_local: Similarity,
    scale: f64,
}

impl DataFrame {
    fn new(points: &[HeisPoint]) -> Self {
        let n = points.len() as f64;
        let c = points.iter().fold([0.0; 3], |acc, p| [acc[0] + p.x / n, acc[1] + p.y / n, acc[2] + p.t / n]);
        let center = HeisPoint::from(c);
        let s = (points.iter().map(|p| gauge(&center.inverse().mul(p)).powi(2)).sum::<f64>() / n).sqrt().max(1e-6);
        let to_world = Similarity::translation(center).compose(&Similarity::dilation(s));
        Self { to_world, to_local: to_world.invert(), scale: s }
    }

    fn decode(&self, chart: Chart, q: &[f64]) -> BoundaryPoint {
        let q = HeisPoint::new(q[0], q[1], q[2]);
        let u = match chart {
            Chart::Direct => q,
            Chart::Inverted => match korányi_inversion(&q) {
                Some(u) => u,
                None => return BoundaryPoint::Infinity,
            },
        };
        BoundaryPoint::Finite(self.to_world.apply(&u))
    }

    fn encode(&self, v: &BoundaryPoint) -> (Chart, [f64; 3]) {
        match v {
            BoundaryPoint::Infinity => (Chart::Inverted, [0.0; 3]),
            BoundaryPoint::Finite(p) => {
                let u = self.to_local.apply(p);
                if gauge(&u) <= 1.0 {
                    (Chart::Direct, u.to_array())
                } else {
                    (Chart::Inverted, korányi_inversion(&u).expect("nonzero").to_array())
                }
            }
        }
    }
}

/// `(z, t) ↦ (z / (−|z|² + it), −t / (|z|⁴ + t²))`; `None` at the origin.
fn korányi_inversion(p: &HeisPoint) -> Option<HeisPoint> {
    let w = Complex64::new(-p.horizontal_norm_sqr(), p.t);
    if w.norm() == 0.0 {
        return None;
    }
    Some(HeisPoint::from_complex(p.z() / w, -p.t / w.norm_sqr()))
}

struct StartOutcome {
    vertices: (BoundaryPoint, BoundaryPoint),
    sum_sq: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

fn sum_of_squares(points: &[HeisPoint], v1: &BoundaryPoint, v2: &BoundaryPoint) -> f64 {
    match spinal_from_vertices(v1, v2) {
        Ok(s) => points.iter().map(|p| s.sampson_distance(p).powi(2)).sum(),
        Err(_) => f64::INFINITY,
    }
}

fn run_start(points: &[HeisPoint], frame: &DataFrame, init: (BoundaryPoint, BoundaryPoint), budget: usize) -> StartOutcome {
    let (mut c1, q1) = frame.encode(&init.0);
    let (mut c2, q2) = frame.encode(&init.1);
    let mut theta: Vec<f64> = q1.iter().chain(q2.iter()).copied().collect();
    let mut step = 0.1;
    let mut evaluations = 0;
    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let mut converged = false;
    // distances near machine precision at every point
    let fatol = points.len() as f64 * (1e-13 * frame.scale).powi(2);

    while evaluations < budget {
        let objective = |x: &[f64]| sum_of_squares(points, &frame.decode(c1, &x[..3]), &frame.decode(c2, &x[3..]));
        let opts = NelderMeadOptions { max_evaluations: budget - evaluations, fatol, ..Default::default() };
        let r = simplex::minimize(objective, &theta, &[step; 6], &opts);
        evaluations += r.evaluations;
        iterations += r.iterations;
        let improved = r.f < best * (1.0 - 1e-6);
        best = best.min(r.f);
        let (v1, v2) = (frame.decode(c1, &r.x[..3]), frame.decode(c2, &r.x[3..]));
        let (n1, q1) = frame.encode(&v1);
        let (n2, q2) = frame.encode(&v2);
        (c1, c2) = (n1, n2);
        theta = q1.iter().chain(q2.iter()).copied().collect();
        if r.f <= fatol || (r.converged && !improved) {
            converged = true;
            break;
        }
        step = (step * 0.1).max(1e-9);
    }

    let mut vertices = (frame.decode(c1, &theta[..3]), frame.decode(c2, &theta[3..]));
    let mut sum_sq = sum_of_squares(points, &vertices.0, &vertices.1);
    // snap a vertex sitting at the pole of the inverted chart onto ∞
    for k in 0..2 {
        let (chart, q) = if k == 0 { (c1, &theta[..3]) } else { (c2, &theta[3..]) };
        if chart == Chart::Inverted && gauge(&HeisPoint::new(q[0], q[1], q[2])) <= 1e-6 {
            let mut cand = vertices;
            if k == 0 {
                cand.0 = BoundaryPoint::Infinity;
            } else {
                cand.1 = BoundaryPoint::Infinity;
            }
            let s = sum_of_squares(points, &cand.0, &cand.1);
            if s <= sum_sq {
                vertices = cand;
                sum_sq = s;
            }
        }
    }
    StartOutcome { vertices, sum_sq, iterations, evaluations, converged }
}

fn default_starts(points: &[HeisPoint], frame: &DataFrame, opts: &FitOptions) -> Vec<(BoundaryPoint, BoundaryPoint)> {
    let center = frame.to_world.apply(&HeisPoint::ORIGIN);
    let nearest = points
        .iter()
        .min_by(|a, b| gauge(&center.inverse().mul(a)).total_cmp(&gauge(&center.inverse().mul(b))))
        .copied()
        .expect("non-empty point set");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![(BoundaryPoint::Finite(nearest), BoundaryPoint::Infinity)];
    while starts.len() < opts.starts {
        let a = points[rng.gen_range(0..points.len())];
        if starts.len() % 4 == 3 {
            starts.push((a.into(), BoundaryPoint::Infinity));
        } else {
            let b = points[rng.gen_range(0..points.len())];
            if a != b {
                starts.push((a.into(), b.into()));
            }
        }
    }
    starts
}

/// Best spinal sphere through `points`, with a report; never fails on
/// non-convergence (see [`fit_spinal`]).
pub fn fit_spinal_report(
    points: &[HeisPoint],
    initial: Option<(BoundaryPoint, BoundaryPoint)>,
    opts: &FitOptions,
) -> Result<(SpinalSphere, FitReport)> {
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_FIT_POINTS} points, got {}", points.len())));
    }
    let frame = DataFrame::new(points);
    let starts = match initial {
        Some(pair) => vec![pair],
        None => default_starts(points, &frame, opts),
    };
    let outcomes: Vec<StartOutcome> =
        starts.par_iter().map(|s| run_start(points, &frame, *s, opts.evaluations_per_start)).collect();
    // lowest index wins ties
    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.sum_sq < a.sum_sq { b } else { a })
        .expect("at least one start");
    let sphere = spinal_from_vertices(&best.vertices.0, &best.vertices.1)?;
    let residuals: Vec<f64> = points.iter().map(|p| sphere.residual_fast(p).abs()).collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let max = residuals.iter().copied().fold(0.0, f64::max);
    let report = FitReport {
        vertices: [best.vertices.0, best.vertices.1],
        rms,
        max,
        iterations: best.iterations,
        evaluations: best.evaluations,
        converged: best.converged,
    };
    Ok((sphere, report))
}

pub fn fit_spinal(
    points: &[HeisPoint],
    initial: Option<(BoundaryPoint, BoundaryPoint)>,
) -> Result<(SpinalSphere, FitReport)> {
    let (sphere, report) = fit_spinal_report(points, initial, &FitOptions::default())?;
    if !report.converged {
        return Err(Error::NoConvergence { rms: report.rms, evaluations: report.evaluations });
    }
    Ok((sphere, report))
}

/// Euclidean distance between boundary points in coordinates, taken after
/// the Korányi inversion when either point is outside the unit gauge ball
/// (so `∞` sits at the origin of that chart).
pub fn chart_distance(a: &BoundaryPoint, b: &BoundaryPoint) -> f64 {
    let euclid = |p: &HeisPoint, q: &HeisPoint| ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.t - q.t).powi(2)).sqrt();
    let inverted = |v: &BoundaryPoint| match v {
        BoundaryPoint::Infinity => HeisPoint::ORIGIN,
        BoundaryPoint::Finite(p) => korányi_inversion(p).unwrap_or(HeisPoint::new(f64::INFINITY, 0.0, 0.0)),
    };
    match (a, b) {
        (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) if gauge(p) <= 1.0 || gauge(q) <= 1.0 => euclid(p, q),
        _ => euclid(&inverted(a), &inverted(b)),
    }
}

/// [`chart_distance`] between vertex pairs, compared as unordered sets.
pub fn vertex_pair_distance(a: &[BoundaryPoint; 2], b: &[BoundaryPoint; 2]) -> f64 {
    let direct = chart_distance(&a[0], &b[0]).max(chart_distance(&a[1], &b[1]));
    let swapped = chart_distance(&a[0], &b[1]).max(chart_distance(&a[1], &b[0]));
    direct.min(swapped)
}
