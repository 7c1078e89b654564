//! Marching-cubes meshing of implicit surfaces and OBJ/PLY export.
//!
//! The case table is generated rather than transcribed: on every cube face
//! each run of inside corners is cut off by one segment between its two
//! crossing edges, the segments close up into polygons, and the polygons are
//! fanned into triangles. Diagonal inside corners on a face are always kept
//! apart, and neighbouring cells see the same face, so the mesh has no cracks.

use crate::bisector::Aabb;
use crate::curvature::{grid_axis, ScalarField};
use crate::error::{Error, Result};
use crate::heis::HeisPoint;
use crate::io::fmt_f64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::io::Write;
use std::sync::OnceLock;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<HeisPoint>,
    pub triangles: Vec<[usize; 3]>,
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

/// Triangles with area below this are dropped.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// Corner `c` of the unit cube sits at `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

fn edge_index(a: usize, b: usize) -> usize {
    let (a, b) = (a.min(b), a.max(b));
    EDGES.iter().position(|&e| e == (a, b)).expect("adjacent corners")
}

/// Corners of each face, counter-clockwise seen from outside the cube.
fn faces() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for side in 0..2 {
            let corner = |u: usize, v: usize| (side << a) | (u << b) | (v << c);
            let ring = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
            out.push(if side == 1 { ring } else { [ring[0], ring[3], ring[2], ring[1]] });
        }
    }
    out
}

/// Triangles of each of the 256 inside/outside patterns, as edge triples.
fn case_table() -> &'static [Vec<[u8; 3]>] {
    static TABLE: OnceLock<Vec<Vec<[u8; 3]>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let faces = faces();
        (0..256usize)
            .map(|case| {
                let inside = |c: usize| case >> c & 1 == 1;
                let mut next = [usize::MAX; 12];
                for ring in &faces {
                    for i in 0..4 {
                        let (prev, cur) = (ring[(i + 3) % 4], ring[i]);
                        if inside(prev) || !inside(cur) {
                            continue;
                        }
                        // a run of inside corners starts at `cur`
                        let mut j = i;
                        while inside(ring[(j + 1) % 4]) {
                            j = (j + 1) % 4;
                        }
                        let enter = edge_index(prev, cur);
                        let exit = edge_index(ring[j], ring[(j + 1) % 4]);
                        next[exit] = enter;
                    }
                }
                let mut triangles = Vec::new();
                let mut seen = [false; 12];
                for start in 0..12 {
                    if next[start] == usize::MAX || seen[start] {
                        continue;
                    }
                    let mut cycle = vec![start];
                    seen[start] = true;
                    let mut e = next[start];
                    while e != start {
                        seen[e] = true;
                        cycle.push(e);
                        e = next[e];
                    }
                    for k in 1..cycle.len() - 1 {
                        triangles.push([cycle[0] as u8, cycle[k + 1] as u8, cycle[k] as u8]);
                    }
                }
                triangles
            })
            .collect()
    })
}

struct Lattice {
    axes: [Vec<f64>; 3],
    values: Vec<f64>,
    n: usize,
}

impl Lattice {
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n + j) * self.n + i
    }

    fn point(&self, i: usize, j: usize, k: usize) -> HeisPoint {
        HeisPoint::new(self.axes[0][i], self.axes[1][j], self.axes[2][k])
    }

    /// Key of the lattice edge from `(i, j, k)` along `axis`.
    fn edge_key(&self, i: usize, j: usize, k: usize, axis: usize) -> u64 {
        (self.index(i, j, k) * 3 + axis) as u64
    }

    fn edge_vertex(&self, key: u64) -> HeisPoint {
        let axis = (key % 3) as usize;
        let idx = (key / 3) as usize;
        let (i, j, k) = (idx % self.n, idx / self.n % self.n, idx / (self.n * self.n));
        let mut hi = [i, j, k];
        hi[axis] += 1;
        let (a, b) = (self.point(i, j, k), self.point(hi[0], hi[1], hi[2]));
        let (fa, fb) = (self.values[idx], self.values[self.index(hi[0], hi[1], hi[2])]);
        let s = fa / (fa - fb);
        HeisPoint::new(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), a.t + s * (b.t - a.t))
    }
}

fn triangle_area(a: &HeisPoint, b: &HeisPoint, c: &HeisPoint) -> f64 {
    let u = [b.x - a.x, b.y - a.y, b.t - a.t];
    let v = [c.x - a.x, c.y - a.y, c.t - a.t];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt()
}

/// Triangulates `{F = 0}` over `region` with `resolution` cells per axis.
/// Corners with `F < 0` count as inside; triangles face towards `F > 0`.
pub fn marching_cubes<F: ScalarField + ?Sized>(field: &F, region: &Aabb, resolution: usize) -> Result<TriangleMesh> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution {resolution} < 2")));
    }
    let n = resolution + 1;
    let axes = [0, 1, 2].map(|a| grid_axis(region.min[a], region.max[a], n));
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|k| {
            let axes = &axes;
            (0..n).flat_map(move |j| (0..n).map(move |i| field.value(&HeisPoint::new(axes[0][i], axes[1][j], axes[2][k]))))
        })
        .collect();
    let lattice = Lattice { axes, values, n };
    let table = case_table();

    let slabs: Vec<Vec<[u64; 3]>> = (0..resolution)
        .into_par_iter()
        .map(|k| {
            let mut out = Vec::new();
            for j in 0..resolution {
                for i in 0..resolution {
                    let mut case = 0;
                    for c in 0..8 {
                        let v = lattice.values[lattice.index(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1))];
                        if v < 0.0 {
                            case |= 1 << c;
                        }
                    }
                    for tri in &table[case] {
                        out.push(tri.map(|e| {
                            let (lo, hi) = EDGES[e as usize];
                            let axis = (hi - lo).trailing_zeros() as usize;
                            lattice.edge_key(i + (lo & 1), j + (lo >> 1 & 1), k + (lo >> 2 & 1), axis)
                        }));
                    }
                }
            }
            out
        })
        .collect();

    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for tri in slabs.into_iter().flatten() {
        let pts = tri.map(|key| lattice.edge_vertex(key));
        if !(triangle_area(&pts[0], &pts[1], &pts[2]) >= MIN_TRIANGLE_AREA) {
            continue;
        }
        let mut ids = [0; 3];
        for (slot, (key, p)) in ids.iter_mut().zip(tri.iter().zip(pts)) {
            *slot = *index.entry(*key).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            });
        }
        triangles.push(ids);
    }
    if triangles.is_empty() {
        return Err(Error::EmptySurface);
    }
    Ok(TriangleMesh { vertices, triangles, provenance: "implicit surface".into() })
}

impl TriangleMesh {
    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// Edges used by exactly one triangle; empty for a closed mesh.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut out: Vec<_> = count.into_iter().filter(|(_, c)| *c == 1).map(|(e, _)| e).collect();
        out.sort_unstable();
        out
    }
}

pub fn export_mesh<W: Write>(mesh: &TriangleMesh, format: MeshFormat, mut out: W) -> Result<()> {
    let provenance = mesh.provenance.replace('\n', " ");
    match format {
        MeshFormat::Obj => {
            writeln!(out, "# {provenance}")?;
            for v in &mesh.vertices {
                writeln!(out, "v {} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.t))?;
            }
            for t in &mesh.triangles {
                writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
            }
        }
        MeshFormat::Ply => {
            writeln!(out, "ply\nformat ascii 1.0\ncomment {provenance}")?;
            writeln!(out, "element vertex {}", mesh.vertices.len())?;
            writeln!(out, "property double x\nproperty double y\nproperty double z")?;
            writeln!(out, "element face {}", mesh.triangles.len())?;
            writeln!(out, "property list uchar int vertex_indices\nend_header")?;
            for v in &mesh.vertices {
                writeln!(out, "{} {} {}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.t))?;
            }
            for t in &mesh.triangles {
                writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
            }
        }
    }
    Ok(())
}

pub fn mesh_to_string(mesh: &TriangleMesh, format: MeshFormat) -> String {
    let mut buf = Vec::new();
    export_mesh(mesh, format, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads the `v` and `f` records of an OBJ file.
pub fn parse_obj(text: &str) -> Result<(Vec<HeisPoint>, Vec<[usize; 3]>)> {
    let bad = |line: &str| Error::InvalidArgument(format!("malformed OBJ line: {line}"));
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|s| s.parse().map_err(|_| bad(line))).collect::<Result<_>>()?;
                if c.len() != 3 {
                    return Err(bad(line));
                }
                vertices.push(HeisPoint::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let c: Vec<usize> = it.map(|s| s.parse().map_err(|_| bad(line))).collect::<Result<_>>()?;
                if c.len() != 3 || c.contains(&0) {
                    return Err(bad(line));
                }
                faces.push([c[0] - 1, c[1] - 1, c[2] - 1]);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::s1_field;
    use crate::poly::{Monomial, Polynomial};

    fn sphere() -> Polynomial {
        Polynomial::from_terms([
            (Monomial([2, 0, 0]), 1.0),
            (Monomial([0, 2, 0]), 1.0),
            (Monomial([0, 0, 2]), 1.0),
            (Monomial([0, 0, 0]), -1.0),
        ])
    }

    #[test]
    fn table_shapes() {
        let table = case_table();
        assert!(table[0].is_empty() && table[255].is_empty());
        assert_eq!(table[1].len(), 1);
        assert_eq!(table[0b0000_1111].len(), 2);
        // diagonal corners of one face stay apart
        assert_eq!(table[0b0000_1001].len(), 2);
    }

    /// Trilinear-free check of crack freedom: random lattices whose outer
    /// layer is outside must give closed meshes.
    #[test]
    fn random_lattices_give_closed_meshes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..30 {
            let vals: Vec<f64> = (0..7 * 7 * 7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let field = crate::curvature::FiniteDifference::new(move |p: &HeisPoint| {
                let idx = |v: f64| v.round() as usize;
                let (i, j, k) = (idx(p.x), idx(p.y), idx(p.t));
                if [i, j, k].iter().any(|&c| c == 0 || c == 6) {
                    1.0
                } else {
                    vals[(k * 7 + j) * 7 + i]
                }
            });
            let region = Aabb::new([0.0; 3], [6.0; 3]).unwrap();
            if let Ok(mesh) = marching_cubes(&field, &region, 6) {
                assert!(mesh.boundary_edges().is_empty());
            }
        }
    }

    #[test]
    fn plane_is_exact() {
        let mesh = marching_cubes(&Polynomial::coordinate(2), &Aabb::cube(1.0), 8).unwrap();
        assert!(!mesh.triangles.is_empty());
        assert!(mesh.vertices.iter().all(|v| v.t.abs() <= 1e-12));
    }

    #[test]
    fn sphere_is_closed_and_outward() {
        let field = sphere();
        let mesh = marching_cubes(&field, &Aabb::cube(1.5), 17).unwrap();
        assert!(mesh.boundary_edges().is_empty());
        for t in &mesh.triangles {
            let [a, b, c] = t.map(|i| mesh.vertices[i]);
            let u = [b.x - a.x, b.y - a.y, b.t - a.t];
            let v = [c.x - a.x, c.y - a.y, c.t - a.t];
            let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
            assert!(n[0] * a.x + n[1] * a.y + n[2] * a.t > 0.0);
        }
    }

    #[test]
    fn vertex_residual_bound_and_refinement() {
        let field = s1_field();
        let region = Aabb::cube(3.0);
        let worst = |res: usize| {
            let mesh = marching_cubes(&field, &region, res).unwrap();
            let diag = 6.0 * 3f64.sqrt() / res as f64;
            let mut worst = 0.0f64;
            for v in &mesh.vertices {
                let g = field.jet(v).grad;
                let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                let r = field.value(v).abs();
                assert!(r <= 2.0 * diag * gn, "{v}: {r} vs {}", 2.0 * diag * gn);
                worst = worst.max(r);
            }
            worst
        };
        assert!(worst(64) < worst(32));
    }

    #[test]
    fn empty_surface() {
        let field = Polynomial::constant(1.0);
        assert!(matches!(marching_cubes(&field, &Aabb::cube(1.0), 4), Err(Error::EmptySurface)));
        assert!(matches!(marching_cubes(&field, &Aabb::cube(1.0), 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn export_formats() {
        let mesh = TriangleMesh {
            vertices: vec![HeisPoint::new(0.0, 0.0, 0.0), HeisPoint::new(1.0, 0.0, 0.0), HeisPoint::new(0.1, 0.7, 1.0 / 3.0)],
            triangles: vec![[0, 1, 2]],
            provenance: "single".into(),
        };
        let obj = mesh_to_string(&mesh, MeshFormat::Obj);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 1);
        let (v, f) = parse_obj(&obj).unwrap();
        assert_eq!(v, mesh.vertices);
        assert_eq!(f, mesh.triangles);

        let ply = mesh_to_string(&mesh, MeshFormat::Ply);
        assert!(ply.contains("element vertex 3\n"));
        assert!(ply.contains("element face 1\n"));
        assert!(ply.lines().last().unwrap().starts_with("3 0 1 2"));
    }

    #[test]
    fn deterministic_output() {
        let a = marching_cubes(&s1_field(), &Aabb::cube(2.0), 20).unwrap();
        let b = marching_cubes(&s1_field(), &Aabb::cube(2.0), 20).unwrap();
        assert_eq!(mesh_to_string(&a, MeshFormat::Obj), mesh_to_string(&b, MeshFormat::Obj));
    }
}
