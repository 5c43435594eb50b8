//! Conforming triangle meshes on rectangles with newest-vertex bisection.
//!
//! Every triangle is stored as `[newest, a, b]`, counter-clockwise, with the
//! refinement edge `(a, b)` opposite the newest vertex. Bisecting `[p, a, b]`
//! at the midpoint `m` of `(a, b)` yields `[m, p, a]` and `[m, b, p]`, which
//! keeps the orientation and makes the reversal in [`coarsen`] exact.

mod coarsen;
mod refine;
mod transfer;
pub mod vtk;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

pub use coarsen::coarsen;
pub use refine::refine;
pub use transfer::{transfer, Location, TransferMap};

/// Sentinel for "no triangle" in edge adjacency.
pub const NONE: usize = usize::MAX;

static NEXT_GENERATION: AtomicU64 = AtomicU64::new(1);

pub(crate) fn next_generation() -> u64 {
    NEXT_GENERATION.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("invalid mesh input: {0}")]
    InvalidInput(String),
    #[error("triangle {0} is degenerate or inverted (signed area {1:e})")]
    Degenerate(usize, f64),
    #[error("mesh is not conforming: {0}")]
    NonConforming(String),
    #[error("function belongs to mesh generation {found}, expected {expected}")]
    StaleFunction { expected: u64, found: u64 },
    #[error("point ({0}, {1}) is not covered by the source mesh")]
    PointLocation(f64, f64),
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.x1 - self.x0) + (self.y1 - self.y0))
    }

    fn on_boundary(&self, p: [f64; 2]) -> bool {
        p[0] == self.x0 || p[0] == self.x1 || p[1] == self.y0 || p[1] == self.y1
    }

    /// True when the segment lies on one side of the rectangle.
    fn segment_on_boundary(&self, p: [f64; 2], q: [f64; 2]) -> bool {
        (p[0] == self.x0 && q[0] == self.x0)
            || (p[0] == self.x1 && q[0] == self.x1)
            || (p[1] == self.y0 && q[1] == self.y0)
            || (p[1] == self.y1 && q[1] == self.y1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Incident triangles; the second slot is [`NONE`] on the boundary.
    pub triangles: [usize; 2],
    pub boundary: bool,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    generation: u64,
    domain: Rect,
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    levels: Vec<u32>,
    vertex_parents: Vec<Option<[usize; 2]>>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    vt_offsets: Vec<usize>,
    vt_indices: Vec<usize>,
    boundary_vertex: Vec<bool>,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

pub(crate) fn midpoint(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5]
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds an initial mesh from arbitrary triangles. Each triangle's
    /// refinement edge is its longest edge (first one on ties) and its
    /// orientation is made counter-clockwise.
    pub fn from_triangles(
        domain: Rect,
        vertices: Vec<[f64; 2]>,
        triangles: &[[usize; 3]],
    ) -> Result<Mesh, MeshError> {
        if triangles.is_empty() || vertices.is_empty() {
            return Err(MeshError::InvalidInput("empty mesh".into()));
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MeshError::InvalidInput(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let p = tri.map(|v| vertices[v]);
            // edge i is opposite local vertex i
            let lens = [dist2(p[1], p[2]), dist2(p[2], p[0]), dist2(p[0], p[1])];
            let mut k = 0;
            for i in 1..3 {
                if lens[i] > lens[k] {
                    k = i;
                }
            }
            let mut out = [tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]];
            if signed_area(vertices[out[0]], vertices[out[1]], vertices[out[2]]) < 0.0 {
                out.swap(1, 2);
            }
            tris.push(out);
        }
        let n = vertices.len();
        let nt = tris.len();
        Mesh::assemble(domain, vertices, tris, vec![0; nt], vec![None; n])
    }

    /// Uniform criss-cross triangulation: each of the `nx * ny` cells is cut
    /// by both diagonals into four triangles around the cell center. The cell
    /// sides are the refinement edges.
    pub fn criss_cross(domain: Rect, nx: usize, ny: usize) -> Result<Mesh, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::InvalidInput("criss-cross needs nx, ny >= 1".into()));
        }
        let hx = (domain.x1 - domain.x0) / nx as f64;
        let hy = (domain.y1 - domain.y0) / ny as f64;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) + nx * ny);
        for j in 0..=ny {
            for i in 0..=nx {
                let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * hx };
                let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * hy };
                vertices.push([x, y]);
            }
        }
        let corner = |i: usize, j: usize| j * (nx + 1) + i;
        let mut tris = Vec::with_capacity(4 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = vertices.len();
                let sw = vertices[corner(i, j)];
                let ne = vertices[corner(i + 1, j + 1)];
                vertices.push(midpoint(sw, ne));
                let (a, b, cc, d) = (
                    corner(i, j),
                    corner(i + 1, j),
                    corner(i + 1, j + 1),
                    corner(i, j + 1),
                );
                tris.push([c, a, b]);
                tris.push([c, b, cc]);
                tris.push([c, cc, d]);
                tris.push([c, d, a]);
            }
        }
        let n = vertices.len();
        let nt = tris.len();
        Mesh::assemble(domain, vertices, tris, vec![0; nt], vec![None; n])
    }

    /// The unit square split along the diagonal from (0,0) to (1,1).
    pub fn unit_square_two_triangles() -> Mesh {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        Mesh::from_triangles(Rect::unit(), vertices, &[[0, 1, 2], [0, 2, 3]])
            .expect("static mesh is valid")
    }

    pub(crate) fn assemble(
        domain: Rect,
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        levels: Vec<u32>,
        vertex_parents: Vec<Option<[usize; 2]>>,
    ) -> Result<Mesh, MeshError> {
        for (t, tri) in triangles.iter().enumerate() {
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a.is_nan() || a <= 0.0 {
                return Err(MeshError::Degenerate(t, a));
            }
        }
        let nv = vertices.len();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 8);
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = edge_key(a, b);
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        triangles: [NONE, NONE],
                        boundary: false,
                    });
                    edges.len() - 1
                });
                let e = &mut edges[id];
                if e.triangles[0] == NONE {
                    e.triangles[0] = t;
                } else if e.triangles[1] == NONE {
                    e.triangles[1] = t;
                } else {
                    return Err(MeshError::NonConforming(format!(
                        "edge ({}, {}) shared by more than two triangles",
                        key.0, key.1
                    )));
                }
                te[i] = id;
            }
            tri_edges.push(te);
        }
        let mut boundary_vertex = vec![false; nv];
        for e in edges.iter_mut() {
            if e.triangles[1] == NONE {
                e.boundary = true;
                boundary_vertex[e.vertices[0]] = true;
                boundary_vertex[e.vertices[1]] = true;
            }
        }
        let mut counts = vec![0usize; nv + 1];
        for tri in &triangles {
            for &v in tri {
                counts[v + 1] += 1;
            }
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let vt_offsets = counts.clone();
        let mut fill = counts;
        let mut vt_indices = vec![0usize; vt_offsets[nv]];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vt_indices[fill[v]] = t;
                fill[v] += 1;
            }
        }
        Ok(Mesh {
            generation: next_generation(),
            domain,
            vertices,
            triangles,
            levels,
            vertex_parents,
            edges,
            tri_edges,
            vt_offsets,
            vt_indices,
            boundary_vertex,
        })
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Bisection depth of each triangle relative to the initial mesh.
    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Endpoints of the edge a vertex bisects; `None` for initial vertices.
    pub fn vertex_parents(&self) -> &[Option<[usize; 2]>] {
        &self.vertex_parents
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge ids of a triangle, `i`-th entry opposite local vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn vertex_triangles(&self, v: usize) -> &[usize] {
        &self.vt_indices[self.vt_offsets[v]..self.vt_offsets[v + 1]]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        signed_area(p[0], p[1], p[2])
    }

    /// Longest edge length of a triangle.
    pub fn diameter(&self, t: usize) -> f64 {
        let p = self.triangle_points(t);
        dist2(p[0], p[1]).max(dist2(p[1], p[2])).max(dist2(p[2], p[0])).sqrt()
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        dist2(self.vertices[a], self.vertices[b]).sqrt()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let p = self.triangle_points(t);
        [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ]
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| triangle_min_angle(self.triangle_points(t)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_diameter(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| self.diameter(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Verifies orientation, edge sharing and that the boundary edges trace
    /// the rectangle exactly (which rules out hanging nodes).
    pub fn check_conforming(&self) -> Result<(), MeshError> {
        for t in 0..self.num_triangles() {
            let a = self.area(t);
            if !(a > 0.0) {
                return Err(MeshError::Degenerate(t, a));
            }
        }
        let mut boundary_len = 0.0;
        for (i, e) in self.edges.iter().enumerate() {
            let p = self.vertices[e.vertices[0]];
            let q = self.vertices[e.vertices[1]];
            if e.boundary {
                if !self.domain.segment_on_boundary(p, q) {
                    return Err(MeshError::NonConforming(format!(
                        "edge {i} has one triangle but is interior (hanging node)"
                    )));
                }
                boundary_len += self.edge_length(i);
            } else if self.domain.segment_on_boundary(p, q) {
                return Err(MeshError::NonConforming(format!(
                    "boundary edge {i} has two triangles"
                )));
            }
        }
        let per = self.domain.perimeter();
        if (boundary_len - per).abs() > 1e-10 * per {
            return Err(MeshError::NonConforming(format!(
                "boundary length {boundary_len} != perimeter {per}"
            )));
        }
        let area = self.total_area();
        if (area - self.domain.area()).abs() > 1e-10 * self.domain.area() {
            return Err(MeshError::NonConforming(format!(
                "covered area {area} != domain area {}",
                self.domain.area()
            )));
        }
        for (v, p) in self.vertices.iter().enumerate() {
            if self.boundary_vertex[v] != self.domain.on_boundary(*p) {
                return Err(MeshError::NonConforming(format!(
                    "vertex {v} boundary flag disagrees with its position"
                )));
            }
            if self.vertex_triangles(v).is_empty() {
                return Err(MeshError::NonConforming(format!("vertex {v} is unused")));
            }
        }
        Ok(())
    }

    /// Vertices sharing a triangle with `v`, excluding `v`, in ascending order.
    pub fn vertex_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .vertex_triangles(v)
            .iter()
            .flat_map(|&t| self.triangles[t])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub(crate) fn same_shape(&self, other: &Mesh) -> bool {
        self.vertices.len() == other.vertices.len()
            && self.triangles == other.triangles
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a[0].to_bits() == b[0].to_bits() && a[1].to_bits() == b[1].to_bits())
    }
}

pub(crate) fn triangle_min_angle(p: [[f64; 2]; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let cross = (u[0] * v[1] - u[1] * v[0]).abs();
        let dot = u[0] * v[0] + u[1] * v[1];
        best = best.min(cross.atan2(dot));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangle_square_uses_the_diagonal() {
        let m = Mesh::unit_square_two_triangles();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        for t in m.triangles() {
            let key = edge_key(t[1], t[2]);
            assert_eq!(key, (0, 2));
        }
        m.check_conforming().unwrap();
        assert_eq!(m.edges().iter().filter(|e| e.boundary).count(), 4);
    }

    #[test]
    fn criss_cross_counts_and_conformity() {
        let m = Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 4, 3).unwrap();
        assert_eq!(m.num_vertices(), 5 * 4 + 12);
        assert_eq!(m.num_triangles(), 48);
        m.check_conforming().unwrap();
        assert!((m.total_area() - 4.0).abs() < 1e-14);
        let square = Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 4, 4).unwrap();
        let quarter_pi = std::f64::consts::FRAC_PI_4;
        assert!((square.min_angle() - quarter_pi).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_and_inverted_input() {
        assert!(matches!(
            Mesh::from_triangles(Rect::unit(), vec![], &[]),
            Err(MeshError::InvalidInput(_))
        ));
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            Mesh::from_triangles(Rect::unit(), verts, &[[0, 1, 2]]),
            Err(MeshError::Degenerate(..))
        ));
    }

    #[test]
    fn hanging_node_is_detected() {
        // Three triangles where the bottom-right one is split without its neighbor.
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let m = Mesh::from_triangles(Rect::unit(), verts, &[[0, 1, 4], [1, 2, 4], [0, 2, 3]]);
        let err = m.unwrap().check_conforming().unwrap_err();
        assert!(matches!(err, MeshError::NonConforming(_)));
    }
}
