use std::collections::HashMap;

use super::{signed_area, Mesh, MeshError};
use crate::fem::FeFunction;

/// A target vertex expressed inside a source triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Location {
    pub triangle: usize,
    /// Barycentric weights matching the source triangle's vertex order.
    pub bary: [f64; 3],
}

impl Location {
    pub(crate) fn at_vertex(mesh: &Mesh, v: usize) -> Location {
        let t = mesh.vertex_triangles(v)[0];
        let local = mesh.triangles()[t].iter().position(|&x| x == v).unwrap();
        let mut bary = [0.0; 3];
        bary[local] = 1.0;
        Location { triangle: t, bary }
    }
}

/// P1 interpolation data from one mesh generation to another.
#[derive(Debug, Clone)]
pub struct TransferMap {
    source_generation: u64,
    target_generation: u64,
    source_triangles: Vec<[usize; 3]>,
    locations: Vec<Location>,
}

impl TransferMap {
    pub(crate) fn new(source: &Mesh, target: &Mesh, locations: Vec<Location>) -> Self {
        debug_assert_eq!(locations.len(), target.num_vertices());
        TransferMap {
            source_generation: source.generation(),
            target_generation: target.generation(),
            source_triangles: source.triangles().to_vec(),
            locations,
        }
    }

    pub fn identity(mesh: &Mesh) -> Self {
        let locations = (0..mesh.num_vertices())
            .map(|v| Location::at_vertex(mesh, v))
            .collect();
        TransferMap::new(mesh, mesh, locations)
    }

    /// Locates every target vertex in the source mesh. Vertices with
    /// bit-identical coordinates map onto source vertices exactly; the rest
    /// are found by bucketed point location.
    pub fn between(source: &Mesh, target: &Mesh) -> Result<Self, MeshError> {
        if source.generation() == target.generation() {
            return Ok(TransferMap::identity(source));
        }
        let exact: HashMap<(u64, u64), usize> = source
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| ((p[0].to_bits(), p[1].to_bits()), i))
            .collect();
        let grid = TriangleGrid::new(source);
        let mut locations = Vec::with_capacity(target.num_vertices());
        for p in target.vertices() {
            if let Some(&v) = exact.get(&(p[0].to_bits(), p[1].to_bits())) {
                locations.push(Location::at_vertex(source, v));
            } else {
                locations.push(grid.locate(source, *p)?);
            }
        }
        Ok(TransferMap::new(source, target, locations))
    }

    pub fn source_generation(&self) -> u64 {
        self.source_generation
    }

    pub fn target_generation(&self) -> u64 {
        self.target_generation
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub(crate) fn apply(&self, values: &[f64], components: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.locations.len() * components);
        for loc in &self.locations {
            let tri = self.source_triangles[loc.triangle];
            for c in 0..components {
                let mut acc = 0.0;
                for i in 0..3 {
                    if loc.bary[i] != 0.0 {
                        acc += loc.bary[i] * values[tri[i] * components + c];
                    }
                }
                out.push(acc);
            }
        }
        out
    }
}

/// Interpolates `f` onto the target mesh of `map`.
pub fn transfer(f: &FeFunction, map: &TransferMap) -> Result<FeFunction, MeshError> {
    if f.generation() != map.source_generation {
        return Err(MeshError::StaleFunction {
            expected: map.source_generation,
            found: f.generation(),
        });
    }
    let values = map.apply(f.values(), f.kind().components());
    Ok(FeFunction::from_parts(map.target_generation, f.kind(), values))
}

struct TriangleGrid {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl TriangleGrid {
    fn new(mesh: &Mesh) -> Self {
        let d = mesh.domain();
        let n = ((mesh.num_triangles() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (n, n);
        let dx = (d.x1 - d.x0) / nx as f64;
        let dy = (d.y1 - d.y0) / ny as f64;
        let mut cells = vec![Vec::new(); nx * ny];
        let cell_of = |x: f64, lo: f64, h: f64, n: usize| -> usize {
            (((x - lo) / h).floor().max(0.0) as usize).min(n - 1)
        };
        for t in 0..mesh.num_triangles() {
            let p = mesh.triangle_points(t);
            let (mut xmin, mut xmax, mut ymin, mut ymax) = (p[0][0], p[0][0], p[0][1], p[0][1]);
            for q in &p[1..] {
                xmin = xmin.min(q[0]);
                xmax = xmax.max(q[0]);
                ymin = ymin.min(q[1]);
                ymax = ymax.max(q[1]);
            }
            let (i0, i1) = (cell_of(xmin, d.x0, dx, nx), cell_of(xmax, d.x0, dx, nx));
            let (j0, j1) = (cell_of(ymin, d.y0, dy, ny), cell_of(ymax, d.y0, dy, ny));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(t);
                }
            }
        }
        TriangleGrid {
            x0: d.x0,
            y0: d.y0,
            dx,
            dy,
            nx,
            ny,
            cells,
        }
    }

    fn locate(&self, mesh: &Mesh, p: [f64; 2]) -> Result<Location, MeshError> {
        let i = (((p[0] - self.x0) / self.dx).floor().max(0.0) as usize).min(self.nx - 1);
        let j = (((p[1] - self.y0) / self.dy).floor().max(0.0) as usize).min(self.ny - 1);
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for &t in &self.cells[j * self.nx + i] {
            let q = mesh.triangle_points(t);
            let area = signed_area(q[0], q[1], q[2]);
            let bary = [
                signed_area(p, q[1], q[2]) / area,
                signed_area(q[0], p, q[2]) / area,
                signed_area(q[0], q[1], p) / area,
            ];
            let worst = bary[0].min(bary[1]).min(bary[2]);
            if best.map_or(true, |(w, _, _)| worst > w) {
                best = Some((worst, t, bary));
            }
        }
        match best {
            Some((worst, t, bary)) if worst >= -1e-10 => {
                let clamped = bary.map(|b| b.max(0.0));
                let s: f64 = clamped.iter().sum();
                Ok(Location {
                    triangle: t,
                    bary: clamped.map(|b| b / s),
                })
            }
            _ => Err(MeshError::PointLocation(p[0], p[1])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{coarsen, refine, Rect};

    fn linear(mesh: &Mesh) -> FeFunction {
        FeFunction::scalar_from_fn(mesh, |x, y| 2.0 * x + 3.0 * y)
    }

    #[test]
    fn linear_is_reproduced_on_refinement() {
        let m = Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 3, 3).unwrap();
        let (r, map) = refine(&m, &[0, 5, 17]).unwrap();
        let (r2, map2) = refine(&r, &[1, 2, 3]).unwrap();
        let f = transfer(&transfer(&linear(&m), &map).unwrap(), &map2).unwrap();
        for (v, p) in r2.vertices().iter().enumerate() {
            assert!((f.values()[v] - (2.0 * p[0] + 3.0 * p[1])).abs() < 1e-14);
        }
        for loc in map.locations() {
            assert!(loc.bary.iter().all(|&b| b >= 0.0));
            assert!((loc.bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_stays_constant() {
        let m = Mesh::unit_square_two_triangles();
        let (r, map) = refine(&m, &[0, 1]).unwrap();
        let f = FeFunction::scalar(&m, vec![4.25; 4]).unwrap();
        let g = transfer(&f, &map).unwrap();
        assert_eq!(g.generation(), r.generation());
        assert!(g.values().iter().all(|&v| v == 4.25));
    }

    #[test]
    fn coarsening_keeps_surviving_values() {
        let m = Mesh::unit_square_two_triangles();
        let (r, _) = refine(&m, &[0, 1]).unwrap();
        let all: Vec<usize> = (0..r.num_triangles()).collect();
        let f = FeFunction::scalar(&r, vec![1.0, -2.0, 3.5, 0.25, 9.0]).unwrap();
        let (c, map) = coarsen(&r, &all);
        let g = transfer(&f, &map).unwrap();
        assert_eq!(c.num_vertices(), 4);
        assert_eq!(g.values(), &[1.0, -2.0, 3.5, 0.25]);
    }

    #[test]
    fn stale_function_is_rejected() {
        let m = Mesh::unit_square_two_triangles();
        let (r, map) = refine(&m, &[0]).unwrap();
        let f = FeFunction::scalar(&r, vec![0.0; r.num_vertices()]).unwrap();
        assert!(matches!(transfer(&f, &map), Err(MeshError::StaleFunction { .. })));
    }

    #[test]
    fn point_location_between_unrelated_meshes() {
        let d = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let a = Mesh::criss_cross(d, 3, 3).unwrap();
        let b = Mesh::criss_cross(d, 5, 4).unwrap();
        let map = TransferMap::between(&a, &b).unwrap();
        let g = transfer(&linear(&a), &map).unwrap();
        for (v, p) in b.vertices().iter().enumerate() {
            assert!((g.values()[v] - (2.0 * p[0] + 3.0 * p[1])).abs() < 1e-12);
        }
    }
}
