use super::transfer::{Location, TransferMap};
use super::{Mesh, NONE};

/// Reverses one bisection around every vertex whose incident triangles are
/// all marked sibling pairs having that vertex as their newest vertex.
/// Initial-mesh vertices are never removed; other requests are skipped.
pub fn coarsen(mesh: &Mesh, marked: &[usize]) -> (Mesh, TransferMap) {
    let nt = mesh.num_triangles();
    let mut is_marked = vec![false; nt];
    for &t in marked {
        if t < nt {
            is_marked[t] = true;
        }
    }
    let tris = mesh.triangles();
    let mut removed_vertex = vec![false; mesh.num_vertices()];
    let mut replacement: Vec<Option<[usize; 3]>> = vec![None; nt];
    let mut dropped = vec![false; nt];
    let mut any = false;

    for v in 0..mesh.num_vertices() {
        let Some([a, b]) = mesh.vertex_parents()[v] else {
            continue;
        };
        let around = mesh.vertex_triangles(v);
        let expected = if mesh.is_boundary_vertex(v) { 2 } else { 4 };
        if around.len() != expected
            || around.iter().any(|&t| tris[t][0] != v || !is_marked[t])
        {
            continue;
        }
        // First child [v, p, x] pairs with second child [v, y, p] where
        // {x, y} is the bisected edge.
        let mut pairs = Vec::with_capacity(2);
        let mut used = [false; 4];
        for (i, &t1) in around.iter().enumerate() {
            let [_, p, x] = tris[t1];
            if x != a && x != b {
                continue;
            }
            let partner = around.iter().enumerate().find(|&(j, &t2)| {
                let [_, y, q] = tris[t2];
                j != i && q == p && (y == a || y == b) && y != x
            });
            if let Some((j, &t2)) = partner {
                pairs.push((t1, t2));
                used[i] = true;
                used[j] = true;
            }
        }
        if pairs.len() * 2 != expected || used[..expected].iter().any(|u| !u) {
            continue;
        }
        for (t1, t2) in pairs {
            let [_, p, x] = tris[t1];
            let y = tris[t2][1];
            replacement[t1] = Some([p, x, y]);
            dropped[t2] = true;
        }
        removed_vertex[v] = true;
        any = true;
    }

    if !any {
        return (mesh.clone(), TransferMap::identity(mesh));
    }

    let mut new_index = vec![NONE; mesh.num_vertices()];
    let mut vertices = Vec::new();
    let mut parents = Vec::new();
    for v in 0..mesh.num_vertices() {
        if !removed_vertex[v] {
            new_index[v] = vertices.len();
            vertices.push(mesh.vertices()[v]);
            parents.push(mesh.vertex_parents()[v]);
        }
    }
    for p in parents.iter_mut().flatten() {
        *p = p.map(|x| {
            debug_assert_ne!(new_index[x], NONE, "parent of a surviving vertex was removed");
            new_index[x]
        });
    }
    let mut new_tris = Vec::with_capacity(nt);
    let mut levels = Vec::with_capacity(nt);
    for t in 0..nt {
        if dropped[t] {
            continue;
        }
        match replacement[t] {
            Some(parent) => {
                new_tris.push(parent.map(|x| new_index[x]));
                levels.push(mesh.levels()[t] - 1);
            }
            None => {
                new_tris.push(tris[t].map(|x| new_index[x]));
                levels.push(mesh.levels()[t]);
            }
        }
    }
    let coarse = Mesh::assemble(mesh.domain(), vertices, new_tris, levels, parents)
        .expect("bisection reversal preserves validity");
    let locations = (0..mesh.num_vertices())
        .filter(|&v| !removed_vertex[v])
        .map(|v| Location::at_vertex(mesh, v))
        .collect();
    let map = TransferMap::new(mesh, &coarse, locations);
    (coarse, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{refine, Rect};

    #[test]
    fn empty_mark_set_is_noop() {
        let m = Mesh::criss_cross(Rect::unit(), 2, 2).unwrap();
        let (r, _) = refine(&m, &[0, 1, 2]).unwrap();
        let (c, _) = coarsen(&r, &[]);
        assert!(c.same_shape(&r));
    }

    #[test]
    fn refine_all_then_coarsen_all_round_trips() {
        let m = Mesh::unit_square_two_triangles();
        let (r, _) = refine(&m, &[0, 1]).unwrap();
        let all: Vec<usize> = (0..r.num_triangles()).collect();
        let (c, _) = coarsen(&r, &all);
        assert!(c.same_shape(&m));
        assert_eq!(c.levels(), m.levels());
    }

    #[test]
    fn one_marked_sibling_changes_nothing() {
        let m = Mesh::unit_square_two_triangles();
        let (r, _) = refine(&m, &[0, 1]).unwrap();
        let (c, _) = coarsen(&r, &[0]);
        assert!(c.same_shape(&r));
        let (c, _) = coarsen(&r, &[0, 2]);
        assert!(c.same_shape(&r));
    }

    #[test]
    fn initial_vertices_survive() {
        let m = Mesh::criss_cross(Rect::unit(), 2, 2).unwrap();
        let all: Vec<usize> = (0..m.num_triangles()).collect();
        let (c, _) = coarsen(&m, &all);
        assert!(c.same_shape(&m));
    }

    #[test]
    fn criss_cross_round_trip_is_bit_exact() {
        let m = Mesh::criss_cross(Rect::new(-1.0, 1.0, -1.0, 1.0), 4, 4).unwrap();
        let all: Vec<usize> = (0..m.num_triangles()).collect();
        let (r, _) = refine(&m, &all).unwrap();
        let all: Vec<usize> = (0..r.num_triangles()).collect();
        let (c, _) = coarsen(&r, &all);
        assert!(c.same_shape(&m));
    }
}
