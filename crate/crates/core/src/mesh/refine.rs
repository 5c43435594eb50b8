use std::collections::HashMap;

use super::transfer::{Location, TransferMap};
use super::{edge_key, midpoint, Mesh, MeshError, NONE};

/// Position of a vertex as a convex combination of source-mesh vertices.
/// Supports have at most three entries since every new vertex lies in the
/// closure of one source triangle.
#[derive(Clone, Copy, Debug)]
struct SourceRep {
    len: usize,
    items: [(usize, f64); 3],
}

impl SourceRep {
    fn vertex(v: usize) -> Self {
        SourceRep {
            len: 1,
            items: [(v, 1.0), (NONE, 0.0), (NONE, 0.0)],
        }
    }

    fn average(a: &SourceRep, b: &SourceRep) -> Self {
        let mut out = SourceRep {
            len: 0,
            items: [(NONE, 0.0); 3],
        };
        for rep in [a, b] {
            for &(v, w) in &rep.items[..rep.len] {
                let half = 0.5 * w;
                match out.items[..out.len].iter_mut().find(|(u, _)| *u == v) {
                    Some(slot) => slot.1 += half,
                    None => {
                        assert!(out.len < 3, "midpoint support spans more than one source triangle");
                        out.items[out.len] = (v, half);
                        out.len += 1;
                    }
                }
            }
        }
        out
    }
}

struct Bisector {
    vertices: Vec<[f64; 2]>,
    parents: Vec<Option<[usize; 2]>>,
    reps: Vec<SourceRep>,
    vertex_origin: Vec<usize>,
    tris: Vec<[usize; 3]>,
    levels: Vec<u32>,
    origin: Vec<usize>,
    edge_tris: HashMap<(usize, usize), [usize; 2]>,
}

impl Bisector {
    fn new(source: &Mesh) -> Self {
        let mut edge_tris = HashMap::with_capacity(source.edges().len() * 2);
        for e in source.edges() {
            edge_tris.insert((e.vertices[0], e.vertices[1]), e.triangles);
        }
        let nv = source.num_vertices();
        Bisector {
            vertices: source.vertices().to_vec(),
            parents: source.vertex_parents().to_vec(),
            reps: (0..nv).map(SourceRep::vertex).collect(),
            vertex_origin: vec![NONE; nv],
            tris: source.triangles().to_vec(),
            levels: source.levels().to_vec(),
            origin: (0..source.num_triangles()).collect(),
            edge_tris,
        }
    }

    fn neighbor(&self, t: usize, a: usize, b: usize) -> usize {
        let pair = self.edge_tris[&edge_key(a, b)];
        if pair[0] == t {
            pair[1]
        } else {
            pair[0]
        }
    }

    fn detach(&mut self, t: usize) {
        let tri = self.tris[t];
        for i in 0..3 {
            let key = edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let slot = self.edge_tris.get_mut(&key).expect("edge present");
            if slot[0] == t {
                slot[0] = slot[1];
                slot[1] = NONE;
            } else {
                debug_assert_eq!(slot[1], t);
                slot[1] = NONE;
            }
            if slot[0] == NONE {
                self.edge_tris.remove(&key);
            }
        }
    }

    fn attach(&mut self, t: usize) {
        let tri = self.tris[t];
        for i in 0..3 {
            let key = edge_key(tri[(i + 1) % 3], tri[(i + 2) % 3]);
            let slot = self.edge_tris.entry(key).or_insert([NONE, NONE]);
            if slot[0] == NONE {
                slot[0] = t;
            } else {
                debug_assert_eq!(slot[1], NONE);
                slot[1] = t;
            }
        }
    }

    fn split(&mut self, t: usize, m: usize) {
        let [p, a, b] = self.tris[t];
        self.detach(t);
        self.tris[t] = [m, p, a];
        self.levels[t] += 1;
        let child = self.tris.len();
        self.tris.push([m, b, p]);
        self.levels.push(self.levels[t]);
        self.origin.push(self.origin[t]);
        self.attach(t);
        self.attach(child);
    }

    /// Bisects `t` at its refinement edge, first bisecting neighbors until
    /// they share that edge as their own refinement edge.
    fn bisect(&mut self, t: usize) {
        loop {
            let [_, a, b] = self.tris[t];
            let nb = self.neighbor(t, a, b);
            if nb == NONE {
                break;
            }
            let [_, c, d] = self.tris[nb];
            if edge_key(c, d) == edge_key(a, b) {
                break;
            }
            self.bisect(nb);
        }
        let [_, a, b] = self.tris[t];
        let nb = self.neighbor(t, a, b);
        let m = self.vertices.len();
        self.vertices.push(midpoint(self.vertices[a], self.vertices[b]));
        self.parents.push(Some([a, b]));
        let rep = SourceRep::average(&self.reps[a], &self.reps[b]);
        self.reps.push(rep);
        self.vertex_origin.push(self.origin[t]);
        self.split(t, m);
        if nb != NONE {
            self.split(nb, m);
        }
    }
}

/// Bisects every marked triangle at least once and closes the result to a
/// conforming mesh. The transfer map is exact: new vertices are located by
/// their dyadic position inside the source triangle they subdivide.
pub fn refine(mesh: &Mesh, marked: &[usize]) -> Result<(Mesh, TransferMap), MeshError> {
    if mesh.num_triangles() == 0 {
        return Err(MeshError::InvalidInput("cannot refine an empty mesh".into()));
    }
    if let Some(&bad) = marked.iter().find(|&&t| t >= mesh.num_triangles()) {
        return Err(MeshError::InvalidInput(format!("marked triangle {bad} does not exist")));
    }
    if marked.is_empty() {
        return Ok((mesh.clone(), TransferMap::identity(mesh)));
    }
    let mut order = marked.to_vec();
    order.sort_unstable();
    order.dedup();

    let n0 = mesh.num_triangles();
    let mut b = Bisector::new(mesh);
    for &t in &order {
        // A marked triangle already split by an earlier closure keeps its
        // index for the first child, which then has a deeper level.
        if b.levels[t] == mesh.levels()[t] {
            b.bisect(t);
        }
    }
    debug_assert!(order.iter().all(|&t| t < n0 && b.levels[t] > mesh.levels()[t]));

    let nv_old = mesh.num_vertices();
    let mut locations = Vec::with_capacity(b.vertices.len());
    for v in 0..nv_old {
        locations.push(Location::at_vertex(mesh, v));
    }
    for v in nv_old..b.vertices.len() {
        let st = b.vertex_origin[v];
        let tri = mesh.triangles()[st];
        let rep = &b.reps[v];
        let mut bary = [0.0; 3];
        for &(sv, w) in &rep.items[..rep.len] {
            let local = tri
                .iter()
                .position(|&x| x == sv)
                .expect("new vertex lies in its origin triangle");
            bary[local] += w;
        }
        locations.push(Location { triangle: st, bary });
    }
    let refined = Mesh::assemble(mesh.domain(), b.vertices, b.tris, b.levels, b.parents)?;
    let map = TransferMap::new(mesh, &refined, locations);
    Ok((refined, map))
}
