//! Combinatorial simplicial 2-spheres.
//!
//! A [`Triangulation`] stores a coherently oriented face list together with the
//! induced rotation system: for every vertex, its neighbors in counter-clockwise
//! cyclic order. Face `(v, a, b)` is positively oriented exactly when `b`
//! follows `a` in the rotation of `v`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Dense vertex index in `0..m`.
pub type VertexId = usize;

/// An oriented triangle `(a, b, c)`.
pub type Face = [VertexId; 3];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SphereError {
    #[error("edge {{{0}, {1}}} lies in {2} faces, expected 2")]
    NotClosed(VertexId, VertexId, usize),
    #[error("not a simplicial complex: {0}")]
    NotSimplicial(String),
    #[error("not a 2-sphere: {0}")]
    NotSphere(String),
    #[error("flip of edge {{{0}, {1}}} is blocked: the opposite diagonal is already an edge")]
    FlipBlocked(VertexId, VertexId),
    #[error("edge {{{0}, {1}}} does not exist")]
    NoSuchEdge(VertexId, VertexId),
}

/// An oriented simplicial 2-sphere.
///
/// Equality is structural: two values are equal iff they have the same vertex
/// count and the same set of oriented faces.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Triangulation {
    // Each rotation starts at its smallest neighbor.
    rotation: Vec<Vec<VertexId>>,
    // Each face starts at its smallest vertex; the list is sorted.
    faces: Vec<Face>,
}

impl fmt::Debug for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Triangulation")
            .field("m", &self.vertex_count())
            .field("faces", &self.faces)
            .finish()
    }
}

fn normalize_face(f: Face) -> Face {
    let i = (0..3).min_by_key(|&i| f[i]).unwrap();
    [f[i], f[(i + 1) % 3], f[(i + 2) % 3]]
}

fn normalize_cycle(cycle: &mut [VertexId]) {
    if let Some(i) = (0..cycle.len()).min_by_key(|&i| cycle[i]) {
        cycle.rotate_left(i);
    }
}

impl Triangulation {
    /// Builds a triangulation from a rotation system that is already known to
    /// describe a valid sphere.
    pub(crate) fn from_rotation_trusted(mut rotation: Vec<Vec<VertexId>>) -> Self {
        for r in rotation.iter_mut() {
            normalize_cycle(r);
        }
        let mut faces = Vec::with_capacity(2 * rotation.len());
        for (v, r) in rotation.iter().enumerate() {
            for i in 0..r.len() {
                let (a, b) = (r[i], r[(i + 1) % r.len()]);
                if v < a && v < b {
                    faces.push([v, a, b]);
                }
            }
        }
        faces.sort_unstable();
        let t = Triangulation { rotation, faces };
        debug_assert!(t.check_counts());
        t
    }

    fn check_counts(&self) -> bool {
        let m = self.vertex_count();
        self.face_count() + 4 == 2 * m && self.edge_count() + 6 == 3 * m
    }

    /// Number of vertices `m`.
    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn edge_count(&self) -> usize {
        self.rotation.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Oriented faces, each starting at its smallest vertex, sorted.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Counter-clockwise neighbor cycle of `v`, starting at its smallest neighbor.
    pub fn rotation(&self, v: VertexId) -> &[VertexId] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<VertexId>] {
        &self.rotation
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.rotation[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.rotation.iter().map(Vec::len).collect()
    }

    pub fn min_degree(&self) -> usize {
        self.rotation.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_edge(&self, a: VertexId, b: VertexId) -> bool {
        a != b && self.rotation[a].contains(&b)
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (a, r) in self.rotation.iter().enumerate() {
            out.extend(r.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out.sort_unstable();
        out
    }

    /// Third vertex `c` of the face `(a, b, c)` containing the directed edge `a -> b`.
    pub fn apex(&self, a: VertexId, b: VertexId) -> Option<VertexId> {
        let r = &self.rotation[a];
        let i = r.iter().position(|&x| x == b)?;
        Some(r[(i + 1) % r.len()])
    }

    /// Whether the oriented face exists with this orientation.
    pub fn has_face(&self, face: Face) -> bool {
        self.faces.binary_search(&normalize_face(face)).is_ok()
    }

    /// Rotation of `v` read starting from neighbor `start`.
    pub fn rotation_from(&self, v: VertexId, start: VertexId) -> Option<Vec<VertexId>> {
        let r = &self.rotation[v];
        let i = r.iter().position(|&x| x == start)?;
        let mut out = r.clone();
        out.rotate_left(i);
        Some(out)
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut p = BTreeMap::new();
        for r in &self.rotation {
            *p.entry(r.len()).or_insert(0) += 1;
        }
        let profile = DegreeProfile {
            counts: p,
            m: self.vertex_count(),
        };
        assert_eq!(profile.euler_sum(), 12, "Euler relation violated");
        profile
    }

    /// The same complex with every face orientation reversed.
    pub fn mirrored(&self) -> Triangulation {
        let rotation = self
            .rotation
            .iter()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        Triangulation::from_rotation_trusted(rotation)
    }

    /// Renames vertex `v` to `perm[v]`. `perm` must be a permutation of `0..m`.
    pub fn relabeled(&self, perm: &[VertexId]) -> Triangulation {
        assert_eq!(perm.len(), self.vertex_count());
        let mut rotation = vec![Vec::new(); perm.len()];
        for (v, r) in self.rotation.iter().enumerate() {
            rotation[perm[v]] = r.iter().map(|&u| perm[u]).collect();
        }
        Triangulation::from_rotation_trusted(rotation)
    }

    /// Flips the edge `{a, b}`: faces `(a,b,c), (b,a,d)` become `(c,d,b), (d,c,a)`.
    pub fn flip(&self, a: VertexId, b: VertexId) -> Result<Triangulation, SphereError> {
        let m = self.vertex_count();
        if a >= m || b >= m || !self.is_edge(a, b) {
            return Err(SphereError::NoSuchEdge(a, b));
        }
        let mut rotation = self.rotation.clone();
        flip_in_place(&mut rotation, a, b).ok_or(SphereError::FlipBlocked(a, b))?;
        Ok(Triangulation::from_rotation_trusted(rotation))
    }

    /// Subgraph induced on the vertices of degree at least 6.
    pub fn high_degree_subcomplex(&self) -> Subgraph {
        let vertices: Vec<VertexId> = (0..self.vertex_count())
            .filter(|&v| self.degree(v) >= 6)
            .collect();
        let edges = self
            .edges()
            .into_iter()
            .filter(|&(a, b)| self.degree(a) >= 6 && self.degree(b) >= 6)
            .collect();
        Subgraph { vertices, edges }
    }

    /// Vertex order in which faces are first reached by a breadth-first walk
    /// over the face-adjacency graph, starting from the first face.
    pub fn face_bfs_vertex_order(&self) -> Vec<VertexId> {
        let mut index: HashMap<Face, usize> = HashMap::with_capacity(self.faces.len());
        for (i, &f) in self.faces.iter().enumerate() {
            index.insert(f, i);
        }
        let mut seen_face = vec![false; self.faces.len()];
        let mut seen_vertex = vec![false; self.vertex_count()];
        let mut order = Vec::with_capacity(self.vertex_count());
        let mut queue = VecDeque::from([0usize]);
        seen_face[0] = true;
        while let Some(fi) = queue.pop_front() {
            let f = self.faces[fi];
            for &v in &f {
                if !seen_vertex[v] {
                    seen_vertex[v] = true;
                    order.push(v);
                }
            }
            for i in 0..3 {
                let (x, y) = (f[i], f[(i + 1) % 3]);
                let z = self.apex(y, x).expect("closed surface");
                let g = index[&normalize_face([y, x, z])];
                if !seen_face[g] {
                    seen_face[g] = true;
                    queue.push_back(g);
                }
            }
        }
        order
    }
}

/// Flips edge `{a, b}` in a raw rotation system. Returns `None` when the
/// opposite diagonal is already an edge.
pub(crate) fn flip_in_place(rot: &mut [Vec<VertexId>], a: VertexId, b: VertexId) -> Option<()> {
    let ra = &rot[a];
    let ia = ra.iter().position(|&x| x == b)?;
    let c = ra[(ia + 1) % ra.len()];
    let d = ra[(ia + ra.len() - 1) % ra.len()];
    if rot[c].contains(&d) {
        return None;
    }
    rot[a].remove(ia);
    let ib = rot[b].iter().position(|&x| x == a)?;
    rot[b].remove(ib);
    // rot[c] contains ... a, b ...; insert d between them.
    let ic = rot[c].iter().position(|&x| x == a)?;
    rot[c].insert(ic + 1, d);
    // rot[d] contains ... b, a ...; insert c between them.
    let id = rot[d].iter().position(|&x| x == b)?;
    rot[d].insert(id + 1, c);
    Some(())
}

/// Validates an arbitrary list of vertex triples as a simplicial 2-sphere.
///
/// Input triples may be oriented inconsistently. The first face keeps its given
/// orientation and the rest are re-oriented to match it.
pub fn validate(faces: &[Face]) -> Result<Triangulation, SphereError> {
    if faces.is_empty() {
        return Err(SphereError::NotSphere("no faces".into()));
    }
    let m = faces.iter().flatten().max().unwrap() + 1;
    let mut seen = HashSet::with_capacity(faces.len());
    for f in faces {
        if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
            return Err(SphereError::NotSimplicial(format!(
                "face {f:?} repeats a vertex"
            )));
        }
        let mut s = *f;
        s.sort_unstable();
        if !seen.insert(s) {
            return Err(SphereError::NotSimplicial(format!("duplicate face {s:?}")));
        }
    }

    let mut edge_faces: HashMap<(VertexId, VertexId), Vec<usize>> = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for j in 0..3 {
            let (x, y) = (f[j], f[(j + 1) % 3]);
            edge_faces.entry((x.min(y), x.max(y))).or_default().push(i);
        }
    }
    let mut edge_list: Vec<_> = edge_faces.iter().collect();
    edge_list.sort_unstable_by_key(|(k, _)| **k);
    for (&(x, y), fs) in &edge_list {
        if fs.len() != 2 {
            return Err(SphereError::NotClosed(x, y, fs.len()));
        }
    }

    // Orient coherently by walking the face-adjacency graph.
    let has_directed = |f: &Face, x: VertexId, y: VertexId| {
        (0..3).any(|j| f[j] == x && f[(j + 1) % 3] == y)
    };
    let mut oriented: Vec<Option<Face>> = vec![None; faces.len()];
    oriented[0] = Some(faces[0]);
    let mut queue = VecDeque::from([0usize]);
    let mut reached = 1;
    while let Some(i) = queue.pop_front() {
        let f = oriented[i].unwrap();
        for j in 0..3 {
            let (x, y) = (f[j], f[(j + 1) % 3]);
            let fs = &edge_faces[&(x.min(y), x.max(y))];
            let g = if fs[0] == i { fs[1] } else { fs[0] };
            // g must traverse the edge as y -> x.
            let want = if has_directed(&faces[g], y, x) {
                faces[g]
            } else {
                let r = faces[g];
                [r[0], r[2], r[1]]
            };
            match oriented[g] {
                Some(existing) if existing != want => {
                    return Err(SphereError::NotSphere("non-orientable".into()));
                }
                Some(_) => {}
                None => {
                    oriented[g] = Some(want);
                    reached += 1;
                    queue.push_back(g);
                }
            }
        }
    }
    if reached != faces.len() {
        return Err(SphereError::NotSphere("face-adjacency graph is disconnected".into()));
    }

    let mut succ: Vec<HashMap<VertexId, VertexId>> = vec![HashMap::new(); m];
    for f in oriented.iter().map(|f| f.unwrap()) {
        for j in 0..3 {
            succ[f[j]].insert(f[(j + 1) % 3], f[(j + 2) % 3]);
        }
    }
    if let Some(v) = (0..m).find(|&v| succ[v].is_empty()) {
        return Err(SphereError::NotSphere(format!("vertex {v} is isolated")));
    }
    let e = edge_faces.len();
    let chi = m as i64 - e as i64 + faces.len() as i64;
    if chi != 2 {
        return Err(SphereError::NotSphere(format!(
            "Euler characteristic {chi}, expected 2"
        )));
    }

    let mut rotation = Vec::with_capacity(m);
    for (v, s) in succ.iter().enumerate() {
        let start = *s.keys().min().unwrap();
        let mut cycle = vec![start];
        let mut cur = s[&start];
        while cur != start {
            cycle.push(cur);
            cur = match s.get(&cur) {
                Some(&n) => n,
                None => return Err(SphereError::NotSphere(format!("link of {v} is open"))),
            };
            if cycle.len() > s.len() {
                return Err(SphereError::NotSphere(format!("link of {v} is not a cycle")));
            }
        }
        if cycle.len() != s.len() {
            return Err(SphereError::NotSphere(format!(
                "link of vertex {v} is pinched"
            )));
        }
        rotation.push(cycle);
    }
    Ok(Triangulation::from_rotation_trusted(rotation))
}

/// Vertex-degree statistics `p(k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeProfile {
    pub counts: BTreeMap<usize, usize>,
    pub m: usize,
}

impl DegreeProfile {
    pub fn count(&self, k: usize) -> usize {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// `sum (6 - k) p(k)`; equals 12 on every 2-sphere.
    pub fn euler_sum(&self) -> i64 {
        self.counts
            .iter()
            .map(|(&k, &c)| (6 - k as i64) * c as i64)
            .sum()
    }

    /// Label of the form `5^12 6^2` over degrees at least 5.
    pub fn label(&self) -> String {
        self.counts
            .iter()
            .filter(|(&k, _)| k >= 5)
            .map(|(k, c)| format!("{k}^{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A plain graph given by vertex and edge lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl Subgraph {
    /// Whether the graph is a single cycle through all of its vertices.
    pub fn is_cycle(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 || self.edges.len() != n {
            return false;
        }
        let mut adj: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        if self.vertices.iter().any(|v| adj.get(v).map_or(0, Vec::len) != 2) {
            return false;
        }
        let (mut prev, mut cur, mut len) = (self.vertices[0], adj[&self.vertices[0]][0], 1);
        while cur != self.vertices[0] {
            let next = adj[&cur].iter().copied().find(|&x| x != prev).unwrap();
            prev = cur;
            cur = next;
            len += 1;
        }
        len == n
    }
}

/// The boundary of the tetrahedron.
pub fn tetrahedron() -> Triangulation {
    validate(&[[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]).unwrap()
}

/// The boundary of the octahedron with antipodal pairs `(0,1), (2,3), (4,5)`.
pub fn octahedron() -> Triangulation {
    validate(&[
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ])
    .unwrap()
}

/// The icosahedron as a gyroelongated pentagonal bipyramid: apex 0, upper ring
/// 1..=5, lower ring 6..=10, apex 11.
pub fn icosahedron() -> Triangulation {
    let mut faces = Vec::new();
    for i in 0..5 {
        let (u, u1) = (1 + i, 1 + (i + 1) % 5);
        let (l, l1) = (6 + i, 6 + (i + 1) % 5);
        faces.push([0, u, u1]);
        faces.push([u, l, u1]);
        faces.push([u1, l, l1]);
        faces.push([11, l1, l]);
    }
    validate(&faces).unwrap()
}

/// Stacked sphere obtained from the tetrahedron by repeatedly inserting a
/// degree-3 vertex into a face. `fan_out` selects the face used at each step:
/// `false` always subdivides a face at the newest vertex (a stacked path),
/// `true` prefers faces of the original tetrahedron while any remain.
pub fn stacked_sphere(m: usize, fan_out: bool) -> Triangulation {
    assert!(m >= 4);
    let mut faces: Vec<Face> = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
    for w in 4..m {
        let idx = if fan_out {
            faces
                .iter()
                .position(|f| f.iter().all(|&x| x < 4) || f.contains(&(w - 1)))
                .unwrap()
        } else {
            faces.iter().position(|f| f.contains(&(w - 1))).unwrap()
        };
        let [a, b, c] = faces.swap_remove(idx);
        faces.extend([[a, b, w], [b, c, w], [c, a, w]]);
    }
    validate(&faces).unwrap()
}
