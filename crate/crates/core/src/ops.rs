//! Blow-up operations on triangulations and fans, and their inverses.
//!
//! * (i) star subdivision of a face `(v1, v2, v3)`; the new vertex gets
//!   `v1 + v2 + v3`.
//! * (ii) subdivision of the edge `(v2, v3)` shared by `(v1, v2, v3)` and
//!   `(v4, v3, v2)`; the new vertex gets `v2 + v3`.
//! * C_k at a vertex `v` with neighbor cycle `v1..vk`: every edge `v vi` is
//!   subdivided by `wi` carrying `v + vi`, and the annulus between the `w` and
//!   `v` cycles is triangulated by `(vi, w(i+1), wi), (vi, v(i+1), w(i+1))`.
//!
//! Every operation is described by an [`OpRecord`] that names its location in
//! the triangulation it is applied to and the ids its new vertices receive in
//! the result. Surviving vertices keep their relative order and fill the
//! remaining ids, so inverse operations that delete vertices can be replayed
//! forward to the exact original labeling.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fan::{det3, FanAssignment, FanError, Vector3};
use crate::sphere::{validate, Face, SphereError, Triangulation, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("no face {0:?}")]
    NoSuchFace(Face),
    #[error("no edge ({0}, {1}) with the required flanking faces")]
    NoSuchEdge(VertexId, VertexId),
    #[error("no vertex {0} with the required neighbor cycle")]
    NoSuchVertex(VertexId),
    #[error("not unimodular: {0}")]
    NotUnimodular(String),
    #[error("vertex {vertex} has degree {found}, expected {expected}")]
    WrongDegree {
        vertex: VertexId,
        expected: usize,
        found: usize,
    },
    #[error("the tetrahedron admits no inverse operation")]
    TooSmall,
    #[error("both diagonals of the link of vertex {0} are already edges")]
    BothDiagonalsPresent(VertexId),
    #[error("C_k pattern mismatch at vertex {0}")]
    PatternMismatch(VertexId),
    #[error("invalid record: {0}")]
    BadRecord(String),
    #[error("script line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    I,
    II,
    Ck,
}

/// Location of a forward operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operation {
    /// (i) on the oriented face `(v1, v2, v3)`.
    SubdivideFace { face: Face },
    /// (ii) on the edge `(v2, v3)` with flanking vertices `(v1, v4)`.
    SubdivideEdge {
        edge: [VertexId; 2],
        flanks: [VertexId; 2],
    },
    /// C_k at `center` whose counter-clockwise neighbor cycle is `ring`.
    StarVertex {
        center: VertexId,
        ring: Vec<VertexId>,
    },
}

impl Operation {
    pub fn kind(&self) -> OpKind {
        match self {
            Operation::SubdivideFace { .. } => OpKind::I,
            Operation::SubdivideEdge { .. } => OpKind::II,
            Operation::StarVertex { .. } => OpKind::Ck,
        }
    }

    /// Number of vertices the operation creates.
    pub fn added_vertices(&self) -> usize {
        match self {
            Operation::StarVertex { ring, .. } => ring.len(),
            _ => 1,
        }
    }
}

/// A replayable forward operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpRecord {
    pub op: Operation,
    /// Ids of the created vertices in the result, in creation order
    /// (`w1..wk` for C_k).
    pub new_vertices: Vec<VertexId>,
}

impl OpRecord {
    pub fn kind(&self) -> OpKind {
        self.op.kind()
    }

    /// Record whose new vertices are appended after the existing `m`.
    pub fn appended(op: Operation, m: usize) -> OpRecord {
        let k = op.added_vertices();
        OpRecord {
            op,
            new_vertices: (m..m + k).collect(),
        }
    }
}

/// Anything the forward operations act on.
pub trait Subdivide: Sized {
    fn triangulation(&self) -> &Triangulation;
    fn apply(&self, record: &OpRecord) -> Result<Self, OpError>;
}

impl Subdivide for Triangulation {
    fn triangulation(&self) -> &Triangulation {
        self
    }

    fn apply(&self, record: &OpRecord) -> Result<Self, OpError> {
        Ok(apply_combinatorial(self, record)?.0)
    }
}

impl Subdivide for FanAssignment {
    fn triangulation(&self) -> &Triangulation {
        FanAssignment::triangulation(self)
    }

    fn apply(&self, record: &OpRecord) -> Result<Self, OpError> {
        let t = FanAssignment::triangulation(self);
        let vec = |i: VertexId| self.vector(i);
        let new_vectors = match &record.op {
            Operation::SubdivideFace { face: [a, b, c] } => {
                let d = det3(vec(*a), vec(*b), vec(*c))?;
                if d.abs() != 1 {
                    return Err(OpError::NotUnimodular(format!("det{:?} = {d}", [a, b, c])));
                }
                vec![vec(*a).checked_add(vec(*b))?.checked_add(vec(*c))?]
            }
            Operation::SubdivideEdge {
                edge: [v2, v3],
                flanks: [v1, v4],
            } => {
                let d1 = det3(vec(*v1), vec(*v2), vec(*v3))?;
                let d2 = det3(vec(*v4), vec(*v3), vec(*v2))?;
                if d1.abs() != 1 || d1 != d2 {
                    return Err(OpError::NotUnimodular(format!(
                        "flanking determinants {d1} and {d2}"
                    )));
                }
                vec![vec(*v2).checked_add(vec(*v3))?]
            }
            Operation::StarVertex { center, ring } => {
                let k = ring.len();
                let dets = (0..k)
                    .map(|i| det3(vec(*center), vec(ring[i]), vec(ring[(i + 1) % k])))
                    .collect::<Result<Vec<_>, _>>()?;
                if dets[0].abs() != 1 || dets.iter().any(|&d| d != dets[0]) {
                    return Err(OpError::NotUnimodular(format!(
                        "star determinants {dets:?} at {center}"
                    )));
                }
                ring.iter()
                    .map(|&r| vec(*center).checked_add(vec(r)))
                    .collect::<Result<Vec<_>, _>>()?
            }
        };
        let (result, id_map) = apply_combinatorial(t, record)?;
        let mut vectors = vec![Vector3::default(); result.vertex_count()];
        for (old, &new) in id_map.iter().enumerate() {
            vectors[new] = self.vector(old);
        }
        for (&id, v) in record.new_vertices.iter().zip(new_vectors) {
            vectors[id] = v;
        }
        Ok(FanAssignment::new(result, vectors)?)
    }
}

/// Applies a record to the triangulation; also returns where each old vertex
/// ends up.
fn apply_combinatorial(
    t: &Triangulation,
    record: &OpRecord,
) -> Result<(Triangulation, Vec<VertexId>), OpError> {
    let m = t.vertex_count();
    let in_range = |v: &VertexId| *v < m;
    let mut removed: Vec<Face> = Vec::new();
    let mut added: Vec<Face> = Vec::new();
    match &record.op {
        Operation::SubdivideFace { face } => {
            let [a, b, c] = *face;
            if !face.iter().all(in_range) || !t.has_face(*face) {
                return Err(OpError::NoSuchFace(*face));
            }
            let w = m;
            removed.push(*face);
            added.extend([[a, b, w], [b, c, w], [c, a, w]]);
        }
        Operation::SubdivideEdge {
            edge: [v2, v3],
            flanks: [v1, v4],
        } => {
            let (v1, v2, v3, v4) = (*v1, *v2, *v3, *v4);
            if ![v1, v2, v3, v4].iter().all(in_range)
                || !t.has_face([v1, v2, v3])
                || !t.has_face([v4, v3, v2])
            {
                return Err(OpError::NoSuchEdge(v2, v3));
            }
            let w = m;
            removed.extend([[v1, v2, v3], [v4, v3, v2]]);
            added.extend([[v1, v2, w], [v3, v1, w], [v2, v4, w], [v4, v3, w]]);
        }
        Operation::StarVertex { center, ring } => {
            let v = *center;
            let k = ring.len();
            if v >= m || k < 3 || t.rotation_from(v, ring[0]).as_deref() != Some(ring.as_slice()) {
                return Err(OpError::NoSuchVertex(v));
            }
            for i in 0..k {
                let (vi, vn) = (ring[i], ring[(i + 1) % k]);
                let (wi, wn) = (m + i, m + (i + 1) % k);
                removed.push([v, vi, vn]);
                added.extend([[v, wi, wn], [vi, wn, wi], [vi, vn, wn]]);
            }
        }
    }
    let extra = record.op.added_vertices();
    let total = m + extra;
    let mut ids = record.new_vertices.clone();
    ids.sort_unstable();
    ids.dedup();
    if record.new_vertices.len() != extra || ids.len() != extra || ids.iter().any(|&i| i >= total) {
        return Err(OpError::BadRecord(format!(
            "new vertex ids {:?} for {extra} vertices",
            record.new_vertices
        )));
    }
    // Surviving vertices fill the ids not taken by new vertices, in order.
    let mut id_map = Vec::with_capacity(total);
    let mut taken = ids.iter().peekable();
    let mut next = 0;
    for _ in 0..m {
        while taken.peek() == Some(&&next) {
            taken.next();
            next += 1;
        }
        id_map.push(next);
        next += 1;
    }
    id_map.extend(record.new_vertices.iter().copied());

    let removed_set: std::collections::HashSet<Face> =
        removed.iter().map(|f| normalize(*f)).collect();
    let mut faces: Vec<Face> = t
        .faces()
        .iter()
        .filter(|f| !removed_set.contains(*f))
        .copied()
        .chain(added)
        .map(|f| f.map(|x| id_map[x]))
        .collect();
    faces.sort_unstable();
    let result = validate(&faces)?;
    id_map.truncate(m);
    Ok((result, id_map))
}

fn normalize(f: Face) -> Face {
    let i = (0..3).min_by_key(|&i| f[i]).unwrap();
    [f[i], f[(i + 1) % 3], f[(i + 2) % 3]]
}

/// Operation (i) on `face` (either orientation); the new vertex is appended.
pub fn apply_i<S: Subdivide>(s: &S, face: Face) -> Result<(S, OpRecord), OpError> {
    let t = s.triangulation();
    let [a, b, c] = face;
    let oriented = if face.iter().all(|&v| v < t.vertex_count()) && t.has_face(face) {
        face
    } else {
        [a, c, b]
    };
    let rec = OpRecord::appended(Operation::SubdivideFace { face: oriented }, t.vertex_count());
    Ok((s.apply(&rec)?, rec))
}

/// Operation (ii) on the edge `(v2, v3)`; flanks are read off the
/// triangulation and the new vertex is appended.
pub fn apply_ii<S: Subdivide>(s: &S, v2: VertexId, v3: VertexId) -> Result<(S, OpRecord), OpError> {
    let t = s.triangulation();
    if v2.max(v3) >= t.vertex_count() || !t.is_edge(v2, v3) {
        return Err(OpError::NoSuchEdge(v2, v3));
    }
    let v1 = t.apex(v2, v3).unwrap();
    let v4 = t.apex(v3, v2).unwrap();
    let rec = OpRecord::appended(
        Operation::SubdivideEdge {
            edge: [v2, v3],
            flanks: [v1, v4],
        },
        t.vertex_count(),
    );
    Ok((s.apply(&rec)?, rec))
}

/// Operation C_k at `v`, `k = deg(v)`; new vertices are appended in ring order.
pub fn apply_ck<S: Subdivide>(s: &S, v: VertexId) -> Result<(S, OpRecord), OpError> {
    let t = s.triangulation();
    if v >= t.vertex_count() {
        return Err(OpError::NoSuchVertex(v));
    }
    let rec = OpRecord::appended(
        Operation::StarVertex {
            center: v,
            ring: t.rotation(v).to_vec(),
        },
        t.vertex_count(),
    );
    Ok((s.apply(&rec)?, rec))
}

fn smallest_by_rank(t: &Triangulation, candidates: impl Iterator<Item = VertexId>) -> Option<VertexId> {
    let c: Vec<VertexId> = candidates.collect();
    match c.len() {
        0 => None,
        1 => Some(c[0]),
        _ => {
            let rank = t.canonical_labeling().rank();
            c.into_iter().min_by_key(|&v| rank[v])
        }
    }
}

/// Removes `gone` and the faces touching it, adds `extra` faces, and compacts
/// ids. Returns the smaller triangulation and the old-to-new id map.
fn delete_vertices(
    t: &Triangulation,
    gone: &[VertexId],
    extra: &[Face],
) -> Result<(Triangulation, Vec<Option<VertexId>>), SphereError> {
    let mut map = vec![None; t.vertex_count()];
    let mut next = 0;
    for (v, slot) in map.iter_mut().enumerate() {
        if !gone.contains(&v) {
            *slot = Some(next);
            next += 1;
        }
    }
    let faces: Vec<Face> = t
        .faces()
        .iter()
        .filter(|f| !f.iter().any(|v| gone.contains(v)))
        .chain(extra)
        .map(|f| f.map(|v| map[v].unwrap()))
        .collect();
    Ok((validate(&faces)?, map))
}

/// A degree-3 vertex (smallest canonical rank) if `m >= 5`.
pub fn find_inverse_i(t: &Triangulation) -> Option<VertexId> {
    if t.vertex_count() < 5 {
        return None;
    }
    smallest_by_rank(t, (0..t.vertex_count()).filter(|&v| t.degree(v) == 3))
}

/// Inverse of (i): deletes the degree-3 vertex `v`, its link becomes a face.
pub fn apply_inverse_i(t: &Triangulation, v: VertexId) -> Result<(Triangulation, OpRecord), OpError> {
    if t.vertex_count() < 5 {
        return Err(OpError::TooSmall);
    }
    check_degree(t, v, 3)?;
    let link = t.rotation(v);
    let face = [link[0], link[1], link[2]];
    let (reduced, map) = delete_vertices(t, &[v], &[face])?;
    let rec = OpRecord {
        op: Operation::SubdivideFace {
            face: face.map(|x| map[x].unwrap()),
        },
        new_vertices: vec![v],
    };
    debug_assert_eq!(reduced.apply(&rec).as_ref(), Ok(t));
    Ok((reduced, rec))
}

fn check_degree(t: &Triangulation, v: VertexId, expected: usize) -> Result<(), OpError> {
    if v >= t.vertex_count() {
        return Err(OpError::NoSuchVertex(v));
    }
    if t.degree(v) != expected {
        return Err(OpError::WrongDegree {
            vertex: v,
            expected,
            found: t.degree(v),
        });
    }
    Ok(())
}

/// A degree-4 vertex (smallest canonical rank).
pub fn find_inverse_ii(t: &Triangulation) -> Option<VertexId> {
    smallest_by_rank(t, (0..t.vertex_count()).filter(|&v| t.degree(v) == 4))
}

/// Inverse of (ii): deletes the degree-4 vertex `v` and re-triangulates its
/// link quadrilateral by the first diagonal (in sorted order) that is not
/// already an edge.
pub fn apply_inverse_ii(t: &Triangulation, v: VertexId) -> Result<(Triangulation, OpRecord), OpError> {
    check_degree(t, v, 4)?;
    let r = t.rotation(v);
    let mut diagonals = [(r[0], r[2]), (r[1], r[3])];
    diagonals.sort_by_key(|&(a, b)| (a.min(b), a.max(b)));
    let &(a, b) = diagonals
        .iter()
        .find(|&&(a, b)| !t.is_edge(a, b))
        .ok_or(OpError::BothDiagonalsPresent(v))?;
    apply_inverse_ii_along(t, v, [a, b])
}

/// Inverse of (ii) restoring the given diagonal `{v2, v3}` of the link of the
/// degree-4 vertex `v`.
pub fn apply_inverse_ii_along(
    t: &Triangulation,
    v: VertexId,
    diagonal: [VertexId; 2],
) -> Result<(Triangulation, OpRecord), OpError> {
    check_degree(t, v, 4)?;
    let r = t.rotation(v);
    let i = (0..4)
        .find(|&i| {
            let d = [r[i], r[(i + 2) % 4]];
            d == diagonal || d == [diagonal[1], diagonal[0]]
        })
        .ok_or(OpError::NoSuchEdge(diagonal[0], diagonal[1]))?;
    if t.is_edge(diagonal[0], diagonal[1]) {
        return Err(OpError::NoSuchEdge(diagonal[0], diagonal[1]));
    }
    // Rotation of v read from v1 is [v1, v2, v4, v3].
    let (v2, v4, v3, v1) = (r[i], r[(i + 1) % 4], r[(i + 2) % 4], r[(i + 3) % 4]);
    // The flanks lose `v` and gain nothing.
    if let Some(&x) = [v1, v4].iter().find(|&&x| t.degree(x) < 4) {
        return Err(OpError::WrongDegree {
            vertex: x,
            expected: 4,
            found: t.degree(x),
        });
    }
    let (reduced, map) = delete_vertices(t, &[v], &[[v1, v2, v3], [v4, v3, v2]])?;
    let id = |x: VertexId| map[x].unwrap();
    let rec = OpRecord {
        op: Operation::SubdivideEdge {
            edge: [id(v2), id(v3)],
            flanks: [id(v1), id(v4)],
        },
        new_vertices: vec![v],
    };
    debug_assert_eq!(reduced.apply(&rec).as_ref(), Ok(t));
    Ok((reduced, rec))
}

/// Outer cycle of the C_k pattern at `v`, if `v` is the center of one: all
/// neighbors have degree 5, the outer vertices are distinct, form a cycle,
/// avoid `v` and its neighbors, are not adjacent to `v`, and have degree at
/// least 5.
pub fn ck_outer_ring(t: &Triangulation, v: VertexId) -> Option<Vec<VertexId>> {
    if v >= t.vertex_count() {
        return None;
    }
    let ws = t.rotation(v);
    let k = ws.len();
    if k < 3 || ws.iter().any(|&w| t.degree(w) != 5) {
        return None;
    }
    let mut inner = Vec::with_capacity(k);
    let mut outer = Vec::with_capacity(k);
    for j in 0..k {
        let r = t.rotation_from(ws[j], v)?;
        if r[1] != ws[(j + k - 1) % k] || r[4] != ws[(j + 1) % k] {
            return None;
        }
        inner.push(r[2]);
        outer.push(r[3]);
    }
    for j in 0..k {
        if inner[(j + 1) % k] != outer[j] {
            return None;
        }
    }
    let mut sorted = outer.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != k
        || outer
            .iter()
            .any(|&o| o == v || ws.contains(&o) || t.is_edge(o, v) || t.degree(o) < 5)
    {
        return None;
    }
    Some(outer)
}

/// A C_k-reducible vertex `(v, k)` with smallest canonical rank.
pub fn find_ck_reducible(t: &Triangulation) -> Option<(VertexId, usize)> {
    let v = smallest_by_rank(
        t,
        (0..t.vertex_count()).filter(|&v| ck_outer_ring(t, v).is_some()),
    )?;
    Some((v, t.degree(v)))
}

/// Inverse of C_k at `v`: deletes the `k` neighbors of `v` and joins `v` to the
/// outer cycle.
pub fn apply_inverse_ck(t: &Triangulation, v: VertexId) -> Result<(Triangulation, OpRecord), OpError> {
    let outer = ck_outer_ring(t, v).ok_or(OpError::PatternMismatch(v))?;
    let ws = t.rotation(v).to_vec();
    let k = ws.len();
    let extra: Vec<Face> = (0..k).map(|i| [v, outer[i], outer[(i + 1) % k]]).collect();
    let (reduced, map) =
        delete_vertices(t, &ws, &extra).map_err(|_| OpError::PatternMismatch(v))?;
    let id = |x: VertexId| map[x].unwrap();
    let ring: Vec<VertexId> = outer.iter().map(|&o| id(o)).collect();
    let rec = OpRecord {
        op: Operation::StarVertex { center: id(v), ring },
        new_vertices: ws,
    };
    debug_assert_eq!(reduced.apply(&rec).as_ref(), Ok(t));
    Ok((reduced, rec))
}

fn join(v: &[VertexId]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// One line of an operation script:
///
/// ```text
/// I a b c -> w
/// II v2 v3 | v1 v4 -> w
/// CK v | v1 v2 ... vk -> w1 w2 ... wk
/// ```
impl fmt::Display for OpRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let new = join(&self.new_vertices);
        match &self.op {
            Operation::SubdivideFace { face } => write!(f, "I {} -> {new}", join(face)),
            Operation::SubdivideEdge { edge, flanks } => {
                write!(f, "II {} | {} -> {new}", join(edge), join(flanks))
            }
            Operation::StarVertex { center, ring } => {
                write!(f, "CK {center} | {} -> {new}", join(ring))
            }
        }
    }
}

impl FromStr for OpRecord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let nums = |part: &str| -> Result<Vec<VertexId>, String> {
            part.split_whitespace()
                .map(|x| x.parse().map_err(|_| format!("bad vertex id {x:?}")))
                .collect()
        };
        let (lhs, rhs) = s.split_once("->").ok_or("missing '->'")?;
        let new_vertices = nums(rhs)?;
        let lhs = lhs.trim();
        let (kind, rest) = lhs.split_once(char::is_whitespace).ok_or("missing location")?;
        let op = match kind {
            "I" => {
                let v = nums(rest)?;
                let face: Face = v.try_into().map_err(|_| "I needs three vertices")?;
                Operation::SubdivideFace { face }
            }
            "II" => {
                let (e, fl) = rest.split_once('|').ok_or("II needs 'v2 v3 | v1 v4'")?;
                let edge: [VertexId; 2] = nums(e)?.try_into().map_err(|_| "II edge needs two vertices")?;
                let flanks: [VertexId; 2] =
                    nums(fl)?.try_into().map_err(|_| "II flanks need two vertices")?;
                Operation::SubdivideEdge { edge, flanks }
            }
            "CK" => {
                let (c, r) = rest.split_once('|').ok_or("CK needs 'v | v1 .. vk'")?;
                let c = nums(c)?;
                if c.len() != 1 {
                    return Err("CK needs one center".into());
                }
                Operation::StarVertex {
                    center: c[0],
                    ring: nums(r)?,
                }
            }
            other => return Err(format!("unknown operation {other:?}")),
        };
        Ok(OpRecord { op, new_vertices })
    }
}

/// Script text: one record per line, `#` starts a comment.
pub fn write_script(records: &[OpRecord]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

pub fn parse_script(text: &str) -> Result<Vec<OpRecord>, OpError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| l.parse().map_err(|msg| OpError::Parse { line, msg }))
        .collect()
}
