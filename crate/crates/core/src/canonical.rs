//! Canonical codes for triangulations up to isomorphism (including mirror images).
//!
//! For every directed edge `u -> v` and both rotation directions, vertices are
//! numbered breadth-first along the rotation system, starting at `u` with
//! reference neighbor `v`. Each vertex contributes its neighbor numbers in
//! rotation order followed by a `0`. The lexicographically smallest such code
//! is canonical. Triangulations of the sphere are 3-connected, so the
//! embedding is unique up to reflection and equal codes mean isomorphic
//! complexes.

use crate::sphere::{Triangulation, VertexId};

/// Canonical code; the same bytes as a planar-code record body with 1-based
/// neighbors, 0-terminated per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    pub code: Vec<u16>,
}

/// Result of canonical labeling: `order[i]` is the original vertex that
/// receives canonical index `i`; `mirrored` tells whether the minimizing
/// traversal ran clockwise.
#[derive(Debug, Clone)]
pub struct CanonicalLabeling {
    pub form: CanonicalForm,
    pub order: Vec<VertexId>,
    pub mirrored: bool,
}

impl CanonicalLabeling {
    /// Canonical rank of each original vertex.
    pub fn rank(&self) -> Vec<usize> {
        let mut rank = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            rank[v] = i;
        }
        rank
    }
}

struct Scratch {
    label: Vec<u16>,
    reference: Vec<usize>,
    queue: Vec<VertexId>,
    code: Vec<u16>,
}

/// Builds the code for one starting directed edge; aborts as soon as the code
/// exceeds `best`. Returns `true` if a new strictly smaller code was produced.
fn try_start(
    rot: &[Vec<VertexId>],
    u: VertexId,
    start_ref: usize,
    backwards: bool,
    best: &[u16],
    s: &mut Scratch,
) -> bool {
    let n = rot.len();
    s.label.iter_mut().for_each(|l| *l = 0);
    s.queue.clear();
    s.code.clear();
    s.label[u] = 1;
    s.reference[u] = start_ref;
    s.queue.push(u);
    let mut next = 2u16;
    let mut smaller = best.is_empty();
    let mut head = 0;
    while head < s.queue.len() {
        let x = s.queue[head];
        head += 1;
        let r = &rot[x];
        let d = r.len();
        let i0 = s.reference[x];
        for step in 0..d {
            let i = if backwards { (i0 + d - step) % d } else { (i0 + step) % d };
            let y = r[i];
            if s.label[y] == 0 {
                s.label[y] = next;
                next += 1;
                s.reference[y] = rot[y].iter().position(|&z| z == x).unwrap();
                s.queue.push(y);
            }
            let val = s.label[y];
            if !smaller {
                let b = best[s.code.len()];
                if val > b {
                    return false;
                }
                if val < b {
                    smaller = true;
                }
            }
            s.code.push(val);
        }
        if !smaller && best[s.code.len()] != 0 {
            smaller = true;
        }
        s.code.push(0);
    }
    debug_assert_eq!(s.queue.len(), n);
    smaller
}

fn canonical_raw(rot: &[Vec<VertexId>], want_order: bool) -> (Vec<u16>, Vec<VertexId>, bool) {
    let n = rot.len();
    let mut s = Scratch {
        label: vec![0; n],
        reference: vec![0; n],
        queue: Vec::with_capacity(n),
        code: Vec::with_capacity(rot.iter().map(Vec::len).sum::<usize>() + n),
    };
    let mut best: Vec<u16> = Vec::new();
    let mut best_order = Vec::new();
    let mut best_mirror = false;
    // Only vertices of minimum degree can start a minimal code: the first
    // block is the start's degree followed by a 0.
    let min_deg = rot.iter().map(Vec::len).min().unwrap_or(0);
    for backwards in [false, true] {
        for (u, r) in rot.iter().enumerate() {
            if r.len() != min_deg {
                continue;
            }
            for i in 0..r.len() {
                if try_start(rot, u, i, backwards, &best, &mut s) {
                    std::mem::swap(&mut best, &mut s.code);
                    if want_order {
                        best_order.clone_from(&s.queue);
                        best_mirror = backwards;
                    }
                }
            }
        }
    }
    (best, best_order, best_mirror)
}

/// Canonical code of a raw rotation system.
pub(crate) fn canonical_code(rot: &[Vec<VertexId>]) -> Vec<u16> {
    canonical_raw(rot, false).0
}

/// Rotation system encoded by a canonical code (counter-clockwise in the code's
/// own orientation).
pub(crate) fn decode_rotation(code: &[u16]) -> Vec<Vec<VertexId>> {
    let mut rot = Vec::new();
    let mut cur = Vec::new();
    for &c in code {
        if c == 0 {
            rot.push(std::mem::take(&mut cur));
        } else {
            cur.push(c as usize - 1);
        }
    }
    rot
}

impl CanonicalForm {
    pub fn vertex_count(&self) -> usize {
        self.code.iter().filter(|&&c| c == 0).count()
    }

    /// Degree of every vertex in canonical numbering.
    pub fn degrees(&self) -> Vec<usize> {
        self.code
            .split(|&c| c == 0)
            .take(self.vertex_count())
            .map(<[u16]>::len)
            .collect()
    }

    pub fn min_degree(&self) -> usize {
        self.degrees().into_iter().min().unwrap_or(0)
    }

    /// The representative triangulation in canonical numbering.
    pub fn to_triangulation(&self) -> Triangulation {
        Triangulation::from_rotation_trusted(decode_rotation(&self.code))
    }
}

impl Triangulation {
    pub fn canonical_form(&self) -> CanonicalForm {
        CanonicalForm {
            code: canonical_code(self.rotations()),
        }
    }

    pub fn canonical_labeling(&self) -> CanonicalLabeling {
        let (code, order, mirrored) = canonical_raw(self.rotations(), true);
        CanonicalLabeling {
            form: CanonicalForm { code },
            order,
            mirrored,
        }
    }

    /// Combinatorial isomorphism, reflections allowed.
    pub fn is_isomorphic(&self, other: &Triangulation) -> bool {
        self.vertex_count() == other.vertex_count()
            && self.edge_count() == other.edge_count()
            && self.canonical_form() == other.canonical_form()
    }

    /// A vertex map `phi` with `phi[v]` in `other` for `v` in `self`, plus
    /// whether it reverses orientation. `None` if not isomorphic.
    pub fn isomorphism_to(&self, other: &Triangulation) -> Option<(Vec<VertexId>, bool)> {
        if self.vertex_count() != other.vertex_count() {
            return None;
        }
        let a = self.canonical_labeling();
        let b = other.canonical_labeling();
        if a.form != b.form {
            return None;
        }
        let mut phi = vec![0; self.vertex_count()];
        for (i, &v) in a.order.iter().enumerate() {
            phi[v] = b.order[i];
        }
        Some((phi, a.mirrored != b.mirrored))
    }
}

#[cfg(test)]
mod tests {
    use crate::sphere::{icosahedron, octahedron, stacked_sphere, tetrahedron};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn invariant_under_relabeling_and_mirror() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in [tetrahedron(), octahedron(), icosahedron(), stacked_sphere(9, true)] {
            let c = t.canonical_form();
            assert_eq!(t.mirrored().canonical_form(), c);
            for _ in 0..100 {
                let mut perm: Vec<usize> = (0..t.vertex_count()).collect();
                perm.shuffle(&mut rng);
                let r = t.relabeled(&perm);
                assert_eq!(r.canonical_form(), c);
                assert!(r.is_isomorphic(&t));
            }
        }
    }

    #[test]
    fn decode_roundtrip() {
        let t = icosahedron();
        let c = t.canonical_form();
        let d = c.to_triangulation();
        assert_eq!(d.canonical_form(), c);
        assert_eq!(c.vertex_count(), 12);
        assert_eq!(c.degrees(), vec![5; 12]);
    }

    #[test]
    fn isomorphism_map_preserves_faces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = stacked_sphere(8, false);
        let mut perm: Vec<usize> = (0..8).collect();
        perm.shuffle(&mut rng);
        for other in [t.relabeled(&perm), t.relabeled(&perm).mirrored()] {
            let (phi, reversed) = t.isomorphism_to(&other).unwrap();
            for &[a, b, c] in t.faces() {
                let img = [phi[a], phi[b], phi[c]];
                let reimg = [phi[a], phi[c], phi[b]];
                assert!(other.has_face(if reversed { reimg } else { img }));
            }
        }
    }

    #[test]
    fn octahedron_and_icosahedron_differ() {
        assert!(!octahedron().is_isomorphic(&icosahedron()));
    }
}
