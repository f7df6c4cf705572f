//! Exhaustive generation of simplicial 2-spheres up to isomorphism.
//!
//! [`enumerate_spheres`] computes the closure of a stacked seed sphere under
//! edge flips, deduplicated by canonical form. Any two triangulations of the
//! sphere with the same vertex count are connected by flips, so the closure is
//! complete.
//!
//! [`generate_min_degree`] builds spheres face by face with degree pruning and
//! reaches the minimum-degree-5 classes at 16 to 18 vertices, which are far out
//! of reach of the flip closure.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::canonical::{canonical_code, decode_rotation, CanonicalForm};
use crate::sphere::{flip_in_place, stacked_sphere, Triangulation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("resource limit exceeded at m = {m}: {reason}")]
    ResourceLimit { m: usize, reason: String },
    #[error("vertex count {0} is out of range")]
    BadVertexCount(usize),
}

/// Memory and time budget for an enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    pub memory_bytes: usize,
    pub time_limit: Option<Duration>,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            memory_bytes: 8 << 30,
            time_limit: None,
        }
    }
}

/// One row of the census table.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CensusRow {
    pub m: usize,
    pub total: usize,
    pub min_degree: usize,
    pub with_min_degree: usize,
}

const CHUNK: usize = 2048;

fn flip_neighbors(code: &[u16]) -> Vec<Vec<u16>> {
    let rot = decode_rotation(code);
    let mut out = Vec::with_capacity(3 * rot.len());
    for a in 0..rot.len() {
        for &b in &rot[a] {
            if a < b {
                let mut r = rot.clone();
                if flip_in_place(&mut r, a, b).is_some() {
                    out.push(canonical_code(&r));
                }
            }
        }
    }
    out
}

fn flip_closure(
    seed: &Triangulation,
    limits: &EnumerationLimits,
) -> Result<Vec<CanonicalForm>, EnumerateError> {
    let m = seed.vertex_count();
    let start = Instant::now();
    let root = seed.canonical_form().code;
    let entry_bytes = 2 * root.len() + 64;
    let mut seen: HashSet<Vec<u16>> = HashSet::from([root.clone()]);
    let mut frontier = vec![root];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for chunk in frontier.chunks(CHUNK) {
            let found: Vec<Vec<Vec<u16>>> = chunk.par_iter().map(|c| flip_neighbors(c)).collect();
            for code in found.into_iter().flatten() {
                if !seen.contains(&code) {
                    seen.insert(code.clone());
                    next.push(code);
                }
            }
            if seen.len().saturating_mul(entry_bytes) > limits.memory_bytes {
                return Err(EnumerateError::ResourceLimit {
                    m,
                    reason: format!(
                        "more than {} classes exceed the {} byte budget",
                        seen.len(),
                        limits.memory_bytes
                    ),
                });
            }
            if let Some(t) = limits.time_limit {
                if start.elapsed() > t {
                    return Err(EnumerateError::ResourceLimit {
                        m,
                        reason: format!("time limit {t:?} exceeded"),
                    });
                }
            }
        }
        frontier = next;
    }
    let mut all: Vec<CanonicalForm> = seen.into_iter().map(|code| CanonicalForm { code }).collect();
    all.sort_unstable();
    Ok(all)
}

/// All isomorphism classes of spheres with `m` vertices, sorted by canonical
/// code, optionally restricted to minimum degree at least `min_degree`.
pub fn enumerate_spheres(
    m: usize,
    min_degree: Option<usize>,
    limits: &EnumerationLimits,
) -> Result<Vec<CanonicalForm>, EnumerateError> {
    enumerate_from_seed(&stacked_sphere(m.max(4), false), min_degree, limits)
        .and_then(|v| if m < 4 { Err(EnumerateError::BadVertexCount(m)) } else { Ok(v) })
}

/// Like [`enumerate_spheres`] but starting the flip closure at `seed`.
pub fn enumerate_from_seed(
    seed: &Triangulation,
    min_degree: Option<usize>,
    limits: &EnumerationLimits,
) -> Result<Vec<CanonicalForm>, EnumerateError> {
    let mut all = flip_closure(seed, limits)?;
    if let Some(d) = min_degree {
        all.retain(|c| c.min_degree() >= d);
    }
    Ok(all)
}

/// Census rows for `4..=m_max`.
pub fn census(
    m_max: usize,
    min_degree: usize,
    limits: &EnumerationLimits,
) -> Result<Vec<CensusRow>, EnumerateError> {
    if m_max < 4 {
        return Err(EnumerateError::BadVertexCount(m_max));
    }
    (4..=m_max)
        .map(|m| {
            let all = enumerate_spheres(m, None, limits)?;
            let with_min_degree = all.iter().filter(|c| c.min_degree() >= min_degree).count();
            Ok(CensusRow {
                m,
                total: all.len(),
                min_degree,
                with_min_degree,
            })
        })
        .collect()
}

const NONE: u8 = u8::MAX;

/// Edges added and vertices closed by one face, for undo.
type Undo = (Vec<(usize, usize)>, Vec<usize>);

/// Partial oriented surface grown one face at a time.
struct Builder {
    m: usize,
    min_degree: usize,
    excess_budget: usize,
    n: usize,
    // third[a * m + b] = c when the face (a, b, c) is present.
    third: Vec<u8>,
    deg: Vec<usize>,
    closed: Vec<bool>,
    excess: usize,
    nodes: u64,
    node_limit: u64,
    found: HashSet<Vec<u16>>,
}

enum Step {
    Continue,
    Stop,
}

impl Builder {
    fn third(&self, a: usize, b: usize) -> u8 {
        self.third[a * self.m + b]
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.third(a, b) != NONE || self.third(b, a) != NONE
    }

    fn bump_degree(&mut self, v: usize) {
        self.deg[v] += 1;
        if self.deg[v] > self.min_degree {
            self.excess += 1;
        }
    }

    fn drop_degree(&mut self, v: usize) {
        if self.deg[v] > self.min_degree {
            self.excess -= 1;
        }
        self.deg[v] -= 1;
    }

    /// Adds face `(a, b, c)`. Returns the list of edges that were new and the
    /// vertices that became closed, for undo; `None` if the face is illegal
    /// (state is left unchanged in that case).
    fn add_face(&mut self, f: [usize; 3]) -> Option<Undo> {
        let m = self.m;
        for i in 0..3 {
            let (x, y) = (f[i], f[(i + 1) % 3]);
            if self.closed[x] || self.third(x, y) != NONE {
                return None;
            }
        }
        let mut new_edges = Vec::new();
        for i in 0..3 {
            let (x, y) = (f[i], f[(i + 1) % 3]);
            if !self.adjacent(x, y) {
                new_edges.push((x, y));
            }
        }
        for &(x, y) in &new_edges {
            self.bump_degree(x);
            self.bump_degree(y);
        }
        let undo_edges = |s: &mut Builder, e: &[(usize, usize)]| {
            for &(x, y) in e {
                s.drop_degree(x);
                s.drop_degree(y);
            }
        };
        if self.excess > self.excess_budget || f.iter().any(|&v| self.deg[v] >= m) {
            undo_edges(self, &new_edges);
            return None;
        }
        // Link of corner x gains the edge y -> z.
        let mut closing = Vec::new();
        for i in 0..3 {
            let (x, y, z) = (f[i], f[(i + 1) % 3], f[(i + 2) % 3]);
            let mut cur = z;
            let mut len = 1;
            while self.third(x, cur) != NONE {
                cur = self.third(x, cur) as usize;
                len += 1;
            }
            if cur == y {
                if len != self.deg[x] || self.deg[x] < self.min_degree {
                    undo_edges(self, &new_edges);
                    return None;
                }
                closing.push(x);
            }
        }
        for i in 0..3 {
            let (x, y, z) = (f[i], f[(i + 1) % 3], f[(i + 2) % 3]);
            self.third[x * m + y] = z as u8;
        }
        for &x in &closing {
            self.closed[x] = true;
        }
        Some((new_edges, closing))
    }

    fn remove_face(&mut self, f: [usize; 3], undo: (Vec<(usize, usize)>, Vec<usize>)) {
        for i in 0..3 {
            let (x, y) = (f[i], f[(i + 1) % 3]);
            self.third[x * self.m + y] = NONE;
        }
        for x in undo.1 {
            self.closed[x] = false;
        }
        for (x, y) in undo.0 {
            self.drop_degree(x);
            self.drop_degree(y);
        }
    }

    fn emit(&mut self) {
        let m = self.m;
        let mut rot = vec![Vec::new(); m];
        for (v, r) in rot.iter_mut().enumerate() {
            let start = (0..m).find(|&a| self.third(v, a) != NONE).unwrap();
            let mut cur = start;
            loop {
                r.push(cur);
                cur = self.third(v, cur) as usize;
                if cur == start {
                    break;
                }
            }
        }
        self.found.insert(canonical_code(&rot));
    }

    fn search(&mut self) -> Step {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Step::Stop;
        }
        let open = (0..self.n).find(|&v| !self.closed[v]);
        let Some(v) = open else {
            if self.n == self.m {
                self.emit();
            }
            return Step::Continue;
        };
        // An end of the link path of v: neighbor a with no face (v, a, _).
        let a = (0..self.n)
            .find(|&a| self.third(a, v) != NONE && self.third(v, a) == NONE)
            .expect("open vertex has an open link end");
        let mut candidates: Vec<usize> = (0..self.n).filter(|&x| x != v && x != a).collect();
        if self.n < self.m {
            candidates.push(self.n);
        }
        for x in candidates {
            let fresh = x == self.n;
            if fresh {
                self.n += 1;
            }
            if let Some(undo) = self.add_face([v, a, x]) {
                let step = self.search();
                self.remove_face([v, a, x], undo);
                if let Step::Stop = step {
                    return Step::Stop;
                }
            }
            if fresh {
                self.n -= 1;
            }
        }
        Step::Continue
    }
}

/// All spheres with `m` vertices and minimum degree at least `min_degree`,
/// sorted by canonical code. Fails with `ResourceLimit` after `node_limit`
/// search nodes.
pub fn generate_min_degree(
    m: usize,
    min_degree: usize,
    node_limit: u64,
) -> Result<Vec<CanonicalForm>, EnumerateError> {
    if !(4..=254).contains(&m) || !(3..=5).contains(&min_degree) {
        return Err(EnumerateError::BadVertexCount(m));
    }
    let total_degree = 6 * m - 12;
    if min_degree * m > total_degree {
        return Ok(Vec::new());
    }
    let mut b = Builder {
        m,
        min_degree,
        excess_budget: total_degree - min_degree * m,
        n: 3,
        third: vec![NONE; m * m],
        deg: vec![0; m],
        closed: vec![false; m],
        excess: 0,
        nodes: 0,
        node_limit,
        found: HashSet::new(),
    };
    let undo = b.add_face([0, 1, 2]).expect("root face");
    if let Step::Stop = b.search() {
        return Err(EnumerateError::ResourceLimit {
            m,
            reason: format!("search exceeded {node_limit} nodes"),
        });
    }
    b.remove_face([0, 1, 2], undo);
    let mut all: Vec<CanonicalForm> = b.found.into_iter().map(|code| CanonicalForm { code }).collect();
    all.sort_unstable();
    Ok(all)
}
