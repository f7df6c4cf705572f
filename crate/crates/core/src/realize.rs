//! Realizing a sphere as a non-singular complete fan.
//!
//! The sphere is reduced until a base case is reached: removing a degree-3
//! vertex (inverse of (i)), then a degree-4 vertex (inverse of (ii)), then an
//! atlas lookup, then an inverse C_k. The tetrahedron takes the fan of
//! projective space; atlas entries take their certificate. Replaying the
//! recorded forward operations with their vector rules rebuilds a fan on the
//! original labeling. When none of the cases applies, a bounded backtracking
//! search over lattice vectors is tried.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::atlas::{Atlas, AtlasError};
use crate::fan::{det3, FanAssignment, FanError, ProbeConfig, VerificationReport, Vector3};
use crate::ops::{
    apply_inverse_ck, apply_inverse_i, apply_inverse_ii, find_ck_reducible, find_inverse_i,
    find_inverse_ii, OpError, OpRecord, Subdivide,
};
use crate::planar_io::write_text;
use crate::sphere::{Triangulation, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("no realization found for a {m}-vertex sphere after {} reductions", log.len())]
    RealizationFailed {
        m: usize,
        /// The irreducible sphere in text format.
        stuck: String,
        log: Vec<OpRecord>,
        reason: String,
    },
    #[error("replay failed at step {step}: {error}")]
    ReplayMismatch { step: usize, error: OpError },
    #[error("reduction failed: {0}")]
    Reduction(#[from] OpError),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("the realized fan does not verify: {0:?}")]
    NotVerified(Box<VerificationReport>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),
    #[error("coordinate bound must be positive")]
    BadBound,
    #[error(transparent)]
    Fan(#[from] FanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub coordinate_bound: i64,
    pub node_budget: u64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            coordinate_bound: 3,
            node_budget: 10_000_000,
            seed: 0,
        }
    }
}

impl SearchConfig {
    fn probe(&self) -> ProbeConfig {
        ProbeConfig {
            seed: self.seed,
            ..ProbeConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Base {
    Cp3,
    Atlas(String),
    Search,
}

impl std::fmt::Display for Base {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Base::Cp3 => write!(f, "CP3"),
            Base::Atlas(label) => write!(f, "atlas {label}"),
            Base::Search => write!(f, "search"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RealizationResult {
    pub fan: FanAssignment,
    /// Forward operations in reduction order: `log[0]` rebuilds the input
    /// from the first reduced sphere.
    pub log: Vec<OpRecord>,
    pub base: Base,
    pub base_fan: FanAssignment,
    pub report: VerificationReport,
}

impl RealizationResult {
    /// The log in application order, starting from the base fan.
    pub fn script(&self) -> Vec<OpRecord> {
        self.log.iter().rev().cloned().collect()
    }
}

/// `p(3) + p(4) + 18 >= m`, under which realization never needs the search.
pub fn satisfies_hypothesis(t: &Triangulation) -> bool {
    let p = t.degree_profile();
    p.count(3) + p.count(4) + 18 >= t.vertex_count()
}

/// The fan of projective space on a tetrahedron in its own labeling.
pub fn projective_space_on(t: &Triangulation) -> FanAssignment {
    assert_eq!(t.vertex_count(), 4);
    let mut vectors = vec![Vector3::E1, Vector3::E2, Vector3::E3, Vector3::new(-1, -1, -1)];
    let [a, b, c] = t.faces()[0];
    if det3(vectors[a], vectors[b], vectors[c]).unwrap() < 0 {
        vectors.swap(0, 1);
    }
    FanAssignment::new(t.clone(), vectors).unwrap()
}

/// Realizes `k` using the built-in atlas.
pub fn realize(k: &Triangulation, cfg: &SearchConfig) -> Result<RealizationResult, RealizeError> {
    realize_with(k, cfg, Atlas::builtin())
}

/// Realizes `k` without ever falling back to the search.
pub fn realize_without_search(
    k: &Triangulation,
    atlas: &Atlas,
) -> Result<RealizationResult, RealizeError> {
    run(k, &SearchConfig::default(), atlas, false)
}

pub fn realize_with(
    k: &Triangulation,
    cfg: &SearchConfig,
    atlas: &Atlas,
) -> Result<RealizationResult, RealizeError> {
    run(k, cfg, atlas, true)
}

fn run(
    k: &Triangulation,
    cfg: &SearchConfig,
    atlas: &Atlas,
    allow_search: bool,
) -> Result<RealizationResult, RealizeError> {
    let mut cur = k.clone();
    let mut log = Vec::new();
    let (base, base_fan) = loop {
        if cur.vertex_count() == 4 {
            break (Base::Cp3, projective_space_on(&cur));
        }
        let step = if let Some(v) = find_inverse_i(&cur) {
            apply_inverse_i(&cur, v)?
        } else if let Some(v) = find_inverse_ii(&cur) {
            apply_inverse_ii(&cur, v)?
        } else if let Some(entry) = atlas.lookup(&cur) {
            let fan = entry.fan_on(&cur)?;
            break (Base::Atlas(entry.label.clone()), fan);
        } else if let Some((v, _)) = find_ck_reducible(&cur) {
            apply_inverse_ck(&cur, v)?
        } else {
            let failed = |reason: String| RealizeError::RealizationFailed {
                m: cur.vertex_count(),
                stuck: write_text(&cur),
                log: log.clone(),
                reason,
            };
            if !allow_search {
                return Err(failed("irreducible and not in the atlas".into()));
            }
            match search_assignment(&cur, cfg) {
                Ok(Some(fan)) => break (Base::Search, fan),
                Ok(None) => return Err(failed("search space exhausted".into())),
                Err(e) => return Err(failed(e.to_string())),
            }
        };
        cur = step.0;
        log.push(step.1);
    };
    let fan = replay(&base_fan, &log)?;
    let report = fan.verify_with(&cfg.probe())?;
    if !report.is_valid() {
        return Err(RealizeError::NotVerified(Box::new(report)));
    }
    debug_assert_eq!(fan.triangulation(), k);
    Ok(RealizationResult {
        fan,
        log,
        base,
        base_fan,
        report,
    })
}

/// Applies a reduction log (in reduction order) to the base fan, last record
/// first.
pub fn replay(base_fan: &FanAssignment, log: &[OpRecord]) -> Result<FanAssignment, RealizeError> {
    replay_forward(base_fan, log.iter().rev())
}

/// Applies forward operations in the given order.
pub fn replay_forward<'a>(
    base_fan: &FanAssignment,
    ops: impl IntoIterator<Item = &'a OpRecord>,
) -> Result<FanAssignment, RealizeError> {
    let mut fan = base_fan.clone();
    for (step, rec) in ops.into_iter().enumerate() {
        fan = fan
            .apply(rec)
            .map_err(|error| RealizeError::ReplayMismatch { step, error })?;
    }
    Ok(fan)
}

/// Backtracking search for a non-singular complete fan with coordinates in
/// `[-B, B]`. `Ok(None)` means the bounded space holds no solution.
pub fn search_assignment(
    k: &Triangulation,
    cfg: &SearchConfig,
) -> Result<Option<FanAssignment>, SearchError> {
    let b = cfg.coordinate_bound;
    if b < 1 {
        return Err(SearchError::BadBound);
    }
    let mut candidates: Vec<Vector3> = Vec::new();
    for x in -b..=b {
        for y in -b..=b {
            for z in -b..=b {
                let v = Vector3::new(x, y, z);
                if !v.is_zero() {
                    candidates.push(v);
                }
            }
        }
    }
    // Small vectors first; ties broken by a seeded shuffle.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    candidates.shuffle(&mut rng);
    candidates.sort_by_key(|v| v.x.abs() + v.y.abs() + v.z.abs());

    let m = k.vertex_count();
    let order = k.face_bfs_vertex_order();
    let mut position = vec![0; m];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    // For each vertex, the faces it closes: both other corners come earlier.
    let closes: Vec<Vec<(VertexId, VertexId)>> = (0..m)
        .map(|v| {
            let r = k.rotation(v);
            (0..r.len())
                .map(|i| (r[i], r[(i + 1) % r.len()]))
                .filter(|&(a, c)| position[a] < position[v] && position[c] < position[v])
                .collect()
        })
        .collect();
    // Vertices whose closed star is fully assigned once `order[i]` is placed.
    let mut completes: Vec<Vec<VertexId>> = vec![Vec::new(); m];
    for v in 0..m {
        let last = k
            .rotation(v)
            .iter()
            .map(|&u| position[u])
            .chain([position[v]])
            .max()
            .unwrap();
        completes[last].push(v);
    }
    // Generic direction for winding counts: no nonzero cross product of
    // candidate vectors is orthogonal to it.
    let base = 4 * (b as i128) * (b as i128) + 1;
    let generic = [1i128, base, base * base];

    let mut s = Search {
        k,
        order: &order,
        closes: &closes,
        completes: &completes,
        candidates: &candidates,
        generic,
        vectors: vec![None; m],
        nodes: 0,
        budget: cfg.node_budget,
    };
    let [a, bb, c] = k.faces()[0];
    debug_assert_eq!(&order[..3], &[a, bb, c]);
    s.vectors[a] = Some(Vector3::E1);
    s.vectors[bb] = Some(Vector3::E2);
    s.vectors[c] = Some(Vector3::E3);
    if !s.dfs(3)? {
        return Ok(None);
    }
    let vectors = s.vectors.iter().map(|v| v.unwrap()).collect();
    let fan = FanAssignment::new(k.clone(), vectors)?;
    let report = fan.verify_with(&cfg.probe())?;
    assert!(report.is_valid(), "search returned an unverified fan");
    Ok(Some(fan))
}

struct Search<'a> {
    k: &'a Triangulation,
    order: &'a [VertexId],
    closes: &'a [Vec<(VertexId, VertexId)>],
    completes: &'a [Vec<VertexId>],
    candidates: &'a [Vector3],
    generic: [i128; 3],
    vectors: Vec<Option<Vector3>>,
    nodes: u64,
    budget: u64,
}

fn det128(a: Vector3, b: Vector3, c: Vector3) -> i128 {
    let [a0, a1, a2] = a.to_array().map(i128::from);
    let [b0, b1, b2] = b.to_array().map(i128::from);
    let [c0, c1, c2] = c.to_array().map(i128::from);
    a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)
}

impl Search<'_> {
    fn dfs(&mut self, i: usize) -> Result<bool, SearchError> {
        if i == self.order.len() {
            return Ok(true);
        }
        let v = self.order[i];
        for &cand in self.candidates {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(SearchError::BudgetExhausted(self.budget));
            }
            let fits = self.closes[v].iter().all(|&(a, c)| {
                let (a, c) = (self.vectors[a].unwrap(), self.vectors[c].unwrap());
                det128(cand, a, c) == 1
            });
            if !fits {
                continue;
            }
            self.vectors[v] = Some(cand);
            if self.completes[i].iter().all(|&u| self.winding_ok(u)) && self.dfs(i + 1)? {
                return Ok(true);
            }
        }
        self.vectors[v] = None;
        Ok(false)
    }

    /// The link of `v` winds exactly once around `v`.
    fn winding_ok(&self, v: VertexId) -> bool {
        let x = self.vectors[v].unwrap();
        let [x0, x1, x2] = x.to_array().map(i128::from);
        let [d0, d1, d2] = self.generic;
        // det(x, d, l) = l . (x cross d)
        let xd = [x1 * d2 - x2 * d1, x2 * d0 - x0 * d2, x0 * d1 - x1 * d0];
        let side = |l: Vector3| {
            let [l0, l1, l2] = l.to_array().map(i128::from);
            l0 * xd[0] + l1 * xd[1] + l2 * xd[2]
        };
        let r = self.k.rotation(v);
        let n = r.len();
        let count = (0..n)
            .filter(|&j| {
                let (a, c) = (self.vectors[r[j]].unwrap(), self.vectors[r[(j + 1) % n]].unwrap());
                side(c) > 0 && side(a) < 0
            })
            .count();
        count == 1
    }
}
