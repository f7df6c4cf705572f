//! The minimum-degree-5 spheres with at most 18 vertices, with fan
//! certificates.
//!
//! The data file is a sequence of entries. Each entry is a header line
//!
//! ```text
//! > 5^12 6^4 (ii); star -; certificate table
//! ```
//!
//! followed by one certificate document (`{"faces":..,"m":..,"vectors":..}`).
//! `star` names a vertex at which an inverse C_k applies, or `-`. The
//! certificate source is `table`, `reduction`, `search` or `none`; with
//! `none` the vector list is empty. Lines starting with `#` are comments.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use thiserror::Error;

use crate::canonical::CanonicalForm;
use crate::fan::{det3, Certificate, FanAssignment, Vector3};
use crate::ops::{apply_inverse_ck, ck_outer_ring, Subdivide};
use crate::realize::{realize_with, SearchConfig};
use crate::sphere::{Triangulation, VertexId};

const BUILTIN: &str = include_str!("../data/atlas.txt");

/// Vertex counts with minimum-degree-5 spheres, and how many there are.
pub const COUNTS_BY_M: [(usize, usize); 6] = [(12, 1), (14, 1), (15, 1), (16, 3), (17, 4), (18, 12)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtlasError {
    #[error("corrupt atlas at line {line}: {msg}")]
    Corrupt { line: usize, msg: String },
    #[error("unknown atlas label {0:?}")]
    UnknownLabel(String),
    #[error("certificate for {0} does not verify")]
    CertificateInvalid(String),
    #[error("entry {0} has neither a certificate nor a star vertex")]
    NoCertificate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Vectors copied from the published vector table, matched to vertices.
    Table,
    /// Derived by inverse C_k at the star vertex and replay.
    Reduction,
    /// Found by the lattice search.
    Search,
    None,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Table => "table",
            Provenance::Reduction => "reduction",
            Provenance::Search => "search",
            Provenance::None => "none",
        }
    }

    fn parse(s: &str) -> Option<Provenance> {
        Some(match s {
            "table" => Provenance::Table,
            "reduction" => Provenance::Reduction,
            "search" => Provenance::Search,
            "none" => Provenance::None,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct AtlasEntry {
    pub label: String,
    pub triangulation: Triangulation,
    pub star_vertex: Option<VertexId>,
    pub certificate: Option<FanAssignment>,
    pub provenance: Provenance,
    pub canonical: CanonicalForm,
}

impl AtlasEntry {
    pub fn new(
        label: &str,
        triangulation: Triangulation,
        star_vertex: Option<VertexId>,
        certificate: Option<FanAssignment>,
        provenance: Provenance,
    ) -> AtlasEntry {
        let canonical = triangulation.canonical_form();
        AtlasEntry {
            label: label.to_string(),
            triangulation,
            star_vertex,
            certificate,
            provenance,
            canonical,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.triangulation.vertex_count()
    }

    /// `k` of the star vertex.
    pub fn star_k(&self) -> Option<usize> {
        self.star_vertex.map(|v| self.triangulation.degree(v))
    }

    /// A fan on `k`, which must be isomorphic to this entry, obtained by
    /// carrying the certificate across the isomorphism. Orientation-reversing
    /// isomorphisms are compensated by the reflection `x -> -x`.
    pub fn fan_on(&self, k: &Triangulation) -> Result<FanAssignment, AtlasError> {
        let cert = certificate_for(self)?;
        let (phi, reversed) = self
            .triangulation
            .isomorphism_to(k)
            .ok_or_else(|| AtlasError::UnknownLabel(self.label.clone()))?;
        let mut vectors = vec![Vector3::default(); k.vertex_count()];
        for (v, &w) in phi.iter().enumerate() {
            let x = cert.vector(v);
            vectors[w] = if reversed { Vector3::new(-x.x, x.y, x.z) } else { x };
        }
        Ok(FanAssignment::new(k.clone(), vectors).expect("vertex counts agree"))
    }
}

/// The verified certificate of an entry; entries without stored vectors are
/// certified by inverse C_k at the star vertex, realization of the smaller
/// sphere and replay.
pub fn certificate_for(entry: &AtlasEntry) -> Result<FanAssignment, AtlasError> {
    let fan = match &entry.certificate {
        Some(c) => c.clone(),
        None => derive_certificate(entry, Atlas::builtin())?,
    };
    match fan.verify() {
        Ok(r) if r.is_valid() => Ok(fan),
        _ => Err(AtlasError::CertificateInvalid(entry.label.clone())),
    }
}

/// Certificate from the star vertex, realizing the reduced sphere against
/// `atlas`.
pub fn derive_certificate(entry: &AtlasEntry, atlas: &Atlas) -> Result<FanAssignment, AtlasError> {
    let invalid = || AtlasError::CertificateInvalid(entry.label.clone());
    let star = entry
        .star_vertex
        .ok_or_else(|| AtlasError::NoCertificate(entry.label.clone()))?;
    let (reduced, rec) = apply_inverse_ck(&entry.triangulation, star).map_err(|_| invalid())?;
    let r = realize_with(&reduced, &SearchConfig::default(), atlas).map_err(|_| invalid())?;
    r.fan.apply(&rec).map_err(|_| invalid())
}

#[derive(Debug, Clone, Default)]
pub struct Atlas {
    entries: Vec<AtlasEntry>,
    index: HashMap<CanonicalForm, usize>,
}

impl Atlas {
    pub fn new(entries: Vec<AtlasEntry>) -> Atlas {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.canonical.clone(), i))
            .collect();
        Atlas { entries, index }
    }

    /// The atlas compiled into the library. Certificates are verified on first
    /// use in debug builds.
    pub fn builtin() -> &'static Atlas {
        static ATLAS: OnceLock<Atlas> = OnceLock::new();
        ATLAS.get_or_init(|| {
            Atlas::parse(BUILTIN, cfg!(debug_assertions)).expect("built-in atlas is valid")
        })
    }

    pub fn parse(text: &str, verify: bool) -> Result<Atlas, AtlasError> {
        let mut entries = Vec::new();
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        while let Some((line, header)) = lines.next() {
            let corrupt = |msg: String| AtlasError::Corrupt { line, msg };
            let header = header
                .strip_prefix('>')
                .ok_or_else(|| corrupt("expected an entry header".into()))?;
            let fields: Vec<&str> = header.split(';').map(str::trim).collect();
            let [label, star, cert] = fields[..] else {
                return Err(corrupt("header needs label; star; certificate".into()));
            };
            let star = match star.strip_prefix("star ").map(str::trim) {
                Some("-") => None,
                Some(v) => Some(v.parse().map_err(|_| corrupt(format!("bad star {v:?}")))?),
                None => return Err(corrupt("missing star field".into())),
            };
            let provenance = cert
                .strip_prefix("certificate ")
                .and_then(|p| Provenance::parse(p.trim()))
                .ok_or_else(|| corrupt(format!("bad certificate field {cert:?}")))?;
            let (line, body) = lines
                .next()
                .ok_or_else(|| corrupt("missing certificate document".into()))?;
            let corrupt = |msg: String| AtlasError::Corrupt { line, msg };
            let doc = Certificate::from_json(body).map_err(|e| corrupt(e.to_string()))?;
            let vectors = doc.vectors.clone();
            let fan = Certificate {
                vectors: if vectors.is_empty() { vec![[0; 3]; doc.m] } else { vectors.clone() },
                ..doc
            }
            .to_fan()
            .map_err(|e| corrupt(e.to_string()))?;
            let certificate = if vectors.is_empty() {
                if provenance != Provenance::None {
                    return Err(corrupt("vectors missing".into()));
                }
                None
            } else {
                Some(fan.clone())
            };
            let entry = AtlasEntry::new(
                label,
                fan.into_parts().0,
                star,
                certificate,
                provenance,
            );
            check_entry(&entry, verify).map_err(corrupt)?;
            entries.push(entry);
        }
        let atlas = Atlas::new(entries);
        if atlas.index.len() != atlas.entries.len() {
            return Err(AtlasError::Corrupt {
                line: 0,
                msg: "two entries are isomorphic".into(),
            });
        }
        Ok(atlas)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let star = e.star_vertex.map_or("-".to_string(), |v| v.to_string());
            writeln!(s, "> {}; star {star}; certificate {}", e.label, e.provenance.as_str()).unwrap();
            let cert = match &e.certificate {
                Some(f) => f.to_certificate(),
                None => Certificate {
                    faces: e.triangulation.faces().to_vec(),
                    m: e.vertex_count(),
                    vectors: Vec::new(),
                },
            };
            writeln!(s, "{}", cert.to_json()).unwrap();
        }
        s
    }

    pub fn entries(&self) -> &[AtlasEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&AtlasEntry> {
        let want = normalize_label(label);
        self.entries.iter().find(|e| normalize_label(&e.label) == want)
    }

    pub fn lookup(&self, k: &Triangulation) -> Option<&AtlasEntry> {
        if k.min_degree() < 5 || k.vertex_count() > 18 {
            return None;
        }
        self.index.get(&k.canonical_form()).map(|&i| &self.entries[i])
    }

    /// Entry counts per vertex count.
    pub fn counts_by_m(&self) -> BTreeMap<usize, usize> {
        let mut c = BTreeMap::new();
        for e in &self.entries {
            *c.entry(e.vertex_count()).or_insert(0) += 1;
        }
        c
    }
}

/// The built-in atlas after checking its shape: 22 pairwise non-isomorphic
/// entries distributed over `m` as in [`COUNTS_BY_M`].
pub fn load_atlas() -> Result<&'static Atlas, AtlasError> {
    let atlas = Atlas::builtin();
    let expected: BTreeMap<usize, usize> = COUNTS_BY_M.into_iter().collect();
    if atlas.counts_by_m() != expected {
        return Err(AtlasError::Corrupt {
            line: 0,
            msg: format!("entry counts {:?}", atlas.counts_by_m()),
        });
    }
    Ok(atlas)
}

pub fn lookup(k: &Triangulation) -> Option<&'static AtlasEntry> {
    Atlas::builtin().lookup(k)
}

fn normalize_label(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn check_entry(e: &AtlasEntry, verify: bool) -> Result<(), String> {
    let t = &e.triangulation;
    if t.min_degree() < 5 || t.vertex_count() > 18 {
        return Err(format!("{}: not a minimum-degree-5 sphere with at most 18 vertices", e.label));
    }
    let profile = t.degree_profile().label();
    let stem = e.label.split(" (").next().unwrap_or("");
    if normalize_label(stem) != profile {
        return Err(format!("{}: degree profile is {profile}", e.label));
    }
    if let Some(v) = e.star_vertex {
        if v >= t.vertex_count() || ck_outer_ring(t, v).is_none() {
            return Err(format!("{}: star vertex {v} admits no inverse C_k", e.label));
        }
    }
    if verify {
        if let Some(f) = &e.certificate {
            if !f.verify().map(|r| r.is_valid()).unwrap_or(false) {
                return Err(format!("{}: certificate does not verify", e.label));
            }
        }
    }
    Ok(())
}

/// A column of the published vector table: the spheres it certifies and the
/// vectors for vertices `a, b, c, ...`.
#[derive(Debug, Clone, Copy)]
pub struct VectorColumn {
    pub labels: &'static [&'static str],
    pub vectors: &'static [[i64; 3]],
}

pub const VECTOR_TABLE: [VectorColumn; 8] = [
    VectorColumn {
        labels: &["5^12 6^4 (ii)"],
        vectors: &[
            [1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 2, -1], [0, -1, -1], [1, 0, -1],
            [1, -1, 0], [1, -1, 1], [-1, 0, 1], [-1, 1, 0], [-1, 1, -1], [0, -2, -1],
            [1, -1, -1], [0, -1, 1], [0, -1, 0], [0, -2, 1],
        ],
    },
    VectorColumn {
        labels: &["5^12 6^5 (ii)"],
        vectors: &[
            [1, 0, 0], [1, 0, 1], [2, -1, 1], [3, 0, -1], [2, 1, -1], [1, 1, 0],
            [1, -1, 1], [2, 0, -1], [1, 1, -1], [0, 1, 0], [0, 0, 1], [0, -1, 1],
            [2, -1, 0], [1, 0, -1], [0, 1, -1], [-1, 1, 0], [-1, 0, 0],
        ],
    },
    VectorColumn {
        labels: &["5^14 6^2 7^2 (iii)", "5^13 6^4 7^1 (i)", "5^12 6^6 (i)"],
        vectors: &[
            [0, -1, 0], [1, -1, 0], [0, -1, 1], [-1, -1, 1], [-1, -1, 0], [-1, -1, -1],
            [0, -1, -1], [1, 0, 0], [0, 0, 1], [-1, 0, 1], [-1, 0, -1], [0, 0, -1],
            [0, 1, -1], [1, 1, 0], [0, 1, 1], [-1, 0, 0], [-1, 1, -1], [0, 1, 0],
        ],
    },
    VectorColumn {
        labels: &["5^12 6^6 (ii)"],
        vectors: &[
            [1, 0, 0], [3, 0, -1], [2, 1, -1], [1, 1, 0], [3, 0, 1], [3, -1, 1],
            [2, 0, -1], [1, 1, -1], [0, 1, 0], [1, 0, 1], [1, -1, 1], [2, -1, 1],
            [1, 0, -1], [-1, 1, 0], [0, 0, 1], [0, -1, 1], [2, -1, 0], [-1, 0, 0],
        ],
    },
    VectorColumn {
        labels: &["5^12 6^6 (iii)"],
        vectors: &[
            [1, 0, 0], [3, 0, -1], [2, 1, -1], [1, 1, 0], [1, 0, 1], [3, -1, 1],
            [2, 0, -1], [1, 1, -1], [0, 1, 0], [0, 0, 1], [1, -1, 1], [2, -1, 1],
            [1, 0, -1], [0, 1, -1], [-1, 1, 0], [0, -1, 1], [2, -1, 0], [-1, 0, 0],
        ],
    },
    VectorColumn {
        labels: &["5^12 6^6 (iv)"],
        vectors: &[
            [1, 0, 0], [3, 0, -1], [2, 1, -1], [1, 1, 0], [1, 0, 1], [2, -1, 1],
            [2, 0, -1], [1, 1, -1], [0, 1, 0], [0, 0, 1], [1, -1, 1], [3, -1, 0],
            [1, 0, -1], [0, 1, -1], [-1, 1, 0], [0, -1, 1], [2, -1, 0], [-1, 0, 0],
        ],
    },
    VectorColumn {
        labels: &["5^12 6^6 (v)"],
        vectors: &[
            [0, -1, 0], [-1, 1, -1], [0, -2, -1], [1, -1, -1], [0, -1, 1], [-1, 0, 1],
            [-1, 1, 0], [0, -1, -1], [1, 0, -1], [1, -1, 0], [1, -1, 1], [0, 0, 1],
            [-1, 2, 0], [-1, 2, -1], [0, 1, 2], [0, 1, 1], [-1, 2, -2], [0, 1, 0],
        ],
    },
    VectorColumn {
        labels: &["5^12 6^6 (vi)"],
        vectors: &[
            [0, -1, 0], [-1, 0, -1], [0, -2, -1], [1, -1, -1], [0, -1, 1], [-1, 0, 1],
            [-1, 1, 0], [0, -1, -1], [1, 0, -1], [1, -1, 0], [1, -1, 1], [0, 0, 1],
            [-1, 2, 2], [-2, 2, -1], [0, 1, 2], [0, 1, 1], [-1, 1, -1], [0, 1, 0],
        ],
    },
];

/// The column certifying `label`, if any.
pub fn vector_column(label: &str) -> Option<&'static VectorColumn> {
    let want = normalize_label(label);
    VECTOR_TABLE
        .iter()
        .find(|c| c.labels.iter().any(|l| normalize_label(l) == want))
}

/// A bijection `sigma` from vertices of `t` to indices of `vectors` under
/// which every face of `t`, or every face of its mirror image when the flag is
/// set, has determinant `+1` and the resulting fan verifies.
pub fn match_vectors(t: &Triangulation, vectors: &[Vector3]) -> Option<(Vec<usize>, bool)> {
    let mut found = None;
    enumerate_matchings(t, vectors, &mut |sigma, mirrored| {
        let target = if mirrored { t.mirrored() } else { t.clone() };
        let vs = sigma.iter().map(|&i| vectors[i]).collect();
        let fan = FanAssignment::new(target, vs).expect("sizes agree");
        if fan.verify().map(|r| r.is_valid()).unwrap_or(false) {
            found = Some((sigma.to_vec(), mirrored));
            false
        } else {
            true
        }
    });
    found
}

/// Number of determinant-consistent matchings (both orientations), capped at
/// `limit`.
pub fn count_matchings(t: &Triangulation, vectors: &[Vector3], limit: usize) -> usize {
    let mut n = 0;
    enumerate_matchings(t, vectors, &mut |_, _| {
        n += 1;
        n < limit
    });
    n
}

/// The fan of `t` with the column's vectors in letter order: the returned
/// triangulation is `t` (or its mirror) relabeled so that letter `i` is vertex
/// `i`.
pub fn letter_fan(t: &Triangulation, column: &VectorColumn) -> Option<FanAssignment> {
    let vectors: Vec<Vector3> = column.vectors.iter().map(|&v| Vector3::from(v)).collect();
    let (sigma, mirrored) = match_vectors(t, &vectors)?;
    let base = if mirrored { t.mirrored() } else { t.clone() };
    let relabeled = base.relabeled(&sigma);
    FanAssignment::new(relabeled, vectors).ok()
}

/// Calls `visit(sigma, mirrored)` for each assignment with all face
/// determinants equal to `+1` (or all `-1`, reported as mirrored) until it
/// returns `false`.
fn enumerate_matchings(
    t: &Triangulation,
    vectors: &[Vector3],
    visit: &mut dyn FnMut(&[usize], bool) -> bool,
) {
    let m = t.vertex_count();
    if vectors.len() != m {
        return;
    }
    let order = t.face_bfs_vertex_order();
    let mut position = vec![0; m];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let closes: Vec<Vec<(VertexId, VertexId)>> = (0..m)
        .map(|v| {
            let r = t.rotation(v);
            (0..r.len())
                .map(|i| (r[i], r[(i + 1) % r.len()]))
                .filter(|&(a, c)| position[a] < position[v] && position[c] < position[v])
                .collect()
        })
        .collect();
    let det = |a: usize, b: usize, c: usize| det3(vectors[a], vectors[b], vectors[c]).unwrap_or(0);
    let [a, b, c] = t.faces()[0];
    let mut state = Matcher {
        order: &order,
        closes: &closes,
        sigma: vec![usize::MAX; m],
        used: vec![false; m],
        det: &det,
    };
    for sign in [1, -1] {
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if i == j || j == k || i == k || det(i, j, k) != sign {
                        continue;
                    }
                    state.sigma[a] = i;
                    state.sigma[b] = j;
                    state.sigma[c] = k;
                    for x in [i, j, k] {
                        state.used[x] = true;
                    }
                    let go_on = state.dfs(3, sign, visit);
                    for x in [i, j, k] {
                        state.used[x] = false;
                    }
                    if !go_on {
                        return;
                    }
                }
            }
        }
    }
}

struct Matcher<'a> {
    order: &'a [VertexId],
    closes: &'a [Vec<(VertexId, VertexId)>],
    sigma: Vec<usize>,
    used: Vec<bool>,
    det: &'a dyn Fn(usize, usize, usize) -> i64,
}

impl Matcher<'_> {
    fn dfs(&mut self, i: usize, sign: i64, visit: &mut dyn FnMut(&[usize], bool) -> bool) -> bool {
        if i == self.order.len() {
            return visit(&self.sigma, sign < 0);
        }
        let v = self.order[i];
        for x in 0..self.used.len() {
            if self.used[x]
                || !self.closes[v]
                    .iter()
                    .all(|&(a, c)| (self.det)(x, self.sigma[a], self.sigma[c]) == sign)
            {
                continue;
            }
            self.used[x] = true;
            self.sigma[v] = x;
            let go_on = self.dfs(i + 1, sign, visit);
            self.used[x] = false;
            if !go_on {
                return false;
            }
        }
        true
    }
}
