//! Integer vector assignments on triangulations and their exact verification.
//!
//! A [`FanAssignment`] puts a primitive vector of `Z^3` on every vertex; every
//! face spans a cone. The candidate fan is non-singular when every face
//! determinant is `+1` (after normalizing the global orientation) and complete
//! when the cones cover `R^3` exactly once.
//!
//! Completeness is decided by the covering degree. When all face determinants
//! are positive, the radial projection of each cone onto the unit sphere is an
//! orientation-preserving triangle, so the number of cones containing a generic
//! ray is the degree of the induced map `S^2 -> S^2`. Degree one means the
//! cones tile space without overlaps; branching at a vertex would force
//! degree at least two. All arithmetic is checked `i64`.

use std::fmt;
use std::ops::Neg;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sphere::{validate, Face, SphereError, Triangulation, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FanError {
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("cone generators are linearly dependent")]
    DegenerateCone,
    #[error("no generic probe ray found after {0} draws")]
    NoGenericProbe(usize),
    #[error("expected {expected} vectors, found {found}")]
    VectorCount { expected: usize, found: usize },
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vector3 {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl Vector3 {
    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Vector3 { x, y, z }
    }

    pub const E1: Vector3 = Vector3::new(1, 0, 0);
    pub const E2: Vector3 = Vector3::new(0, 1, 0);
    pub const E3: Vector3 = Vector3::new(0, 0, 1);

    pub fn is_zero(&self) -> bool {
        self.x == 0 && self.y == 0 && self.z == 0
    }

    pub fn checked_add(self, o: Vector3) -> Result<Vector3, FanError> {
        Ok(Vector3 {
            x: self.x.checked_add(o.x).ok_or(FanError::Overflow)?,
            y: self.y.checked_add(o.y).ok_or(FanError::Overflow)?,
            z: self.z.checked_add(o.z).ok_or(FanError::Overflow)?,
        })
    }

    pub fn to_array(self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[i64; 3]> for Vector3 {
    fn from(a: [i64; 3]) -> Self {
        Vector3::new(a[0], a[1], a[2])
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

fn mul(a: i64, b: i64) -> Result<i64, FanError> {
    a.checked_mul(b).ok_or(FanError::Overflow)
}

fn sub(a: i64, b: i64) -> Result<i64, FanError> {
    a.checked_sub(b).ok_or(FanError::Overflow)
}

/// `det(a, b, c)` with the vectors as columns.
pub fn det3(a: Vector3, b: Vector3, c: Vector3) -> Result<i64, FanError> {
    let m1 = sub(mul(b.y, c.z)?, mul(b.z, c.y)?)?;
    let m2 = sub(mul(b.x, c.z)?, mul(b.z, c.x)?)?;
    let m3 = sub(mul(b.x, c.y)?, mul(b.y, c.x)?)?;
    let t = sub(mul(a.x, m1)?, mul(a.y, m2)?)?;
    t.checked_add(mul(a.z, m3)?).ok_or(FanError::Overflow)
}

/// Whether `p` lies in the closed cone spanned by `u, v, w` (Cramer's rule).
pub fn cone_contains(u: Vector3, v: Vector3, w: Vector3, p: Vector3) -> Result<bool, FanError> {
    let d = det3(u, v, w)?;
    if d == 0 {
        return Err(FanError::DegenerateCone);
    }
    let s = d.signum();
    Ok(det3(p, v, w)?.signum() * s >= 0
        && det3(u, p, w)?.signum() * s >= 0
        && det3(u, v, p)?.signum() * s >= 0)
}

/// A triangulation with an integer vector on every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanAssignment {
    triangulation: Triangulation,
    vectors: Vec<Vector3>,
}

impl FanAssignment {
    pub fn new(triangulation: Triangulation, vectors: Vec<Vector3>) -> Result<Self, FanError> {
        if vectors.len() != triangulation.vertex_count() {
            return Err(FanError::VectorCount {
                expected: triangulation.vertex_count(),
                found: vectors.len(),
            });
        }
        Ok(FanAssignment {
            triangulation,
            vectors,
        })
    }

    /// The fan of complex projective 3-space on the tetrahedron:
    /// `e1, e2, e3, -(e1 + e2 + e3)`, ordered so that every face determinant
    /// is `+1`.
    pub fn projective_space() -> FanAssignment {
        let t = crate::sphere::tetrahedron();
        let mut vectors = vec![Vector3::E1, Vector3::E2, Vector3::E3, Vector3::new(-1, -1, -1)];
        let [a, b, c] = t.faces()[0];
        if det3(vectors[a], vectors[b], vectors[c]).unwrap() < 0 {
            vectors.swap(0, 1);
        }
        FanAssignment::new(t, vectors).unwrap()
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.triangulation
    }

    pub fn vectors(&self) -> &[Vector3] {
        &self.vectors
    }

    pub fn vector(&self, v: VertexId) -> Vector3 {
        self.vectors[v]
    }

    pub fn into_parts(self) -> (Triangulation, Vec<Vector3>) {
        (self.triangulation, self.vectors)
    }

    pub fn face_det(&self, face: Face) -> Result<i64, FanError> {
        det3(self.vectors[face[0]], self.vectors[face[1]], self.vectors[face[2]])
    }

    /// Every vertex renamed by `perm`, vectors following their vertices.
    pub fn relabeled(&self, perm: &[VertexId]) -> FanAssignment {
        let mut vectors = vec![Vector3::default(); self.vectors.len()];
        for (v, &p) in perm.iter().enumerate() {
            vectors[p] = self.vectors[v];
        }
        FanAssignment::new(self.triangulation.relabeled(perm), vectors).unwrap()
    }

    /// Reflection through the plane `x = 0` together with the mirrored
    /// triangulation; determinants keep their signs.
    pub fn mirrored(&self) -> FanAssignment {
        let vectors = self
            .vectors
            .iter()
            .map(|v| Vector3::new(-v.x, v.y, v.z))
            .collect();
        FanAssignment::new(self.triangulation.mirrored(), vectors).unwrap()
    }

    /// Face determinants in stored orientation; `orientation` is `-1` when all of
    /// them are negative and `+1` otherwise. Faces whose normalized determinant
    /// is not `1` are reported.
    pub fn nonsingularity(&self) -> Result<Nonsingularity, FanError> {
        let dets = self
            .triangulation
            .faces()
            .iter()
            .map(|&f| self.face_det(f))
            .collect::<Result<Vec<_>, _>>()?;
        let orientation = if dets.iter().all(|&d| d < 0) { -1 } else { 1 };
        let bad_faces = self
            .triangulation
            .faces()
            .iter()
            .zip(&dets)
            .filter(|(_, &d)| d * orientation != 1)
            .map(|(&f, &d)| (f, d))
            .collect();
        Ok(Nonsingularity {
            orientation,
            bad_faces,
        })
    }

    pub fn is_nonsingular(&self) -> Result<bool, FanError> {
        Ok(self.nonsingularity()?.bad_faces.is_empty())
    }

    /// Number of maximal cones containing `p` in their interior, or `None` if
    /// `p` lies on a plane spanned by two generators of some cone.
    pub fn covering_count(&self, p: Vector3, orientation: i64) -> Result<Option<usize>, FanError> {
        let mut count = 0;
        for &[a, b, c] in self.triangulation.faces() {
            let (u, v, w) = (self.vectors[a], self.vectors[b], self.vectors[c]);
            let d1 = det3(p, v, w)? * orientation;
            let d2 = det3(u, p, w)? * orientation;
            let d3 = det3(u, v, p)? * orientation;
            if d1 == 0 || d2 == 0 || d3 == 0 {
                return Ok(None);
            }
            if d1 > 0 && d2 > 0 && d3 > 0 {
                count += 1;
            }
        }
        Ok(Some(count))
    }

    /// Completeness check by generic probe rays. Returns `(complete,
    /// covering_count, probes_used)`; only meaningful when every face
    /// determinant has the same sign.
    pub fn completeness(&self, config: &ProbeConfig) -> Result<(bool, usize, usize), FanError> {
        let dets = self
            .triangulation
            .faces()
            .iter()
            .map(|&f| self.face_det(f))
            .collect::<Result<Vec<_>, _>>()?;
        let orientation = if dets.iter().all(|&d| d < 0) { -1 } else { 1 };
        if dets.iter().any(|&d| d * orientation <= 0) {
            return Ok((false, 0, 0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let r = config.coordinate_range;
        let mut used = 0;
        let mut count = 0;
        for _ in 0..config.probes {
            let mut redraws = 0;
            let c = loop {
                let p = Vector3::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r), rng.gen_range(-r..=r));
                used += 1;
                if !p.is_zero() {
                    if let Some(c) = self.covering_count(p, orientation)? {
                        break c;
                    }
                }
                redraws += 1;
                if redraws > config.max_redraws {
                    return Err(FanError::NoGenericProbe(used));
                }
            };
            count = c;
            if c != 1 {
                return Ok((false, c, used));
            }
        }
        Ok((true, count, used))
    }

    pub fn verify(&self) -> Result<VerificationReport, FanError> {
        self.verify_with(&ProbeConfig::default())
    }

    pub fn verify_with(&self, config: &ProbeConfig) -> Result<VerificationReport, FanError> {
        let ns = self.nonsingularity()?;
        let (complete, covering_count, probes_used) = self.completeness(config)?;
        Ok(VerificationReport {
            nonsingular: ns.bad_faces.is_empty(),
            complete,
            orientation: ns.orientation,
            bad_faces: ns.bad_faces,
            covering_count,
            probes_used,
        })
    }

    /// Certificate document for this assignment.
    pub fn to_certificate(&self) -> Certificate {
        Certificate {
            faces: self.triangulation.faces().to_vec(),
            m: self.triangulation.vertex_count(),
            vectors: self.vectors.iter().map(|v| v.to_array()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nonsingularity {
    pub orientation: i64,
    pub bad_faces: Vec<(Face, i64)>,
}

/// Parameters of the probe-ray completeness test.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub seed: u64,
    pub probes: usize,
    pub coordinate_range: i64,
    pub max_redraws: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            seed: 0,
            probes: 3,
            coordinate_range: 1_000_000,
            max_redraws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub nonsingular: bool,
    pub complete: bool,
    /// `-1` if the stored face orientation had to be reversed.
    pub orientation: i64,
    pub bad_faces: Vec<(Face, i64)>,
    pub covering_count: usize,
    pub probes_used: usize,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.nonsingular && self.complete
    }
}

/// JSON certificate: `{"faces": [[a,b,c],...], "m": int, "vectors": [[x,y,z],...]}`
/// with 0-based indices and keys in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub faces: Vec<Face>,
    pub m: usize,
    pub vectors: Vec<[i64; 3]>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Certificate, FanError> {
        serde_json::from_str(s).map_err(|e| FanError::Malformed(e.to_string()))
    }

    /// Validates the face list and pairs it with the vectors. The face
    /// orientation of the document is kept.
    pub fn to_fan(&self) -> Result<FanAssignment, FanError> {
        let t = validate(&self.faces)?;
        if t.vertex_count() != self.m {
            return Err(FanError::Malformed(format!(
                "declared m = {} but faces use {} vertices",
                self.m,
                t.vertex_count()
            )));
        }
        FanAssignment::new(t, self.vectors.iter().map(|&a| Vector3::from(a)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{octahedron, tetrahedron};

    const E1: Vector3 = Vector3::E1;
    const E2: Vector3 = Vector3::E2;
    const E3: Vector3 = Vector3::E3;

    #[test]
    fn determinants() {
        assert_eq!(det3(E1, E2, E3), Ok(1));
        assert_eq!(det3(E1, E2, E1.checked_add(E2).unwrap()), Ok(0));
        let (a, b, c) = (Vector3::new(0, -1, 0), Vector3::new(1, -1, 0), Vector3::new(0, -1, 1));
        assert_eq!(det3(a, b, c), Ok(1));
        let big = Vector3::new(i64::MAX, 0, 0);
        assert_eq!(det3(big, Vector3::new(0, 2, 0), E3), Err(FanError::Overflow));
    }

    #[test]
    fn cone_membership() {
        assert_eq!(cone_contains(E1, E2, E3, Vector3::new(1, 1, 1)), Ok(true));
        assert_eq!(cone_contains(E1, E2, E3, Vector3::new(-1, 1, 1)), Ok(false));
        assert_eq!(cone_contains(E1, E2, E3, E1), Ok(true));
        assert_eq!(cone_contains(E2, E1, E3, Vector3::new(1, 1, 1)), Ok(true));
        assert_eq!(
            cone_contains(E1, E2, Vector3::new(1, 1, 0), E3),
            Err(FanError::DegenerateCone)
        );
    }

    #[test]
    fn projective_space_fan() {
        let fa = FanAssignment::projective_space();
        let r = fa.verify().unwrap();
        assert!(r.nonsingular && r.complete);
        assert_eq!(r.covering_count, 1);
        assert_eq!(r.orientation, 1);
    }

    #[test]
    fn reversed_orientation_is_normalized() {
        let base = FanAssignment::projective_space();
        let flipped =
            FanAssignment::new(base.triangulation().mirrored(), base.vectors().to_vec()).unwrap();
        let r = flipped.verify().unwrap();
        assert!(r.is_valid());
        assert_eq!(r.orientation, -1);
        assert!(base.mirrored().verify().unwrap().is_valid());
    }

    #[test]
    fn singular_cone_detected() {
        let mut v = FanAssignment::projective_space().vectors().to_vec();
        let i = v.iter().position(|x| *x == Vector3::new(-1, -1, -1)).unwrap();
        v[i] = Vector3::new(-1, -1, -2);
        let fa = FanAssignment::new(tetrahedron(), v).unwrap();
        let r = fa.verify().unwrap();
        assert!(!r.nonsingular);
        assert_eq!(r.bad_faces.len(), 1);
        assert_eq!(r.bad_faces[0].1.abs(), 2);
        // Still complete: all determinants positive and the cones tile space.
        assert!(r.complete);
    }

    #[test]
    fn negated_vector_breaks_the_fan() {
        let base = FanAssignment::projective_space();
        for i in 0..4 {
            let mut v = base.vectors().to_vec();
            v[i] = -v[i];
            let r = FanAssignment::new(tetrahedron(), v).unwrap().verify().unwrap();
            assert!(!(r.nonsingular && r.complete));
        }
    }

    #[test]
    fn octahedron_orthant_fan() {
        // Vertices (0,1), (2,3), (4,5) are antipodal pairs.
        let v = vec![E1, -E1, E2, -E2, E3, -E3];
        let fa = FanAssignment::new(octahedron(), v).unwrap();
        let r = fa.verify().unwrap();
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn double_cover_is_not_complete() {
        // Link of a vertex winding twice: hexagonal bipyramid whose equator
        // vectors go around twice.
        let eq = [
            Vector3::new(1, 0, 0),
            Vector3::new(0, 1, 0),
            Vector3::new(-1, 0, 0),
            Vector3::new(0, -1, 0),
        ];
        let mut faces = Vec::new();
        for i in 0..8 {
            faces.push([8, i, (i + 1) % 8]);
            faces.push([9, (i + 1) % 8, i]);
        }
        let t = crate::sphere::validate(&faces).unwrap();
        let mut vectors: Vec<Vector3> = (0..8).map(|i| eq[i % 4]).collect();
        vectors.push(E3);
        vectors.push(-E3);
        let fa = FanAssignment::new(t, vectors).unwrap();
        let (complete, count, _) = fa.completeness(&ProbeConfig::default()).unwrap();
        assert!(!complete);
        assert_eq!(count, 2);
    }

    #[test]
    fn certificate_json_round_trip() {
        let fa = FanAssignment::projective_space();
        let json = fa.to_certificate().to_json();
        assert!(json.starts_with("{\"faces\":"));
        let back = Certificate::from_json(&json).unwrap().to_fan().unwrap();
        assert_eq!(back, fa);
        assert!(Certificate::from_json("{\"m\": 4}").is_err());
    }
}
