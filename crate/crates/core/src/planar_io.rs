//! Reading and writing triangulations.
//!
//! Two formats are supported:
//!
//! * binary `planar_code` as written by plantri: the 15-byte header
//!   `>>planar_code<<`, then per graph one byte `n` followed by, for every
//!   vertex, its clockwise neighbor list as 1-based bytes terminated by `0`.
//!   Only the one-byte variant (`n <= 255`) is handled.
//! * a text format: the vertex count on the first line, then one face per line
//!   as three 0-based indices.

use std::fmt::Write as _;

use thiserror::Error;

use crate::sphere::{validate, Face, SphereError, Triangulation, VertexId};

pub const PLANAR_CODE_HEADER: &[u8; 15] = b">>planar_code<<";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("missing >>planar_code<< header")]
    BadHeader,
    #[error("record {0} is truncated")]
    TruncatedRecord(usize),
    #[error("record {record}: neighbor {value} outside 1..={n}")]
    NeighborOutOfRange { record: usize, value: u8, n: u8 },
    #[error("record {0} is not a triangulation: {1}")]
    NotTriangulation(usize, String),
    #[error("triangulation has {0} vertices; planar_code supports at most 255")]
    TooManyVertices(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// Parses a planar_code stream.
pub fn read_planar_code(bytes: &[u8]) -> Result<Vec<Triangulation>, FormatError> {
    let body = bytes
        .strip_prefix(PLANAR_CODE_HEADER.as_slice())
        .ok_or(FormatError::BadHeader)?;
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < body.len() {
        let record = out.len();
        let n = body[pos];
        pos += 1;
        if n == 0 {
            return Err(FormatError::NotTriangulation(record, "zero vertices".into()));
        }
        let mut rotation = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut nbrs = Vec::new();
            loop {
                let &b = body.get(pos).ok_or(FormatError::TruncatedRecord(record))?;
                pos += 1;
                if b == 0 {
                    break;
                }
                if b > n {
                    return Err(FormatError::NeighborOutOfRange { record, value: b, n });
                }
                nbrs.push(b as usize - 1);
            }
            // Stored clockwise; internal rotations are counter-clockwise.
            nbrs.reverse();
            rotation.push(nbrs);
        }
        let faces = trace_faces(&rotation).map_err(|e| FormatError::NotTriangulation(record, e))?;
        let t = validate(&faces)
            .map_err(|e| FormatError::NotTriangulation(record, e.to_string()))?;
        out.push(t);
    }
    Ok(out)
}

/// Recovers the oriented faces of a counter-clockwise rotation system,
/// requiring every face cycle to be a triangle.
fn trace_faces(rotation: &[Vec<VertexId>]) -> Result<Vec<Face>, String> {
    let succ = |v: VertexId, a: VertexId| -> Option<VertexId> {
        let r = &rotation[v];
        let i = r.iter().position(|&x| x == a)?;
        Some(r[(i + 1) % r.len()])
    };
    let mut faces = Vec::new();
    for (v, r) in rotation.iter().enumerate() {
        if r.len() < 3 {
            return Err(format!("vertex {} has degree {}", v + 1, r.len()));
        }
        let mut seen = r.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) || seen.contains(&v) {
            return Err(format!("vertex {} has a loop or repeated neighbor", v + 1));
        }
        for &a in r {
            if !rotation[a].contains(&v) {
                return Err(format!("edge {}-{} is not symmetric", v + 1, a + 1));
            }
            let b = succ(v, a).unwrap();
            if succ(a, b) != Some(v) || succ(b, v) != Some(a) {
                return Err(format!("face at edge {}-{} is not a triangle", v + 1, a + 1));
            }
            if v < a && v < b {
                faces.push([v, a, b]);
            }
        }
    }
    Ok(faces)
}

/// Encodes triangulations as a planar_code stream.
pub fn write_planar_code<'a, I>(spheres: I) -> Result<Vec<u8>, FormatError>
where
    I: IntoIterator<Item = &'a Triangulation>,
{
    let mut out = PLANAR_CODE_HEADER.to_vec();
    for t in spheres {
        let n = t.vertex_count();
        if n > 255 {
            return Err(FormatError::TooManyVertices(n));
        }
        out.push(n as u8);
        for v in 0..n {
            out.extend(t.rotation(v).iter().rev().map(|&u| (u + 1) as u8));
            out.push(0);
        }
    }
    Ok(out)
}

/// Text form: `m` on the first line, then one oriented face per line.
pub fn write_text(t: &Triangulation) -> String {
    let mut s = format!("{}\n", t.vertex_count());
    for [a, b, c] in t.faces() {
        writeln!(s, "{a} {b} {c}").unwrap();
    }
    s
}

pub fn read_text(text: &str) -> Result<Triangulation, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, first) = lines.next().ok_or(FormatError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let m: usize = first.parse().map_err(|_| FormatError::Parse {
        line,
        msg: format!("expected vertex count, found {first:?}"),
    })?;
    let mut faces = Vec::new();
    for (line, l) in lines {
        let nums: Vec<usize> = l
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| FormatError::Parse {
                line,
                msg: format!("bad face {l:?}"),
            })?;
        let face: Face = nums.try_into().map_err(|_| FormatError::Parse {
            line,
            msg: "a face needs exactly three indices".into(),
        })?;
        if let Some(&v) = face.iter().find(|&&v| v >= m) {
            return Err(FormatError::Parse {
                line,
                msg: format!("vertex {v} out of range for m = {m}"),
            });
        }
        faces.push(face);
    }
    let t = validate(&faces)?;
    if t.vertex_count() != m {
        return Err(FormatError::Parse {
            line: 1,
            msg: format!("declared {m} vertices, faces use {}", t.vertex_count()),
        });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{icosahedron, tetrahedron};

    fn hand_tetrahedron() -> Vec<u8> {
        let mut b = PLANAR_CODE_HEADER.to_vec();
        b.extend([4, 2, 3, 4, 0, 1, 4, 3, 0, 1, 2, 4, 0, 1, 3, 2, 0]);
        b
    }

    #[test]
    fn reads_hand_encoded_tetrahedron() {
        let ts = read_planar_code(&hand_tetrahedron()).unwrap();
        assert_eq!(ts.len(), 1);
        assert_eq!(ts[0].face_count(), 4);
        assert!(ts[0].is_isomorphic(&tetrahedron()));
    }

    #[test]
    fn header_only_and_empty_write() {
        assert!(read_planar_code(PLANAR_CODE_HEADER).unwrap().is_empty());
        assert_eq!(write_planar_code([]).unwrap(), PLANAR_CODE_HEADER.to_vec());
    }

    #[test]
    fn tetrahedron_record_is_17_bytes() {
        let b = write_planar_code([&tetrahedron()]).unwrap();
        assert_eq!(b.len(), 15 + 17);
        assert_eq!(b[15], 4);
    }

    #[test]
    fn binary_errors() {
        assert_eq!(read_planar_code(b"<<planar_code>>"), Err(FormatError::BadHeader));
        let mut b = hand_tetrahedron();
        b.pop();
        assert_eq!(read_planar_code(&b), Err(FormatError::TruncatedRecord(0)));
        let mut b = hand_tetrahedron();
        b[16] = 9;
        assert!(matches!(
            read_planar_code(&b),
            Err(FormatError::NeighborOutOfRange { value: 9, .. })
        ));
        // A 4-cycle drawn in the plane is not a triangulation.
        let mut b = PLANAR_CODE_HEADER.to_vec();
        b.extend([4, 2, 4, 0, 1, 3, 0, 2, 4, 0, 1, 3, 0]);
        assert!(matches!(
            read_planar_code(&b),
            Err(FormatError::NotTriangulation(0, _))
        ));
    }

    #[test]
    fn round_trips_preserve_structure() {
        let t = icosahedron();
        let bin = write_planar_code([&t, &tetrahedron()]).unwrap();
        let back = read_planar_code(&bin).unwrap();
        assert_eq!(back[0], t);
        assert_eq!(back[1], tetrahedron());
        assert_eq!(read_text(&write_text(&t)).unwrap(), t);
    }

    #[test]
    fn text_reader() {
        let t = read_text("4\n0 1 2\n0 1 3\n0 2 3\n1 2 3").unwrap();
        assert!(t.is_isomorphic(&tetrahedron()));
        assert!(matches!(
            read_text("4\n0 1 2\n0 1 3\n0 2 3\n"),
            Err(FormatError::Sphere(SphereError::NotClosed(..)))
        ));
        assert!(matches!(read_text("4\n0 1\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(read_text("x\n"), Err(FormatError::Parse { line: 1, .. })));
    }
}
