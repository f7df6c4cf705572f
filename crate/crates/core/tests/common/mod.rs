//! Helpers shared by the integration tests: independent arithmetic oracles
//! and random operation sequences.
#![allow(dead_code)]

use fanweaver::fan::{FanAssignment, Vector3};
use fanweaver::ops::{apply_ck, apply_i, apply_ii, OpRecord};
use rand::Rng;

/// Determinant by the rule of Sarrus in 128-bit arithmetic.
pub fn det_oracle(a: [i64; 3], b: [i64; 3], c: [i64; 3]) -> i128 {
    let [a, b, c] = [a, b, c].map(|v| v.map(i128::from));
    a[0] * b[1] * c[2] + a[1] * b[2] * c[0] + a[2] * b[0] * c[1]
        - a[2] * b[1] * c[0]
        - a[0] * b[2] * c[1]
        - a[1] * b[0] * c[2]
}

/// Number of faces whose cone contains `p` in its interior, or `None` when `p`
/// lies on the boundary of some cone.
pub fn covering_oracle(fan: &FanAssignment, p: [i64; 3]) -> Option<usize> {
    let mut count = 0;
    for &[a, b, c] in fan.triangulation().faces() {
        let [a, b, c] = [a, b, c].map(|v| fan.vector(v).to_array());
        let d = det_oracle(a, b, c);
        let parts = [det_oracle(p, b, c), det_oracle(a, p, c), det_oracle(a, b, p)];
        if parts.contains(&0) {
            return None;
        }
        if parts.iter().all(|&x| x.signum() == d.signum()) {
            count += 1;
        }
    }
    Some(count)
}

pub fn random_vector(rng: &mut impl Rng, range: i64) -> [i64; 3] {
    [0; 3].map(|_| rng.gen_range(-range..=range))
}

/// A random sequence of (i), (ii) and C_k (k <= 8) applied to the fan of
/// projective space.
pub fn random_op_sequence(rng: &mut impl Rng, len: usize) -> (FanAssignment, Vec<OpRecord>) {
    let mut fan = FanAssignment::projective_space();
    let mut log = Vec::new();
    for _ in 0..len {
        let t = fan.triangulation();
        let small: Vec<usize> = (0..t.vertex_count()).filter(|&v| t.degree(v) <= 8).collect();
        let step = match rng.gen_range(0..3) {
            1 => {
                let edges = t.edges();
                let (a, b) = edges[rng.gen_range(0..edges.len())];
                apply_ii(&fan, a, b)
            }
            2 if !small.is_empty() => apply_ck(&fan, small[rng.gen_range(0..small.len())]),
            _ => {
                let faces = t.faces();
                apply_i(&fan, faces[rng.gen_range(0..faces.len())])
            }
        };
        let (next, rec) = step.expect("forward operations apply to unimodular fans");
        fan = next;
        log.push(rec);
    }
    (fan, log)
}

pub fn to_arrays(v: &[Vector3]) -> Vec<[i64; 3]> {
    v.iter().map(|x| x.to_array()).collect()
}
