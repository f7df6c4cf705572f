//! Regenerates `data/atlas.txt`.
//!
//! The minimum-degree-5 spheres with 12 to 18 vertices are generated
//! exhaustively and labeled. Within a degree profile, labels are told apart by
//! the `k` of an inverse C_k witness and by which vector-table column can be
//! matched to the vertices. Table columns are stored with vertex `i` carrying
//! letter `i`; the other entries get a certificate by inverse C_k and replay.
//!
//! Usage: `cargo run --release -p fanweaver --example build_atlas [--explore] [OUT]`

use std::collections::BTreeMap;

use fanweaver::atlas::{letter_fan, vector_column, Atlas, AtlasEntry, Provenance, VECTOR_TABLE};
use fanweaver::atlas::{count_matchings, derive_certificate};
use fanweaver::enumerate::generate_min_degree;
use fanweaver::fan::Vector3;
use fanweaver::ops::ck_outer_ring;
use fanweaver::{CanonicalForm, Triangulation};

/// Labels whose spheres carry a star vertex, with its `k`.
const STARS: [(&str, usize); 12] = [
    ("5^12", 5),
    ("5^12 6^5 (i)", 5),
    ("5^14 6^2 7^2 (i)", 5),
    ("5^12 6^2", 6),
    ("5^12 6^3", 6),
    ("5^12 6^4 (i)", 6),
    ("5^12 6^5 (iii)", 6),
    ("5^13 6^4 7^1 (ii)", 6),
    ("5^14 7^2", 7),
    ("5^13 6^3 7^1", 7),
    ("5^14 6^2 7^2 (ii)", 7),
    ("5^16 8^2", 8),
];

/// Labels whose degree-6 vertices induce a cycle; no other sphere of the same
/// profile has that property.
const CYCLES: [&str; 2] = ["5^12 6^6 (ii)", "5^12 6^6 (iii)"];

struct Class {
    t: Triangulation,
    form: CanonicalForm,
    profile: String,
    /// `k` values of inverse C_k witnesses.
    ks: Vec<usize>,
    /// Labels of table columns that match.
    columns: Vec<&'static str>,
}

fn labels_for(profile: &str) -> Vec<String> {
    let mut out: Vec<String> = STARS
        .iter()
        .map(|(l, _)| l.to_string())
        .chain(VECTOR_TABLE.iter().flat_map(|c| c.labels.iter().map(|l| l.to_string())))
        .filter(|l| l.split(" (").next() == Some(profile))
        .collect();
    out.sort_by_key(|l| roman(l));
    out.dedup();
    out
}

fn roman(label: &str) -> usize {
    let suffix = label.split(" (").nth(1).unwrap_or("").trim_end_matches(')');
    ["", "i", "ii", "iii", "iv", "v", "vi"]
        .iter()
        .position(|r| *r == suffix)
        .expect("known suffix")
}

fn admissible(label: &str, c: &Class) -> bool {
    let star_ok = STARS
        .iter()
        .find(|(l, _)| *l == label)
        .is_none_or(|(_, k)| c.ks.contains(k));
    let table_ok = vector_column(label).is_none_or(|_| c.columns.contains(&label));
    let cycle_ok = !c.profile.starts_with("5^12 6^6")
        || CYCLES.contains(&label) == c.t.high_degree_subcomplex().is_cycle();
    star_ok && table_ok && cycle_ok
}

/// All bijections from labels to classes that satisfy every constraint.
fn assignments(labels: &[String], classes: &[&Class]) -> Vec<Vec<usize>> {
    fn go(i: usize, labels: &[String], classes: &[&Class], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == labels.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..classes.len() {
            if !cur.contains(&j) && admissible(&labels[i], classes[j]) {
                cur.push(j);
                go(i + 1, labels, classes, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, labels, classes, &mut Vec::new(), &mut out);
    out
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let explore = args.iter().any(|a| a == "--explore");
    let out_path = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/atlas.txt").to_string());

    let mut classes = Vec::new();
    for m in 12..=18 {
        for form in generate_min_degree(m, 5, u64::MAX).expect("generation") {
            let t = form.to_triangulation();
            let profile = t.degree_profile().label();
            let mut ks: Vec<usize> = (0..m)
                .filter(|&v| ck_outer_ring(&t, v).is_some())
                .map(|v| t.degree(v))
                .collect();
            ks.sort_unstable();
            ks.dedup();
            let columns = VECTOR_TABLE
                .iter()
                .filter(|c| c.labels.iter().any(|l| l.split(" (").next() == Some(profile.as_str())))
                .filter(|c| letter_fan(&t, c).is_some())
                .flat_map(|c| c.labels.iter().copied().filter(|l| l.starts_with(profile.as_str())))
                .collect();
            classes.push(Class { t, form, profile, ks, columns });
        }
    }

    let mut by_profile: BTreeMap<(usize, String), Vec<&Class>> = BTreeMap::new();
    for c in &classes {
        by_profile.entry((c.t.vertex_count(), c.profile.clone())).or_default().push(c);
    }

    if explore {
        for ((m, p), cs) in &by_profile {
            println!("m={m} {p}: {} classes, labels {:?}", cs.len(), labels_for(p));
            for (i, c) in cs.iter().enumerate() {
                let sub = c.t.high_degree_subcomplex();
                let counts: Vec<usize> = VECTOR_TABLE
                    .iter()
                    .filter(|col| col.labels.iter().any(|l| l.starts_with(p.as_str())))
                    .map(|col| {
                        let v: Vec<Vector3> = col.vectors.iter().map(|&x| Vector3::from(x)).collect();
                        count_matchings(&c.t, &v, 1000)
                    })
                    .collect();
                println!(
                    "  #{i}: ck {:?} columns {:?} det-matchings {:?} high-degree {}v/{}e cycle={}",
                    c.ks,
                    c.columns,
                    counts,
                    sub.vertices.len(),
                    sub.edges.len(),
                    sub.is_cycle()
                );
            }
            for a in assignments(&labels_for(p), cs) {
                println!("  assignment {a:?}");
            }
        }
        return;
    }

    // Labels in order of increasing m so that reductions can use earlier
    // entries.
    let mut labeled: Vec<(String, &Class)> = Vec::new();
    for ((_, p), cs) in &by_profile {
        let labels = labels_for(p);
        let all = assignments(&labels, cs);
        assert!(!all.is_empty(), "no consistent labeling for {p}");
        if all.len() > 1 {
            eprintln!("{p}: {} consistent labelings, using the first", all.len());
        }
        for (l, &j) in labels.iter().zip(&all[0]) {
            labeled.push((l.clone(), cs[j]));
        }
    }
    labeled.sort_by_key(|(l, c)| (c.t.vertex_count(), c.profile.clone(), roman(l)));

    let mut entries: Vec<AtlasEntry> = Vec::new();
    for (label, c) in &labeled {
        let entry = if let Some(col) = vector_column(label) {
            let fan = letter_fan(&c.t, col).expect("column matches");
            let star = (0..fan.triangulation().vertex_count())
                .find(|&v| ck_outer_ring(fan.triangulation(), v).is_some());
            assert!(star.is_none(), "{label}: table entry has an inverse C_k witness");
            AtlasEntry::new(label, fan.triangulation().clone(), None, Some(fan), Provenance::Table)
        } else {
            let k = STARS.iter().find(|(l, _)| l == label).unwrap().1;
            let rank = c.t.canonical_labeling().rank();
            let star = (0..c.t.vertex_count())
                .filter(|&v| c.t.degree(v) == k && ck_outer_ring(&c.t, v).is_some())
                .min_by_key(|&v| rank[v])
                .unwrap();
            let bare = AtlasEntry::new(label, c.t.clone(), Some(star), None, Provenance::None);
            let fan = derive_certificate(&bare, &Atlas::new(entries.clone())).expect("derivable");
            assert!(fan.verify().unwrap().is_valid());
            AtlasEntry::new(label, c.t.clone(), Some(star), Some(fan), Provenance::Reduction)
        };
        assert_eq!(entry.canonical, c.form);
        entries.push(entry);
    }
    let atlas = Atlas::new(entries);
    let mut text = String::from(
        "# Minimum-degree-5 spheres with at most 18 vertices and fan certificates.\n\
         # Regenerate with: cargo run --release -p fanweaver --example build_atlas\n",
    );
    text.push_str(&atlas.to_text());
    Atlas::parse(&text, true).expect("round trip");
    std::fs::write(&out_path, text).expect("write atlas");
    eprintln!("wrote {} entries to {out_path}", atlas.len());
}
