mod common;

use fanweaver::atlas::Atlas;
use fanweaver::enumerate::{generate_min_degree, EnumerationLimits};
use fanweaver::ops::{find_inverse_i, parse_script, write_script};
use fanweaver::realize::{
    realize, realize_with, realize_without_search, replay, replay_forward, search_assignment, Base,
    RealizeError, SearchConfig,
};
use fanweaver::sphere::icosahedron;
use fanweaver::Triangulation;

fn sphere_with_vertices(m: usize) -> Vec<Triangulation> {
    fanweaver::enumerate::enumerate_spheres(m, None, &EnumerationLimits::default())
        .unwrap()
        .iter()
        .map(|c| c.to_triangulation())
        .collect()
}

/// Irreducible and without a star vertex.
fn table_sphere() -> Triangulation {
    Atlas::builtin().get("5^12 6^6 (i)").unwrap().triangulation.clone()
}

#[test]
fn icosahedron_reduces_by_its_star_without_the_atlas() {
    let r = realize_without_search(&icosahedron(), &Atlas::new(Vec::new())).unwrap();
    assert_eq!(r.base, Base::Cp3);
    assert!(r.report.is_valid());
}

#[test]
fn scripts_replay_to_the_same_fan() {
    for t in sphere_with_vertices(9) {
        let r = realize(&t, &SearchConfig::default()).unwrap();
        assert_eq!(replay(&r.base_fan, &r.log).unwrap(), r.fan);
        assert_eq!(replay_forward(&r.base_fan, &r.script()).unwrap(), r.fan);
        let parsed = parse_script(&write_script(&r.script())).unwrap();
        assert_eq!(parsed, r.script());
    }
}

#[test]
fn realization_is_deterministic() {
    for t in sphere_with_vertices(8) {
        let a = realize(&t, &SearchConfig::default()).unwrap();
        let b = realize(&t, &SearchConfig::default()).unwrap();
        assert_eq!(a.fan, b.fan);
        assert_eq!(a.log, b.log);
    }
}

#[test]
fn degree_three_vertices_are_removed_first() {
    for t in sphere_with_vertices(7) {
        if find_inverse_i(&t).is_some() {
            let r = realize(&t, &SearchConfig::default()).unwrap();
            assert_eq!(r.log[0].kind(), fanweaver::ops::OpKind::I);
        }
    }
}

#[test]
fn icosahedron_ends_at_the_atlas() {
    let r = realize(&icosahedron(), &SearchConfig::default()).unwrap();
    assert!(r.log.is_empty());
    assert_eq!(r.base, Base::Atlas("5^12".into()));
}

#[test]
fn every_atlas_sphere_realizes_relabeled() {
    let atlas = Atlas::builtin();
    for e in atlas.entries() {
        let m = e.vertex_count();
        let perm: Vec<usize> = (0..m).map(|i| (m - 1 - i + 3) % m).collect();
        let t = e.triangulation.relabeled(&perm).mirrored();
        let r = realize_without_search(&t, atlas).unwrap();
        assert_eq!(r.fan.triangulation(), &t);
        assert!(r.report.is_valid(), "{}", e.label);
    }
}

#[test]
fn empty_atlas_fails_without_search() {
    let err = realize_without_search(&table_sphere(), &Atlas::new(Vec::new())).unwrap_err();
    match err {
        RealizeError::RealizationFailed { m, log, stuck, .. } => {
            assert_eq!(m, 18);
            assert!(log.is_empty());
            assert!(!stuck.is_empty());
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn search_finds_a_table_sphere() {
    let t = Atlas::builtin().get("5^12 6^4 (ii)").unwrap().triangulation.clone();
    let cfg = SearchConfig {
        coordinate_bound: 2,
        ..SearchConfig::default()
    };
    let fan = search_assignment(&t, &cfg).unwrap().expect("a fan within the bound");
    assert!(fan.verify().unwrap().is_valid());
    assert!(fan.vectors().iter().all(|v| v.to_array().iter().all(|x| x.abs() <= 2)));
}

#[test]
fn search_fallback_on_an_empty_atlas() {
    let t = table_sphere();
    let cfg = SearchConfig {
        coordinate_bound: 1,
        ..SearchConfig::default()
    };
    let r = realize_with(&t, &cfg, &Atlas::new(Vec::new())).unwrap();
    assert_eq!(r.fan.triangulation(), &t);
    assert_eq!(r.base, Base::Search);
    assert!(r.report.is_valid());
}

#[test]
fn min_degree_five_spheres_up_to_sixteen_vertices_realize() {
    for m in 12..=16 {
        for form in generate_min_degree(m, 5, u64::MAX).unwrap() {
            let t = form.to_triangulation();
            let r = realize_without_search(&t, Atlas::builtin()).unwrap();
            assert!(r.report.is_valid());
        }
    }
}

/// Both link diagonals of a degree-4 vertex being edges would give a K5
/// subgraph, so inverse (ii) always has a free diagonal.
#[test]
fn inverse_ii_never_meets_both_diagonals() {
    use fanweaver::ops::{apply_inverse_ii, OpError};
    for m in 6..=10 {
        for t in sphere_with_vertices(m) {
            for v in (0..m).filter(|&v| t.degree(v) == 4) {
                let r = apply_inverse_ii(&t, v);
                assert!(!matches!(r, Err(OpError::BothDiagonalsPresent(_))));
            }
        }
    }
}

#[test]
fn min_degree_five_counts_agree_with_the_census() {
    let counts: Vec<usize> = (12..=14).map(|m| generate_min_degree(m, 5, u64::MAX).unwrap().len()).collect();
    assert_eq!(counts, [1, 0, 1]);
}
