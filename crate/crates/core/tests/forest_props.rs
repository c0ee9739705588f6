mod common;

use std::collections::HashSet;

use common::{brute_owners_at_face, random_element, random_forest, rng, scan_owner, uniform};
use hyghost::forest::OwnerRange;
use hyghost::harness::{build_forest, Band, Pattern, ScenarioConfig};
use hyghost::Scheme;
use rand::seq::SliceRandom;
use rand::Rng;

const MESHES: [&str; 6] = ["hex_cube", "tet_cube", "tri_unit", "hybrid_cube", "periodic_quad", "prism_cube"];

#[test]
fn owner_search_matches_linear_scan() {
    let mut r = rng(1);
    for _ in 0..40 {
        let name = *MESHES.choose(&mut r).unwrap();
        let ranks = r.gen_range(1..=16);
        let f = random_forest(&mut r, name, 4, ranks);
        let hi = f.num_ranks() - 1;
        for _ in 0..50 {
            let (k, e) = random_element(&mut r, &f);
            let span = f.scheme().last_sfc_key(&e) - f.scheme().sfc_key(&e);
            let key = f.scheme().sfc_key(&e) + r.gen_range(0..=span);
            let p = scan_owner(&f, k, key);
            assert_eq!(f.owner(k, key, 0, hi), p);
            assert_eq!(f.owner(k, key, p, hi), p);
            assert_eq!(f.owner(k, key, 0, p), p);
        }
    }
}

#[test]
fn owners_are_monotone_along_the_curve() {
    let mut r = rng(2);
    for _ in 0..20 {
        let name = *MESHES.choose(&mut r).unwrap();
        let ranks = r.gen_range(1..=16);
        let f = random_forest(&mut r, name, 4, ranks);
        assert!(f.markers().windows(2).all(|w| w[0] <= w[1]));
        let mut prev = 0;
        for g in 0..f.num_leaves() {
            let (k, i) = f.locate(g);
            let e = f.tree_leaves(k)[i];
            let p = f.owner_of(k, &e);
            assert_eq!(p, f.rank_of_index(g));
            assert!(p >= prev);
            prev = p;
        }
    }
}

#[test]
fn owners_at_face_matches_brute_force() {
    let mut r = rng(3);
    for _ in 0..30 {
        let name = *MESHES.choose(&mut r).unwrap();
        let ranks = r.gen_range(1..=16);
        let f = random_forest(&mut r, name, 4, ranks);
        for _ in 0..20 {
            let (k, e) = random_element(&mut r, &f);
            let face = r.gen_range(0..e.shape.num_faces() as u8);
            let expected = brute_owners_at_face(&f, k, &e, face);
            assert_eq!(f.owners_at_face(k, &e, face, f.full_window()), expected, "{name} tree {k} {e} face {face}");
            let w: OwnerRange = f.owner_range(k, &e);
            assert_eq!(f.owners_at_face(k, &e, face, w), expected);
            assert_eq!(f.first_owner_at_face(k, &e, face, w), *expected.first().unwrap());
            assert_eq!(f.last_owner_at_face(k, &e, face, w), *expected.last().unwrap());
        }
    }
}

#[test]
fn half_neighbors_are_neighbors_of_face_children() {
    let mut r = rng(4);
    for _ in 0..20 {
        let name = *MESHES.choose(&mut r).unwrap();
        let f = random_forest(&mut r, name, 3, 1);
        let sc = f.scheme();
        for k in 0..f.num_trees() {
            for e in f.tree_leaves(k) {
                for face in 0..e.shape.num_faces() as u8 {
                    let got: HashSet<_> = f.half_face_neighbors(k, e, face).unwrap().into_iter().collect();
                    let want: HashSet<_> = sc
                        .face_children(e, face)
                        .filter_map(|fc| f.face_neighbor(k, &sc.child(e, fc.child_id as usize).unwrap(), fc.child_face))
                        .collect();
                    assert_eq!(got, want, "{name} tree {k} {e} face {face}");
                }
            }
        }
    }
}

#[test]
fn adapt_and_partition_keep_the_forest_valid() {
    let mut r = rng(5);
    for _ in 0..30 {
        let name = *MESHES.choose(&mut r).unwrap();
        let ranks = r.gen_range(1..=7);
        let f = random_forest(&mut r, name, 4, ranks);
        f.validate().unwrap();
        let g = f.repartition();
        g.validate().unwrap();
        let counts: Vec<usize> = (0..g.num_ranks()).map(|p| g.local_count(p)).collect();
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        let b = f.balance();
        b.validate().unwrap();
        assert!(b.is_balanced());
        assert!(b.num_leaves() >= f.num_leaves());
    }
}

#[test]
fn uniform_counts() {
    for (name, level, n) in
        [("hex_cube", 4, 4096), ("tet_cube", 4, 24576), ("hybrid_cube", 1, 128), ("tri_unit", 3, 128)]
    {
        let f = uniform(name, level, 1024.min(n));
        assert_eq!(f.num_leaves(), n);
    }
}

#[test]
fn every_third_refinement_count() {
    let cfg = ScenarioConfig { pattern: Pattern::EveryThird { rounds: 1 }, level: 4, ..ScenarioConfig::default() };
    let f = build_forest(&cfg, Scheme::default()).unwrap();
    // 1365 of 4096 leaves are refined into 8
    assert_eq!(f.num_leaves(), 4096 + 7 * 1365);
    assert_eq!(f.num_leaves(), 13651);
}

#[test]
fn band_has_fine_core_and_coarse_far_field() {
    let (level, extra, step) = (3u8, 2u8, 2.0);
    let cfg = ScenarioConfig {
        cmesh: "tet_cube".into(),
        level,
        extra_levels: extra,
        pattern: Pattern::Band { step },
        ..ScenarioConfig::default()
    };
    let f = build_forest(&cfg, Scheme::default()).unwrap();
    let band = Band::default();
    assert!((band.offset(level, 0.0) - 0.31).abs() < 1e-12);
    assert!((band.offset(level, step) - 0.51).abs() < 1e-12);
    let sc = f.scheme();
    let geo = f.cmesh().geometry().unwrap();
    let unit = (geo.denom * sc.root_len() as i64) as f64;
    let (mut fine, mut coarse) = (0, 0);
    for k in 0..f.num_trees() {
        for e in f.tree_leaves(k) {
            let vs = sc.vertices(e);
            let mut m = [0.0; 3];
            for v in &vs {
                let p = geo.maps[k].apply(*v, sc.root_len() as i64);
                for a in 0..3 {
                    m[a] += p[a] as f64 / (unit * vs.len() as f64);
                }
            }
            let s: f64 = (0..3).map(|a| band.normal[a] * m[a]).sum::<f64>() - band.offset(level, step);
            if (0.0..=band.width).contains(&s) {
                assert_eq!(e.level, level + extra, "{e} lies in the band");
                fine += 1;
            } else if s < -band.width || s > 2.0 * band.width {
                assert_eq!(e.level, level, "{e} lies far from the band");
                coarse += 1;
            }
        }
    }
    assert!(fine > 0 && coarse > 0);
}
