#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use hyghost::cmesh::CoarseMesh;
use hyghost::forest::{Adapt, Forest};
use hyghost::{Element, Scheme, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn mesh(name: &str) -> Arc<CoarseMesh> {
    Arc::new(CoarseMesh::builtin(name).unwrap())
}

pub fn uniform(name: &str, level: u8, ranks: usize) -> Forest {
    Forest::new_uniform(mesh(name), Scheme::default(), level, ranks).unwrap()
}

/// Random partition of `n` leaves into `p` parts; empty parts are allowed.
pub fn random_counts(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (0..p - 1).map(|_| rng.gen_range(0..=n)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(p);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(n - prev);
    out
}

/// Uniform base level, a few rounds of random refinement and coarsening up to `max_level`,
/// then a random partition.
pub fn random_forest(rng: &mut ChaCha8Rng, name: &str, max_level: u8, ranks: usize) -> Forest {
    let base = rng.gen_range(0..=max_level.min(2));
    let mut f = uniform(name, base, 1);
    let rounds = rng.gen_range(0..=max_level - base);
    for _ in 0..rounds {
        let p_ref = rng.gen_range(0.05..0.4);
        let marks: Vec<Adapt> = (0..f.num_leaves())
            .map(|_| {
                let x: f64 = rng.gen();
                if x < p_ref {
                    Adapt::Refine
                } else if x > 0.85 {
                    Adapt::Coarsen
                } else {
                    Adapt::Keep
                }
            })
            .collect();
        f = f.adapt(|info, e| if e.level >= max_level { Adapt::Keep } else { marks[info.global_index] });
    }
    let counts = random_counts(rng, f.num_leaves(), ranks);
    f.with_counts(counts)
}

/// Rank owning the leaf that contains max-level key `key` of tree `k`, by linear scan.
pub fn scan_owner(f: &Forest, k: usize, key: u64) -> usize {
    let sc = f.scheme();
    for p in 0..f.num_ranks() {
        for g in f.rank_range(p) {
            let (t, i) = f.locate(g);
            if t == k {
                let e = &f.tree_leaves(t)[i];
                if sc.sfc_key(e) <= key && key <= sc.last_sfc_key(e) {
                    return p;
                }
            }
        }
    }
    panic!("key {key} of tree {k} not covered");
}

pub type P = [i64; 3];

pub fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Signed incidence of `p` against the hyperplane through the points `f`.
pub fn side(dim: usize, f: &[P], p: P) -> i128 {
    let w = |v: P| v.map(|x| x as i128);
    let d = w(sub(p, f[0]));
    match dim {
        1 => d[0],
        2 => {
            let t = w(sub(f[1], f[0]));
            t[0] * d[1] - t[1] * d[0]
        }
        _ => {
            let (a, c) = (w(sub(f[1], f[0])), w(sub(f[2], f[0])));
            let n = [a[1] * c[2] - a[2] * c[1], a[2] * c[0] - a[0] * c[2], a[0] * c[1] - a[1] * c[0]];
            n[0] * d[0] + n[1] * d[1] + n[2] * d[2]
        }
    }
}

pub fn face_points(v: &[P], shape: Shape, f: u8) -> Vec<P> {
    shape.face_vertices(f).iter().map(|&i| v[i as usize]).collect()
}

/// Whether some face of `inner` lies in the hyperplane of face `f` of `outer`.
pub fn touches_face(sc: &Scheme, outer: &Element, f: u8, inner: &Element) -> bool {
    let dim = outer.shape.dim();
    let plane = face_points(&sc.vertices(outer), outer.shape, f);
    let v = sc.vertices(inner);
    (0..inner.shape.num_faces() as u8)
        .any(|g| face_points(&v, inner.shape, g).iter().all(|&p| side(dim, &plane, p) == 0))
}

/// Domain coordinates of the vertices of leaf `e` in tree `k`, wrapped periodically.
pub fn embedded(f: &Forest, k: usize, pts: &[P]) -> Vec<P> {
    let geo = f.cmesh().geometry().unwrap();
    let scale = f.scheme().root_len() as i64;
    let mut out: Vec<P> = pts.iter().map(|&p| geo.maps[k].apply(p, scale)).collect();
    geo.wrap(&mut out, scale);
    out.sort_unstable();
    out
}

/// Owners of the leaves that contain `e` or lie in `e` and touch its face `f`.
pub fn brute_owners_at_face(f: &Forest, k: usize, e: &Element, face: u8) -> BTreeSet<usize> {
    let sc = f.scheme();
    let off = f.tree_offset(k);
    f.tree_leaves(k)
        .iter()
        .enumerate()
        .filter(|(_, l)| sc.is_ancestor(l, e) || (sc.is_ancestor(e, l) && touches_face(sc, e, face, l)))
        .map(|(i, _)| f.rank_of_index(off + i))
        .collect()
}

/// A random element that is either an ancestor of a leaf or a child of one.
pub fn random_element(rng: &mut ChaCha8Rng, f: &Forest) -> (usize, Element) {
    let sc = f.scheme();
    let g = rng.gen_range(0..f.num_leaves());
    let (k, i) = f.locate(g);
    let leaf = f.tree_leaves(k)[i];
    let e = if rng.gen_bool(0.1) && leaf.level < sc.max_level() {
        sc.child(&leaf, rng.gen_range(0..leaf.shape.num_children())).unwrap()
    } else {
        sc.ancestor(&leaf, rng.gen_range(0..=leaf.level)).unwrap()
    };
    (k, e)
}

/// Checks every face of a uniform level-`level` forest on `name`: the neighbor
/// maps back, the shared face has the same embedded vertices, the two cells lie
/// on opposite sides, and faces without a neighbor lie on a non-periodic wall.
/// Returns the number of faces checked and the failures.
pub fn glue_failures(name: &str, level: u8) -> (usize, Vec<String>) {
    let f = uniform(name, level, 1);
    let sc = f.scheme();
    let geo = f.cmesh().geometry().unwrap();
    let dim = f.cmesh().dim();
    let scale = sc.root_len() as i64;
    let mut lo = [i64::MAX; 3];
    let mut hi = [i64::MIN; 3];
    for k in 0..f.num_trees() {
        for c in geo.tree_corners(f.cmesh().shape(k), k) {
            for a in 0..3 {
                lo[a] = lo[a].min(c[a] * scale);
                hi[a] = hi[a].max(c[a] * scale);
            }
        }
    }
    let periodic = geo.period.iter().any(Option::is_some);
    let raw = |k: usize, pts: &[P]| -> Vec<P> { pts.iter().map(|&p| geo.maps[k].apply(p, scale)).collect() };
    let mut checked = 0;
    let mut fails = Vec::new();
    for k in 0..f.num_trees() {
        for e in f.tree_leaves(k) {
            let v = sc.vertices(e);
            for face in 0..e.shape.num_faces() as u8 {
                checked += 1;
                let ef = embedded(&f, k, &face_points(&v, e.shape, face));
                let Some((k2, n, g)) = f.face_neighbor(k, e, face) else {
                    let on_wall = (0..dim).any(|a| {
                        geo.period[a].is_none()
                            && (ef.iter().all(|p| p[a] == lo[a]) || ef.iter().all(|p| p[a] == hi[a]))
                    });
                    if !on_wall {
                        fails.push(format!("tree {k} {e} face {face}: missing neighbor"));
                    }
                    continue;
                };
                if !sc.is_valid(&n) || n.level != e.level || f.face_neighbor(k2, &n, g) != Some((k, *e, face)) {
                    fails.push(format!("tree {k} {e} face {face}: no round trip via tree {k2} {n} face {g}"));
                    continue;
                }
                let nv = sc.vertices(&n);
                if ef != embedded(&f, k2, &face_points(&nv, n.shape, g)) {
                    fails.push(format!("tree {k} {e} face {face}: face differs from tree {k2} {n} face {g}"));
                    continue;
                }
                if !periodic {
                    let plane = raw(k, &face_points(&v, e.shape, face));
                    let off = |vs: Vec<P>| vs.iter().map(|&p| side(dim, &plane, p)).find(|&s| s != 0).unwrap_or(0);
                    if off(raw(k, &v)).signum() * off(raw(k2, &nv)).signum() >= 0 {
                        fails.push(format!("tree {k} {e} face {face}: overlaps tree {k2} {n}"));
                    }
                }
            }
        }
    }
    (checked, fails)
}
