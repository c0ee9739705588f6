//! Ghost layer construction: three mirror-set algorithms, the symmetric
//! exchange, and a brute-force geometric oracle.
//!
//! Mirrors are stored as global leaf indices, which sort like `(tree, SFC)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::element::{Element, Shape};
use crate::forest::{Forest, OwnerRange};
use crate::search::{forest_search, SearchStats};

/// `R_p^q` for one rank `p`, keyed by `q`.
pub type Mirrors = BTreeMap<usize, BTreeSet<usize>>;

#[derive(Debug, Error)]
pub enum GhostError {
    #[error("asymmetric mirror sets: rank {p} sends to {q} but {q} sends nothing back")]
    Asymmetric { p: usize, q: usize },
    #[error("oracle needs tree coordinates; coarse mesh `{0}` has none")]
    NoGeometry(String),
    #[error("unknown algorithm `{0}` (expected v1, v2 or v3)")]
    UnknownAlgorithm(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Half-size neighbors with unique owners; balanced forests only.
    V1,
    /// Same-level neighbors and owners at face.
    V2,
    /// Top-down search that skips locally surrounded subtrees.
    V3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::V1, Algorithm::V2, Algorithm::V3];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::V1 => "v1",
            Algorithm::V2 => "v2",
            Algorithm::V3 => "v3",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = GhostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "v1" => Ok(Algorithm::V1),
            "v2" => Ok(Algorithm::V2),
            "v3" => Ok(Algorithm::V3),
            other => Err(GhostError::UnknownAlgorithm(other.to_string())),
        }
    }
}

fn add(m: &mut Mirrors, q: usize, global: usize) {
    m.entry(q).or_default().insert(global);
}

fn local_leaf_stats(forest: &Forest, p: usize) -> SearchStats {
    let n = forest.local_count(p);
    SearchStats { visited: n, visited_leaves: n, pruned: 0 }
}

/// Mirrors of rank `p` from the owners of all half-size face neighbors.
/// The result is only meaningful on 2:1 balanced forests.
pub fn ghost_v1(forest: &Forest, p: usize) -> (Mirrors, SearchStats) {
    let sc = forest.scheme();
    let mut m = Mirrors::new();
    for lt in forest.local_trees(p) {
        let base = forest.tree_offset(lt.tree) + lt.tree_offset;
        for (i, e) in lt.leaves.iter().enumerate() {
            for f in 0..e.shape.num_faces() as u8 {
                let neighbors = if e.level < sc.max_level() {
                    forest.half_face_neighbors(lt.tree, e, f).expect("level checked")
                } else {
                    forest.face_neighbor(lt.tree, e, f).into_iter().collect()
                };
                for (k, n, _) in neighbors {
                    let q = forest.owner_of(k, &n);
                    if q != p {
                        add(&mut m, q, base + i);
                    }
                }
            }
        }
    }
    (m, local_leaf_stats(forest, p))
}

/// Mirrors of rank `p` from the owners at face of every same-level face neighbor.
pub fn ghost_v2(forest: &Forest, p: usize) -> (Mirrors, SearchStats) {
    let mut m = Mirrors::new();
    let mut owners = BTreeSet::new();
    for lt in forest.local_trees(p) {
        let base = forest.tree_offset(lt.tree) + lt.tree_offset;
        for (i, e) in lt.leaves.iter().enumerate() {
            owners.clear();
            for f in 0..e.shape.num_faces() as u8 {
                if let Some((k, n, nf)) = forest.face_neighbor(lt.tree, e, f) {
                    forest.owners_at_face_into(k, &n, nf, forest.full_window(), &mut owners);
                }
            }
            for &q in owners.iter().filter(|&&q| q != p) {
                add(&mut m, q, base + i);
            }
        }
    }
    (m, local_leaf_stats(forest, p))
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    elem: OwnerRange,
    faces: [Option<OwnerRange>; 6],
}

/// Mirrors of rank `p` via the top-down search. Owner searches of a child are
/// restricted to the ranges found for its parent.
pub fn ghost(forest: &Forest, p: usize) -> (Mirrors, SearchStats) {
    let sc = *forest.scheme();
    let full = forest.full_window();
    let mut m = Mirrors::new();
    let mut owners = BTreeSet::new();
    let mut stack = vec![Bounds { elem: full, faces: [None; 6] }; sc.max_level() as usize + 1];
    let mut cur_tree = usize::MAX;
    let mut start_level = 0u8;
    let stats = forest_search(forest, p, |v| {
        let e = v.elem;
        if v.tree != cur_tree {
            cur_tree = v.tree;
            start_level = e.level;
        }
        let parent = (e.level > start_level).then(|| {
            let cid = sc.child_id(e).expect("non-root") as u8;
            (stack[e.level as usize - 1], sc.parent(e).expect("non-root"), cid)
        });
        let face_window = |f: u8| match &parent {
            Some((b, pe, cid)) => match sc.parent_face_of_child_face(pe, *cid, f) {
                Some(pf) => b.faces[pf as usize].unwrap_or(full),
                None => b.elem,
            },
            None => full,
        };

        if let Some(leaf) = v.leaf {
            owners.clear();
            for f in 0..e.shape.num_faces() as u8 {
                if let Some((k, n, nf)) = forest.face_neighbor(v.tree, e, f) {
                    forest.owners_at_face_into(k, &n, nf, face_window(f), &mut owners);
                }
            }
            let global = forest.tree_offset(v.tree) + leaf;
            for &q in owners.iter().filter(|&&q| q != p) {
                add(&mut m, q, global);
            }
            return false;
        }

        let w = parent.as_ref().map_or(full, |(b, _, _)| b.elem);
        let first = forest.owner(v.tree, sc.sfc_key(e), w.first, w.last);
        let last = forest.owner(v.tree, sc.last_sfc_key(e), first, w.last);
        let mut b = Bounds { elem: OwnerRange { first, last }, faces: [None; 6] };
        let mut foreign = first != p || last != p;
        for f in 0..e.shape.num_faces() as u8 {
            let Some((k, n, nf)) = forest.face_neighbor(v.tree, e, f) else { continue };
            let fw = face_window(f);
            let pf = forest.first_owner_at_face(k, &n, nf, fw);
            let pl = forest.last_owner_at_face(k, &n, nf, OwnerRange { first: pf, last: fw.last });
            foreign |= pf != p || pl != p;
            b.faces[f as usize] = Some(OwnerRange { first: pf, last: pl });
        }
        stack[e.level as usize] = b;
        foreign
    });
    (m, stats)
}

pub fn compute_mirrors(forest: &Forest, p: usize, algo: Algorithm) -> (Mirrors, SearchStats) {
    match algo {
        Algorithm::V1 => ghost_v1(forest, p),
        Algorithm::V2 => ghost_v2(forest, p),
        Algorithm::V3 => ghost(forest, p),
    }
}

/// A received remote leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ghost {
    pub owner: usize,
    pub tree: usize,
    pub global: usize,
    pub elem: Element,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RankGhosts {
    pub remotes: Vec<usize>,
    pub mirrors: BTreeMap<usize, Vec<usize>>,
    /// Grouped by owner ascending, then `(tree, SFC)`.
    pub ghosts: Vec<Ghost>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GhostLayer {
    pub ranks: Vec<RankGhosts>,
}

impl GhostLayer {
    pub fn total_ghosts(&self) -> usize {
        self.ranks.iter().map(|r| r.ghosts.len()).sum()
    }

    pub fn total_mirrors(&self) -> usize {
        self.ranks.iter().map(|r| r.mirrors.values().map(Vec::len).sum::<usize>()).sum()
    }
}

/// Checks `R_p^q != {} <=> R_q^p != {}` for all rank pairs.
pub fn check_symmetry(mirrors: &[Mirrors]) -> Result<(), GhostError> {
    for (p, m) in mirrors.iter().enumerate() {
        for (&q, set) in m {
            if !set.is_empty() && mirrors[q].get(&p).is_none_or(BTreeSet::is_empty) {
                return Err(GhostError::Asymmetric { p, q });
            }
        }
    }
    Ok(())
}

/// Delivers every `R_q^p` to `p`.
pub fn exchange(forest: &Forest, mirrors: &[Mirrors]) -> Result<GhostLayer, GhostError> {
    check_symmetry(mirrors)?;
    let ranks = (0..mirrors.len())
        .map(|p| {
            let own: BTreeMap<usize, Vec<usize>> = mirrors[p]
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(&q, s)| (q, s.iter().copied().collect()))
                .collect();
            let remotes: Vec<usize> = own.keys().copied().collect();
            let mut ghosts = Vec::new();
            for &q in &remotes {
                for &g in &mirrors[q][&p] {
                    let (tree, i) = forest.locate(g);
                    ghosts.push(Ghost { owner: q, tree, global: g, elem: forest.tree_leaves(tree)[i] });
                }
            }
            RankGhosts { remotes, mirrors: own, ghosts }
        })
        .collect();
    Ok(GhostLayer { ranks })
}

// ---------------------------------------------------------------- oracle

struct FaceRec {
    global: usize,
    /// Vertices in cyclic order.
    verts: Vec<[i64; 3]>,
    lo: [i64; 3],
    hi: [i64; 3],
}

type PlaneKey = ([i64; 3], i128);

fn sub(a: [i64; 3], b: [i64; 3]) -> [i128; 3] {
    [(a[0] - b[0]) as i128, (a[1] - b[1]) as i128, (a[2] - b[2]) as i128]
}

fn cross(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [i128; 3], b: [i128; 3]) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn plane_key(dim: usize, v: &[[i64; 3]]) -> PlaneKey {
    let n: [i128; 3] = match dim {
        1 => [1, 0, 0],
        2 => {
            let t = sub(v[1], v[0]);
            [-t[1], t[0], 0]
        }
        _ => cross(sub(v[1], v[0]), sub(v[2], v[0])),
    };
    let g = gcd(gcd(n[0], n[1]), n[2]);
    let mut n = n.map(|x| x / g);
    if n.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        n = n.map(|x| -x);
    }
    let d = dot(n, [v[0][0] as i128, v[0][1] as i128, v[0][2] as i128]);
    (n.map(|x| x as i64), d)
}

/// Whether every vertex of `a` lies in the convex face `b` (both on one plane).
fn contained(dim: usize, normal: [i64; 3], a: &[[i64; 3]], b: &[[i64; 3]]) -> bool {
    match dim {
        1 => a[0] == b[0],
        2 => {
            let t = sub(b[1], b[0]);
            let len = dot(t, t);
            a.iter().all(|&p| {
                let s = dot(sub(p, b[0]), t);
                (0..=len).contains(&s)
            })
        }
        _ => {
            let n = normal.map(|x| x as i128);
            let m = b.len();
            let orient = dot(n, cross(sub(b[1], b[0]), sub(b[2], b[1]))).signum();
            (0..m).all(|j| {
                let (e0, e1) = (b[j], b[(j + 1) % m]);
                let edge = sub(e1, e0);
                a.iter().all(|&p| {
                    let s = dot(n, cross(edge, sub(p, e0))).signum();
                    s == 0 || s == orient
                })
            })
        }
    }
}

/// Cyclic order of a face's vertex list (quads are stored in z-order).
fn cyclic(face: Shape) -> &'static [usize] {
    match face {
        Shape::Quad => &[0, 1, 3, 2],
        Shape::Triangle => &[0, 1, 2],
        Shape::Line => &[0, 1],
        _ => &[0],
    }
}

/// Mirror sets of every rank from geometric face matching over the whole forest.
pub fn oracle_mirrors(forest: &Forest) -> Result<Vec<Mirrors>, GhostError> {
    let cm = forest.cmesh();
    let geo = cm.geometry().ok_or_else(|| GhostError::NoGeometry(cm.name.clone()))?;
    let sc = forest.scheme();
    let scale = sc.root_len() as i64;
    let dim = cm.dim();
    let mut groups: HashMap<PlaneKey, Vec<FaceRec>> = HashMap::new();
    let mut buf = [[0i64; 3]; 8];
    for k in 0..forest.num_trees() {
        let base = forest.tree_offset(k);
        for (i, e) in forest.tree_leaves(k).iter().enumerate() {
            sc.vertices_into(e, &mut buf);
            let mapped: Vec<[i64; 3]> =
                buf[..e.shape.num_vertices()].iter().map(|&v| geo.maps[k].apply(v, scale)).collect();
            for f in 0..e.shape.num_faces() as u8 {
                let fv = e.shape.face_vertices(f);
                let mut verts: Vec<[i64; 3]> =
                    cyclic(e.shape.face_shape(f)).iter().map(|&j| mapped[fv[j] as usize]).collect();
                geo.wrap(&mut verts, scale);
                let mut lo = verts[0];
                let mut hi = verts[0];
                for v in &verts {
                    for a in 0..3 {
                        lo[a] = lo[a].min(v[a]);
                        hi[a] = hi[a].max(v[a]);
                    }
                }
                let key = plane_key(dim, &verts);
                groups.entry(key).or_default().push(FaceRec { global: base + i, verts, lo, hi });
            }
        }
    }

    let mut mirrors = vec![Mirrors::new(); forest.num_ranks()];
    let mut link = |a: usize, b: usize| {
        let (ra, rb) = (forest.rank_of_index(a), forest.rank_of_index(b));
        if ra != rb {
            add(&mut mirrors[ra], rb, a);
            add(&mut mirrors[rb], ra, b);
        }
    };
    for ((normal, _), mut faces) in groups {
        let axis = (0..3).min_by_key(|&a| normal[a].abs()).unwrap();
        faces.sort_by_key(|r| r.lo[axis]);
        for (i, a) in faces.iter().enumerate() {
            for b in &faces[i + 1..] {
                if b.lo[axis] > a.hi[axis] {
                    break;
                }
                if a.global == b.global || (0..3).any(|x| b.lo[x] > a.hi[x] || a.lo[x] > b.hi[x]) {
                    continue;
                }
                if contained(dim, normal, &a.verts, &b.verts) || contained(dim, normal, &b.verts, &a.verts) {
                    link(a.global, b.global);
                }
            }
        }
    }
    Ok(mirrors)
}

/// Outcome of comparing computed mirror sets with the oracle.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verification {
    pub mismatches: usize,
    /// First ten differences, formatted for humans.
    pub diffs: Vec<String>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Set comparison of mirrors (and therefore ghosts) against `expected`.
pub fn compare_mirrors(forest: &Forest, got: &[Mirrors], expected: &[Mirrors]) -> Verification {
    let mut v = Verification::default();
    let empty = BTreeSet::new();
    for p in 0..expected.len().max(got.len()) {
        let (g, e) = (got.get(p), expected.get(p));
        let qs: BTreeSet<usize> = g.into_iter().chain(e).flat_map(|m| m.keys().copied()).collect();
        for q in qs {
            let gs = g.and_then(|m| m.get(&q)).unwrap_or(&empty);
            let es = e.and_then(|m| m.get(&q)).unwrap_or(&empty);
            for (what, idx) in
                es.difference(gs).map(|&i| ("missing", i)).chain(gs.difference(es).map(|&i| ("extra", i)))
            {
                v.mismatches += 1;
                if v.diffs.len() < 10 {
                    let (tree, i) = forest.locate(idx);
                    v.diffs.push(format!("rank {p} -> {q}: {what} mirror tree {tree} {}", forest.tree_leaves(tree)[i]));
                }
            }
        }
    }
    v
}

pub fn verify(forest: &Forest, mirrors: &[Mirrors]) -> Result<Verification, GhostError> {
    Ok(compare_mirrors(forest, mirrors, &oracle_mirrors(forest)?))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cmesh::CoarseMesh;
    use crate::Scheme;

    fn forest(name: &str, level: u8, ranks: usize) -> Forest {
        let m = Arc::new(CoarseMesh::builtin(name).unwrap());
        Forest::new_uniform(m, Scheme::new(8).unwrap(), level, ranks).unwrap()
    }

    fn all(f: &Forest, algo: Algorithm) -> Vec<Mirrors> {
        (0..f.num_ranks()).map(|p| compute_mirrors(f, p, algo).0).collect()
    }

    #[test]
    fn single_rank_has_no_mirrors() {
        let f = forest("hex_cube", 2, 1);
        for a in Algorithm::ALL {
            assert!(compute_mirrors(&f, 0, a).0.is_empty());
        }
        let (_, s) = ghost(&f, 0);
        assert_eq!(s.visited, 1);
    }

    #[test]
    fn hex_two_ranks() {
        let f = forest("hex_cube", 2, 2);
        let o = oracle_mirrors(&f).unwrap();
        // the z < 1/2 half is rank 0; its top layer of 16 leaves are mirrors
        assert_eq!(o[0][&1].len(), 16);
        for a in Algorithm::ALL {
            assert_eq!(all(&f, a), o, "{a}");
        }
        let layer = exchange(&f, &o).unwrap();
        assert_eq!(layer.total_ghosts(), layer.total_mirrors());
    }

    #[test]
    fn variants_agree_on_small_meshes() {
        for name in ["tet_cube", "hybrid_cube", "periodic_quad", "tri_unit", "periodic_hex", "hex_twisted"] {
            for ranks in [3, 7] {
                let f = forest(name, 2, ranks);
                let o = oracle_mirrors(&f).unwrap();
                for a in Algorithm::ALL {
                    let v = compare_mirrors(&f, &all(&f, a), &o);
                    assert!(v.passed(), "{name} P={ranks} {a}: {:?}", v.diffs);
                }
            }
        }
    }

    #[test]
    fn asymmetry_is_rejected() {
        let f = forest("quad_unit", 1, 2);
        let mut m = vec![Mirrors::new(); 2];
        add(&mut m[0], 1, 0);
        assert!(matches!(exchange(&f, &m), Err(GhostError::Asymmetric { p: 0, q: 1 })));
    }
}
