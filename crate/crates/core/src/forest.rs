//! Partitioned adaptive forests on simulated ranks.
//!
//! All leaves of all ranks live in one per-tree array; rank `p` owns a
//! contiguous range of global leaf indices. Rank-local algorithms only touch
//! their [`LocalTree`] slices, the coarse mesh and the marker array.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::cmesh::CoarseMesh;
use crate::element::{Element, ElementError, Scheme};

#[derive(Debug, Error)]
pub enum ForestError {
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("forest needs at least one rank")]
    NoRanks,
    #[error("level {level} exceeds max level {max}")]
    LevelTooDeep { level: u8, max: u8 },
    #[error("invalid forest: {0}")]
    Invalid(String),
}

/// First max-level SFC index of a rank's first leaf, or the end sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SfcMarker {
    pub tree: usize,
    pub key: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OwnerRange {
    pub first: usize,
    pub last: usize,
}

/// A rank's leaves within one tree.
#[derive(Debug, Clone, Copy)]
pub struct LocalTree<'a> {
    pub tree: usize,
    pub leaves: &'a [Element],
    pub keys: &'a [u64],
    /// Index of `leaves[0]` within the tree's leaf array.
    pub tree_offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adapt {
    Keep,
    Refine,
    Coarsen,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptInfo {
    pub tree: usize,
    pub rank: usize,
    /// Position of the leaf in the global SFC order.
    pub global_index: usize,
}

#[derive(Debug, Clone)]
pub struct Forest {
    cmesh: Arc<CoarseMesh>,
    scheme: Scheme,
    trees: Vec<Vec<Element>>,
    keys: Vec<Vec<u64>>,
    /// Global index of each tree's first leaf; one extra entry for the total.
    tree_offsets: Vec<usize>,
    /// Global leaf range of each rank; one extra entry for the total.
    rank_offsets: Vec<usize>,
    markers: Vec<SfcMarker>,
}

/// Leaf counts of an even split, remainder on the first ranks.
pub fn even_split(total: usize, ranks: usize) -> Vec<usize> {
    (0..ranks).map(|p| total / ranks + usize::from(p < total % ranks)).collect()
}

impl Forest {
    pub fn new_uniform(cmesh: Arc<CoarseMesh>, scheme: Scheme, level: u8, ranks: usize) -> Result<Self, ForestError> {
        if level > scheme.max_level() {
            return Err(ForestError::LevelTooDeep { level, max: scheme.max_level() });
        }
        let trees: Vec<Vec<Element>> = (0..cmesh.num_trees())
            .map(|k| {
                let mut v = vec![scheme.root(cmesh.shape(k))];
                for _ in 0..level {
                    v = v
                        .iter()
                        .flat_map(|e| (0..e.shape.num_children()).map(|i| scheme.child_unchecked(e, i)))
                        .collect();
                }
                v
            })
            .collect();
        let total = trees.iter().map(Vec::len).sum();
        Self::from_parts(cmesh, scheme, trees, even_split(total, ranks))
    }

    /// Assembles a forest from per-tree leaf arrays and per-rank leaf counts.
    pub fn from_parts(
        cmesh: Arc<CoarseMesh>,
        scheme: Scheme,
        trees: Vec<Vec<Element>>,
        counts: Vec<usize>,
    ) -> Result<Self, ForestError> {
        if counts.is_empty() {
            return Err(ForestError::NoRanks);
        }
        if trees.len() != cmesh.num_trees() {
            return Err(ForestError::Invalid("leaf arrays do not match the tree count".into()));
        }
        let keys: Vec<Vec<u64>> = trees.iter().map(|v| v.iter().map(|e| scheme.sfc_key(e)).collect()).collect();
        let mut tree_offsets = Vec::with_capacity(trees.len() + 1);
        let mut acc = 0;
        for t in &trees {
            tree_offsets.push(acc);
            acc += t.len();
        }
        tree_offsets.push(acc);
        let mut rank_offsets = Vec::with_capacity(counts.len() + 1);
        let mut r = 0;
        for c in &counts {
            rank_offsets.push(r);
            r += c;
        }
        rank_offsets.push(r);
        if r != acc {
            return Err(ForestError::Invalid(format!("rank counts sum to {r}, forest has {acc} leaves")));
        }
        let mut f = Forest { cmesh, scheme, trees, keys, tree_offsets, rank_offsets, markers: Vec::new() };
        f.rebuild_markers();
        Ok(f)
    }

    fn rebuild_markers(&mut self) {
        let p = self.num_ranks();
        let mut markers = vec![SfcMarker { tree: self.trees.len(), key: 0 }; p + 1];
        for q in (0..p).rev() {
            markers[q] = if self.rank_offsets[q] < self.rank_offsets[q + 1] {
                let (k, i) = self.locate(self.rank_offsets[q]);
                SfcMarker { tree: k, key: self.keys[k][i] }
            } else {
                markers[q + 1]
            };
        }
        self.markers = markers;
    }

    /// Tree and in-tree index of a global leaf index.
    pub fn locate(&self, global: usize) -> (usize, usize) {
        let k = self.tree_offsets.partition_point(|&o| o <= global) - 1;
        (k, global - self.tree_offsets[k])
    }

    pub fn cmesh(&self) -> &CoarseMesh {
        &self.cmesh
    }

    pub fn cmesh_arc(&self) -> Arc<CoarseMesh> {
        Arc::clone(&self.cmesh)
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn num_ranks(&self) -> usize {
        self.rank_offsets.len() - 1
    }

    pub fn num_leaves(&self) -> usize {
        *self.tree_offsets.last().unwrap()
    }

    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn tree_leaves(&self, k: usize) -> &[Element] {
        &self.trees[k]
    }

    pub fn tree_keys(&self, k: usize) -> &[u64] {
        &self.keys[k]
    }

    pub fn tree_offset(&self, k: usize) -> usize {
        self.tree_offsets[k]
    }

    pub fn markers(&self) -> &[SfcMarker] {
        &self.markers
    }

    pub fn rank_range(&self, p: usize) -> std::ops::Range<usize> {
        self.rank_offsets[p]..self.rank_offsets[p + 1]
    }

    pub fn local_count(&self, p: usize) -> usize {
        self.rank_range(p).len()
    }

    /// Rank holding a global leaf index, from the partition counts.
    pub fn rank_of_index(&self, global: usize) -> usize {
        self.rank_offsets.partition_point(|&o| o <= global) - 1
    }

    /// Leaves of rank `p`, grouped by tree.
    pub fn local_trees(&self, p: usize) -> Vec<LocalTree<'_>> {
        let range = self.rank_range(p);
        let mut out = Vec::new();
        if range.is_empty() {
            return out;
        }
        let (first_tree, _) = self.locate(range.start);
        let (last_tree, _) = self.locate(range.end - 1);
        for k in first_tree..=last_tree {
            let lo = range.start.max(self.tree_offsets[k]) - self.tree_offsets[k];
            let hi = range.end.min(self.tree_offsets[k + 1]) - self.tree_offsets[k];
            if lo < hi {
                out.push(LocalTree {
                    tree: k,
                    leaves: &self.trees[k][lo..hi],
                    keys: &self.keys[k][lo..hi],
                    tree_offset: lo,
                });
            }
        }
        out
    }

    // ------------------------------------------------------------ owners

    /// Largest rank `p` in `[lo, hi]` whose marker does not exceed `(tree, key)`.
    pub fn owner(&self, tree: usize, key: u64, lo: usize, hi: usize) -> usize {
        let target = SfcMarker { tree, key };
        let n = self.markers[lo..=hi].partition_point(|m| *m <= target);
        debug_assert!(n > 0, "window [{lo}, {hi}] does not contain the owner");
        lo + n.max(1) - 1
    }

    /// Owner of an element that lies inside a single leaf.
    pub fn owner_of(&self, tree: usize, e: &Element) -> usize {
        self.owner(tree, self.scheme.sfc_key(e), 0, self.num_ranks() - 1)
    }

    pub fn owner_range(&self, tree: usize, e: &Element) -> OwnerRange {
        let hi = self.num_ranks() - 1;
        let first = self.owner(tree, self.scheme.sfc_key(e), 0, hi);
        let last = self.owner(tree, self.scheme.last_sfc_key(e), first, hi);
        OwnerRange { first, last }
    }

    pub fn full_window(&self) -> OwnerRange {
        OwnerRange { first: 0, last: self.num_ranks() - 1 }
    }

    pub fn first_owner_at_face(&self, tree: usize, e: &Element, f: u8, w: OwnerRange) -> usize {
        self.owner(tree, self.scheme.first_face_descendant_key(e, f), w.first, w.last)
    }

    pub fn last_owner_at_face(&self, tree: usize, e: &Element, f: u8, w: OwnerRange) -> usize {
        self.owner(tree, self.scheme.last_face_descendant_key(e, f), w.first, w.last)
    }

    /// All ranks owning leaves that touch face `f` of `e` from inside `e` (or contain `e`).
    pub fn owners_at_face(&self, tree: usize, e: &Element, f: u8, w: OwnerRange) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.owners_at_face_into(tree, e, f, w, &mut out);
        out
    }

    pub fn owners_at_face_into(&self, tree: usize, e: &Element, f: u8, w: OwnerRange, out: &mut BTreeSet<usize>) {
        self.owners_at_face_rec(tree, e, f, w.first, w.last, None, None, out);
    }

    #[allow(clippy::too_many_arguments)]
    fn owners_at_face_rec(
        &self,
        tree: usize,
        e: &Element,
        f: u8,
        lo: usize,
        hi: usize,
        first: Option<usize>,
        last: Option<usize>,
        out: &mut BTreeSet<usize>,
    ) {
        let sc = &self.scheme;
        let pf = first.unwrap_or_else(|| self.owner(tree, sc.first_face_descendant_key(e, f), lo, hi));
        let pl = last.unwrap_or_else(|| self.owner(tree, sc.last_face_descendant_key(e, f), pf, hi));
        if pl <= pf + 1 {
            out.insert(pf);
            out.insert(pl);
            return;
        }
        let ids = sc.children_at_face_ids(e.shape, e.etype, f);
        let n = ids.len();
        for (j, &c) in ids.iter().enumerate() {
            let child = sc.child_unchecked(e, c as usize);
            let cf = sc.child_face_at(e.shape, e.etype, f, j);
            let cfirst = (j == 0).then_some(pf);
            let clast = (j + 1 == n).then_some(pl);
            self.owners_at_face_rec(tree, &child, cf, pf, pl, cfirst, clast, out);
        }
    }

    // ------------------------------------------------------------ neighbors

    /// Same-level neighbor across face `f`, possibly in another tree, with its dual face.
    /// `None` on the domain boundary.
    pub fn face_neighbor(&self, tree: usize, e: &Element, f: u8) -> Option<(usize, Element, u8)> {
        let sc = &self.scheme;
        if sc.neighbor_is_inside_root(e, f) {
            let (n, g) = sc.face_neighbor_unchecked(e, f);
            return Some((tree, n, g));
        }
        let g = sc.tree_face_of_type(e.shape, e.etype, f)?;
        let tr = self.cmesh.face_transform(tree, g)?;
        let face = sc.boundary_face(e, f).expect("face lies on the tree boundary");
        let moved = sc.transform_face(&face, tr.orientation, tr.sign).expect("valid orientation");
        let shape2 = self.cmesh.shape(tr.tree);
        let n = sc.extrude_face(&moved, shape2, tr.face).expect("matching face shapes");
        let nf = sc.element_face_on_tree_face(shape2, n.etype, tr.face).expect("extruded element touches the face");
        Some((tr.tree, n, nf))
    }

    /// Level `l+1` neighbors across face `f`.
    pub fn half_face_neighbors(
        &self,
        tree: usize,
        e: &Element,
        f: u8,
    ) -> Result<Vec<(usize, Element, u8)>, ForestError> {
        if e.level >= self.scheme.max_level() {
            return Err(ElementError::MaxLevelExceeded.into());
        }
        let Some((k, n, nf)) = self.face_neighbor(tree, e, f) else { return Ok(Vec::new()) };
        Ok(self
            .scheme
            .face_children(&n, nf)
            .map(|fc| (k, self.scheme.child_unchecked(&n, fc.child_id as usize), fc.child_face))
            .collect())
    }

    /// Index of the leaf of tree `k` that contains `e`, if `e` is not refined further.
    pub fn containing_leaf(&self, k: usize, e: &Element) -> Option<usize> {
        let key = self.scheme.sfc_key(e);
        let i = self.keys[k].partition_point(|&x| x <= key).checked_sub(1)?;
        self.scheme.is_ancestor(&self.trees[k][i], e).then_some(i)
    }

    // ------------------------------------------------------------ adaptation

    /// One adaptation sweep. Families are coarsened only when all members are
    /// on the same rank and all request coarsening. Level limits clamp silently.
    pub fn adapt(&self, mut cb: impl FnMut(&AdaptInfo, &Element) -> Adapt) -> Forest {
        let sc = self.scheme;
        let mut trees: Vec<Vec<Element>> = vec![Vec::new(); self.trees.len()];
        let mut counts = vec![0usize; self.num_ranks()];
        for (p, count) in counts.iter_mut().enumerate() {
            for lt in self.local_trees(p) {
                let base = self.tree_offsets[lt.tree] + lt.tree_offset;
                let actions: Vec<Adapt> = lt
                    .leaves
                    .iter()
                    .enumerate()
                    .map(|(i, e)| cb(&AdaptInfo { tree: lt.tree, rank: p, global_index: base + i }, e))
                    .collect();
                let out = &mut trees[lt.tree];
                let mut i = 0;
                while i < lt.leaves.len() {
                    let e = lt.leaves[i];
                    let n = e.shape.num_children();
                    if actions[i] == Adapt::Coarsen
                        && e.level > 0
                        && i + n <= lt.leaves.len()
                        && actions[i..i + n].iter().all(|&a| a == Adapt::Coarsen)
                        && sc.is_family(&lt.leaves[i..i + n])
                    {
                        out.push(sc.ancestor_unchecked(&e, e.level - 1));
                        *count += 1;
                        i += n;
                        continue;
                    }
                    if actions[i] == Adapt::Refine && e.level < sc.max_level() {
                        out.extend((0..n).map(|c| sc.child_unchecked(&e, c)));
                        *count += n;
                    } else {
                        out.push(e);
                        *count += 1;
                    }
                    i += 1;
                }
            }
        }
        Forest::from_parts(Arc::clone(&self.cmesh), sc, trees, counts).expect("adapt keeps the forest consistent")
    }

    /// Even split of the current leaves.
    pub fn repartition(&self) -> Forest {
        self.with_counts(even_split(self.num_leaves(), self.num_ranks()))
    }

    /// Same leaves with different per-rank counts.
    pub fn with_counts(&self, counts: Vec<usize>) -> Forest {
        let mut f = self.clone();
        let mut r = 0;
        f.rank_offsets.clear();
        for c in &counts {
            f.rank_offsets.push(r);
            r += c;
        }
        f.rank_offsets.push(r);
        assert_eq!(r, self.num_leaves(), "rank counts must cover all leaves");
        f.rebuild_markers();
        f
    }

    /// Leaves with a face neighbor leaf more than one level finer.
    fn balance_violations(&self) -> HashSet<(usize, usize)> {
        let mut marked = HashSet::new();
        for (k, leaves) in self.trees.iter().enumerate() {
            for e in leaves.iter().filter(|e| e.level >= 2) {
                for f in 0..e.shape.num_faces() as u8 {
                    let Some((k2, n, _)) = self.face_neighbor(k, e, f) else { continue };
                    if let Some(i) = self.containing_leaf(k2, &n) {
                        if self.trees[k2][i].level + 1 < e.level {
                            marked.insert((k2, i));
                        }
                    }
                }
            }
        }
        marked
    }

    pub fn is_balanced(&self) -> bool {
        self.balance_violations().is_empty()
    }

    /// Refines violating leaves until face neighbors differ by at most one level, then repartitions.
    pub fn balance(&self) -> Forest {
        let mut f = self.clone();
        loop {
            let marked = f.balance_violations();
            if marked.is_empty() {
                return f.repartition();
            }
            let next = f.adapt(|info, _| {
                let (k, i) = f.locate(info.global_index);
                if marked.contains(&(k, i)) {
                    Adapt::Refine
                } else {
                    Adapt::Keep
                }
            });
            f = next;
        }
    }

    // ------------------------------------------------------------ checks and output

    /// Checks that every tree is tiled by its leaves in strictly ascending SFC order.
    pub fn validate(&self) -> Result<(), ForestError> {
        let sc = &self.scheme;
        for (k, leaves) in self.trees.iter().enumerate() {
            let shape = self.cmesh.shape(k);
            let mut next = 0u64;
            for (i, e) in leaves.iter().enumerate() {
                if e.shape != shape || !sc.is_valid(e) {
                    return Err(ForestError::Invalid(format!("tree {k} leaf {i}: invalid element {e}")));
                }
                if self.keys[k][i] != next {
                    return Err(ForestError::Invalid(format!("tree {k} leaf {i}: gap or overlap at {e}")));
                }
                next = sc.last_sfc_key(e) + 1;
            }
            if next != sc.descendant_span(shape, 0) {
                return Err(ForestError::Invalid(format!("tree {k}: leaves do not cover the tree")));
            }
        }
        Ok(())
    }

    /// Text dump, one `leaf` line per leaf in global order after a `rank` line per rank.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for p in 0..self.num_ranks() {
            let _ = writeln!(s, "rank {p} {}", self.local_count(p));
            for lt in self.local_trees(p) {
                for e in lt.leaves {
                    let _ = writeln!(
                        s,
                        "leaf {} {} {} {} {} {}",
                        lt.tree, e.level, e.etype, e.anchor[0], e.anchor[1], e.anchor[2]
                    );
                }
            }
        }
        s
    }
}
