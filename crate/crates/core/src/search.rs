//! Top-down traversal of a rank's local leaves with callback-driven pruning.

use crate::element::{Element, Scheme};
use crate::forest::{Forest, LocalTree};

/// Window `[offset, offset + len)` into a local leaf slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafView {
    pub offset: usize,
    pub len: usize,
}

impl LeafView {
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn end(&self) -> usize {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub visited: usize,
    pub visited_leaves: usize,
    pub pruned: usize,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, o: Self) {
        self.visited += o.visited;
        self.visited_leaves += o.visited_leaves;
        self.pruned += o.pruned;
    }
}

/// One callback invocation.
#[derive(Debug, Clone, Copy)]
pub struct Visit<'a> {
    pub tree: usize,
    pub elem: &'a Element,
    /// Index into the tree's leaf array when `elem` is a local leaf.
    pub leaf: Option<usize>,
}

impl Visit<'_> {
    pub fn is_leaf(&self) -> bool {
        self.leaf.is_some()
    }
}

/// Splits `view` (descendants of `e`, ascending by key) into one window per child of `e`.
pub fn split_array(scheme: &Scheme, e: &Element, keys: &[u64], view: LeafView) -> Vec<LeafView> {
    let n = e.shape.num_children();
    let slice = &keys[view.offset..view.end()];
    let span = scheme.descendant_span(e.shape, e.level + 1);
    let base = scheme.sfc_key(e);
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let bound = base + span * (i as u64 + 1);
        let end = if i + 1 == n { slice.len() } else { start + slice[start..].partition_point(|&k| k < bound) };
        out.push(LeafView { offset: view.offset + start, len: end - start });
        start = end;
    }
    debug_assert_eq!(out.iter().map(|v| v.len).sum::<usize>(), view.len);
    debug_assert!(slice.first().is_none_or(|&k| k >= base));
    debug_assert!(slice.last().is_none_or(|&k| k <= scheme.last_sfc_key(e)));
    out
}

/// Depth-first traversal below `e`. Children are entered only if `matches`
/// returned true, `e` is not a leaf and the child's window is nonempty.
pub fn element_recursion<F>(
    scheme: &Scheme,
    lt: &LocalTree<'_>,
    e: &Element,
    view: LeafView,
    matches: &mut F,
    stats: &mut SearchStats,
) where
    F: FnMut(&Visit<'_>) -> bool,
{
    let is_leaf = view.len == 1 && lt.leaves[view.offset] == *e;
    let leaf = is_leaf.then_some(lt.tree_offset + view.offset);
    stats.visited += 1;
    stats.visited_leaves += usize::from(is_leaf);
    let descend = matches(&Visit { tree: lt.tree, elem: e, leaf });
    if is_leaf {
        return;
    }
    if !descend {
        stats.pruned += 1;
        return;
    }
    for (i, m) in split_array(scheme, e, lt.keys, view).into_iter().enumerate() {
        if !m.is_empty() {
            let c = scheme.child(e, i).expect("leaves below max level");
            element_recursion(scheme, lt, &c, m, matches, stats);
        }
    }
}

/// Runs the traversal over every local tree of rank `p`, starting at the
/// nearest common ancestor of the first and last local leaf.
pub fn forest_search<F>(forest: &Forest, p: usize, mut matches: F) -> SearchStats
where
    F: FnMut(&Visit<'_>) -> bool,
{
    let sc = forest.scheme();
    let mut stats = SearchStats::default();
    for lt in forest.local_trees(p) {
        let first = lt.leaves[0];
        let last = lt.leaves[lt.leaves.len() - 1];
        let start = sc.nearest_common_ancestor(&first, &last);
        let view = LeafView { offset: 0, len: lt.leaves.len() };
        element_recursion(sc, &lt, &start, view, &mut matches, &mut stats);
    }
    stats
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cmesh::CoarseMesh;

    fn forest(name: &str, level: u8, ranks: usize) -> Forest {
        let m = Arc::new(CoarseMesh::builtin(name).unwrap());
        Forest::new_uniform(m, Scheme::new(8).unwrap(), level, ranks).unwrap()
    }

    #[test]
    fn false_match_visits_once() {
        let f = forest("hex_cube", 3, 1);
        let s = forest_search(&f, 0, |_| false);
        assert_eq!(s, SearchStats { visited: 1, visited_leaves: 0, pruned: 1 });
    }

    #[test]
    fn true_match_visits_all_levels() {
        let f = forest("hex_cube", 3, 1);
        let mut leaves = Vec::new();
        let s = forest_search(&f, 0, |v| {
            if let Some(i) = v.leaf {
                leaves.push(i);
            }
            true
        });
        assert_eq!(s.visited, 1 + 8 + 64 + 512);
        assert_eq!(leaves, (0..512).collect::<Vec<_>>());
    }

    #[test]
    fn uniform_split() {
        let f = forest("hex_cube", 1, 1);
        let root = f.scheme().root(crate::Shape::Hex);
        let w = split_array(f.scheme(), &root, f.tree_keys(0), LeafView { offset: 0, len: 8 });
        assert!(w.iter().enumerate().all(|(i, v)| v.offset == i && v.len == 1));
    }

    #[test]
    fn single_leaf_rank() {
        let f = forest("tet_cube", 1, 48);
        let mut first = None;
        forest_search(&f, 5, |v| {
            first.get_or_insert(v.is_leaf());
            true
        });
        assert_eq!(first, Some(true));
        let f = forest("quad_unit", 0, 3);
        assert_eq!(forest_search(&f, 2, |_| true), SearchStats::default());
    }
}
