//! Low-level element kernels for lines, quadrilaterals, hexahedra, triangles,
//! tetrahedra and prisms.
//!
//! Elements are plain values: a shape, a level, an integer anchor and a type.
//! All operations live on [`Scheme`], which fixes the maximum refinement level
//! and therefore the size `2^L` of the root cell.

mod face;
pub mod tables;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use tables::*;

pub use face::{face_permutation, orientation_for_permutation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElementError {
    #[error("max level exceeded")]
    MaxLevelExceeded,
    #[error("root has no parent")]
    RootHasNoParent,
    #[error("neighbor lies outside root")]
    OutsideRoot,
    #[error("illegal: face {0} is not on the tree boundary")]
    NotOnBoundary(u8),
    #[error("invalid face index {0}")]
    InvalidFace(u8),
    #[error("invalid orientation {0}")]
    InvalidOrientation(u8),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: Shape, got: Shape },
    #[error("level {level} is coarser than element level {elem}")]
    InvalidLevel { level: u8, elem: u8 },
    #[error("child {0} does not touch the face")]
    NotOnFace(u8),
    #[error("max level {0} not in 1..=21")]
    UnsupportedMaxLevel(u8),
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
}

/// Element shapes. The declaration order is the tie-break order used to pick
/// the reference side of a tree-to-tree connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    /// Face shape of lines only; never a tree shape.
    Vertex,
    Line,
    Quad,
    Triangle,
    Hex,
    Tet,
    Prism,
}

impl Shape {
    pub const TREE_SHAPES: [Shape; 6] =
        [Shape::Line, Shape::Triangle, Shape::Quad, Shape::Tet, Shape::Hex, Shape::Prism];

    pub fn dim(self) -> usize {
        match self {
            Shape::Vertex => 0,
            Shape::Line => 1,
            Shape::Quad | Shape::Triangle => 2,
            Shape::Hex | Shape::Tet | Shape::Prism => 3,
        }
    }

    pub fn num_children(self) -> usize {
        1 << self.dim()
    }

    pub fn num_faces(self) -> usize {
        match self {
            Shape::Vertex => 0,
            Shape::Line => 2,
            Shape::Triangle => 3,
            Shape::Quad | Shape::Tet => 4,
            Shape::Prism => 5,
            Shape::Hex => 6,
        }
    }

    pub fn num_vertices(self) -> usize {
        match self {
            Shape::Vertex => 1,
            Shape::Line => 2,
            Shape::Triangle => 3,
            Shape::Quad | Shape::Tet => 4,
            Shape::Prism => 6,
            Shape::Hex => 8,
        }
    }

    pub fn num_types(self) -> u8 {
        match self {
            Shape::Triangle | Shape::Prism => 2,
            Shape::Tet => 6,
            _ => 1,
        }
    }

    pub fn is_simplex(self) -> bool {
        matches!(self, Shape::Triangle | Shape::Tet)
    }

    /// Shape of face `f`.
    pub fn face_shape(self, f: u8) -> Shape {
        match self {
            Shape::Vertex => Shape::Vertex,
            Shape::Line => Shape::Vertex,
            Shape::Quad | Shape::Triangle => Shape::Line,
            Shape::Hex => Shape::Quad,
            Shape::Tet => Shape::Triangle,
            Shape::Prism if f < 3 => Shape::Quad,
            Shape::Prism => Shape::Triangle,
        }
    }

    pub fn num_face_children(self, f: u8) -> usize {
        self.face_shape(f).num_children()
    }

    /// Vertex indices of face `f` in ascending order.
    pub fn face_vertices(self, f: u8) -> &'static [u8] {
        const LINE: [[u8; 1]; 2] = [[0], [1]];
        let f = f as usize;
        match self {
            Shape::Vertex => &[],
            Shape::Line => &LINE[f],
            Shape::Quad => &QUAD_FACE_VERTICES[f],
            Shape::Triangle => &TRI_FACE_VERTICES[f],
            Shape::Hex => &HEX_FACE_VERTICES[f],
            Shape::Tet => &TET_FACE_VERTICES[f],
            Shape::Prism => PRISM_FACE_VERTICES[f],
        }
    }

    /// Vertices of the root cell with unit edge length.
    pub fn reference_vertices(self) -> &'static [[i64; 3]] {
        const V: [[i64; 3]; 1] = [[0, 0, 0]];
        const L: [[i64; 3]; 2] = [[0, 0, 0], [1, 0, 0]];
        const Q: [[i64; 3]; 4] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]];
        const T: [[i64; 3]; 3] = [[0, 0, 0], [1, 0, 0], [1, 1, 0]];
        const H: [[i64; 3]; 8] =
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]];
        const S: [[i64; 3]; 4] = [[0, 0, 0], [1, 0, 0], [1, 0, 1], [1, 1, 1]];
        const P: [[i64; 3]; 6] = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1]];
        match self {
            Shape::Vertex => &V,
            Shape::Line => &L,
            Shape::Quad => &Q,
            Shape::Triangle => &T,
            Shape::Hex => &H,
            Shape::Tet => &S,
            Shape::Prism => &P,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Vertex => "vertex",
            Shape::Line => "line",
            Shape::Quad => "quad",
            Shape::Triangle => "triangle",
            Shape::Hex => "hex",
            Shape::Tet => "tet",
            Shape::Prism => "prism",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = ElementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vertex" => Ok(Shape::Vertex),
            "line" => Ok(Shape::Line),
            "quad" => Ok(Shape::Quad),
            "triangle" | "tri" => Ok(Shape::Triangle),
            "hex" => Ok(Shape::Hex),
            "tet" => Ok(Shape::Tet),
            "prism" => Ok(Shape::Prism),
            other => Err(ElementError::UnknownShape(other.to_string())),
        }
    }
}

/// A mesh cell inside one tree. Unused anchor slots are 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Element {
    pub shape: Shape,
    pub level: u8,
    pub etype: u8,
    pub anchor: [i32; 3],
}

impl Element {
    pub fn new(shape: Shape, level: u8, etype: u8, anchor: [i32; 3]) -> Self {
        Element { shape, level, etype, anchor }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} l={} t={} ({},{},{})",
            self.shape, self.level, self.etype, self.anchor[0], self.anchor[1], self.anchor[2]
        )
    }
}

/// Children of `parent` touching one of its faces, together with the child's
/// face index on that face.
#[derive(Debug, Clone, Copy)]
pub struct FaceChild {
    pub child_id: u8,
    pub child_face: u8,
}

/// Element kernels for a fixed maximum level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheme {
    max_level: u8,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme { max_level: Self::DEFAULT_MAX_LEVEL }
    }
}

impl Scheme {
    pub const DEFAULT_MAX_LEVEL: u8 = 18;
    pub const MAX_SUPPORTED_LEVEL: u8 = 21;
    pub const ENV_VAR: &'static str = "HYGHOST_LMAX";

    pub fn new(max_level: u8) -> Result<Self, ElementError> {
        if max_level == 0 || max_level > Self::MAX_SUPPORTED_LEVEL {
            return Err(ElementError::UnsupportedMaxLevel(max_level));
        }
        Ok(Scheme { max_level })
    }

    /// Default scheme, honoring `HYGHOST_LMAX` when set.
    pub fn from_env() -> Result<Self, ElementError> {
        match std::env::var(Self::ENV_VAR) {
            Ok(v) => {
                let l = v.trim().parse::<u8>().map_err(|_| ElementError::UnsupportedMaxLevel(0))?;
                Self::new(l)
            }
            Err(_) => Ok(Self::default()),
        }
    }

    pub fn max_level(&self) -> u8 {
        self.max_level
    }

    /// Edge length `2^L` of a root cell.
    pub fn root_len(&self) -> i32 {
        1 << self.max_level
    }

    /// Edge length `h` of an element at `level`.
    pub fn len(&self, level: u8) -> i32 {
        1 << (self.max_level - level)
    }

    pub fn root(&self, shape: Shape) -> Element {
        Element::new(shape, 0, 0, [0; 3])
    }

    // ---------------------------------------------------------------- refinement

    pub fn child(&self, e: &Element, i: usize) -> Result<Element, ElementError> {
        if e.level >= self.max_level {
            return Err(ElementError::MaxLevelExceeded);
        }
        Ok(self.child_unchecked(e, i))
    }

    pub fn children(&self, e: &Element) -> Result<Vec<Element>, ElementError> {
        if e.level >= self.max_level {
            return Err(ElementError::MaxLevelExceeded);
        }
        Ok((0..e.shape.num_children()).map(|i| self.child_unchecked(e, i)).collect())
    }

    pub(crate) fn child_unchecked(&self, e: &Element, i: usize) -> Element {
        let h = self.len(e.level + 1);
        let mut c = *e;
        c.level += 1;
        let bits = |cube: u8, a: &mut [i32; 3], dims: usize| {
            for (k, coord) in a.iter_mut().enumerate().take(dims) {
                *coord += h * ((cube as i32 >> k) & 1);
            }
        };
        match e.shape {
            Shape::Vertex => {}
            Shape::Line | Shape::Quad | Shape::Hex => bits(i as u8, &mut c.anchor, e.shape.dim()),
            Shape::Triangle => {
                let (cube, t) = TRI_CHILDREN[e.etype as usize][i];
                bits(cube, &mut c.anchor, 2);
                c.etype = t;
            }
            Shape::Tet => {
                let (cube, t) = TET_CHILDREN[e.etype as usize][i];
                bits(cube, &mut c.anchor, 3);
                c.etype = t;
            }
            Shape::Prism => {
                let (cube, t) = TRI_CHILDREN[e.etype as usize][i % 4];
                bits(cube, &mut c.anchor, 2);
                c.anchor[2] += h * (i as i32 / 4);
                c.etype = t;
            }
        }
        c
    }

    /// Cube id of the anchor at `level`: the bits selecting the subcube within the parent cube.
    fn cube_id(&self, anchor: &[i32; 3], level: u8, dims: usize) -> u8 {
        let b = self.max_level - level;
        let mut c = 0u8;
        for (k, a) in anchor.iter().enumerate().take(dims) {
            c |= (((a >> b) & 1) as u8) << k;
        }
        c
    }

    /// Child id at `level` together with the parent's type, for an element of type `t` at that level.
    fn digit(&self, shape: Shape, t: u8, anchor: &[i32; 3], level: u8) -> (u8, u8) {
        match shape {
            Shape::Vertex => (0, 0),
            Shape::Line | Shape::Quad | Shape::Hex => (self.cube_id(anchor, level, shape.dim()), 0),
            Shape::Triangle => {
                let (pt, cid) = TRI_PARENT[t as usize][self.cube_id(anchor, level, 2) as usize];
                (cid, pt)
            }
            Shape::Tet => {
                let (pt, cid) = TET_PARENT[t as usize][self.cube_id(anchor, level, 3) as usize];
                (cid, pt)
            }
            Shape::Prism => {
                let (pt, cid) = TRI_PARENT[t as usize][self.cube_id(anchor, level, 2) as usize];
                let z = ((anchor[2] >> (self.max_level - level)) & 1) as u8;
                (cid + 4 * z, pt)
            }
        }
    }

    pub fn parent(&self, e: &Element) -> Result<Element, ElementError> {
        if e.level == 0 {
            return Err(ElementError::RootHasNoParent);
        }
        Ok(self.ancestor_unchecked(e, e.level - 1))
    }

    pub fn child_id(&self, e: &Element) -> Result<usize, ElementError> {
        if e.level == 0 {
            return Err(ElementError::RootHasNoParent);
        }
        Ok(self.digit(e.shape, e.etype, &e.anchor, e.level).0 as usize)
    }

    /// Ancestor of `e` at `level`; `e` itself when the levels agree.
    pub fn ancestor(&self, e: &Element, level: u8) -> Result<Element, ElementError> {
        if level > e.level {
            return Err(ElementError::InvalidLevel { level, elem: e.level });
        }
        Ok(self.ancestor_unchecked(e, level))
    }

    pub(crate) fn ancestor_unchecked(&self, e: &Element, level: u8) -> Element {
        let mut t = e.etype;
        if e.shape.num_types() > 1 {
            for l in ((level + 1)..=e.level).rev() {
                t = self.digit(e.shape, t, &e.anchor, l).1;
            }
        }
        let mask = !(self.len(level) - 1);
        let mut a = e.anchor;
        for c in a.iter_mut() {
            *c &= mask;
        }
        Element::new(e.shape, level, t, a)
    }

    pub fn is_ancestor(&self, a: &Element, d: &Element) -> bool {
        a.shape == d.shape && a.level <= d.level && self.ancestor_unchecked(d, a.level) == *a
    }

    pub fn is_family(&self, es: &[Element]) -> bool {
        let Some(first) = es.first() else { return false };
        if first.level == 0 || es.len() != first.shape.num_children() {
            return false;
        }
        let p = self.ancestor_unchecked(first, first.level - 1);
        es.iter().enumerate().all(|(i, e)| *e == self.child_unchecked(&p, i))
    }

    // ---------------------------------------------------------------- SFC

    fn bits_per_digit(shape: Shape) -> u32 {
        shape.dim() as u32
    }

    /// Number of max-level descendants of an element at `level`.
    pub fn descendant_span(&self, shape: Shape, level: u8) -> u64 {
        1u64 << (Self::bits_per_digit(shape) * (self.max_level - level) as u32)
    }

    /// SFC index of the first max-level descendant of `e`.
    pub fn sfc_key(&self, e: &Element) -> u64 {
        let b = Self::bits_per_digit(e.shape);
        let mut t = e.etype;
        let mut key = 0u64;
        for l in (1..=e.level).rev() {
            let (d, pt) = self.digit(e.shape, t, &e.anchor, l);
            key |= (d as u64) << (b * (self.max_level - l) as u32);
            t = pt;
        }
        key
    }

    /// SFC index of the last max-level descendant of `e`.
    pub fn last_sfc_key(&self, e: &Element) -> u64 {
        self.sfc_key(e) + self.descendant_span(e.shape, e.level) - 1
    }

    /// Total SFC order within one tree; ancestors precede their descendants.
    pub fn compare_sfc(&self, a: &Element, b: &Element) -> Ordering {
        (self.sfc_key(a), a.level).cmp(&(self.sfc_key(b), b.level))
    }

    pub fn first_descendant(&self, e: &Element, level: u8) -> Result<Element, ElementError> {
        self.descendant(e, level, |_| 0)
    }

    pub fn last_descendant(&self, e: &Element, level: u8) -> Result<Element, ElementError> {
        let n = e.shape.num_children();
        self.descendant(e, level, |_| n - 1)
    }

    fn descendant(&self, e: &Element, level: u8, pick: impl Fn(&Element) -> usize) -> Result<Element, ElementError> {
        if level < e.level {
            return Err(ElementError::InvalidLevel { level, elem: e.level });
        }
        if level > self.max_level {
            return Err(ElementError::MaxLevelExceeded);
        }
        let mut d = *e;
        while d.level < level {
            d = self.child_unchecked(&d, pick(&d));
        }
        Ok(d)
    }

    /// Deepest common ancestor of two elements of the same tree.
    pub fn nearest_common_ancestor(&self, a: &Element, b: &Element) -> Element {
        let bits = Self::bits_per_digit(a.shape);
        let (ka, kb) = (self.sfc_key(a), self.sfc_key(b));
        let mut level = a.level.min(b.level);
        if ka != kb && bits > 0 {
            let high = 63 - (ka ^ kb).leading_zeros();
            let diff_level = self.max_level - (high / bits) as u8;
            level = level.min(diff_level - 1);
        }
        self.ancestor_unchecked(a, level)
    }

    // ---------------------------------------------------------------- faces

    /// Ids of the children touching face `f` of an element with this shape and type, ascending.
    pub fn children_at_face_ids(&self, shape: Shape, etype: u8, f: u8) -> &'static [u8] {
        const LINE: [[u8; 1]; 2] = [[0], [1]];
        let (t, f) = (etype as usize, f as usize);
        match shape {
            Shape::Vertex => &[0],
            Shape::Line => &LINE[f],
            Shape::Quad => &QUAD_CHILDREN_AT_FACE[f],
            Shape::Triangle => &TRI_CHILDREN_AT_FACE[t][f],
            Shape::Hex => &HEX_CHILDREN_AT_FACE[f],
            Shape::Tet => &TET_CHILDREN_AT_FACE[t][f],
            Shape::Prism => &PRISM_CHILDREN_AT_FACE[t][f],
        }
    }

    /// Face of the `j`-th face child that lies on face `f` of its parent.
    pub fn child_face_at(&self, shape: Shape, etype: u8, f: u8, j: usize) -> u8 {
        match shape {
            Shape::Tet => TET_CHILD_FACE[etype as usize][f as usize][j],
            _ => f,
        }
    }

    /// Type of child `cid` of an element with the given type.
    pub fn child_type(&self, shape: Shape, etype: u8, cid: u8) -> u8 {
        match shape {
            Shape::Triangle => TRI_CHILDREN[etype as usize][cid as usize].1,
            Shape::Tet => TET_CHILDREN[etype as usize][cid as usize].1,
            Shape::Prism => TRI_CHILDREN[etype as usize][cid as usize % 4].1,
            _ => 0,
        }
    }

    fn check_face(&self, e: &Element, f: u8) -> Result<(), ElementError> {
        if (f as usize) < e.shape.num_faces() {
            Ok(())
        } else {
            Err(ElementError::InvalidFace(f))
        }
    }

    pub fn num_face_children(&self, e: &Element, f: u8) -> Result<usize, ElementError> {
        self.check_face(e, f)?;
        Ok(e.shape.num_face_children(f))
    }

    pub fn children_at_face(&self, e: &Element, f: u8) -> Result<Vec<Element>, ElementError> {
        self.check_face(e, f)?;
        if e.level >= self.max_level {
            return Err(ElementError::MaxLevelExceeded);
        }
        Ok(self
            .children_at_face_ids(e.shape, e.etype, f)
            .iter()
            .map(|&c| self.child_unchecked(e, c as usize))
            .collect())
    }

    /// Face of child `i` (a child id of `e`) that is a subface of face `f` of `e`.
    pub fn child_face(&self, e: &Element, i: usize, f: u8) -> Result<u8, ElementError> {
        self.check_face(e, f)?;
        let ids = self.children_at_face_ids(e.shape, e.etype, f);
        let j = ids.iter().position(|&c| c as usize == i).ok_or(ElementError::NotOnFace(i as u8))?;
        Ok(self.child_face_at(e.shape, e.etype, f, j))
    }

    /// Face children of `e` at `f` with their child ids and faces.
    pub fn face_children(&self, e: &Element, f: u8) -> impl Iterator<Item = FaceChild> + '_ {
        let ids = self.children_at_face_ids(e.shape, e.etype, f);
        let (shape, etype) = (e.shape, e.etype);
        ids.iter()
            .enumerate()
            .map(move |(j, &c)| FaceChild { child_id: c, child_face: self.child_face_at(shape, etype, f, j) })
    }

    /// The face of the parent that face `fc` of child `cid` lies on, if any.
    pub fn parent_face_of_child_face(&self, parent: &Element, cid: u8, fc: u8) -> Option<u8> {
        (0..parent.shape.num_faces() as u8).find(|&f| {
            let ids = self.children_at_face_ids(parent.shape, parent.etype, f);
            ids.iter()
                .position(|&c| c == cid)
                .is_some_and(|j| self.child_face_at(parent.shape, parent.etype, f, j) == fc)
        })
    }

    fn face_descendant_key(&self, e: &Element, f: u8, level: u8, last: bool) -> u64 {
        let b = Self::bits_per_digit(e.shape);
        let mut key = self.sfc_key(e);
        let (mut t, mut face) = (e.etype, f);
        for l in e.level..level {
            let ids = self.children_at_face_ids(e.shape, t, face);
            let j = if last { ids.len() - 1 } else { 0 };
            let c = ids[j];
            key |= (c as u64) << (b * (self.max_level - l - 1) as u32);
            face = self.child_face_at(e.shape, t, face, j);
            t = self.child_type(e.shape, t, c);
        }
        key
    }

    /// SFC index of the first max-level descendant touching face `f`.
    pub fn first_face_descendant_key(&self, e: &Element, f: u8) -> u64 {
        self.face_descendant_key(e, f, self.max_level, false)
    }

    /// SFC index of the last max-level descendant touching face `f`.
    pub fn last_face_descendant_key(&self, e: &Element, f: u8) -> u64 {
        self.face_descendant_key(e, f, self.max_level, true)
    }

    pub fn first_face_descendant(&self, e: &Element, f: u8, level: u8) -> Result<Element, ElementError> {
        self.face_descendant(e, f, level, false)
    }

    pub fn last_face_descendant(&self, e: &Element, f: u8, level: u8) -> Result<Element, ElementError> {
        self.face_descendant(e, f, level, true)
    }

    fn face_descendant(&self, e: &Element, f: u8, level: u8, last: bool) -> Result<Element, ElementError> {
        self.check_face(e, f)?;
        if level < e.level {
            return Err(ElementError::InvalidLevel { level, elem: e.level });
        }
        if level > self.max_level {
            return Err(ElementError::MaxLevelExceeded);
        }
        let (mut d, mut face) = (*e, f);
        while d.level < level {
            let ids = self.children_at_face_ids(d.shape, d.etype, face);
            let j = if last { ids.len() - 1 } else { 0 };
            face = self.child_face_at(d.shape, d.etype, face, j);
            d = self.child_unchecked(&d, ids[j] as usize);
        }
        Ok(d)
    }

    /// Same-level neighbor candidate across `f`, possibly outside the root.
    pub(crate) fn face_neighbor_unchecked(&self, e: &Element, f: u8) -> (Element, u8) {
        let h = self.len(e.level);
        let mut n = *e;
        let fu = f as usize;
        match e.shape {
            Shape::Vertex => return (n, 0),
            Shape::Line | Shape::Quad | Shape::Hex => {
                let axis = fu / 2;
                n.anchor[axis] += if fu % 2 == 0 { -h } else { h };
                return (n, f ^ 1);
            }
            Shape::Triangle => {
                let (dx, dy, t, g) = TRI_NEIGHBOR[e.etype as usize][fu];
                n.anchor[0] += dx as i32 * h;
                n.anchor[1] += dy as i32 * h;
                n.etype = t;
                return (n, g);
            }
            Shape::Tet => {
                let (dx, dy, dz, t, g) = TET_NEIGHBOR[e.etype as usize][fu];
                n.anchor[0] += dx as i32 * h;
                n.anchor[1] += dy as i32 * h;
                n.anchor[2] += dz as i32 * h;
                n.etype = t;
                return (n, g);
            }
            Shape::Prism => {}
        }
        match f {
            3 => {
                n.anchor[2] -= h;
                (n, 4)
            }
            4 => {
                n.anchor[2] += h;
                (n, 3)
            }
            _ => {
                let (dx, dy, t, g) = TRI_NEIGHBOR[e.etype as usize][fu];
                n.anchor[0] += dx as i32 * h;
                n.anchor[1] += dy as i32 * h;
                n.etype = t;
                (n, g)
            }
        }
    }

    pub fn neighbor_is_inside_root(&self, e: &Element, f: u8) -> bool {
        if e.shape == Shape::Vertex || f as usize >= e.shape.num_faces() {
            return false;
        }
        let (n, _) = self.face_neighbor_unchecked(e, f);
        self.inside_root(&n)
    }

    /// Same-level neighbor inside the tree across face `f`, with its dual face.
    pub fn face_neighbor_inside(&self, e: &Element, f: u8) -> Result<(Element, u8), ElementError> {
        self.check_face(e, f)?;
        let (n, g) = self.face_neighbor_unchecked(e, f);
        if !self.inside_root(&n) {
            return Err(ElementError::OutsideRoot);
        }
        Ok((n, g))
    }

    /// Root face that face `f` of an element of this shape and type lies on, if it can touch the boundary.
    pub fn tree_face_of_type(&self, shape: Shape, etype: u8, f: u8) -> Option<u8> {
        match shape {
            Shape::Vertex => None,
            Shape::Line | Shape::Quad | Shape::Hex => Some(f),
            Shape::Triangle => TRI_TREE_FACE[etype as usize][f as usize],
            Shape::Tet => TET_TREE_FACE[etype as usize][f as usize],
            Shape::Prism if f >= 3 => Some(f),
            Shape::Prism => TRI_TREE_FACE[etype as usize][f as usize],
        }
    }

    /// Element face of an element with this shape and type that can lie on root face `g`.
    pub fn element_face_on_tree_face(&self, shape: Shape, etype: u8, g: u8) -> Option<u8> {
        (0..shape.num_faces() as u8).find(|&f| self.tree_face_of_type(shape, etype, f) == Some(g))
    }

    pub fn tree_face(&self, e: &Element, f: u8) -> Result<u8, ElementError> {
        self.check_face(e, f)?;
        if self.neighbor_is_inside_root(e, f) {
            return Err(ElementError::NotOnBoundary(f));
        }
        self.tree_face_of_type(e.shape, e.etype, f).ok_or(ElementError::NotOnBoundary(f))
    }

    /// Face element of `e` at `f` in the coordinate frame of the root face.
    pub fn boundary_face(&self, e: &Element, f: u8) -> Result<Element, ElementError> {
        let g = self.tree_face(e, f)?;
        let a = e.anchor;
        let (shape, t, fa) = match e.shape {
            Shape::Vertex => unreachable!("vertices have no faces"),
            Shape::Line => (Shape::Vertex, 0, [0, 0]),
            Shape::Quad => (Shape::Line, 0, [if g < 2 { a[1] } else { a[0] }, 0]),
            Shape::Triangle => (Shape::Line, 0, [if g == 0 { a[1] } else { a[0] }, 0]),
            Shape::Hex => match g / 2 {
                0 => (Shape::Quad, 0, [a[1], a[2]]),
                1 => (Shape::Quad, 0, [a[0], a[2]]),
                _ => (Shape::Quad, 0, [a[0], a[1]]),
            },
            Shape::Tet => {
                let t = u8::from(e.etype != 0);
                if g < 2 {
                    (Shape::Triangle, t, [a[2], a[1]])
                } else {
                    (Shape::Triangle, t, [a[0], a[2]])
                }
            }
            Shape::Prism => match g {
                0 => (Shape::Quad, 0, [a[1], a[2]]),
                1 | 2 => (Shape::Quad, 0, [a[0], a[2]]),
                _ => (Shape::Triangle, e.etype, [a[0], a[1]]),
            },
        };
        Ok(Element::new(shape, e.level, t, [fa[0], fa[1], 0]))
    }

    /// Element of shape `shape` whose face on root face `g` is the face element `face`.
    pub fn extrude_face(&self, face: &Element, shape: Shape, g: u8) -> Result<Element, ElementError> {
        if g as usize >= shape.num_faces() {
            return Err(ElementError::InvalidFace(g));
        }
        let expected = shape.face_shape(g);
        if face.shape != expected {
            return Err(ElementError::ShapeMismatch { expected, got: face.shape });
        }
        let last = self.root_len() - self.len(face.level);
        let (fx, fy) = (face.anchor[0], face.anchor[1]);
        let ft = face.etype;
        let (t, a) = match shape {
            Shape::Vertex => unreachable!("vertices have no faces"),
            Shape::Line => (0, [if g == 0 { 0 } else { last }, 0, 0]),
            Shape::Quad => (
                0,
                match g {
                    0 => [0, fx, 0],
                    1 => [last, fx, 0],
                    2 => [fx, 0, 0],
                    _ => [fx, last, 0],
                },
            ),
            Shape::Triangle => (
                0,
                match g {
                    0 => [last, fx, 0],
                    1 => [fx, fx, 0],
                    _ => [fx, 0, 0],
                },
            ),
            Shape::Hex => (
                0,
                match g {
                    0 => [0, fx, fy],
                    1 => [last, fx, fy],
                    2 => [fx, 0, fy],
                    3 => [fx, last, fy],
                    4 => [fx, fy, 0],
                    _ => [fx, fy, last],
                },
            ),
            Shape::Tet => {
                const TYPE_FROM_FACE1: [u8; 4] = [1, 2, 4, 5];
                let t = if ft == 0 { 0 } else { TYPE_FROM_FACE1[g as usize] };
                let a = match g {
                    0 => [last, fy, fx],
                    1 => [fx, fy, fx],
                    2 => [fx, fy, fy],
                    _ => [fx, 0, fy],
                };
                (t, a)
            }
            Shape::Prism => match g {
                0 => (0, [last, fx, fy]),
                1 => (0, [fx, fx, fy]),
                2 => (0, [fx, 0, fy]),
                3 => (ft, [fx, fy, 0]),
                _ => (ft, [fx, fy, last]),
            },
        };
        Ok(Element::new(shape, face.level, t, a))
    }

    /// Maps a face element between the frames of two connected root faces.
    pub fn transform_face(&self, face: &Element, o: u8, sign: i8) -> Result<Element, ElementError> {
        let nv = face.shape.num_vertices() as u8;
        let valid = match face.shape {
            Shape::Vertex => o == 0,
            Shape::Line | Shape::Quad | Shape::Triangle => o < nv,
            _ => false,
        };
        if !valid {
            return Err(ElementError::InvalidOrientation(o));
        }
        let r = self.root_len();
        let h = self.len(face.level);
        let mut out = *face;
        let (mut x, mut y) = (face.anchor[0], face.anchor[1]);
        match face.shape {
            Shape::Vertex => {}
            Shape::Line => {
                if o == 1 {
                    x = r - x - h;
                }
            }
            Shape::Quad => {
                if sign < 0 {
                    std::mem::swap(&mut x, &mut y);
                }
                (x, y) = match o {
                    0 => (x, y),
                    1 => (r - y - h, x),
                    2 => (y, r - x - h),
                    _ => (r - x - h, r - y - h),
                };
            }
            Shape::Triangle => {
                let t1 = face.etype == 1;
                let ht = if t1 { h } else { 0 };
                if sign < 0 {
                    y = x - y - ht;
                }
                (x, y) = match o {
                    0 => (x, y),
                    1 => (r - y - h, x - y - ht),
                    _ => (r - x + y - h + ht, r - x - h),
                };
            }
            _ => unreachable!(),
        }
        out.anchor = [x, y, 0];
        Ok(out)
    }

    // ---------------------------------------------------------------- geometry

    /// Vertex coordinates of `e` in the root lattice; returns the vertex count.
    pub fn vertices_into(&self, e: &Element, out: &mut [[i64; 3]; 8]) -> usize {
        let h = self.len(e.level) as i64;
        let a = [e.anchor[0] as i64, e.anchor[1] as i64, e.anchor[2] as i64];
        match e.shape {
            Shape::Vertex => {
                out[0] = a;
                1
            }
            Shape::Line | Shape::Quad | Shape::Hex => {
                let n = e.shape.num_vertices();
                for (i, v) in out.iter_mut().enumerate().take(n) {
                    for k in 0..3 {
                        v[k] = a[k] + h * ((i as i64 >> k) & 1);
                    }
                }
                n
            }
            Shape::Triangle | Shape::Prism => {
                let mut v1 = a;
                v1[e.etype as usize] += h;
                out[0] = a;
                out[1] = v1;
                out[2] = [a[0] + h, a[1] + h, a[2]];
                if e.shape == Shape::Triangle {
                    return 3;
                }
                for i in 0..3 {
                    out[i + 3] = out[i];
                    out[i + 3][2] += h;
                }
                6
            }
            Shape::Tet => {
                let ei = (e.etype / 2) as usize;
                let ej = (ei + if e.etype % 2 == 0 { 2 } else { 1 }) % 3;
                out[0] = a;
                out[1] = a;
                out[1][ei] += h;
                out[2] = out[1];
                out[2][ej] += h;
                out[3] = [a[0] + h, a[1] + h, a[2] + h];
                4
            }
        }
    }

    pub fn vertices(&self, e: &Element) -> Vec<[i64; 3]> {
        let mut buf = [[0i64; 3]; 8];
        let n = self.vertices_into(e, &mut buf);
        buf[..n].to_vec()
    }

    /// True when all vertices of `e` lie in the closed root cell.
    pub fn inside_root(&self, e: &Element) -> bool {
        let r = self.root_len() as i64;
        let mut buf = [[0i64; 3]; 8];
        let n = self.vertices_into(e, &mut buf);
        let inb = |c: i64| (0..=r).contains(&c);
        buf[..n].iter().all(|&[x, y, z]| match e.shape {
            Shape::Vertex => true,
            Shape::Line => inb(x),
            Shape::Quad => inb(x) && inb(y),
            Shape::Hex => inb(x) && inb(y) && inb(z),
            Shape::Triangle => r >= x && x >= y && y >= 0,
            Shape::Tet => r >= x && x >= z && z >= y && y >= 0,
            Shape::Prism => r >= x && x >= y && y >= 0 && inb(z),
        })
    }

    /// Structural validity: level, lattice alignment, type range, unused slots and containment.
    pub fn is_valid(&self, e: &Element) -> bool {
        if e.level > self.max_level || e.etype >= e.shape.num_types() {
            return false;
        }
        let h = self.len(e.level);
        let dim = e.shape.dim();
        for (k, &a) in e.anchor.iter().enumerate() {
            if k >= dim {
                if a != 0 {
                    return false;
                }
            } else if a < 0 || a >= self.root_len() && e.level > 0 || a % h != 0 {
                return false;
            }
        }
        self.inside_root(e)
    }
}
