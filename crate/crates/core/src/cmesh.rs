//! Coarse meshes: tree shapes, face connectivity with orientation, and an
//! optional affine embedding of every tree.
//!
//! Orientation is stored once per connection. It is the index `j` such that
//! vertex 0 of the reference face meets vertex `j` of the other face, where the
//! reference face belongs to the smaller shape (declaration order of
//! [`Shape`]) or, for equal shapes, has the smaller face index.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::element::{face_permutation, orientation_for_permutation, Shape};

#[derive(Debug, Error)]
pub enum CmeshError {
    #[error("unknown coarse mesh `{0}`")]
    UnknownName(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid coarse mesh: {0}")]
    Invalid(String),
    #[error("no neighbor: tree {tree} face {face} is a domain boundary")]
    NoNeighbor { tree: usize, face: u8 },
    #[error("incompatible faces: {0} face {1} and {2} face {3}")]
    IncompatibleFaces(Shape, u8, Shape, u8),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Neighbor record of one tree face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceConn {
    pub tree: usize,
    pub face: u8,
    pub orientation: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub shape: Shape,
    pub faces: Vec<Option<FaceConn>>,
}

/// Affine map `x -> origin + axes * x` from the unit reference cell, in units of `1/denom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeMap {
    pub origin: [i64; 3],
    /// Images of the unit axis vectors.
    pub axes: [[i64; 3]; 3],
}

impl TreeMap {
    pub fn apply(&self, p: [i64; 3], scale: i64) -> [i64; 3] {
        let mut out = [0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.origin[k] * scale + self.axes[0][k] * p[0] + self.axes[1][k] * p[1] + self.axes[2][k] * p[2];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    /// Corner coordinates are integers in units of `1/denom`.
    pub denom: i64,
    pub maps: Vec<TreeMap>,
    /// Periodic extent per axis, in units of `1/denom`; the domain starts at 0.
    pub period: [Option<i64>; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseMesh {
    pub name: String,
    trees: Vec<Tree>,
    geometry: Option<Geometry>,
}

const OMEGA_HEX: [i8; 6] = [1, -1, -1, 1, 1, -1];
const OMEGA_TET: [i8; 4] = [1, -1, 1, -1];
const OMEGA_PRISM: [i8; 5] = [-1, 1, -1, 1, -1];

/// Orientation sign of face `g`: whether (face vertices, interior vertex) are positively ordered.
fn omega(t: Shape, g: u8) -> Option<i8> {
    match t {
        Shape::Hex => Some(OMEGA_HEX[g as usize]),
        Shape::Tet => Some(OMEGA_TET[g as usize]),
        Shape::Prism => Some(OMEGA_PRISM[g as usize]),
        _ => None,
    }
}

/// Sign of the corner-matching permutation between faces `g` of `t` and `g2` of `t2`.
/// Faces of 1D and 2D trees have no sign and report `+1`.
pub fn face_sign(t: Shape, t2: Shape, g: u8, g2: u8) -> Result<i8, CmeshError> {
    if g as usize >= t.num_faces() || g2 as usize >= t2.num_faces() || t.face_shape(g) != t2.face_shape(g2) {
        return Err(CmeshError::IncompatibleFaces(t, g, t2, g2));
    }
    Ok(match (omega(t, g), omega(t2, g2)) {
        (Some(a), Some(b)) => -a * b,
        _ => 1,
    })
}

/// Whether the face carries a meaningful sign (only faces of 3D trees do).
pub fn sign_applies(t: Shape) -> bool {
    t.dim() == 3
}

/// Whether `(t, g)` is the side the stored orientation refers to.
pub fn is_reference_side(t: Shape, g: u8, t2: Shape, g2: u8) -> bool {
    t < t2 || (t == t2 && g <= g2)
}

/// Cross-tree transformation parameters seen from one side of a connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceTransform {
    pub tree: usize,
    pub face: u8,
    pub orientation: u8,
    pub sign: i8,
}

pub const BUILTIN_NAMES: &[&str] = &[
    "line_unit",
    "periodic_line",
    "quad_unit",
    "periodic_quad",
    "quad_twisted",
    "tri_unit",
    "hex_cube",
    "periodic_hex",
    "hex_twisted",
    "tet_cube",
    "prism_cube",
    "hybrid_cube",
];

impl CoarseMesh {
    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn shape(&self, k: usize) -> Shape {
        self.trees[k].shape
    }

    pub fn dim(&self) -> usize {
        self.trees.first().map_or(0, |t| t.shape.dim())
    }

    pub fn geometry(&self) -> Option<&Geometry> {
        self.geometry.as_ref()
    }

    pub fn face_connection(&self, k: usize, g: u8) -> Option<FaceConn> {
        self.trees[k].faces[g as usize]
    }

    pub fn face_orientation(&self, k: usize, g: u8) -> Result<u8, CmeshError> {
        self.face_connection(k, g).map(|c| c.orientation).ok_or(CmeshError::NoNeighbor { tree: k, face: g })
    }

    pub fn tree_neighbor_face(&self, k: usize, g: u8) -> Result<u8, CmeshError> {
        self.face_connection(k, g).map(|c| c.face).ok_or(CmeshError::NoNeighbor { tree: k, face: g })
    }

    /// Parameters for mapping a face element of tree face `(k, g)` into the
    /// neighbor's face frame. On the non-reference side the orientation is
    /// replaced by the one describing the inverse permutation.
    pub fn face_transform(&self, k: usize, g: u8) -> Option<FaceTransform> {
        let c = self.face_connection(k, g)?;
        let (t, t2) = (self.shape(k), self.shape(c.tree));
        let fshape = t.face_shape(g);
        let sign = face_sign(t, t2, g, c.face).expect("validated connection");
        let orientation = if is_reference_side(t, g, t2, c.face) {
            c.orientation
        } else {
            let perm = face_permutation(fshape, c.orientation, sign);
            let mut inv = vec![0u8; perm.len()];
            for (i, &p) in perm.iter().enumerate() {
                inv[p as usize] = i as u8;
            }
            orientation_for_permutation(fshape, &inv).expect("inverse of a face permutation").0
        };
        Some(FaceTransform { tree: c.tree, face: c.face, orientation, sign })
    }

    /// Builds a mesh from explicit connectivity and validates it.
    pub fn from_trees(name: &str, trees: Vec<Tree>, geometry: Option<Geometry>) -> Result<Self, CmeshError> {
        let m = CoarseMesh { name: name.to_string(), trees, geometry };
        m.validate()?;
        Ok(m)
    }

    /// Builds a mesh from tree corner coordinates (in units of `1/denom`, listed
    /// in each shape's vertex order) and connects faces with coinciding corners.
    pub fn from_corners(
        name: &str,
        cells: &[(Shape, Vec<[i64; 3]>)],
        denom: i64,
        period: [Option<i64>; 3],
    ) -> Result<Self, CmeshError> {
        let mut maps = Vec::with_capacity(cells.len());
        for (k, (shape, corners)) in cells.iter().enumerate() {
            maps.push(
                tree_map_from_corners(*shape, corners).map_err(|m| CmeshError::Invalid(format!("tree {k}: {m}")))?,
            );
        }
        let geometry = Geometry { denom, maps, period };
        let mut trees: Vec<Tree> =
            cells.iter().map(|(s, _)| Tree { shape: *s, faces: vec![None; s.num_faces()] }).collect();
        let mut by_key: HashMap<Vec<[i64; 3]>, Vec<(usize, u8)>> = HashMap::new();
        for (k, (shape, _)) in cells.iter().enumerate() {
            for g in 0..shape.num_faces() as u8 {
                let mut key = geometry.face_corners(*shape, k, g);
                key.sort();
                by_key.entry(key).or_default().push((k, g));
            }
        }
        let mut keys: Vec<_> = by_key.into_iter().collect();
        keys.sort();
        for (_, sides) in keys {
            match sides.as_slice() {
                [_] => {}
                [(k1, g1), (k2, g2)] => {
                    let (s1, s2) = (cells[*k1].0, cells[*k2].0);
                    let ((ka, ga, sa), (kb, gb, sb)) = if is_reference_side(s1, *g1, s2, *g2) {
                        ((*k1, *g1, s1), (*k2, *g2, s2))
                    } else {
                        ((*k2, *g2, s2), (*k1, *g1, s1))
                    };
                    let va = geometry.face_corners(sa, ka, ga);
                    let vb = geometry.face_corners(sb, kb, gb);
                    let o = vb.iter().position(|v| *v == va[0]).expect("matching corner sets") as u8;
                    trees[ka].faces[ga as usize] = Some(FaceConn { tree: kb, face: gb, orientation: o });
                    trees[kb].faces[gb as usize] = Some(FaceConn { tree: ka, face: ga, orientation: o });
                }
                more => {
                    return Err(CmeshError::Invalid(format!("{} tree faces share the same corners", more.len())));
                }
            }
        }
        Self::from_trees(name, trees, Some(geometry))
    }

    /// Checks involution, face-shape compatibility and, with geometry, that the
    /// permutation given by orientation and sign maps corners onto corners.
    pub fn validate(&self) -> Result<(), CmeshError> {
        if self.trees.is_empty() {
            return Err(CmeshError::Invalid("no trees".into()));
        }
        let dim = self.dim();
        for (k, t) in self.trees.iter().enumerate() {
            if t.shape == Shape::Vertex || t.shape.dim() != dim {
                return Err(CmeshError::Invalid(format!("tree {k}: shape {} in a {dim}D mesh", t.shape)));
            }
            if t.faces.len() != t.shape.num_faces() {
                return Err(CmeshError::Invalid(format!("tree {k}: wrong face count")));
            }
            for (g, c) in t.faces.iter().enumerate() {
                let Some(c) = c else { continue };
                let g = g as u8;
                let other = self
                    .trees
                    .get(c.tree)
                    .ok_or_else(|| CmeshError::Invalid(format!("tree {k} face {g}: no tree {}", c.tree)))?;
                if c.face as usize >= other.faces.len() {
                    return Err(CmeshError::Invalid(format!("tree {k} face {g}: bad neighbor face {}", c.face)));
                }
                if c.tree == k && c.face == g {
                    return Err(CmeshError::Invalid(format!("tree {k} face {g} connects to itself")));
                }
                let fshape = t.shape.face_shape(g);
                if fshape != other.shape.face_shape(c.face) {
                    return Err(CmeshError::IncompatibleFaces(t.shape, g, other.shape, c.face));
                }
                if c.orientation as usize >= fshape.num_vertices() {
                    return Err(CmeshError::Invalid(format!(
                        "tree {k} face {g}: orientation {} out of range",
                        c.orientation
                    )));
                }
                let back = other.faces[c.face as usize];
                if back != Some(FaceConn { tree: k, face: g, orientation: c.orientation }) {
                    return Err(CmeshError::Invalid(format!("tree {k} face {g}: connection is not an involution")));
                }
            }
        }
        if let Some(geo) = &self.geometry {
            if geo.maps.len() != self.trees.len() {
                return Err(CmeshError::Invalid("geometry does not cover every tree".into()));
            }
            for (k, t) in self.trees.iter().enumerate() {
                for g in 0..t.shape.num_faces() as u8 {
                    let Some(c) = t.faces[g as usize] else { continue };
                    let t2 = self.shape(c.tree);
                    if !is_reference_side(t.shape, g, t2, c.face) {
                        continue;
                    }
                    let sign = face_sign(t.shape, t2, g, c.face)?;
                    let perm = face_permutation(t.shape.face_shape(g), c.orientation, sign);
                    let va = geo.face_corners(t.shape, k, g);
                    let vb = geo.face_corners(t2, c.tree, c.face);
                    if perm.iter().enumerate().any(|(i, &j)| va[i] != vb[j as usize]) {
                        return Err(CmeshError::Invalid(format!(
                            "tree {k} face {g}: corners do not match tree {} face {} under orientation {} sign {sign}",
                            c.tree, c.face, c.orientation
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn builtin(name: &str) -> Result<Self, CmeshError> {
        let none = [None; 3];
        let unit = |shape: Shape| -> Vec<[i64; 3]> { shape.reference_vertices().to_vec() };
        match name {
            "line_unit" => Self::from_corners(name, &[(Shape::Line, unit(Shape::Line))], 1, none),
            "periodic_line" => Self::from_corners(name, &[(Shape::Line, unit(Shape::Line))], 1, [Some(1), None, None]),
            "quad_unit" => Self::from_corners(name, &[(Shape::Quad, unit(Shape::Quad))], 1, none),
            "periodic_quad" => {
                Self::from_corners(name, &[(Shape::Quad, unit(Shape::Quad))], 1, [Some(1), Some(1), None])
            }
            "quad_twisted" => Self::from_corners(
                name,
                &[(Shape::Quad, unit(Shape::Quad)), (Shape::Quad, vec![[2, 1, 0], [1, 1, 0], [2, 0, 0], [1, 0, 0]])],
                1,
                none,
            ),
            "tri_unit" => Self::from_corners(
                name,
                &[(Shape::Triangle, unit(Shape::Triangle)), (Shape::Triangle, vec![[1, 1, 0], [0, 1, 0], [0, 0, 0]])],
                1,
                none,
            ),
            "hex_cube" => Self::from_corners(name, &[(Shape::Hex, unit(Shape::Hex))], 1, none),
            "periodic_hex" => Self::from_corners(name, &[(Shape::Hex, unit(Shape::Hex))], 1, [Some(1); 3]),
            "hex_twisted" => {
                // second hex sits at x in [1, 2], turned a quarter about the x axis
                let turned = |p: [i64; 3]| [1 + p[0], p[2], 1 - p[1]];
                Self::from_corners(
                    name,
                    &[(Shape::Hex, unit(Shape::Hex)), (Shape::Hex, unit(Shape::Hex).into_iter().map(turned).collect())],
                    1,
                    none,
                )
            }
            "tet_cube" => Self::from_corners(name, &kuhn_tets([0; 3]), 1, none),
            "prism_cube" => Self::from_corners(name, &prism_pair([0; 3], |p| p, |p| [p[1], p[0], 1 - p[2]]), 1, none),
            "hybrid_cube" => Self::from_corners(name, &hybrid_cells(), 2, none),
            other => Err(CmeshError::UnknownName(other.to_string())),
        }
    }

    /// A builtin name or a path to a text coarse mesh file.
    pub fn load(source: &str) -> Result<Self, CmeshError> {
        if BUILTIN_NAMES.contains(&source) {
            return Self::builtin(source);
        }
        let path = Path::new(source);
        if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let mut m = Self::parse(&text)?;
            m.name = path.file_stem().and_then(|s| s.to_str()).unwrap_or(source).to_string();
            return Ok(m);
        }
        Err(CmeshError::UnknownName(source.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self, CmeshError> {
        let mut trees: HashMap<usize, Tree> = HashMap::new();
        let mut current: Option<usize> = None;
        let mut header = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |msg: String| CmeshError::Parse { line, msg };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tok: Vec<&str> = content.split_whitespace().collect();
            if !header {
                if tok != ["cmesh", "v1"] {
                    return Err(err("expected header `cmesh v1`".into()));
                }
                header = true;
                continue;
            }
            match tok[0] {
                "tree" => {
                    let [_, id, shape] = tok[..] else { return Err(err("expected `tree <id> <shape>`".into())) };
                    let id: usize = id.parse().map_err(|_| err(format!("bad tree id `{id}`")))?;
                    let shape: Shape = shape.parse().map_err(|e| err(format!("{e}")))?;
                    if shape == Shape::Vertex {
                        return Err(err("vertex is not a tree shape".into()));
                    }
                    if trees.insert(id, Tree { shape, faces: vec![None; shape.num_faces()] }).is_some() {
                        return Err(err(format!("duplicate tree {id}")));
                    }
                    current = Some(id);
                }
                "conn" => {
                    let [_, f, nt, nf, o] = tok[..] else {
                        return Err(err("expected `conn <face> <tree|-> <face|-> <orientation|->`".into()));
                    };
                    let id = current.ok_or_else(|| err("`conn` before any `tree`".into()))?;
                    let tree = trees.get_mut(&id).expect("current tree");
                    let f: usize = f.parse().map_err(|_| err(format!("bad face `{f}`")))?;
                    if f >= tree.faces.len() {
                        return Err(err(format!("face {f} out of range for {}", tree.shape)));
                    }
                    tree.faces[f] = match (nt, nf, o) {
                        ("-", "-", "-") => None,
                        _ => Some(FaceConn {
                            tree: nt.parse().map_err(|_| err(format!("bad neighbor tree `{nt}`")))?,
                            face: nf.parse().map_err(|_| err(format!("bad neighbor face `{nf}`")))?,
                            orientation: o.parse().map_err(|_| err(format!("bad orientation `{o}`")))?,
                        }),
                    };
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        if !header {
            return Err(CmeshError::Parse { line: 0, msg: "empty input".into() });
        }
        let n = trees.len();
        let mut ordered = Vec::with_capacity(n);
        for id in 0..n {
            ordered.push(trees.remove(&id).ok_or_else(|| CmeshError::Invalid(format!("tree ids are not 0..{n}")))?);
        }
        Self::from_trees("file", ordered, None)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("cmesh v1\n");
        for (k, t) in self.trees.iter().enumerate() {
            let _ = writeln!(s, "tree {k} {}", t.shape);
            for (g, c) in t.faces.iter().enumerate() {
                match c {
                    Some(c) => {
                        let _ = writeln!(s, "conn {g} {} {} {}", c.tree, c.face, c.orientation);
                    }
                    None => {
                        let _ = writeln!(s, "conn {g} - - -");
                    }
                }
            }
        }
        s
    }
}

impl Geometry {
    /// Corner coordinates of tree face `g`, wrapped onto the periodic fundamental domain.
    pub fn face_corners(&self, shape: Shape, k: usize, g: u8) -> Vec<[i64; 3]> {
        let refv = shape.reference_vertices();
        let mut pts: Vec<[i64; 3]> =
            shape.face_vertices(g).iter().map(|&v| self.maps[k].apply(refv[v as usize], 1)).collect();
        self.wrap(&mut pts, 1);
        pts
    }

    /// Moves a face lying entirely on the upper periodic boundary to the lower one.
    pub fn wrap(&self, pts: &mut [[i64; 3]], scale: i64) {
        for (a, p) in self.period.iter().enumerate() {
            if let Some(p) = p {
                let top = p * scale;
                if pts.iter().all(|v| v[a] == top) {
                    for v in pts.iter_mut() {
                        v[a] = 0;
                    }
                }
            }
        }
    }

    pub fn tree_corners(&self, shape: Shape, k: usize) -> Vec<[i64; 3]> {
        shape.reference_vertices().iter().map(|&r| self.maps[k].apply(r, 1)).collect()
    }
}

/// Affine map sending the reference vertices of `shape` onto `corners`.
fn tree_map_from_corners(shape: Shape, c: &[[i64; 3]]) -> Result<TreeMap, String> {
    if c.len() != shape.num_vertices() {
        return Err(format!("{shape} needs {} corners, got {}", shape.num_vertices(), c.len()));
    }
    let d = |a: usize, b: usize| -> [i64; 3] { [c[b][0] - c[a][0], c[b][1] - c[a][1], c[b][2] - c[a][2]] };
    let axes = match shape {
        Shape::Line => [d(0, 1), [0; 3], [0; 3]],
        Shape::Quad => [d(0, 1), d(0, 2), [0; 3]],
        Shape::Triangle => [d(0, 1), d(1, 2), [0; 3]],
        Shape::Hex => [d(0, 1), d(0, 2), d(0, 4)],
        Shape::Tet => [d(0, 1), d(2, 3), d(1, 2)],
        Shape::Prism => [d(0, 1), d(1, 2), d(0, 3)],
        Shape::Vertex => return Err("vertex is not a tree shape".into()),
    };
    let map = TreeMap { origin: c[0], axes };
    for (i, &r) in shape.reference_vertices().iter().enumerate() {
        if map.apply(r, 1) != c[i] {
            return Err(format!("corners of the {shape} are not an affine image of the reference cell"));
        }
    }
    let [a, b, e] = axes;
    let det = match shape.dim() {
        1 => a[0],
        2 => a[0] * b[1] - a[1] * b[0],
        _ => {
            a[0] * (b[1] * e[2] - b[2] * e[1]) - a[1] * (b[0] * e[2] - b[2] * e[0]) + a[2] * (b[0] * e[1] - b[1] * e[0])
        }
    };
    if shape.dim() < 3 && c.iter().any(|p| p[2] != 0 || shape.dim() == 1 && p[1] != 0) {
        return Err("lower-dimensional trees must lie in the leading coordinates".into());
    }
    if det <= 0 {
        return Err(format!("{shape} has non-positive volume"));
    }
    Ok(map)
}

/// Six Kuhn tets around the main diagonal of the unit cube at `origin`.
/// Odd types swap their last two vertices to keep a positive orientation.
fn kuhn_tets(origin: [i64; 3]) -> Vec<(Shape, Vec<[i64; 3]>)> {
    (0..6u8)
        .map(|t| {
            let ei = (t / 2) as usize;
            let ej = (ei + if t % 2 == 0 { 2 } else { 1 }) % 3;
            let mut v1 = [0i64; 3];
            v1[ei] = 1;
            let mut v2 = v1;
            v2[ej] = 1;
            let mut vs = vec![[0, 0, 0], v1, v2, [1, 1, 1]];
            if t % 2 == 1 {
                vs.swap(2, 3);
            }
            let vs = vs.into_iter().map(|p| [p[0] + origin[0], p[1] + origin[1], p[2] + origin[2]]).collect();
            (Shape::Tet, vs)
        })
        .collect()
}

/// Two prisms filling the unit cube at `origin`, each an image of the reference prism.
fn prism_pair(
    origin: [i64; 3],
    fa: impl Fn([i64; 3]) -> [i64; 3],
    fb: impl Fn([i64; 3]) -> [i64; 3],
) -> Vec<(Shape, Vec<[i64; 3]>)> {
    let place = |f: &dyn Fn([i64; 3]) -> [i64; 3]| -> Vec<[i64; 3]> {
        Shape::Prism
            .reference_vertices()
            .iter()
            .map(|&p| {
                let q = f(p);
                [q[0] + origin[0], q[1] + origin[1], q[2] + origin[2]]
            })
            .collect()
    };
    vec![(Shape::Prism, place(&fa)), (Shape::Prism, place(&fb))]
}

/// Layout of the hybrid cube on a 2x2x2 grid of half-size cubes: hexes in the
/// four cubes touching the origin corner, tets in the opposite corner cube, and
/// prism pairs in the three cubes between them, extruded towards the tet cube.
fn hybrid_cells() -> Vec<(Shape, Vec<[i64; 3]>)> {
    let mut cells = Vec::new();
    for o in [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]] {
        let vs = Shape::Hex.reference_vertices().iter().map(|p| [p[0] + o[0], p[1] + o[1], p[2] + o[2]]).collect();
        cells.push((Shape::Hex, vs));
    }
    cells.extend(prism_pair([1, 1, 0], |p| p, |p| [p[1], p[0], 1 - p[2]]));
    cells.extend(prism_pair([1, 0, 1], |p| [p[0], 1 - p[2], p[1]], |p| [p[1], p[2], p[0]]));
    cells.extend(prism_pair([0, 1, 1], |p| [p[2], p[0], p[1]], |p| [1 - p[2], p[1], p[0]]));
    cells.extend(kuhn_tets([1, 1, 1]));
    cells
}
