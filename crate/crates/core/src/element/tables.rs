//! Frozen lookup tables for the simplex kernels.
//!
//! Generated once from the reference vertex geometry and checked against an
//! independent geometric derivation in `tests/element_tables.rs`. Cube ids use
//! the bit layout `x + 2y + 4z`; child order sorts siblings by `(cube id, type)`.

/// `(cube id, type)` of child `i` of a triangle of the given type.
pub const TRI_CHILDREN: [[(u8, u8); 4]; 2] = [[(0, 0), (1, 0), (1, 1), (3, 0)], [(0, 1), (2, 0), (2, 1), (3, 1)]];

/// `(parent type, child id)` indexed by `[type][cube id]`.
pub const TRI_PARENT: [[(u8, u8); 4]; 2] = [[(0, 0), (0, 1), (1, 1), (0, 3)], [(1, 0), (0, 2), (1, 2), (1, 3)]];

pub const TRI_CHILDREN_AT_FACE: [[[u8; 2]; 3]; 2] = [[[1, 3], [0, 3], [0, 1]], [[2, 3], [0, 3], [0, 2]]];

/// `(dx, dy, neighbor type, dual face)` with offsets in units of `h`.
pub const TRI_NEIGHBOR: [[(i8, i8, u8, u8); 3]; 2] =
    [[(1, 0, 1, 2), (0, 0, 1, 1), (0, -1, 1, 0)], [(0, 1, 0, 2), (0, 0, 0, 1), (-1, 0, 0, 0)]];

/// Root face `g` for face `f` of a boundary triangle; type 1 never touches the root boundary.
pub const TRI_TREE_FACE: [[Option<u8>; 3]; 2] = [[Some(0), Some(1), Some(2)], [None, None, None]];

pub const TET_CHILDREN: [[(u8, u8); 8]; 6] = [
    [(0, 0), (1, 0), (1, 4), (1, 5), (5, 0), (5, 1), (5, 2), (7, 0)],
    [(0, 1), (1, 1), (1, 2), (1, 3), (3, 0), (3, 1), (3, 5), (7, 1)],
    [(0, 2), (2, 0), (2, 1), (2, 2), (3, 2), (3, 3), (3, 4), (7, 2)],
    [(0, 3), (2, 3), (2, 4), (2, 5), (6, 1), (6, 2), (6, 3), (7, 3)],
    [(0, 4), (4, 2), (4, 3), (4, 4), (6, 0), (6, 4), (6, 5), (7, 4)],
    [(0, 5), (4, 0), (4, 1), (4, 5), (5, 3), (5, 4), (5, 5), (7, 5)],
];

pub const TET_PARENT: [[(u8, u8); 8]; 6] = [
    [(0, 0), (0, 1), (2, 1), (1, 4), (5, 1), (0, 4), (4, 4), (0, 7)],
    [(1, 0), (1, 1), (2, 2), (1, 5), (5, 2), (0, 5), (3, 4), (1, 7)],
    [(2, 0), (1, 2), (2, 3), (2, 4), (4, 1), (0, 6), (3, 5), (2, 7)],
    [(3, 0), (1, 3), (3, 1), (2, 5), (4, 2), (5, 4), (3, 6), (3, 7)],
    [(4, 0), (0, 2), (3, 2), (2, 6), (4, 3), (5, 5), (4, 5), (4, 7)],
    [(5, 0), (0, 3), (3, 3), (1, 6), (5, 3), (5, 6), (4, 6), (5, 7)],
];

pub const TET_CHILDREN_AT_FACE: [[[u8; 4]; 4]; 6] = [
    [[1, 4, 5, 7], [0, 4, 6, 7], [0, 1, 2, 7], [0, 1, 3, 4]],
    [[1, 4, 5, 7], [0, 5, 6, 7], [0, 1, 3, 7], [0, 1, 2, 5]],
    [[3, 4, 5, 7], [0, 4, 6, 7], [0, 1, 3, 7], [0, 2, 3, 4]],
    [[1, 5, 6, 7], [0, 4, 6, 7], [0, 1, 3, 7], [0, 1, 2, 6]],
    [[3, 5, 6, 7], [0, 4, 5, 7], [0, 1, 3, 7], [0, 2, 3, 5]],
    [[3, 5, 6, 7], [0, 4, 6, 7], [0, 2, 3, 7], [0, 1, 3, 6]],
];

/// Face of the `j`-th face child lying on parent face `f`, indexed `[type][f][j]`.
pub const TET_CHILD_FACE: [[[u8; 4]; 4]; 6] = [
    [[0, 0, 0, 0], [1, 1, 2, 1], [2, 2, 1, 2], [3, 3, 3, 3]],
    [[0, 0, 0, 0], [1, 1, 2, 1], [2, 2, 1, 2], [3, 3, 3, 3]],
    [[0, 0, 0, 0], [1, 1, 2, 1], [2, 1, 2, 2], [3, 3, 3, 3]],
    [[0, 0, 0, 0], [1, 2, 1, 1], [2, 2, 1, 2], [3, 3, 3, 3]],
    [[0, 0, 0, 0], [1, 2, 1, 1], [2, 1, 2, 2], [3, 3, 3, 3]],
    [[0, 0, 0, 0], [1, 2, 1, 1], [2, 1, 2, 2], [3, 3, 3, 3]],
];

/// `(dx, dy, dz, neighbor type, dual face)` with offsets in units of `h`.
pub const TET_NEIGHBOR: [[(i8, i8, i8, u8, u8); 4]; 6] = [
    [(1, 0, 0, 4, 3), (0, 0, 0, 5, 1), (0, 0, 0, 1, 2), (0, -1, 0, 2, 0)],
    [(1, 0, 0, 3, 3), (0, 0, 0, 2, 1), (0, 0, 0, 0, 2), (0, 0, -1, 5, 0)],
    [(0, 1, 0, 0, 3), (0, 0, 0, 1, 1), (0, 0, 0, 3, 2), (0, 0, -1, 4, 0)],
    [(0, 1, 0, 5, 3), (0, 0, 0, 4, 1), (0, 0, 0, 2, 2), (-1, 0, 0, 1, 0)],
    [(0, 0, 1, 2, 3), (0, 0, 0, 3, 1), (0, 0, 0, 5, 2), (-1, 0, 0, 0, 0)],
    [(0, 0, 1, 1, 3), (0, 0, 0, 0, 1), (0, 0, 0, 4, 2), (0, -1, 0, 3, 0)],
];

pub const TET_TREE_FACE: [[Option<u8>; 4]; 6] = [
    [Some(0), Some(1), Some(2), Some(3)],
    [Some(0), None, None, None],
    [None, None, Some(1), None],
    [None, None, None, None],
    [None, Some(2), None, None],
    [None, None, None, Some(3)],
];

pub const QUAD_CHILDREN_AT_FACE: [[u8; 2]; 4] = [[0, 2], [1, 3], [0, 1], [2, 3]];

pub const HEX_CHILDREN_AT_FACE: [[u8; 4]; 6] =
    [[0, 2, 4, 6], [1, 3, 5, 7], [0, 1, 4, 5], [2, 3, 6, 7], [0, 1, 2, 3], [4, 5, 6, 7]];

pub const PRISM_CHILDREN_AT_FACE: [[[u8; 4]; 5]; 2] = [
    [[1, 3, 5, 7], [0, 3, 4, 7], [0, 1, 4, 5], [0, 1, 2, 3], [4, 5, 6, 7]],
    [[2, 3, 6, 7], [0, 3, 4, 7], [0, 2, 4, 6], [0, 1, 2, 3], [4, 5, 6, 7]],
];

/// Tree vertices of each face in ascending order; this fixes the face-root frame.
pub const QUAD_FACE_VERTICES: [[u8; 2]; 4] = [[0, 2], [1, 3], [0, 1], [2, 3]];
pub const TRI_FACE_VERTICES: [[u8; 2]; 3] = [[1, 2], [0, 2], [0, 1]];
pub const HEX_FACE_VERTICES: [[u8; 4]; 6] = HEX_CHILDREN_AT_FACE;
pub const TET_FACE_VERTICES: [[u8; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];
pub const PRISM_FACE_VERTICES: [&[u8]; 5] = [&[1, 2, 4, 5], &[0, 2, 3, 5], &[0, 1, 3, 4], &[0, 1, 2], &[3, 4, 5]];
