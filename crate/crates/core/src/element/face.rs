//! Vertex permutations of tree-to-tree face connections.

use super::Shape;

fn rotation(face: Shape, o: u8) -> &'static [u8] {
    const LINE: [[u8; 2]; 2] = [[0, 1], [1, 0]];
    const TRI: [[u8; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];
    const QUAD: [[u8; 4]; 4] = [[0, 1, 2, 3], [1, 3, 0, 2], [2, 0, 3, 1], [3, 2, 1, 0]];
    match face {
        Shape::Vertex => &[0],
        Shape::Line => &LINE[o as usize],
        Shape::Triangle => &TRI[o as usize],
        Shape::Quad => &QUAD[o as usize],
        _ => panic!("{face} is not a face shape"),
    }
}

/// Permutation `σ` with face vertex `i` meeting vertex `σ(i)` of the other face,
/// for orientation `o` and sign `sign`. Line and vertex faces ignore the sign.
pub fn face_permutation(face: Shape, o: u8, sign: i8) -> Vec<u8> {
    let r = rotation(face, o);
    let n = r.len();
    (0..n)
        .map(|i| {
            let j = match face {
                Shape::Triangle | Shape::Quad if sign < 0 && (i == 1 || i == 2) => 3 - i,
                _ => i,
            };
            r[j]
        })
        .collect()
}

/// Inverse of [`face_permutation`]: the `(o, sign)` producing `perm`, if any.
pub fn orientation_for_permutation(face: Shape, perm: &[u8]) -> Option<(u8, i8)> {
    let n = face.num_vertices() as u8;
    for sign in [1i8, -1] {
        for o in 0..n {
            if face_permutation(face, o, sign) == perm {
                return Some((o, sign));
            }
        }
    }
    None
}
