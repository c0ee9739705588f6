//! Legacy ASCII VTK export of a forest, optionally with one rank's ghosts.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::element::Shape;
use crate::forest::Forest;
use crate::ghost::GhostLayer;

fn cell_type(shape: Shape) -> u8 {
    match shape {
        Shape::Vertex => 1,
        Shape::Line => 3,
        Shape::Triangle => 5,
        Shape::Quad => 9,
        Shape::Tet => 10,
        Shape::Hex => 12,
        Shape::Prism => 13,
    }
}

fn det3(a: [i64; 3], b: [i64; 3], c: [i64; 3]) -> i128 {
    let [a, b, c] = [a, b, c].map(|v| v.map(|x| x as i128));
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn diff(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Vertex order expected by VTK, given the element's mapped vertices.
fn vtk_order(shape: Shape, v: &[[i64; 3]]) -> Vec<usize> {
    match shape {
        Shape::Triangle => {
            let (a, b) = (diff(v[1], v[0]), diff(v[2], v[0]));
            if (a[0] as i128) * (b[1] as i128) - (a[1] as i128) * (b[0] as i128) < 0 {
                vec![0, 2, 1]
            } else {
                vec![0, 1, 2]
            }
        }
        Shape::Quad => {
            let (a, b) = (diff(v[1], v[0]), diff(v[2], v[0]));
            if (a[0] as i128) * (b[1] as i128) - (a[1] as i128) * (b[0] as i128) < 0 {
                vec![0, 2, 3, 1]
            } else {
                vec![0, 1, 3, 2]
            }
        }
        Shape::Tet => {
            if det3(diff(v[1], v[0]), diff(v[2], v[0]), diff(v[3], v[0])) < 0 {
                vec![0, 2, 1, 3]
            } else {
                vec![0, 1, 2, 3]
            }
        }
        Shape::Hex => {
            if det3(diff(v[1], v[0]), diff(v[2], v[0]), diff(v[4], v[0])) < 0 {
                vec![4, 5, 7, 6, 0, 1, 3, 2]
            } else {
                vec![0, 1, 3, 2, 4, 5, 7, 6]
            }
        }
        Shape::Prism => {
            // the base triangle must face away from the top one
            if det3(diff(v[1], v[0]), diff(v[2], v[0]), diff(v[3], v[0])) > 0 {
                vec![0, 2, 1, 3, 5, 4]
            } else {
                vec![0, 1, 2, 3, 4, 5]
            }
        }
        Shape::Line | Shape::Vertex => (0..v.len()).collect(),
    }
}

/// Renders the forest. With `ghosts_of = Some((r, layer))` the ghosts of rank
/// `r` are appended as extra cells and flagged in `is_ghost_of_rank_r`.
pub fn vtk_string(forest: &Forest, ghosts_of: Option<(usize, &GhostLayer)>) -> io::Result<String> {
    let cm = forest.cmesh();
    let geo = cm.geometry().ok_or_else(|| io::Error::other(format!("coarse mesh `{}` has no coordinates", cm.name)))?;
    let sc = forest.scheme();
    let scale = sc.root_len() as i64;
    let unit = (geo.denom * scale) as f64;

    let mut cells: Vec<(usize, usize, bool)> = Vec::with_capacity(forest.num_leaves());
    for g in 0..forest.num_leaves() {
        cells.push((g, forest.rank_of_index(g), false));
    }
    if let Some((r, layer)) = ghosts_of {
        cells.extend(layer.ranks[r].ghosts.iter().map(|gh| (gh.global, gh.owner, true)));
    }

    let mut points: Vec<[i64; 3]> = Vec::new();
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut conn: Vec<(u8, Vec<usize>)> = Vec::with_capacity(cells.len());
    let mut levels = Vec::with_capacity(cells.len());
    let mut buf = [[0i64; 3]; 8];
    for &(g, _, _) in &cells {
        let (k, i) = forest.locate(g);
        let e = forest.tree_leaves(k)[i];
        let n = sc.vertices_into(&e, &mut buf);
        let mapped: Vec<[i64; 3]> = buf[..n].iter().map(|&v| geo.maps[k].apply(v, scale)).collect();
        let ids = vtk_order(e.shape, &mapped)
            .into_iter()
            .map(|j| {
                *index.entry(mapped[j]).or_insert_with(|| {
                    points.push(mapped[j]);
                    points.len() - 1
                })
            })
            .collect();
        conn.push((cell_type(e.shape), ids));
        levels.push(e.level);
    }

    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{} ranks={}", cm.name, forest.num_ranks());
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{} {} {}", p[0] as f64 / unit, p[1] as f64 / unit, p[2] as f64 / unit);
    }
    let size: usize = conn.iter().map(|(_, ids)| ids.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", conn.len());
    for (_, ids) in &conn {
        let _ = write!(s, "{}", ids.len());
        for id in ids {
            let _ = write!(s, " {id}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", conn.len());
    for (t, _) in &conn {
        let _ = writeln!(s, "{t}");
    }
    let _ = writeln!(s, "CELL_DATA {}", conn.len());
    let _ = writeln!(s, "SCALARS rank int 1\nLOOKUP_TABLE default");
    for &(_, r, _) in &cells {
        let _ = writeln!(s, "{r}");
    }
    let _ = writeln!(s, "SCALARS level int 1\nLOOKUP_TABLE default");
    for l in &levels {
        let _ = writeln!(s, "{l}");
    }
    if ghosts_of.is_some() {
        let _ = writeln!(s, "SCALARS is_ghost_of_rank_r int 1\nLOOKUP_TABLE default");
        for &(_, _, ghost) in &cells {
            let _ = writeln!(s, "{}", u8::from(ghost));
        }
    }
    Ok(s)
}

pub fn export_vtk(forest: &Forest, ghosts_of: Option<(usize, &GhostLayer)>, path: &Path) -> io::Result<()> {
    std::fs::write(path, vtk_string(forest, ghosts_of)?)
}
