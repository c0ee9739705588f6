//! Human-readable dumps of the face kernels.
//!
//! Coordinate formulas are not stored anywhere; they are recovered by running
//! the kernels on every element up to a small level under two maximum levels
//! and fitting an integer affine expression to the results.

use std::fmt::Write as _;

use crate::cmesh::face_sign;
use crate::element::{Element, Scheme, Shape};

pub const TABLE_NAMES: &[&str] =
    &["tree_face", "boundary_face", "transform_face", "sign", "extrude_face", "children_at_face"];

const PROBE_LEVELS: [u8; 2] = [6, 7];
const PROBE_DEPTH: u8 = 3;

struct Section {
    table: &'static str,
    title: String,
    shapes: Vec<Shape>,
    rows: Vec<String>,
}

/// Descendants of the root of `shape` up to `PROBE_DEPTH`, for each probe scheme.
fn probe_elements(shape: Shape) -> Vec<(Scheme, Element)> {
    let mut out = Vec::new();
    for l in PROBE_LEVELS {
        let sc = Scheme::new(l).expect("probe level");
        let mut level = vec![sc.root(shape)];
        for _ in 0..=PROBE_DEPTH {
            out.extend(level.iter().map(|e| (sc, *e)));
            level = level.iter().flat_map(|e| sc.children(e).expect("below max level")).collect();
        }
    }
    out
}

/// A sample: named input features and an observed value.
type Sample = (Vec<i64>, i64);

/// Integer coefficients reproducing every sample, using features in preference
/// order and skipping those linearly dependent on earlier ones.
fn fit(samples: &[Sample], preference: &[usize]) -> Option<Vec<i64>> {
    let nf = samples.first()?.0.len();
    let col = |j: usize| -> Vec<f64> { samples.iter().map(|s| s.0[j] as f64).collect() };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for &j in preference {
        let mut v = col(j);
        for b in &basis {
            let c = dot(&v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 * (1.0 + dot(&col(j), &col(j)).sqrt()) {
            basis.push(v.iter().map(|x| x / n).collect());
            chosen.push(j);
        }
    }
    // normal equations on the chosen columns
    let k = chosen.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for s in samples {
        for r in 0..k {
            for c in 0..k {
                a[r][c] += (s.0[chosen[r]] * s.0[chosen[c]]) as f64;
            }
            a[r][k] += (s.0[chosen[r]] * s.1) as f64;
        }
    }
    let x = solve(a)?;
    let mut coef = vec![0i64; nf];
    for (i, &j) in chosen.iter().enumerate() {
        coef[j] = x[i].round() as i64;
    }
    samples.iter().all(|(f, y)| f.iter().zip(&coef).map(|(a, b)| a * b).sum::<i64>() == *y).then_some(coef)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for i in 0..n {
        let p = (i..n).max_by(|&r, &s| a[r][i].abs().total_cmp(&a[s][i].abs()))?;
        if a[p][i].abs() < 1e-9 {
            return None;
        }
        a.swap(i, p);
        for r in 0..n {
            if r != i {
                let m = a[r][i] / a[i][i];
                for c in i..=n {
                    a[r][c] -= m * a[i][c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Renders `sum coef * name` with the `2^L` term first and `h` last.
fn render(coef: &[i64], names: &[&str], order: &[usize]) -> String {
    let mut s = String::new();
    for &j in order {
        let c = coef[j];
        if c == 0 {
            continue;
        }
        if c < 0 {
            s.push('-');
        } else if !s.is_empty() {
            s.push('+');
        }
        if c.abs() != 1 {
            let _ = write!(s, "{}", c.abs());
        }
        s.push_str(names[j]);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

/// Fits one output coordinate. Features are `[x, y, z, h, 2^L]`.
fn formula(samples: &[Sample], var: &str, dim: usize) -> String {
    let names = [format!("{var}.x"), format!("{var}.y"), format!("{var}.z"), "h".into(), "2^L".into()];
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let preference: &[usize] = if dim == 3 { &[2, 1, 0, 3, 4] } else { &[0, 1, 3, 4] };
    match fit(samples, preference) {
        Some(c) => render(&c, &names, &[4, 0, 1, 2, 3]),
        None => "?".into(),
    }
}

fn features(sc: &Scheme, e: &Element) -> Vec<i64> {
    let a = e.anchor.map(i64::from);
    vec![a[0], a[1], a[2], sc.len(e.level) as i64, sc.root_len() as i64]
}

fn tuple(parts: &[String]) -> String {
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(","))
    }
}

fn var_name(shape: Shape) -> &'static str {
    match shape {
        Shape::Quad | Shape::Hex => "Q",
        _ => "T",
    }
}

fn tree_face_sections() -> Vec<Section> {
    let sc = Scheme::default();
    [Shape::Triangle, Shape::Tet]
        .into_iter()
        .map(|shape| {
            let mut rows = vec!["type f g".to_string()];
            for t in 0..shape.num_types() {
                let hits: Vec<(u8, u8)> = (0..shape.num_faces() as u8)
                    .filter_map(|f| sc.tree_face_of_type(shape, t, f).map(|g| (f, g)))
                    .collect();
                if hits.is_empty() {
                    rows.push(format!("{t} - -"));
                }
                rows.extend(hits.into_iter().map(|(f, g)| format!("{t} {f} {g}")));
            }
            Section { table: "tree_face", title: format!("tree_face {shape}"), shapes: vec![shape], rows }
        })
        .collect()
}

fn boundary_face_sections() -> Vec<Section> {
    let mut out = Vec::new();
    for shape in [Shape::Quad, Shape::Hex, Shape::Triangle, Shape::Tet] {
        let probes = probe_elements(shape);
        let fdim = shape.dim() - 1;
        let fv = if fdim == 1 { "F.x".to_string() } else { "(F.x,F.y)".to_string() };
        let mut rows = vec![match shape {
            Shape::Tet => format!("type f case type(F) {fv}"),
            Shape::Triangle => format!("type f {fv}"),
            _ => format!("f {fv}"),
        }];
        for t in 0..shape.num_types() {
            for f in 0..shape.num_faces() as u8 {
                let mut coords: Vec<Vec<Sample>> = vec![Vec::new(); fdim];
                let mut ftypes = std::collections::BTreeSet::new();
                let mut g = None;
                for (sc, e) in probes.iter().filter(|(_, e)| e.etype == t) {
                    let Ok(face) = sc.boundary_face(e, f) else { continue };
                    g = sc.tree_face(e, f).ok();
                    ftypes.insert(face.etype);
                    for (k, c) in coords.iter_mut().enumerate() {
                        c.push((features(sc, e), face.anchor[k] as i64));
                    }
                }
                if coords[0].is_empty() {
                    if shape == Shape::Tet
                        && f == 0
                        && (0..4).all(|ff| Scheme::default().tree_face_of_type(shape, t, ff).is_none())
                    {
                        rows.push(format!("{t} - - - -"));
                    }
                    continue;
                }
                let expr = tuple(&coords.iter().map(|c| formula(c, var_name(shape), shape.dim())).collect::<Vec<_>>());
                rows.push(match shape {
                    Shape::Tet => {
                        let case = if g.unwrap_or(0) < 2 { 1 } else { 2 };
                        let ft: Vec<String> = ftypes.iter().map(u8::to_string).collect();
                        format!("{t} {f} {case} {} {expr}", ft.join(","))
                    }
                    Shape::Triangle => format!("{t} {f} {expr}"),
                    _ => format!("{f} {expr}"),
                });
            }
        }
        out.push(Section {
            table: "boundary_face",
            title: format!("boundary_face {shape}"),
            shapes: vec![shape],
            rows,
        });
    }
    out
}

fn transform_rows(shape: Shape, orientations: &[u8], sign: i8) -> Vec<String> {
    let probes = probe_elements(shape);
    let fdim = shape.dim();
    let mut rows = Vec::new();
    for t in 0..shape.num_types() {
        for &o in orientations {
            let mut coords: Vec<Vec<Sample>> = vec![Vec::new(); fdim];
            for (sc, e) in probes.iter().filter(|(_, e)| e.etype == t) {
                let out = sc.transform_face(e, o, sign).expect("valid orientation");
                for (k, c) in coords.iter_mut().enumerate() {
                    c.push((features(sc, e), out.anchor[k] as i64));
                }
            }
            let expr = tuple(&coords.iter().map(|c| formula(c, "F", fdim)).collect::<Vec<_>>());
            let mut row = String::new();
            if shape.num_types() > 1 {
                let _ = write!(row, "{t} ");
            }
            if orientations.len() > 1 {
                let _ = write!(row, "{o} ");
            }
            row.push_str(&expr);
            rows.push(row);
        }
    }
    rows
}

fn transform_sections() -> Vec<Section> {
    let mut out = Vec::new();
    for (shape, head) in
        [(Shape::Line, "o F'.x"), (Shape::Quad, "o (F'.x,F'.y)"), (Shape::Triangle, "type(F) o (F'.x,F'.y)")]
    {
        let os: Vec<u8> = (0..shape.num_vertices() as u8).collect();
        let mut rows = vec![head.to_string()];
        rows.extend(transform_rows(shape, &os, 1));
        out.push(Section {
            table: "transform_face",
            title: format!("transform_face {shape} s=1"),
            shapes: vec![shape],
            rows,
        });
    }
    for (shape, head) in [(Shape::Triangle, "type(F) (F'.x,F'.y)"), (Shape::Quad, "(F'.x,F'.y)")] {
        let mut rows = vec![head.to_string()];
        rows.extend(transform_rows(shape, &[0], -1));
        out.push(Section {
            table: "transform_face",
            title: format!("transform_face {shape} s=-1 o=0"),
            shapes: vec![shape],
            rows,
        });
    }
    out
}

fn sign_sections() -> Vec<Section> {
    let pairs: [(Shape, Shape, &[u8]); 4] = [
        (Shape::Tet, Shape::Tet, &[0, 1, 2, 3]),
        (Shape::Hex, Shape::Prism, &[0, 1, 2]),
        (Shape::Tet, Shape::Prism, &[3, 4]),
        (Shape::Prism, Shape::Prism, &[0, 1, 2, 3, 4]),
    ];
    pairs
        .into_iter()
        .map(|(t, t2, gs2)| {
            let head: Vec<String> = (0..t.num_faces()).map(|g| g.to_string()).collect();
            let mut rows = vec![format!("g'\\g {}", head.join(" "))];
            for &g2 in gs2 {
                let vals: Vec<String> = (0..t.num_faces() as u8)
                    .map(|g| face_sign(t, t2, g, g2).map_or("-".to_string(), |s| s.to_string()))
                    .collect();
                rows.push(format!("{g2} {}", vals.join(" ")));
            }
            Section { table: "sign", title: format!("sign {t} {t2}"), shapes: vec![t, t2], rows }
        })
        .collect()
}

fn extrude_sections() -> Vec<Section> {
    let mut out = Vec::new();
    for shape in [Shape::Quad, Shape::Triangle, Shape::Hex, Shape::Tet, Shape::Prism] {
        let dim = shape.dim();
        let cols = ["E'.x", "E'.y", "E'.z"][..dim].join(",");
        let mut rows = vec![format!("g' ({cols})")];
        let mut type_rows = vec!["g' type(F') type(E')".to_string()];
        for g in 0..shape.num_faces() as u8 {
            let fshape = shape.face_shape(g);
            let probes = probe_elements(fshape);
            let mut coords: Vec<Vec<Sample>> = vec![Vec::new(); dim];
            let mut types = std::collections::BTreeMap::new();
            for (sc, f) in &probes {
                let e = sc.extrude_face(f, shape, g).expect("matching face shape");
                types.insert(f.etype, e.etype);
                for (k, c) in coords.iter_mut().enumerate() {
                    c.push((features(sc, f), e.anchor[k] as i64));
                }
            }
            let expr = tuple(&coords.iter().map(|c| formula(c, "F'", fshape.dim())).collect::<Vec<_>>());
            rows.push(format!("{g} {expr}"));
            for (ft, et) in types {
                if fshape.num_types() > 1 {
                    type_rows.push(format!("{g} {ft} {et}"));
                } else {
                    type_rows.push(format!("{g} - {et}"));
                }
            }
        }
        out.push(Section { table: "extrude_face", title: format!("extrude_face {shape}"), shapes: vec![shape], rows });
        if shape.num_types() > 1 && dim == 3 {
            out.push(Section {
                table: "extrude_face",
                title: format!("extrude_face {shape} types"),
                shapes: vec![shape],
                rows: type_rows,
            });
        }
    }
    out
}

fn children_at_face_sections() -> Vec<Section> {
    let sc = Scheme::default();
    [Shape::Triangle, Shape::Tet, Shape::Prism]
        .into_iter()
        .map(|shape| {
            let head: Vec<String> = (0..shape.num_faces()).map(|f| f.to_string()).collect();
            let mut rows = vec![format!("type\\f {}", head.join(" "))];
            for t in 0..shape.num_types() {
                let cells: Vec<String> = (0..shape.num_faces() as u8)
                    .map(|f| {
                        sc.children_at_face_ids(shape, t, f).iter().map(u8::to_string).collect::<Vec<_>>().join(",")
                    })
                    .collect();
                rows.push(format!("{t} {}", cells.join(" ")));
            }
            Section { table: "children_at_face", title: format!("children_at_face {shape}"), shapes: vec![shape], rows }
        })
        .collect()
}

/// All tables, optionally restricted to one table name and/or one shape.
pub fn tables(table: Option<&str>, shape: Option<Shape>) -> String {
    let wanted = |name: &str| table.is_none_or(|t| t == name);
    let mut sections = Vec::new();
    if wanted("tree_face") {
        sections.extend(tree_face_sections());
    }
    if wanted("boundary_face") {
        sections.extend(boundary_face_sections());
    }
    if wanted("transform_face") {
        sections.extend(transform_sections());
    }
    if wanted("sign") {
        sections.extend(sign_sections());
    }
    if wanted("extrude_face") {
        sections.extend(extrude_sections());
    }
    if wanted("children_at_face") {
        sections.extend(children_at_face_sections());
    }
    let mut s = String::new();
    for sec in sections.iter().filter(|sec| shape.is_none_or(|sh| sec.shapes.contains(&sh))) {
        debug_assert!(TABLE_NAMES.contains(&sec.table));
        let _ = writeln!(s, "[{}]", sec.title);
        for r in &sec.rows {
            let _ = writeln!(s, "{r}");
        }
        s.push('\n');
    }
    s
}
