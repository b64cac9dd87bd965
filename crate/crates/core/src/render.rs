//! Meshes and outlines of unit spheres, written as CSV and SVG.
//!
//! Output is a pure function of the inputs (no timestamps), so re-runs are
//! byte-identical.

use std::fmt::Write as _;

use crate::norms::{edge_point, example_surface_height, Custom3DParams, NormError, NormKind, NormSpec};

/// Triangulated patch of the upper surface of the custom ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

/// Mesh of the upper surface over the triangles `Δ_k` (`k ∈ 1..=4`) of the
/// unit square, `grid` rows per triangle.
///
/// Row `i` of a triangle sits at `ρ = i/grid` and holds `i + 1` vertices
/// evenly spaced along the edge parameter. Triangles share no vertices.
pub fn surface_mesh(params: &Custom3DParams, triangles: &[usize], grid: usize) -> Result<Mesh, NormError> {
    if grid == 0 {
        return Err(NormError::Invalid("grid must be at least 1".into()));
    }
    let mut mesh = Mesh {
        vertices: Vec::new(),
        faces: Vec::new(),
    };
    for &t in triangles {
        if !(1..=4).contains(&t) {
            return Err(NormError::BadEdge(t));
        }
        let base = mesh.vertices.len();
        // index of (i, j) within this triangle
        let at = |i: usize, j: usize| base + i * (i + 1) / 2 + j;
        for i in 0..=grid {
            let rho = i as f64 / grid as f64;
            for j in 0..=i {
                let s = if i == 0 { 0.0 } else { -1.0 + 2.0 * j as f64 / i as f64 };
                let e = edge_point(t, s)?;
                let (x, y) = (rho * e[0], rho * e[1]);
                let z = example_surface_height(x, y, params)?;
                mesh.vertices.push([x, y, z]);
            }
        }
        for i in 0..grid {
            for j in 0..=i {
                mesh.faces.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
                if j < i {
                    mesh.faces.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
                }
            }
        }
    }
    Ok(mesh)
}

pub fn mesh_csv(mesh: &Mesh) -> String {
    let mut out = String::from("x,y,z\n");
    for v in &mesh.vertices {
        let _ = writeln!(out, "{},{},{}", v[0], v[1], v[2]);
    }
    out
}

/// Orthographic view: rotate by `AZIMUTH` about z, then tilt by `ELEVATION`.
const AZIMUTH: f64 = -0.6;
const ELEVATION: f64 = 0.45;
const SVG_SIZE: f64 = 480.0;

fn project(p: &[f64; 3]) -> (f64, f64) {
    let (sa, ca) = AZIMUTH.sin_cos();
    let (se, ce) = ELEVATION.sin_cos();
    let u = p[0] * ca - p[1] * sa;
    let w = p[0] * sa + p[1] * ca;
    (u, p[2] * ce + w * se)
}

fn svg_frame(points: impl Iterator<Item = (f64, f64)> + Clone) -> impl Fn((f64, f64)) -> (f64, f64) {
    let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (u, v) in points {
        lo_u = lo_u.min(u);
        hi_u = hi_u.max(u);
        lo_v = lo_v.min(v);
        hi_v = hi_v.max(v);
    }
    let span = (hi_u - lo_u).max(hi_v - lo_v).max(1e-12);
    let pad = 0.05 * SVG_SIZE;
    let k = (SVG_SIZE - 2.0 * pad) / span;
    move |(u, v)| (pad + (u - lo_u) * k, SVG_SIZE - pad - (v - lo_v) * k)
}

fn svg_open(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = SVG_SIZE
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

pub fn mesh_svg(mesh: &Mesh) -> String {
    let projected: Vec<(f64, f64)> = mesh.vertices.iter().map(project).collect();
    let frame = svg_frame(projected.iter().copied());
    let mut out = String::new();
    svg_open(&mut out);
    let _ = write!(out, r#"<path fill="none" stroke="black" stroke-width="0.4" d=""#);
    for f in &mesh.faces {
        let (a, b, c) = (frame(projected[f[0]]), frame(projected[f[1]]), frame(projected[f[2]]));
        let _ = write!(
            out,
            "M{:.3} {:.3}L{:.3} {:.3}L{:.3} {:.3}Z",
            a.0, a.1, b.0, b.1, c.0, c.1
        );
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

/// Closed outline of the unit circle of a planar norm.
///
/// Directions are taken evenly along the boundary of the square
/// `[-1, 1]²` starting at `(1, 0)` and scaled onto the sphere, so the
/// square's corners are hit whenever `samples` is a multiple of 8.
pub fn sphere_polyline(spec: &NormSpec, samples: usize) -> Result<Vec<[f64; 2]>, NormError> {
    if spec.dim() != 2 || matches!(spec.kind(), NormKind::Custom3D(_)) {
        return Err(NormError::Invalid("outlines need a planar norm".into()));
    }
    if samples < 3 {
        return Err(NormError::Invalid("at least 3 samples are needed".into()));
    }
    (0..samples)
        .map(|k| {
            // perimeter parameter in [0, 8)
            let t = 8.0 * k as f64 / samples as f64;
            let d = match t {
                t if t < 1.0 => [1.0, t],
                t if t < 3.0 => [2.0 - t, 1.0],
                t if t < 5.0 => [-1.0, 4.0 - t],
                t if t < 7.0 => [t - 6.0, -1.0],
                t => [1.0, t - 8.0],
            };
            let n = spec.norm(&d)?;
            Ok([d[0] / n, d[1] / n])
        })
        .collect()
}

pub fn polyline_csv(points: &[[f64; 2]]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p[0], p[1]);
    }
    out
}

pub fn polyline_svg(points: &[[f64; 2]]) -> String {
    let frame = svg_frame(points.iter().map(|p| (p[0], p[1])));
    let mut out = String::new();
    svg_open(&mut out);
    let _ = write!(out, r#"<polygon fill="none" stroke="black" stroke-width="1" points=""#);
    for (i, p) in points.iter().enumerate() {
        let (u, v) = frame((p[0], p[1]));
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{u:.3},{v:.3}");
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_shape() {
        let mesh = surface_mesh(&Custom3DParams::default(), &[1, 2], 4).unwrap();
        // 15 vertices and 16 faces per triangle
        assert_eq!(mesh.vertices.len(), 30);
        assert_eq!(mesh.faces.len(), 32);
        assert_eq!(mesh.vertices[0], [0.0, 0.0, 1.0]);
        assert!(mesh.faces.iter().flatten().all(|&i| i < 30));
    }

    #[test]
    fn mesh_vertices_on_sphere() {
        let spec = NormSpec::custom3d(Custom3DParams::default());
        let mesh = surface_mesh(&Custom3DParams::default(), &[1, 2, 3, 4], 16).unwrap();
        for v in &mesh.vertices {
            assert!((spec.norm(v).unwrap() - 1.0).abs() < 1e-9, "{v:?}");
        }
    }

    #[test]
    fn mesh_rejects_bad_input() {
        let p = Custom3DParams::default();
        assert!(surface_mesh(&p, &[1], 0).is_err());
        assert!(surface_mesh(&p, &[5], 4).is_err());
    }

    #[test]
    fn linf_outline_is_square() {
        let linf = NormSpec::linf(2).unwrap();
        let pts = sphere_polyline(&linf, 16).unwrap();
        assert_eq!(pts[0], [1.0, 0.0]);
        assert!(pts.contains(&[1.0, 1.0]) && pts.contains(&[-1.0, -1.0]));
        assert!(pts.iter().all(|p| p[0].abs().max(p[1].abs()) == 1.0));
    }

    #[test]
    fn outline_needs_planar_norm() {
        let l2 = NormSpec::euclidean(3).unwrap();
        assert!(sphere_polyline(&l2, 64).is_err());
    }

    #[test]
    fn output_is_deterministic() {
        let p = Custom3DParams::default();
        let a = surface_mesh(&p, &[1, 2], 8).unwrap();
        let b = surface_mesh(&p, &[1, 2], 8).unwrap();
        assert_eq!(mesh_csv(&a), mesh_csv(&b));
        assert_eq!(mesh_svg(&a), mesh_svg(&b));
        assert!(mesh_svg(&a).starts_with("<svg"));
    }
}
