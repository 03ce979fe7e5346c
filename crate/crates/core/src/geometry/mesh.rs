use super::{forms_of_jet, ParamPatch};
use crate::error::{Error, Result};
use crate::output::fmt9;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Clone, Debug, Default)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    pub mean_curvature: Vec<f64>,
    /// Quads, counter-clockwise with respect to the patch orientation.
    pub faces: Vec<[usize; 4]>,
    /// Parameter values of each vertex.
    pub params: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl SurfaceMesh {
    pub fn max_abs_h_minus(&self, target: f64) -> f64 {
        self.mean_curvature.iter().map(|h| (h - target).abs()).fold(0.0, f64::max)
    }

    fn face_area(&self, f: &[usize; 4]) -> f64 {
        let p = |i: usize| nalgebra::Vector3::from(self.vertices[f[i]]);
        let a = (p(1) - p(0)).cross(&(p(2) - p(0))).norm();
        let b = (p(2) - p(0)).cross(&(p(3) - p(0))).norm();
        0.5 * (a + b)
    }
}

/// Sample a patch on an n1 x n2 parameter grid; a periodic second parameter is
/// wrapped so the seam shares vertices.
pub fn sample_mesh<P: ParamPatch>(patch: &P, n1: usize, n2: usize) -> Result<SurfaceMesh> {
    if n1 < 4 || n2 < 4 {
        return Err(Error::Domain(format!("mesh resolution {n1} x {n2} below 4")));
    }
    let d = patch.domain();
    let u1s: Vec<f64> = (0..n1).map(|i| d.u1.0 + (d.u1.1 - d.u1.0) * i as f64 / (n1 - 1) as f64).collect();
    let u2s: Vec<f64> = if d.periodic2 {
        (0..n2).map(|j| d.u2.0 + (d.u2.1 - d.u2.0) * j as f64 / n2 as f64).collect()
    } else {
        (0..n2).map(|j| d.u2.0 + (d.u2.1 - d.u2.0) * j as f64 / (n2 - 1) as f64).collect()
    };
    let orient = patch.orientation();
    let rows: Vec<Result<Vec<([f64; 3], [f64; 3], f64, [f64; 2])>>> = u1s
        .par_iter()
        .map(|&a| {
            u2s.iter()
                .map(|&b| {
                    let j = patch.jet(a, b);
                    let (f, nu) = forms_of_jet(&j, orient, a, b)?;
                    Ok(([j.x.x, j.x.y, j.x.z], [nu.x, nu.y, nu.z], f.mean_curvature(), [a, b]))
                })
                .collect()
        })
        .collect();
    let mut mesh = SurfaceMesh::default();
    for row in rows {
        for (x, n, h, p) in row? {
            mesh.vertices.push(x);
            mesh.normals.push(n);
            mesh.mean_curvature.push(h);
            mesh.params.push(p);
        }
    }
    let cols = if d.periodic2 { n2 } else { n2 - 1 };
    for i in 0..n1 - 1 {
        for j in 0..cols {
            let jn = (j + 1) % n2;
            let f = [i * n2 + j, (i + 1) * n2 + j, (i + 1) * n2 + jn, i * n2 + jn];
            if !(mesh.face_area(&f) > 0.0) {
                return Err(Error::Degenerate { u1: u1s[i], u2: u2s[j], det: 0.0 });
            }
            mesh.faces.push(f);
        }
    }
    Ok(mesh)
}

fn write_obj_body<W: Write>(w: &mut W, mesh: &SurfaceMesh, offset: usize) -> Result<()> {
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", fmt9(v[0]), fmt9(v[1]), fmt9(v[2]))?;
    }
    for n in &mesh.normals {
        writeln!(w, "vn {} {} {}", fmt9(n[0]), fmt9(n[1]), fmt9(n[2]))?;
    }
    for f in &mesh.faces {
        let i: Vec<String> = f.iter().map(|k| format!("{0}//{0}", k + 1 + offset)).collect();
        writeln!(w, "f {}", i.join(" "))?;
    }
    Ok(())
}

/// Write one mesh as OBJ or ASCII PLY (PLY carries per-vertex H).
pub fn export_mesh(mesh: &SurfaceMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Obj => write_obj_body(&mut w, mesh, 0)?,
        MeshFormat::Ply => {
            writeln!(w, "ply\nformat ascii 1.0")?;
            writeln!(w, "element vertex {}", mesh.vertices.len())?;
            for p in ["x", "y", "z", "nx", "ny", "nz", "mean_curvature"] {
                writeln!(w, "property double {p}")?;
            }
            writeln!(w, "element face {}", mesh.faces.len())?;
            writeln!(w, "property list uchar int vertex_indices\nend_header")?;
            for (i, v) in mesh.vertices.iter().enumerate() {
                let n = mesh.normals[i];
                writeln!(
                    w,
                    "{} {} {} {} {} {} {}",
                    fmt9(v[0]),
                    fmt9(v[1]),
                    fmt9(v[2]),
                    fmt9(n[0]),
                    fmt9(n[1]),
                    fmt9(n[2]),
                    fmt9(mesh.mean_curvature[i])
                )?;
            }
            for f in &mesh.faces {
                writeln!(w, "4 {} {} {} {}", f[0], f[1], f[2], f[3])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Several meshes as named objects of one OBJ file.
pub fn export_obj_objects(pieces: &[(&str, &SurfaceMesh)], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut offset = 0;
    for (name, m) in pieces {
        writeln!(w, "o {name}")?;
        write_obj_body(&mut w, m, offset)?;
        offset += m.vertices.len();
    }
    w.flush()?;
    Ok(())
}

/// Vertex positions of an OBJ text.
pub fn parse_obj_vertices(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        if it.next() != Some("v") {
            continue;
        }
        let mut p = [0.0; 3];
        for c in p.iter_mut() {
            *c = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Numerical(format!("bad OBJ vertex line: {line}")))?;
        }
        out.push(p);
    }
    Ok(out)
}
