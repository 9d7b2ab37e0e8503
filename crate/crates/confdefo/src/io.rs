//! OFF and OBJ mesh file readers and writers.
//!
//! OFF is the primary format. Coordinates are written with 17 significant
//! digits so a save/load round trip reproduces every `f64` bit-exactly.
//! Realizations in dimensions other than 3 use an extended OFF with a
//! `nDIM <n>` header token on the line after `OFF`. OBJ support covers
//! `v`/`f` records with 1-based triangle faces, 3-dimensional only.

use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::Realization;
use crate::mesh::TriMesh;
use crate::{Error, Result};

pub fn load_off(path: impl AsRef<Path>) -> Result<(TriMesh, Realization)> {
    parse_off(&std::fs::read_to_string(path)?)
}

pub fn save_off(path: impl AsRef<Path>, mesh: &TriMesh, f: &Realization) -> Result<()> {
    std::fs::write(path, format_off(mesh, f)?)?;
    Ok(())
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<(TriMesh, Realization)> {
    parse_obj(&std::fs::read_to_string(path)?)
}

pub fn save_obj(path: impl AsRef<Path>, mesh: &TriMesh, f: &Realization) -> Result<()> {
    std::fs::write(path, format_obj(mesh, f)?)?;
    Ok(())
}

/// Load a mesh file, dispatching on the `.off`/`.obj` extension.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<(TriMesh, Realization)> {
    let p = path.as_ref();
    match p.extension().and_then(|e| e.to_str()) {
        Some("obj") => load_obj(p),
        _ => load_off(p),
    }
}

fn numbers_of(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

pub fn parse_off(text: &str) -> Result<(TriMesh, Realization)> {
    // meaningful lines with their 1-based line numbers
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    if header != "OFF" {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected OFF header, found `{header}`"),
        });
    }

    let (mut ln, mut counts_line) = lines.next().ok_or(Error::Parse {
        line: ln,
        msg: "missing counts line".into(),
    })?;
    let mut dim = 3;
    let toks = numbers_of(counts_line);
    if toks.first() == Some(&"nDIM") {
        dim = toks
            .get(1)
            .and_then(|t| t.parse().ok())
            .filter(|d| (2..=4).contains(d))
            .ok_or(Error::Parse {
                line: ln,
                msg: "bad nDIM value".into(),
            })?;
        let next = lines.next().ok_or(Error::Parse {
            line: ln,
            msg: "missing counts line".into(),
        })?;
        ln = next.0;
        counts_line = next.1;
    }

    let counts = numbers_of(counts_line);
    if counts.len() < 2 {
        return Err(Error::Parse {
            line: ln,
            msg: "counts line needs `nv nf [ne]`".into(),
        });
    }
    let nv: usize = counts[0].parse().map_err(|_| Error::Parse {
        line: ln,
        msg: "bad vertex count".into(),
    })?;
    let nf: usize = counts[1].parse().map_err(|_| Error::Parse {
        line: ln,
        msg: "bad face count".into(),
    })?;

    let mut data = Vec::with_capacity(nv * dim);
    for _ in 0..nv {
        let (ln, line) = lines.next().ok_or(Error::Parse {
            line: ln,
            msg: "unexpected end of file in vertex block".into(),
        })?;
        let toks = numbers_of(line);
        if toks.len() != dim {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {dim} coordinates, found {}", toks.len()),
            });
        }
        for t in toks {
            data.push(t.parse::<f64>().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("bad coordinate `{t}`"),
            })?);
        }
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, line) = lines.next().ok_or(Error::Parse {
            line: ln,
            msg: "unexpected end of file in face block".into(),
        })?;
        let toks = numbers_of(line);
        let count: usize = toks
            .first()
            .and_then(|t| t.parse().ok())
            .ok_or(Error::Parse {
                line: ln,
                msg: "bad face record".into(),
            })?;
        if count != 3 {
            return Err(Error::NonTriangleFace { line: ln, count });
        }
        if toks.len() != 4 {
            return Err(Error::Parse {
                line: ln,
                msg: "triangle face needs exactly 3 indices".into(),
            });
        }
        let mut tri = [0usize; 3];
        for (slot, t) in tri.iter_mut().zip(&toks[1..]) {
            *slot = t.parse().map_err(|_| Error::Parse {
                line: ln,
                msg: format!("bad vertex index `{t}`"),
            })?;
        }
        faces.push(tri);
    }

    let mesh = TriMesh::from_faces(&faces)?;
    if mesh.vertex_count() > nv {
        return Err(Error::Parse {
            line: ln,
            msg: "face index exceeds vertex count".into(),
        });
    }
    let f = Realization::from_flat(dim, data)?;
    Ok((mesh, f))
}

pub fn format_off(mesh: &TriMesh, f: &Realization) -> Result<String> {
    let mut out = String::new();
    out.push_str("OFF\n");
    if f.dim() != 3 {
        let _ = writeln!(out, "nDIM {}", f.dim());
    }
    let _ = writeln!(out, "{} {} {}", mesh.vertex_count(), mesh.face_count(), mesh.edge_count());
    for v in 0..mesh.vertex_count() {
        let c = f.coords(v);
        for (t, x) in c.iter().enumerate() {
            if t > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:.16e}");
        }
        out.push('\n');
    }
    for fc in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", fc[0], fc[1], fc[2]);
    }
    Ok(out)
}

pub fn parse_obj(text: &str) -> Result<(TriMesh, Realization)> {
    let mut data = Vec::new();
    let mut faces = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks = numbers_of(line);
        match toks[0] {
            "v" => {
                if toks.len() < 4 {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "vertex record needs 3 coordinates".into(),
                    });
                }
                for t in &toks[1..4] {
                    data.push(t.parse::<f64>().map_err(|_| Error::Parse {
                        line: ln,
                        msg: format!("bad coordinate `{t}`"),
                    })?);
                }
            }
            "f" => {
                if toks.len() != 4 {
                    return Err(Error::NonTriangleFace {
                        line: ln,
                        count: toks.len() - 1,
                    });
                }
                let mut tri = [0usize; 3];
                for (slot, t) in tri.iter_mut().zip(&toks[1..]) {
                    // tolerate v/vt/vn references, take the vertex index
                    let first = t.split('/').next().unwrap_or(t);
                    let idx: usize = first.parse().map_err(|_| Error::Parse {
                        line: ln,
                        msg: format!("bad face index `{t}`"),
                    })?;
                    if idx == 0 {
                        return Err(Error::Parse {
                            line: ln,
                            msg: "OBJ indices are 1-based".into(),
                        });
                    }
                    *slot = idx - 1;
                }
                faces.push(tri);
            }
            _ => {} // ignore normals, texture coords, groups
        }
    }
    let mesh = TriMesh::from_faces(&faces)?;
    let f = Realization::from_flat(3, data)?;
    if f.vertex_count() < mesh.vertex_count() {
        return Err(Error::Parse {
            line: 0,
            msg: "face index exceeds vertex count".into(),
        });
    }
    Ok((mesh, f))
}

pub fn format_obj(mesh: &TriMesh, f: &Realization) -> Result<String> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch { got: f.dim(), need: 3 });
    }
    let mut out = String::new();
    for v in 0..mesh.vertex_count() {
        let c = f.coords(v);
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", c[0], c[1], c[2]);
    }
    for fc in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", fc[0] + 1, fc[1] + 1, fc[2] + 1);
    }
    Ok(out)
}
