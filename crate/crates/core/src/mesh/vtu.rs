//! VTK XML unstructured grid (`.vtu`, ASCII).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, MeshError};
use crate::elements::{permute, unpermute, CellFamily, OrderingScheme};

fn vtk_type(f: CellFamily) -> u8 {
    match f {
        CellFamily::P1Tet => 10,
        CellFamily::Q1Hex => 12,
        CellFamily::P2Tet => 24,
        CellFamily::Q2Hex => 25,
        CellFamily::Tri3 => 5,
        CellFamily::Quad4 => 9,
        CellFamily::Tri6 => 22,
        CellFamily::Quad8 => 23,
    }
}

fn family_of(t: u32) -> Option<CellFamily> {
    CellFamily::ALL
        .into_iter()
        .find(|&f| f.is_volume() && u32::from(vtk_type(f)) == t)
}

/// Serializes `mesh` with optional nodal fields. Each field's length must be a
/// multiple of the vertex count; the quotient is its component count.
pub fn write_vtu_string(mesh: &Mesh, point_data: &[(&str, &[f64])]) -> String {
    let nv = mesh.vertex_count();
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\">\n<UnstructuredGrid>\n");
    let _ = writeln!(s, "<Piece NumberOfPoints=\"{nv}\" NumberOfCells=\"{}\">", mesh.cell_count());
    if !point_data.is_empty() {
        s.push_str("<PointData>\n");
        for (name, data) in point_data {
            assert!(
                nv > 0 && data.len() % nv == 0,
                "field '{name}' has {} values for {nv} vertices",
                data.len()
            );
            let _ = writeln!(
                s,
                "<DataArray type=\"Float64\" Name=\"{name}\" NumberOfComponents=\"{}\" format=\"ascii\">",
                data.len() / nv
            );
            write_values(&mut s, data.iter());
            s.push_str("</DataArray>\n");
        }
        s.push_str("</PointData>\n");
    }
    s.push_str("<Points>\n<DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n");
    write_values(&mut s, mesh.vertices().iter().flatten());
    s.push_str("</DataArray>\n</Points>\n<Cells>\n");
    s.push_str("<DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n");
    let family = mesh.family();
    for c in mesh.cells() {
        let v = unpermute(OrderingScheme::LegacyVtk, family, c);
        let line: Vec<String> = v.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s.push_str("</DataArray>\n<DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n");
    let npc = family.node_count();
    let offsets: Vec<String> = (1..=mesh.cell_count()).map(|i| (i * npc).to_string()).collect();
    let _ = writeln!(s, "{}", offsets.join(" "));
    s.push_str("</DataArray>\n<DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n");
    let types = vec![vtk_type(family).to_string(); mesh.cell_count()];
    let _ = writeln!(s, "{}", types.join(" "));
    s.push_str("</DataArray>\n</Cells>\n</Piece>\n</UnstructuredGrid>\n</VTKFile>\n");
    s
}

fn write_values<'a>(s: &mut String, vals: impl Iterator<Item = &'a f64>) {
    for (i, v) in vals.enumerate() {
        if i > 0 {
            s.push(if i % 9 == 0 { '\n' } else { ' ' });
        }
        let _ = write!(s, "{v:?}");
    }
    s.push('\n');
}

pub fn write_vtu(path: impl AsRef<Path>, mesh: &Mesh, point_data: &[(&str, &[f64])]) -> Result<(), MeshError> {
    let p = path.as_ref();
    std::fs::write(p, write_vtu_string(mesh, point_data)).map_err(|source| MeshError::Io {
        path: p.display().to_string(),
        source,
    })
}

/// Text of the first `<DataArray ...>` whose opening tag contains `marker`,
/// with the line number of its opening tag.
fn data_array<'a>(src: &'a str, after: &str, marker: &str) -> Result<(&'a str, usize), MeshError> {
    let base = src.find(after).ok_or_else(|| MeshError::Parse {
        line: 0,
        msg: format!("missing {after}"),
    })?;
    let mut from = base;
    while let Some(rel) = src[from..].find("<DataArray") {
        let start = from + rel;
        let close = start
            + src[start..].find('>').ok_or_else(|| MeshError::Parse {
                line: line_of(src, start),
                msg: "unterminated DataArray tag".into(),
            })?;
        if src[start..close].contains(marker) {
            let end = close
                + src[close..].find("</DataArray>").ok_or_else(|| MeshError::Parse {
                    line: line_of(src, start),
                    msg: "unterminated DataArray".into(),
                })?;
            return Ok((&src[close + 1..end], line_of(src, start)));
        }
        from = close;
    }
    Err(MeshError::Parse {
        line: 0,
        msg: format!("no DataArray {marker} in {after}"),
    })
}

fn line_of(src: &str, byte: usize) -> usize {
    src[..byte].matches('\n').count() + 1
}

fn parse_all<T: std::str::FromStr>(text: &str, line: usize) -> Result<Vec<T>, MeshError> {
    text.split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| MeshError::Parse {
                line,
                msg: format!("bad number '{t}'"),
            })
        })
        .collect()
}

/// Reads the geometry and cells of an ASCII `.vtu` with a single volume cell
/// type. Facet tags are not stored in VTU and come back empty.
pub fn read_vtu(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let p = path.as_ref();
    let src = std::fs::read_to_string(p).map_err(|source| MeshError::Io {
        path: p.display().to_string(),
        source,
    })?;
    read_vtu_str(&src)
}

pub(crate) fn read_vtu_str(src: &str) -> Result<Mesh, MeshError> {
    let (text, line) = data_array(src, "<Points>", "NumberOfComponents=\"3\"")?;
    let xs: Vec<f64> = parse_all(text, line)?;
    if xs.len() % 3 != 0 {
        return Err(MeshError::Parse {
            line,
            msg: "point count is not a multiple of 3".into(),
        });
    }
    let vertices: Vec<[f64; 3]> = xs.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    let (text, line) = data_array(src, "<Cells>", "Name=\"connectivity\"")?;
    let conn: Vec<usize> = parse_all(text, line)?;
    let (text, line) = data_array(src, "<Cells>", "Name=\"types\"")?;
    let types: Vec<u32> = parse_all(text, line)?;
    let mut family = None;
    for &t in &types {
        let f = family_of(t).ok_or(MeshError::UnsupportedElement(t))?;
        match family {
            None => family = Some(f),
            Some(g) if g != f => return Err(MeshError::MixedFamilies(g, f)),
            _ => {}
        }
    }
    let family = family.ok_or(MeshError::NoCells)?;
    let cells: Vec<usize> = conn
        .chunks(family.node_count())
        .flat_map(|c| permute(OrderingScheme::LegacyVtk, family, c))
        .collect();
    Mesh::from_parts(vertices, family, cells, vec![], BTreeMap::new())
}
