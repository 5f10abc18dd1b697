//! Gmsh `.msh` ASCII reader (formats 2.2 and 4.1) and a 2.2 writer.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::{Mesh, MeshError};
use crate::elements::{permute, unpermute, CellFamily, OrderingScheme};

fn gmsh_family(t: u32) -> Result<Option<CellFamily>, MeshError> {
    Ok(Some(match t {
        2 => CellFamily::Tri3,
        3 => CellFamily::Quad4,
        4 => CellFamily::P1Tet,
        5 => CellFamily::Q1Hex,
        9 => CellFamily::Tri6,
        11 => CellFamily::P2Tet,
        16 => CellFamily::Quad8,
        17 => CellFamily::Q2Hex,
        // points and lines carry no volume or facet information
        1 | 8 | 15 => return Ok(None),
        other => return Err(MeshError::UnsupportedElement(other)),
    }))
}

fn gmsh_type(f: CellFamily) -> u32 {
    match f {
        CellFamily::Tri3 => 2,
        CellFamily::Quad4 => 3,
        CellFamily::P1Tet => 4,
        CellFamily::Q1Hex => 5,
        CellFamily::Tri6 => 9,
        CellFamily::P2Tet => 11,
        CellFamily::Quad8 => 16,
        CellFamily::Q2Hex => 17,
    }
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(src: &'a str) -> Self {
        let lines = src
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        Self { lines, pos: 0 }
    }

    fn line_no(&self) -> usize {
        self.lines
            .get(self.pos)
            .or_else(|| self.lines.last())
            .map_or(0, |l| l.0)
    }

    fn err(&self, msg: impl Into<String>) -> MeshError {
        MeshError::Parse {
            line: self.line_no(),
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<(usize, &'a str), MeshError> {
        let l = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| self.err("unexpected end of file"))?;
        self.pos += 1;
        Ok(l)
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l.1)
    }

    fn numbers<T: std::str::FromStr>(&mut self) -> Result<(usize, Vec<T>), MeshError> {
        let (no, l) = self.next()?;
        let v = l
            .split_whitespace()
            .map(|t| {
                t.parse::<T>().map_err(|_| MeshError::Parse {
                    line: no,
                    msg: format!("bad number '{t}'"),
                })
            })
            .collect::<Result<Vec<T>, _>>()?;
        Ok((no, v))
    }

    fn expect(&mut self, tag: &str) -> Result<(), MeshError> {
        let (no, l) = self.next()?;
        if l != tag {
            return Err(MeshError::Parse {
                line: no,
                msg: format!("expected {tag}, found '{l}'"),
            });
        }
        Ok(())
    }

    fn skip_section(&mut self, name: &str) -> Result<(), MeshError> {
        let end = format!("$End{name}");
        loop {
            if self.next()?.1 == end {
                return Ok(());
            }
        }
    }
}

fn need(no: usize, v: &[impl Sized], n: usize) -> Result<(), MeshError> {
    if v.len() < n {
        return Err(MeshError::Parse {
            line: no,
            msg: format!("expected at least {n} values, found {}", v.len()),
        });
    }
    Ok(())
}

struct RawElement {
    family: CellFamily,
    physical: u32,
    nodes: Vec<u64>,
}

pub fn read_msh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let p = path.as_ref();
    let src = std::fs::read_to_string(p).map_err(|source| MeshError::Io {
        path: p.display().to_string(),
        source,
    })?;
    read_msh_str(&src)
}

pub fn read_msh_str(src: &str) -> Result<Mesh, MeshError> {
    let mut r = Lines::new(src);
    let mut version = None;
    let mut names: BTreeMap<u32, String> = BTreeMap::new();
    let mut entity_phys: HashMap<(u32, u32), u32> = HashMap::new();
    let mut nodes: HashMap<u64, [f64; 3]> = HashMap::new();
    let mut node_order: Vec<u64> = Vec::new();
    let mut elements: Vec<RawElement> = Vec::new();

    while r.peek().is_some() {
        let (no, head) = r.next()?;
        let Some(name) = head.strip_prefix('$') else {
            return Err(MeshError::Parse {
                line: no,
                msg: format!("expected a section header, found '{head}'"),
            });
        };
        match name {
            "MeshFormat" => {
                let (no, l) = r.next()?;
                let parts: Vec<&str> = l.split_whitespace().collect();
                need(no, &parts, 2)?;
                let v = match parts[0] {
                    "2.2" | "2.1" | "2" => 2,
                    "4.1" => 4,
                    other => {
                        return Err(MeshError::Parse {
                            line: no,
                            msg: format!("unsupported msh version {other} (2.2 or 4.1 expected)"),
                        })
                    }
                };
                if parts[1] != "0" {
                    return Err(MeshError::Parse {
                        line: no,
                        msg: "binary msh files are not supported".into(),
                    });
                }
                version = Some(v);
                r.expect("$EndMeshFormat")?;
            }
            "PhysicalNames" => {
                let (_, n) = r.numbers::<usize>()?;
                for _ in 0..n.first().copied().unwrap_or(0) {
                    let (no, l) = r.next()?;
                    let mut it = l.splitn(3, char::is_whitespace);
                    let _dim = it.next();
                    let id: u32 = it.next().and_then(|t| t.parse().ok()).ok_or(MeshError::Parse {
                        line: no,
                        msg: "bad physical name entry".into(),
                    })?;
                    let nm = it.next().unwrap_or("").trim().trim_matches('"').to_string();
                    names.insert(id, nm);
                }
                r.expect("$EndPhysicalNames")?;
            }
            "Entities" => {
                let (no, counts) = r.numbers::<usize>()?;
                need(no, &counts, 4)?;
                for (dim, &count) in counts.iter().take(4).enumerate() {
                    for _ in 0..count {
                        let (no, v) = r.numbers::<f64>()?;
                        // points: tag x y z nphys ...; others: tag 6 bbox values nphys ...
                        let at = if dim == 0 { 4 } else { 7 };
                        need(no, &v, at + 1)?;
                        let nphys = v[at] as usize;
                        if nphys > 0 {
                            need(no, &v, at + 2)?;
                            entity_phys.insert((dim as u32, v[0] as u32), v[at + 1].abs() as u32);
                        }
                    }
                }
                r.expect("$EndEntities")?;
            }
            "Nodes" => {
                match version {
                    Some(2) => {
                        let (_, n) = r.numbers::<usize>()?;
                        for _ in 0..n.first().copied().unwrap_or(0) {
                            let (no, v) = r.numbers::<f64>()?;
                            need(no, &v, 4)?;
                            let tag = v[0] as u64;
                            node_order.push(tag);
                            nodes.insert(tag, [v[1], v[2], v[3]]);
                        }
                    }
                    Some(_) => {
                        let (no, h) = r.numbers::<usize>()?;
                        need(no, &h, 2)?;
                        for _ in 0..h[0] {
                            let (no, b) = r.numbers::<usize>()?;
                            need(no, &b, 4)?;
                            let (parametric, count) = (b[2] != 0, b[3]);
                            let mut tags = Vec::with_capacity(count);
                            for _ in 0..count {
                                let (no, t) = r.numbers::<u64>()?;
                                need(no, &t, 1)?;
                                tags.push(t[0]);
                            }
                            for tag in tags {
                                let (no, v) = r.numbers::<f64>()?;
                                need(no, &v, if parametric { 4 } else { 3 })?;
                                node_order.push(tag);
                                nodes.insert(tag, [v[0], v[1], v[2]]);
                            }
                        }
                    }
                    None => return Err(r.err("$Nodes before $MeshFormat")),
                }
                r.expect("$EndNodes")?;
            }
            "Elements" => {
                match version {
                    Some(2) => {
                        let (_, n) = r.numbers::<u64>()?;
                        for _ in 0..n.first().copied().unwrap_or(0) {
                            let (no, v) = r.numbers::<u64>()?;
                            need(no, &v, 3)?;
                            let ntags = v[2] as usize;
                            need(no, &v, 3 + ntags)?;
                            let Some(family) = gmsh_family(v[1] as u32)? else {
                                continue;
                            };
                            let nodes = v[3 + ntags..].to_vec();
                            if nodes.len() != family.node_count() {
                                return Err(MeshError::Parse {
                                    line: no,
                                    msg: format!("{family:?} needs {} nodes, found {}", family.node_count(), nodes.len()),
                                });
                            }
                            let physical = if ntags > 0 { v[3] as u32 } else { 0 };
                            elements.push(RawElement { family, physical, nodes });
                        }
                    }
                    Some(_) => {
                        let (no, h) = r.numbers::<u64>()?;
                        need(no, &h, 2)?;
                        for _ in 0..h[0] {
                            let (no, b) = r.numbers::<u64>()?;
                            need(no, &b, 4)?;
                            let (dim, ent, ty, count) = (b[0] as u32, b[1] as u32, b[2] as u32, b[3]);
                            let family = gmsh_family(ty)?;
                            let physical = entity_phys.get(&(dim, ent)).copied().unwrap_or(0);
                            for _ in 0..count {
                                let (no, v) = r.numbers::<u64>()?;
                                if let Some(family) = family {
                                    if v.len() != family.node_count() + 1 {
                                        return Err(MeshError::Parse {
                                            line: no,
                                            msg: format!(
                                                "{family:?} needs {} nodes, found {}",
                                                family.node_count(),
                                                v.len().saturating_sub(1)
                                            ),
                                        });
                                    }
                                    elements.push(RawElement {
                                        family,
                                        physical,
                                        nodes: v[1..].to_vec(),
                                    });
                                }
                            }
                        }
                    }
                    None => return Err(r.err("$Elements before $MeshFormat")),
                }
                r.expect("$EndElements")?;
            }
            other => r.skip_section(other)?,
        }
    }
    build(names, nodes, node_order, elements)
}

fn build(
    names: BTreeMap<u32, String>,
    nodes: HashMap<u64, [f64; 3]>,
    node_order: Vec<u64>,
    elements: Vec<RawElement>,
) -> Result<Mesh, MeshError> {
    let mut family: Option<CellFamily> = None;
    for e in elements.iter().filter(|e| e.family.is_volume()) {
        match family {
            None => family = Some(e.family),
            Some(f) if f != e.family => return Err(MeshError::MixedFamilies(f, e.family)),
            _ => {}
        }
    }
    let family = family.ok_or(MeshError::NoCells)?;

    // keep only nodes used by volume cells, in file order
    let mut used: HashMap<u64, usize> = HashMap::new();
    for e in elements.iter().filter(|e| e.family.is_volume()) {
        for n in &e.nodes {
            if !nodes.contains_key(n) {
                return Err(MeshError::Parse {
                    line: 0,
                    msg: format!("element references undefined node {n}"),
                });
            }
            used.insert(*n, usize::MAX);
        }
    }
    let mut vertices = Vec::with_capacity(used.len());
    for tag in node_order {
        if let Some(slot) = used.get_mut(&tag) {
            if *slot == usize::MAX {
                *slot = vertices.len();
                vertices.push(nodes[&tag]);
            }
        }
    }
    let index = |n: &u64| -> Result<usize, MeshError> {
        used.get(n).copied().ok_or_else(|| MeshError::Parse {
            line: 0,
            msg: format!("facet references node {n} not used by any cell"),
        })
    };

    let mut cells = Vec::new();
    let mut facets = Vec::new();
    let mut tags = BTreeMap::new();
    let ff = family.facet_family().expect("volume");
    for e in &elements {
        let local: Vec<usize> = e.nodes.iter().map(index).collect::<Result<_, _>>()?;
        if e.family.is_volume() {
            cells.extend(permute(OrderingScheme::Gmsh, family, &local));
        } else if e.physical != 0 {
            if e.family != ff {
                return Err(MeshError::MixedFamilies(ff, e.family));
            }
            let name = names.get(&e.physical).cloned().unwrap_or_else(|| e.physical.to_string());
            tags.insert(name, e.physical);
            facets.push((permute(OrderingScheme::Gmsh, e.family, &local), e.physical));
        }
    }
    Mesh::from_parts(vertices, family, cells, facets, tags)
}

/// Serializes as msh 2.2 ASCII with facets carrying their physical tags.
pub fn write_msh_string(m: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n");
    if !m.tags.is_empty() {
        let _ = writeln!(s, "$PhysicalNames\n{}", m.tags.len());
        for (name, id) in &m.tags {
            let _ = writeln!(s, "2 {id} \"{name}\"");
        }
        s.push_str("$EndPhysicalNames\n");
    }
    let _ = writeln!(s, "$Nodes\n{}", m.vertex_count());
    for (i, v) in m.vertices.iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} {:?}", i + 1, v[0], v[1], v[2]);
    }
    s.push_str("$EndNodes\n");
    let _ = writeln!(s, "$Elements\n{}", m.facets.len() + m.cell_count());
    let ff = m.family.facet_family().expect("volume");
    let mut id = 1;
    for f in &m.facets {
        let nodes = unpermute(OrderingScheme::Gmsh, ff, &f.nodes);
        let _ = write!(s, "{id} {} 2 {} {}", gmsh_type(ff), f.tag, f.tag);
        for n in nodes {
            let _ = write!(s, " {}", n + 1);
        }
        s.push('\n');
        id += 1;
    }
    for c in m.cells() {
        let nodes = unpermute(OrderingScheme::Gmsh, m.family, c);
        let _ = write!(s, "{id} {} 2 0 1", gmsh_type(m.family));
        for n in nodes {
            let _ = write!(s, " {}", n + 1);
        }
        s.push('\n');
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

pub fn write_msh(path: impl AsRef<Path>, m: &Mesh) -> Result<(), MeshError> {
    let p = path.as_ref();
    std::fs::write(p, write_msh_string(m)).map_err(|source| MeshError::Io {
        path: p.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{beam, generate_box_hex};

    #[test]
    fn round_trip_all_families() {
        for fam in CellFamily::VOLUME {
            let m = beam(fam, [3, 1, 1]);
            let back = read_msh_str(&write_msh_string(&m)).unwrap();
            assert_eq!(back.vertices(), m.vertices());
            assert_eq!(back.cells, m.cells);
            assert_eq!(back.facets(), m.facets());
            assert_eq!(back.tags(), m.tags());
        }
    }

    #[test]
    fn gmsh_hex_corners_map_to_lexicographic_order() {
        let src = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n8\n\
            1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n5 0 0 1\n6 1 0 1\n7 1 1 1\n8 0 1 1\n$EndNodes\n\
            $Elements\n1\n1 5 2 0 1 1 2 3 4 5 6 7 8\n$EndElements\n";
        let m = read_msh_str(src).unwrap();
        assert_eq!(m.cell(0), &[0, 1, 3, 2, 4, 5, 7, 6]);
        assert!((m.volume().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn version_41_with_entities() {
        let src = "$MeshFormat\n4.1 0 8\n$EndMeshFormat\n\
            $PhysicalNames\n1\n2 5 \"base\"\n$EndPhysicalNames\n\
            $Entities\n0 0 1 1\n1 0 0 0 1 1 0 1 5 0\n1 0 0 0 1 1 1 0 1 1\n$EndEntities\n\
            $Nodes\n1 4 1 4\n3 1 0 4\n1\n2\n3\n4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n$EndNodes\n\
            $Elements\n2 2 1 2\n2 1 2 1\n1 1 3 2\n3 1 4 1\n2 1 2 3 4\n$EndElements\n";
        let m = read_msh_str(src).unwrap();
        assert_eq!(m.family(), CellFamily::P1Tet);
        assert_eq!(m.tag_id("base"), Some(5));
        assert_eq!(m.tagged_facets("base").count(), 1);
        assert!((m.area("base").unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn prism_is_rejected_by_type_id() {
        let src = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n6\n\
            1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n5 1 0 1\n6 0 1 1\n$EndNodes\n\
            $Elements\n1\n1 6 2 0 1 1 2 3 4 5 6\n$EndElements\n";
        let err = read_msh_str(src).unwrap_err();
        assert!(matches!(err, MeshError::UnsupportedElement(6)));
        assert!(err.to_string().contains('6'));
    }

    #[test]
    fn malformed_line_is_reported() {
        let m = generate_box_hex([1, 1, 1], [1.0, 1.0, 1.0]);
        let s = write_msh_string(&m).replace("2 1.0 0.0 0.0\n", "2 1.0 zero 0.0\n");
        match read_msh_str(&s) {
            Err(MeshError::Parse { line, msg }) => {
                assert!(line > 5);
                assert!(msg.contains("zero"));
            }
            other => panic!("{other:?}"),
        }
    }
}
