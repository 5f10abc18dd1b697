use std::collections::{BTreeMap, HashMap};

use super::Mesh;
use crate::elements::{det3, CellFamily};

/// Beam extent in m.
pub const BEAM_DIMS: [f64; 3] = [80.0, 15.0, 15.0];

fn beam_tags() -> BTreeMap<String, u32> {
    [("clamp", 1), ("load", 2), ("free", 3)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

/// Structured Q1 grid on `[0, dims]` with `counts` cells per axis. Boundary
/// facets are tagged `clamp` (x = 0), `load` (x = dims[0]) and `free`.
pub fn generate_box_hex(counts: [usize; 3], dims: [f64; 3]) -> Mesh {
    let [nx, ny, nz] = counts;
    assert!(nx >= 1 && ny >= 1 && nz >= 1, "cell counts must be at least 1");
    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([
                    dims[0] * i as f64 / nx as f64,
                    dims[1] * j as f64 / ny as f64,
                    dims[2] * k as f64 / nz as f64,
                ]);
            }
        }
    }
    let mut cells = Vec::with_capacity(8 * nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for b in 0..8 {
                    cells.push(id(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1)));
                }
            }
        }
    }
    let mesh = Mesh::from_parts(vertices, CellFamily::Q1Hex, cells, vec![], beam_tags()).expect("valid grid");
    let facets = mesh
        .boundary_faces()
        .into_iter()
        .map(|(c, f)| {
            let nodes = mesh.cell_facet_nodes(c, f);
            let x = nodes.iter().map(|&n| mesh.vertices[n][0]);
            let tag = if x.clone().all(|v| v == 0.0) {
                1
            } else if x.clone().all(|v| v == dims[0]) {
                2
            } else {
                3
            };
            (nodes, tag)
        })
        .collect();
    Mesh::from_parts(mesh.vertices, mesh.family, mesh.cells, facets, mesh.tags).expect("valid grid")
}

/// 80 x 15 x 15 beam, Q1.
pub fn generate_beam_hex(nx: usize, ny: usize, nz: usize) -> Mesh {
    generate_box_hex([nx, ny, nz], BEAM_DIMS)
}

/// Beam mesh of any volume family built from the same structured grid.
pub fn beam(family: CellFamily, counts: [usize; 3]) -> Mesh {
    generate_box(family, counts, BEAM_DIMS)
}

/// Box mesh of any volume family: Q1 grid, Kuhn split for tetrahedra, edge
/// midpoints for quadratic families.
pub fn generate_box(family: CellFamily, counts: [usize; 3], dims: [f64; 3]) -> Mesh {
    family_from_hex(generate_box_hex(counts, dims), family)
}

fn family_from_hex(hex: Mesh, family: CellFamily) -> Mesh {
    match family {
        CellFamily::Q1Hex => hex,
        CellFamily::Q2Hex => promote_quadratic(&hex),
        CellFamily::P1Tet => hex_to_tet(&hex),
        CellFamily::P2Tet => promote_quadratic(&hex_to_tet(&hex)),
        f => panic!("{f:?} is not a volume family"),
    }
}

fn signed_volume(x: [[f64; 3]; 4]) -> f64 {
    let m = std::array::from_fn(|i| std::array::from_fn(|j| x[j + 1][i] - x[0][i]));
    det3(&m)
}

/// Six tetrahedra per hexahedron along the 0-7 diagonal (Kuhn split). Every
/// quad face is cut along the diagonal through its lowest and highest corner,
/// so neighbouring cells of a structured grid agree on shared faces.
pub fn hex_to_tet(m: &Mesh) -> Mesh {
    assert_eq!(m.family, CellFamily::Q1Hex, "hex_to_tet expects a Q1 mesh");
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(24 * m.cell_count());
    for c in 0..m.cell_count() {
        let h = m.cell(c);
        for p in PERMS {
            let a = 1 << p[0];
            let b = a | (1 << p[1]);
            let mut t = [h[0], h[a], h[b], h[7]];
            if signed_volume(t.map(|n| m.vertices[n])) < 0.0 {
                t.swap(1, 2);
            }
            cells.extend_from_slice(&t);
        }
    }
    let tet = Mesh::from_parts(m.vertices.clone(), CellFamily::P1Tet, cells, vec![], m.tags.clone()).expect("split");
    inherit_tags(m, tet, |c| c / 6)
}

/// Tags each boundary face of `child` with the tag of the parent facet that
/// contains its corners.
fn inherit_tags(parent: &Mesh, child: Mesh, parent_of: impl Fn(usize) -> usize) -> Mesh {
    let mut by_cell: HashMap<usize, Vec<&super::Facet>> = HashMap::new();
    for f in &parent.facets {
        by_cell.entry(f.cell).or_default().push(f);
    }
    let pc = parent.family.facet_family().expect("volume").corner_count();
    let mut facets = Vec::new();
    for (c, l) in child.boundary_faces() {
        let nodes = child.cell_facet_nodes(c, l);
        let corners = &nodes[..child.family.facet_family().expect("volume").corner_count()];
        if let Some(pf) = by_cell
            .get(&parent_of(c))
            .and_then(|fs| fs.iter().find(|f| corners.iter().all(|n| f.nodes[..pc].contains(n))))
        {
            facets.push((nodes, pf.tag));
        }
    }
    Mesh::from_parts(child.vertices, child.family, child.cells, facets, child.tags).expect("child faces")
}

/// Adds one node at the midpoint of every edge: P1 -> P2, Q1 -> 20-node Q2.
pub fn promote_quadratic(m: &Mesh) -> Mesh {
    assert!(!m.family.is_quadratic(), "mesh is already quadratic");
    let fam = m.family.quadratic();
    let mut vertices = m.vertices.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut cells = Vec::with_capacity(m.cell_count() * fam.node_count());
    for c in 0..m.cell_count() {
        let conn = m.cell(c);
        cells.extend_from_slice(conn);
        for e in fam.edges() {
            let (a, b) = (conn[e[0]], conn[e[1]]);
            let key = (a.min(b), a.max(b));
            let id = *mid.entry(key).or_insert_with(|| {
                let (p, q) = (m.vertices[a], m.vertices[b]);
                vertices.push(std::array::from_fn(|d| 0.5 * (p[d] + q[d])));
                vertices.len() - 1
            });
            cells.push(id);
        }
    }
    let facets = m.facets.iter().map(|f| (f.nodes.clone(), f.tag)).collect();
    Mesh::from_parts(vertices, fam, cells, facets, m.tags.clone()).expect("promotion keeps faces")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::ReferenceElement;

    #[test]
    fn beam_dof_counts() {
        let counts = [12, 2, 2];
        let dofs: Vec<usize> = CellFamily::VOLUME.iter().map(|&f| beam(f, counts).dof_count()).collect();
        assert_eq!(dofs, vec![351, 1875, 351, 1143]);
    }

    #[test]
    fn split_preserves_volume_and_orientation() {
        let hex = generate_box_hex([1, 1, 1], [1.0, 2.0, 3.0]);
        let tet = hex_to_tet(&hex);
        assert_eq!(tet.cell_count(), 6);
        tet.validate().unwrap();
        assert!((tet.volume().unwrap() - 6.0).abs() < 1e-12 * 6.0);
        assert_eq!(tet.facets().len(), 12);
    }

    #[test]
    fn split_is_conforming() {
        // a conforming tet mesh of a box has exactly the box surface as boundary
        let tet = hex_to_tet(&generate_box_hex([3, 2, 2], [3.0, 2.0, 2.0]));
        let quads = 2 * (3 * 2 + 3 * 2 + 2 * 2);
        assert_eq!(tet.boundary_faces().len(), 2 * quads);
    }

    #[test]
    fn promoted_nodes_are_kronecker() {
        let m = promote_quadratic(&hex_to_tet(&generate_box_hex([2, 1, 1], [2.0, 1.0, 1.0])));
        let el = ReferenceElement::new(m.family());
        // the isoparametric map sends every reference node to its physical node
        for c in 0..m.cell_count() {
            let x = m.cell_coords(c);
            for (j, xi) in m.family().reference_nodes().iter().enumerate() {
                let n = el.shape_values(xi);
                for d in 0..3 {
                    let p: f64 = n.iter().zip(&x).map(|(a, b)| a * b[d]).sum();
                    assert!((p - x[j][d]).abs() < 1e-14);
                }
            }
        }
        m.validate().unwrap();
    }

    #[test]
    fn beam_measures() {
        for fam in CellFamily::VOLUME {
            let m = beam(fam, [12, 2, 2]);
            let v = m.volume().unwrap();
            assert!((v - 18000.0).abs() <= 1e-9 * 18000.0, "{fam:?} {v}");
            let a = m.area("load").unwrap();
            assert!((a - 225.0).abs() <= 1e-9 * 225.0, "{fam:?} {a}");
        }
    }
}
