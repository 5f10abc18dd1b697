//! Meshes: structured generation, gmsh import, VTK output.
//!
//! Cells are stored flat in canonical node order (see [`crate::elements`]).
//! Boundary facets remember the cell and local face they belong to, so
//! Neumann integrals can be folded into the cell loop.

mod generate;
mod liver;
mod msh;
mod source;
mod vtu;

pub use generate::{beam, generate_box, generate_box_hex, generate_beam_hex, hex_to_tet, promote_quadratic, BEAM_DIMS};
pub use liver::liver_placeholder;
pub use msh::{read_msh, read_msh_str, write_msh, write_msh_string};
pub use source::{read_mesh_file, MeshSource};
pub use vtu::{read_vtu, write_vtu, write_vtu_string};

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::elements::{geometric_map, quadrature, surface_map, CellFamily, ElementError, ReferenceElement};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported element type {0}")]
    UnsupportedElement(u32),
    #[error("mesh mixes volume families {0} and {1}")]
    MixedFamilies(CellFamily, CellFamily),
    #[error("mesh has no volume cells")]
    NoCells,
    #[error("cell {cell} references node {node} but the mesh has {count} vertices")]
    IndexOutOfRange { cell: usize, node: usize, count: usize },
    #[error("facet {facet} with nodes {nodes:?} is not a boundary face of any cell")]
    FacetNotOnBoundary { facet: usize, nodes: Vec<usize> },
    #[error(transparent)]
    Element(#[from] ElementError),
}

/// A tagged boundary facet, with nodes in the facet family's canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub cell: usize,
    pub local: usize,
    pub nodes: Vec<usize>,
    pub tag: u32,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<[f64; 3]>,
    family: CellFamily,
    cells: Vec<usize>,
    facets: Vec<Facet>,
    tags: BTreeMap<String, u32>,
}

/// Summary printed by `mesh-info`.
#[derive(Clone, Debug, Serialize)]
pub struct MeshInfo {
    pub family: String,
    pub vertices: usize,
    pub cells: usize,
    pub dofs: usize,
    pub boundary_facets: usize,
    pub tags: BTreeMap<String, usize>,
    pub volume: f64,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
}

fn face_key(nodes: &[usize], corners: usize) -> Vec<usize> {
    let mut k = nodes[..corners].to_vec();
    k.sort_unstable();
    k
}

impl Mesh {
    /// Assembles a mesh from raw parts. `facets` are (node list, tag) pairs in
    /// any rotation; each is matched against the boundary faces of the cells.
    pub fn from_parts(
        vertices: Vec<[f64; 3]>,
        family: CellFamily,
        cells: Vec<usize>,
        facets: Vec<(Vec<usize>, u32)>,
        tags: BTreeMap<String, u32>,
    ) -> Result<Mesh, MeshError> {
        let npc = family.node_count();
        if cells.is_empty() {
            return Err(MeshError::NoCells);
        }
        if cells.len() % npc != 0 {
            return Err(ElementError::NodeCount {
                family,
                expected: npc,
                got: cells.len() % npc,
            }
            .into());
        }
        for (c, conn) in cells.chunks(npc).enumerate() {
            if let Some(&node) = conn.iter().find(|&&n| n >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    cell: c,
                    node,
                    count: vertices.len(),
                });
            }
        }
        let mut mesh = Mesh {
            vertices,
            family,
            cells,
            facets: Vec::new(),
            tags,
        };
        let faces = mesh.face_map();
        let fc = family.facet_family().expect("volume family").corner_count();
        for (i, (nodes, tag)) in facets.into_iter().enumerate() {
            let key = face_key(&nodes, fc.min(nodes.len()));
            match faces.get(&key) {
                Some(&(cell, local, 1)) => {
                    let nodes = mesh.cell_facet_nodes(cell, local);
                    mesh.facets.push(Facet { cell, local, nodes, tag });
                }
                _ => return Err(MeshError::FacetNotOnBoundary { facet: i, nodes }),
            }
        }
        Ok(mesh)
    }

    /// Sorted face corners -> (cell, local face, number of cells sharing it).
    fn face_map(&self) -> HashMap<Vec<usize>, (usize, usize, usize)> {
        let fc = self.family.facet_family().expect("volume family").corner_count();
        let mut faces: HashMap<Vec<usize>, (usize, usize, usize)> = HashMap::new();
        for c in 0..self.cell_count() {
            for f in 0..self.family.facet_count() {
                let nodes = self.cell_facet_nodes(c, f);
                faces
                    .entry(face_key(&nodes, fc))
                    .and_modify(|e| e.2 += 1)
                    .or_insert((c, f, 1));
            }
        }
        faces
    }

    fn cell_facet_nodes(&self, cell: usize, local: usize) -> Vec<usize> {
        let conn = self.cell(cell);
        self.family.facet_nodes(local).into_iter().map(|k| conn[k]).collect()
    }

    /// Every face that belongs to exactly one cell, as (cell, local face),
    /// in cell order.
    pub fn boundary_faces(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .face_map()
            .into_values()
            .filter(|e| e.2 == 1)
            .map(|e| (e.0, e.1))
            .collect();
        out.sort_unstable();
        out
    }

    /// Boundary faces split into triangles (corner nodes only), outward oriented.
    pub fn surface_triangles(&self) -> Vec<[usize; 3]> {
        let mut tris = Vec::new();
        let centroid = |c: usize| -> [f64; 3] {
            let conn = &self.cell(c)[..self.family.corner_count()];
            let mut m = [0.0; 3];
            for &n in conn {
                for d in 0..3 {
                    m[d] += self.vertices[n][d] / conn.len() as f64;
                }
            }
            m
        };
        for (c, f) in self.boundary_faces() {
            let nodes = self.cell_facet_nodes(c, f);
            let split: Vec<[usize; 3]> = if self.family.is_simplex() {
                vec![[nodes[0], nodes[1], nodes[2]]]
            } else {
                // quad corners are lexicographic: 0 1 / 2 3
                vec![[nodes[0], nodes[1], nodes[3]], [nodes[0], nodes[3], nodes[2]]]
            };
            let cc = centroid(c);
            for mut t in split {
                let [a, b, d] = t.map(|n| self.vertices[n]);
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
                let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                let out = [a[0] - cc[0], a[1] - cc[1], a[2] - cc[2]];
                if n[0] * out[0] + n[1] * out[1] + n[2] * out[2] < 0.0 {
                    t.swap(1, 2);
                }
                tris.push(t);
            }
        }
        tris
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn family(&self) -> CellFamily {
        self.family
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() / self.family.node_count()
    }

    pub fn dof_count(&self) -> usize {
        3 * self.vertices.len()
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let n = self.family.node_count();
        &self.cells[c * n..(c + 1) * n]
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.cells.chunks(self.family.node_count())
    }

    pub fn cell_coords(&self, c: usize) -> Vec<[f64; 3]> {
        self.cell(c).iter().map(|&n| self.vertices[n]).collect()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn tags(&self) -> &BTreeMap<String, u32> {
        &self.tags
    }

    pub fn tag_id(&self, name: &str) -> Option<u32> {
        self.tags.get(name).copied()
    }

    pub fn tag_name(&self, id: u32) -> Option<&str> {
        self.tags.iter().find(|(_, &v)| v == id).map(|(k, _)| k.as_str())
    }

    /// Facets carrying tag `name`.
    pub fn tagged_facets<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Facet> + 'a {
        let id = self.tag_id(name);
        self.facets.iter().filter(move |f| Some(f.tag) == id)
    }

    /// Sorted, deduplicated nodes of the facets tagged `name`.
    pub fn tagged_nodes(&self, name: &str) -> Vec<usize> {
        let mut v: Vec<usize> = self.tagged_facets(name).flat_map(|f| f.nodes.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sorted nodes on any boundary face.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_faces()
            .into_iter()
            .flat_map(|(c, f)| self.cell_facet_nodes(c, f))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Checks that every cell maps with positive Jacobian at the quadrature
    /// points of the family's default rule and at its corners.
    pub fn validate(&self) -> Result<(), MeshError> {
        let el = ReferenceElement::new(self.family);
        let q = quadrature(self.family, crate::elements::default_degree(self.family))?;
        let mut pts = q.points.clone();
        pts.extend(self.family.linear().reference_nodes());
        let grads: Vec<_> = pts.iter().map(|p| el.shape_gradients(p)).collect();
        for c in 0..self.cell_count() {
            let x = self.cell_coords(c);
            for g in &grads {
                geometric_map(&x, g).map_err(|e| e.for_element(c))?;
            }
        }
        Ok(())
    }

    /// `int_Omega 1 dX` with the family's default rule.
    pub fn volume(&self) -> Result<f64, MeshError> {
        let el = ReferenceElement::new(self.family);
        let q = quadrature(self.family, crate::elements::default_degree(self.family))?;
        let tab = el.tabulate(&q);
        let mut v = 0.0;
        for c in 0..self.cell_count() {
            let x = self.cell_coords(c);
            for (g, w) in tab.gradients.iter().zip(&q.weights) {
                v += w * geometric_map(&x, g).map_err(|e| e.for_element(c))?.det;
            }
        }
        Ok(v)
    }

    /// Area of the facets tagged `name`.
    pub fn area(&self, name: &str) -> Result<f64, MeshError> {
        let ff = self.family.facet_family().expect("volume family");
        let el = ReferenceElement::new(ff);
        let q = quadrature(ff, crate::elements::default_degree(self.family))?;
        let tab = el.tabulate(&q);
        let mut a = 0.0;
        for f in self.tagged_facets(name) {
            let x: Vec<[f64; 3]> = f.nodes.iter().map(|&n| self.vertices[n]).collect();
            for (g, w) in tab.gradients.iter().zip(&q.weights) {
                a += w * surface_map(&x, g).0;
            }
        }
        Ok(a)
    }

    pub fn info(&self) -> Result<MeshInfo, MeshError> {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let tags = self
            .tags
            .iter()
            .map(|(k, &id)| (k.clone(), self.facets.iter().filter(|f| f.tag == id).count()))
            .collect();
        Ok(MeshInfo {
            family: self.family.name().to_string(),
            vertices: self.vertex_count(),
            cells: self.cell_count(),
            dofs: self.dof_count(),
            boundary_facets: self.boundary_faces().len(),
            tags,
            volume: self.volume()?,
            bbox_min: lo,
            bbox_max: hi,
        })
    }

    /// Same mesh with vertex positions moved by `u` (3 per node).
    pub fn displaced(&self, u: &[f64]) -> Mesh {
        let mut m = self.clone();
        for (i, v) in m.vertices.iter_mut().enumerate() {
            for d in 0..3 {
                v[d] += u[3 * i + d];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_hex_has_six_boundary_faces() {
        let m = generate_box_hex([1, 1, 1], [1.0, 1.0, 1.0]);
        assert_eq!(m.vertex_count(), 8);
        assert_eq!(m.cell_count(), 1);
        assert_eq!(m.boundary_faces().len(), 6);
        assert_eq!(m.facets().len(), 6);
        assert_eq!(m.surface_triangles().len(), 12);
    }

    #[test]
    fn facet_must_lie_on_boundary() {
        let m = generate_box_hex([2, 1, 1], [2.0, 1.0, 1.0]);
        // the interior face x = 1
        let interior: Vec<usize> = (0..m.vertex_count())
            .filter(|&n| m.vertices()[n][0] == 1.0)
            .collect();
        let err = Mesh::from_parts(
            m.vertices().to_vec(),
            m.family(),
            m.cells().flatten().copied().collect(),
            vec![(interior, 1)],
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::FacetNotOnBoundary { .. }));
    }
}
