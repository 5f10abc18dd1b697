//! Reference elements, quadrature, geometric mapping and node orderings.
//!
//! Canonical node order for every family: corner vertices first, then one node
//! per edge (quadratic families), edges listed by [`CellFamily::edges`].
//! Simplices live on the unit simplex, tensor-product cells on `[-1, 1]^d`.
//!
//! | family  | corners                                    | edges (corner pairs)                                   |
//! |---------|--------------------------------------------|--------------------------------------------------------|
//! | tet     | (0,0,0) (1,0,0) (0,1,0) (0,0,1)            | 23 13 12 03 02 01                                      |
//! | hex     | lexicographic: node i at bits (x=i&1, y=i>>1&1, z=i>>2&1) | 01 02 04 13 15 23 26 37 45 46 57 67     |
//! | tri     | (0,0) (1,0) (0,1)                          | 12 02 01                                               |
//! | quad    | lexicographic                              | 01 02 13 23                                            |

mod geometry;
mod ordering;
mod quadrature;
mod shape;

pub use geometry::{geometric_map, surface_map, MappedPoint};
#[allow(unused_imports)]
pub(crate) use geometry::{det3, inv3};
pub use ordering::{permute, permutation, unpermute, OrderingScheme};
pub use quadrature::{default_degree, quadrature, QuadratureRule, SUPPORTED_DEGREES};
pub use shape::{ReferenceElement, Tabulation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellFamily {
    #[serde(rename = "p1")]
    P1Tet,
    #[serde(rename = "p2")]
    P2Tet,
    #[serde(rename = "q1")]
    Q1Hex,
    /// 20-node serendipity hexahedron.
    #[serde(rename = "q2")]
    Q2Hex,
    Tri3,
    Tri6,
    Quad4,
    /// 8-node serendipity quadrilateral.
    Quad8,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("quadrature degree {degree} unsupported for {family:?}; supported range is 1..=4")]
    UnsupportedDegree { family: CellFamily, degree: u32 },
    #[error("inverted element {element:?}: det J = {det:e}")]
    InvertedElement { element: Option<usize>, det: f64 },
    #[error("node list length {got} does not match {family:?} ({expected} nodes)")]
    NodeCount {
        family: CellFamily,
        expected: usize,
        got: usize,
    },
}

impl ElementError {
    pub fn for_element(self, id: usize) -> Self {
        match self {
            ElementError::InvertedElement { det, .. } => ElementError::InvertedElement {
                element: Some(id),
                det,
            },
            other => other,
        }
    }
}

const TET_EDGES: [[usize; 2]; 6] = [[2, 3], [1, 3], [1, 2], [0, 3], [0, 2], [0, 1]];
const HEX_EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [0, 2],
    [0, 4],
    [1, 3],
    [1, 5],
    [2, 3],
    [2, 6],
    [3, 7],
    [4, 5],
    [4, 6],
    [5, 7],
    [6, 7],
];
const TRI_EDGES: [[usize; 2]; 3] = [[1, 2], [0, 2], [0, 1]];
const QUAD_EDGES: [[usize; 2]; 4] = [[0, 1], [0, 2], [1, 3], [2, 3]];

const TET_FACES: [&[usize]; 4] = [&[1, 2, 3], &[0, 2, 3], &[0, 1, 3], &[0, 1, 2]];
const HEX_FACES: [&[usize]; 6] = [
    &[0, 2, 4, 6],
    &[1, 3, 5, 7],
    &[0, 1, 4, 5],
    &[2, 3, 6, 7],
    &[0, 1, 2, 3],
    &[4, 5, 6, 7],
];

impl CellFamily {
    pub const VOLUME: [CellFamily; 4] = [
        CellFamily::P1Tet,
        CellFamily::P2Tet,
        CellFamily::Q1Hex,
        CellFamily::Q2Hex,
    ];

    pub const ALL: [CellFamily; 8] = [
        CellFamily::P1Tet,
        CellFamily::P2Tet,
        CellFamily::Q1Hex,
        CellFamily::Q2Hex,
        CellFamily::Tri3,
        CellFamily::Tri6,
        CellFamily::Quad4,
        CellFamily::Quad8,
    ];

    pub fn node_count(self) -> usize {
        match self {
            CellFamily::P1Tet => 4,
            CellFamily::P2Tet => 10,
            CellFamily::Q1Hex => 8,
            CellFamily::Q2Hex => 20,
            CellFamily::Tri3 => 3,
            CellFamily::Tri6 => 6,
            CellFamily::Quad4 => 4,
            CellFamily::Quad8 => 8,
        }
    }

    pub fn corner_count(self) -> usize {
        self.linear().node_count()
    }

    pub fn dim(self) -> usize {
        match self {
            CellFamily::P1Tet | CellFamily::P2Tet | CellFamily::Q1Hex | CellFamily::Q2Hex => 3,
            _ => 2,
        }
    }

    pub fn is_volume(self) -> bool {
        self.dim() == 3
    }

    pub fn is_simplex(self) -> bool {
        matches!(
            self,
            CellFamily::P1Tet | CellFamily::P2Tet | CellFamily::Tri3 | CellFamily::Tri6
        )
    }

    pub fn is_quadratic(self) -> bool {
        self.node_count() != self.corner_count()
    }

    /// The linear family with the same corners.
    pub fn linear(self) -> CellFamily {
        match self {
            CellFamily::P2Tet => CellFamily::P1Tet,
            CellFamily::Q2Hex => CellFamily::Q1Hex,
            CellFamily::Tri6 => CellFamily::Tri3,
            CellFamily::Quad8 => CellFamily::Quad4,
            f => f,
        }
    }

    /// The quadratic family with the same corners.
    pub fn quadratic(self) -> CellFamily {
        match self {
            CellFamily::P1Tet => CellFamily::P2Tet,
            CellFamily::Q1Hex => CellFamily::Q2Hex,
            CellFamily::Tri3 => CellFamily::Tri6,
            CellFamily::Quad4 => CellFamily::Quad8,
            f => f,
        }
    }

    /// Corner pairs of each edge, in canonical edge order.
    pub fn edges(self) -> &'static [[usize; 2]] {
        match self.linear() {
            CellFamily::P1Tet => &TET_EDGES,
            CellFamily::Q1Hex => &HEX_EDGES,
            CellFamily::Tri3 => &TRI_EDGES,
            CellFamily::Quad4 => &QUAD_EDGES,
            _ => unreachable!(),
        }
    }

    /// Family of the boundary facets of a volume family.
    pub fn facet_family(self) -> Option<CellFamily> {
        Some(match self {
            CellFamily::P1Tet => CellFamily::Tri3,
            CellFamily::P2Tet => CellFamily::Tri6,
            CellFamily::Q1Hex => CellFamily::Quad4,
            CellFamily::Q2Hex => CellFamily::Quad8,
            _ => return None,
        })
    }

    pub fn facet_count(self) -> usize {
        match self.linear() {
            CellFamily::P1Tet => 4,
            CellFamily::Q1Hex => 6,
            _ => 0,
        }
    }

    /// Local node indices of facet `f`, in the facet family's canonical order.
    pub fn facet_nodes(self, f: usize) -> Vec<usize> {
        let corners: &[usize] = match self.linear() {
            CellFamily::P1Tet => TET_FACES[f],
            CellFamily::Q1Hex => HEX_FACES[f],
            _ => return Vec::new(),
        };
        let mut out = corners.to_vec();
        if self.is_quadratic() {
            let ff = self.facet_family().expect("volume family");
            let nv = self.corner_count();
            for e in ff.edges() {
                let (a, b) = (corners[e[0]], corners[e[1]]);
                let k = self
                    .edges()
                    .iter()
                    .position(|c| (c[0] == a && c[1] == b) || (c[0] == b && c[1] == a))
                    .expect("facet edge is a cell edge");
                out.push(nv + k);
            }
        }
        out
    }

    /// Reference coordinates of the canonical nodes (2D families use z = 0).
    pub fn reference_nodes(self) -> Vec<[f64; 3]> {
        let corners: Vec<[f64; 3]> = match self.linear() {
            CellFamily::P1Tet => vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ],
            CellFamily::Tri3 => vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            CellFamily::Q1Hex => (0..8)
                .map(|i| {
                    [
                        if i & 1 == 1 { 1.0 } else { -1.0 },
                        if i & 2 == 2 { 1.0 } else { -1.0 },
                        if i & 4 == 4 { 1.0 } else { -1.0 },
                    ]
                })
                .collect(),
            CellFamily::Quad4 => (0..4)
                .map(|i| {
                    [
                        if i & 1 == 1 { 1.0 } else { -1.0 },
                        if i & 2 == 2 { 1.0 } else { -1.0 },
                        0.0,
                    ]
                })
                .collect(),
            _ => unreachable!(),
        };
        let mut out = corners.clone();
        if self.is_quadratic() {
            for e in self.edges() {
                let (a, b) = (corners[e[0]], corners[e[1]]);
                out.push([
                    0.5 * (a[0] + b[0]),
                    0.5 * (a[1] + b[1]),
                    0.5 * (a[2] + b[2]),
                ]);
            }
        }
        out
    }

    /// Measure of the reference domain.
    pub fn reference_measure(self) -> f64 {
        match self.linear() {
            CellFamily::P1Tet => 1.0 / 6.0,
            CellFamily::Q1Hex => 8.0,
            CellFamily::Tri3 => 0.5,
            CellFamily::Quad4 => 4.0,
            _ => unreachable!(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellFamily::P1Tet => "p1",
            CellFamily::P2Tet => "p2",
            CellFamily::Q1Hex => "q1",
            CellFamily::Q2Hex => "q2",
            CellFamily::Tri3 => "tri3",
            CellFamily::Tri6 => "tri6",
            CellFamily::Quad4 => "quad4",
            CellFamily::Quad8 => "quad8",
        }
    }

    pub fn from_name(s: &str) -> Option<CellFamily> {
        CellFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for CellFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name().to_uppercase())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facet_nodes_lie_on_one_reference_face() {
        for fam in CellFamily::VOLUME {
            let nodes = fam.reference_nodes();
            let ff = fam.facet_family().unwrap();
            for f in 0..fam.facet_count() {
                let local = fam.facet_nodes(f);
                assert_eq!(local.len(), ff.node_count());
                // edge nodes are midpoints of the facet's own corner pairs
                for (k, e) in ff.edges().iter().enumerate().take(if ff.is_quadratic() { 8 } else { 0 }) {
                    let m = nodes[local[ff.corner_count() + k]];
                    let (a, b) = (nodes[local[e[0]]], nodes[local[e[1]]]);
                    for d in 0..3 {
                        assert_eq!(m[d], 0.5 * (a[d] + b[d]));
                    }
                }
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for f in CellFamily::ALL {
            assert_eq!(CellFamily::from_name(f.name()), Some(f));
        }
    }
}
