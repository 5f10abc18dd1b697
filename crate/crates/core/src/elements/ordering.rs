use super::CellFamily;
use serde::{Deserialize, Serialize};

/// Node numbering conventions accepted on import and used on export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingScheme {
    Canonical,
    Gmsh,
    LegacyVtk,
}

impl OrderingScheme {
    /// Corner map (canonical vertex `i` is scheme vertex `v[i]`) and the
    /// scheme's edge list in its own vertex numbering.
    fn layout(self, family: CellFamily) -> (&'static [usize], &'static [[usize; 2]]) {
        use CellFamily::*;
        use OrderingScheme::*;
        match (self, family.linear()) {
            (Canonical, _) => unreachable!(),
            (Gmsh, P1Tet) => (&[0, 1, 2, 3], &[[0, 1], [1, 2], [0, 2], [0, 3], [2, 3], [1, 3]]),
            (Gmsh, Q1Hex) => (
                &[0, 1, 3, 2, 4, 5, 7, 6],
                &[
                    [0, 1],
                    [0, 3],
                    [0, 4],
                    [1, 2],
                    [1, 5],
                    [2, 3],
                    [2, 6],
                    [3, 7],
                    [4, 5],
                    [4, 7],
                    [5, 6],
                    [6, 7],
                ],
            ),
            (Gmsh, Tri3) | (LegacyVtk, Tri3) => (&[0, 1, 2], &[[0, 1], [1, 2], [0, 2]]),
            (Gmsh, Quad4) | (LegacyVtk, Quad4) => (&[0, 1, 3, 2], &[[0, 1], [1, 2], [2, 3], [0, 3]]),
            (LegacyVtk, P1Tet) => (&[0, 1, 2, 3], &[[0, 1], [1, 2], [0, 2], [0, 3], [1, 3], [2, 3]]),
            // lexicographic in the right-handed frame (x, -z, y) of the VTK cell
            (LegacyVtk, Q1Hex) => (
                &[4, 5, 0, 1, 7, 6, 3, 2],
                &[
                    [0, 1],
                    [1, 2],
                    [2, 3],
                    [0, 3],
                    [4, 5],
                    [5, 6],
                    [6, 7],
                    [4, 7],
                    [0, 4],
                    [1, 5],
                    [2, 6],
                    [3, 7],
                ],
            ),
            _ => unreachable!(),
        }
    }
}

/// Index map with `canonical[i] = scheme_ordered[map[i]]`.
pub fn permutation(scheme: OrderingScheme, family: CellFamily) -> Vec<usize> {
    let n = family.node_count();
    if scheme == OrderingScheme::Canonical {
        return (0..n).collect();
    }
    let (vmap, scheme_edges) = scheme.layout(family);
    let nv = family.corner_count();
    let mut map = vmap.to_vec();
    if family.is_quadratic() {
        for e in family.edges() {
            let (a, b) = (vmap[e[0]], vmap[e[1]]);
            let j = scheme_edges
                .iter()
                .position(|s| (s[0] == a && s[1] == b) || (s[0] == b && s[1] == a))
                .expect("edge tables describe the same cell");
            map.push(nv + j);
        }
    }
    map
}

/// Reorder one cell's nodes from `scheme` into canonical order.
pub fn permute<T: Copy>(scheme: OrderingScheme, family: CellFamily, nodes: &[T]) -> Vec<T> {
    permutation(scheme, family).iter().map(|&j| nodes[j]).collect()
}

/// Reorder one cell's canonical nodes into `scheme` order.
pub fn unpermute<T: Copy>(scheme: OrderingScheme, family: CellFamily, nodes: &[T]) -> Vec<T> {
    let map = permutation(scheme, family);
    let mut out = nodes.to_vec();
    for (i, &j) in map.iter().enumerate() {
        out[j] = nodes[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{geometric_map, ReferenceElement};

    const SCHEMES: [OrderingScheme; 3] = [OrderingScheme::Canonical, OrderingScheme::Gmsh, OrderingScheme::LegacyVtk];

    #[test]
    fn maps_are_permutations_and_round_trip() {
        for s in SCHEMES {
            for f in CellFamily::ALL {
                let mut m = permutation(s, f);
                let ids: Vec<usize> = (0..f.node_count()).collect();
                assert_eq!(unpermute(s, f, &permute(s, f, &ids)), ids);
                assert_eq!(permute(s, f, &unpermute(s, f, &ids)), ids);
                m.sort_unstable();
                assert_eq!(m, ids, "{s:?} {f:?}");
            }
        }
    }

    #[test]
    fn legacy_vtk_hex_corner_map() {
        assert_eq!(
            permutation(OrderingScheme::LegacyVtk, CellFamily::Q1Hex),
            vec![4, 5, 0, 1, 7, 6, 3, 2]
        );
    }

    fn vtk_hex_corners() -> Vec<[f64; 3]> {
        vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ]
    }

    fn midpoints(corners: &[[f64; 3]], edges: &[[usize; 2]]) -> Vec<[f64; 3]> {
        let mut out = corners.to_vec();
        for e in edges {
            let (a, b) = (corners[e[0]], corners[e[1]]);
            out.push(std::array::from_fn(|k| 0.5 * (a[k] + b[k])));
        }
        out
    }

    #[test]
    fn imported_cells_are_positively_oriented_with_midpoints_in_place() {
        // gmsh and VTK both number hex corners counterclockwise, bottom then top
        for s in [OrderingScheme::Gmsh, OrderingScheme::LegacyVtk] {
            for fam in CellFamily::VOLUME {
                let corners: Vec<[f64; 3]> = if fam.is_simplex() {
                    vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
                } else {
                    vtk_hex_corners()
                };
                let nodes = if fam.is_quadratic() {
                    midpoints(&corners, s.layout(fam).1)
                } else {
                    corners
                };
                let canon = permute(s, fam, &nodes);
                for (k, e) in fam.edges().iter().enumerate().take(if fam.is_quadratic() { 12 } else { 0 }) {
                    let (a, b, m) = (canon[e[0]], canon[e[1]], canon[fam.corner_count() + k]);
                    for d in 0..3 {
                        assert_eq!(m[d], 0.5 * (a[d] + b[d]), "{s:?} {fam:?} edge {k}");
                    }
                }
                let el = ReferenceElement::new(fam);
                for xi in [[0.1, 0.2, 0.3], [0.0, 0.0, 0.0]] {
                    let mp = geometric_map(&canon, &el.shape_gradients(&xi)).unwrap();
                    assert!(mp.det > 0.0, "{s:?} {fam:?}");
                }
            }
        }
    }
}
