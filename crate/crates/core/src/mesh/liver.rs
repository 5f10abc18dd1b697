use std::collections::BTreeMap;

use super::generate::generate_box_hex;
use super::Mesh;
use crate::elements::{det3, CellFamily};

/// The special hex split through its center instead of along its diagonal.
const CENTER_SPLIT: [usize; 3] = [2, 2, 3];

fn shape(p: [f64; 3]) -> [f64; 3] {
    let [u, v, w] = p;
    let pi = std::f64::consts::PI;
    [
        0.22 * u,
        0.16 * (v - 0.5) * (1.0 - 0.4 * u),
        0.10 * w * (1.0 - 0.55 * u) * (0.8 + 0.2 * (pi * v).sin()) + 0.01 * (pi * u).sin(),
    ]
}

fn oriented(t: [usize; 4], x: &[[f64; 3]]) -> [usize; 4] {
    let m = std::array::from_fn(|i| std::array::from_fn(|j| x[t[j + 1]][i] - x[t[0]][i]));
    if det3(&m) < 0.0 {
        [t[0], t[2], t[1], t[3]]
    } else {
        t
    }
}

/// A 181-vertex P1 tetrahedral organ-like lobe (metres) used as the default
/// interactive scene. Facets on the posterior part of the underside are
/// tagged `clamp`, every other boundary facet `free`.
pub fn liver_placeholder() -> Mesh {
    let counts = [5, 5, 4];
    let grid = generate_box_hex(counts, [1.0, 1.0, 1.0]);
    let mut vertices: Vec<[f64; 3]> = grid.vertices.iter().map(|&p| shape(p)).collect();
    let special = CENTER_SPLIT[0] + counts[0] * (CENTER_SPLIT[1] + counts[1] * CENTER_SPLIT[2]);
    let mut cells = Vec::new();
    for c in 0..grid.cell_count() {
        let h = grid.cell(c);
        if c == special {
            let center = vertices.len();
            let mut m = [0.0; 3];
            for &n in h {
                for d in 0..3 {
                    m[d] += vertices[n][d] / 8.0;
                }
            }
            vertices.push(m);
            // each face is cut along the diagonal through its lowest and
            // highest corner, matching the neighbours' split
            for f in 0..6 {
                let q = CellFamily::Q1Hex.facet_nodes(f);
                let mut k: Vec<usize> = q.clone();
                k.sort_unstable();
                let (a, d) = (k[0], k[3]);
                let others: Vec<usize> = k[1..3].to_vec();
                for b in others {
                    cells.extend(oriented([h[a], h[b], h[d], center], &vertices));
                }
            }
        } else {
            for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let a = 1usize << p[0];
                let b = a | (1 << p[1]);
                cells.extend(oriented([h[0], h[a], h[b], h[7]], &vertices));
            }
        }
    }
    let tags: BTreeMap<String, u32> = [("clamp".to_string(), 1), ("free".to_string(), 2)].into();
    let bare = Mesh::from_parts(vertices, CellFamily::P1Tet, cells, vec![], tags.clone()).expect("valid lobe");
    let facets = bare
        .boundary_faces()
        .into_iter()
        .map(|(c, l)| {
            let nodes = bare.cell_facet_nodes(c, l);
            // classify in grid coordinates: underside (w = 0) with u <= 0.4
            let on_clamp = nodes.iter().all(|&n| {
                n < grid.vertex_count() && grid.vertices[n][2] == 0.0 && grid.vertices[n][0] <= 0.4 + 1e-12
            });
            (nodes, if on_clamp { 1 } else { 2 })
        })
        .collect();
    Mesh::from_parts(bare.vertices, bare.family, bare.cells, facets, tags).expect("valid lobe")
}
