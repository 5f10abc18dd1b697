use super::{CellFamily, QuadratureRule};

/// Shape functions of one family in canonical node order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceElement {
    pub family: CellFamily,
}

/// Shape values and reference gradients at every point of a quadrature rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<[f64; 3]>>,
}

impl ReferenceElement {
    pub fn new(family: CellFamily) -> Self {
        Self { family }
    }

    pub fn node_count(&self) -> usize {
        self.family.node_count()
    }

    /// `N_i(xi)`. Polynomials are total, so points outside the reference domain are accepted.
    pub fn shape_values(&self, xi: &[f64; 3]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count()];
        self.values_into(xi, &mut out);
        out
    }

    /// Gradients with respect to reference coordinates; the third component is zero
    /// for surface families.
    pub fn shape_gradients(&self, xi: &[f64; 3]) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; self.node_count()];
        self.gradients_into(xi, &mut out);
        out
    }

    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        Tabulation {
            values: rule.points.iter().map(|p| self.shape_values(p)).collect(),
            gradients: rule.points.iter().map(|p| self.shape_gradients(p)).collect(),
        }
    }

    pub fn values_into(&self, xi: &[f64; 3], out: &mut [f64]) {
        let (x, y, z) = (xi[0], xi[1], xi[2]);
        match self.family {
            CellFamily::P1Tet => {
                out[0] = 1.0 - x - y - z;
                out[1] = x;
                out[2] = y;
                out[3] = z;
            }
            CellFamily::Tri3 => {
                out[0] = 1.0 - x - y;
                out[1] = x;
                out[2] = y;
            }
            CellFamily::P2Tet | CellFamily::Tri6 => {
                let l = barycentric(self.family, xi);
                let nv = self.family.corner_count();
                for i in 0..nv {
                    out[i] = l[i] * (2.0 * l[i] - 1.0);
                }
                for (k, e) in self.family.edges().iter().enumerate() {
                    out[nv + k] = 4.0 * l[e[0]] * l[e[1]];
                }
            }
            CellFamily::Q1Hex | CellFamily::Quad4 => {
                let d = self.family.dim();
                let scale = 0.5f64.powi(d as i32);
                for (i, node) in self.family.reference_nodes().iter().enumerate() {
                    out[i] = scale * (0..d).map(|k| 1.0 + xi[k] * node[k]).product::<f64>();
                }
            }
            CellFamily::Q2Hex | CellFamily::Quad8 => {
                let d = self.family.dim();
                let nv = self.family.corner_count();
                for (i, node) in self.family.reference_nodes().iter().enumerate() {
                    out[i] = if i < nv {
                        let s: f64 = (0..d).map(|k| xi[k] * node[k]).sum::<f64>() - (d as f64 - 1.0);
                        0.5f64.powi(d as i32) * (0..d).map(|k| 1.0 + xi[k] * node[k]).product::<f64>() * s
                    } else {
                        let m = (0..d).find(|&k| node[k] == 0.0).expect("mid-edge node");
                        let p: f64 = (0..d).filter(|&k| k != m).map(|k| 1.0 + xi[k] * node[k]).product();
                        0.5f64.powi(d as i32 - 1) * (1.0 - xi[m] * xi[m]) * p
                    };
                }
            }
        }
    }

    pub fn gradients_into(&self, xi: &[f64; 3], out: &mut [[f64; 3]]) {
        match self.family {
            CellFamily::P1Tet => {
                out[0] = [-1.0, -1.0, -1.0];
                out[1] = [1.0, 0.0, 0.0];
                out[2] = [0.0, 1.0, 0.0];
                out[3] = [0.0, 0.0, 1.0];
            }
            CellFamily::Tri3 => {
                out[0] = [-1.0, -1.0, 0.0];
                out[1] = [1.0, 0.0, 0.0];
                out[2] = [0.0, 1.0, 0.0];
            }
            CellFamily::P2Tet | CellFamily::Tri6 => {
                let l = barycentric(self.family, xi);
                let dl = barycentric_gradients(self.family);
                let nv = self.family.corner_count();
                for i in 0..nv {
                    let c = 4.0 * l[i] - 1.0;
                    out[i] = [c * dl[i][0], c * dl[i][1], c * dl[i][2]];
                }
                for (k, e) in self.family.edges().iter().enumerate() {
                    let (a, b) = (e[0], e[1]);
                    out[nv + k] = std::array::from_fn(|j| 4.0 * (dl[a][j] * l[b] + l[a] * dl[b][j]));
                }
            }
            CellFamily::Q1Hex | CellFamily::Quad4 => {
                let d = self.family.dim();
                let scale = 0.5f64.powi(d as i32);
                for (i, node) in self.family.reference_nodes().iter().enumerate() {
                    let mut g = [0.0; 3];
                    for (j, gj) in g.iter_mut().enumerate().take(d) {
                        *gj = scale
                            * node[j]
                            * (0..d).filter(|&k| k != j).map(|k| 1.0 + xi[k] * node[k]).product::<f64>();
                    }
                    out[i] = g;
                }
            }
            CellFamily::Q2Hex | CellFamily::Quad8 => {
                let d = self.family.dim();
                let nv = self.family.corner_count();
                for (i, node) in self.family.reference_nodes().iter().enumerate() {
                    let mut g = [0.0; 3];
                    if i < nv {
                        let scale = 0.5f64.powi(d as i32);
                        let s: f64 = (0..d).map(|k| xi[k] * node[k]).sum::<f64>() - (d as f64 - 1.0);
                        for (j, gj) in g.iter_mut().enumerate().take(d) {
                            let others: f64 = (0..d).filter(|&k| k != j).map(|k| 1.0 + xi[k] * node[k]).product();
                            let aj = 1.0 + xi[j] * node[j];
                            // d/dxj [aj * others * s] = node_j * others * s + aj * others * node_j
                            *gj = scale * node[j] * others * (s + aj);
                        }
                    } else {
                        let scale = 0.5f64.powi(d as i32 - 1);
                        let m = (0..d).find(|&k| node[k] == 0.0).expect("mid-edge node");
                        for (j, gj) in g.iter_mut().enumerate().take(d) {
                            let others: f64 = (0..d)
                                .filter(|&k| k != m && k != j)
                                .map(|k| 1.0 + xi[k] * node[k])
                                .product();
                            *gj = if j == m {
                                scale * (-2.0 * xi[m]) * others
                            } else {
                                scale * (1.0 - xi[m] * xi[m]) * node[j] * others
                            };
                        }
                    }
                    out[i] = g;
                }
            }
        }
    }
}

fn barycentric(family: CellFamily, xi: &[f64; 3]) -> [f64; 4] {
    if family.dim() == 3 {
        [1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]]
    } else {
        [1.0 - xi[0] - xi[1], xi[0], xi[1], 0.0]
    }
}

fn barycentric_gradients(family: CellFamily) -> [[f64; 3]; 4] {
    if family.dim() == 3 {
        [
            [-1.0, -1.0, -1.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ]
    } else {
        [[-1.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0; 3]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_interior(family: CellFamily, rng: &mut impl rand::Rng) -> [f64; 3] {
        let d = family.dim();
        loop {
            let mut p = [0.0; 3];
            for v in p.iter_mut().take(d) {
                *v = if family.is_simplex() {
                    rng.gen_range(0.0..1.0)
                } else {
                    rng.gen_range(-1.0..1.0)
                };
            }
            if !family.is_simplex() || p.iter().sum::<f64>() <= 1.0 {
                return p;
            }
        }
    }

    #[test]
    fn partition_of_unity_and_kronecker() {
        let mut rng = rand::thread_rng();
        for family in CellFamily::ALL {
            let el = ReferenceElement::new(family);
            for (j, node) in family.reference_nodes().iter().enumerate() {
                let n = el.shape_values(node);
                for (i, v) in n.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-14, "{family:?} N{i}(x{j}) = {v}");
                }
            }
            for _ in 0..50 {
                let xi = random_interior(family, &mut rng);
                let s: f64 = el.shape_values(&xi).iter().sum();
                assert!((s - 1.0).abs() < 1e-14, "{family:?}");
                let g = el.shape_gradients(&xi);
                for k in 0..3 {
                    let gs: f64 = g.iter().map(|v| v[k]).sum();
                    assert!(gs.abs() < 1e-13, "{family:?}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rand::thread_rng();
        for family in CellFamily::ALL {
            let el = ReferenceElement::new(family);
            let xi = random_interior(family, &mut rng);
            let g = el.shape_gradients(&xi);
            let h = 1e-6;
            for k in 0..family.dim() {
                let mut p = xi;
                let mut m = xi;
                p[k] += h;
                m[k] -= h;
                let (np, nm) = (el.shape_values(&p), el.shape_values(&m));
                for i in 0..family.node_count() {
                    let fd = (np[i] - nm[i]) / (2.0 * h);
                    assert!((fd - g[i][k]).abs() < 1e-8, "{family:?} node {i} dir {k}");
                }
            }
        }
    }

    #[test]
    fn p1_at_centroid_and_constant_gradients() {
        let el = ReferenceElement::new(CellFamily::P1Tet);
        assert_eq!(el.shape_values(&[0.25, 0.25, 0.25]), vec![0.25; 4]);
        assert_eq!(el.shape_gradients(&[0.1, 0.2, 0.3]), el.shape_gradients(&[0.6, 0.1, 0.05]));
    }

    #[test]
    fn q1_center_values_and_corner_gradient() {
        let el = ReferenceElement::new(CellFamily::Q1Hex);
        assert_eq!(el.shape_values(&[0.0; 3]), vec![0.125; 8]);
        assert_eq!(el.shape_gradients(&[0.0; 3])[0], [-0.125; 3]);
    }
}
