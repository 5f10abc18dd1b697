use super::ElementError;

/// Isoparametric map evaluated at one reference point.
#[derive(Clone, Debug)]
pub struct MappedPoint {
    /// `J[i][j] = dx_i / dxi_j`.
    pub jacobian: [[f64; 3]; 3],
    pub det: f64,
    /// Shape gradients with respect to physical coordinates.
    pub grad_x: Vec<[f64; 3]>,
}

/// Map a volume cell at a point given its reference shape gradients there.
/// A non-positive Jacobian determinant is an inverted element.
pub fn geometric_map(coords: &[[f64; 3]], ref_grads: &[[f64; 3]]) -> Result<MappedPoint, ElementError> {
    let mut jac = [[0.0; 3]; 3];
    for (x, g) in coords.iter().zip(ref_grads) {
        for i in 0..3 {
            for j in 0..3 {
                jac[i][j] += x[i] * g[j];
            }
        }
    }
    let det = det3(&jac);
    if !(det > 0.0) {
        return Err(ElementError::InvertedElement { element: None, det });
    }
    let inv = inv3(&jac, det);
    // grad_x N = J^{-T} grad_xi N
    let grad_x = ref_grads
        .iter()
        .map(|g| std::array::from_fn(|i| inv[0][i] * g[0] + inv[1][i] * g[1] + inv[2][i] * g[2]))
        .collect();
    Ok(MappedPoint {
        jacobian: jac,
        det,
        grad_x,
    })
}

/// Area scale factor and unit normal of a surface patch at a reference point.
pub fn surface_map(coords: &[[f64; 3]], ref_grads: &[[f64; 3]]) -> (f64, [f64; 3]) {
    let mut t1 = [0.0; 3];
    let mut t2 = [0.0; 3];
    for (x, g) in coords.iter().zip(ref_grads) {
        for i in 0..3 {
            t1[i] += x[i] * g[0];
            t2[i] += x[i] * g[1];
        }
    }
    let n = [
        t1[1] * t2[2] - t1[2] * t2[1],
        t1[2] * t2[0] - t1[0] * t2[2],
        t1[0] * t2[1] - t1[1] * t2[0],
    ];
    let a = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if a == 0.0 {
        return (0.0, [0.0; 3]);
    }
    (a, [n[0] / a, n[1] / a, n[2] / a])
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub(crate) fn inv3(m: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let d = 1.0 / det;
    [
        [
            (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d,
        ],
        [
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d,
        ],
        [
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d,
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{quadrature, CellFamily, ReferenceElement};

    fn affine(p: [f64; 3]) -> [f64; 3] {
        [
            2.0 * p[0] + 0.3 * p[1] + 1.0,
            0.1 * p[0] + 1.5 * p[1] - 0.2 * p[2],
            0.4 * p[1] + 3.0 * p[2] - 2.0,
        ]
    }

    #[test]
    fn affine_cells_have_constant_jacobian_and_exact_volume() {
        let a = [[2.0, 0.3, 0.0], [0.1, 1.5, -0.2], [0.0, 0.4, 3.0]];
        let d = det3(&a);
        for fam in CellFamily::VOLUME {
            let el = ReferenceElement::new(fam);
            let coords: Vec<_> = fam.reference_nodes().into_iter().map(affine).collect();
            let q = quadrature(fam, 2).unwrap();
            let mut vol = 0.0;
            for (p, w) in q.points.iter().zip(&q.weights) {
                let m = geometric_map(&coords, &el.shape_gradients(p)).unwrap();
                assert!((m.det - d).abs() < 1e-12);
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((m.jacobian[i][j] - a[i][j]).abs() < 1e-13);
                    }
                }
                vol += w * m.det;
            }
            assert!((vol - d * fam.reference_measure()).abs() < 1e-12, "{fam:?}");
        }
    }

    #[test]
    fn physical_gradients_reproduce_linear_field() {
        // sum_a x_a (grad N_a)^T = I for any valid mapping
        let fam = CellFamily::Q2Hex;
        let el = ReferenceElement::new(fam);
        let coords: Vec<_> = fam
            .reference_nodes()
            .into_iter()
            .map(|p| [p[0] + 0.1 * p[1] * p[1], p[1] + 0.05 * p[0] * p[2], p[2]])
            .collect();
        let m = geometric_map(&coords, &el.shape_gradients(&[0.3, -0.2, 0.5])).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = coords.iter().zip(&m.grad_x).map(|(x, g)| x[i] * g[j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mirrored_cell_is_inverted() {
        let fam = CellFamily::P1Tet;
        let el = ReferenceElement::new(fam);
        let coords: Vec<_> = fam.reference_nodes().into_iter().map(|p| [-p[0], p[1], p[2]]).collect();
        let err = geometric_map(&coords, &el.shape_gradients(&[0.25; 3])).unwrap_err();
        assert!(matches!(err, ElementError::InvertedElement { det, .. } if det < 0.0));
        assert!(err.for_element(7).to_string().contains("Some(7)"));
    }

    #[test]
    fn surface_scale_of_unit_quad() {
        let fam = CellFamily::Quad4;
        let el = ReferenceElement::new(fam);
        let coords: Vec<_> = fam.reference_nodes().iter().map(|p| [0.5 * p[0], 0.5 * p[1], 7.0]).collect();
        let (a, n) = surface_map(&coords, &el.shape_gradients(&[0.2, 0.1, 0.0]));
        assert!((a - 0.25).abs() < 1e-15);
        assert!(n[0].abs() < 1e-14 && n[1].abs() < 1e-14 && (n[2] - 1.0).abs() < 1e-14);
    }
}
