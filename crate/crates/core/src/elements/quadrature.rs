use super::{CellFamily, ElementError};

pub const SUPPORTED_DEGREES: std::ops::RangeInclusive<u32> = 1..=4;

/// Integration points on a reference domain.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Highest total polynomial degree integrated exactly.
    pub exactness: u32,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Degree used when a run does not override it: 1 for linear families
/// (centroid rule on simplices, 2-point Gauss per axis on tensor cells),
/// 4 for quadratic ones.
pub fn default_degree(family: CellFamily) -> u32 {
    if family.is_quadratic() {
        4
    } else {
        1
    }
}

/// Rule exact at least to `degree` on the reference domain of `family`.
pub fn quadrature(family: CellFamily, degree: u32) -> Result<QuadratureRule, ElementError> {
    if !SUPPORTED_DEGREES.contains(&degree) {
        return Err(ElementError::UnsupportedDegree { family, degree });
    }
    Ok(match family.linear() {
        CellFamily::P1Tet => tet_rule(degree),
        CellFamily::Tri3 => tri_rule(degree),
        CellFamily::Q1Hex => gauss_tensor(3, degree),
        CellFamily::Quad4 => gauss_tensor(2, degree),
        _ => unreachable!(),
    })
}

fn gauss_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        _ => unreachable!("only 2- and 3-point Gauss rules are tabulated"),
    }
}

fn gauss_tensor(dim: usize, degree: u32) -> QuadratureRule {
    let n = if degree <= 3 { 2 } else { 3 };
    let (x, w) = gauss_1d(n);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let nz = if dim == 3 { n } else { 1 };
    for k in 0..nz {
        for j in 0..n {
            for i in 0..n {
                let z = if dim == 3 { x[k] } else { 0.0 };
                let wz = if dim == 3 { w[k] } else { 1.0 };
                points.push([x[i], x[j], z]);
                weights.push(w[i] * w[j] * wz);
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        exactness: 2 * n as u32 - 1,
    }
}

fn tet_rule(degree: u32) -> QuadratureRule {
    match degree {
        1 => QuadratureRule {
            points: vec![[0.25; 3]],
            weights: vec![1.0 / 6.0],
            exactness: 1,
        },
        2 => {
            let a = 0.138_196_601_125_010_5;
            let b = 1.0 - 3.0 * a;
            QuadratureRule {
                points: vec![[a, a, a], [b, a, a], [a, b, a], [a, a, b]],
                weights: vec![1.0 / 24.0; 4],
                exactness: 2,
            }
        }
        _ => {
            // 14-point symmetric rule with positive weights, exact to degree 5
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (a, w) in [
                (0.092_735_250_310_891_2, 0.012_248_840_519_393_66),
                (0.310_885_919_263_300_6, 0.018_781_320_953_002_64),
            ] {
                let b = 1.0 - 3.0 * a;
                for p in [[a, a, a], [b, a, a], [a, b, a], [a, a, b]] {
                    points.push(p);
                    weights.push(w);
                }
            }
            let (c, w) = (0.045_503_704_125_649_6, 0.007_091_003_462_846_911);
            let d = 0.5 - c;
            for p in [[c, c, d], [c, d, c], [d, c, c], [c, d, d], [d, c, d], [d, d, c]] {
                points.push(p);
                weights.push(w);
            }
            QuadratureRule {
                points,
                weights,
                exactness: 5,
            }
        }
    }
}

fn tri_rule(degree: u32) -> QuadratureRule {
    match degree {
        1 => QuadratureRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0, 0.0]],
            weights: vec![0.5],
            exactness: 1,
        },
        2 => {
            let (a, b) = (1.0 / 6.0, 2.0 / 3.0);
            QuadratureRule {
                points: vec![[a, a, 0.0], [b, a, 0.0], [a, b, 0.0]],
                weights: vec![1.0 / 6.0; 3],
                exactness: 2,
            }
        }
        _ => {
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (a, w) in [
                (0.445_948_490_915_965, 0.223_381_589_678_011),
                (0.091_576_213_509_771, 0.109_951_743_655_322),
            ] {
                let b = 1.0 - 2.0 * a;
                for p in [[a, a, 0.0], [b, a, 0.0], [a, b, 0.0]] {
                    points.push(p);
                    weights.push(0.5 * w);
                }
            }
            QuadratureRule {
                points,
                weights,
                exactness: 4,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Closed-form integral of x^a y^b z^c over the reference domain.
    fn exact_monomial(family: CellFamily, e: [u32; 3]) -> f64 {
        let [a, b, c] = e;
        match family.linear() {
            CellFamily::P1Tet => factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3),
            CellFamily::Tri3 => factorial(a) * factorial(b) / factorial(a + b + 2),
            CellFamily::Q1Hex | CellFamily::Quad4 => {
                let one = |p: u32| if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let dz = if family.dim() == 3 { one(c) } else { 1.0 };
                one(a) * one(b) * dz
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for family in CellFamily::ALL {
            for degree in SUPPORTED_DEGREES {
                let q = quadrature(family, degree).unwrap();
                let s: f64 = q.weights.iter().sum();
                assert!((s - family.reference_measure()).abs() < 1e-14, "{family:?} {degree}");
            }
        }
    }

    #[test]
    fn monomials_integrate_exactly_to_declared_degree() {
        for family in CellFamily::ALL {
            for degree in SUPPORTED_DEGREES {
                let q = quadrature(family, degree).unwrap();
                assert!(q.exactness >= degree);
                let zmax = if family.dim() == 3 { q.exactness } else { 0 };
                for a in 0..=q.exactness {
                    for b in 0..=q.exactness - a {
                        for c in 0..=zmax.min(q.exactness - a - b) {
                            let num: f64 = q
                                .points
                                .iter()
                                .zip(&q.weights)
                                .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                                .sum();
                            let ex = exact_monomial(family, [a, b, c]);
                            assert!((num - ex).abs() < 1e-12, "{family:?} deg {degree} x^{a}y^{b}z^{c}: {num} vs {ex}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn centroid_rule_and_odd_symmetry() {
        let q = quadrature(CellFamily::P1Tet, 1).unwrap();
        assert_eq!(q.points, vec![[0.25; 3]]);
        assert_eq!(q.weights, vec![1.0 / 6.0]);
        let h = quadrature(CellFamily::Q1Hex, 1).unwrap();
        assert_eq!(h.len(), 8);
        let xyz: f64 = h.points.iter().zip(&h.weights).map(|(p, w)| w * p[0] * p[1] * p[2]).sum();
        assert!(xyz.abs() < 1e-15);
    }

    #[test]
    fn unsupported_degree_lists_range() {
        let err = quadrature(CellFamily::Q2Hex, 7).unwrap_err();
        assert!(err.to_string().contains("1..=4"));
        assert!(quadrature(CellFamily::P1Tet, 0).is_err());
    }
}
