use std::fmt;

use super::node::Expr;
use super::simplify::{add, div, mul, neg, sub};
use super::BuildError;

/// Shape of a tensor expression. Scalars are `1 x 1` with `scalar = true`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
    pub scalar: bool,
}

impl Shape {
    pub const SCALAR: Shape = Shape {
        rows: 1,
        cols: 1,
        scalar: true,
    };

    pub fn matrix(rows: usize, cols: usize) -> Shape {
        Shape {
            rows,
            cols,
            scalar: false,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scalar {
            write!(f, "scalar")
        } else {
            write!(f, "{}x{}", self.rows, self.cols)
        }
    }
}

/// Row-major matrix (or scalar) of expression handles.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorExpr {
    shape: Shape,
    entries: Vec<Expr>,
}

impl TensorExpr {
    pub fn new(rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self, BuildError> {
        if entries.len() != rows * cols {
            return Err(BuildError::EntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self {
            shape: Shape::matrix(rows, cols),
            entries,
        })
    }

    pub fn scalar(e: Expr) -> Self {
        Self {
            shape: Shape::SCALAR,
            entries: vec![e],
        }
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            })
            .collect();
        Self {
            shape: Shape::matrix(n, n),
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            shape: Shape::matrix(rows, cols),
            entries: vec![Expr::zero(); rows * cols],
        }
    }

    /// `rows x cols` matrix whose entries are the components of variable `name`, row-major.
    pub fn variable(name: &str, rows: usize, cols: usize) -> Self {
        let entries = (0..rows * cols).map(|k| Expr::var(name, k as u16)).collect();
        Self {
            shape: Shape::matrix(rows, cols),
            entries,
        }
    }

    pub fn from_constants(rows: usize, cols: usize, values: &[f64]) -> Result<Self, BuildError> {
        Self::new(rows, cols, values.iter().map(|&v| Expr::constant(v)).collect())
    }

    pub fn column(values: &[f64]) -> Self {
        Self {
            shape: Shape::matrix(values.len(), 1),
            entries: values.iter().map(|&v| Expr::constant(v)).collect(),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn rows(&self) -> usize {
        self.shape.rows
    }

    pub fn cols(&self) -> usize {
        self.shape.cols
    }

    pub fn is_scalar(&self) -> bool {
        self.shape.scalar
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Expr> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.shape.cols + j]
    }

    pub fn as_scalar(&self) -> Result<&Expr, BuildError> {
        if self.is_scalar() || (self.rows() == 1 && self.cols() == 1) {
            Ok(&self.entries[0])
        } else {
            Err(BuildError::NotScalar(self.shape))
        }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        Self {
            shape: self.shape,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn zip(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Expr, Expr) -> Expr,
    ) -> Result<Self, BuildError> {
        if self.shape != other.shape {
            return Err(BuildError::ShapeMismatch {
                op,
                left: self.shape,
                right: other.shape,
            });
        }
        Ok(Self {
            shape: self.shape,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a.clone(), b.clone()))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, BuildError> {
        self.zip(other, "add", add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, BuildError> {
        self.zip(other, "sub", sub)
    }

    pub fn neg(&self) -> Self {
        self.map(|e| neg(e.clone()))
    }

    pub fn scale(&self, s: &Expr) -> Self {
        self.map(|e| mul(s.clone(), e.clone()))
    }

    pub fn transpose(&self) -> Self {
        if self.is_scalar() {
            return self.clone();
        }
        let (r, c) = (self.rows(), self.cols());
        let entries = (0..r * c)
            .map(|k| self.get(k % r, k / r).clone())
            .collect();
        Self {
            shape: Shape::matrix(c, r),
            entries,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, BuildError> {
        if self.is_scalar() || other.is_scalar() || self.cols() != other.rows() {
            return Err(BuildError::ShapeMismatch {
                op: "matmul",
                left: self.shape,
                right: other.shape,
            });
        }
        let (n, m, p) = (self.rows(), self.cols(), other.cols());
        let mut entries = Vec::with_capacity(n * p);
        for i in 0..n {
            for j in 0..p {
                let mut acc = mul(self.get(i, 0).clone(), other.get(0, j).clone());
                for k in 1..m {
                    acc = add(acc, mul(self.get(i, k).clone(), other.get(k, j).clone()));
                }
                entries.push(acc);
            }
        }
        Ok(Self {
            shape: Shape::matrix(n, p),
            entries,
        })
    }

    pub fn trace(&self) -> Result<Expr, BuildError> {
        if self.is_scalar() || self.rows() != self.cols() {
            return Err(BuildError::NotSquare {
                op: "trace",
                shape: self.shape,
            });
        }
        let mut acc = self.get(0, 0).clone();
        for i in 1..self.rows() {
            acc = add(acc, self.get(i, i).clone());
        }
        Ok(acc)
    }

    /// Double contraction `sum_ij a_ij b_ij`.
    pub fn ddot(&self, other: &Self) -> Result<Expr, BuildError> {
        if self.shape != other.shape {
            return Err(BuildError::ShapeMismatch {
                op: "ddot",
                left: self.shape,
                right: other.shape,
            });
        }
        let mut it = self.entries.iter().zip(&other.entries);
        let (a0, b0) = it.next().expect("non-empty tensor");
        Ok(it.fold(mul(a0.clone(), b0.clone()), |acc, (a, b)| {
            add(acc, mul(a.clone(), b.clone()))
        }))
    }

    fn require_3x3(&self, op: &'static str) -> Result<(), BuildError> {
        if self.is_scalar() || self.rows() != 3 || self.cols() != 3 {
            return Err(BuildError::Not3x3 {
                op,
                shape: self.shape,
            });
        }
        Ok(())
    }

    fn cofactor(&self, i: usize, j: usize) -> Expr {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        sub(
            mul(self.get(i1, j1).clone(), self.get(i2, j2).clone()),
            mul(self.get(i1, j2).clone(), self.get(i2, j1).clone()),
        )
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det3(&self) -> Result<Expr, BuildError> {
        self.require_3x3("det3")?;
        let mut acc = mul(self.get(0, 0).clone(), self.cofactor(0, 0));
        for j in 1..3 {
            acc = add(acc, mul(self.get(0, j).clone(), self.cofactor(0, j)));
        }
        Ok(acc)
    }

    /// Closed-form inverse: adjugate over determinant, one division per entry.
    pub fn inv3(&self) -> Result<Self, BuildError> {
        let det = self.det3()?;
        let entries = (0..9)
            .map(|k| {
                let (i, j) = (k / 3, k % 3);
                // adj(A)_ij = cof(A)_ji
                div(self.cofactor(j, i), det.clone())
            })
            .collect();
        Ok(Self {
            shape: Shape::matrix(3, 3),
            entries,
        })
    }

    /// `a^T M b` for column vectors `a`, `b`.
    pub fn bilinear(a: &Self, m: &Self, b: &Self) -> Result<Expr, BuildError> {
        let mb = m.matmul(b)?;
        a.transpose().matmul(&mb)?.as_scalar().cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Env;

    fn f_env(f: &[f64; 9]) -> Env {
        Env::new().with_var("F", f)
    }

    #[test]
    fn trace_of_identity_is_three() {
        let t = TensorExpr::identity(3).trace().unwrap();
        assert_eq!(t.as_const(), Some(3.0));
    }

    #[test]
    fn det_of_constant_diagonal_folds() {
        let d = TensorExpr::from_constants(3, 3, &[2., 0., 0., 0., 3., 0., 0., 0., 4.]).unwrap();
        assert_eq!(d.det3().unwrap().as_const(), Some(24.0));
    }

    #[test]
    fn ftf_at_identity_is_identity() {
        let f = TensorExpr::variable("F", 3, 3);
        let c = f.transpose().matmul(&f).unwrap();
        let env = f_env(&[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        for i in 0..3 {
            for j in 0..3 {
                let v = c.get(i, j).eval(&env).unwrap();
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn double_transpose_is_structurally_equal() {
        let a = TensorExpr::variable("A", 2, 3);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose().shape(), Shape::matrix(3, 2));
    }

    #[test]
    fn shape_errors_report_both_shapes() {
        let a = TensorExpr::variable("A", 2, 3);
        let b = TensorExpr::variable("B", 2, 3);
        let err = a.matmul(&b).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("2x3"), "{msg}");
        assert!(matches!(a.det3(), Err(BuildError::Not3x3 { .. })));
        assert!(a.inv3().is_err());
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let f = TensorExpr::variable("F", 3, 3);
        let inv = f.inv3().unwrap();
        for e in inv.entries() {
            let divs = e
                .post_order()
                .iter()
                .filter(|n| matches!(n.op(), crate::expr::Op::Div))
                .count();
            assert_eq!(divs, 1);
        }
        let prod = inv.matmul(&f).unwrap();
        let env = f_env(&[1.2, 0.1, -0.3, 0.05, 0.9, 0.2, 0.4, -0.1, 1.1]);
        for i in 0..3 {
            for j in 0..3 {
                let v = prod.get(i, j).eval(&env).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-14);
            }
        }
    }
}
