use serde::Serialize;

use super::DofMap;

/// Square matrix in compressed sparse row form with sorted column indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseMatrixCSR {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrixCSR {
    /// Builds from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i}, {j}) outside {n}x{n}");
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Columns and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Index into `values` of entry (i, j), if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                row[j] = a;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |K - K^T| / max |K|`; the pattern must be structurally symmetric.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        let m = self.max_abs();
        if m == 0.0 {
            0.0
        } else {
            worst / m
        }
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).0.iter().all(|&j| self.position(j, i).is_some()))
    }
}

/// Sparsity pattern of a mesh's stiffness matrix plus, for each cell, the
/// position in `values` of every local (row, col) pair.
#[derive(Clone, Debug)]
pub struct Pattern {
    pub(crate) matrix: SparseMatrixCSR,
    pub(crate) cell_positions: Vec<usize>,
    pub(crate) local_len: usize,
}

impl Pattern {
    pub fn new(dofs: &DofMap) -> Self {
        let nn = dofs.nodes_per_cell();
        let nodes = dofs.dof_count() / 3;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for c in 0..dofs.cell_count() {
            let conn = dofs.cell_nodes(c);
            for &a in conn {
                adj[a].extend_from_slice(conn);
            }
        }
        let mut row_ptr = Vec::with_capacity(3 * nodes + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for nb in &mut adj {
            nb.sort_unstable();
            nb.dedup();
            for _ in 0..3 {
                for &m in nb.iter() {
                    col_idx.extend_from_slice(&[3 * m, 3 * m + 1, 3 * m + 2]);
                }
                row_ptr.push(col_idx.len());
            }
        }
        let values = vec![0.0; col_idx.len()];
        let matrix = SparseMatrixCSR {
            n: 3 * nodes,
            row_ptr,
            col_idx,
            values,
        };
        let nd = 3 * nn;
        let mut cell_positions = Vec::with_capacity(dofs.cell_count() * nd * nd);
        for c in 0..dofs.cell_count() {
            let g = dofs.cell_dofs(c);
            for &i in g {
                for &j in g {
                    cell_positions.push(matrix.position(i, j).expect("pattern covers cell"));
                }
            }
        }
        Self {
            matrix,
            cell_positions,
            local_len: nd * nd,
        }
    }

    pub fn matrix(&self) -> &SparseMatrixCSR {
        &self.matrix
    }

    pub(crate) fn positions(&self, cell: usize) -> &[usize] {
        &self.cell_positions[cell * self.local_len..(cell + 1) * self.local_len]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_hex;

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrixCSR::from_triplets(3, &[(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (2, 1, -1.0)]);
        assert_eq!(m.row(0), (&[0usize, 2][..], &[2.0, 4.0][..]));
        assert_eq!(m.get(2, 1), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![6.0, 0.0, -1.0]);
    }

    #[test]
    fn pattern_is_symmetric_and_sorted() {
        let mesh = generate_box_hex([2, 2, 1], [1.0, 1.0, 1.0]);
        let p = Pattern::new(&DofMap::new(&mesh));
        let m = p.matrix();
        assert!(m.is_structurally_symmetric());
        for i in 0..m.dim() {
            assert!(m.row(i).0.windows(2).all(|w| w[0] < w[1]));
        }
        // a corner node touches the 8 nodes of its only cell
        assert_eq!(m.row(0).0.len(), 24);
        assert_eq!(m.nnz(), p.cell_positions.iter().collect::<std::collections::HashSet<_>>().len());
    }
}
