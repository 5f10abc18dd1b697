//! Direct solver: reverse Cuthill-McKee ordering and an envelope `L D L^T`
//! factorization, with dense partial-pivoting LU as a fallback for small
//! systems whose symmetric factorization breaks down.

use std::collections::VecDeque;

use super::{norm, FemError, SparseMatrixCSR};

const PIVOT_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-10;
const DENSE_FALLBACK_MAX: usize = 4000;

/// Symmetric elimination of prescribed increments: constrained rows and
/// columns are zeroed with a unit diagonal, the right-hand side carries the
/// prescribed values and the coupling columns move to the free rows.
pub fn apply_dirichlet(k: &mut SparseMatrixCSR, rhs: &mut [f64], constrained: &[(usize, f64)]) -> Result<(), FemError> {
    let n = k.dim();
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for &(d, v) in constrained {
        if d >= n {
            return Err(FemError::NoSuchDof {
                node: d / 3,
                component: d % 3,
                nodes: n / 3,
            });
        }
        fixed[d] = Some(v);
    }
    let ptr = k.row_ptr().to_vec();
    let cols = k.col_idx().to_vec();
    let vals = k.values_mut();
    for i in 0..n {
        for p in ptr[i]..ptr[i + 1] {
            let j = cols[p];
            match (fixed[i], fixed[j]) {
                (Some(_), _) => vals[p] = if i == j { 1.0 } else { 0.0 },
                (None, Some(g)) => {
                    rhs[i] -= vals[p] * g;
                    vals[p] = 0.0;
                }
                (None, None) => {}
            }
        }
        if let Some(g) = fixed[i] {
            rhs[i] = g;
        }
    }
    Ok(())
}

/// Solves `K x = b` for a symmetric `K`; `||K x - b|| / ||b||` is checked
/// against 1e-10 after at most one refinement step.
pub fn linear_solve(k: &SparseMatrixCSR, b: &[f64]) -> Result<Vec<f64>, FemError> {
    let n = k.dim();
    assert_eq!(b.len(), n, "right-hand side length");
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let solver: Box<dyn Fn(&[f64]) -> Vec<f64>> = match Envelope::factor(k) {
        Ok(f) => Box::new(move |r| f.solve(r)),
        Err(diag) if n <= DENSE_FALLBACK_MAX => {
            let lu = DenseLu::factor(k.to_dense())
                .map_err(|d| FemError::LinearSolve(format!("{diag}; dense LU fallback: {d}")))?;
            Box::new(move |r| lu.solve(r))
        }
        Err(diag) => return Err(FemError::LinearSolve(diag)),
    };
    let mut x = solver(b);
    for refine in 0..2 {
        let kx = k.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&kx).map(|(bi, ki)| bi - ki).collect();
        let rel = norm(&r) / bn;
        if rel <= RESIDUAL_TOL {
            return Ok(x);
        }
        if refine == 1 || !rel.is_finite() {
            return Err(FemError::LinearSolve(format!(
                "relative residual {rel:e} exceeds {RESIDUAL_TOL:e} (matrix singular or ill-conditioned)"
            )));
        }
        let dx = solver(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
    unreachable!()
}

/// Dense partial-pivoting LU solve of a row-major matrix.
pub fn dense_solve(a: Vec<Vec<f64>>, b: &[f64]) -> Result<Vec<f64>, FemError> {
    let lu = DenseLu::factor(a).map_err(FemError::LinearSolve)?;
    Ok(lu.solve(b))
}

/// Reverse Cuthill-McKee permutation, `perm[new] = old`.
fn rcm(k: &SparseMatrixCSR) -> Vec<usize> {
    let n = k.dim();
    let degree: Vec<usize> = (0..n).map(|i| k.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral(k, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = k.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first levels from `root`: (last level, depth).
fn levels(k: &SparseMatrixCSR, root: usize) -> (Vec<usize>, usize) {
    let mut dist = vec![usize::MAX; k.dim()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = vec![root];
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        for &w in k.row(v).0 {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if dist[w] > depth {
                    depth = dist[w];
                    last.clear();
                }
                last.push(w);
                queue.push_back(w);
            }
        }
    }
    (last, depth)
}

/// Pseudo-peripheral node of the component containing `seed`.
fn peripheral(k: &SparseMatrixCSR, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let (mut last, mut depth) = levels(k, root);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&w| (degree[w], w)).expect("non-empty level");
        let (l2, d2) = levels(k, cand);
        if d2 <= depth {
            break;
        }
        root = cand;
        last = l2;
        depth = d2;
    }
    root
}

struct Envelope {
    perm: Vec<usize>,
    first: Vec<usize>,
    ptr: Vec<usize>,
    /// Strict lower rows of `L`, row `i` spanning columns `first[i]..i`.
    low: Vec<f64>,
    diag: Vec<f64>,
}

impl Envelope {
    fn factor(k: &SparseMatrixCSR) -> Result<Self, String> {
        let n = k.dim();
        let perm = rcm(k);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> = (0..n)
            .map(|i| k.row(perm[i]).0.iter().map(|&j| inv[j]).fold(i, usize::min))
            .collect();
        let mut ptr = Vec::with_capacity(n + 1);
        ptr.push(0);
        for i in 0..n {
            ptr.push(ptr[i] + i - first[i]);
        }
        let mut low = vec![0.0; ptr[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = k.row(perm[i]);
            for (&jo, &a) in cols.iter().zip(vals) {
                let j = inv[jo];
                if j < i {
                    low[ptr[i] + j - first[i]] = a;
                } else if j == i {
                    diag[i] = a;
                }
            }
        }
        let scale: Vec<f64> = diag.iter().map(|d| d.abs()).collect();
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = low.split_at_mut(ptr[i]);
            let row = &mut rest[..i - fi];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &done[ptr[j]..ptr[j + 1]];
                let mut s = 0.0;
                for kk in k0..j {
                    s += row[kk - fi] * lj[kk - fj];
                }
                row[j - fi] -= s;
            }
            let mut d = diag[i];
            for (kk, v) in row.iter_mut().enumerate() {
                let l = *v / diag[fi + kk];
                d -= *v * l;
                *v = l;
            }
            if !(d.abs() > PIVOT_TOL * scale[i]) || !d.is_finite() {
                return Err(format!(
                    "pivot {d:e} at DOF {} (diagonal {:e}, step {i} of {n})",
                    perm[i], scale[i]
                ));
            }
            diag[i] = d;
        }
        Ok(Self {
            perm,
            first,
            ptr,
            low,
            diag,
        })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let row = &self.low[self.ptr[i]..self.ptr[i + 1]];
            let fi = self.first[i];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in 0..n {
            y[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let row = &self.low[self.ptr[i]..self.ptr[i + 1]];
            let fi = self.first[i];
            let yi = y[i];
            for (kk, l) in row.iter().enumerate() {
                y[fi + kk] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

struct DenseLu {
    a: Vec<Vec<f64>>,
    piv: Vec<usize>,
}

impl DenseLu {
    fn factor(mut a: Vec<Vec<f64>>) -> Result<Self, String> {
        let n = a.len();
        let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut piv: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
                .expect("non-empty");
            if !(a[p][c].abs() > PIVOT_TOL * scale) {
                return Err(format!("pivot {:e} in column {c} (max |a| = {scale:e})", a[p][c]));
            }
            a.swap(c, p);
            piv.swap(c, p);
            let (top, bottom) = a.split_at_mut(c + 1);
            let pr = &top[c];
            for r in bottom.iter_mut() {
                let f = r[c] / pr[c];
                if f != 0.0 {
                    r[c] = f;
                    for j in c + 1..n {
                        r[j] -= f * pr[j];
                    }
                } else {
                    r[c] = 0.0;
                }
            }
        }
        Ok(Self { a, piv })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.a.len();
        let mut y: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.a[i][j] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.a[i][j] * y[j]).sum();
            y[i] = (y[i] - s) / self.a[i][i];
        }
        y
    }
}
