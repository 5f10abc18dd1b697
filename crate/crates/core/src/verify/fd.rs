//! Central finite-difference checks of kernels and assembled operators.

use rand::Rng;
use serde::Serialize;

use crate::expr::EvalError;
use crate::fem::{Constitutive, FeModel, FemError};
use crate::materials::{FULL_LEN, STRESS_LEN};

/// Relative errors `||exact - fd|| / ||exact||` (absolute when `exact = 0`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FdReport {
    pub stress: f64,
    pub tangent: f64,
}

impl FdReport {
    pub fn max(self, other: Self) -> Self {
        Self {
            stress: self.stress.max(other.stress),
            tangent: self.tangent.max(other.tangent),
        }
    }
}

pub(crate) fn rel_err(exact: &[f64], approx: &[f64]) -> f64 {
    let mut d = 0.0;
    let mut n = 0.0;
    for (a, b) in exact.iter().zip(approx) {
        d += (a - b) * (a - b);
        n += a * a;
    }
    if n == 0.0 {
        d.sqrt()
    } else {
        (d / n).sqrt()
    }
}

/// Compares `P` with the central difference of `psi` and `A` with the
/// central difference of `P`, with step `h` per entry of `F`.
pub fn fd_check_kernel<K: Constitutive>(k: &K, f: &[f64; 9], h: f64) -> Result<FdReport, EvalError> {
    let mut s = k.scratch();
    let mut full = [0.0; FULL_LEN];
    k.tangent(f, &mut s, &mut full)?;
    let mut p_fd = [0.0; 9];
    let mut a_fd = [0.0; 81];
    let mut plus = [0.0; STRESS_LEN];
    let mut minus = [0.0; STRESS_LEN];
    for l in 0..9 {
        let mut fp = *f;
        let mut fm = *f;
        fp[l] += h;
        fm[l] -= h;
        k.stress(&fp, &mut s, &mut plus)?;
        k.stress(&fm, &mut s, &mut minus)?;
        p_fd[l] = (plus[0] - minus[0]) / (2.0 * h);
        for i in 0..9 {
            a_fd[9 * i + l] = (plus[1 + i] - minus[1 + i]) / (2.0 * h);
        }
    }
    Ok(FdReport {
        stress: rel_err(&full[1..10], &p_fd),
        tangent: rel_err(&full[10..], &a_fd),
    })
}

/// Random deformation gradient `I + scale * U(-1, 1)` with `det F` in `det_range`.
pub fn random_deformation(rng: &mut impl Rng, scale: f64, det_range: (f64, f64)) -> [f64; 9] {
    loop {
        let mut f = [0.0; 9];
        for (k, v) in f.iter_mut().enumerate() {
            *v = if k % 4 == 0 { 1.0 } else { 0.0 } + scale * rng.gen_range(-1.0..1.0);
        }
        let d = f[0] * (f[4] * f[8] - f[5] * f[7]) - f[1] * (f[3] * f[8] - f[5] * f[6])
            + f[2] * (f[3] * f[7] - f[4] * f[6]);
        if d >= det_range.0 && d <= det_range.1 {
            return f;
        }
    }
}

/// Uniformly random rotation (unit quaternion), row-major.
pub fn random_rotation(rng: &mut impl Rng) -> [f64; 9] {
    let mut q = [0.0f64; 4];
    loop {
        for v in q.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let n = q.iter().map(|v| v * v).sum::<f64>();
        if n > 1e-3 && n <= 1.0 {
            let n = n.sqrt();
            q.iter_mut().for_each(|v| *v /= n);
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ]
}

pub fn matmul3(a: &[f64; 9], b: &[f64; 9]) -> [f64; 9] {
    std::array::from_fn(|k| {
        let (i, j) = (k / 3, k % 3);
        (0..3).map(|m| a[3 * i + m] * b[3 * m + j]).sum()
    })
}

/// Assembled-operator check at state `u`: the residual against the central
/// difference of the total energy, and the tangent against the central
/// difference of the residual, both over all DOFs.
pub fn fd_check_model<K: Constitutive>(model: &FeModel<K>, u: &[f64], lambda: f64, h: f64) -> Result<FdReport, FemError> {
    let n = model.dof_count();
    let (r, k) = model.residual_and_tangent(u, lambda)?;
    let mut r_fd = vec![0.0; n];
    let mut k_exact = Vec::with_capacity(n * n);
    let mut k_fd = Vec::with_capacity(n * n);
    let mut w = u.to_vec();
    for j in 0..n {
        w[j] = u[j] + h;
        let ep = model.energy(&w, lambda)?;
        let rp = model.residual(&w, lambda)?;
        w[j] = u[j] - h;
        let em = model.energy(&w, lambda)?;
        let rm = model.residual(&w, lambda)?;
        w[j] = u[j];
        r_fd[j] = (ep - em) / (2.0 * h);
        for i in 0..n {
            k_exact.push(k.get(i, j));
            k_fd.push((rp[i] - rm[i]) / (2.0 * h));
        }
    }
    Ok(FdReport {
        stress: rel_err(&r, &r_fd),
        tangent: rel_err(&k_exact, &k_fd),
    })
}
