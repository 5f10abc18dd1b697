//! Hand-written constitutive laws used as independent references for the
//! generated kernels.

use crate::expr::EvalError;
use crate::fem::Constitutive;
use crate::materials::LameParams;

fn det(f: &[f64; 9]) -> f64 {
    f[0] * (f[4] * f[8] - f[5] * f[7]) - f[1] * (f[3] * f[8] - f[5] * f[6]) + f[2] * (f[3] * f[7] - f[4] * f[6])
}

fn inverse(f: &[f64; 9], j: f64) -> [f64; 9] {
    [
        (f[4] * f[8] - f[5] * f[7]) / j,
        (f[2] * f[7] - f[1] * f[8]) / j,
        (f[1] * f[5] - f[2] * f[4]) / j,
        (f[5] * f[6] - f[3] * f[8]) / j,
        (f[0] * f[8] - f[2] * f[6]) / j,
        (f[2] * f[3] - f[0] * f[5]) / j,
        (f[3] * f[7] - f[4] * f[6]) / j,
        (f[1] * f[6] - f[0] * f[7]) / j,
        (f[0] * f[4] - f[1] * f[3]) / j,
    ]
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `S = lambda tr(E) I + 2 mu E`, `P = F S`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormStvk(pub LameParams);

/// `S = mu (I - C^-1) + lambda ln J C^-1`, `P = mu (F - F^-T) + lambda ln J F^-T`.
#[derive(Clone, Copy, Debug)]
pub struct ClosedFormNeoHookean(pub LameParams);

impl ClosedFormStvk {
    fn stress_parts(&self, f: &[f64; 9]) -> (f64, [f64; 9], [f64; 9]) {
        let LameParams { mu, lambda } = self.0;
        let mut e = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                let c: f64 = (0..3).map(|k| f[3 * k + i] * f[3 * k + j]).sum();
                e[3 * i + j] = 0.5 * (c - delta(i, j));
            }
        }
        let tr = e[0] + e[4] + e[8];
        let ee: f64 = e.iter().map(|x| x * x).sum();
        let psi = 0.5 * lambda * tr * tr + mu * ee;
        let mut s = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                s[3 * i + j] = lambda * tr * delta(i, j) + 2.0 * mu * e[3 * i + j];
            }
        }
        let mut p = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                p[3 * i + j] = (0..3).map(|k| f[3 * i + k] * s[3 * k + j]).sum();
            }
        }
        (psi, p, s)
    }
}

impl Constitutive for ClosedFormStvk {
    type Scratch = ();

    fn scratch(&self) {}

    fn stress(&self, f: &[f64; 9], _: &mut (), out: &mut [f64]) -> Result<(), EvalError> {
        let (psi, p, _) = self.stress_parts(f);
        out[0] = psi;
        out[1..10].copy_from_slice(&p);
        Ok(())
    }

    /// `A_iJkL = delta_ik S_JL + lambda F_iJ F_kL + mu (delta_JL (F F^T)_ik + F_iL F_kJ)`.
    fn tangent(&self, f: &[f64; 9], _: &mut (), out: &mut [f64]) -> Result<(), EvalError> {
        let LameParams { mu, lambda } = self.0;
        let (psi, p, s) = self.stress_parts(f);
        out[0] = psi;
        out[1..10].copy_from_slice(&p);
        let mut b = [0.0; 9];
        for i in 0..3 {
            for k in 0..3 {
                b[3 * i + k] = (0..3).map(|m| f[3 * i + m] * f[3 * k + m]).sum();
            }
        }
        for i in 0..3 {
            for jj in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        out[10 + (3 * i + jj) * 9 + 3 * k + l] = delta(i, k) * s[3 * jj + l]
                            + lambda * f[3 * i + jj] * f[3 * k + l]
                            + mu * (delta(jj, l) * b[3 * i + k] + f[3 * i + l] * f[3 * k + jj]);
                    }
                }
            }
        }
        Ok(())
    }
}

impl ClosedFormNeoHookean {
    fn parts(&self, f: &[f64; 9]) -> Result<(f64, [f64; 9], [f64; 9], f64), EvalError> {
        let LameParams { mu, lambda } = self.0;
        let j = det(f);
        if !(j > 0.0) {
            return Err(EvalError::NonInvertible(j));
        }
        let fi = inverse(f, j);
        let lnj = j.ln();
        let i1: f64 = f.iter().map(|x| x * x).sum();
        let psi = 0.5 * mu * (i1 - 3.0) - mu * lnj + 0.5 * lambda * lnj * lnj;
        let mut p = [0.0; 9];
        for i in 0..3 {
            for jj in 0..3 {
                // F^-T_iJ = (F^-1)_Ji
                p[3 * i + jj] = mu * f[3 * i + jj] + (lambda * lnj - mu) * fi[3 * jj + i];
            }
        }
        Ok((psi, p, fi, lnj))
    }
}

impl Constitutive for ClosedFormNeoHookean {
    type Scratch = ();

    fn scratch(&self) {}

    fn stress(&self, f: &[f64; 9], _: &mut (), out: &mut [f64]) -> Result<(), EvalError> {
        let (psi, p, _, _) = self.parts(f)?;
        out[0] = psi;
        out[1..10].copy_from_slice(&p);
        Ok(())
    }

    /// `A_iJkL = mu delta_ik delta_JL + lambda Fi_Ji Fi_Lk + (mu - lambda ln J) Fi_Jk Fi_Li`
    /// with `Fi = F^-1`.
    fn tangent(&self, f: &[f64; 9], _: &mut (), out: &mut [f64]) -> Result<(), EvalError> {
        let LameParams { mu, lambda } = self.0;
        let (psi, p, fi, lnj) = self.parts(f)?;
        out[0] = psi;
        out[1..10].copy_from_slice(&p);
        for i in 0..3 {
            for jj in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        out[10 + (3 * i + jj) * 9 + 3 * k + l] = mu * delta(i, k) * delta(jj, l)
                            + lambda * fi[3 * jj + i] * fi[3 * l + k]
                            + (mu - lambda * lnj) * fi[3 * jj + k] * fi[3 * l + i];
                    }
                }
            }
        }
        Ok(())
    }
}
