//! Verification harness: closed-form reference kernels, finite-difference
//! checks, manufactured solutions and the beam benchmark.

mod beam;
mod fd;
mod mms;
mod oracle;

pub use beam::{run_beam_benchmark, BeamMaterial, BeamOptions, BeamResult};
pub use fd::{fd_check_kernel, fd_check_model, matmul3, random_deformation, random_rotation, FdReport};
pub use mms::{run_mms_convergence, ConvergenceRow, ConvergenceTable, MmsCase, MMS_DISPLACEMENT};
pub use oracle::{ClosedFormNeoHookean, ClosedFormStvk};

use thiserror::Error;

use crate::fem::{FemError, NewtonFailure};
use crate::materials::MaterialError;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("reference vector has zero norm")]
    ZeroReference,
    #[error("length mismatch: {0} vs {1}")]
    Length(usize, usize),
    #[error("manufactured solution: {0}")]
    Expression(String),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Newton(Box<NewtonFailure>),
}

impl From<NewtonFailure> for VerifyError {
    fn from(e: NewtonFailure) -> Self {
        VerifyError::Newton(Box::new(e))
    }
}

/// `||u - v|| / ||v||` in the Euclidean norm.
pub fn rel_l2_error(u: &[f64], v: &[f64]) -> Result<f64, VerifyError> {
    if u.len() != v.len() {
        return Err(VerifyError::Length(u.len(), v.len()));
    }
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nv == 0.0 {
        return Err(VerifyError::ZeroReference);
    }
    let d = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(d / nv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::CellFamily;
    use crate::materials::{make_neo_hookean, make_stvk, LameParams, MaterialKernel};
    use rand::{rngs::StdRng, SeedableRng};
    use std::sync::Arc;

    #[test]
    fn relative_error_basics() {
        let v = [1.0, -2.0, 2.0];
        assert_eq!(rel_l2_error(&v, &v).unwrap(), 0.0);
        assert_eq!(rel_l2_error(&[2.0, -4.0, 4.0], &v).unwrap(), 1.0);
        assert_eq!(rel_l2_error(&[0.0; 3], &v).unwrap(), 1.0);
        assert!(matches!(rel_l2_error(&v, &[0.0; 3]), Err(VerifyError::ZeroReference)));
        assert!(matches!(rel_l2_error(&v, &[1.0]), Err(VerifyError::Length(3, 1))));
    }

    fn lame() -> LameParams {
        LameParams::from_young_poisson(3000.0, 0.3).unwrap()
    }

    #[test]
    fn oracle_kernels_pass_fd_checks() {
        let mut rng = StdRng::seed_from_u64(7);
        let st = ClosedFormStvk(lame());
        let nh = ClosedFormNeoHookean(lame());
        for _ in 0..50 {
            let f = random_deformation(&mut rng, 0.25, (0.7, 1.5));
            let a = fd_check_kernel(&st, &f, 1e-6).unwrap();
            let b = fd_check_kernel(&nh, &f, 1e-6).unwrap();
            assert!(a.stress < 1e-6 && a.tangent < 1e-5, "{a:?}");
            assert!(b.stress < 1e-6 && b.tangent < 1e-5, "{b:?}");
        }
    }

    #[test]
    fn oracle_matches_generated_kernels() {
        let mut rng = StdRng::seed_from_u64(11);
        let pairs: [(MaterialKernel, Box<dyn Fn(&[f64; 9]) -> Vec<f64>>); 2] = [
            (make_stvk(lame()).kernel().unwrap(), {
                let k = ClosedFormStvk(lame());
                Box::new(move |f| {
                    let mut out = vec![0.0; 91];
                    crate::fem::Constitutive::tangent(&k, f, &mut (), &mut out).unwrap();
                    out
                })
            }),
            (make_neo_hookean(lame()).kernel().unwrap(), {
                let k = ClosedFormNeoHookean(lame());
                Box::new(move |f| {
                    let mut out = vec![0.0; 91];
                    crate::fem::Constitutive::tangent(&k, f, &mut (), &mut out).unwrap();
                    out
                })
            }),
        ];
        for (gen, closed) in &pairs {
            for _ in 0..20 {
                let f = random_deformation(&mut rng, 0.3, (0.7, 1.5));
                let (psi, p, a) = gen.eval(&f).unwrap();
                let c = closed(&f);
                let mut g = vec![psi];
                g.extend_from_slice(&p);
                g.extend_from_slice(&a);
                assert!(fd::rel_err(&c, &g) < 1e-13, "{}", gen.name());
            }
        }
    }

    #[test]
    fn mms_body_force_matches_divergence() {
        let case = MmsCase::standard(&make_stvk(lame())).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        let pts: Vec<[f64; 3]> = (0..20)
            .map(|_| {
                use rand::Rng;
                [rng.gen(), rng.gen(), rng.gen()]
            })
            .collect();
        assert!(case.fd_divergence_error(&pts, 1e-4) < 1e-6);
    }

    #[test]
    fn affine_and_zero_fields_need_no_body_force() {
        let m = make_neo_hookean(lame());
        for u in [["0", "0", "0"], ["0.1*x + 0.02*y", "-0.05*z", "0.03*x + 0.01"]] {
            let case = MmsCase::parse(&m, u).unwrap();
            for x in [[0.1, 0.2, 0.3], [0.9, 0.5, 0.0]] {
                assert!(case.body_force_at(x).iter().all(|v| v.abs() < 1e-12));
            }
        }
        assert!(matches!(
            MmsCase::parse(&m, ["w", "0", "0"]),
            Err(VerifyError::Expression(_))
        ));
    }

    #[test]
    fn mms_interpolant_is_exact_for_affine_fields() {
        let case = Arc::new(MmsCase::parse(&make_stvk(lame()), ["0.01*x", "0.02*y - 0.01*x", "0.005*z"]).unwrap());
        let cfg = crate::fem::NewtonConfig::default();
        let (_, err, report) = case.solve_level(CellFamily::P1Tet, 2, &cfg).unwrap();
        assert!(err < 1e-10, "{err}");
        assert!(report.converged);
    }
}
