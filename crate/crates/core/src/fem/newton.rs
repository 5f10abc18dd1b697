use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{apply_dirichlet, linear_solve, norm, Constitutive, FeModel, FemError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub max_iter: usize,
    /// Residual tolerance relative to the step's initial residual, which
    /// includes the effect of the prescribed-displacement increment.
    pub rtol: f64,
    /// Absolute residual floor.
    pub atol: f64,
    /// Increment tolerance relative to the first increment of a step.
    pub dtol: f64,
    pub load_steps: usize,
    pub max_bisections: u32,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iter: 25,
            rtol: 1e-10,
            atol: 1e-14,
            dtol: 1e-10,
            load_steps: 1,
            max_bisections: 4,
        }
    }
}

/// One attempted load increment.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepRecord {
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Free-DOF norm of the first linear right-hand side, `-R - K du_c`
    /// with `du_c` the Dirichlet increment. Residual tolerances are relative
    /// to it.
    pub initial_residual: f64,
}

/// Convergence history of a solve. Histories hold one entry per Newton
/// iteration over all attempted steps. An iteration is timed from assembly
/// and factorization through the solve, the update and the new residual.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual_norms: Vec<f64>,
    pub increment_norms: Vec<f64>,
    pub mean_iteration_ms: f64,
    pub converged: bool,
    pub steps: Vec<StepRecord>,
    pub bisections: u32,
}

impl NewtonReport {
    /// Iterations of the final step.
    pub fn last_step_residuals(&self) -> &[f64] {
        let n = self.steps.last().map_or(0, |s| s.iterations);
        &self.residual_norms[self.residual_norms.len() - n..]
    }

    /// `rho_{k+1} / rho_k^2` for the last two iterations of the final step
    /// whose scaled residual is still above `floor`. Residuals are scaled by
    /// the largest one of the step (initial residual included), which tracks
    /// the magnitude of the internal forces and hence the round-off level.
    /// Iterations below the floor only confirm the increment test.
    pub fn quadratic_constants(&self, floor: f64) -> Vec<f64> {
        let Some(step) = self.steps.last() else {
            return Vec::new();
        };
        let res = self.last_step_residuals();
        let scale = res.iter().copied().fold(step.initial_residual, f64::max);
        if scale == 0.0 {
            return Vec::new();
        }
        let mut rho: Vec<f64> = vec![step.initial_residual / scale];
        rho.extend(res.iter().map(|r| r / scale).take_while(|&r| r > floor));
        let k = rho.len();
        (k.saturating_sub(3)..k.saturating_sub(1)).map(|i| rho[i + 1] / (rho[i] * rho[i])).collect()
    }

    pub fn max_step_iterations(&self) -> usize {
        self.steps.iter().filter(|s| s.converged).map(|s| s.iterations).max().unwrap_or(0)
    }

    fn finish(&mut self, elapsed_ms: f64) {
        self.iterations = self.residual_norms.len();
        self.mean_iteration_ms = if self.iterations == 0 {
            0.0
        } else {
            elapsed_ms / self.iterations as f64
        };
    }
}

/// A failed solve: the cause, the history so far and the last converged state.
#[derive(Clone, Debug)]
pub struct NewtonFailure {
    pub cause: FemError,
    pub report: NewtonReport,
    /// Load factor of `u`.
    pub lambda: f64,
    pub u: Vec<f64>,
}

impl fmt::Display for NewtonFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (last converged load factor {}, {} iterations, {} bisections)",
            self.cause, self.lambda, self.report.iterations, self.report.bisections
        )
    }
}

impl std::error::Error for NewtonFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.cause)
    }
}

impl<K: Constitutive> FeModel<K> {
    /// Solves `R(u) = 0` at full load from `u = 0`.
    pub fn solve(&self, cfg: &NewtonConfig) -> Result<(Vec<f64>, NewtonReport), NewtonFailure> {
        self.solve_path(vec![0.0; self.dof_count()], 0.0, 1.0, cfg)
    }

    /// Continues an equilibrium `u0` at load factor `from` to load factor `to`
    /// in `cfg.load_steps` increments, halving an increment that fails by
    /// inversion, kernel domain error, linear-solve failure or non-convergence.
    pub fn solve_path(
        &self,
        u0: Vec<f64>,
        from: f64,
        to: f64,
        cfg: &NewtonConfig,
    ) -> Result<(Vec<f64>, NewtonReport), NewtonFailure> {
        let mut report = NewtonReport::default();
        let mut ms = 0.0;
        let mut u = u0;
        let mut current = from;
        if u.len() != self.dof_count() {
            let cause = FemError::Length {
                expected: self.dof_count(),
                got: u.len(),
            };
            return Err(NewtonFailure {
                cause,
                report,
                lambda: from,
                u,
            });
        }
        let steps = cfg.load_steps.max(1);
        let mut pending: Vec<(f64, u32)> = (1..=steps)
            .rev()
            .map(|i| (from + (to - from) * i as f64 / steps as f64, 0))
            .collect();
        while let Some((target, depth)) = pending.pop() {
            let mut trial = u.clone();
            match self.newton(&mut trial, target, cfg, &mut report, &mut ms) {
                Ok(()) => {
                    u = trial;
                    current = target;
                }
                Err(e) if e.is_recoverable() && depth < cfg.max_bisections => {
                    report.bisections += 1;
                    pending.push((target, depth + 1));
                    pending.push((0.5 * (current + target), depth + 1));
                }
                Err(cause) => {
                    report.finish(ms);
                    return Err(NewtonFailure {
                        cause,
                        report,
                        lambda: current,
                        u,
                    });
                }
            }
        }
        report.converged = true;
        report.finish(ms);
        Ok((u, report))
    }

    fn free_norm(r: &[f64], fixed: &[bool]) -> f64 {
        norm(&r.iter().zip(fixed).map(|(v, &f)| if f { 0.0 } else { *v }).collect::<Vec<_>>())
    }

    fn newton(
        &self,
        u: &mut [f64],
        lambda: f64,
        cfg: &NewtonConfig,
        report: &mut NewtonReport,
        ms: &mut f64,
    ) -> Result<(), FemError> {
        let g = self.dirichlet_at(lambda);
        let mut fixed = vec![false; self.dof_count()];
        for &(d, _) in &g {
            fixed[d] = true;
        }
        let mut step = StepRecord {
            lambda,
            ..Default::default()
        };
        let mut r_ref = 0.0;
        let mut du_first = None;
        let mut last = f64::NAN;
        let result = (|| {
            for it in 1..=cfg.max_iter {
                let t = Instant::now();
                let (r, mut k) = self.residual_and_tangent(u, lambda)?;
                let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
                let inc: Vec<(usize, f64)> = g.iter().map(|&(d, v)| (d, v - u[d])).collect();
                apply_dirichlet(&mut k, &mut rhs, &inc)?;
                if it == 1 {
                    r_ref = Self::free_norm(&rhs, &fixed);
                    step.initial_residual = r_ref;
                }
                let du = linear_solve(&k, &rhs)?;
                for (ui, di) in u.iter_mut().zip(&du) {
                    *ui += di;
                }
                let rn = Self::free_norm(&self.residual(u, lambda)?, &fixed);
                *ms += t.elapsed().as_secs_f64() * 1e3;
                let dn = norm(&du);
                report.residual_norms.push(rn);
                report.increment_norms.push(dn);
                step.iterations = it;
                last = rn;
                let d1 = *du_first.get_or_insert(dn);
                if rn <= (cfg.rtol * r_ref).max(cfg.atol) && dn <= cfg.dtol * d1 {
                    return Ok(());
                }
                if !rn.is_finite() {
                    break;
                }
            }
            Err(FemError::NoConvergence {
                iterations: step.iterations,
                residual: last,
            })
        })();
        step.converged = result.is_ok();
        report.steps.push(step);
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::CellFamily;
    use crate::fem::{BoundaryConditions, FeOptions};
    use crate::materials::{lame_from_young_poisson, make_stvk};
    use crate::mesh::beam;

    fn model(load: f64) -> FeModel {
        let m = beam(CellFamily::Q1Hex, [6, 1, 1]);
        let bc = BoundaryConditions::new()
            .clamp(&m, "clamp")
            .unwrap()
            .traction("load", [0.0, load, 0.0]);
        let k = make_stvk(lame_from_young_poisson(3000.0, 0.3).unwrap()).kernel().unwrap();
        FeModel::new(m, k, bc, FeOptions::default()).unwrap()
    }

    #[test]
    fn zero_load_converges_immediately() {
        let (u, rep) = model(0.0).solve(&NewtonConfig::default()).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn bending_converges_with_clamp_exact() {
        let m = model(-10.0);
        let (u, rep) = m.solve(&NewtonConfig::default()).unwrap();
        assert!(rep.converged && rep.iterations <= 25, "{rep:?}");
        assert_eq!(rep.residual_norms.len(), rep.iterations);
        for n in m.mesh().tagged_nodes("clamp") {
            assert_eq!(&u[3 * n..3 * n + 3], &[0.0; 3]);
        }
        let tip = u.iter().skip(1).step_by(3).fold(0.0f64, |a, &b| a.min(b));
        assert!(tip < -1.0, "tip deflection {tip}");
    }

    #[test]
    fn unsupported_mesh_fails_to_solve() {
        let m = beam(CellFamily::Q1Hex, [2, 1, 1]);
        let bc = BoundaryConditions::new().traction("load", [0.0, -1.0, 0.0]);
        let k = make_stvk(lame_from_young_poisson(3000.0, 0.3).unwrap()).kernel().unwrap();
        let model = FeModel::new(m, k, bc, FeOptions::default()).unwrap();
        let cfg = NewtonConfig {
            max_bisections: 0,
            ..Default::default()
        };
        let err = model.solve(&cfg).unwrap_err();
        assert!(matches!(err.cause, FemError::LinearSolve(_)), "{err}");
        assert_eq!(err.lambda, 0.0);
    }
}
