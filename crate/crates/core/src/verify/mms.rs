//! Manufactured solutions on the unit cube.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::{rel_l2_error, VerifyError};
use crate::elements::CellFamily;
use crate::expr::{compile_tape, jacobian, parse_scalar, substitute, Expr, InputLayout, Kernel, Op, Scope, Value, VarRef};
use crate::fem::{BodyForce, BoundaryConditions, FeModel, FeOptions, NewtonConfig, NewtonReport};
use crate::materials::MaterialModel;
use crate::mesh::generate_box;

/// `u = 1e-2 z (e^x, e^y, e^z)`.
pub const MMS_DISPLACEMENT: [&str; 3] = ["1e-2*z*exp(x)", "1e-2*z*exp(y)", "1e-2*z*exp(z)"];

/// A displacement field in reference coordinates `X[0..3]` together with the
/// body force `f = -Div P(I + Grad u)` that makes it an equilibrium.
pub struct MmsCase {
    pub u_exact: [Expr; 3],
    pub body_force: [Expr; 3],
    model: MaterialModel,
    u_tape: Kernel,
    f_tape: Kernel,
    p_tape: Kernel,
    params: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(h_prev / h)`.
    pub order: Option<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTable {
    pub family: String,
    pub material: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Order between the last two refinements.
    pub fn asymptotic_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

fn x_var(i: u16) -> Expr {
    Expr::var("X", i)
}

impl MmsCase {
    pub fn new(model: &MaterialModel, u_exact: [Expr; 3]) -> Result<Self, VerifyError> {
        for e in &u_exact {
            for leaf in e.leaves() {
                match leaf {
                    Op::Var(n, i) if &*n == "X" && i < 3 => {}
                    Op::Var(n, i) => return Err(VerifyError::Expression(format!("unknown coordinate {n}[{i}]"))),
                    Op::Param(n) => return Err(VerifyError::Expression(format!("unknown symbol '{n}'"))),
                    _ => {}
                }
            }
        }
        let xs: Vec<VarRef> = (0..3).map(|i| VarRef::new("X", i)).collect();
        let grad = jacobian(&u_exact, &xs);
        let fvars: Vec<VarRef> = (0..9).map(|k| VarRef::new("F", k)).collect();
        let mut map = HashMap::new();
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { Expr::one() } else { Expr::zero() };
                map.insert(fvars[3 * i + j].clone(), delta + &grad[i][j]);
            }
        }
        let p_f = jacobian(std::slice::from_ref(model.psi()), &fvars).remove(0);
        let p_x: Vec<Expr> = p_f.iter().map(|p| substitute(p, &map)).collect();
        let dp = jacobian(&p_x, &xs);
        let body: Vec<Expr> = (0..3)
            .map(|i| -(dp[3 * i][0].clone() + &dp[3 * i + 1][1] + &dp[3 * i + 2][2]))
            .collect();
        let names: Vec<&str> = model.params().iter().map(|p| p.name.as_str()).collect();
        let layout = InputLayout::new().var("X", 3).params(names.iter().copied());
        let compile = |es: &[Expr]| compile_tape(es, &layout).map_err(|e| VerifyError::Expression(e.to_string()));
        Ok(Self {
            u_tape: compile(&u_exact)?,
            f_tape: compile(&body)?,
            p_tape: compile(&p_x)?,
            params: model.params().iter().map(|p| p.value).collect(),
            body_force: [body[0].clone(), body[1].clone(), body[2].clone()],
            u_exact,
            model: model.clone(),
        })
    }

    /// Parses each component with `x`, `y`, `z` bound to the reference coordinates.
    pub fn parse(model: &MaterialModel, u: [&str; 3]) -> Result<Self, VerifyError> {
        let scope = Scope::new()
            .with("x", Value::Scalar(x_var(0)))
            .with("y", Value::Scalar(x_var(1)))
            .with("z", Value::Scalar(x_var(2)));
        let mut parsed = Vec::with_capacity(3);
        for s in u {
            parsed.push(parse_scalar(s, &scope).map_err(|e| VerifyError::Expression(e.to_string()))?);
        }
        let [a, b, c]: [Expr; 3] = parsed.try_into().expect("three components");
        Self::new(model, [a, b, c])
    }

    pub fn standard(model: &MaterialModel) -> Result<Self, VerifyError> {
        Self::parse(model, MMS_DISPLACEMENT)
    }

    pub fn model(&self) -> &MaterialModel {
        &self.model
    }

    fn eval3(&self, tape: &Kernel, x: [f64; 3]) -> Vec<f64> {
        let mut inputs = x.to_vec();
        inputs.extend_from_slice(&self.params);
        tape.eval(&inputs).expect("manufactured fields are smooth on the cube")
    }

    pub fn displacement(&self, x: [f64; 3]) -> [f64; 3] {
        let v = self.eval3(&self.u_tape, x);
        [v[0], v[1], v[2]]
    }

    pub fn body_force_at(&self, x: [f64; 3]) -> [f64; 3] {
        let v = self.eval3(&self.f_tape, x);
        [v[0], v[1], v[2]]
    }

    /// `P(X)` row-major.
    pub fn stress_at(&self, x: [f64; 3]) -> [f64; 9] {
        let v = self.eval3(&self.p_tape, x);
        std::array::from_fn(|k| v[k])
    }

    /// Worst relative mismatch between `f` and `-Div P` by central differences
    /// of `P` at the given points.
    pub fn fd_divergence_error(&self, points: &[[f64; 3]], h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for &x in points {
            let f = self.body_force_at(x);
            let mut div = [0.0; 3];
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (pp, pm) = (self.stress_at(xp), self.stress_at(xm));
                for i in 0..3 {
                    div[i] -= (pp[3 * i + j] - pm[3 * i + j]) / (2.0 * h);
                }
            }
            let scale = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            let diff = (0..3).map(|i| (f[i] - div[i]).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
        }
        worst
    }

    /// FE model on an `n^3` unit cube with `u_exact` on the whole boundary and
    /// the manufactured body force.
    pub fn model_on(self: &Arc<Self>, family: CellFamily, n: usize) -> Result<FeModel, VerifyError> {
        let mesh = generate_box(family, [n, n, n], [1.0, 1.0, 1.0]);
        let boundary = mesh.boundary_nodes();
        let me = Arc::clone(self);
        let u = Arc::clone(self);
        let bc = BoundaryConditions::new()
            .prescribe(&mesh, &boundary, move |x| u.displacement(x))
            .body(BodyForce::Field(Arc::new(move |x| me.body_force_at(x))));
        let kernel = self.model.kernel()?;
        Ok(FeModel::new(mesh, kernel, bc, FeOptions::default())?)
    }

    /// Nodal interpolant of `u_exact`.
    pub fn interpolate(&self, model: &FeModel) -> Vec<f64> {
        model.mesh().vertices().iter().flat_map(|&x| self.displacement(x)).collect()
    }

    /// Solves one level and returns `(dofs, error, report)`.
    pub fn solve_level(
        self: &Arc<Self>,
        family: CellFamily,
        n: usize,
        cfg: &NewtonConfig,
    ) -> Result<(usize, f64, NewtonReport), VerifyError> {
        let model = self.model_on(family, n)?;
        let (u, report) = model.solve(cfg).map_err(|e| VerifyError::Newton(Box::new(e)))?;
        let exact = self.interpolate(&model);
        Ok((model.dof_count(), rel_l2_error(&u, &exact)?, report))
    }
}

/// Solves the case on `n^3` cubes for each `n` in `levels` (increasing).
/// On failure the table built so far is returned with the error.
pub fn run_mms_convergence(
    case: &Arc<MmsCase>,
    family: CellFamily,
    levels: &[usize],
    cfg: &NewtonConfig,
) -> Result<ConvergenceTable, (VerifyError, ConvergenceTable)> {
    let mut table = ConvergenceTable {
        family: family.name().to_string(),
        material: case.model.name().to_string(),
        rows: Vec::new(),
    };
    for &n in levels {
        match case.solve_level(family, n, cfg) {
            Ok((dofs, error, report)) => {
                let h = 1.0 / n as f64;
                let order = table
                    .rows
                    .last()
                    .map(|p: &ConvergenceRow| (p.error / error).ln() / (p.h / h).ln());
                table.rows.push(ConvergenceRow {
                    n,
                    h,
                    dofs,
                    error,
                    order,
                    iterations: report.iterations,
                });
            }
            Err(e) => return Err((e, table)),
        }
    }
    Ok(table)
}
