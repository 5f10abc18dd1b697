use std::sync::Arc;

use super::{MaterialError, MaterialModel};
use crate::expr::{compile_tape, jacobian, EvalError, Expr, InputLayout, Kernel, VarRef};

/// Outputs of the stress tape: `psi` then `P` row-major.
pub const STRESS_LEN: usize = 10;
/// Outputs of the full tape: `psi`, `P`, then `A[(ij),(kl)]` row-major.
pub const FULL_LEN: usize = 91;

#[derive(Debug)]
struct Tapes {
    stress: Kernel,
    full: Kernel,
    guarded: bool,
}

/// Compiled `(psi, P)` and `(psi, P, A)` tapes for one material, with its
/// parameter values bound. Cheap to clone and safe to share across threads.
#[derive(Clone, Debug)]
pub struct MaterialKernel {
    tapes: Arc<Tapes>,
    params: Vec<f64>,
    name: String,
}

/// Per-thread buffers for [`MaterialKernel`] evaluation.
#[derive(Clone, Debug)]
pub struct KernelScratch {
    inputs: Vec<f64>,
    stress: Vec<f64>,
    full: Vec<f64>,
}

fn det9(f: &[f64; 9]) -> f64 {
    f[0] * (f[4] * f[8] - f[5] * f[7]) - f[1] * (f[3] * f[8] - f[5] * f[6]) + f[2] * (f[3] * f[7] - f[4] * f[6])
}

impl MaterialKernel {
    pub fn compile(model: &MaterialModel) -> Result<Self, MaterialError> {
        let vars: Vec<VarRef> = (0..9).map(|k| VarRef::new("F", k)).collect();
        let psi = model.psi().clone();
        let p: Vec<Expr> = jacobian(std::slice::from_ref(&psi), &vars).remove(0);
        let a = jacobian(&p, &vars);

        let names: Vec<&str> = model.params().iter().map(|s| s.name.as_str()).collect();
        let layout = InputLayout::new().var("F", 9).params(names.iter().copied());

        let mut outs = Vec::with_capacity(FULL_LEN);
        outs.push(psi);
        outs.extend(p);
        let stress = compile_tape(&outs, &layout)?;
        outs.extend(a.into_iter().flatten());
        let full = compile_tape(&outs, &layout)?;
        let guarded = full.has_guarded_ops();
        Ok(Self {
            tapes: Arc::new(Tapes { stress, full, guarded }),
            params: model.params().iter().map(|s| s.value).collect(),
            name: model.name().to_string(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stress_tape(&self) -> &Kernel {
        &self.tapes.stress
    }

    pub fn full_tape(&self) -> &Kernel {
        &self.tapes.full
    }

    pub fn param_values(&self) -> &[f64] {
        &self.params
    }

    pub fn scratch(&self) -> KernelScratch {
        let mut inputs = vec![0.0; 9];
        inputs.extend_from_slice(&self.params);
        KernelScratch {
            inputs,
            stress: self.tapes.stress.scratch(),
            full: self.tapes.full.scratch(),
        }
    }

    fn load(&self, f: &[f64; 9], s: &mut KernelScratch) -> Result<(), EvalError> {
        if self.tapes.guarded {
            let d = det9(f);
            if !(d > 0.0) {
                return Err(EvalError::NonInvertible(d));
            }
        }
        s.inputs[..9].copy_from_slice(f);
        Ok(())
    }

    /// Writes `psi` and `P` into `out[0..10]`.
    pub fn eval_stress(&self, f: &[f64; 9], s: &mut KernelScratch, out: &mut [f64]) -> Result<(), EvalError> {
        self.load(f, s)?;
        self.tapes.stress.eval_into(&s.inputs, &mut s.stress, &mut out[..STRESS_LEN])
    }

    /// Writes `psi`, `P` and `A` into `out[0..91]`.
    pub fn eval_full(&self, f: &[f64; 9], s: &mut KernelScratch, out: &mut [f64]) -> Result<(), EvalError> {
        self.load(f, s)?;
        self.tapes.full.eval_into(&s.inputs, &mut s.full, &mut out[..FULL_LEN])
    }

    /// Convenience evaluation with fresh buffers: `(psi, P, A)`.
    pub fn eval(&self, f: &[f64; 9]) -> Result<(f64, [f64; 9], Vec<f64>), EvalError> {
        let mut s = self.scratch();
        let mut out = vec![0.0; FULL_LEN];
        self.eval_full(f, &mut s, &mut out)?;
        let mut p = [0.0; 9];
        p.copy_from_slice(&out[1..10]);
        Ok((out[0], p, out[10..].to_vec()))
    }
}
