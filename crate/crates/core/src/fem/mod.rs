//! Total-Lagrangian finite-element engine: DOF numbering, residual and
//! tangent assembly, Dirichlet elimination, a direct sparse solver and the
//! Newton driver.

mod assembly;
mod bc;
mod dofmap;
mod linear;
mod newton;
mod sparse;

pub use assembly::{FeModel, FeOptions};
pub use bc::{BodyForce, BoundaryConditions, Dirichlet};
pub use dofmap::DofMap;
pub use linear::{apply_dirichlet, dense_solve, linear_solve};
pub use newton::{NewtonConfig, NewtonFailure, NewtonReport};
pub use sparse::{Pattern, SparseMatrixCSR};

use thiserror::Error;

use crate::elements::ElementError;
use crate::expr::EvalError;
use crate::materials::{KernelScratch, MaterialKernel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("element {element} inverted (det F = {det:e})")]
    Inverted { element: usize, det: f64 },
    #[error("element {element}: {source}")]
    Kernel {
        element: usize,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Geometry(#[from] ElementError),
    #[error("no DOF ({node}, {component}); mesh has {nodes} nodes")]
    NoSuchDof { node: usize, component: usize, nodes: usize },
    #[error("duplicate Dirichlet condition on node {node}, component {component}")]
    DuplicateDirichlet { node: usize, component: usize },
    #[error("unknown facet tag '{tag}' (mesh has {known:?})")]
    UnknownTag { tag: String, known: Vec<String> },
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("vector length {got} does not match {expected} DOFs")]
    Length { expected: usize, got: usize },
}

impl FemError {
    /// Whether a smaller load increment might succeed.
    pub fn is_recoverable(&self) -> bool {
        matches!(
            self,
            FemError::Inverted { .. } | FemError::Kernel { .. } | FemError::LinearSolve(_) | FemError::NoConvergence { .. }
        )
    }
}

/// Pointwise constitutive law consumed by assembly: `(psi, P)` and
/// `(psi, P, A)` at a deformation gradient `F` (row-major). Output layouts
/// match [`crate::materials::STRESS_LEN`] and [`crate::materials::FULL_LEN`].
pub trait Constitutive: Sync {
    type Scratch: Send;
    fn scratch(&self) -> Self::Scratch;
    fn stress(&self, f: &[f64; 9], s: &mut Self::Scratch, out: &mut [f64]) -> Result<(), EvalError>;
    fn tangent(&self, f: &[f64; 9], s: &mut Self::Scratch, out: &mut [f64]) -> Result<(), EvalError>;
}

impl Constitutive for MaterialKernel {
    type Scratch = KernelScratch;

    fn scratch(&self) -> KernelScratch {
        MaterialKernel::scratch(self)
    }

    fn stress(&self, f: &[f64; 9], s: &mut KernelScratch, out: &mut [f64]) -> Result<(), EvalError> {
        self.eval_stress(f, s, out)
    }

    fn tangent(&self, f: &[f64; 9], s: &mut KernelScratch, out: &mut [f64]) -> Result<(), EvalError> {
        self.eval_full(f, s, out)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
