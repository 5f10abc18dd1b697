//! Strain-energy models and their compiled stress/tangent kernels.
//!
//! A [`MaterialModel`] is nothing more than a scalar `psi` over the nine
//! components of `F` (leaf `F[k]`, row-major) plus named parameters. Built-in
//! models and user expressions go through the same path: [`MaterialKernel`]
//! differentiates `psi` once for `P = dpsi/dF` and again for
//! `A = dP/dF`, then compiles both to tapes.

mod builtin;
mod config;
mod kernel;

pub use builtin::{
    holzapfel_ogden_defaults, make_holzapfel_ogden, make_mooney_rivlin, make_neo_hookean, make_stvk,
    HolzapfelOgdenParams, MooneyRivlinParams,
};
pub use config::{FiberConfig, MaterialConfig, MaterialSource};
pub use kernel::{MaterialKernel, KernelScratch, FULL_LEN, STRESS_LEN};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{BuildError, CompileError, Expr, Op, ParseError, TensorExpr};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("incompressible limit not supported by displacement formulation (nu = {0})")]
    Incompressible(f64),
    #[error("parameter '{name}' = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },
    #[error("missing parameter '{0}'")]
    MissingParameter(String),
    #[error("unknown leaf '{0}' in strain energy")]
    UnknownLeaf(String),
    #[error("fiber vector {name} is not a unit vector (|{name}| = {norm})")]
    FiberNotUnit { name: &'static str, norm: f64 },
    #[error("unknown built-in material '{0}'")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Compile(#[from] CompileError),
}

/// Lamé constants in Pa.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LameParams {
    pub mu: f64,
    pub lambda: f64,
}

impl LameParams {
    pub fn new(mu: f64, lambda: f64) -> Result<Self, MaterialError> {
        if !(mu > 0.0) {
            return Err(MaterialError::InvalidParameter {
                name: "mu".into(),
                value: mu,
                reason: "must be positive".into(),
            });
        }
        if !(lambda > -2.0 / 3.0 * mu) {
            return Err(MaterialError::InvalidParameter {
                name: "lambda".into(),
                value: lambda,
                reason: format!("must exceed -2/3 mu = {}", -2.0 / 3.0 * mu),
            });
        }
        Ok(Self { mu, lambda })
    }

    pub fn from_young_poisson(young: f64, poisson: f64) -> Result<Self, MaterialError> {
        lame_from_young_poisson(young, poisson)
    }
}

/// `mu = E / (2 (1 + nu))`, `lambda = E nu / ((1 + nu)(1 - 2 nu))`.
pub fn lame_from_young_poisson(young: f64, poisson: f64) -> Result<LameParams, MaterialError> {
    if poisson == 0.5 {
        return Err(MaterialError::Incompressible(poisson));
    }
    if !(young > 0.0) {
        return Err(MaterialError::InvalidParameter {
            name: "E".into(),
            value: young,
            reason: "must be positive".into(),
        });
    }
    if !(poisson > -1.0 && poisson < 0.5) {
        return Err(MaterialError::InvalidParameter {
            name: "nu".into(),
            value: poisson,
            reason: "must lie in (-1, 0.5)".into(),
        });
    }
    let mu = young / (2.0 * (1.0 + poisson));
    let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
    LameParams::new(mu, lambda)
}

/// One entry of a model's parameter schema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub unit: String,
    pub value: f64,
    /// Exclusive lower bound, if any.
    pub min: Option<f64>,
}

impl ParamSpec {
    pub fn new(name: &str, unit: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            unit: unit.to_string(),
            value,
            min: None,
        }
    }

    pub fn positive(mut self) -> Self {
        self.min = Some(0.0);
        self
    }

    fn check(&self) -> Result<(), MaterialError> {
        if !self.value.is_finite() {
            return Err(MaterialError::InvalidParameter {
                name: self.name.clone(),
                value: self.value,
                reason: "must be finite".into(),
            });
        }
        if let Some(m) = self.min {
            if !(self.value > m) {
                return Err(MaterialError::InvalidParameter {
                    name: self.name.clone(),
                    value: self.value,
                    reason: format!("must exceed {m}"),
                });
            }
        }
        Ok(())
    }
}

/// Reference-configuration fiber and sheet directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fibers {
    pub f0: [f64; 3],
    pub s0: [f64; 3],
}

impl Fibers {
    pub fn new(f0: [f64; 3], s0: [f64; 3]) -> Result<Self, MaterialError> {
        for (name, v) in [("f0", f0), ("s0", s0)] {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if !((norm - 1.0).abs() <= 1e-12) {
                return Err(MaterialError::FiberNotUnit { name, norm });
            }
        }
        Ok(Self { f0, s0 })
    }
}

/// A strain-energy density over `F` and named parameters.
#[derive(Clone, Debug)]
pub struct MaterialModel {
    name: String,
    params: Vec<ParamSpec>,
    psi: Expr,
    fibers: Option<Fibers>,
}

impl MaterialModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn psi(&self) -> &Expr {
        &self.psi
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn fibers(&self) -> Option<&Fibers> {
        self.fibers.as_ref()
    }

    pub fn kernel(&self) -> Result<MaterialKernel, MaterialError> {
        MaterialKernel::compile(self)
    }
}

/// Registers a user strain energy. `psi` may reference only `F[0..9]` and
/// parameters declared in `schema`.
pub fn author_material(name: &str, psi: Expr, schema: Vec<ParamSpec>) -> Result<MaterialModel, MaterialError> {
    with_fibers(name, psi, schema, None)
}

pub(crate) fn with_fibers(
    name: &str,
    psi: Expr,
    schema: Vec<ParamSpec>,
    fibers: Option<Fibers>,
) -> Result<MaterialModel, MaterialError> {
    for p in &schema {
        p.check()?;
    }
    for leaf in psi.leaves() {
        match &leaf {
            Op::Var(n, k) if &**n == "F" && *k < 9 => {}
            Op::Param(n) if schema.iter().any(|p| *p.name == **n) => {}
            Op::Var(n, k) => return Err(MaterialError::UnknownLeaf(format!("{n}[{k}]"))),
            Op::Param(n) => return Err(MaterialError::UnknownLeaf(n.to_string())),
            _ => {}
        }
    }
    Ok(MaterialModel {
        name: name.to_string(),
        params: schema,
        psi,
        fibers,
    })
}

/// Symbolic kinematic quantities over the deformation-gradient leaves.
#[derive(Clone, Debug)]
pub struct Kinematics {
    pub f: TensorExpr,
    /// `C = F^T F`
    pub c: TensorExpr,
    /// `E = (C - I) / 2`
    pub e: TensorExpr,
    pub j: Expr,
    /// `tr C`
    pub i1: Expr,
    /// `((tr C)^2 - tr(C^2)) / 2`
    pub i2: Expr,
}

impl Kinematics {
    pub fn new() -> Self {
        let f = TensorExpr::variable("F", 3, 3);
        let c = f.transpose().matmul(&f).expect("3x3");
        let e = c
            .sub(&TensorExpr::identity(3))
            .expect("3x3")
            .scale(&Expr::constant(0.5));
        let j = f.det3().expect("3x3");
        let i1 = c.trace().expect("square");
        let trc2 = c.matmul(&c).expect("3x3").trace().expect("square");
        let i2 = 0.5 * (i1.powi(2) - trc2);
        Self { f, c, e, j, i1, i2 }
    }
}

impl Default for Kinematics {
    fn default() -> Self {
        Self::new()
    }
}
