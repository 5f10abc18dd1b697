//! Symbolic scalar/tensor expressions, exact differentiation, and lowering to
//! executable instruction tapes.
//!
//! Strain energies are written once as [`Expr`] DAGs over the nine components
//! of the deformation gradient. Stress and tangent follow from
//! [`differentiate`], and [`compile_tape`] turns the results into a [`Kernel`]
//! that evaluates them at a quadrature point.

mod diff;
mod node;
mod parse;
mod simplify;
mod tape;
mod tensor;

pub use diff::{differentiate, jacobian, substitute, Differentiator, VarRef};
pub use node::{int_pow, Env, Expr, Op};
pub use parse::{parse, parse_scalar, Scope, Value};
pub use simplify::{powf, simplify};
pub use tape::{compile_tape, Input, InputLayout, Instr, Kernel, OpCode};
pub use tensor::{Shape, TensorExpr};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("shape mismatch in {op}: {left} vs {right}")]
    ShapeMismatch {
        op: &'static str,
        left: Shape,
        right: Shape,
    },
    #[error("{op} requires a 3x3 tensor, got {shape}")]
    Not3x3 { op: &'static str, shape: Shape },
    #[error("{op} requires a square tensor, got {shape}")]
    NotSquare { op: &'static str, shape: Shape },
    #[error("expected a scalar, got {0}")]
    NotScalar(Shape),
    #[error("expected {expected} entries, got {got}")]
    EntryCount { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("leaf '{0}' is not bound in the input layout")]
    UnboundLeaf(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("non-invertible deformation state ({0})")]
    Domain(&'static str),
    #[error("non-invertible deformation state (det F = {0})")]
    NonInvertible(f64),
    #[error("unbound leaf '{0}'")]
    Unbound(String),
    #[error("expected {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("scratch buffer too small for tape")]
    Scratch,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("type error: {0}")]
    Type(String),
    #[error(transparent)]
    Build(#[from] BuildError),
}
