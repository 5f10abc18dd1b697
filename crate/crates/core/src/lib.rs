//! Hyperelastic finite elements driven by symbolic strain energies.
//!
//! A material is a scalar expression `psi(F)` ([`expr`], [`materials`]).
//! Its first Piola-Kirchhoff stress and consistent tangent are derived
//! symbolically and compiled to instruction tapes, which the total-Lagrangian
//! assembly in [`fem`] evaluates at every quadrature point of P1/P2
//! tetrahedra or Q1/serendipity-Q2 hexahedra ([`elements`], [`mesh`]).
//! [`verify`] holds the reference kernels, manufactured solutions and beam
//! benchmarks; [`live`] runs interactive probe sessions over WebSocket.

pub mod cli;
pub mod elements;
pub mod expr;
pub mod fem;
pub mod live;
pub mod materials;
pub mod mesh;
pub mod verify;
