//! Finite-strain hyperelastic finite elements with constitutive models
//! written in principal logarithmic stretches.
//!
//! The constitutive core evaluates strain energies of the form
//! W(log λ₁, …, log λₙ) — an exponentiated Hencky model, the classical
//! quadratic Hencky model, and compressible Neo-Hooke/Gent comparison
//! models — through the spectral decomposition of the left Cauchy-Green
//! tensor, and assembles the consistent spatial, material, mixed and
//! Jaumann tangent moduli in principal axes. On top of that sit
//! isoparametric Q4/H8 elements, sparse assembly, a displacement-controlled
//! Newton solver, and a benchmark harness (uniaxial cube, 3D/2D footing,
//! arc buckling, Cook's membrane, material-point curves, uniaxial
//! calibration).

pub mod bench;
pub mod cli;
pub mod config;
mod error;
pub mod fem;
pub mod material;
pub mod output;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
