//! Pseudo-spectral laboratory for the semiclassical nonlinear Schrodinger
//! equation and its hydrodynamic (Madelung, extended quantum, Korteweg)
//! reformulations on periodic domains in one and two dimensions.
//!
//! Everything is generic over the working scalar through [`Real`]; the
//! concrete aliases at the crate root fix `f64`, which is what the command
//! line driver and the verification harnesses use.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};
use rustfft::FftNum;

pub mod asymptotics;
pub mod conserved;
pub mod data;
pub mod error;
pub mod field;
pub mod fit;
pub mod grid;
pub mod hydro;
pub mod kdv;
pub mod law;
pub mod madelung;
pub mod schrodinger;
pub mod suites;
pub mod weakqhd;

/// Floating point scalar the solvers are generic over.
///
/// Implemented for `f32` and `f64`. The tight default tolerances in the
/// verification suites assume `f64`; `f32` is useful for smoke tests and
/// memory-bound sweeps.
pub trait Real: Float + FloatConst + FromPrimitive + FftNum + Sum<Self> + fmt::Display + fmt::LowerExp {
    /// Shorthand for converting an `f64` literal into the working scalar.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// `x * x`.
    fn sq(self) -> Self {
        self * self
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the working scalar.
pub type Cplx<T> = num_complex::Complex<T>;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

// Concrete `f64` aliases used by the CLI and the test harnesses.
pub type Grid64 = grid::SpectralGrid<f64>;
pub type ComplexField64 = field::ComplexField<f64>;
pub type RealField64 = field::RealField<f64>;
pub type VectorField64 = field::VectorField<f64>;
pub type WaveState64 = schrodinger::WaveState<f64>;
pub type EulerState64 = hydro::SymmetricEulerState<f64>;
pub type ExtendedState64 = hydro::ExtendedState<f64>;
