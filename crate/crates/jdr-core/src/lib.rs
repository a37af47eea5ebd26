//! End-to-end simulation of a quantum-computer-enabled joint detection
//! receiver (JDR) for BPSK coherent optical communication.
//!
//! The pipeline maps physical optomechanical transducer parameters to an
//! effective attenuation/heating channel ([`physmodel`]), transduces the
//! resulting microwave displaced-thermal states into qubit density matrices
//! via Jaynes-Cummings evolution ([`jc`]), discriminates codeword states with
//! trained variational circuits or optimized unitaries ([`decoder`] on top of
//! the density-matrix simulator in [`qsim`]), and compares against classical
//! pulse-by-pulse limits and Holevo capacities ([`limits`]).
//!
//! With the default `parallel` feature, restarts, sweep grid points and
//! per-codeword cost evaluation run on rayon; disabling the feature yields a
//! bit-identical sequential build.

pub mod constants;
pub mod decoder;
pub mod error;
pub mod exec;
pub mod fock;
pub mod jc;
pub mod limits;
pub mod physmodel;
pub mod qsim;
pub mod quad;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;
