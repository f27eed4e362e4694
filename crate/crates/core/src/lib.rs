//! Hole-burnt engineered bosonic states.
//!
//! Builds even coherent, binomial and Kerr states together with their
//! vacuum-filtered and single-photon-added variants on a truncated Fock
//! basis, evaluates the closed-form moment series for all nine states,
//! and computes higher-order antibunching, Hong-Mandel squeezing and
//! sub-Poissonian witnesses plus the linear-entropy entanglement potential.
//! Every closed form has a direct numerical counterpart on the truncated
//! basis that it is checked against.

pub mod dump;
pub mod entanglement;
pub mod error;
pub mod figures;
pub mod fock;
pub mod moments;
pub mod par;
pub mod special;
pub mod states;
pub mod sweep;
pub mod witnesses;

pub use error::{Error, Result};
pub use fock::FockVector;
pub use num_complex::Complex64 as C64;
pub use states::{Engineering, Family, StateSpec};
