//! Secure network coding laboratory.
//!
//! Finite-field arithmetic, layered network models with executable codes,
//! exact leakage measurement under deterministic, adaptive and active
//! eavesdroppers, capacity calculators and constructive secure codes.

pub mod gf;
pub mod netmodel;
pub mod attack;
pub mod secrecy;
pub mod capacity;
pub mod codegen;
