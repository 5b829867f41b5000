//! Superintegrable extensions of Hamiltonian systems: exact construction and verification.

pub mod expr;
pub mod catalog;
pub mod dynamics;
pub mod extension;
pub mod job;
pub mod poisson;
pub mod verify;
