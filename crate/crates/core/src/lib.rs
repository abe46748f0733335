//! Finite-solenoid vector potentials and magnetic Schrödinger operators on a
//! truncated plane, with the resolvent machinery to compare them.
//!
//! * [`potential`]: azimuthal vector potential of finite and infinite solenoids.
//! * [`operator`]: Peierls-phase lattice Hamiltonians with barrier or hard-wall disks.
//! * [`resolvent`]: shifted solves `(H − z)⁻¹ψ` and resolvent distances.
//! * [`experiment`]: parameter sweeps over barrier height and solenoid length.

pub mod experiment;
pub mod linalg;
pub mod operator;
pub mod potential;
pub mod resolvent;
