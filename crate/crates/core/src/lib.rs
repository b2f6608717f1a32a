//! Finite-speed propagation for degenerate diffusion `u_t = a(u) Δu`.

pub mod analysis;
pub mod config;
pub mod interp;
pub mod io;
pub mod laws;
pub mod pipeline;
pub mod quad;
pub mod solver;
pub mod structure;
