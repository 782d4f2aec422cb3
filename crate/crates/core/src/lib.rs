//! Numerical engines for Aubry-Mather duality on small model systems.
//!
//! * [`convex`]: sampled convex profiles, Legendre-Fenchel transforms, faces, irrationality.
//! * [`fk`]: the discrete Frenkel-Kontorova chain and its beta function over Farey fractions.
//! * [`stable_norm`]: stable norms of periodic weighted graphs, unit-ball sections, lattice counting.
//! * [`torus`]: height sequences modulo one and cut-and-project quasicrystals.

pub mod convex;
pub mod fk;
pub mod stable_norm;
pub mod torus;
