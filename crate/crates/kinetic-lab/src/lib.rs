//! Discrete-velocity verification laboratory for BGK kinetics.
//!
//! The crate implements the pieces needed to check, numerically and at desk
//! scale, the classical fluid-limit chain for the BGK collision model:
//!
//! * phase-space discretization: velocity quadrature grids, periodic spatial
//!   grids, macroscopic fields, and distribution storage ([`phase_space`]);
//! * the BGK operator, its linearization about a local Maxwellian, and the
//!   Fredholm machinery (nullspace projection, spectral gap, pseudoinverse)
//!   in the Maxwellian-weighted L2 space ([`collision`]);
//! * the Chapman-Enskog first correction and the Navier-Stokes constitutive
//!   law tau1 = -2 mu S with mu = rho tau R T ([`chapman_enskog`]);
//! * a 1-D-in-space kinetic solver with stiff relaxation handled exactly,
//!   used for remainder scans and entropy monitoring ([`solver`]);
//! * non-modal transient growth for linearized shear flows in the
//!   velocity-vorticity formulation ([`transient_growth`]).
//!
//! Everything is f64 and desk-scale: dense matrices, a few thousand velocity
//! nodes, spatial grids of a few hundred cells. The point is verifiable
//! numbers with stated tolerances, not throughput.

pub mod chapman_enskog;
pub mod collision;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod phase_space;
pub mod solver;
pub mod transient_growth;

pub use error::{Error, Result};

/// Default tolerances used by the verification checks.
pub mod tol {
    /// Quadrature identity tolerance (moment round trips, Gaussian moments).
    pub const QUAD: f64 = 1e-10;
    /// Nullspace membership and residual tolerance for the linearized operator.
    pub const NULL: f64 = 1e-10;
    /// Relative solvability tolerance for right-hand sides of L g = h.
    pub const SOLV: f64 = 1e-8;
    /// Orthonormality defect allowed in the nullspace basis.
    pub const ORTHO: f64 = 1e-12;
}
