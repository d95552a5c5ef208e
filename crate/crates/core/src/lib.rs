//! Equilibria of Nash games among Stackelberg leaders.
//!
//! Every leader's feasible region is a finite union of polyhedra described by a
//! complementarity system. Convexifying each region with Balas' extended
//! formulation turns the game into a linear complementarity problem whose
//! solutions decompose into mixed strategies over the original regions.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod budget;
pub mod energy;
pub mod instances;
pub mod lcp;
pub mod linalg;
pub mod lp;
pub mod nash;
pub mod nasp;
pub mod rng;

pub use budget::{Budget, Unlimited};
pub use linalg::Matrix;
pub use lp::{is_feasible, solve_lp, LinearProgram, LpError, LpOutcome, Polyhedron};

/// Numerical tolerances shared by the solvers.
pub mod tol {
    /// Row feasibility.
    pub const FEAS: f64 = 1e-7;
    /// Objective comparison for pruning and incumbents.
    pub const OPT: f64 = 1e-7;
    /// Complementarity products `x_i z_i`.
    pub const COMP: f64 = 1e-7;
    /// Mixture weights below this are treated as zero.
    pub const DELTA_MIN: f64 = 1e-8;
    /// Profitable deviation threshold.
    pub const DEVIATION: f64 = 1e-6;
}
