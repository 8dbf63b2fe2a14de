//! Small dense optimisation backends.
//!
//! Two solvers live here, both sized for desk-scale problems (a few thousand
//! variables at most):
//!
//! * [`solve_lp`]: a two-phase primal simplex on a dense tableau. Pivots skip
//!   zero entries of the pivot row and column, so block-structured programs
//!   stay cheap even though storage is dense. Dantzig pricing is used until
//!   50 consecutive degenerate pivots, after which Bland's rule takes over
//!   until the objective moves again.
//! * [`solve_socp`]: a homogeneous self-dual primal-dual interior-point method
//!   on products of nonnegative orthants and Lorentz cones, with
//!   Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
//!
//! Both return a [`SolveReport`] with primal and dual solutions, objective
//! values and residuals measured against the original data.
//!
//! ```
//! use ellipt_solvers::{solve_lp, LinearProgram, Status};
//!
//! // min x + y  s.t.  x + y = 2,  x, y >= 0
//! let mut lp = LinearProgram::new(vec![1.0, 1.0]);
//! lp.add_eq(&[(0, 1.0), (1, 1.0)], 2.0);
//! let rep = solve_lp(&lp, 1e-8).unwrap();
//! assert_eq!(rep.status, Status::Optimal);
//! assert!((rep.primal_value - 2.0).abs() < 1e-9);
//! ```

mod error;
mod lp;
mod report;
mod simplex;
mod socp;
mod sparse;

pub use error::SolverError;
pub use lp::{Bound, LinearProgram};
pub use report::{SolveReport, Status};
pub use simplex::{solve_lp, solve_lp_with, LpOptions};
pub use socp::{solve_socp, solve_socp_with, Cone, ConeProgram, SocpOptions};
pub use sparse::Triplets;

/// Default LP tolerance.
pub const LP_TOL: f64 = 1e-8;
/// Default SOCP tolerance.
pub const SOCP_TOL: f64 = 1e-6;
