use ellipt_solvers::{solve_lp, solve_socp, ConeProgram, LinearProgram, SolveReport, Status};

use crate::error::{Error, Result};

/// Conic solve accepting a stalled run whose residuals are within
/// `slack·tol`.
pub(crate) fn conic(cp: &ConeProgram, tol: f64, slack: f64, context: &str) -> Result<SolveReport> {
    let rep = solve_socp(cp, tol)?;
    match rep.status {
        Status::Optimal => Ok(rep),
        Status::MaxIter if usable(&rep, slack * tol) => {
            log::debug!("{context}: accepting stalled iterate (gap {:e})", rep.gap());
            Ok(rep)
        }
        status => Err(Error::Solver {
            status,
            context: context.into(),
        }),
    }
}

fn usable(rep: &SolveReport, tol: f64) -> bool {
    rep.primal_residual <= tol
        && rep.dual_residual <= tol
        && rep.gap() <= tol * (1.0 + rep.primal_value.abs())
}

pub(crate) fn linear(lp: &LinearProgram, tol: f64, context: &str) -> Result<SolveReport> {
    let rep = solve_lp(lp, tol)?;
    match rep.status {
        Status::Optimal | Status::Infeasible => Ok(rep),
        status => Err(Error::Solver {
            status,
            context: context.into(),
        }),
    }
}
