#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

/// Outcome of a solve.
///
/// A conic solve that stalls reports `MaxIter` together with the iterate of
/// smallest residuals; its residual fields tell how usable it is.
///
/// Sign conventions for a minimisation `min cᵀx`:
/// * `y_eq` are multipliers of equality rows, with reduced costs
///   `c - A_eqᵀ y_eq + A_ubᵀ y_ub`;
/// * `y_ub` are the (nonnegative) multipliers of `≤` rows (LP only);
/// * `s` is the dual slack (SOCP only, lies in the dual cone).
///
/// `dual_value` is the Lagrangian dual objective evaluated at the returned
/// multipliers. `primal_residual` and `dual_residual` are infinity norms of
/// the constraint violations measured on the caller's data.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: Status,
    pub primal_value: f64,
    pub dual_value: f64,
    pub x: Vec<f64>,
    pub y_eq: Vec<f64>,
    pub y_ub: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    /// Final simplex basis (column indices of the internal standard form);
    /// empty for the conic solver. Feed back through `LpOptions::warm_basis`.
    pub basis: Vec<usize>,
}

impl SolveReport {
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub(crate) fn failed(status: Status, n: usize, iterations: usize) -> Self {
        let v = match status {
            Status::Infeasible => f64::INFINITY,
            Status::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        SolveReport {
            status,
            primal_value: v,
            dual_value: v,
            x: vec![f64::NAN; n],
            y_eq: Vec::new(),
            y_ub: Vec::new(),
            s: Vec::new(),
            primal_residual: f64::NAN,
            dual_residual: f64::NAN,
            iterations,
            basis: Vec::new(),
        }
    }
}
