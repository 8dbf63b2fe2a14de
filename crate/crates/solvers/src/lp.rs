use crate::error::SolverError;
use crate::sparse::Triplets;

/// Variable bound `lower ≤ x ≤ upper`; either side may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    pub const NONNEG: Bound = Bound {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bound = Bound {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Bound { lower, upper }
    }
}

/// `min cᵀx  s.t.  A_eq x = b_eq,  A_ub x ≤ b_ub,  lower ≤ x ≤ upper`.
///
/// Constraints are kept in triplet form; the simplex densifies them.
/// Variables default to `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub a_eq: Triplets,
    pub b_eq: Vec<f64>,
    pub a_ub: Triplets,
    pub b_ub: Vec<f64>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            a_eq: Triplets::new(0, n),
            b_eq: Vec::new(),
            a_ub: Triplets::new(0, n),
            b_ub: Vec::new(),
            bounds: vec![Bound::NONNEG; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> usize {
        self.b_eq.push(rhs);
        self.a_eq.push_row(coeffs)
    }

    pub fn add_le(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> usize {
        self.b_ub.push(rhs);
        self.a_ub.push_row(coeffs)
    }

    pub fn add_ge(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> usize {
        let neg: Vec<_> = coeffs.iter().map(|&(c, v)| (c, -v)).collect();
        self.add_le(&neg, -rhs)
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound) {
        self.bounds[var] = bound;
    }

    /// Number of constraint rows plus one per finite variable bound.
    pub fn num_constraints(&self) -> usize {
        let bound_rows: usize = self
            .bounds
            .iter()
            .map(|b| b.lower.is_finite() as usize + b.upper.is_finite() as usize)
            .sum();
        self.a_eq.rows + self.a_ub.rows + bound_rows
    }

    /// Structural nonzeros of the constraint matrices, counting one per
    /// finite variable bound row.
    pub fn nnz(&self) -> usize {
        let bound_rows: usize = self
            .bounds
            .iter()
            .map(|b| b.lower.is_finite() as usize + b.upper.is_finite() as usize)
            .sum();
        self.a_eq.nnz() + self.a_ub.nnz() + bound_rows
    }

    pub(crate) fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        if self.a_eq.cols != n || self.a_ub.cols != n || self.bounds.len() != n {
            return Err(SolverError::Dimension(format!(
                "{} variables but matrices have {} / {} columns and {} bounds",
                n,
                self.a_eq.cols,
                self.a_ub.cols,
                self.bounds.len()
            )));
        }
        if self.a_eq.rows != self.b_eq.len() || self.a_ub.rows != self.b_ub.len() {
            return Err(SolverError::Dimension("row count differs from rhs length".into()));
        }
        if !self.objective.iter().all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite("objective"));
        }
        if !self.a_eq.is_finite() || !self.a_ub.is_finite() {
            return Err(SolverError::NonFinite("constraint matrix"));
        }
        if !self.b_eq.iter().chain(&self.b_ub).all(|v| v.is_finite()) {
            return Err(SolverError::NonFinite("right-hand side"));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower == f64::INFINITY || b.upper == f64::NEG_INFINITY {
                return Err(SolverError::Dimension(format!("bad bound on variable {j}")));
            }
        }
        Ok(())
    }
}
