use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{separation_margin, Ellipse, EllipticPolytope};

/// Decision method for the inclusion problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Cpm,
    Cutting,
    Projection,
    Mixed,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Method::Exact,
            "cpm" => Method::Cpm,
            "cutting" => Method::Cutting,
            "projection" => Method::Projection,
            "mixed" => Method::Mixed,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown method {other:?} (expected exact, cpm, cutting, projection or mixed)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// `E₀ ⊂ P`.
    Inside,
    /// `E₀ ⊄ P`.
    Outside,
    /// `q E₀ ⊂ P` for the reported factor `q < 1`; `E₀ ⊂ P` undecided.
    QInside,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    None,
    /// `x` with `support(E₀,x)² - max_k support(E_k,x)² = margin > 0`.
    Separating { direction: Vec<f64>, margin: f64 },
    /// Vertices of a polygon circumscribed about `E₀` (upper half) with
    /// upper bounds on their norms.
    CornerNorms { corners: Vec<(f64, f64)> },
    /// Optimal value of the complex-polytope program.
    Cpm { t0: f64 },
}

/// Result of an inclusion test at some approximation factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EeVerdict {
    pub outcome: Outcome,
    /// Certified factor: 1 for `Inside`/`Outside`, otherwise the largest
    /// `q` shown to satisfy `q E₀ ⊂ P`.
    pub factor: f64,
    pub method: Method,
    pub certificate: Certificate,
}

impl EeVerdict {
    pub fn inside(method: Method, certificate: Certificate) -> Self {
        EeVerdict {
            outcome: Outcome::Inside,
            factor: 1.0,
            method,
            certificate,
        }
    }

    pub fn q_inside(method: Method, factor: f64, certificate: Certificate) -> Self {
        EeVerdict {
            outcome: Outcome::QInside,
            factor,
            method,
            certificate,
        }
    }

    /// Builds an `Outside` verdict after checking that `direction` really
    /// separates; `None` if the margin is not positive.
    pub fn outside(
        method: Method,
        e0: &Ellipse,
        p: &EllipticPolytope,
        direction: Vec<f64>,
    ) -> Result<Option<Self>> {
        let margin = separation_margin(e0, p, &direction)?;
        Ok((margin > 0.0).then(|| EeVerdict {
            outcome: Outcome::Outside,
            factor: 1.0,
            method,
            certificate: Certificate::Separating { direction, margin },
        }))
    }

    pub fn is_inside(&self) -> bool {
        self.outcome == Outcome::Inside
    }

    pub fn is_outside(&self) -> bool {
        self.outcome == Outcome::Outside
    }

    pub fn direction(&self) -> Option<&[f64]> {
        match &self.certificate {
            Certificate::Separating { direction, .. } => Some(direction),
            _ => None,
        }
    }
}

/// Certified interval `[lo, hi]` containing a Minkowski norm `‖w‖_P`.
/// Both ends are infinite when `w` is outside the span of `P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBracket {
    pub lo: f64,
    pub hi: f64,
    /// Dual direction `y` with `wᵀy ≈ hi` and `max_k support(E_k, y)` close
    /// to one; `None` for the zero vector or out-of-span points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

impl NormBracket {
    pub fn exact(v: f64) -> Self {
        NormBracket {
            lo: v,
            hi: v,
            direction: None,
        }
    }

    pub fn out_of_span() -> Self {
        NormBracket {
            lo: f64::INFINITY,
            hi: f64::INFINITY,
            direction: None,
        }
    }

    pub fn is_out_of_span(&self) -> bool {
        self.lo.is_infinite()
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outside_requires_positive_margin() {
        let p = EllipticPolytope::new(vec![Ellipse::disc(2, 1.0)]).unwrap();
        let big = Ellipse::disc(2, 1.5);
        assert!(EeVerdict::outside(Method::Exact, &big, &p, vec![1.0, 0.0])
            .unwrap()
            .is_some());
        let small = Ellipse::disc(2, 0.5);
        assert!(EeVerdict::outside(Method::Exact, &small, &p, vec![1.0, 0.0])
            .unwrap()
            .is_none());
    }

    #[test]
    fn method_parsing() {
        assert_eq!("mixed".parse::<Method>().unwrap(), Method::Mixed);
        assert!("simplex".parse::<Method>().is_err());
    }
}
