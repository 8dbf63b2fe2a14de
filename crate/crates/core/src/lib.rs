pub mod applications;
mod backend;
pub mod cpm;
pub mod cutting;
pub mod engine;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod geom;
pub mod hardness;
pub mod projection;
pub mod verdict;

pub use error::{Error, Result};
pub use geom::{Ellipse, EllipticPolytope};
pub use verdict::{Certificate, EeVerdict, Method, NormBracket, Outcome};

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/ellipses.md")]
    pub mod ellipses {}
    #[doc = include_str!("../../../book/src/inclusion.md")]
    pub mod inclusion {}
    #[doc = include_str!("../../../book/src/norms.md")]
    pub mod norms {}
    #[doc = include_str!("../../../book/src/invariant.md")]
    pub mod invariant {}
    #[doc = include_str!("../../../book/src/hardness.md")]
    pub mod hardness {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
