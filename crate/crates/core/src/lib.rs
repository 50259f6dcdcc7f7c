//! Riemannian geometry kernels, second-order jets and monotone schemes for
//! degenerate elliptic equations `F(x, u, du, d²u) = 0` on model manifolds.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix `f64`.

pub mod error;
pub mod jacobi;
pub mod jets;
pub mod linalg;
pub mod manifold;
pub mod operators;
pub mod report;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use jets::Jet2;
pub use linalg::Matrix;
pub use manifold::{GeodesicSegment, ManifoldModel, ModelSpec, Point, SymBilinear, TangentVector};
pub use operators::OperatorSpec;
pub use scalar::Real;
pub use solver::{Grid, GridFunction};

/// `f64` aliases for the common case.
pub mod f64 {
    pub type Model = crate::manifold::ManifoldModel<f64>;
    pub type Point = crate::manifold::Point<f64>;
    pub type Tangent = crate::manifold::TangentVector<f64>;
    pub type Bilinear = crate::manifold::SymBilinear<f64>;
    pub type Segment = crate::manifold::GeodesicSegment<f64>;
    pub type Mat = crate::linalg::Matrix<f64>;
    pub type Jet = crate::jets::Jet2<f64>;
    pub type Operator = crate::operators::OperatorSpec<f64>;
    pub type Grid = crate::solver::Grid<f64>;
    pub type GridFn = crate::solver::GridFunction<f64>;
}
