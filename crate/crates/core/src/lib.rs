//! Trapped states near a soft quantum waveguide and the resonances they turn
//! into when coupled to the guide.
//!
//! The low-level numerics (`specfun`, `quadrature`, `transverse`) are generic
//! over the floating-point type. The Birman-Schwinger machinery and the pole
//! solver work in double precision through the [`Real`] and [`Complex`]
//! aliases.

pub mod bs;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod quadrature;
pub mod resonance;
pub mod specfun;
pub mod strip;
pub mod transverse;

pub use error::{Error, Result};

pub type Real = f64;
pub type Complex = num_complex::Complex<Real>;

/// Floating-point types accepted by the generic layers.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}
