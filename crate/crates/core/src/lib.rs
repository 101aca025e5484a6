//! Hadamard products and inverses of power-series germs with a single
//! singular point: exact coefficient algebra, the Euler operator of an
//! inverse, contour representations of the product, the Volterra system
//! for log-type germs, and numerical singularity scans.

pub mod catalog;
pub mod contour;
pub mod germ;
pub mod ode;
pub mod scope;
pub mod volterra;

pub use catalog::{CatalogGerm, NamedGerm, RationalGerm};
pub use germ::{CoefficientSource, GermError, TruncatedGerm};
