//! Cotton–York curvature on 3-manifolds, Chern–Simons gradient flows on
//! homogeneous geometries, and the infrared sector of Hořava–Lifshitz gravity.
//!
//! Two curvature backends share one set of conventions:
//!
//! * [`homogeneous`] works algebraically in a Milnor frame for the six
//!   unimodular Bianchi classes and is exact up to roundoff;
//! * [`chart`] differentiates an arbitrary coordinate metric with central
//!   finite differences of fourth (default), sixth or eighth order.
//!
//! [`flows`] integrates the generalized Cotton flow on the first backend,
//! [`functionals`] checks its entropy and volume laws, and [`horava`] covers
//! the gauge dependence of the emergent constants.

#![allow(clippy::needless_range_loop)]

pub mod chart;
pub mod cli;
pub mod flows;
pub mod functionals;
pub mod homogeneous;
pub mod horava;
pub mod tensor;
