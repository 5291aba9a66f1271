//! Quenched lattice gauge fields and the integrated density of states of the
//! Hermitian Wilson Dirac operator on nested cubes.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`) through
//! [`num::Real`]; the aliases at the crate root fix it to `f64` or `f32`.

pub mod cli;
pub mod dirac;
pub mod experiment;
pub mod gibbs;
pub mod group;
pub mod lattice;
pub mod linalg;
pub mod num;
pub mod spectra;

pub use lattice::{Bond, CubeSequence, LatticeGeometry, Plaquette, Site, SiteSet};
pub use num::Real;

pub type CMatrixF64 = linalg::CMatrix<f64>;
pub type CMatrixF32 = linalg::CMatrix<f32>;
pub type GroupElementF64 = group::GroupElement<f64>;
pub type GroupElementF32 = group::GroupElement<f32>;
pub type GaugeConfigF64 = gibbs::GaugeConfig<f64>;
pub type GaugeConfigF32 = gibbs::GaugeConfig<f32>;
pub type DiracOperatorF64 = dirac::DiracOperator<f64>;
pub type DiracOperatorF32 = dirac::DiracOperator<f32>;
pub type SpectrumF64 = spectra::Spectrum<f64>;
pub type SpectrumF32 = spectra::Spectrum<f32>;
