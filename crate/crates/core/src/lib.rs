//! Littlewood-Paley analysis, Morrey and Besov-Morrey norms, paraproducts,
//! commutators and pseudo-spectral incompressible Euler and ideal MHD on the
//! periodic torus.

pub mod commutator;
pub mod corpus;
pub mod error;
pub mod flow;
pub mod flowmap;
pub mod harness;
pub mod lp;
pub mod norms;
pub mod paraproduct;
pub mod report;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
pub use report::{EstimateReport, GridSummary, LemmaId, RhsTerm};
pub use spectral::{FieldKind, Grid, RealField, SpectralField, VectorField};
