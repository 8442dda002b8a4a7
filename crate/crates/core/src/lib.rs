//! Weighted Orlicz-Morrey spaces on the line: Young functions, Muckenhoupt weights,
//! Luxemburg and Morrey norms, the Hilbert transform as a Calderón-Zygmund operator,
//! BMO commutators, and a harness that checks boundedness by ratio stability.

pub mod conditions;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod norms;
pub mod operators;
pub mod params;
pub mod weights;
pub mod young;

pub use error::{Error, Result};
pub use grid::{Ball, Grid, GridFunction, VectorGridFunction};
pub use weights::{MassRule, Weight};
pub use young::YoungFunction;
