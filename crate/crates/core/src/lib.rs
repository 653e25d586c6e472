pub mod constants;
pub mod coupling;
pub mod dispersion;
pub mod error;
pub mod io;
pub mod kernels;
pub mod laplace;
pub mod medium;
pub mod noise;
pub mod scenarios;
pub mod numerics;
pub mod tabulated;

pub use constants::PhysicalConstants;
pub use dispersion::DispersionRelation;
pub use error::{Error, Result};
pub use medium::{ModelKind, Role, SusceptibilityModel};
