//! Forward and inverse Laplace transforms.

pub mod contour;
pub mod forward;
pub mod rational;

pub use contour::{invert_contour, invert_contour_grid, invert_contour_rational, ContourMethod, ContourParams};
pub use forward::{forward_laplace, ForwardLaplace};
pub use rational::{invert_rational, PoleTerm, RationalImage, ResidueExpansion};
