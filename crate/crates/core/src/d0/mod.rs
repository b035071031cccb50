//! Complexes over the truncated diagram `𝒟₀`, their hom complexes and the
//! locality classes `𝔅ₙ`, `𝔄ₙ`.

mod complex;
mod hom;
mod locality;

pub use complex::*;
pub use hom::*;
pub use locality::*;
