//! Exact chain-complex toolkit over Z, Q and Z/m.

pub mod chain;
pub mod d0;
pub mod diagram;
pub mod error;
pub mod fuzz;
pub mod io;
pub mod linalg;
pub mod localization;
pub mod nil;
pub mod par;

pub use error::{Error, Result};
