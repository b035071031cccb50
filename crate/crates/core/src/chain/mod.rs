//! Bounded chain complexes of free modules and the standard constructions.

mod bimodule;
mod complex;
mod construct;
mod homology;
mod homotopy;
mod map;
mod ses;

pub use bimodule::{tensor_map, tensor_map_into, tensor_matrix, tensor_with_bimodule, Bimodule, Twist};
pub use complex::ChainComplex;
pub use construct::{
    acyclic_cover, cone, cylinder, desuspension, direct_sum, direct_sum_map, pushout_along_cofibration, shift,
    shift_map, suspension, Cone, Cylinder, DirectSum, Pushout,
};
pub use homology::{homology, homology_at, is_acyclic, HomologyGroup};
pub use homotopy::{find_contraction, find_homotopy, find_null_homotopy, is_contractible, is_homotopy};
pub use map::GradedMap;
pub(crate) use map::sign;
pub use ses::{rotate_ses, Rotation, SesSplitting, ShortExactSequence};

/// Degrees where `∂∂ ≠ 0`.
pub fn validate_complex(c: &ChainComplex) -> Vec<i64> {
    c.validate()
}
