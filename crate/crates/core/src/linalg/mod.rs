mod matrix;
mod ring;
mod snf;
mod system;

pub use matrix::Matrix;
pub use ring::{big, int, is_prime, parse_scalar, Ring, Scalar};
pub use snf::{
    diagonalize, invariant_factors, is_split_injection, kernel_basis, rank, smith_normal_form, solve_linear,
    split_injection, split_surjection, split_surjection_section, Diagonalization, InjectionSplitting,
    SurjectionSplitting,
};
pub use system::LinearSystem;
