//! Exponent bookkeeping, weight families and Muckenhoupt-type characteristics.

mod characteristic;
pub mod config;
pub mod families;

pub use characteristic::{
    ainfty, apq_alpha, apq_characteristic, au_characteristic, reverse_holder_beta,
    CharacteristicReport, ReverseHolder, REVERSE_HOLDER_CAP, REVERSE_HOLDER_TOL,
};
pub use config::{conjugate, inv_conjugate, ExponentConfig, Gap};
