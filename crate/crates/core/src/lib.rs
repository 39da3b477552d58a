//! Quadratic-character families and the random model for the logarithmic
//! derivative `L'/L(1/2 + ε, χ_D)`.

pub mod arith;
pub mod discriminant;
pub mod error;
pub mod lab;
pub mod lfun;
pub mod model;
pub mod rng;
pub mod summation;

pub use discriminant::{
    character_average, enumerate_family, enumerate_family_with, is_fundamental_discriminant,
    kronecker, CharacterTable, FamilyOptions, FamilySlice, FundamentalDiscriminant,
};
pub use error::{Error, Result};
