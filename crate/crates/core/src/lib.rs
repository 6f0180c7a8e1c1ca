//! Exact computation of horizontally affine (h-affine) maps on step-two
//! Carnot groups.
//!
//! Groups are presented as quotients of the free step-two group
//! `F_n = Λ¹(Rⁿ) × Λ²(Rⁿ)` through a surjective Carnot morphism. The space of
//! h-affine maps is then parametrized by the subspaces `Λᵏ(π)` of forms whose
//! exterior annihilator contains the kernel of the morphism. Everything is
//! computed over the rationals, so every "is zero" check is exact.
//!
//! Module map:
//!
//! * [`exterior`]: blades, k-forms, wedge products and powers.
//! * [`exactla`]: exact rational row reduction, null spaces and subspaces.
//! * [`carnot`]: free groups, structure constants, presentations, quotients
//!   and products.
//! * [`haffine`]: `Λᵏ(π)`, bases of h-affine maps, the affine/non-affine
//!   classifier, Cartan division and the randomized property probes.
//! * [`gallery`]: named example groups with their expected results.
//! * [`checks`]: randomized invariant suites behind the `check` command.
//! * [`cli`]: the command-line front end.

pub mod carnot;
pub mod checks;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod exactla;
pub mod exterior;
pub mod gallery;
pub mod haffine;
pub mod rational;
pub mod sampling;

pub use error::{Error, Result};
pub use rational::Rational;
