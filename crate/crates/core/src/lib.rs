//! Fuzzy-stochastic uncertainty quantification.
//!
//! The crate propagates two kinds of uncertainty through models: random
//! inputs, handled by Monte Carlo sampling, and imprecisely known parameters,
//! modelled as fuzzy variables and handled cut by cut through optimization
//! over joint α-cuts. Modules, bottom up:
//!
//! - [`fuzzy`]: fuzzy variables as α-cut tables.
//! - [`interaction`]: fuzzy vectors with box-shaped (non-interactive) or
//!   polygonal-curve (fully interactive) joint cuts.
//! - [`extension`]: fuzzy functions, fuzzy expectations, fuzzy CDFs (p-box
//!   families) and fuzzy failure probabilities.
//! - [`field`]: seeded sampling and Karhunen–Loève expansion of a Gaussian field.
//! - [`translation`]: four-parameter beta marginals and the translation map.
//! - [`solver`]: the 1D elliptic problem `(a u')' = 0`, `u(0) = 0`, `a u'(L) = 1`.
//! - [`data`]: fiber-map ingestion and membership fitting from sample moments.
//! - [`studies`]: the two reference studies, one pass over the joint cuts each.
//! - [`cli`]: command-line front end with file-based outputs.

pub mod cli;
pub mod data;
pub mod error;
pub mod extension;
pub mod field;
pub mod fuzzy;
pub mod interaction;
pub mod solver;
pub mod studies;
pub mod translation;

pub use error::{Error, Result};
pub use fuzzy::{FuzzyVariable, Interval, MembershipSample};
pub use interaction::{FuzzyVector, Interaction, JointAlphaCut, Polyline};
