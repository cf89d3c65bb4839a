//! Independent reference implementations used only by tests.
//!
//! Nothing here depends on `ler-core`; each oracle solves its problem the slow,
//! obvious way so the fast paths can be checked against it.

pub mod binomial;
pub mod fixed;
pub mod matching;
pub mod random_circuit;
pub mod tableau;

pub use fixed::Fixed;
pub use tableau::{simulate, Gate, Tableau};
