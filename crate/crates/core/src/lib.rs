//! Exact Macdonald polynomials in three variables, basic hypergeometric
//! series, a bilateral-sum integral kernel acting on two-variable
//! polynomials, and a verification harness tying them together.

pub mod exact;
pub mod macdonald;
pub mod qseries;
pub mod sovkernel;
pub mod verify;

pub use rug::{Float, Rational};
