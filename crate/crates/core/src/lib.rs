//! Exact verification machinery for the overpartition analogue of Bressoud's
//! theorem: the number `C_{k,i}(n)` of overpartitions of `n` whose
//! nonoverlined parts avoid `0, ±i (mod 2k-1)` equals the number `D_{k,i}(n)`
//! of overpartitions satisfying the multiplicity and parity conditions.
//!
//! - [`overpartition`]: canonical overpartitions and their statistics
//! - [`enumerate`]: exhaustive generation and every counting function
//! - [`bijections`]: the switch injection and the maps `phi`, `chi`
//! - [`series`]: truncated power series, Pochhammer products, `W_{k,i}(x;q)`
//! - [`qexpr`]: a parser and evaluator for product formulas
//! - [`verify`]: verification campaigns producing structured reports

pub mod bijections;
pub mod enumerate;
pub mod overpartition;
pub mod qexpr;
pub mod series;
pub mod verify;

pub use overpartition::{FrequencyProfile, Overpartition, OverpartitionError, Part};
