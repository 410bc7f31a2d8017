//! Residual polynomials on finite unions of real intervals.
//!
//! For a compact set `e` made of finitely many closed intervals and a point
//! `x0` outside it, the residual polynomial `R_{x0,n}` is the polynomial of
//! degree at most `n` with `R(x0) = 1` and least sup norm on `e`. The crate
//! computes it with an exchange algorithm and evaluates the potential theory
//! around it: Green's functions, equilibrium and harmonic measures,
//! Parreau–Widom constants, band sets and Widom factors.

pub mod bands;
pub mod cli;
pub mod error;
pub mod examples;
pub mod orbit;
pub mod oracle;
pub mod output;
pub mod poly;
pub mod potential;
pub mod quad;
pub mod realset;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
