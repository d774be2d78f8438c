//! p-adic harmonic analysis on GL(1) and GL(1) x Sp(2n) at desk scale.
//!
//! Conventions: `F = Q_p` with `p` odd, `q = p`, `z = q^{-s}`, characters
//! normalized by `chi(p) = 1`, `d*t` with `vol(O^x) = 1`, `dt` with `vol(O) = 1`.

pub mod abelian;
pub mod error;
pub mod fx;
pub mod gdist;
pub mod matrix;
pub mod padic;
pub mod pvs;
pub mod quadform;
pub mod ratfunc;
pub mod symplectic;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
