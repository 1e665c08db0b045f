//! Exact symbolic verification engine for Taub-NUT geometry.

pub mod atom;
pub mod catalog;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod forms;
pub mod interval;
pub mod parse;
pub mod odeint;
pub mod poly;
pub mod reduction;
pub mod tetrad;

pub use atom::{Atom, Coord};
pub use error::{Error, Result};
pub use expr::{Expr, Point};
pub use forms::{Basis, Chart, DiffForm, SymTensor2, VecField};
pub use interval::Iv;
pub use tetrad::Tetrad;
