#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod cli;
pub mod error;
pub mod moments;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod santalo;
pub mod specfun;
pub mod stream;
pub mod volmc;

pub use error::{Error, Result};
