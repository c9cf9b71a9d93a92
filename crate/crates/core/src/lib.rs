//! Exact-arithmetic construction and verification of finite-range
//! certificates for multiplicatively badly approximable matrices.

pub mod cantor;
pub mod cli;
pub mod construction;
pub mod diophantine;
pub mod oracles;
pub mod rational;
pub mod sums;
