//! Compiler and solver for finite linear constraint satisfaction problems
//! via the order encoding.

pub mod analysis;
pub mod frontend;
pub mod model;
pub mod encoder;
pub mod solver;
pub mod oracle;
pub mod cli;
