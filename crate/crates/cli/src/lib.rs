//! File formats, proof documents and commands for the `relat` tool.

pub mod commands;
pub mod document;
pub mod error;
pub mod parse;
pub mod print;
pub mod syntax;
