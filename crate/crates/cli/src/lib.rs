//! Command-line front end for the metacheck type checker: a parser and
//! printer for `.tog` files, a scope checker producing core terms, and a
//! batch driver that elaborates and solves each `check` declaration.

pub mod args;
pub mod ast;
pub mod driver;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod scope;
