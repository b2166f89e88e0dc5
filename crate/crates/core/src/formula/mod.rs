//! The formula language: syntax tree, concrete syntax, and syntactic analysis.

mod ast;
mod defining;
mod parse;
mod print;

pub use ast::{classify, free_vars, Formula, Fragment, Term};
pub use defining::{
    gendep_defining_formula, gendep_defining_formula_for, nc_defining_formula, nc_defining_formula_exact,
    nc_defining_formula_exact_for, nc_defining_formula_for,
};
pub use parse::parse;
