//! Exact model checking for dependence and independence logics under
//! relational and probabilistic team semantics, with a layer for empirical
//! and hidden-variable models of physical experiments.

pub mod constructions;
pub mod entailment;
pub mod error;
pub mod eval;
pub mod formula;
pub mod hvmodel;
pub mod json;
pub mod nogo;
pub mod prob;
pub mod properties;
pub mod random;
pub mod scalar;
pub mod team;
pub mod value;
pub mod verify;

pub use error::{Error, Result};
pub use eval::{cond_prob, eval_atom_rel, eval_prob, eval_rel, CondProbQuery, EvalBudget};
pub use formula::{parse, Formula, Fragment, Term};
pub use hvmodel::{Model, ModelKind};
pub use json::TeamData;
pub use prob::{Dist, ProbTeam};
pub use properties::{check_property, property_formula, PropertyName};
pub use team::{Assignment, Row, Team};
pub use value::{Value, Var};

/// Exact rational numbers with arbitrary precision.
pub type Rational = num_rational::Ratio<num_bigint::BigInt>;
