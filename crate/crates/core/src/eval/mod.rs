//! Model checking under relational and probabilistic team semantics.

mod atoms;
mod compile;
mod prob;
mod rel;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::team::Team;
use crate::value::Value;

use compile::{Interner, Node};

pub use prob::{check_skolem_witness, cond_prob, eval_prob, CondProbQuery};

/// Limits on the exhaustive searches behind ∨, ∃ and ∀.
///
/// Running out of any of them yields [`Error::Budget`], never `false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalBudget {
    /// Largest team produced by a universal quantifier.
    pub max_rows: usize,
    pub max_universe: usize,
    /// Entries cached per disjunction search; beyond this, results are recomputed.
    pub memo_limit: usize,
    /// Search nodes visited over the whole evaluation.
    pub max_steps: u64,
}

impl Default for EvalBudget {
    fn default() -> Self {
        EvalBudget { max_rows: 1 << 16, max_universe: 64, memo_limit: 1 << 20, max_steps: 50_000_000 }
    }
}

impl EvalBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_rows == 0 || self.max_universe == 0 || self.memo_limit == 0 || self.max_steps == 0 {
            return Err(Error::Config("budget limits must be positive".into()));
        }
        Ok(())
    }
}

struct Prepared {
    rows: Vec<Vec<u32>>,
    universe: Vec<u32>,
    program: compile::Program,
}

fn prepare(team: &Team, f: &Formula) -> Result<Prepared> {
    let mut values: BTreeSet<Value> = team.universe().clone();
    values.extend(team.active_values());
    values.extend(f.constants());
    let interner = Interner::new(values);
    let program = compile::compile(f, team.domain(), &interner)?;
    let rows = team.rows().map(|r| r.iter().map(|v| interner.id(v)).collect()).collect();
    let universe = team.universe().iter().map(|v| interner.id(v)).collect();
    Ok(Prepared { rows, universe, program })
}

/// `X ⊨ φ` under lax relational team semantics.
pub fn eval_rel(team: &Team, f: &Formula, budget: &EvalBudget) -> Result<bool> {
    budget.validate()?;
    let p = prepare(team, f)?;
    if p.rows.len() > budget.max_rows {
        return Err(Error::Budget(format!("team of {} rows exceeds the limit of {}", p.rows.len(), budget.max_rows)));
    }
    let refs: Vec<&[u32]> = p.rows.iter().map(|r| r.as_slice()).collect();
    rel::Evaluator::new(&p.program, p.universe, *budget).run(&refs)
}

/// Direct check of a single atom, without any search over sub-teams.
pub fn eval_atom_rel(team: &Team, atom: &Formula) -> Result<bool> {
    if !atom.is_atom() {
        return Err(Error::Argument(format!("{atom} is not an atomic formula")));
    }
    let p = prepare(team, atom)?;
    let refs: Vec<&[u32]> = p.rows.iter().map(|r| r.as_slice()).collect();
    let rows = refs.as_slice();
    let row_val = |r: &[u32], t: compile::Tm| match t {
        compile::Tm::Col(c) => r[c],
        compile::Tm::Val(v) => v,
    };
    Ok(match &p.program.nodes[p.program.root] {
        Node::Lit { eq, a, b } => rows.iter().all(|r| (row_val(r, *a) == row_val(r, *b)) == *eq),
        Node::Dep { x, y } => atoms::dep(rows, x, y),
        Node::GenDep { x1, x2, y1, y2 } => atoms::gen_dep(rows, x1, x2, y1, y2),
        Node::Indep { x, z, y } => atoms::indep(rows, x, z, y),
        Node::Incl { a, b } => atoms::incl(rows, a, b),
        Node::Excl { a, b } => atoms::excl(rows, a, b),
        Node::Nc { xs, y } => atoms::nc(rows, xs, *y),
        Node::Ncc { xs } => atoms::ncc(rows, xs),
        _ => unreachable!("atoms compile to atom nodes"),
    })
}

/// A set `S` of values with `|S ∩ B| = 1` for every block `B`, if one exists.
pub fn exact_hitting_set(blocks: &[BTreeSet<Value>]) -> Option<BTreeSet<Value>> {
    let all: BTreeSet<Value> = blocks.iter().flatten().cloned().collect();
    let interner = Interner::new(all);
    let ids: Vec<Vec<u32>> = blocks.iter().map(|b| b.iter().map(|v| interner.id(v)).collect()).collect();
    atoms::exact_hitting_set(&ids).map(|s| s.into_iter().map(|i| interner.value(i).clone()).collect())
}
