//! Dependence-logic definitions of the generalised dependence atom and of `nc`.
//!
//! Both formulas copy the relevant tuples into universally quantified
//! variables, attach three flags `u₁,u₂,u₃` that are functions of the copies,
//! and let the flag pattern pick one of three disjuncts per copy value.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::ast::Formula;
use crate::value::Var;

fn default_names(prefix: &str, k: usize) -> Vec<Var> {
    if k == 1 {
        vec![Var::new(prefix)]
    } else {
        (1..=k).map(|i| Var::new(format!("{prefix}_{i}"))).collect()
    }
}

struct Fresh {
    used: BTreeSet<Var>,
}

impl Fresh {
    fn new<'a, I: IntoIterator<Item = &'a Var>>(taken: I) -> Self {
        Fresh { used: taken.into_iter().cloned().collect() }
    }

    fn var(&mut self, base: &str) -> Var {
        let mut candidate = Var::new(base);
        let mut n = 0;
        while self.used.contains(&candidate) {
            n += 1;
            candidate = Var::new(format!("{base}{}", "_".repeat(n)));
        }
        self.used.insert(candidate.clone());
        candidate
    }

    fn vars(&mut self, base: &str, k: usize) -> Vec<Var> {
        if k == 1 {
            vec![self.var(base)]
        } else {
            (1..=k).map(|i| self.var(&format!("{base}_{i}"))).collect()
        }
    }
}

fn concat(parts: &[&[Var]]) -> Vec<Var> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// The shared skeleton: `∀copies ∃u₁u₂u₃ (⋀ dep(copies, uᵢ) ∧ [(u₁=u₂=u₃ ∧ d1) ∨ (u₁=u₂≠u₃ ∧ d2) ∨ (u₁≠u₂=u₃ ∧ d3)])`.
fn skeleton(copies: &[Var], u: &[Var; 3], d1: Formula, d2: Formula, d3: Formula) -> Formula {
    let deps = u.iter().map(|ui| Formula::dep(copies.to_vec(), vec![ui.clone()]));
    let all_eq = Formula::and(Formula::var_eq(&u[0], &u[1]), Formula::var_eq(&u[1], &u[2]));
    let first_two = Formula::and(Formula::var_eq(&u[0], &u[1]), Formula::var_neq(&u[1], &u[2]));
    let last_two = Formula::and(Formula::var_neq(&u[0], &u[1]), Formula::var_eq(&u[1], &u[2]));
    let cases = Formula::disj([Formula::and(all_eq, d1), Formula::and(first_two, d2), Formula::and(last_two, d3)]);
    let body = Formula::conj(deps.chain(std::iter::once(cases)));
    Formula::forall_all(copies, Formula::exists_all(u, body))
}

/// Formula equivalent to `dep((x̄₁,x̄₂),(ȳ₁,ȳ₂))` over the given variables.
pub fn gendep_defining_formula_for(x1: &[Var], x2: &[Var], y1: &[Var], y2: &[Var]) -> Result<Formula> {
    if x1.len() != x2.len() || y1.len() != y2.len() {
        return Err(Error::Arity("generalised dependence needs |x̄₁|=|x̄₂| and |ȳ₁|=|ȳ₂|".into()));
    }
    if x1.is_empty() || y1.is_empty() {
        return Err(Error::Argument("defining formula needs positive arities".into()));
    }
    let mut fresh = Fresh::new(x1.iter().chain(x2).chain(y1).chain(y2));
    let (k, m) = (x1.len(), y1.len());
    let z1 = fresh.vars("z1", k);
    let z2 = fresh.vars("z2", k);
    let w1 = fresh.vars("w1", m);
    let w2 = fresh.vars("w2", m);
    let u = [fresh.var("u1"), fresh.var("u2"), fresh.var("u3")];

    let d1 = Formula::excl(concat(&[&z1, &w1]), concat(&[x1, y1]))?;
    let d2 = Formula::excl(concat(&[&z2, &w2]), concat(&[x2, y2]))?;
    let z_differ = Formula::disj(z1.iter().zip(&z2).map(|(a, b)| Formula::var_neq(a, b)));
    let w_agree = Formula::conj(w1.iter().zip(&w2).map(|(a, b)| Formula::var_eq(a, b)));
    let d3 = Formula::or(z_differ, w_agree);
    let copies = concat(&[&z1, &z2, &w1, &w2]);
    Ok(skeleton(&copies, &u, d1, d2, d3))
}

/// Formula for `dep((x̄₁,x̄₂),(ȳ₁,ȳ₂))` with `|x̄ᵢ| = k`, `|ȳᵢ| = m`, over the
/// variables `x1, x2, y1, y2` (suffixed `_1.._k` when the arity exceeds one).
pub fn gendep_defining_formula(k: usize, m: usize) -> Result<Formula> {
    gendep_defining_formula_for(
        &default_names("x1", k),
        &default_names("x2", k),
        &default_names("y1", m),
        &default_names("y2", m),
    )
}

/// The usual defining formula of `nc(x₁…x_k, y)`, whose last disjunct is
/// `w₂ = w₁ ∨ ⋁ᵢ w₂ ≠ zᵢ`.
///
/// Equivalent to the atom for `k = 1` only: for larger `k` a copy with
/// `w₂ = z₁ ≠ z₂` passes through `w₂ ≠ z₂`, so the formula is strictly weaker.
/// [`nc_defining_formula_exact_for`] requires `w₂ ≠ zᵢ` for every `i`.
pub fn nc_defining_formula_for(xs: &[Var], y: &Var) -> Result<Formula> {
    nc_formula(xs, y, false)
}

/// Variant of [`nc_defining_formula_for`] with `w₂ = w₁ ∨ ⋀ᵢ w₂ ≠ zᵢ`,
/// equivalent to `nc` at every arity.
pub fn nc_defining_formula_exact_for(xs: &[Var], y: &Var) -> Result<Formula> {
    nc_formula(xs, y, true)
}

fn nc_formula(xs: &[Var], y: &Var, exact: bool) -> Result<Formula> {
    if xs.is_empty() {
        return Err(Error::Argument("defining formula needs k >= 1".into()));
    }
    let mut fresh = Fresh::new(xs.iter().chain(std::iter::once(y)));
    let z: Vec<Var> = (1..=xs.len()).map(|i| fresh.var(&format!("z{i}"))).collect();
    let w1 = fresh.var("w1");
    let w2 = fresh.var("w2");
    let u = [fresh.var("u1"), fresh.var("u2"), fresh.var("u3")];

    let d1 = Formula::excl(concat(&[&z, std::slice::from_ref(&w1)]), concat(&[xs, std::slice::from_ref(y)]))?;
    let d2 = Formula::excl(vec![w2.clone()], vec![y.clone()])?;
    let avoid = z.iter().map(|zi| Formula::var_neq(&w2, zi));
    let d3 = if exact {
        Formula::or(Formula::var_eq(&w2, &w1), Formula::conj(avoid))
    } else {
        Formula::disj(std::iter::once(Formula::var_eq(&w2, &w1)).chain(avoid))
    };
    let copies = concat(&[&z, &[w1.clone(), w2.clone()]]);
    Ok(skeleton(&copies, &u, d1, d2, d3))
}

/// Formula for `nc(x1…xk, y)` over variables `x1..xk` and `y`.
pub fn nc_defining_formula(k: usize) -> Result<Formula> {
    let xs: Vec<Var> = (1..=k).map(|i| Var::new(format!("x{i}"))).collect();
    nc_defining_formula_for(&xs, &Var::new("y"))
}

pub fn nc_defining_formula_exact(k: usize) -> Result<Formula> {
    let xs: Vec<Var> = (1..=k).map(|i| Var::new(format!("x{i}"))).collect();
    nc_defining_formula_exact_for(&xs, &Var::new("y"))
}
