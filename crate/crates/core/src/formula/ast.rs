use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::value::{Value, Var};

/// A first-order term: a variable or a constant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Const(Value),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn constant(symbol: &str) -> Term {
        Term::Const(Value::new(symbol))
    }
}

/// Formulas in negation normal form; negation only occurs in `Neq`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Neq(Term, Term),
    /// `dep(x̄, ȳ)`; an empty `det` is the constancy atom.
    Dep {
        det: Vec<Var>,
        dependent: Vec<Var>,
    },
    /// `dep((x̄₁,x̄₂),(ȳ₁,ȳ₂))`: `s(x̄₁) = t(x̄₂)` implies `s(ȳ₁) = t(ȳ₂)`.
    GenDep {
        x1: Vec<Var>,
        x2: Vec<Var>,
        y1: Vec<Var>,
        y2: Vec<Var>,
    },
    /// `x̄ ⊥_z̄ ȳ`; an empty `cond` is pure independence.
    Indep {
        left: Vec<Var>,
        cond: Vec<Var>,
        right: Vec<Var>,
    },
    /// `x̄ ⊆ ȳ`.
    Incl {
        sub: Vec<Var>,
        sup: Vec<Var>,
    },
    /// `x̄ | ȳ`: the two tuples never share a value.
    Excl {
        left: Vec<Var>,
        right: Vec<Var>,
    },
    /// `nc(x₁…x_k, y)`.
    Nc {
        xs: Vec<Var>,
        y: Var,
    },
    /// `ncc(x₁…x_k)`.
    Ncc {
        xs: Vec<Var>,
    },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

fn same_len(what: &str, a: &[Var], b: &[Var]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Arity(format!("{what}: tuples of length {} and {}", a.len(), b.len())));
    }
    Ok(())
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::Neq(a, b)
    }

    /// Equality of two variables.
    pub fn var_eq(a: &Var, b: &Var) -> Formula {
        Formula::Eq(Term::Var(a.clone()), Term::Var(b.clone()))
    }

    pub fn var_neq(a: &Var, b: &Var) -> Formula {
        Formula::Neq(Term::Var(a.clone()), Term::Var(b.clone()))
    }

    pub fn dep(det: Vec<Var>, dependent: Vec<Var>) -> Formula {
        Formula::Dep { det, dependent }
    }

    pub fn gen_dep(x1: Vec<Var>, x2: Vec<Var>, y1: Vec<Var>, y2: Vec<Var>) -> Result<Formula> {
        same_len("generalised dependence", &x1, &x2)?;
        same_len("generalised dependence", &y1, &y2)?;
        Ok(Formula::GenDep { x1, x2, y1, y2 })
    }

    pub fn indep(left: Vec<Var>, cond: Vec<Var>, right: Vec<Var>) -> Formula {
        Formula::Indep { left, cond, right }
    }

    pub fn incl(sub: Vec<Var>, sup: Vec<Var>) -> Result<Formula> {
        same_len("inclusion", &sub, &sup)?;
        Ok(Formula::Incl { sub, sup })
    }

    pub fn excl(left: Vec<Var>, right: Vec<Var>) -> Result<Formula> {
        same_len("exclusion", &left, &right)?;
        Ok(Formula::Excl { left, right })
    }

    pub fn nc(xs: Vec<Var>, y: Var) -> Formula {
        Formula::Nc { xs, y }
    }

    pub fn ncc(xs: Vec<Var>) -> Formula {
        Formula::Ncc { xs }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: Var, body: Formula) -> Formula {
        Formula::Exists(x, Box::new(body))
    }

    pub fn forall(x: Var, body: Formula) -> Formula {
        Formula::Forall(x, Box::new(body))
    }

    /// `∃x₁…∃x_k body`, outermost first.
    pub fn exists_all(xs: &[Var], body: Formula) -> Formula {
        xs.iter().rev().fold(body, |f, x| Formula::exists(x.clone(), f))
    }

    pub fn forall_all(xs: &[Var], body: Formula) -> Formula {
        xs.iter().rev().fold(body, |f, x| Formula::forall(x.clone(), f))
    }

    /// Left-nested conjunction; a single conjunct is returned unwrapped.
    ///
    /// Panics on an empty iterator.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items.into_iter().reduce(Formula::and).expect("empty conjunction")
    }

    /// Left-nested disjunction; a single disjunct is returned unwrapped.
    ///
    /// Panics on an empty iterator.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items.into_iter().reduce(Formula::or).expect("empty disjunction")
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, Formula::And(..) | Formula::Or(..) | Formula::Exists(..) | Formula::Forall(..))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Formula::Eq(..) | Formula::Neq(..))
    }

    /// Flattened list of top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                other => out.push(other),
            }
        }
        out
    }

    /// Checks the tuple-length constraints throughout the formula.
    pub fn validate(&self) -> Result<()> {
        match self {
            Formula::GenDep { x1, x2, y1, y2 } => {
                same_len("generalised dependence", x1, x2)?;
                same_len("generalised dependence", y1, y2)
            }
            Formula::Incl { sub, sup } => same_len("inclusion", sub, sup),
            Formula::Excl { left, right } => same_len("exclusion", left, right),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.validate()?;
                b.validate()
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => f.validate(),
            _ => Ok(()),
        }
    }

    /// Variables occurring in an atom, in order of appearance (with repeats).
    pub fn atom_vars(&self) -> Vec<&Var> {
        fn term(t: &Term) -> Option<&Var> {
            match t {
                Term::Var(v) => Some(v),
                Term::Const(_) => None,
            }
        }
        match self {
            Formula::Eq(a, b) | Formula::Neq(a, b) => term(a).into_iter().chain(term(b)).collect(),
            Formula::Dep { det, dependent } => det.iter().chain(dependent).collect(),
            Formula::GenDep { x1, x2, y1, y2 } => x1.iter().chain(x2).chain(y1).chain(y2).collect(),
            Formula::Indep { left, cond, right } => left.iter().chain(cond).chain(right).collect(),
            Formula::Incl { sub, sup } => sub.iter().chain(sup).collect(),
            Formula::Excl { left, right } => left.iter().chain(right).collect(),
            Formula::Nc { xs, y } => xs.iter().chain(std::iter::once(y)).collect(),
            Formula::Ncc { xs } => xs.iter().collect(),
            _ => Vec::new(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Exists(x, f) | Formula::Forall(x, f) => {
                let mut s = f.free_vars();
                s.remove(x);
                s
            }
            atom => atom.atom_vars().into_iter().cloned().collect(),
        }
    }

    /// Constants mentioned anywhere in the formula.
    pub fn constants(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Eq(a, b) | Formula::Neq(a, b) = f {
                for t in [a, b] {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            _ => {}
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// Syntactic fragment flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Fragment {
    pub uses_independence: bool,
    pub uses_inclusion: bool,
    pub uses_or: bool,
    pub uses_exists: bool,
    pub uses_forall: bool,
    /// Generalised dependence, `nc` or `ncc`.
    pub uses_extended_atoms: bool,
    pub uses_exclusion: bool,
}

impl Fragment {
    /// Dependence logic: no independence and no inclusion atoms.
    pub fn is_fo_dep(&self) -> bool {
        !self.uses_independence && !self.uses_inclusion
    }

    /// Only atoms and conjunctions: the probabilistic evaluator handles these directly.
    pub fn is_quantifier_free_conjunctive(&self) -> bool {
        !self.uses_or && !self.uses_exists && !self.uses_forall
    }

    pub fn name(&self) -> &'static str {
        if self.is_fo_dep() {
            "FO(dep)"
        } else if !self.uses_inclusion {
            "FO(indep)"
        } else {
            "FO(indep, incl)"
        }
    }
}

pub fn classify(f: &Formula) -> Fragment {
    let mut fr = Fragment::default();
    f.visit(&mut |g| match g {
        Formula::Indep { .. } => fr.uses_independence = true,
        Formula::Incl { .. } => fr.uses_inclusion = true,
        Formula::Excl { .. } => fr.uses_exclusion = true,
        Formula::GenDep { .. } | Formula::Nc { .. } | Formula::Ncc { .. } => fr.uses_extended_atoms = true,
        Formula::Or(..) => fr.uses_or = true,
        Formula::Exists(..) => fr.uses_exists = true,
        Formula::Forall(..) => fr.uses_forall = true,
        _ => {}
    });
    fr
}

pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    f.free_vars()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::vars;

    #[test]
    fn free_variables() {
        let d = Formula::dep(vars("m1 l"), vars("o1"));
        assert_eq!(d.free_vars(), vars("l m1 o1").into_iter().collect());
        let e = Formula::exists(Var::new("l"), d);
        assert_eq!(e.free_vars(), vars("m1 o1").into_iter().collect());
        let n = Formula::ncc(vars("m1 m2 m3 m4"));
        assert_eq!(n.free_vars().len(), 4);
    }

    #[test]
    fn fragments() {
        assert_eq!(classify(&Formula::var_eq(&Var::new("x"), &Var::new("y"))), Fragment::default());
        let f = Formula::and(
            Formula::indep(vars("x"), vec![], vars("y")),
            Formula::exists(Var::new("v"), Formula::incl(vars("v"), vars("x")).unwrap()),
        );
        let fr = classify(&f);
        assert!(fr.uses_independence && fr.uses_inclusion && fr.uses_exists);
        assert!(!fr.is_fo_dep());
        assert!(classify(&Formula::ncc(vars("a b"))).is_fo_dep());
    }

    #[test]
    fn arity_checks() {
        assert!(matches!(Formula::incl(vars("a b"), vars("c")), Err(Error::Arity(_))));
        assert!(Formula::gen_dep(vars("a"), vars("b c"), vars("d"), vars("e")).is_err());
        assert!(Formula::excl(vars("a"), vars("b")).is_ok());
    }

    #[test]
    fn conj_nesting() {
        let a = Formula::dep(vec![], vars("x"));
        let b = Formula::dep(vec![], vars("y"));
        let c = Formula::dep(vec![], vars("z"));
        assert_eq!(Formula::conj([a.clone()]), a);
        assert_eq!(
            Formula::conj([a.clone(), b.clone(), c.clone()]),
            Formula::and(Formula::and(a.clone(), b.clone()), c.clone())
        );
        assert_eq!(Formula::conj([a.clone(), b.clone(), c.clone()]).conjuncts(), vec![&a, &b, &c]);
    }
}
