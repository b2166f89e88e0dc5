//! Probabilistic team semantics for atoms, ∧ and ∀, plus witness checking for ∃.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::eval::eval_atom_rel;
use crate::formula::Formula;
use crate::prob::{Dist, ProbTeam};
use crate::scalar::Scalar;
use crate::team::Row;
use crate::value::{Value, Var};

/// `ℙ(event | condition)` where both sides fix variables to values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondProbQuery {
    pub event: Vec<(Var, Value)>,
    pub condition: Vec<(Var, Value)>,
}

impl CondProbQuery {
    pub fn new(event: Vec<(Var, Value)>, condition: Vec<(Var, Value)>) -> Self {
        CondProbQuery { event, condition }
    }
}

fn matches(domain: &[Var], row: &[Value], fixed: &[(Var, Value)]) -> Result<bool> {
    for (x, v) in fixed {
        let i = domain
            .iter()
            .position(|d| d == x)
            .ok_or_else(|| Error::Domain(format!("variable {x} is not in the team domain")))?;
        if row[i] != *v {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn cond_prob<T: Scalar>(pt: &ProbTeam<T>, q: &CondProbQuery) -> Result<Ratio<T>> {
    let mut cond = Ratio::zero();
    let mut both = Ratio::zero();
    for (r, w) in pt.weights() {
        if matches(pt.domain(), r, &q.condition)? {
            cond = cond + w.clone();
            if matches(pt.domain(), r, &q.event)? {
                both = both + w.clone();
            }
        }
    }
    if cond.is_zero() {
        let shown: Vec<String> = q.condition.iter().map(|(x, v)| format!("{x}={v}")).collect();
        return Err(Error::Condition(format!("ℙ({}) = 0", shown.join(","))));
    }
    Ok(both / cond)
}

/// `𝕏 ⊨ φ` for φ built from atoms with ∧ and ∀.
///
/// Dependence and independence use their probabilistic clauses; the other
/// atoms and literals are evaluated on the support.
pub fn eval_prob<T: Scalar>(pt: &ProbTeam<T>, f: &Formula) -> Result<bool> {
    let mut bad = None;
    f.visit(&mut |g| {
        if bad.is_none() && matches!(g, Formula::Or(..) | Formula::Exists(..)) {
            bad = Some(g.to_string());
        }
    });
    if let Some(g) = bad {
        return Err(Error::Unsupported(format!("probabilistic evaluation of ∨ and ∃ needs an explicit witness ({g})")));
    }
    f.validate()?;
    for v in f.free_vars() {
        if !pt.domain().contains(&v) {
            return Err(Error::Domain(format!("variable {v} is not bound by the team")));
        }
    }
    eval(pt, f)
}

fn eval<T: Scalar>(pt: &ProbTeam<T>, f: &Formula) -> Result<bool> {
    if pt.is_empty() {
        return Ok(true);
    }
    match f {
        Formula::And(a, b) => Ok(eval(pt, a)? && eval(pt, b)?),
        Formula::Forall(x, g) => {
            let ext = pt.prob_uniform_extend(x, pt.universe())?;
            eval(&ext, g)
        }
        Formula::Dep { det, dependent } => dep(pt, det, dependent),
        Formula::Indep { left, cond, right } => indep(pt, left, cond, right),
        Formula::Or(..) | Formula::Exists(..) => unreachable!("rejected above"),
        atom => eval_atom_rel(pt.support(), atom),
    }
}

fn project(idx: &[usize], r: &[Value]) -> Row {
    idx.iter().map(|&i| r[i].clone()).collect()
}

fn add<K: std::hash::Hash + Eq, T: Scalar>(m: &mut HashMap<K, Ratio<T>>, k: K, w: &Ratio<T>) {
    let slot = m.entry(k).or_insert_with(Ratio::zero);
    *slot = slot.clone() + w.clone();
}

/// Every antecedent value fixes the consequent with conditional probability 1.
fn dep<T: Scalar>(pt: &ProbTeam<T>, x: &[Var], y: &[Var]) -> Result<bool> {
    let (xi, yi) = (pt.support().indices_of(x)?, pt.support().indices_of(y)?);
    let mut px: HashMap<Row, Ratio<T>> = HashMap::new();
    let mut pxy: HashMap<(Row, Row), Ratio<T>> = HashMap::new();
    for (r, w) in pt.weights() {
        add(&mut px, project(&xi, r), w);
        add(&mut pxy, (project(&xi, r), project(&yi, r)), w);
    }
    Ok(pxy.iter().all(|((a, _), p)| *p == px[a]))
}

/// `ℙ(x̄ȳz̄)·ℙ(z̄) = ℙ(x̄z̄)·ℙ(ȳz̄)` for all value combinations within each z̄-class.
fn indep<T: Scalar>(pt: &ProbTeam<T>, x: &[Var], z: &[Var], y: &[Var]) -> Result<bool> {
    let s = pt.support();
    let (xi, zi, yi) = (s.indices_of(x)?, s.indices_of(z)?, s.indices_of(y)?);
    let mut pz: HashMap<Row, Ratio<T>> = HashMap::new();
    let mut pxz: HashMap<(Row, Row), Ratio<T>> = HashMap::new();
    let mut pyz: HashMap<(Row, Row), Ratio<T>> = HashMap::new();
    let mut pxyz: HashMap<(Row, Row, Row), Ratio<T>> = HashMap::new();
    let mut classes: BTreeMap<Row, (BTreeSet<Row>, BTreeSet<Row>)> = BTreeMap::new();
    for (r, w) in pt.weights() {
        let (a, b, c) = (project(&xi, r), project(&yi, r), project(&zi, r));
        add(&mut pz, c.clone(), w);
        add(&mut pxz, (a.clone(), c.clone()), w);
        add(&mut pyz, (b.clone(), c.clone()), w);
        add(&mut pxyz, (a.clone(), b.clone(), c.clone()), w);
        let class = classes.entry(c).or_default();
        class.0.insert(a);
        class.1.insert(b);
    }
    for (c, (xs, ys)) in classes {
        for a in &xs {
            for b in &ys {
                let joint = pxyz.get(&(a.clone(), b.clone(), c.clone())).cloned().unwrap_or_else(Ratio::zero);
                let lhs = joint * pz[&c].clone();
                let rhs = pxz[&(a.clone(), c.clone())].clone() * pyz[&(b.clone(), c.clone())].clone();
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Does the Skolem extension of `pt` by `family` satisfy `f`?
pub fn check_skolem_witness<T: Scalar>(
    pt: &ProbTeam<T>,
    x: &Var,
    family: &BTreeMap<Row, Dist<T>>,
    f: &Formula,
) -> Result<bool> {
    eval_prob(&pt.prob_skolem_extend(x, family)?, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::point;
    use crate::scalar::parse_ratio;
    use crate::team::Team;
    use crate::value::{row, vars};
    use num_bigint::BigInt;

    fn pt1() -> ProbTeam {
        let data = [
            ("0 0 0 0", "2/10"),
            ("0 0 0 1", "2/10"),
            ("0 0 1 0", "2/10"),
            ("0 0 1 1", "1/10"),
            ("0 1 1 1", "1/10"),
            ("1 0 1 1", "1/10"),
            ("1 1 1 1", "1/10"),
        ];
        ProbTeam::new(vars("x y z w"), data.iter().map(|(r, p)| (row(r), parse_ratio::<BigInt>(p).unwrap()))).unwrap()
    }

    fn holds(pt: &ProbTeam, f: &str) -> bool {
        eval_prob(pt, &f.parse().unwrap()).unwrap()
    }

    fn fix(pairs: &[(&str, &str)]) -> Vec<(Var, Value)> {
        pairs.iter().map(|(x, v)| (Var::from(*x), Value::from(*v))).collect()
    }

    #[test]
    fn conditional_probabilities() {
        let q = CondProbQuery::new(fix(&[("z", "0")]), fix(&[("x", "0"), ("y", "0")]));
        assert_eq!(cond_prob(&pt1(), &q).unwrap(), parse_ratio("4/7").unwrap());
        let same = CondProbQuery::new(fix(&[("x", "1")]), fix(&[("x", "1")]));
        assert_eq!(cond_prob(&pt1(), &same).unwrap(), parse_ratio("1").unwrap());
        let never = CondProbQuery::new(fix(&[("x", "1")]), fix(&[("x", "7")]));
        assert!(matches!(cond_prob(&pt1(), &never), Err(Error::Condition(_))));
    }

    #[test]
    fn pt1_separates() {
        let pt = pt1();
        assert!(holds(&pt, "z _||_{x} w & z _||_{y} w & x _||_{w z} y"));
        assert!(!holds(&pt, "z _||_{x y} w"));
        // the support does satisfy the conditional independence
        let f = "z _||_{x y} w".parse().unwrap();
        assert!(crate::eval::eval_rel(pt.support(), &f, &Default::default()).unwrap());
    }

    #[test]
    fn rejects_search_fragment() {
        let e = eval_prob(&pt1(), &"dep(x, y) | dep(y, x)".parse().unwrap()).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
        assert!(matches!(eval_prob(&pt1(), &"dep(q, x)".parse().unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn skolem_witnesses() {
        let t = Team::new(vars("m o"), [row("a 0"), row("a 1"), row("b 0")]).unwrap();
        let pt = ProbTeam::uniform(&t).unwrap();
        let l = Var::from("l");
        // a private hidden value per row determines everything
        let own: BTreeMap<Row, Dist<BigInt>> =
            pt.weights().map(|(r, _)| (r.clone(), point(Value::tuple(r.iter())))).collect();
        assert!(check_skolem_witness(&pt, &l, &own, &"dep(m l, o)".parse().unwrap()).unwrap());
        let constant: BTreeMap<Row, Dist<BigInt>> =
            pt.weights().map(|(r, _)| (r.clone(), point(Value::from("c")))).collect();
        assert!(check_skolem_witness(&pt, &l, &constant, &"dep(, l)".parse().unwrap()).unwrap());
        assert!(!check_skolem_witness(&pt, &l, &constant, &"dep(m l, o)".parse().unwrap()).unwrap());
    }

    #[test]
    fn forall_extends_uniformly() {
        let t = Team::new(vars("x"), [row("0"), row("1")]).unwrap();
        let pt = ProbTeam::<BigInt>::uniform(&t).unwrap();
        assert!(holds(&pt, "A y . x _||_ y"));
        assert!(!holds(&pt, "A y . dep(x, y)"));
    }
}
