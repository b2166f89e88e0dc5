//! Bounded search for counterexamples to entailments between formulas.
//!
//! A search that comes back empty only means there is no counterexample
//! within the bounds; the sole exception is the FO(dep) rule, under which a
//! relational verdict carries over to probabilistic semantics.

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{eval_prob, eval_rel, EvalBudget};
use crate::formula::{classify, Formula};
use crate::hvmodel::hidden_domain;
use crate::prob::ProbTeam;
use crate::properties::{property_formula, PropertyName};
use crate::random::{self, symbols, DENOMINATOR};
use crate::scalar::parse_ratio;
use crate::team::{Row, Team};
use crate::value::{row, vars, Var};

/// Teams examined by one search may not exceed this.
pub const TEAM_CAP: u64 = 50_000_000;

/// `Σ_{r ≤ max_rows} C(space, r)`, saturating.
fn team_count(space: u64, max_rows: usize) -> u64 {
    let mut total: u64 = 0;
    let mut c: u64 = 1;
    for r in 0..=max_rows as u64 {
        if r > space {
            break;
        }
        total = total.saturating_add(c);
        c = c.saturating_mul(space - r) / (r + 1);
    }
    total
}

/// Every team over `vars` with at most `max_rows` rows from a `universe_size`
/// symbol universe, by size and then lexicographically by row index.
///
/// `visit` returns `Ok(true)` to stop. Yields the number of teams visited.
pub fn sweep_teams<F>(vars: &[Var], universe_size: usize, max_rows: usize, mut visit: F) -> Result<u64>
where
    F: FnMut(&Team) -> Result<bool>,
{
    if universe_size == 0 || max_rows == 0 {
        return Err(Error::Argument("universe size and row bound must be positive".into()));
    }
    let syms = symbols(universe_size);
    let space = (universe_size as u64)
        .checked_pow(vars.len() as u32)
        .filter(|&s| s <= 1 << 20)
        .ok_or_else(|| Error::Budget(format!("{universe_size}^{} assignments", vars.len())))?;
    let teams = team_count(space, max_rows);
    if teams > TEAM_CAP {
        return Err(Error::Budget(format!("{teams} candidate teams exceed the cap of {TEAM_CAP}")));
    }
    let all: Vec<Row> = (0..space)
        .map(|mut code| {
            let mut r = vec![syms[0].clone(); vars.len()];
            for slot in r.iter_mut().rev() {
                *slot = syms[(code % universe_size as u64) as usize].clone();
                code /= universe_size as u64;
            }
            r
        })
        .collect();
    let mut visited = 0;
    let space = space as usize;
    for size in 0..=max_rows.min(space) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            let t = Team::with_universe(vars.to_vec(), idx.iter().map(|&i| all[i].clone()), syms.iter().cloned())?;
            visited += 1;
            if visit(&t)? {
                return Ok(visited);
            }
            // next combination
            let mut i = size;
            while i > 0 && idx[i - 1] == space - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(visited)
}

#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub found: Option<Team>,
    pub teams_checked: u64,
}

/// The first team (in canonical order) satisfying `lhs` but not `rhs`.
pub fn find_rel_counterexample(
    lhs: &Formula,
    rhs: &Formula,
    vars: &[Var],
    universe_size: usize,
    max_rows: usize,
    budget: &EvalBudget,
) -> Result<Counterexample> {
    for f in [lhs, rhs] {
        f.validate()?;
        if let Some(v) = f.free_vars().into_iter().find(|v| !vars.contains(v)) {
            return Err(Error::Domain(format!("free variable {v} is not among the search variables")));
        }
    }
    let mut found = None;
    let teams_checked = sweep_teams(vars, universe_size, max_rows, |t| {
        if eval_rel(t, lhs, budget)? && !eval_rel(t, rhs, budget)? {
            found = Some(t.clone());
            return Ok(true);
        }
        Ok(false)
    })?;
    Ok(Counterexample { found, teams_checked })
}

/// Verdict of `entail`: the bounded relational search plus what it licenses.
#[derive(Clone, Debug, Serialize)]
pub struct EntailReport {
    pub lhs: String,
    pub rhs: String,
    pub fragment: &'static str,
    pub teams_checked: u64,
    pub counterexample: Option<Team>,
    /// Relational and probabilistic entailment coincide for FO(dep).
    pub applies_to_prob: bool,
    pub verdict: String,
}

pub fn entail(
    lhs: &Formula,
    rhs: &Formula,
    vars: &[Var],
    universe_size: usize,
    max_rows: usize,
    budget: &EvalBudget,
) -> Result<EntailReport> {
    let c = find_rel_counterexample(lhs, rhs, vars, universe_size, max_rows, budget)?;
    let fo_dep = classify(lhs).is_fo_dep() && classify(rhs).is_fo_dep();
    let verdict = match (&c.found, fo_dep) {
        (Some(_), true) => "not entailed (relational and probabilistic)".to_string(),
        (Some(_), false) => "not entailed (relational)".to_string(),
        (None, _) => format!("no counterexample within universe {universe_size}, at most {max_rows} rows"),
    };
    let fragment = if fo_dep { "FO(dep)" } else { classify(lhs).name().max(classify(rhs).name()) };
    Ok(EntailReport {
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        fragment,
        teams_checked: c.teams_checked,
        counterexample: c.found,
        applies_to_prob: fo_dep,
        verdict,
    })
}

pub fn psi1() -> Formula {
    "z _||_{x} w & z _||_{y} w & x _||_{w z} y".parse().expect("well-formed")
}

pub fn phi1() -> Formula {
    "z _||_{x y} w".parse().expect("well-formed")
}

pub fn psi2() -> Formula {
    "x _||_{y z} y & z _||_{x} w & z _||_{y} w & x _||_ y".parse().expect("well-formed")
}

pub fn phi2() -> Formula {
    "z _||_ w".parse().expect("well-formed")
}

/// The seven-row probabilistic team separating ψ₁ from φ₁.
pub fn pt1() -> ProbTeam<BigInt> {
    let data = [
        ("0 0 0 0", "2/10"),
        ("0 0 0 1", "2/10"),
        ("0 0 1 0", "2/10"),
        ("0 0 1 1", "1/10"),
        ("0 1 1 1", "1/10"),
        ("1 0 1 1", "1/10"),
        ("1 1 1 1", "1/10"),
    ];
    ProbTeam::new(vars("x y z w"), data.iter().map(|(r, p)| (row(r), parse_ratio(p).expect("ratio"))))
        .expect("weights sum to one")
}

/// The six-row relational team separating ψ₂ from φ₂.
pub fn rt2() -> Team {
    Team::new(vars("x y z w"), ["0 0 0 0", "0 0 0 1", "0 1 0 0", "1 0 0 0", "1 1 0 0", "1 1 1 0"].map(row))
        .expect("rows match")
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub pt1_psi1: bool,
    pub pt1_phi1: bool,
    pub rt2_psi2: bool,
    pub rt2_phi2: bool,
    pub psi1_phi1_rel: Counterexample,
}

impl SeparationReport {
    pub fn ok(&self) -> bool {
        self.pt1_psi1 && !self.pt1_phi1 && self.rt2_psi2 && !self.rt2_phi2 && self.psi1_phi1_rel.found.is_none()
    }
}

pub fn verify_separations(budget: &EvalBudget) -> Result<SeparationReport> {
    let pt = pt1();
    let rt = rt2();
    Ok(SeparationReport {
        pt1_psi1: eval_prob(&pt, &psi1())?,
        pt1_phi1: eval_prob(&pt, &phi1())?,
        rt2_psi2: eval_rel(&rt, &psi2(), budget)?,
        rt2_phi2: eval_rel(&rt, &phi2(), budget)?,
        psi1_phi1_rel: find_rel_counterexample(&psi1(), &phi1(), &vars("x y z w"), 2, 7, budget)?,
    })
}

/// One implication between model properties.
#[derive(Clone, Debug)]
pub struct Implication {
    pub name: &'static str,
    pub lhs: Vec<PropertyName>,
    pub rhs: Vec<PropertyName>,
}

impl Implication {
    fn formulas(&self, n: usize) -> (Formula, Formula) {
        let f = |ps: &[PropertyName]| Formula::conj(ps.iter().map(|p| property_formula(*p, n)));
        (f(&self.lhs), f(&self.rhs))
    }
}

/// The implications between hidden-variable properties checked by `entailments`.
pub fn property_implications() -> Vec<Implication> {
    use PropertyName::*;
    vec![
        Implication { name: "SingVal => lambda-Indep", lhs: vec![SingValH], rhs: vec![LambdaIndepH] },
        Implication { name: "WeakDet => Out-Indep", lhs: vec![WeakDetH], rhs: vec![OutIndepH] },
        Implication { name: "StrongDet => WeakDet & Par-Indep", lhs: vec![StrongDetH], rhs: vec![WeakDetH, ParIndepH] },
        Implication { name: "WeakDet & Par-Indep => StrongDet", lhs: vec![WeakDetH, ParIndepH], rhs: vec![StrongDetH] },
        Implication {
            name: "lambda-Indep & Par-Indep => NoSig",
            lhs: vec![LambdaIndepH, ParIndepH],
            rhs: vec![NoSigE],
        },
    ]
}

#[derive(Clone, Copy, Debug)]
pub struct EntailBounds {
    pub universe: usize,
    pub max_rows: usize,
    /// Random probabilistic teams per implication.
    pub samples: usize,
    /// Row bound for the random teams.
    pub sample_rows: usize,
    pub seed: u64,
}

impl Default for EntailBounds {
    fn default() -> Self {
        EntailBounds { universe: 2, max_rows: 4, samples: 2000, sample_rows: 6, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationReport {
    pub name: &'static str,
    pub rel_teams_checked: u64,
    /// Teams satisfying the left-hand side.
    pub rel_premise_hits: u64,
    pub rel_counterexample: Option<Team>,
    pub prob_samples: usize,
    pub prob_premise_hits: usize,
    pub prob_counterexample: Option<String>,
}

impl ImplicationReport {
    pub fn ok(&self) -> bool {
        self.rel_counterexample.is_none() && self.prob_counterexample.is_none()
    }
}

/// Exhaustive relational and randomised probabilistic confirmation of the
/// property implications at the given arity.
pub fn verify_property_entailments(
    n: usize,
    bounds: EntailBounds,
    budget: &EvalBudget,
) -> Result<Vec<ImplicationReport>> {
    if n == 0 {
        return Err(Error::Argument("arity must be positive".into()));
    }
    let domain = hidden_domain(n);
    let imps = property_implications();
    let forms: Vec<(Formula, Formula)> = imps.iter().map(|i| i.formulas(n)).collect();
    let mut reports: Vec<ImplicationReport> = imps
        .iter()
        .map(|i| ImplicationReport {
            name: i.name,
            rel_teams_checked: 0,
            rel_premise_hits: 0,
            rel_counterexample: None,
            prob_samples: 0,
            prob_premise_hits: 0,
            prob_counterexample: None,
        })
        .collect();
    let checked = sweep_teams(&domain, bounds.universe, bounds.max_rows, |t| {
        for (rep, (l, r)) in reports.iter_mut().zip(&forms) {
            if rep.rel_counterexample.is_some() || !eval_rel(t, l, budget)? {
                continue;
            }
            rep.rel_premise_hits += 1;
            if !eval_rel(t, r, budget)? {
                rep.rel_counterexample = Some(t.clone());
            }
        }
        Ok(false)
    })?;
    let mut rng = random::rng(bounds.seed);
    for (rep, (l, r)) in reports.iter_mut().zip(&forms) {
        rep.rel_teams_checked = checked;
        for _ in 0..bounds.samples {
            let t = random::team(&mut rng, &domain, bounds.universe, bounds.sample_rows);
            let pt: ProbTeam<BigInt> = random::weigh(&mut rng, &t, DENOMINATOR);
            rep.prob_samples += 1;
            if !eval_prob(&pt, l)? {
                continue;
            }
            rep.prob_premise_hits += 1;
            if !eval_prob(&pt, r)? && rep.prob_counterexample.is_none() {
                rep.prob_counterexample = Some(format!("{pt}"));
            }
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_teams() {
        assert_eq!(team_count(16, 7), 26333);
        assert_eq!(team_count(3, 5), 8);
        let mut seen = 0;
        let n = sweep_teams(&vars("x y"), 2, 4, |_| {
            seen += 1;
            Ok(false)
        })
        .unwrap();
        assert_eq!((n, seen), (16, 16));
    }

    #[test]
    fn separations_hold() {
        let r = verify_separations(&EvalBudget::default()).unwrap();
        assert!(r.ok(), "{r:?}");
        assert_eq!(r.psi1_phi1_rel.teams_checked, 26333);
    }

    #[test]
    fn reflexive_entailment_has_no_counterexample() {
        let f = psi2();
        let c = find_rel_counterexample(&f, &f, &vars("x y z w"), 2, 3, &EvalBudget::default()).unwrap();
        assert!(c.found.is_none());
    }

    #[test]
    fn weak_determinism_does_not_give_strong() {
        let (l, r) = (property_formula(PropertyName::WeakDetH, 2), property_formula(PropertyName::StrongDetH, 2));
        let c = find_rel_counterexample(&l, &r, &hidden_domain(2), 2, 4, &EvalBudget::default()).unwrap();
        let t = c.found.expect("counterexample");
        assert!(eval_rel(&t, &l, &EvalBudget::default()).unwrap());
        assert!(!eval_rel(&t, &r, &EvalBudget::default()).unwrap());
    }

    #[test]
    fn signalling_without_lambda_independence() {
        let l = property_formula(PropertyName::ParIndepH, 2);
        let r = property_formula(PropertyName::NoSigE, 2);
        let c = find_rel_counterexample(&l, &r, &hidden_domain(2), 2, 4, &EvalBudget::default()).unwrap();
        assert!(c.found.is_some());
    }

    #[test]
    fn fo_dep_verdicts_carry_over() {
        let l: Formula = "dep(x, y) & dep(y, z)".parse().unwrap();
        let r: Formula = "dep(x, z)".parse().unwrap();
        let rep = entail(&l, &r, &vars("x y z"), 2, 3, &EvalBudget::default()).unwrap();
        assert!(rep.applies_to_prob && rep.counterexample.is_none());
        let rep = entail(&r, &l, &vars("x y z"), 2, 3, &EvalBudget::default()).unwrap();
        assert!(rep.counterexample.is_some());
    }

    #[test]
    fn strong_determinism_implies_locality() {
        let l = property_formula(PropertyName::StrongDetH, 2);
        let r = property_formula(PropertyName::LocH, 2);
        let c = find_rel_counterexample(&l, &r, &hidden_domain(2), 2, 4, &EvalBudget::default()).unwrap();
        assert!(c.found.is_none());
    }

    #[test]
    fn oversized_searches_are_refused() {
        let f: Formula = "dep(x, y)".parse().unwrap();
        let e = find_rel_counterexample(&f, &f, &vars("x y z w v u"), 3, 8, &EvalBudget::default()).unwrap_err();
        assert!(e.is_budget());
    }
}
