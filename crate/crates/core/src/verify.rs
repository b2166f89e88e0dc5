//! Bundled invariant suites, each a list of named checks with a verdict.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::constructions::{construct_single_valued, construct_strong_det, construct_weakdet_lambdaindep, localize};
use crate::entailment::{sweep_teams, verify_property_entailments, verify_separations, EntailBounds};
use crate::error::{Error, Result};
use crate::eval::{eval_atom_rel, eval_prob, eval_rel, EvalBudget};
use crate::formula::{gendep_defining_formula, nc_defining_formula, nc_defining_formula_exact, Formula};
use crate::hvmodel::{empirically_equivalent, fig1_commutes, Equivalence, Model};
use crate::json::TeamData;
use crate::nogo::{
    cabello_config, exists_local_lambdaindep, exists_strongdet_lambdaindep, hardy_conditions, hardy_team,
    verify_ks_theorems, KSConfiguration,
};
use crate::properties::{check_property, PropertyName};
use crate::random::{self, Rng64, DENOMINATOR};
use crate::team::{Row, Team};
use crate::value::{vars, Value, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fig1,
    Appendix,
    Separations,
    Entailments,
    Ks,
    Hardy,
    Semantics,
    Constructions,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Fig1,
        Suite::Appendix,
        Suite::Separations,
        Suite::Entailments,
        Suite::Ks,
        Suite::Hardy,
        Suite::Semantics,
        Suite::Constructions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Fig1 => "fig1",
            Suite::Appendix => "appendix",
            Suite::Separations => "separations",
            Suite::Entailments => "entailments",
            Suite::Ks => "ks",
            Suite::Hardy => "hardy",
            Suite::Semantics => "semantics",
            Suite::Constructions => "constructions",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Argument(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random instances per sampled check; suites raise it to their minimum.
    pub samples: usize,
    pub budget: EvalBudget,
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport { suite, checks: Vec::new() };
    match suite {
        Suite::Fig1 => fig1(&mut r, opts)?,
        Suite::Appendix => appendix(&mut r, opts)?,
        Suite::Separations => separations(&mut r, opts)?,
        Suite::Entailments => entailments(&mut r, opts)?,
        Suite::Ks => ks(&mut r, opts)?,
        Suite::Hardy => hardy(&mut r, opts)?,
        Suite::Semantics => semantics(&mut r, opts)?,
        Suite::Constructions => constructions(&mut r, opts)?,
    }
    Ok(r)
}

fn fig1(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let mut rng = random::rng(opts.seed);
    let n = opts.samples.max(1000);
    let mut failures = 0;
    for k in 0..n {
        let pt = random::hidden_prob_team::<BigInt>(&mut rng, 1 + k % 3, 3, 8);
        if !fig1_commutes(&pt)? {
            failures += 1;
        }
    }
    r.check("collapse and projection commute", failures == 0, format!("{failures} failures in {n} random teams"));
    Ok(())
}

fn appendix(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let nc2 = Formula::nc(vars("x1 x2"), Var::new("y"));
    let cases: Vec<(&str, Formula, Formula, Vec<Var>)> = vec![
        (
            "dep((x1,x2),(y1,y2)) matches its defining formula",
            Formula::gen_dep(vars("x1"), vars("x2"), vars("y1"), vars("y2"))?,
            gendep_defining_formula(1, 1)?,
            vars("x1 x2 y1 y2"),
        ),
        (
            "nc(x1, y) matches its defining formula",
            Formula::nc(vars("x1"), Var::new("y")),
            nc_defining_formula(1)?,
            vars("x1 y"),
        ),
        (
            "nc(x1 x2, y) matches the formula with a conjunction of inequalities",
            nc2.clone(),
            nc_defining_formula_exact(2)?,
            vars("x1 x2 y"),
        ),
    ];
    for (name, atom, defining, vs) in cases {
        let mut disagreements = 0;
        let mut first = None;
        let teams = sweep_teams(&vs, 2, 3, |t| {
            if eval_atom_rel(t, &atom)? != eval_rel(t, &defining, &opts.budget)? {
                disagreements += 1;
                first.get_or_insert_with(|| t.to_string());
            }
            Ok(false)
        })?;
        let detail = match first {
            Some(t) => format!("{disagreements} of {teams} teams disagree, first {t}"),
            None => format!("agree on all {teams} teams with at most 3 rows over 2 symbols"),
        };
        r.check(name, disagreements == 0, detail);
    }
    // The disjunctive nc formula at k = 2 is implied by the atom but weaker.
    let disjunctive = nc_defining_formula(2)?;
    let (mut unsound, mut weaker) = (0, 0);
    let teams = sweep_teams(&vars("x1 x2 y"), 2, 3, |t| {
        match (eval_atom_rel(t, &nc2)?, eval_rel(t, &disjunctive, &opts.budget)?) {
            (true, false) => unsound += 1,
            (false, true) => weaker += 1,
            _ => {}
        }
        Ok(false)
    })?;
    r.check(
        "nc(x1 x2, y) implies the defining formula with a disjunction of inequalities",
        unsound == 0,
        format!("{teams} teams; the converse fails on {weaker}"),
    );
    Ok(())
}

fn separations(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let s = verify_separations(&opts.budget)?;
    r.check("PT1 satisfies psi1 (probabilistic)", s.pt1_psi1, "");
    r.check("PT1 violates phi1 (probabilistic)", !s.pt1_phi1, "");
    r.check("RT2 satisfies psi2 (relational)", s.rt2_psi2, "");
    r.check("RT2 violates phi2 (relational)", !s.rt2_phi2, "");
    r.check(
        "no relational counterexample to psi1 => phi1",
        s.psi1_phi1_rel.found.is_none(),
        format!("{} teams, universe 2, at most 7 rows", s.psi1_phi1_rel.teams_checked),
    );
    Ok(())
}

fn model(doc: &str) -> Model<BigInt> {
    crate::hvmodel::read_model(doc).expect("bundled example")
}

pub fn sig_lambda() -> Model<BigInt> {
    model(include_str!("../data/sig_lambda.json"))
}

fn entailments(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let bounds = EntailBounds { seed: opts.seed, samples: opts.samples.max(2000), ..EntailBounds::default() };
    for rep in verify_property_entailments(2, bounds, &opts.budget)? {
        let detail = format!(
            "{} teams ({} satisfy the premise); {} random probabilistic teams ({} satisfy the premise)",
            rep.rel_teams_checked, rep.rel_premise_hits, rep.prob_samples, rep.prob_premise_hits
        );
        let passed = rep.ok();
        r.check(rep.name, passed, detail);
    }
    let sl = sig_lambda();
    let weak = check_property(&sl, PropertyName::WeakDetH, &opts.budget)?;
    let strong = check_property(&sl, PropertyName::StrongDetH, &opts.budget)?;
    r.check("SIG-lambda: WeakDet without StrongDet", weak && !strong, "");
    Ok(())
}

/// Random valid configurations: subsets of the bundled bases, vectors renumbered.
pub fn sub_configuration(rng: &mut Rng64, cfg: &KSConfiguration) -> KSConfiguration {
    let mut bases = cfg.bases.clone();
    bases.shuffle(rng);
    let keep = rng.gen_range(1..=bases.len());
    bases.truncate(keep);
    let mut used: Vec<usize> = bases.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let index = |k: usize| used.binary_search(&k).expect("used vector");
    KSConfiguration {
        vectors: used.iter().map(|&k| cfg.vectors[k]).collect(),
        bases: bases.iter().map(|b| b.map(index)).collect(),
    }
}

fn ks(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let cfg = cabello_config();
    r.check("configuration is valid", cfg.validate().is_ok(), "18 vectors, 9 orthogonal bases, each vector twice");
    let rep = verify_ks_theorems(&cfg, &opts.budget)?;
    r.check("no set meets every basis once", rep.colouring.is_none(), "exhaustive search");
    r.check("parity argument applies", rep.parity_obstruction == Some(true), "");
    r.check("measurement team violates ncc(m1..m4)", !rep.ncc, "");
    r.check("no non-contextual extension with unit-vector outcomes", !rep.noncontextual_extension, "");
    r.check("the three checks agree", rep.consistent(), "");
    let mut rng = random::rng(opts.seed);
    let n = opts.samples.max(100);
    let mut disagreements = 0;
    let mut colourable = 0;
    for _ in 0..n {
        let sub = sub_configuration(&mut rng, &cfg);
        let rep = verify_ks_theorems(&sub, &opts.budget)?;
        colourable += rep.colouring.is_some() as usize;
        disagreements += !rep.consistent() as usize;
    }
    r.check(
        "checks agree on random sub-configurations",
        disagreements == 0,
        format!("{n} configurations, {colourable} colourable"),
    );
    Ok(())
}

/// Relabels a team over `{0,1}` column by column.
fn relabel(t: &Team, domain: &[Var], names: &[[&str; 2]]) -> Team {
    let rows = t
        .rows()
        .map(|r| r.iter().zip(names).map(|(v, pair)| Value::new(pair[(v.as_str() == "1") as usize])).collect::<Row>());
    Team::new(domain.to_vec(), rows).expect("relabelled rows")
}

fn hardy(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let e = Model::<BigInt>::empirical(TeamData::Relational(hardy_team()))?;
    r.check("HARDY meets the six conditions", hardy_conditions(e.team()).is_some(), "");
    let sd = exists_strongdet_lambdaindep(&e, &opts.budget)?;
    let loc = exists_local_lambdaindep(&e, &opts.budget)?;
    r.check("no StrongDet and lambda-Indep model exists", sd.is_none(), "");
    r.check("no Loc and lambda-Indep model exists", loc.is_none(), "");
    let domain = vars("m1 m2 o1 o2");
    let names = [["a1", "a2"], ["b1", "b2"], ["R", "G"], ["R", "G"]];
    let (mut models, mut realisable, mut disagreements, mut bad_witness) = (0u64, 0u64, 0u64, 0u64);
    let mut first = None;
    sweep_teams(&domain, 2, 8, |t| {
        if t.is_empty() {
            return Ok(false);
        }
        let e = Model::<BigInt>::empirical(TeamData::Relational(relabel(t, &domain, &names)))?;
        models += 1;
        let a = exists_strongdet_lambdaindep(&e, &opts.budget)?;
        let b = exists_local_lambdaindep(&e, &opts.budget)?;
        if a.is_some() != b.is_some() {
            disagreements += 1;
            first.get_or_insert_with(|| e.team().to_string());
        }
        if let Some(h) = &a {
            realisable += 1;
            // witnesses are re-checked on a deterministic sample
            if models % 53 == 0 {
                let ok = check_property(h, PropertyName::StrongDetH, &opts.budget)?
                    && check_property(h, PropertyName::LambdaIndepH, &opts.budget)?
                    && empirically_equivalent(&e, h, Equivalence::Joint)?;
                bad_witness += !ok as u64;
            }
        }
        Ok(false)
    })?;
    r.check(
        "Loc and StrongDet decisions agree on every 2x2 model with at most 8 rows",
        disagreements == 0 && bad_witness == 0,
        match first {
            Some(t) => format!("{disagreements} disagreements, first {t}"),
            None => format!("{models} models, {realisable} realisable, {bad_witness} bad witnesses"),
        },
    );
    Ok(())
}

/// A random conjunction of one to three dependence or independence atoms.
pub fn random_atoms(rng: &mut Rng64, vs: &[Var], dep_only: bool) -> Formula {
    let pick = |rng: &mut Rng64, max: usize| -> Vec<Var> {
        let k = rng.gen_range(0..=max);
        let mut out: Vec<Var> = vs.choose_multiple(rng, k).cloned().collect();
        out.sort();
        out
    };
    let count = rng.gen_range(1..=3);
    Formula::conj((0..count).map(|_| {
        if dep_only || rng.gen_bool(0.4) {
            let det = pick(rng, 2);
            let mut dependent = pick(rng, 2);
            if dependent.is_empty() {
                dependent.push(vs.choose(rng).expect("variables").clone());
            }
            Formula::dep(det, dependent)
        } else {
            let mut left = pick(rng, 2);
            let cond = pick(rng, 2);
            let mut right = pick(rng, 2);
            if left.is_empty() {
                left.push(vs[0].clone());
            }
            if right.is_empty() {
                right.push(vs[vs.len() - 1].clone());
            }
            Formula::indep(left, cond, right)
        }
    }))
}

fn semantics(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    let mut rng = random::rng(opts.seed);
    let n = opts.samples.max(10_000);
    let vs = vars("x y z w");
    let (mut violations, mut dep_mismatch, mut prob_true, mut deps) = (0, 0, 0, 0);
    for k in 0..n {
        let dep_only = k % 3 == 0;
        let f = random_atoms(&mut rng, &vs, dep_only);
        let t = random::team(&mut rng, &vs, 2 + k % 2, 8);
        let pt = random::weigh::<BigInt>(&mut rng, &t, DENOMINATOR);
        let p = eval_prob(&pt, &f)?;
        let rel = eval_rel(&t, &f, &opts.budget)?;
        prob_true += p as usize;
        if p && !rel {
            violations += 1;
        }
        if dep_only {
            deps += 1;
            dep_mismatch += (p != rel) as usize;
        }
    }
    r.check(
        "probabilistic truth implies relational truth",
        violations == 0,
        format!("{n} random pairs, {prob_true} true probabilistically, {violations} violations"),
    );
    r.check(
        "semantics coincide on dependence atoms",
        dep_mismatch == 0,
        format!("{deps} dependence-only pairs, {dep_mismatch} mismatches"),
    );
    Ok(())
}

fn constructions(r: &mut SuiteReport, opts: &VerifyOptions) -> Result<()> {
    use PropertyName::*;
    let mut rng = random::rng(opts.seed);
    let n = opts.samples.max(100);
    let b = &opts.budget;
    let holds = |m: &Model<BigInt>, ps: &[PropertyName]| -> Result<bool> {
        for p in ps {
            if !check_property(m, *p, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut failures: Vec<String> = Vec::new();
    for k in 0..n {
        let arity = 1 + k % 3;
        let e: Model<BigInt> = random::empirical_model(&mut rng, arity, 3, 6, k % 2 == 0);
        let runs: [(&str, Model<BigInt>, &[PropertyName]); 3] = [
            ("single-valued", construct_single_valued(&e)?, &[SingValH]),
            ("strong-det", construct_strong_det(&e)?, &[StrongDetH, LocH]),
            ("weak-det", construct_weakdet_lambdaindep(&e)?, &[WeakDetH, LambdaIndepH]),
        ];
        for (name, h, ps) in runs {
            if !(holds(&h, ps)? && empirically_equivalent(&e, &h, Equivalence::Joint)?) {
                failures.push(format!("{name} on sample {k}"));
            }
        }
        let w: Model<BigInt> = random::local_model(&mut rng, 1 + k % 3, 2, 1 + k % 2, k % 2 == 1);
        let z = localize(&w, b)?;
        let equivalent = empirically_equivalent(&w.induced_empirical(), &z, Equivalence::Joint)?;
        if !(holds(&z, &[StrongDetH, LambdaIndepH])? && equivalent) {
            failures.push(format!("localize on sample {k}"));
        }
    }
    r.check(
        "constructions meet their properties with exact equivalence",
        failures.is_empty(),
        if failures.is_empty() { format!("{n} random models") } else { failures.join(", ") },
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        let opts = VerifyOptions { samples: 1, ..VerifyOptions::default() };
        for s in [Suite::Separations, Suite::Ks] {
            let r = run_suite(s, &opts).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.checks);
        }
    }
}
