//! Cross-checks the search-based evaluator against a brute-force reading of
//! the semantic clauses: every cover for ∨, every Skolem function for ∃.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teamcheck::{eval_atom_rel, eval_rel, parse, EvalBudget, Formula, Team, Term, Value, Var};

type Row = Vec<Value>;

#[derive(Clone)]
struct Naive {
    domain: Vec<Var>,
    rows: Vec<Row>,
}

/// Largest team on which the brute force still enumerates covers.
const NAIVE_ROWS: usize = 7;

impl Naive {
    fn col(&self, v: &Var) -> usize {
        self.domain.iter().position(|w| w == v).unwrap()
    }

    fn tuple(&self, r: &Row, vs: &[Var]) -> Row {
        vs.iter().map(|v| r[self.col(v)].clone()).collect()
    }

    fn term(&self, r: &Row, t: &Term) -> Value {
        match t {
            Term::Var(v) => r[self.col(v)].clone(),
            Term::Const(c) => c.clone(),
        }
    }

    fn sub(&self, keep: impl Fn(usize) -> bool) -> Naive {
        Naive {
            domain: self.domain.clone(),
            rows: self.rows.iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, r)| r.clone()).collect(),
        }
    }

    fn extend(&self, x: &Var, choice: &[Vec<Value>]) -> Naive {
        let pos = self.domain.iter().position(|w| w == x);
        let mut domain = self.domain.clone();
        if pos.is_none() {
            domain.push(x.clone());
        }
        let mut rows = BTreeSet::new();
        for (r, vals) in self.rows.iter().zip(choice) {
            for a in vals {
                let mut nr = r.clone();
                match pos {
                    Some(i) => nr[i] = a.clone(),
                    None => nr.push(a.clone()),
                }
                rows.insert(nr);
            }
        }
        Naive { domain, rows: rows.into_iter().collect() }
    }

    fn atom(&self, f: &Formula) -> bool {
        let rs = &self.rows;
        match f {
            Formula::Eq(a, b) => rs.iter().all(|r| self.term(r, a) == self.term(r, b)),
            Formula::Neq(a, b) => rs.iter().all(|r| self.term(r, a) != self.term(r, b)),
            Formula::Dep { det, dependent } => rs.iter().all(|s| {
                rs.iter().all(|t| {
                    self.tuple(s, det) != self.tuple(t, det) || self.tuple(s, dependent) == self.tuple(t, dependent)
                })
            }),
            Formula::GenDep { x1, x2, y1, y2 } => rs.iter().all(|s| {
                rs.iter().all(|t| self.tuple(s, x1) != self.tuple(t, x2) || self.tuple(s, y1) == self.tuple(t, y2))
            }),
            Formula::Indep { left, cond, right } => rs.iter().all(|s| {
                rs.iter().all(|t| {
                    self.tuple(s, cond) != self.tuple(t, cond)
                        || rs.iter().any(|u| {
                            self.tuple(u, cond) == self.tuple(s, cond)
                                && self.tuple(u, left) == self.tuple(s, left)
                                && self.tuple(u, right) == self.tuple(t, right)
                        })
                })
            }),
            Formula::Incl { sub, sup } => {
                rs.iter().all(|s| rs.iter().any(|t| self.tuple(s, sub) == self.tuple(t, sup)))
            }
            Formula::Excl { left, right } => {
                rs.iter().all(|s| rs.iter().all(|t| self.tuple(s, left) != self.tuple(t, right)))
            }
            Formula::Nc { xs, y } => rs.iter().all(|s| {
                xs.iter().all(|x| {
                    let v = &s[self.col(x)];
                    !rs.iter().any(|t| &t[self.col(y)] == v) || *v == s[self.col(y)]
                })
            }),
            Formula::Ncc { xs } => {
                let vals: Vec<Value> =
                    rs.iter().flat_map(|r| self.tuple(r, xs)).collect::<BTreeSet<_>>().into_iter().collect();
                (0u32..(1 << vals.len())).any(|m| {
                    rs.iter().all(|r| {
                        let mine: BTreeSet<Value> = self.tuple(r, xs).into_iter().collect();
                        mine.iter().filter(|v| m & (1 << vals.iter().position(|w| w == *v).unwrap()) != 0).count() == 1
                    })
                })
            }
            _ => unreachable!(),
        }
    }

    /// `None` when the team grows past what brute force can handle.
    fn eval(&self, f: &Formula, universe: &[Value]) -> Option<bool> {
        if self.rows.is_empty() {
            return Some(true);
        }
        match f {
            Formula::And(a, b) => Some(self.eval(a, universe)? && self.eval(b, universe)?),
            Formula::Or(a, b) => {
                let n = self.rows.len();
                if n > NAIVE_ROWS {
                    return None;
                }
                let mut result = false;
                for code in 0..3usize.pow(n as u32) {
                    let side = |i: usize| (code / 3usize.pow(i as u32)) % 3;
                    let left = self.sub(|i| side(i) != 1);
                    let right = self.sub(|i| side(i) != 0);
                    if left.eval(a, universe)? && right.eval(b, universe)? {
                        result = true;
                        break;
                    }
                }
                Some(result)
            }
            Formula::Forall(x, g) => {
                let all = vec![universe.to_vec(); self.rows.len()];
                self.extend(x, &all).eval(g, universe)
            }
            Formula::Exists(x, g) => {
                let n = self.rows.len();
                if n > NAIVE_ROWS {
                    return None;
                }
                let subsets: Vec<Vec<Value>> = (1u32..(1 << universe.len()))
                    .map(|m| {
                        universe.iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, v)| v.clone()).collect()
                    })
                    .collect();
                let k = subsets.len();
                for code in 0..k.pow(n as u32) {
                    let choice: Vec<Vec<Value>> =
                        (0..n).map(|i| subsets[(code / k.pow(i as u32)) % k].clone()).collect();
                    if self.extend(x, &choice).eval(g, universe)? {
                        return Some(true);
                    }
                }
                Some(false)
            }
            atom => Some(self.atom(atom)),
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, scope: &[Var], max: usize) -> Vec<Var> {
    let n = rng.gen_range(0..=max.min(scope.len()));
    (0..n).map(|_| scope.choose(rng).unwrap().clone()).collect()
}

fn random_literal(rng: &mut ChaCha8Rng, scope: &[Var]) -> Formula {
    let a = Term::Var(scope.choose(rng).unwrap().clone());
    let b = if rng.gen_bool(0.5) {
        Term::Var(scope.choose(rng).unwrap().clone())
    } else {
        Term::Const(Value::from(if rng.gen_bool(0.5) { "0" } else { "1" }))
    };
    if rng.gen_bool(0.5) {
        Formula::eq(a, b)
    } else {
        Formula::neq(a, b)
    }
}

fn random_atom(rng: &mut ChaCha8Rng, scope: &[Var]) -> Formula {
    let v = |rng: &mut ChaCha8Rng| scope.choose(rng).unwrap().clone();
    match rng.gen_range(0..9) {
        0 | 1 => random_literal(rng, scope),
        2 => Formula::dep(pick(rng, scope, 2), pick(rng, scope, 1)),
        3 => Formula::indep(pick(rng, scope, 1), pick(rng, scope, 1), pick(rng, scope, 1)),
        4 => {
            let n = rng.gen_range(1..=2);
            let a = (0..n).map(|_| v(rng)).collect();
            let b = (0..n).map(|_| v(rng)).collect();
            Formula::incl(a, b).unwrap()
        }
        5 => Formula::excl(vec![v(rng)], vec![v(rng)]).unwrap(),
        6 => {
            let n = rng.gen_range(1..=2);
            Formula::nc((0..n).map(|_| v(rng)).collect(), v(rng))
        }
        7 => Formula::ncc((0..rng.gen_range(1..=2)).map(|_| v(rng)).collect()),
        _ => Formula::gen_dep(vec![v(rng)], vec![v(rng)], vec![v(rng)], vec![v(rng)]).unwrap(),
    }
}

type AtomGen = fn(&mut ChaCha8Rng, &[Var]) -> Formula;

fn random_formula(rng: &mut ChaCha8Rng, scope: &mut Vec<Var>, depth: usize) -> Formula {
    random_formula_from(rng, scope, depth, random_atom)
}

fn random_formula_from(rng: &mut ChaCha8Rng, scope: &mut Vec<Var>, depth: usize, atom: AtomGen) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return atom(rng, scope);
    }
    match rng.gen_range(0..5) {
        0 | 1 => {
            let a = random_formula_from(rng, scope, depth - 1, atom);
            let b = random_formula_from(rng, scope, depth - 1, atom);
            Formula::and(a, b)
        }
        2 => {
            let a = random_formula_from(rng, scope, depth - 1, atom);
            let b = random_formula_from(rng, scope, depth - 1, atom);
            Formula::or(a, b)
        }
        q => {
            let x = Var::from(*["x", "z", "u"].choose(rng).unwrap());
            let fresh = !scope.contains(&x);
            if fresh {
                scope.push(x.clone());
            }
            let body = random_formula_from(rng, scope, depth - 1, atom);
            if fresh {
                scope.pop();
            }
            if q == 3 {
                Formula::exists(x, body)
            } else {
                Formula::forall(x, body)
            }
        }
    }
}

fn random_team(rng: &mut ChaCha8Rng, max_rows: usize) -> Team {
    let all = [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]];
    let n = rng.gen_range(0..=max_rows);
    let rows = all.choose_multiple(rng, n).map(|r| r.iter().map(|s| Value::from(*s)).collect());
    Team::with_universe(vec![Var::from("x"), Var::from("y")], rows, [Value::from("0"), Value::from("1")]).unwrap()
}

fn naive_of(t: &Team) -> Naive {
    Naive { domain: t.domain().to_vec(), rows: t.rows().cloned().collect() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1500, max_global_rejects: 20_000, ..ProptestConfig::default() })]

    #[test]
    fn evaluator_matches_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let team = random_team(&mut rng, 3);
        let mut scope = vec![Var::from("x"), Var::from("y")];
        let f = random_formula(&mut rng, &mut scope, 3);
        let universe: Vec<Value> = team.universe().iter().cloned().collect();
        if let Some(expected) = naive_of(&team).eval(&f, &universe) {
            let got = eval_rel(&team, &f, &EvalBudget::default()).unwrap();
            prop_assert_eq!(got, expected, "formula {} on {:?}", f, team);
        }
    }

    #[test]
    fn atoms_match_brute_force(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let team = random_team(&mut rng, 4);
        let f = random_atom(&mut rng, &[Var::from("x"), Var::from("y")]);
        prop_assert_eq!(eval_atom_rel(&team, &f).unwrap(), naive_of(&team).atom(&f));
    }

    #[test]
    fn downward_closed_formulas_stay_true_on_subteams(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let team = random_team(&mut rng, 4);
        let mut scope = vec![Var::from("x"), Var::from("y")];
        let f = random_formula(&mut rng, &mut scope, 3);
        prop_assume!(f.is_fo_dep_formula());
        let budget = EvalBudget::default();
        if eval_rel(&team, &f, &budget).unwrap() {
            for r in team.rows() {
                let smaller = team.filter(|a| a.row() != r.as_slice());
                prop_assert!(eval_rel(&smaller, &f, &budget).unwrap(), "{} on {:?}", f, smaller);
            }
        }
    }

    #[test]
    fn printing_then_parsing_gives_the_same_formula(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scope = vec![Var::from("x"), Var::from("y")];
        let f = random_formula(&mut rng, &mut scope, 4);
        let printed = f.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), f, "{}", printed);
    }

    #[test]
    fn first_order_formulas_are_flat(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let team = random_team(&mut rng, 4);
        let mut scope = vec![Var::from("x"), Var::from("y")];
        let f = random_formula_from(&mut rng, &mut scope, 3, random_literal);
        let budget = EvalBudget::default();
        let whole = eval_rel(&team, &f, &budget).unwrap();
        let mut singletons = true;
        for r in team.rows() {
            singletons &= eval_rel(&team.filter(|a| a.row() == r.as_slice()), &f, &budget).unwrap();
        }
        prop_assert_eq!(whole, singletons, "{} on {:?}", f, team);
    }

    #[test]
    fn disjunction_keeps_truth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let team = random_team(&mut rng, 4);
        let mut scope = vec![Var::from("x"), Var::from("y")];
        let f = random_formula(&mut rng, &mut scope, 2);
        let g = random_formula(&mut rng, &mut scope, 2);
        let budget = EvalBudget::default();
        if eval_rel(&team, &f, &budget).unwrap() {
            prop_assert!(eval_rel(&team, &Formula::or(f.clone(), f.clone()), &budget).unwrap());
            prop_assert!(eval_rel(&team, &Formula::or(f.clone(), g.clone()), &budget).unwrap(), "{} | {}", f, g);
            prop_assert!(eval_rel(&team, &Formula::or(g, f), &budget).unwrap());
        }
    }

    #[test]
    fn truth_depends_only_on_free_variables(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let team = random_team(&mut rng, 4);
        let mut scope = vec![Var::from("y")];
        let f = random_formula(&mut rng, &mut scope, 2);
        let budget = EvalBudget::default();
        let narrow = team.restrict(&[Var::from("y")]).unwrap();
        prop_assert_eq!(eval_rel(&team, &f, &budget).unwrap(), eval_rel(&narrow, &f, &budget).unwrap());
    }
}

trait FoDep {
    fn is_fo_dep_formula(&self) -> bool;
}

impl FoDep for Formula {
    /// Downward closed syntax: no independence or inclusion atoms.
    fn is_fo_dep_formula(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |g| {
            if matches!(g, Formula::Indep { .. } | Formula::Incl { .. }) {
                ok = false;
            }
        });
        ok
    }
}

#[test]
fn skolem_clause_matches_subteam_clause_exhaustively() {
    // All teams over x with a universe of three values and up to four rows:
    // the evaluator agrees with explicit enumeration of set-valued Skolem functions.
    let universe: Vec<Value> = ["0", "1", "2"].iter().map(|s| Value::from(*s)).collect();
    let bodies =
        ["x _||_ y & x <= y", "y != x & dep(x, y)", "y <= x & x _||_ y", "dep(, y) | y = x", "x <= y & y != x"];
    for mask in 0u32..8 {
        let rows: Vec<Row> = (0..3).filter(|i| mask & (1 << i) != 0).map(|i| vec![universe[i].clone()]).collect();
        let team = Team::with_universe(vec![Var::from("x")], rows, universe.clone()).unwrap();
        for body in bodies {
            let f: Formula = format!("E y . {body}").parse().unwrap();
            let expected = naive_of(&team).eval(&f, &universe).unwrap();
            assert_eq!(eval_rel(&team, &f, &EvalBudget::default()).unwrap(), expected, "{f} on {team:?}");
        }
    }
}
