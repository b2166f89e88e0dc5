//! The named properties of empirical and hidden-variable models, and direct
//! semantic checks of Locality.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::eval::{eval_prob, eval_rel, EvalBudget};
use crate::formula::Formula;
use crate::hvmodel::{lambda, measurement_vars, outcome_vars, Model, ModelKind};
use crate::json::TeamData;
use crate::prob::ProbTeam;
use crate::scalar::Scalar;
use crate::team::{Row, Team};
use crate::value::{Value, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyName {
    WeakDetE,
    StrongDetE,
    NoSigE,
    WeakDetH,
    StrongDetH,
    SingValH,
    LambdaIndepH,
    OutIndepH,
    ParIndepH,
    LocH,
    NonContextE,
}

impl PropertyName {
    pub const ALL: [PropertyName; 11] = [
        PropertyName::WeakDetE,
        PropertyName::StrongDetE,
        PropertyName::NoSigE,
        PropertyName::WeakDetH,
        PropertyName::StrongDetH,
        PropertyName::SingValH,
        PropertyName::LambdaIndepH,
        PropertyName::OutIndepH,
        PropertyName::ParIndepH,
        PropertyName::LocH,
        PropertyName::NonContextE,
    ];

    /// Which kind of model the formula talks about.
    pub fn kind(self) -> ModelKind {
        use PropertyName::*;
        match self {
            WeakDetE | StrongDetE | NoSigE | NonContextE => ModelKind::Empirical,
            _ => ModelKind::Hidden,
        }
    }

    /// Command-line name; the determinism properties share a name across kinds.
    pub fn cli_name(self) -> &'static str {
        use PropertyName::*;
        match self {
            WeakDetE | WeakDetH => "weak-det",
            StrongDetE | StrongDetH => "strong-det",
            NoSigE => "no-sig",
            SingValH => "sing-val",
            LambdaIndepH => "lambda-indep",
            OutIndepH => "out-indep",
            ParIndepH => "par-indep",
            LocH => "locality",
            NonContextE => "non-context",
        }
    }

    /// Resolves a command-line name against the kind of model being checked.
    pub fn from_cli(name: &str, kind: ModelKind) -> Result<PropertyName> {
        use PropertyName::*;
        let hidden = kind == ModelKind::Hidden;
        Ok(match name {
            "weak-det" if hidden => WeakDetH,
            "weak-det" => WeakDetE,
            "strong-det" if hidden => StrongDetH,
            "strong-det" => StrongDetE,
            "no-sig" => NoSigE,
            "sing-val" => SingValH,
            "lambda-indep" => LambdaIndepH,
            "out-indep" => OutIndepH,
            "par-indep" => ParIndepH,
            "locality" => LocH,
            "non-context" => NonContextE,
            _ => return Err(Error::Argument(format!("unknown property `{name}`"))),
        })
    }
}

impl fmt::Display for PropertyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PropertyName::*;
        let s = match self {
            WeakDetE => "WeakDet^e",
            StrongDetE => "StrongDet^e",
            NoSigE => "NoSig^e",
            WeakDetH => "WeakDet^h",
            StrongDetH => "StrongDet^h",
            SingValH => "SingVal^h",
            LambdaIndepH => "lambda-Indep^h",
            OutIndepH => "Out-Indep^h",
            ParIndepH => "Par-Indep^h",
            LocH => "Loc^h",
            NonContextE => "NonContext^e",
        };
        f.write_str(s)
    }
}

fn without(vs: &[Var], i: usize) -> Vec<Var> {
    vs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.clone()).collect()
}

fn with_lambda(mut vs: Vec<Var>) -> Vec<Var> {
    vs.push(lambda());
    vs
}

/// The defining formula of `p` at arity `n`.
///
/// Conjunctions are nested to the left; a single conjunct stands alone.
pub fn property_formula(p: PropertyName, n: usize) -> Formula {
    assert!(n >= 1, "arity must be positive");
    use PropertyName::*;
    let m = measurement_vars(n);
    let o = outcome_vars(n);
    let each = |f: &dyn Fn(usize) -> Formula| Formula::conj((0..n).map(f));
    match p {
        WeakDetE => Formula::dep(m, o),
        StrongDetE => each(&|i| Formula::dep(vec![m[i].clone()], vec![o[i].clone()])),
        NoSigE => each(&|i| Formula::indep(vec![o[i].clone()], vec![m[i].clone()], without(&m, i))),
        WeakDetH => Formula::dep(with_lambda(m), o),
        StrongDetH => each(&|i| Formula::dep(vec![m[i].clone(), lambda()], vec![o[i].clone()])),
        SingValH => Formula::dep(Vec::new(), vec![lambda()]),
        LambdaIndepH => Formula::indep(m, Vec::new(), vec![lambda()]),
        OutIndepH => each(&|i| Formula::indep(vec![o[i].clone()], with_lambda(m.clone()), without(&o, i))),
        ParIndepH => each(&|i| Formula::indep(vec![o[i].clone()], vec![m[i].clone(), lambda()], without(&m, i))),
        LocH => Formula::and(property_formula(OutIndepH, n), property_formula(ParIndepH, n)),
        NonContextE => {
            let v: Vec<Var> = (1..=n).map(|i| Var::new(format!("v{i}"))).collect();
            let mut parts = Vec::new();
            for i in 0..n {
                for j in i..n {
                    parts.push(
                        Formula::gen_dep(
                            vec![m[i].clone()],
                            vec![m[j].clone()],
                            vec![v[i].clone()],
                            vec![v[j].clone()],
                        )
                        .expect("unary tuples"),
                    );
                }
            }
            let mut mv = m.clone();
            mv.extend(v.iter().cloned());
            let mut mo = m;
            mo.extend(o);
            parts.push(Formula::incl(mv, mo).expect("equal lengths"));
            Formula::exists_all(&v, Formula::conj(parts))
        }
    }
}

/// Evaluates `p` on the model's team.
///
/// Probabilistic models use probabilistic semantics, except for
/// `NonContext^e`, whose existential is evaluated on the support.
pub fn check_property<T: Scalar>(model: &Model<T>, p: PropertyName, budget: &EvalBudget) -> Result<bool> {
    if p.kind() == ModelKind::Hidden && model.kind() != ModelKind::Hidden {
        return Err(Error::Model(format!("{p} is a property of hidden-variable models")));
    }
    let f = property_formula(p, model.arity());
    match model.data() {
        TeamData::Probabilistic(pt) if p != PropertyName::NonContextE => eval_prob(pt, &f),
        _ => eval_rel(model.team(), &f, budget),
    }
}

fn require_hidden<T: Scalar>(model: &Model<T>) -> Result<()> {
    if model.kind() != ModelKind::Hidden {
        return Err(Error::Model("locality needs a hidden-variable model".into()));
    }
    Ok(())
}

/// Outcomes witnessed in component `i` for each `(measurement, hidden value)`.
fn witnessed(team: &Team, n: usize) -> Vec<BTreeMap<(Value, Value), BTreeSet<Value>>> {
    let mut out = vec![BTreeMap::new(); n];
    for r in team.rows() {
        for (i, slot) in out.iter_mut().enumerate() {
            slot.entry((r[i].clone(), r[2 * n].clone())).or_insert_with(BTreeSet::new).insert(r[n + i].clone());
        }
    }
    out
}

fn product(sets: &[Vec<Value>]) -> Vec<Row> {
    let mut out: Vec<Row> = vec![Vec::new()];
    for s in sets {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                s.iter().map(move |v| {
                    let mut r = prefix.clone();
                    r.push(v.clone());
                    r
                })
            })
            .collect();
    }
    out
}

/// Locality of a relational hidden-variable model, by its combinatorial characterisation:
/// whenever each component's outcome is possible for the given measurement and
/// hidden value, the joint outcome is too (for measurement tuples that occur with
/// that hidden value).
pub fn locality_oracle_rel<T: Scalar>(model: &Model<T>) -> Result<bool> {
    require_hidden(model)?;
    let n = model.arity();
    let team = model.team();
    let wit = witnessed(team, n);
    let contexts: BTreeSet<(Row, Value)> = team.rows().map(|r| (r[..n].to_vec(), r[2 * n].clone())).collect();
    for (a, c) in contexts {
        let options: Vec<Vec<Value>> =
            (0..n).map(|i| wit[i][&(a[i].clone(), c.clone())].iter().cloned().collect()).collect();
        for b in product(&options) {
            let mut full = a.clone();
            full.extend(b);
            full.push(c.clone());
            if !team.contains_row(&full) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Locality of a probabilistic hidden-variable model as factorisation:
/// `ℙ(ō=b̄ | m̄=ā, l=c) = ∏ ℙ(oᵢ=bᵢ | mᵢ=aᵢ, l=c)`.
pub fn locality_oracle_prob<T: Scalar>(pt: &ProbTeam<T>) -> Result<bool> {
    let model = Model::hidden(TeamData::Probabilistic(pt.clone()))?;
    let pt = model.prob().expect("probabilistic");
    let n = model.arity();
    let mut p_ac: BTreeMap<(Row, Value), Ratio<T>> = BTreeMap::new();
    let mut p_abc: BTreeMap<Row, Ratio<T>> = BTreeMap::new();
    let mut p_i_ac: Vec<BTreeMap<(Value, Value), Ratio<T>>> = vec![BTreeMap::new(); n];
    let mut p_i_abc: Vec<BTreeMap<(Value, Value, Value), Ratio<T>>> = vec![BTreeMap::new(); n];
    let bump = |slot: &mut Ratio<T>, w: &Ratio<T>| *slot = slot.clone() + w.clone();
    for (r, w) in pt.weights() {
        let c = r[2 * n].clone();
        bump(p_ac.entry((r[..n].to_vec(), c.clone())).or_insert_with(Ratio::zero), w);
        bump(p_abc.entry(r.clone()).or_insert_with(Ratio::zero), w);
        for i in 0..n {
            bump(p_i_ac[i].entry((r[i].clone(), c.clone())).or_insert_with(Ratio::zero), w);
            bump(p_i_abc[i].entry((r[i].clone(), r[n + i].clone(), c.clone())).or_insert_with(Ratio::zero), w);
        }
    }
    let outcomes: Vec<Vec<Value>> = (1..=n).map(|i| model.outcome_values(i).into_iter().collect()).collect();
    for ((a, c), pac) in &p_ac {
        for b in product(&outcomes) {
            let mut full = a.clone();
            full.extend(b.iter().cloned());
            full.push(c.clone());
            let lhs = p_abc.get(&full).cloned().unwrap_or_else(Ratio::zero) / pac.clone();
            let mut rhs = Ratio::from_integer(T::one());
            for i in 0..n {
                let num = p_i_abc[i].get(&(a[i].clone(), b[i].clone(), c.clone())).cloned().unwrap_or_else(Ratio::zero);
                rhs = rhs * (num / p_i_ac[i][&(a[i].clone(), c.clone())].clone());
            }
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{row, vars};
    use num_bigint::BigInt;

    fn model(domain: &str, rows: &[&str]) -> Model<BigInt> {
        let t = Team::new(vars(domain), rows.iter().map(|r| row(r))).unwrap();
        Model::infer(TeamData::Relational(t)).unwrap()
    }

    fn check(m: &Model<BigInt>, p: PropertyName) -> bool {
        check_property(m, p, &EvalBudget::default()).unwrap()
    }

    fn loc6() -> Model<BigInt> {
        model("m1 m2 o1 o2 l", &["a b 1 0 L1", "a b 1 1 L1", "a c 0 1 L1", "a c 0 0 L1", "a b 0 0 L2", "a c 0 1 L2"])
    }

    #[test]
    fn formulas_by_name() {
        use PropertyName::*;
        assert_eq!(property_formula(StrongDetE, 1), property_formula(WeakDetE, 1));
        assert_eq!(property_formula(SingValH, 3).to_string(), "dep(, l)");
        assert_eq!(
            property_formula(LocH, 2),
            Formula::and(property_formula(OutIndepH, 2), property_formula(ParIndepH, 2))
        );
        assert_eq!(property_formula(NoSigE, 2).to_string(), "o1 _||_{m1} m2 & o2 _||_{m2} m1");
        for p in PropertyName::ALL {
            assert_eq!(PropertyName::from_cli(p.cli_name(), p.kind()).unwrap(), p);
            for n in 1..=3 {
                let f = property_formula(p, n);
                assert_eq!(f.to_string().parse::<Formula>().unwrap(), f, "{p} at {n}");
            }
        }
    }

    #[test]
    fn signalling_team() {
        let sig = model("m1 m2 o1 o2", &["a b1 + -", "a b2 - -"]);
        assert!(check(&sig, PropertyName::WeakDetE));
        assert!(!check(&sig, PropertyName::StrongDetE));
        assert!(!check(&sig, PropertyName::NoSigE));
        let ex = model("m1 m2 o1 o2", &["a1 b1 + +", "a1 b1 - -", "a2 b1 + -", "a2 b1 - +"]);
        assert!(check(&ex, PropertyName::NoSigE));
    }

    #[test]
    fn locality_example() {
        let h = loc6();
        assert!(!check(&h, PropertyName::LocH));
        assert!(!check(&h, PropertyName::ParIndepH));
        assert!(check(&h, PropertyName::OutIndepH));
        assert!(check(&h, PropertyName::LambdaIndepH));
        assert!(!locality_oracle_rel(&h).unwrap());
        let single = model("m1 o1 l", &["a 0 L"]);
        assert!(locality_oracle_rel(&single).unwrap());
        let uniform = ProbTeam::<BigInt>::uniform(h.team()).unwrap();
        assert!(!locality_oracle_prob(&uniform).unwrap());
    }

    #[test]
    fn hidden_properties_need_hidden_models() {
        let e = model("m1 o1", &["a 0"]);
        assert!(check_property(&e, PropertyName::LocH, &EvalBudget::default()).is_err());
    }
}
