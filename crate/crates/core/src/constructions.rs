//! Hidden-variable models built from empirical ones, and the normal form of
//! local, λ-independent models.
//!
//! Every construction is a Skolem extension of the observable team by the
//! hidden variable `l`, so empirical equivalence holds by construction.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::eval::EvalBudget;
use crate::hvmodel::{lambda, Model, ModelKind};
use crate::json::TeamData;
use crate::prob::{point, Dist, ProbTeam};
use crate::properties::{check_property, PropertyName};
use crate::scalar::{denominator_lcm, whole_to_usize, Scalar};
use crate::team::{Row, Team};
use crate::value::Value;

fn require(model: &Model<impl Scalar>, kind: ModelKind) -> Result<()> {
    if model.kind() != kind {
        return Err(Error::Model(format!("expected a {kind} model, got a {} model", model.kind())));
    }
    Ok(())
}

fn hidden<T: Scalar>(data: TeamData<T>) -> Model<T> {
    Model::hidden(data).expect("extension of a model by l is a hidden-variable model")
}

/// Constant hidden variable `l0`.
pub fn construct_single_valued<T: Scalar>(e: &Model<T>) -> Result<Model<T>> {
    require(e, ModelKind::Empirical)?;
    let c = Value::new("l0");
    let data = match e.data() {
        TeamData::Relational(t) => {
            TeamData::Relational(t.skolem_extend_with(&lambda(), |_| BTreeSet::from([c.clone()]))?)
        }
        TeamData::Probabilistic(p) => {
            TeamData::Probabilistic(p.prob_skolem_extend_with(&lambda(), |_| point(c.clone()))?)
        }
    };
    Ok(hidden(data))
}

/// Each row is its own hidden value, tagged by the row tuple.
pub fn construct_strong_det<T: Scalar>(e: &Model<T>) -> Result<Model<T>> {
    require(e, ModelKind::Empirical)?;
    let tag = |r: &[Value]| Value::tuple(r.iter());
    let data = match e.data() {
        TeamData::Relational(t) => {
            TeamData::Relational(t.skolem_extend_with(&lambda(), |a| BTreeSet::from([tag(a.row())]))?)
        }
        TeamData::Probabilistic(p) => {
            TeamData::Probabilistic(p.prob_skolem_extend_with(&lambda(), |a| point(tag(a.row())))?)
        }
    };
    Ok(hidden(data))
}

/// Splits `0..total` into consecutive blocks of the given sizes.
fn blocks(sizes: &[usize], total: usize) -> Vec<std::ops::Range<usize>> {
    let sum: usize = sizes.iter().sum();
    assert_eq!(sum, total, "partition blocks must cover the hidden values exactly");
    let mut start = 0;
    sizes
        .iter()
        .map(|&k| {
            let r = start..start + k;
            start += k;
            r
        })
        .collect()
}

/// `ℙ(ō = b̄ | m̄ = ā)` grouped by `ā`, outcomes in canonical order.
fn outcome_conditionals<T: Scalar>(p: &ProbTeam<T>, n: usize) -> BTreeMap<Row, BTreeMap<Row, Ratio<T>>> {
    let mut joint: BTreeMap<Row, BTreeMap<Row, Ratio<T>>> = BTreeMap::new();
    for (r, w) in p.weights() {
        let slot = joint.entry(r[..n].to_vec()).or_default().entry(r[n..2 * n].to_vec()).or_insert_with(Ratio::zero);
        *slot = slot.clone() + w.clone();
    }
    for outs in joint.values_mut() {
        let total = outs.values().fold(Ratio::zero(), |acc: Ratio<T>, w| acc + w.clone());
        for w in outs.values_mut() {
            *w = w.clone() / total.clone();
        }
    }
    joint
}

/// Hidden values `0..N` shared uniformly by all measurements, where `N` is the
/// least common denominator of the conditional outcome probabilities; each
/// measurement-outcome pair gets a block of `ℙ(b̄|ā)·N` of them.
///
/// A relational model is handled through its uniform distribution, and the
/// result collapsed.
pub fn construct_weakdet_lambdaindep<T: Scalar>(e: &Model<T>) -> Result<Model<T>> {
    require(e, ModelKind::Empirical)?;
    let p = match e.data() {
        TeamData::Probabilistic(p) => p.clone(),
        TeamData::Relational(t) => ProbTeam::uniform(t)?,
    };
    let n = e.arity();
    let cond = outcome_conditionals(&p, n);
    let big_n = denominator_lcm(cond.values().flat_map(|m| m.values()));
    let total = whole_to_usize(&Ratio::from_integer(big_n.clone()))?;
    let mut assigned: BTreeMap<(Row, Row), std::ops::Range<usize>> = BTreeMap::new();
    for (a, outs) in &cond {
        let sizes = outs
            .values()
            .map(|q| whole_to_usize(&(q.clone() * Ratio::from_integer(big_n.clone()))))
            .collect::<Result<Vec<_>>>()?;
        for (b, range) in outs.keys().zip(blocks(&sizes, total)) {
            assigned.insert((a.clone(), b.clone()), range);
        }
    }
    let ext = p.prob_skolem_extend_with(&lambda(), |s| {
        let row = s.row();
        let range = assigned[&(row[..n].to_vec(), row[n..2 * n].to_vec())].clone();
        let share = Ratio::new(T::one(), T::from_usize(range.len()).expect("scalar too narrow"));
        range.map(|k| (Value::new(k.to_string()), share.clone())).collect::<Dist<T>>()
    })?;
    Ok(match e.data() {
        TeamData::Probabilistic(_) => hidden(TeamData::Probabilistic(ext)),
        TeamData::Relational(_) => hidden(TeamData::Relational(ext.support().clone())),
    })
}

fn check_local_realism<T: Scalar>(h: &Model<T>, budget: &EvalBudget) -> Result<()> {
    require(h, ModelKind::Hidden)?;
    let mut failed = Vec::new();
    for p in [PropertyName::LocH, PropertyName::LambdaIndepH] {
        if !check_property(h, p, budget)? {
            failed.push(p.to_string());
        }
    }
    if !failed.is_empty() {
        return Err(Error::Precondition(format!("the hidden-variable model violates {}", failed.join(" and "))));
    }
    Ok(())
}

/// One selector `X(mᵢ) → X(oᵢ)` written as `a>b,a'>b'`.
fn selector_name(f: &BTreeMap<Value, Value>) -> String {
    f.iter().map(|(a, b)| format!("{a}>{b}")).collect::<Vec<_>>().join(",")
}

/// All functions picking, for each key, one of its allowed values.
fn selectors(options: &BTreeMap<Value, BTreeSet<Value>>) -> Vec<BTreeMap<Value, Value>> {
    let mut out = vec![BTreeMap::new()];
    for (a, bs) in options {
        out = out
            .into_iter()
            .flat_map(|f| {
                bs.iter().map(move |b| {
                    let mut g = f.clone();
                    g.insert(a.clone(), b.clone());
                    g
                })
            })
            .collect();
    }
    out
}

/// Deterministic, λ-independent equivalent of a relational model satisfying
/// Locality and λ-Independence.
///
/// The new hidden values are pairs of an old hidden value `c` and one selector
/// per component compatible with the outcomes possible under `c`; a row gets
/// every pair whose selectors reproduce its outcomes.
pub fn localize_rel<T: Scalar>(h: &Model<T>, budget: &EvalBudget) -> Result<Model<T>> {
    if h.is_probabilistic() {
        return Err(Error::Model("localize_rel expects a relational model".into()));
    }
    check_local_realism(h, budget)?;
    let n = h.arity();
    let y = h.team();
    let ms: Vec<BTreeSet<Value>> = (1..=n).map(|i| h.measurement_values(i)).collect();
    let mut hidden_values: Vec<(Value, Vec<BTreeMap<Value, Value>>)> = Vec::new();
    for c in h.hidden_values() {
        let mut per_component = Vec::new();
        let mut count: usize = 1;
        for i in 0..n {
            let mut options: BTreeMap<Value, BTreeSet<Value>> =
                ms[i].iter().map(|a| (a.clone(), BTreeSet::new())).collect();
            for r in y.rows().filter(|r| r[2 * n] == c) {
                options.get_mut(&r[i]).expect("measurement value").insert(r[n + i].clone());
            }
            let fs = selectors(&options);
            count = count.saturating_mul(fs.len().max(1));
            if count > budget.max_rows {
                return Err(Error::Budget(format!(
                    "more than {} selector tuples for hidden value {c}",
                    budget.max_rows
                )));
            }
            per_component.push(fs);
        }
        let mut tuples: Vec<Vec<BTreeMap<Value, Value>>> = vec![Vec::new()];
        for fs in &per_component {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    fs.iter().map(move |f| {
                        let mut t = t.clone();
                        t.push(f.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            hidden_values.push((c.clone(), t));
        }
    }
    let name = |c: &Value, fs: &[BTreeMap<Value, Value>]| {
        let parts: Vec<String> = fs.iter().map(|f| format!("[{}]", selector_name(f))).collect();
        Value::new(format!("{c}/{}", parts.join("/")))
    };
    let x: Team = h.induced_empirical().team().clone();
    let z = x.skolem_extend_with(&lambda(), |s| {
        let row = s.row();
        hidden_values
            .iter()
            .filter(|(_, fs)| (0..n).all(|i| fs[i][&row[i]] == row[n + i]))
            .map(|(c, fs)| name(c, fs))
            .collect()
    })?;
    if z.len() > budget.max_rows {
        return Err(Error::Budget(format!("localised model has {} rows", z.len())));
    }
    Ok(hidden(TeamData::Relational(z)))
}

/// Probabilistic normal form: hidden values `(c; c₁..cₙ)` where `cᵢ` ranges
/// over `0..Nᵢ`, `Nᵢ` the least common denominator of
/// `ℙ(oᵢ | mᵢ, l = c)`, and each outcome of component `i` owns a block of
/// `ℙ(oᵢ=b | mᵢ=a, l=c)·Nᵢ` indices.
pub fn localize_prob<T: Scalar>(h: &Model<T>, budget: &EvalBudget) -> Result<Model<T>> {
    let Some(py) = h.prob() else {
        return Err(Error::Model("localize_prob expects a probabilistic model".into()));
    };
    check_local_realism(h, budget)?;
    let n = h.arity();
    let add = |m: &mut BTreeMap<Row, Ratio<T>>, k: Row, w: &Ratio<T>| {
        let slot = m.entry(k).or_insert_with(Ratio::zero);
        *slot = slot.clone() + w.clone();
    };
    // Per component: ℙ(mᵢ, l) and ℙ(mᵢ, oᵢ, l).
    let mut p_ac: Vec<BTreeMap<Row, Ratio<T>>> = vec![BTreeMap::new(); n];
    let mut p_abc: Vec<BTreeMap<Row, Ratio<T>>> = vec![BTreeMap::new(); n];
    let mut p_ab: BTreeMap<Row, Ratio<T>> = BTreeMap::new();
    let mut p_abl: BTreeMap<Row, Ratio<T>> = BTreeMap::new();
    for (r, w) in py.weights() {
        let c = r[2 * n].clone();
        for i in 0..n {
            add(&mut p_ac[i], vec![r[i].clone(), c.clone()], w);
            add(&mut p_abc[i], vec![r[i].clone(), r[n + i].clone(), c.clone()], w);
        }
        add(&mut p_ab, r[..2 * n].to_vec(), w);
        add(&mut p_abl, r.clone(), w);
    }
    let outcomes: Vec<BTreeSet<Value>> = (1..=n).map(|i| h.outcome_values(i)).collect();
    let mut sizes: Vec<usize> = Vec::with_capacity(n);
    // blocks[i][(a, b, c)] = range of component-i indices
    let mut owned: Vec<BTreeMap<Row, std::ops::Range<usize>>> = vec![BTreeMap::new(); n];
    for i in 0..n {
        let mut cond: BTreeMap<Row, Vec<(Value, Ratio<T>)>> = BTreeMap::new();
        for (ac, pac) in &p_ac[i] {
            let row: Vec<(Value, Ratio<T>)> = outcomes[i]
                .iter()
                .map(|b| {
                    let key = vec![ac[0].clone(), b.clone(), ac[1].clone()];
                    let q = p_abc[i].get(&key).cloned().unwrap_or_else(Ratio::zero) / pac.clone();
                    (b.clone(), q)
                })
                .collect();
            cond.insert(ac.clone(), row);
        }
        let ni = denominator_lcm(cond.values().flat_map(|v| v.iter().map(|(_, q)| q)));
        let total = whole_to_usize(&Ratio::from_integer(ni.clone()))?;
        for (ac, row) in &cond {
            let ks = row
                .iter()
                .map(|(_, q)| whole_to_usize(&(q.clone() * Ratio::from_integer(ni.clone()))))
                .collect::<Result<Vec<_>>>()?;
            for ((b, _), range) in row.iter().zip(blocks(&ks, total)) {
                owned[i].insert(vec![ac[0].clone(), b.clone(), ac[1].clone()], range);
            }
        }
        sizes.push(total);
    }
    let hidden_count: usize = h.hidden_values().len().saturating_mul(sizes.iter().product());
    if hidden_count > budget.max_rows {
        return Err(Error::Budget(format!("{hidden_count} hidden values in the normal form")));
    }
    let x = h.induced_empirical();
    let px = x.prob().expect("probabilistic");
    let hidden_values: Vec<Value> = h.hidden_values().into_iter().collect();
    let z = px.prob_skolem_extend_with(&lambda(), |s| {
        let row = s.row();
        let mut dist: Dist<T> = BTreeMap::new();
        for c in &hidden_values {
            let mut full = row.to_vec();
            full.push(c.clone());
            let Some(joint) = p_abl.get(&full) else { continue };
            let given = joint.clone() / p_ab[row].clone();
            let ranges: Vec<std::ops::Range<usize>> =
                (0..n).map(|i| owned[i][&vec![row[i].clone(), row[n + i].clone(), c.clone()]].clone()).collect();
            let cells: usize = ranges.iter().map(|r| r.len()).product();
            let share = given / Ratio::from_integer(T::from_usize(cells).expect("scalar too narrow"));
            let mut idx: Vec<Vec<usize>> = vec![Vec::new()];
            for r in &ranges {
                idx = idx
                    .into_iter()
                    .flat_map(|p| {
                        r.clone().map(move |k| {
                            let mut p = p.clone();
                            p.push(k);
                            p
                        })
                    })
                    .collect();
            }
            for ks in idx {
                let ks: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                dist.insert(Value::new(format!("{c};{}", ks.join(","))), share.clone());
            }
        }
        dist
    })?;
    debug_assert!(z.weights().fold(Ratio::zero(), |a: Ratio<T>, (_, w)| a + w.clone()).is_one());
    Ok(hidden(TeamData::Probabilistic(z)))
}

/// Dispatches on the model's kind: `localize_rel` or `localize_prob`.
pub fn localize<T: Scalar>(h: &Model<T>, budget: &EvalBudget) -> Result<Model<T>> {
    if h.is_probabilistic() {
        localize_prob(h, budget)
    } else {
        localize_rel(h, budget)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvmodel::{empirically_equivalent, Equivalence};
    use crate::properties::locality_oracle_prob;
    use crate::value::{row, vars};
    use num_bigint::BigInt;

    fn ex22() -> Team {
        Team::new(vars("m1 m2 o1 o2"), [row("a1 b1 + +"), row("a1 b1 - -"), row("a2 b1 + -"), row("a2 b1 - +")])
            .unwrap()
    }

    fn check(m: &Model<BigInt>, p: PropertyName) -> bool {
        check_property(m, p, &EvalBudget::default()).unwrap()
    }

    #[test]
    fn single_valued_and_strong_det() {
        let e = Model::<BigInt>::empirical(TeamData::Relational(ex22())).unwrap();
        let sv = construct_single_valued(&e).unwrap();
        assert_eq!(sv.hidden_values().len(), 1);
        assert!(check(&sv, PropertyName::SingValH));
        assert!(empirically_equivalent(&e, &sv, Equivalence::Joint).unwrap());
        let sd = construct_strong_det(&e).unwrap();
        assert_eq!(sd.hidden_values().len(), 4);
        assert!(check(&sd, PropertyName::StrongDetH));
        assert!(check(&sd, PropertyName::LocH));
        assert!(!check(&sd, PropertyName::LambdaIndepH));
        assert!(empirically_equivalent(&e, &sd, Equivalence::Joint).unwrap());
    }

    #[test]
    fn weak_det_with_independent_hidden_variable() {
        let pe = Model::empirical(TeamData::Probabilistic(ProbTeam::<BigInt>::uniform(&ex22()).unwrap())).unwrap();
        let h = construct_weakdet_lambdaindep(&pe).unwrap();
        assert_eq!(h.hidden_values().len(), 2);
        assert!(check(&h, PropertyName::WeakDetH));
        assert!(check(&h, PropertyName::LambdaIndepH));
        assert!(empirically_equivalent(&pe, &h, Equivalence::Joint).unwrap());
        let rel = Model::<BigInt>::empirical(TeamData::Relational(ex22())).unwrap();
        let hr = construct_weakdet_lambdaindep(&rel).unwrap();
        assert!(check(&hr, PropertyName::WeakDetH) && check(&hr, PropertyName::LambdaIndepH));
        assert!(empirically_equivalent(&rel, &hr, Equivalence::Joint).unwrap());
    }

    #[test]
    fn localisation() {
        // product model: each outcome free in {0,1}, one hidden value
        let t = Team::new(
            vars("m1 m2 o1 o2"),
            ["a b", "a c", "d b", "d c"]
                .iter()
                .flat_map(|m| ["0 0", "0 1", "1 0", "1 1"].iter().map(move |o| row(&format!("{m} {o}")))),
        )
        .unwrap();
        let e = Model::<BigInt>::empirical(TeamData::Relational(t)).unwrap();
        let h = construct_single_valued(&e).unwrap();
        let z = localize_rel(&h, &EvalBudget::default()).unwrap();
        assert!(check(&z, PropertyName::StrongDetH) && check(&z, PropertyName::LambdaIndepH));
        assert!(empirically_equivalent(&e, &z, Equivalence::Joint).unwrap());

        let pe = Model::empirical(TeamData::Probabilistic(ProbTeam::uniform(e.team()).unwrap())).unwrap();
        let ph = construct_single_valued(&pe).unwrap();
        let pz = localize_prob(&ph, &EvalBudget::default()).unwrap();
        assert!(check(&pz, PropertyName::StrongDetH) && check(&pz, PropertyName::LambdaIndepH));
        assert!(empirically_equivalent(&pe, &pz, Equivalence::Joint).unwrap());
        assert!(locality_oracle_prob(pz.prob().unwrap()).unwrap());
    }

    #[test]
    fn localisation_requires_local_realism() {
        let loc6 = Team::new(
            vars("m1 m2 o1 o2 l"),
            [
                row("a b 1 0 L1"),
                row("a b 1 1 L1"),
                row("a c 0 1 L1"),
                row("a c 0 0 L1"),
                row("a b 0 0 L2"),
                row("a c 0 1 L2"),
            ],
        )
        .unwrap();
        let h = Model::<BigInt>::hidden(TeamData::Relational(loc6)).unwrap();
        let err = localize_rel(&h, &EvalBudget::default()).unwrap_err();
        assert!(matches!(&err, Error::Precondition(m) if m.contains("Loc")), "{err}");
    }
}
