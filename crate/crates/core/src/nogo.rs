//! No-go results: deciding whether an empirical model has a local realistic
//! explanation, and the Kochen-Specker configuration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::constructions::localize_rel;
use crate::error::{Error, Result};
use crate::eval::{eval_atom_rel, eval_rel, EvalBudget};
use crate::formula::Formula;
use crate::hvmodel::{hidden_domain, measurement_vars, outcome_vars, Model, ModelKind};
use crate::json::TeamData;
use crate::properties::{property_formula, PropertyName};
use crate::scalar::Scalar;
use crate::team::{Row, Team};
use crate::value::{row, vars, Value};

/// Candidate sections (or boxes) examined by one decision may not exceed this.
pub const SECTION_CAP: u128 = 1 << 24;

/// One function `fᵢ : Mᵢ → Oᵢ` per component.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalSection {
    pub maps: Vec<BTreeMap<Value, Value>>,
}

impl GlobalSection {
    pub fn apply(&self, ms: &[Value]) -> Row {
        ms.iter().zip(&self.maps).map(|(a, f)| f[a].clone()).collect()
    }

    /// Hidden value naming the section, e.g. `a1>R,a2>G;b1>R,b2>R`.
    pub fn label(&self) -> Value {
        let parts: Vec<String> =
            self.maps.iter().map(|f| f.iter().map(|(a, b)| format!("{a}>{b}")).collect::<Vec<_>>().join(",")).collect();
        Value::new(parts.join(";"))
    }
}

fn relational<T: Scalar>(e: &Model<T>) -> Result<&Team> {
    if e.kind() != ModelKind::Empirical {
        return Err(Error::Model("expected an empirical model".into()));
    }
    if e.is_probabilistic() {
        return Err(Error::Model("expected a relational model; collapse the distribution first".into()));
    }
    Ok(e.team())
}

struct Scenario {
    n: usize,
    ms: Vec<Vec<Value>>,
    os: Vec<Vec<Value>>,
    /// Measurement tuple to the outcome tuples seen with it.
    contexts: BTreeMap<Row, BTreeSet<Row>>,
}

impl Scenario {
    fn new<T: Scalar>(e: &Model<T>) -> Scenario {
        let n = e.arity();
        let mut contexts: BTreeMap<Row, BTreeSet<Row>> = BTreeMap::new();
        for r in e.team().rows() {
            contexts.entry(r[..n].to_vec()).or_default().insert(r[n..].to_vec());
        }
        Scenario {
            n,
            ms: (1..=n).map(|i| e.measurement_values(i).into_iter().collect()).collect(),
            os: (1..=n).map(|i| e.outcome_values(i).into_iter().collect()).collect(),
            contexts,
        }
    }

    fn section_space(&self) -> u128 {
        self.ms
            .iter()
            .zip(&self.os)
            .map(|(m, o)| (o.len() as u128).saturating_pow(m.len() as u32))
            .fold(1u128, |a, b| a.saturating_mul(b))
    }

    /// Sections whose graph lies inside the model, context by context.
    fn sections(&self) -> Result<Vec<GlobalSection>> {
        let space = self.section_space();
        if space > SECTION_CAP {
            return Err(Error::Budget(format!("{space} candidate global sections")));
        }
        let contexts: Vec<(&Row, &BTreeSet<Row>)> = self.contexts.iter().collect();
        let mut out = Vec::new();
        let mut partial: Vec<BTreeMap<Value, Value>> = vec![BTreeMap::new(); self.n];
        fn go(
            k: usize,
            contexts: &[(&Row, &BTreeSet<Row>)],
            partial: &mut Vec<BTreeMap<Value, Value>>,
            out: &mut Vec<GlobalSection>,
        ) {
            let Some((ms, outs)) = contexts.get(k) else {
                out.push(GlobalSection { maps: partial.clone() });
                return;
            };
            for o in outs.iter() {
                let fits = ms.iter().zip(o).zip(partial.iter()).all(|((a, b), f)| f.get(a).is_none_or(|v| v == b));
                if !fits {
                    continue;
                }
                let fresh: Vec<usize> = (0..ms.len()).filter(|&i| !partial[i].contains_key(&ms[i])).collect();
                for &i in &fresh {
                    partial[i].insert(ms[i].clone(), o[i].clone());
                }
                go(k + 1, contexts, partial, out);
                for &i in &fresh {
                    partial[i].remove(&ms[i]);
                }
            }
        }
        go(0, &contexts, &mut partial, &mut out);
        Ok(out)
    }
}

/// Decides whether a relational empirical model has an equivalent
/// hidden-variable model with Strong Determinism and λ-Independence.
///
/// Under Strong Determinism every hidden value fixes a function per
/// component, and under λ-Independence that value occurs with every
/// measurement tuple, so its class is the graph of a global section lying
/// inside the model. Such a model exists iff these graphs cover the model,
/// in which case the sections themselves serve as hidden values.
pub fn exists_strongdet_lambdaindep<T: Scalar>(e: &Model<T>, _budget: &EvalBudget) -> Result<Option<Model<T>>> {
    let team = relational(e)?;
    let sc = Scenario::new(e);
    let sections = sc.sections()?;
    let mut rows: BTreeSet<Row> = BTreeSet::new();
    for g in &sections {
        for ms in sc.contexts.keys() {
            rows.insert([ms.clone(), g.apply(ms), vec![g.label()]].concat());
        }
    }
    let n = sc.n;
    let covered: BTreeSet<Row> = rows.iter().map(|r| r[..2 * n].to_vec()).collect();
    if covered != *team.row_set() {
        return Ok(None);
    }
    let h = Team::new(hidden_domain(n), rows)?;
    Ok(Some(Model::hidden(TeamData::Relational(h))?))
}

/// Same decision reached through Locality: a local, λ-independent model
/// exists iff the model is a union of boxes `{(ā, b̄) : ā ∈ X(m̄), bᵢ ∈ Oᵢ(aᵢ)}`
/// it contains. The maximal such boxes form a local model, which is then
/// brought to normal form by [`localize_rel`].
pub fn exists_local_lambdaindep<T: Scalar>(e: &Model<T>, budget: &EvalBudget) -> Result<Option<Model<T>>> {
    let team = relational(e)?;
    let sc = Scenario::new(e);
    let mut space: u128 = 1;
    for (m, o) in sc.ms.iter().zip(&sc.os) {
        let per = (1u128 << o.len().min(100)) - 1;
        space = space.saturating_mul(per.saturating_pow(m.len() as u32));
    }
    if space > SECTION_CAP {
        return Err(Error::Budget(format!("{space} candidate boxes")));
    }
    let n = sc.n;
    // Per (component, measurement), the outcomes allowed by the model at all.
    let mut slots: Vec<(usize, Value, Vec<Value>)> = Vec::new();
    for i in 0..n {
        for a in &sc.ms[i] {
            let seen: BTreeSet<Value> = sc
                .contexts
                .iter()
                .filter(|(ms, _)| ms[i] == *a)
                .flat_map(|(_, outs)| outs.iter().map(|o| o[i].clone()))
                .collect();
            slots.push((i, a.clone(), seen.into_iter().collect()));
        }
    }
    let mut boxes: Vec<BTreeSet<Row>> = Vec::new();
    let mut choice: Vec<Vec<Value>> = vec![Vec::new(); slots.len()];
    fn go(
        k: usize,
        slots: &[(usize, Value, Vec<Value>)],
        choice: &mut Vec<Vec<Value>>,
        sc: &Scenario,
        team: &Team,
        boxes: &mut Vec<BTreeSet<Row>>,
    ) {
        if k == slots.len() {
            let allowed = |i: usize, a: &Value| -> &Vec<Value> {
                let k = slots.iter().position(|(j, b, _)| *j == i && b == a).expect("slot");
                &choice[k]
            };
            let mut rows = BTreeSet::new();
            for ms in sc.contexts.keys() {
                let mut outs: Vec<Row> = vec![Vec::new()];
                for (i, a) in ms.iter().enumerate() {
                    outs = outs
                        .into_iter()
                        .flat_map(|o| allowed(i, a).iter().map(move |b| [o.clone(), vec![b.clone()]].concat()))
                        .collect();
                }
                for o in outs {
                    let r = [ms.clone(), o].concat();
                    if !team.contains_row(&r) {
                        return;
                    }
                    rows.insert(r);
                }
            }
            boxes.push(rows);
            return;
        }
        let opts = &slots[k].2;
        for mask in 1u64..(1 << opts.len()) {
            choice[k] = opts.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, v)| v.clone()).collect();
            go(k + 1, slots, choice, sc, team, boxes);
        }
    }
    go(0, &slots, &mut choice, &sc, team, &mut boxes);
    let covered: BTreeSet<&Row> = boxes.iter().flatten().collect();
    if covered.len() != team.len() {
        return Ok(None);
    }
    let maximal: Vec<&BTreeSet<Row>> =
        boxes.iter().filter(|b| !boxes.iter().any(|c| c.len() > b.len() && b.is_subset(c))).collect();
    let rows = maximal
        .iter()
        .enumerate()
        .flat_map(|(k, b)| b.iter().map(move |r| [r.clone(), vec![Value::new(format!("box{k}"))]].concat()));
    let local = Model::hidden(TeamData::Relational(Team::new(hidden_domain(n), rows)?))?;
    Ok(Some(localize_rel(&local, budget)?))
}

/// The canonical Hardy team.
pub fn hardy_team() -> Team {
    Team::new(vars("m1 m2 o1 o2"), ["a1 b1 R R", "a1 b2 R G", "a2 b1 G R", "a2 b2 R R"].map(row)).expect("rows match")
}

/// Names `(a₁, a₂, b₁, b₂, R, G)` under which a team meets the Hardy conditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HardyLabels {
    pub a: [Value; 2],
    pub b: [Value; 2],
    pub r: Value,
    pub g: Value,
}

/// Checks the six Hardy conditions on an arity-2 relational model, trying
/// every labelling of its two measurements per side and two outcomes.
pub fn hardy_conditions(team: &Team) -> Option<HardyLabels> {
    let two = |col: usize| -> Option<[Value; 2]> {
        let vs: Vec<Value> = team.rows().map(|r| r[col].clone()).collect::<BTreeSet<_>>().into_iter().collect();
        (vs.len() == 2).then(|| [vs[0].clone(), vs[1].clone()])
    };
    if team.domain() != vars("m1 m2 o1 o2").as_slice() {
        return None;
    }
    let (ma, mb) = (two(0)?, two(1)?);
    let outs: BTreeSet<Value> = team.rows().flat_map(|r| [r[2].clone(), r[3].clone()]).collect();
    let outs: Vec<Value> = outs.into_iter().collect();
    let grid: BTreeSet<(Value, Value)> = team.rows().map(|r| (r[0].clone(), r[1].clone())).collect();
    if grid.len() != 4 || outs.len() > 2 {
        return None;
    }
    let has =
        |a: &Value, b: &Value, x: &Value, y: &Value| team.contains_row(&[a.clone(), b.clone(), x.clone(), y.clone()]);
    let colours: Vec<(Value, Value)> = match outs.as_slice() {
        [x, y] => vec![(x.clone(), y.clone()), (y.clone(), x.clone())],
        [x] => vec![(x.clone(), Value::new(format!("{x}'")))],
        _ => return None,
    };
    for flip_a in [false, true] {
        for flip_b in [false, true] {
            let (a1, a2) = if flip_a { (&ma[1], &ma[0]) } else { (&ma[0], &ma[1]) };
            let (b1, b2) = if flip_b { (&mb[1], &mb[0]) } else { (&mb[0], &mb[1]) };
            for (r, g) in &colours {
                if has(a1, b1, r, r) && !has(a1, b2, r, r) && !has(a2, b1, r, r) && !has(a2, b2, g, g) {
                    return Some(HardyLabels {
                        a: [a1.clone(), a2.clone()],
                        b: [b1.clone(), b2.clone()],
                        r: r.clone(),
                        g: g.clone(),
                    });
                }
            }
        }
    }
    None
}

/// Rays in four-space with integer coordinates, grouped into orthogonal bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSConfiguration {
    pub vectors: Vec<[i64; 4]>,
    pub bases: Vec<[usize; 4]>,
}

fn dot(u: &[i64; 4], v: &[i64; 4]) -> i64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

impl KSConfiguration {
    /// Nonzero vectors, bases of four distinct pairwise orthogonal vectors,
    /// and every vector in one or two bases.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (k, v) in self.vectors.iter().enumerate() {
            if v.iter().all(|&x| x == 0) {
                problems.push(format!("vector {k} is zero"));
            }
        }
        let mut uses = vec![0usize; self.vectors.len()];
        for (j, b) in self.bases.iter().enumerate() {
            if let Some(&k) = b.iter().find(|&&k| k >= self.vectors.len()) {
                problems.push(format!("basis {j} refers to missing vector {k}"));
                continue;
            }
            for x in 0..4 {
                uses[b[x]] += 1;
                for y in x + 1..4 {
                    if b[x] == b[y] {
                        problems.push(format!("basis {j} repeats vector {}", b[x]));
                    } else if dot(&self.vectors[b[x]], &self.vectors[b[y]]) != 0 {
                        problems.push(format!("basis {j}: vectors {} and {} are not orthogonal", b[x], b[y]));
                    }
                }
            }
        }
        for (k, &u) in uses.iter().enumerate() {
            if u == 0 || u > 2 {
                problems.push(format!("vector {k} occurs in {u} bases"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn parse(text: &str) -> Result<KSConfiguration> {
        let cfg: KSConfiguration = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Value standing for vector `k`: its coordinates.
    pub fn name(&self, k: usize) -> Value {
        Value::tuple(self.vectors[k].iter())
    }

    /// `Some(true)` when every vector lies in exactly two of an odd number of
    /// bases, which rules out a set meeting each basis once: counting
    /// incidences gives `2|S| = #bases`. `None` when the argument does not apply.
    pub fn parity_obstruction(&self) -> Option<bool> {
        let mut uses = vec![0usize; self.vectors.len()];
        for b in &self.bases {
            for &k in b {
                uses[k] += 1;
            }
        }
        (uses.iter().all(|&u| u == 2) && self.bases.len() % 2 == 1).then_some(true)
    }
}

/// The eighteen rays and nine bases of Cabello, Estebaranz and García-Alcaine.
pub fn cabello_config() -> KSConfiguration {
    let cfg: KSConfiguration =
        serde_json::from_str(include_str!("../data/cabello-18.json")).expect("bundled configuration parses");
    cfg.validate().expect("bundled configuration is valid");
    cfg
}

pub fn load_ks(text: &str) -> Result<KSConfiguration> {
    KSConfiguration::parse(text)
}

/// A set of vectors meeting every basis exactly once, if there is one.
pub fn ks_colorable(cfg: &KSConfiguration) -> Option<BTreeSet<usize>> {
    // state per vector: None undecided, Some(true) chosen, Some(false) excluded
    fn go(j: usize, cfg: &KSConfiguration, state: &mut Vec<Option<bool>>, by_vector: &[Vec<usize>]) -> bool {
        let Some(basis) = cfg.bases.get(j) else { return true };
        let chosen = basis.iter().filter(|&&k| state[k] == Some(true)).count();
        if chosen > 1 {
            return false;
        }
        if chosen == 1 {
            return go(j + 1, cfg, state, by_vector);
        }
        for &k in basis {
            if state[k].is_some() {
                continue;
            }
            // choose k; its partners in every basis through k are excluded
            let mut touched = vec![k];
            state[k] = Some(true);
            let mut ok = true;
            for &b in &by_vector[k] {
                for &other in &cfg.bases[b] {
                    match state[other] {
                        None => {
                            state[other] = Some(false);
                            touched.push(other);
                        }
                        Some(true) if other != k => ok = false,
                        _ => {}
                    }
                }
            }
            if ok && go(j + 1, cfg, state, by_vector) {
                return true;
            }
            for t in touched {
                state[t] = None;
            }
        }
        false
    }
    let mut by_vector = vec![Vec::new(); cfg.vectors.len()];
    for (j, b) in cfg.bases.iter().enumerate() {
        for &k in b {
            by_vector[k].push(j);
        }
    }
    let mut state = vec![None; cfg.vectors.len()];
    go(0, cfg, &mut state, &by_vector)
        .then(|| state.iter().enumerate().filter(|(_, s)| **s == Some(true)).map(|(k, _)| k).collect())
}

/// One row per basis, listing its vectors in `m1..m4`.
pub fn ks_team(cfg: &KSConfiguration) -> Team {
    Team::new(measurement_vars(4), cfg.bases.iter().map(|b| b.iter().map(|&k| cfg.name(k)).collect::<Row>()))
        .expect("rows of four measurements")
}

/// A valuation `Z → {0, 1}` with exactly one `1` per basis, by plain
/// enumeration of all valuations (a check independent of [`ks_colorable`]).
fn global_valuation(cfg: &KSConfiguration) -> Option<Vec<bool>> {
    let z = cfg.vectors.len();
    assert!(z <= 26, "valuation enumeration is for small configurations");
    (0u64..1 << z).find_map(|mask| {
        let on = |k: usize| mask >> k & 1 == 1;
        cfg.bases.iter().all(|b| b.iter().filter(|&&k| on(k)).count() == 1).then(|| (0..z).map(on).collect())
    })
}

/// The extension `o_i = v(m_i)` of the measurement team by a valuation.
pub fn ks_extension(cfg: &KSConfiguration, v: &[bool]) -> Team {
    let bit = |k: usize| Value::new(if v[k] { "1" } else { "0" });
    let mut domain = measurement_vars(4);
    domain.extend(outcome_vars(4));
    Team::new(
        domain,
        cfg.bases.iter().map(|b| {
            let ms = b.iter().map(|&k| cfg.name(k));
            let os = b.iter().map(|&k| bit(k));
            ms.chain(os).collect::<Row>()
        }),
    )
    .expect("rows of eight values")
}

#[derive(Clone, Debug, Serialize)]
pub struct KsReport {
    pub vectors: usize,
    pub bases: usize,
    pub parity_obstruction: Option<bool>,
    pub colouring: Option<BTreeSet<usize>>,
    pub ncc: bool,
    /// A non-contextual extension with outcomes among the unit vectors.
    pub noncontextual_extension: bool,
    /// The extension, when one exists, satisfies the non-contextuality formula.
    pub extension_checked: Option<bool>,
}

impl KsReport {
    /// The checks agree with each other.
    pub fn consistent(&self) -> bool {
        let colourable = self.colouring.is_some();
        colourable == self.ncc
            && colourable == self.noncontextual_extension
            && !(self.parity_obstruction == Some(true) && colourable)
            && self.extension_checked != Some(false)
    }
}

pub fn verify_ks_theorems(cfg: &KSConfiguration, budget: &EvalBudget) -> Result<KsReport> {
    cfg.validate()?;
    let team = ks_team(cfg);
    let ncc = eval_atom_rel(&team, &Formula::ncc(measurement_vars(4)))?;
    let valuation = global_valuation(cfg);
    let extension_checked = match &valuation {
        Some(v) => Some(eval_rel(&ks_extension(cfg, v), &property_formula(PropertyName::NonContextE, 4), budget)?),
        None => None,
    };
    Ok(KsReport {
        vectors: cfg.vectors.len(),
        bases: cfg.bases.len(),
        parity_obstruction: cfg.parity_obstruction(),
        colouring: ks_colorable(cfg),
        ncc,
        noncontextual_extension: valuation.is_some(),
        extension_checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hvmodel::{empirically_equivalent, Equivalence};
    use crate::properties::check_property;
    use num_bigint::BigInt;

    fn model(t: Team) -> Model<BigInt> {
        Model::empirical(TeamData::Relational(t)).unwrap()
    }

    fn toy() -> KSConfiguration {
        KSConfiguration {
            vectors: vec![
                [1, 0, 0, 0],
                [0, 1, 0, 0],
                [0, 0, 1, 0],
                [0, 0, 0, 1],
                [1, 1, 0, 0],
                [1, -1, 0, 0],
                [0, 0, 1, 1],
                [0, 0, 1, -1],
            ],
            bases: vec![[0, 1, 2, 3], [4, 5, 6, 7]],
        }
    }

    #[test]
    fn hardy_has_no_local_model() {
        let b = EvalBudget::default();
        let e = model(hardy_team());
        assert!(hardy_conditions(e.team()).is_some());
        assert!(exists_strongdet_lambdaindep(&e, &b).unwrap().is_none());
        assert!(exists_local_lambdaindep(&e, &b).unwrap().is_none());
    }

    #[test]
    fn ex22_has_no_strongdet_model() {
        let t = Team::new(vars("m1 m2 o1 o2"), ["a1 b1 + +", "a1 b1 - -", "a2 b1 + -", "a2 b1 - +"].map(row)).unwrap();
        let e = model(t);
        let b = EvalBudget::default();
        // f(a1)=+ with f(b1)=+ is consistent on (a1,b1) and leaves (a2,b1) the row (-,+)
        let h = exists_strongdet_lambdaindep(&e, &b).unwrap().expect("covered by two sections");
        assert_eq!(h.hidden_values().len(), 2);
        assert!(exists_local_lambdaindep(&e, &b).unwrap().is_some());
    }

    #[test]
    fn product_models_are_local() {
        let rows = ["x y", "x z", "w y", "w z"]
            .iter()
            .flat_map(|m| ["0 0", "0 1", "1 0", "1 1"].iter().map(move |o| row(&format!("{m} {o}"))));
        let e = model(Team::new(vars("m1 m2 o1 o2"), rows).unwrap());
        let b = EvalBudget::default();
        for h in [exists_strongdet_lambdaindep(&e, &b).unwrap(), exists_local_lambdaindep(&e, &b).unwrap()] {
            let h = h.expect("product model");
            for p in [PropertyName::StrongDetH, PropertyName::LambdaIndepH] {
                assert!(check_property(&h, p, &b).unwrap(), "{p}");
            }
            assert!(empirically_equivalent(&e, &h, Equivalence::Joint).unwrap());
        }
    }

    #[test]
    fn single_component_models_always_work() {
        let t = Team::new(vars("m1 o1"), ["a 0", "a 1", "b 1"].map(row)).unwrap();
        let e = model(t);
        assert!(exists_strongdet_lambdaindep(&e, &EvalBudget::default()).unwrap().is_some());
        assert!(exists_local_lambdaindep(&e, &EvalBudget::default()).unwrap().is_some());
    }

    #[test]
    fn cabello_configuration() {
        let cfg = cabello_config();
        assert_eq!((cfg.vectors.len(), cfg.bases.len()), (18, 9));
        assert_eq!(cfg.parity_obstruction(), Some(true));
        let r = verify_ks_theorems(&cfg, &EvalBudget::default()).unwrap();
        assert!(r.colouring.is_none() && !r.ncc && !r.noncontextual_extension);
        assert!(r.consistent());
    }

    #[test]
    fn toy_configuration_is_colourable() {
        let cfg = toy();
        cfg.validate().unwrap();
        assert_eq!(cfg.parity_obstruction(), None);
        assert_eq!(ks_colorable(&cfg).map(|s| s.len()), Some(2));
        let r = verify_ks_theorems(&cfg, &EvalBudget::default()).unwrap();
        assert!(r.ncc && r.noncontextual_extension && r.extension_checked == Some(true));
        assert!(r.consistent());
    }

    #[test]
    fn invalid_configurations() {
        let mut repeated = toy();
        repeated.bases[0] = [0, 1, 2, 2];
        assert!(matches!(repeated.validate(), Err(Error::Config(m)) if m.contains("repeats")));
        let mut thrice = cabello_config();
        let extra = thrice.bases[0];
        thrice.bases.push(extra);
        assert!(matches!(thrice.validate(), Err(Error::Config(m)) if m.contains("3 bases")));
        let mut skew = toy();
        skew.vectors[4] = [1, 1, 1, 0];
        assert!(matches!(skew.validate(), Err(Error::Config(m)) if m.contains("orthogonal")));
    }
}
