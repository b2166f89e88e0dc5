//! Empirical and hidden-variable models as teams over the reserved variables
//! `m1..mn`, `o1..on` and `l`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::json::{TeamData, TeamDoc};
use crate::prob::ProbTeam;
use crate::scalar::Scalar;
use crate::team::{Row, Team};
use crate::value::{Value, Var};

/// Name of the hidden variable.
pub const LAMBDA: &str = "l";

pub fn lambda() -> Var {
    Var::new(LAMBDA)
}

pub fn measurement_vars(n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::new(format!("m{i}"))).collect()
}

pub fn outcome_vars(n: usize) -> Vec<Var> {
    (1..=n).map(|i| Var::new(format!("o{i}"))).collect()
}

/// `m1..mn o1..on`.
pub fn empirical_domain(n: usize) -> Vec<Var> {
    let mut d = measurement_vars(n);
    d.extend(outcome_vars(n));
    d
}

/// `m1..mn o1..on l`.
pub fn hidden_domain(n: usize) -> Vec<Var> {
    let mut d = empirical_domain(n);
    d.push(lambda());
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Empirical,
    Hidden,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Empirical => "empirical",
            ModelKind::Hidden => "hidden",
        }
    }

    pub fn domain(self, n: usize) -> Vec<Var> {
        match self {
            ModelKind::Empirical => empirical_domain(n),
            ModelKind::Hidden => hidden_domain(n),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empirical" => Ok(ModelKind::Empirical),
            "hidden" => Ok(ModelKind::Hidden),
            _ => Err(Error::Format(format!("unknown model kind `{s}`"))),
        }
    }
}

/// How [`empirically_equivalent`] compares probabilistic models.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Equivalence {
    /// `h(m̄,ō) = e(m̄,ō)`.
    #[default]
    Joint,
    /// `h(ō | m̄) = e(ō | m̄)` wherever the measurement has positive probability in both,
    /// with equal sets of possible measurements.
    Conditional,
}

/// A validated model: a team over the reserved variables, columns in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model<T: Scalar = BigInt> {
    kind: ModelKind,
    arity: usize,
    data: TeamData<T>,
    notes: Vec<String>,
}

fn infer_arity(kind: ModelKind, domain: &[Var]) -> Result<usize> {
    let extra = match kind {
        ModelKind::Empirical => 0,
        ModelKind::Hidden => 1,
    };
    let len = domain.len();
    if len < 2 + extra || !(len - extra).is_multiple_of(2) {
        return Err(Error::Model(format!(
            "a {kind} model needs variables {}; got {}",
            kind.domain(1).iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" ") + " ...",
            domain.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" ")
        )));
    }
    let n = (len - extra) / 2;
    let want: BTreeSet<Var> = kind.domain(n).into_iter().collect();
    let got: BTreeSet<Var> = domain.iter().cloned().collect();
    if want != got {
        return Err(Error::Model(format!(
            "domain {} is not {} for arity {n}",
            domain.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" "),
            kind.domain(n).iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" ")
        )));
    }
    Ok(n)
}

impl<T: Scalar> Model<T> {
    /// Wraps a team, reordering its columns to `m1..mn o1..on [l]`.
    ///
    /// Relational universes larger than the active domain are narrowed, with a note.
    pub fn new(data: TeamData<T>, kind: ModelKind) -> Result<Self> {
        let n = infer_arity(kind, data.team().domain())?;
        if data.team().is_empty() {
            return Err(Error::Model("a model needs at least one row".into()));
        }
        let order = kind.domain(n);
        let mut notes = Vec::new();
        let data = match data {
            TeamData::Relational(t) => {
                let t = t.reorder(&order)?;
                if t.universe() != &t.active_values() {
                    notes.push(format!(
                        "universe narrowed from {} to {} active values",
                        t.universe().len(),
                        t.active_values().len()
                    ));
                }
                TeamData::Relational(t.narrowed())
            }
            TeamData::Probabilistic(p) => TeamData::Probabilistic(p.reorder(&order)?.narrowed()),
        };
        Ok(Model { kind, arity: n, data, notes })
    }

    /// Hidden if the domain contains `l`, empirical otherwise.
    pub fn infer(data: TeamData<T>) -> Result<Self> {
        let kind = if data.team().domain().contains(&lambda()) { ModelKind::Hidden } else { ModelKind::Empirical };
        Model::new(data, kind)
    }

    pub fn empirical(data: TeamData<T>) -> Result<Self> {
        Model::new(data, ModelKind::Empirical)
    }

    pub fn hidden(data: TeamData<T>) -> Result<Self> {
        Model::new(data, ModelKind::Hidden)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn data(&self) -> &TeamData<T> {
        &self.data
    }

    pub fn into_data(self) -> TeamData<T> {
        self.data
    }

    /// The relational team (the support, for probabilistic models).
    pub fn team(&self) -> &Team {
        self.data.team()
    }

    pub fn prob(&self) -> Option<&ProbTeam<T>> {
        match &self.data {
            TeamData::Probabilistic(p) => Some(p),
            TeamData::Relational(_) => None,
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        self.data.is_probabilistic()
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    fn column_values(&self, col: usize) -> BTreeSet<Value> {
        self.team().rows().map(|r| r[col].clone()).collect()
    }

    /// `M_i` for `i` in `1..=n`.
    pub fn measurement_values(&self, i: usize) -> BTreeSet<Value> {
        assert!((1..=self.arity).contains(&i), "component index out of range");
        self.column_values(i - 1)
    }

    /// `O_i` for `i` in `1..=n`.
    pub fn outcome_values(&self, i: usize) -> BTreeSet<Value> {
        assert!((1..=self.arity).contains(&i), "component index out of range");
        self.column_values(self.arity + i - 1)
    }

    /// `Λ`; empty for empirical models.
    pub fn hidden_values(&self) -> BTreeSet<Value> {
        match self.kind {
            ModelKind::Hidden => self.column_values(2 * self.arity),
            ModelKind::Empirical => BTreeSet::new(),
        }
    }

    /// Projection to the observable variables (the marginal over `l` when probabilistic).
    /// Empirical models are returned unchanged.
    pub fn induced_empirical(&self) -> Model<T> {
        if self.kind == ModelKind::Empirical {
            return self.clone();
        }
        let vars = empirical_domain(self.arity);
        let data = match &self.data {
            TeamData::Relational(t) => TeamData::Relational(t.restrict(&vars).expect("reserved variables present")),
            TeamData::Probabilistic(p) => {
                TeamData::Probabilistic(p.prob_restrict(&vars).expect("reserved variables present"))
            }
        };
        Model::empirical(data).expect("projection of a model is a model")
    }

    /// The relational model of all rows with positive probability.
    pub fn collapse(&self) -> Model<T> {
        Model { kind: self.kind, arity: self.arity, data: TeamData::Relational(self.team().clone()), notes: Vec::new() }
    }

    pub fn to_doc(&self) -> TeamDoc {
        let mut doc = TeamDoc::from_data(&self.data);
        doc.kind = Some(self.kind.name().to_string());
        doc.arity = Some(self.arity);
        doc
    }

    pub fn from_doc(doc: &TeamDoc) -> Result<Self> {
        let data = doc.to_data()?;
        let model = match &doc.kind {
            Some(k) => Model::new(data, k.parse()?)?,
            None => Model::infer(data)?,
        };
        if let Some(n) = doc.arity {
            if n != model.arity {
                return Err(Error::Model(format!("declared arity {n} but the domain has arity {}", model.arity)));
            }
        }
        Ok(model)
    }
}

pub fn read_model<T: Scalar>(text: &str) -> Result<Model<T>> {
    Model::from_doc(&TeamDoc::parse(text)?)
}

fn conditionals<T: Scalar>(p: &ProbTeam<T>, n: usize) -> BTreeMap<Row, BTreeMap<Row, Ratio<T>>> {
    let mut joint: BTreeMap<Row, BTreeMap<Row, Ratio<T>>> = BTreeMap::new();
    for (r, w) in p.weights() {
        let slot = joint.entry(r[..n].to_vec()).or_default().entry(r[n..2 * n].to_vec()).or_insert_with(Ratio::zero);
        *slot = slot.clone() + w.clone();
    }
    for outcomes in joint.values_mut() {
        let total = outcomes.values().fold(Ratio::zero(), |a: Ratio<T>, w| a + w.clone());
        for w in outcomes.values_mut() {
            *w = w.clone() / total.clone();
        }
    }
    joint
}

/// Does `h` induce `e`?
pub fn empirically_equivalent<T: Scalar>(e: &Model<T>, h: &Model<T>, mode: Equivalence) -> Result<bool> {
    if e.arity != h.arity {
        return Err(Error::Arity(format!(
            "empirical model of arity {} against hidden-variable model of arity {}",
            e.arity, h.arity
        )));
    }
    if e.kind != ModelKind::Empirical || h.kind != ModelKind::Hidden {
        return Err(Error::Model(format!(
            "expected an empirical and a hidden-variable model, got {} and {}",
            e.kind, h.kind
        )));
    }
    let induced = h.induced_empirical();
    match (&e.data, &induced.data) {
        (TeamData::Relational(a), TeamData::Relational(b)) => Ok(a.same_rows(b)),
        (TeamData::Probabilistic(a), TeamData::Probabilistic(b)) => Ok(match mode {
            Equivalence::Joint => a.same_distribution(b),
            Equivalence::Conditional => conditionals(a, e.arity) == conditionals(b, e.arity),
        }),
        _ => Err(Error::Model("cannot compare a relational with a probabilistic model; collapse first".into())),
    }
}

/// The square relating probabilistic teams, probabilistic models, and their
/// relational collapses commutes for this probabilistic hidden-variable team.
///
/// Checks that team and model views round-trip, that projecting then
/// collapsing equals collapsing then projecting (rows and weights), and that
/// the component value sets agree along both paths.
pub fn fig1_commutes<T: Scalar>(px: &ProbTeam<T>) -> Result<bool> {
    let h = Model::hidden(TeamData::Probabilistic(px.clone()))?;
    let n = h.arity();
    // team → model → team
    let back = match h.data() {
        TeamData::Probabilistic(p) => p.clone(),
        TeamData::Relational(_) => unreachable!(),
    };
    let reordered = px.reorder(&hidden_domain(n))?;
    if !back.same_distribution(&reordered) {
        return Ok(false);
    }
    // projection commutes with collapse
    let down_then_collapse = h.induced_empirical().collapse();
    let collapse_then_down = h.collapse().induced_empirical();
    if !down_then_collapse.team().same_rows(collapse_then_down.team()) {
        return Ok(false);
    }
    // team-level marginal agrees with model-level projection
    let marginal = reordered.prob_restrict(&empirical_domain(n))?;
    match h.induced_empirical().data() {
        TeamData::Probabilistic(p) if p.same_distribution(&marginal) => {}
        _ => return Ok(false),
    }
    let support = Model::<T>::hidden(TeamData::Relational(px.support().clone()))?;
    for i in 1..=n {
        if support.measurement_values(i) != h.measurement_values(i)
            || support.outcome_values(i) != h.outcome_values(i)
            || down_then_collapse.measurement_values(i) != h.measurement_values(i)
        {
            return Ok(false);
        }
    }
    Ok(support.hidden_values() == h.hidden_values())
}
