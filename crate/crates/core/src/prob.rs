//! Probabilistic teams: a team plus an exact full-support distribution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{format_ratio, ratio_from_usize, Scalar};
use crate::team::{Assignment, Row, Team};
use crate::value::{Value, Var};

/// A distribution over values, used as the image of a probabilistic Skolem function.
pub type Dist<T> = BTreeMap<Value, Ratio<T>>;

/// A team with a strictly positive rational weight on every row, summing to one.
#[derive(Clone, PartialEq, Eq)]
pub struct ProbTeam<T: Scalar = BigInt> {
    team: Team,
    weights: BTreeMap<Row, Ratio<T>>,
}

fn check_total<T: Scalar>(weights: &BTreeMap<Row, Ratio<T>>) -> Result<()> {
    let total = weights.values().fold(Ratio::zero(), |acc: Ratio<T>, w| acc + w);
    if !total.is_one() {
        return Err(Error::Argument(format!("weights sum to {}, expected 1", format_ratio(&total))));
    }
    Ok(())
}

impl<T: Scalar> ProbTeam<T> {
    /// Builds a probabilistic team from weighted rows.
    ///
    /// Zero or negative weights, repeated rows, and totals other than one are
    /// rejected: the row set is always the support.
    pub fn new<I>(domain: Vec<Var>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Row, Ratio<T>)>,
    {
        ProbTeam::with_universe(domain, rows, std::iter::empty())
    }

    pub fn with_universe<I, U>(domain: Vec<Var>, rows: I, universe: U) -> Result<Self>
    where
        I: IntoIterator<Item = (Row, Ratio<T>)>,
        U: IntoIterator<Item = Value>,
    {
        let mut weights = BTreeMap::new();
        for (r, w) in rows {
            if !w.is_positive() {
                return Err(Error::Argument(format!("row {r:?} has non-positive weight {}", format_ratio(&w))));
            }
            if weights.insert(r.clone(), w).is_some() {
                return Err(Error::Argument(format!("row {r:?} listed twice")));
            }
        }
        check_total(&weights)?;
        let team = Team::with_universe(domain, weights.keys().cloned(), universe)?;
        Ok(ProbTeam { team, weights })
    }

    /// The uniform distribution on a nonempty team.
    pub fn uniform(team: &Team) -> Result<Self> {
        if team.is_empty() {
            return Err(Error::Argument("uniform distribution on an empty team".into()));
        }
        let w: Ratio<T> = ratio_from_usize(1, team.len());
        let weights = team.rows().map(|r| (r.clone(), w.clone())).collect();
        Ok(ProbTeam { team: team.clone(), weights })
    }

    /// The possibilistic collapse. Because of full support this is the underlying team.
    pub fn support(&self) -> &Team {
        &self.team
    }

    pub fn domain(&self) -> &[Var] {
        self.team.domain()
    }

    pub fn universe(&self) -> &BTreeSet<Value> {
        self.team.universe()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, row: &[Value]) -> Ratio<T> {
        self.weights.get(row).cloned().unwrap_or_else(Ratio::zero)
    }

    pub fn weights(&self) -> impl ExactSizeIterator<Item = (&Row, &Ratio<T>)> + '_ {
        self.weights.iter()
    }

    /// Marginal distribution of `vars`, keyed by value tuple.
    pub fn marginal(&self, vars: &[Var]) -> Result<BTreeMap<Row, Ratio<T>>> {
        let idx = self.team.indices_of(vars)?;
        let mut out: BTreeMap<Row, Ratio<T>> = BTreeMap::new();
        for (r, w) in &self.weights {
            let key: Row = idx.iter().map(|&i| r[i].clone()).collect();
            let slot = out.entry(key).or_insert_with(Ratio::zero);
            *slot = slot.clone() + w;
        }
        Ok(out)
    }

    /// Marginalisation to `vars`.
    pub fn prob_restrict(&self, vars: &[Var]) -> Result<ProbTeam<T>> {
        let weights = self.marginal(vars)?;
        let team = self.team.restrict(vars)?;
        Ok(ProbTeam { team, weights })
    }

    /// Probabilistic Skolem extension with the distribution family given as a map from rows.
    pub fn prob_skolem_extend(&self, x: &Var, family: &BTreeMap<Row, Dist<T>>) -> Result<ProbTeam<T>> {
        for r in self.weights.keys() {
            if !family.contains_key(r) {
                return Err(Error::Argument(format!(
                    "distribution for {x} is undefined on row {}",
                    Assignment::new(self.domain(), r).display()
                )));
            }
        }
        self.prob_skolem_extend_with(x, |a| family[a.row()].clone())
    }

    /// Probabilistic Skolem extension: row `s` splits its mass according to `family(s)`.
    ///
    /// Rows that collapse together (when `x` is already in the domain) have
    /// their masses added. Zero-mass extensions are dropped.
    pub fn prob_skolem_extend_with<F>(&self, x: &Var, mut family: F) -> Result<ProbTeam<T>>
    where
        F: FnMut(Assignment<'_>) -> Dist<T>,
    {
        let domain = self.domain();
        let pos = domain.iter().position(|v| v == x);
        let mut new_domain = domain.to_vec();
        if pos.is_none() {
            new_domain.push(x.clone());
        }
        let mut out: BTreeMap<Row, Ratio<T>> = BTreeMap::new();
        let mut universe = self.universe().clone();
        for (r, w) in &self.weights {
            let a = Assignment::new(domain, r);
            let dist = family(a);
            let mut total = Ratio::zero();
            for (v, p) in &dist {
                if p.is_negative() {
                    return Err(Error::Argument(format!(
                        "distribution for {x} at {} has negative mass on {v}",
                        a.display()
                    )));
                }
                total = total + p;
            }
            if !total.is_one() {
                return Err(Error::Argument(format!(
                    "distribution for {x} at {} sums to {}",
                    a.display(),
                    format_ratio(&total)
                )));
            }
            for (v, p) in dist {
                if p.is_zero() {
                    continue;
                }
                let mut nr = r.clone();
                match pos {
                    Some(i) => nr[i] = v.clone(),
                    None => nr.push(v.clone()),
                }
                universe.insert(v);
                let slot = out.entry(nr).or_insert_with(Ratio::zero);
                *slot = slot.clone() + w.clone() * p;
            }
        }
        let team = Team::with_universe(new_domain, out.keys().cloned(), universe)?;
        Ok(ProbTeam { team, weights: out })
    }

    /// Uniform split of every row's mass over `values`.
    pub fn prob_uniform_extend(&self, x: &Var, values: &BTreeSet<Value>) -> Result<ProbTeam<T>> {
        if values.is_empty() {
            return Err(Error::Argument(format!("uniform extension of {x} over an empty value set")));
        }
        let p: Ratio<T> = ratio_from_usize(1, values.len());
        let dist: Dist<T> = values.iter().map(|v| (v.clone(), p.clone())).collect();
        self.prob_skolem_extend_with(x, |_| dist.clone())
    }

    pub fn add_values<I: IntoIterator<Item = Value>>(&self, values: I) -> ProbTeam<T> {
        ProbTeam { team: self.team.add_values(values), weights: self.weights.clone() }
    }

    /// Same distribution with columns permuted into `order`.
    pub fn reorder(&self, order: &[Var]) -> Result<ProbTeam<T>> {
        if order.len() != self.domain().len() {
            return Err(Error::Domain("reordering must be a permutation of the domain".into()));
        }
        self.prob_restrict(order)
    }

    /// Replaces the universe by the active domain.
    pub fn narrowed(&self) -> ProbTeam<T> {
        ProbTeam { team: self.team.narrowed(), weights: self.weights.clone() }
    }

    /// Equal domains and weights, ignoring the universe.
    pub fn same_distribution(&self, other: &ProbTeam<T>) -> bool {
        self.domain() == other.domain() && self.weights == other.weights
    }

    /// Total probability of the rows satisfying `pred`.
    pub fn mass<F: FnMut(Assignment<'_>) -> bool>(&self, mut pred: F) -> Ratio<T> {
        let domain = self.domain();
        self.weights.iter().filter(|(r, _)| pred(Assignment::new(domain, r))).fold(Ratio::zero(), |acc, (_, w)| acc + w)
    }
}

impl<T: Scalar> fmt::Debug for ProbTeam<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProbTeam{:?}", self.domain())?;
        f.debug_map().entries(self.weights.iter().map(|(r, w)| (r, format_ratio(w)))).finish()
    }
}

impl<T: Scalar> fmt::Display for ProbTeam<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<&str> = self.domain().iter().map(|v| v.as_str()).collect();
        writeln!(f, "{} | P", header.join(" "))?;
        for (r, w) in &self.weights {
            let cells: Vec<&str> = r.iter().map(|v| v.as_str()).collect();
            writeln!(f, "{} | {}", cells.join(" "), format_ratio(w))?;
        }
        Ok(())
    }
}

/// Builds a point distribution.
pub fn point<T: Scalar>(v: Value) -> Dist<T> {
    BTreeMap::from([(v, Ratio::one())])
}
