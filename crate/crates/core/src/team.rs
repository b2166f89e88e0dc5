//! Relational teams and the team operators.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::value::{Value, Var};

/// A row of values, positionally aligned with a team's domain.
pub type Row = Vec<Value>;

/// A single assignment viewed through its team's domain.
#[derive(Clone, Copy)]
pub struct Assignment<'a> {
    domain: &'a [Var],
    row: &'a [Value],
}

impl<'a> Assignment<'a> {
    pub fn new(domain: &'a [Var], row: &'a [Value]) -> Self {
        debug_assert_eq!(domain.len(), row.len());
        Assignment { domain, row }
    }

    pub fn get(&self, var: &Var) -> Option<&'a Value> {
        self.domain.iter().position(|v| v == var).map(|i| &self.row[i])
    }

    pub fn domain(&self) -> &'a [Var] {
        self.domain
    }

    pub fn row(&self) -> &'a [Value] {
        self.row
    }
}

impl fmt::Debug for Assignment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.domain.iter().zip(self.row.iter())).finish()
    }
}

/// A finite set of assignments over a shared, ordered domain, together with
/// the universe of values that quantifiers range over.
///
/// Rows are kept in a `BTreeSet`, so iteration order is canonical and every
/// derived output is deterministic. The universe always contains the active
/// domain.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Team {
    domain: Vec<Var>,
    rows: BTreeSet<Row>,
    universe: BTreeSet<Value>,
}

fn check_domain(domain: &[Var]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in domain {
        if !seen.insert(v) {
            return Err(Error::Domain(format!("variable {v} occurs twice in the domain")));
        }
    }
    Ok(())
}

impl Team {
    /// Builds a team whose universe is its active domain.
    pub fn new<I>(domain: Vec<Var>, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Row>,
    {
        Team::with_universe(domain, rows, std::iter::empty())
    }

    /// Builds a team with extra universe values beyond the active domain.
    pub fn with_universe<I, U>(domain: Vec<Var>, rows: I, universe: U) -> Result<Self>
    where
        I: IntoIterator<Item = Row>,
        U: IntoIterator<Item = Value>,
    {
        check_domain(&domain)?;
        let mut set = BTreeSet::new();
        for r in rows {
            if r.len() != domain.len() {
                return Err(Error::Domain(format!(
                    "row of length {} does not match domain of length {}",
                    r.len(),
                    domain.len()
                )));
            }
            set.insert(r);
        }
        let mut universe: BTreeSet<Value> = universe.into_iter().collect();
        for r in &set {
            universe.extend(r.iter().cloned());
        }
        Ok(Team { domain, rows: set, universe })
    }

    /// The empty team over `domain`.
    pub fn empty(domain: Vec<Var>) -> Result<Self> {
        Team::new(domain, std::iter::empty())
    }

    pub fn domain(&self) -> &[Var] {
        &self.domain
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &Row> + '_ {
        self.rows.iter()
    }

    pub fn row_set(&self) -> &BTreeSet<Row> {
        &self.rows
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment<'_>> + '_ {
        self.rows.iter().map(|r| Assignment::new(&self.domain, r))
    }

    pub fn universe(&self) -> &BTreeSet<Value> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains_row(&self, row: &[Value]) -> bool {
        self.rows.contains(row)
    }

    /// Values occurring in some row.
    pub fn active_values(&self) -> BTreeSet<Value> {
        self.rows.iter().flat_map(|r| r.iter().cloned()).collect()
    }

    pub fn index_of(&self, var: &Var) -> Result<usize> {
        self.domain
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::Domain(format!("variable {var} is not in the team domain")))
    }

    pub fn indices_of(&self, vars: &[Var]) -> Result<Vec<usize>> {
        vars.iter().map(|v| self.index_of(v)).collect()
    }

    /// `X(x̄)`: the set of value tuples taken by `vars`.
    pub fn values_of(&self, vars: &[Var]) -> Result<BTreeSet<Row>> {
        let idx = self.indices_of(vars)?;
        Ok(self.rows.iter().map(|r| idx.iter().map(|&i| r[i].clone()).collect()).collect())
    }

    /// Projection of every row to `vars`; the universe is kept.
    pub fn restrict(&self, vars: &[Var]) -> Result<Team> {
        check_domain(vars)?;
        let rows = self.values_of(vars)?;
        Ok(Team { domain: vars.to_vec(), rows, universe: self.universe.clone() })
    }

    /// `X[x ↦ A]`.
    pub fn generalize(&self, x: &Var, values: &BTreeSet<Value>) -> Result<Team> {
        if values.is_empty() {
            return Err(Error::Argument(format!("generalisation of {x} over an empty value set")));
        }
        self.skolem_extend_with(x, |_| values.clone())
    }

    /// `X[x ↦ F]` for a set-valued function given as a map from rows.
    pub fn skolem_extend(&self, x: &Var, choice: &BTreeMap<Row, BTreeSet<Value>>) -> Result<Team> {
        for r in &self.rows {
            if !choice.contains_key(r) {
                return Err(Error::Argument(format!(
                    "Skolem function for {x} is undefined on row {}",
                    Assignment::new(&self.domain, r).display()
                )));
            }
        }
        self.skolem_extend_with(x, |a| choice[a.row()].clone())
    }

    /// `X[x ↦ F]` with `F` given as a closure. Every image must be nonempty.
    pub fn skolem_extend_with<F>(&self, x: &Var, mut choice: F) -> Result<Team>
    where
        F: FnMut(Assignment<'_>) -> BTreeSet<Value>,
    {
        let pos = self.domain.iter().position(|v| v == x);
        let mut domain = self.domain.clone();
        if pos.is_none() {
            domain.push(x.clone());
        }
        let mut rows = BTreeSet::new();
        let mut universe = self.universe.clone();
        for r in &self.rows {
            let image = choice(Assignment::new(&self.domain, r));
            if image.is_empty() {
                return Err(Error::Argument(format!(
                    "Skolem function for {x} maps {} to the empty set",
                    Assignment::new(&self.domain, r).display()
                )));
            }
            for a in image {
                let mut nr = r.clone();
                match pos {
                    Some(i) => nr[i] = a.clone(),
                    None => nr.push(a.clone()),
                }
                rows.insert(nr);
                universe.insert(a);
            }
        }
        Ok(Team { domain, rows, universe })
    }

    /// `X + Λ`: same rows, enlarged universe.
    pub fn add_values<I: IntoIterator<Item = Value>>(&self, values: I) -> Team {
        let mut t = self.clone();
        t.universe.extend(values);
        t
    }

    /// Keeps only the rows satisfying `keep`; domain and universe are kept.
    pub fn filter<F: FnMut(Assignment<'_>) -> bool>(&self, mut keep: F) -> Team {
        Team {
            domain: self.domain.clone(),
            rows: self.rows.iter().filter(|r| keep(Assignment::new(&self.domain, r))).cloned().collect(),
            universe: self.universe.clone(),
        }
    }

    /// Same rows with the columns permuted into `order` (a permutation of the domain).
    pub fn reorder(&self, order: &[Var]) -> Result<Team> {
        if order.len() != self.domain.len() {
            return Err(Error::Domain("reordering must be a permutation of the domain".into()));
        }
        self.restrict(order)
    }

    /// Equal domains and rows, ignoring the universe.
    pub fn same_rows(&self, other: &Team) -> bool {
        self.domain == other.domain && self.rows == other.rows
    }

    /// Replaces the universe by the active domain.
    pub fn narrowed(&self) -> Team {
        Team { domain: self.domain.clone(), rows: self.rows.clone(), universe: self.active_values() }
    }
}

impl Assignment<'_> {
    pub fn display(&self) -> String {
        let parts: Vec<String> = self.domain.iter().zip(self.row).map(|(v, a)| format!("{v}={a}")).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

impl fmt::Debug for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Team{:?}", self.domain)?;
        f.debug_set().entries(self.rows.iter()).finish()
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<&str> = self.domain.iter().map(|v| v.as_str()).collect();
        writeln!(f, "{}", header.join(" "))?;
        for r in &self.rows {
            let cells: Vec<&str> = r.iter().map(|v| v.as_str()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}
