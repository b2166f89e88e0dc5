//! JSON encoding of teams and models.
//!
//! ```json
//! {"domain": ["x", "y"], "universe": ["0", "1", "2"], "rows": [["0", "1"]], "weights": ["1/1"]}
//! ```
//!
//! `universe` is optional and defaults to the active domain. `weights` is
//! present exactly for probabilistic teams. Model files add `"kind"`
//! (`"empirical"` or `"hidden"`) and `"arity"`.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::ProbTeam;
use crate::scalar::{format_ratio, parse_ratio, Scalar};
use crate::team::Team;
use crate::value::{Value, Var};

/// A relational or probabilistic team.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TeamData<T: Scalar = BigInt> {
    Relational(Team),
    Probabilistic(ProbTeam<T>),
}

impl<T: Scalar> TeamData<T> {
    /// The underlying relational team (the support for probabilistic data).
    pub fn team(&self) -> &Team {
        match self {
            TeamData::Relational(t) => t,
            TeamData::Probabilistic(p) => p.support(),
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(self, TeamData::Probabilistic(_))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    pub domain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
}

impl TeamDoc {
    pub fn parse(text: &str) -> Result<TeamDoc> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_data<T: Scalar>(&self) -> Result<TeamData<T>> {
        let domain: Vec<Var> = self.domain.iter().map(Var::new).collect();
        let universe: Vec<Value> = self.universe.iter().flatten().map(Value::new).collect();
        let rows = self.rows.iter().map(|r| r.iter().map(Value::new).collect::<Vec<_>>());
        match &self.weights {
            None => Ok(TeamData::Relational(Team::with_universe(domain, rows, universe)?)),
            Some(ws) => {
                if ws.len() != self.rows.len() {
                    return Err(Error::Format(format!("{} weights for {} rows", ws.len(), self.rows.len())));
                }
                let ws = ws.iter().map(|w| parse_ratio::<T>(w)).collect::<Result<Vec<_>>>()?;
                let p = ProbTeam::with_universe(domain, rows.zip(ws), universe)?;
                Ok(TeamData::Probabilistic(p))
            }
        }
    }

    pub fn from_team(team: &Team) -> TeamDoc {
        TeamDoc {
            domain: team.domain().iter().map(|v| v.to_string()).collect(),
            universe: universe_field(team),
            rows: team.rows().map(|r| r.iter().map(|v| v.to_string()).collect()).collect(),
            ..TeamDoc::default()
        }
    }

    pub fn from_prob<T: Scalar>(p: &ProbTeam<T>) -> TeamDoc {
        let (rows, weights) =
            p.weights().map(|(r, w)| (r.iter().map(|v| v.to_string()).collect(), format_ratio(w))).unzip();
        TeamDoc {
            domain: p.domain().iter().map(|v| v.to_string()).collect(),
            universe: universe_field(p.support()),
            rows,
            weights: Some(weights),
            ..TeamDoc::default()
        }
    }

    pub fn from_data<T: Scalar>(d: &TeamData<T>) -> TeamDoc {
        match d {
            TeamData::Relational(t) => TeamDoc::from_team(t),
            TeamData::Probabilistic(p) => TeamDoc::from_prob(p),
        }
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("team documents always serialise")
    }
}

fn universe_field(team: &Team) -> Option<Vec<String>> {
    if team.universe() == &team.active_values() {
        None
    } else {
        Some(team.universe().iter().map(|v| v.to_string()).collect())
    }
}

pub fn read_team<T: Scalar>(text: &str) -> Result<TeamData<T>> {
    TeamDoc::parse(text)?.to_data()
}

impl Serialize for Team {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TeamDoc::from_team(self).serialize(s)
    }
}

impl<T: Scalar> Serialize for ProbTeam<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TeamDoc::from_prob(self).serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relational_round_trip() {
        let text = r#"{"domain":["x","y"],"universe":["0","1","2"],"rows":[["0","1"],["1","1"]]}"#;
        let d: TeamData = read_team(text).unwrap();
        let t = d.team();
        assert_eq!(t.len(), 2);
        assert_eq!(t.universe().len(), 3);
        let back: TeamData = TeamDoc::from_data(&d).to_data().unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn probabilistic_round_trip() {
        let text = r#"{"domain":["x"],"rows":[["a"],["b"]],"weights":["2/6","2/3"]}"#;
        let d: TeamData = read_team(text).unwrap();
        assert!(d.is_probabilistic());
        let doc = TeamDoc::from_data(&d);
        assert_eq!(doc.weights.as_deref(), Some(&["1/3".to_string(), "2/3".to_string()][..]));
        assert_eq!(doc.to_data::<BigInt>().unwrap(), d);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_team::<BigInt>("{"), Err(Error::Format(_))));
        assert!(read_team::<BigInt>(r#"{"domain":["x"],"rows":[["a"]],"weights":["1/2"]}"#).is_err());
        assert!(read_team::<BigInt>(r#"{"domain":["x"],"rows":[["a"]],"weights":["1/0"]}"#).is_err());
        assert!(read_team::<BigInt>(r#"{"domain":["x"],"rows":[["a","b"]]}"#).is_err());
        assert!(read_team::<BigInt>(r#"{"domain":["x"],"rows":[],"bogus":1}"#).is_err());
    }
}
