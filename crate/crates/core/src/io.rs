//! JSON file formats for settings, bid profiles and correlation graphs.
//!
//! Numbers may be written as JSON numbers (kept exact through their decimal
//! literal) or as strings holding an integer, a decimal or a `p/q` fraction.
//! Output always uses exact strings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::instantiations::{CorrelationGraph, GraphError};
use crate::model::{Action, BidProfile, LinearRow, ModelError, Principal, Setting, ValuationDomain};
use crate::rational::{serde_exact, Rational};

/// A rational as it appears in files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Num(pub Rational);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_exact::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        serde_exact::deserialize(d).map(Num)
    }
}

fn nums(v: &[Rational]) -> Vec<Num> {
    v.iter().cloned().map(Num).collect()
}

fn rats(v: Vec<Num>) -> Vec<Rational> {
    v.into_iter().map(|n| n.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub name: String,
    pub cost: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowEntry {
    pub coeffs: Vec<Num>,
    pub rhs: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainEntry {
    Box {
        lower: Vec<Num>,
        /// `null` entries are unbounded.
        upper: Vec<Option<Num>>,
    },
    Polytope {
        rows: Vec<RowEntry>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalEntry {
    pub name: String,
    pub domain: DomainEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingFile {
    pub actions: Vec<ActionEntry>,
    pub outcomes: Vec<String>,
    pub distribution: Vec<Vec<Num>>,
    pub principals: Vec<PrincipalEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidFile {
    pub bids: Vec<Vec<Num>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub weights: Vec<Vec<Num>>,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid setting: {0}")]
    Model(#[from] ModelError),
    #[error("invalid correlation graph: {0}")]
    Graph(#[from] GraphError),
}

impl SettingFile {
    pub fn from_setting(s: &Setting) -> Self {
        Self {
            actions: s
                .actions()
                .iter()
                .map(|a| ActionEntry {
                    name: a.name.clone(),
                    cost: Num(a.cost.clone()),
                })
                .collect(),
            outcomes: s.outcomes().to_vec(),
            distribution: s.distribution().iter().map(|r| nums(r)).collect(),
            principals: s
                .principals()
                .iter()
                .map(|p| PrincipalEntry {
                    name: p.name.clone(),
                    domain: match &p.domain {
                        ValuationDomain::Box { lower, upper } => DomainEntry::Box {
                            lower: nums(lower),
                            upper: upper.iter().map(|u| u.clone().map(Num)).collect(),
                        },
                        ValuationDomain::Polytope { rows } => DomainEntry::Polytope {
                            rows: rows
                                .iter()
                                .map(|r| RowEntry {
                                    coeffs: nums(&r.coeffs),
                                    rhs: Num(r.rhs.clone()),
                                })
                                .collect(),
                        },
                    },
                })
                .collect(),
        }
    }

    pub fn into_setting(self) -> Result<Setting, ModelError> {
        Setting::new(
            self.actions
                .into_iter()
                .map(|a| Action::new(a.name, a.cost.0))
                .collect(),
            self.outcomes,
            self.distribution.into_iter().map(rats).collect(),
            self.principals
                .into_iter()
                .map(|p| {
                    let domain = match p.domain {
                        DomainEntry::Box { lower, upper } => ValuationDomain::Box {
                            lower: rats(lower),
                            upper: upper.into_iter().map(|u| u.map(|n| n.0)).collect(),
                        },
                        DomainEntry::Polytope { rows } => ValuationDomain::Polytope {
                            rows: rows
                                .into_iter()
                                .map(|r| LinearRow {
                                    coeffs: rats(r.coeffs),
                                    rhs: r.rhs.0,
                                })
                                .collect(),
                        },
                    };
                    Principal::new(p.name, domain)
                })
                .collect(),
        )
    }
}

impl BidFile {
    pub fn from_profile(b: &BidProfile) -> Self {
        Self {
            bids: b.0.iter().map(|v| nums(v)).collect(),
        }
    }

    pub fn into_profile(self) -> BidProfile {
        BidProfile::from_rows(self.bids.into_iter().map(rats).collect())
    }
}

impl GraphFile {
    pub fn from_graph(g: &CorrelationGraph) -> Self {
        Self {
            weights: g.weights().iter().map(|r| nums(r)).collect(),
        }
    }

    pub fn into_graph(self) -> Result<CorrelationGraph, GraphError> {
        CorrelationGraph::new(self.weights.into_iter().map(rats).collect())
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_setting(text: &str) -> Result<Setting, IoError> {
    let file: SettingFile = serde_json::from_str(text)?;
    Ok(file.into_setting()?)
}

pub fn setting_to_json(s: &Setting) -> String {
    serde_json::to_string_pretty(&SettingFile::from_setting(s)).expect("settings serialize")
}

pub fn load_setting(path: &Path) -> Result<Setting, IoError> {
    parse_setting(&read(path)?)
}

pub fn save_setting(path: &Path, s: &Setting) -> Result<(), IoError> {
    write_json(path, &SettingFile::from_setting(s))
}

/// Loads a bid file and checks it against `setting`'s domains.
pub fn load_bids(path: &Path, setting: &Setting) -> Result<BidProfile, IoError> {
    let file: BidFile = serde_json::from_str(&read(path)?)?;
    let profile = file.into_profile();
    setting.validate_profile(&profile)?;
    Ok(profile)
}

pub fn save_bids(path: &Path, b: &BidProfile) -> Result<(), IoError> {
    write_json(path, &BidFile::from_profile(b))
}

pub fn load_graph(path: &Path) -> Result<CorrelationGraph, IoError> {
    let file: GraphFile = serde_json::from_str(&read(path)?)?;
    Ok(file.into_graph()?)
}

pub fn save_graph(path: &Path, g: &CorrelationGraph) -> Result<(), IoError> {
    write_json(path, &GraphFile::from_graph(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{pos_example, weighted_example};
    use crate::rational::ratio;

    #[test]
    fn decimal_literals_become_exact() {
        let text = r#"{
            "actions": [{"name": "a1", "cost": 0}, {"name": "a2", "cost": "1/3"}],
            "outcomes": ["o1", "o2"],
            "distribution": [[0.25, 0.75], ["1/2", "1/2"]],
            "principals": [{"name": "p", "domain": {"type": "box", "lower": [0, 0], "upper": [1.5, null]}}]
        }"#;
        let s = parse_setting(text).unwrap();
        assert_eq!(s.row(0)[0], ratio(1, 4));
        assert_eq!(s.cost(1), &ratio(1, 3));
    }

    #[test]
    fn bad_row_reports_its_index() {
        let text = r#"{
            "actions": [{"name": "a1", "cost": 0}, {"name": "a2", "cost": 1}],
            "outcomes": ["o1", "o2"],
            "distribution": [[0.5, 0.5], [0.5, 0.6]],
            "principals": [{"name": "p", "domain": {"type": "box", "lower": [0, 0], "upper": [null, null]}}]
        }"#;
        match parse_setting(text) {
            Err(IoError::Model(ModelError::RowSum { row, .. })) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn settings_round_trip() {
        for s in [pos_example(3, &ratio(1, 4), &ratio(1, 12)).unwrap(), weighted_example()] {
            assert_eq!(parse_setting(&setting_to_json(&s)).unwrap(), s);
        }
    }
}
