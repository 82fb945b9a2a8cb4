//! JSON instance files.
//!
//! Items are numbered from 1 in files and from 0 everywhere else. Costs are
//! decimal strings so they parse to exact rationals.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    CostVector, PartialRealization, Realization, ScenarioInstance, State, StateAlphabet,
    WeightedSample,
};
use crate::rational::parse_decimal;
use crate::utility::{
    make_gs, make_gw, or_combine, CoverageUtility, KOfN, TableUtility, UtilityRef,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub n: usize,
    pub states: Vec<String>,
    pub sample: Vec<SampleEntry>,
    pub costs: Vec<String>,
    pub utility: UtilitySpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleEntry {
    pub assignment: Vec<String>,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverEntry {
    /// 1-based.
    pub item: usize,
    pub state: String,
    pub elements: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    /// State names, or `"*"` for unknown.
    pub assignment: Vec<String>,
    pub value: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum UtilitySpec {
    /// Needs exactly two states; the second declared state plays the role of 1.
    #[serde(rename = "k_of_n")]
    KOfN { k: usize },
    #[serde(rename = "coverage")]
    Coverage {
        universe_size: usize,
        covers: Vec<CoverEntry>,
    },
    #[serde(rename = "or")]
    Or {
        left: Box<UtilitySpec>,
        right: Box<UtilitySpec>,
    },
    #[serde(rename = "g_S")]
    GS { inner: Box<UtilitySpec> },
    #[serde(rename = "g_W")]
    GW { inner: Box<UtilitySpec> },
    /// Explicit values; partial realizations not listed take `default`.
    #[serde(rename = "table")]
    Table {
        goal: u64,
        default: u64,
        entries: Vec<TableEntry>,
    },
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported version {}",
                file.version
            )));
        }
        Ok(file)
    }

    pub fn emit(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }

    pub fn alphabet(&self) -> Result<StateAlphabet> {
        StateAlphabet::new(self.states.iter().cloned())
    }

    fn state(
        &self,
        alphabet: &StateAlphabet,
        name: &str,
        context: impl Fn() -> String,
    ) -> Result<State> {
        alphabet
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("{}: unknown state {name:?}", context())))
    }

    pub fn build(&self) -> Result<ScenarioInstance> {
        let alphabet = self.alphabet()?;
        let mut rows = Vec::with_capacity(self.sample.len());
        for (idx, entry) in self.sample.iter().enumerate() {
            let row = || format!("sample row {}", idx + 1);
            if entry.assignment.len() != self.n {
                return Err(Error::Parse(format!(
                    "{}: {} states given, expected {}",
                    row(),
                    entry.assignment.len(),
                    self.n
                )));
            }
            let states = entry
                .assignment
                .iter()
                .map(|s| self.state(&alphabet, s, row))
                .collect::<Result<Vec<_>>>()?;
            rows.push((Realization(states), entry.weight));
        }
        if rows.is_empty() {
            return Err(Error::EmptySample);
        }
        let sample = Arc::new(WeightedSample::new(self.n, rows)?);
        if self.costs.len() != self.n {
            return Err(Error::Parse(format!(
                "{} costs given, expected {}",
                self.costs.len(),
                self.n
            )));
        }
        let costs = self
            .costs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                parse_decimal(c).map_err(|_| {
                    Error::Parse(format!("cost of item {}: {c:?} is not a decimal", i + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let costs = CostVector::new(costs)?;
        let utility = self.build_utility(&self.utility, &alphabet, &sample)?;
        ScenarioInstance::new(utility, sample, costs, alphabet)
    }

    fn build_utility(
        &self,
        spec: &UtilitySpec,
        alphabet: &StateAlphabet,
        sample: &Arc<WeightedSample>,
    ) -> Result<UtilityRef> {
        let k = alphabet.len();
        Ok(match spec {
            UtilitySpec::KOfN { k: threshold } => {
                if k != 2 {
                    return Err(Error::Parse("k_of_n needs exactly two states".into()));
                }
                Arc::new(KOfN::new(self.n, *threshold)?)
            }
            UtilitySpec::Coverage {
                universe_size,
                covers,
            } => {
                let mut table = vec![vec![Vec::new(); k]; self.n];
                for (idx, c) in covers.iter().enumerate() {
                    let ctx = || format!("cover entry {}", idx + 1);
                    if c.item == 0 || c.item > self.n {
                        return Err(Error::Parse(format!(
                            "{}: item {} is outside 1..={}",
                            ctx(),
                            c.item,
                            self.n
                        )));
                    }
                    let s = self.state(alphabet, &c.state, ctx)?;
                    table[c.item - 1][s as usize].extend(c.elements.iter().copied());
                }
                Arc::new(CoverageUtility::new(*universe_size, k, table)?)
            }
            UtilitySpec::Or { left, right } => or_combine(
                self.build_utility(left, alphabet, sample)?,
                self.build_utility(right, alphabet, sample)?,
            )?,
            UtilitySpec::GS { inner } => {
                make_gs(self.build_utility(inner, alphabet, sample)?, sample.clone())?
            }
            UtilitySpec::GW { inner } => {
                make_gw(self.build_utility(inner, alphabet, sample)?, sample.clone())?
            }
            UtilitySpec::Table {
                goal,
                default,
                entries,
            } => {
                let mut values = HashMap::new();
                for (idx, e) in entries.iter().enumerate() {
                    let ctx = || format!("table entry {}", idx + 1);
                    if e.assignment.len() != self.n {
                        return Err(Error::Parse(format!(
                            "{}: expected {} states",
                            ctx(),
                            self.n
                        )));
                    }
                    let entries = e
                        .assignment
                        .iter()
                        .map(|s| {
                            if s == "*" {
                                Ok(None)
                            } else {
                                self.state(alphabet, s, ctx).map(Some)
                            }
                        })
                        .collect::<Result<Vec<_>>>()?;
                    values.insert(PartialRealization::from_entries(entries), e.value);
                }
                Arc::new(TableUtility::new(self.n, k, *goal, *default, values)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const KOFN: &str = r#"{
        "version": 1, "n": 3, "states": ["0", "1"],
        "sample": [{"assignment": ["0","1","1"], "weight": 2}, {"assignment": ["1","0","0"], "weight": 1}],
        "costs": ["1", "2.5", "0.25"],
        "utility": {"kind": "k_of_n", "k": 2}
    }"#;

    #[test]
    fn parses_and_builds() {
        let f = InstanceFile::parse(KOFN).unwrap();
        let inst = f.build().unwrap();
        assert_eq!(inst.goal(), 4);
        assert_eq!(inst.costs().get(1), &ratio(5, 2));
        assert_eq!(inst.sample().total_weight(), 3);
        assert_eq!(InstanceFile::parse(&f.emit()).unwrap(), f);
    }

    #[test]
    fn names_the_bad_row() {
        let bad = KOFN.replace(r#"["1","0","0"]"#, r#"["1","x","0"]"#);
        let err = InstanceFile::parse(&bad).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("sample row 2"), "{err}");
        let err = InstanceFile::parse("{\"version\": 1,").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn nested_kinds() {
        let text = r#"{
            "version": 1, "n": 2, "states": ["a", "b"],
            "sample": [{"assignment": ["a","b"], "weight": 1}, {"assignment": ["b","b"], "weight": 3}],
            "costs": ["1", "1"],
            "utility": {"kind": "g_W", "inner": {"kind": "coverage", "universe_size": 2, "covers": [
                {"item": 1, "state": "a", "elements": [0, 1]},
                {"item": 1, "state": "b", "elements": [0]},
                {"item": 2, "state": "a", "elements": [1]},
                {"item": 2, "state": "b", "elements": [1]}
            ]}}
        }"#;
        let inst = InstanceFile::parse(text).unwrap().build().unwrap();
        assert_eq!(inst.goal(), 2 * 4);
    }

    #[test]
    fn empty_sample_rejected() {
        let text = KOFN.replace(
            r#"[{"assignment": ["0","1","1"], "weight": 2}, {"assignment": ["1","0","0"], "weight": 1}]"#,
            "[]",
        );
        assert_eq!(
            InstanceFile::parse(&text).unwrap().build().unwrap_err(),
            Error::EmptySample
        );
    }
}
