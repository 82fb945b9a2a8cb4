use std::collections::HashSet;

use num::{Signed, Zero};

use super::realization::{ItemSet, PartialRealization, Realization, State};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// One sample row: a realization and its positive integer weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleRow {
    pub realization: Realization,
    pub weight: u64,
}

/// Distinct realizations with positive integer weights; defines the sample
/// distribution `Pr[a] = w(a) / W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedSample {
    n: usize,
    rows: Vec<SampleRow>,
    total: u64,
}

impl WeightedSample {
    pub fn new(n: usize, rows: Vec<(Realization, u64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut total = 0u64;
        let mut out = Vec::with_capacity(rows.len());
        for (idx, (realization, weight)) in rows.into_iter().enumerate() {
            if realization.len() != n {
                return Err(Error::InvalidSample(format!(
                    "row {idx} has {} entries, expected {n}",
                    realization.len()
                )));
            }
            if weight == 0 {
                return Err(Error::InvalidSample(format!("row {idx} has zero weight")));
            }
            if !seen.insert(realization.clone()) {
                return Err(Error::InvalidSample(format!(
                    "row {idx} duplicates an earlier row"
                )));
            }
            total = total
                .checked_add(weight)
                .ok_or_else(|| Error::InvalidSample("total weight overflows".into()))?;
            out.push(SampleRow {
                realization,
                weight,
            });
        }
        Ok(Self {
            n,
            rows: out,
            total,
        })
    }

    /// Unit weights.
    pub fn uniform(n: usize, rows: Vec<Realization>) -> Result<Self> {
        Self::new(n, rows.into_iter().map(|r| (r, 1)).collect())
    }

    pub fn num_items(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[SampleRow] {
        &self.rows
    }

    /// `m`
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `W`
    pub fn total_weight(&self) -> u64 {
        self.total
    }

    pub fn check_states(&self, num_states: usize) -> Result<()> {
        for (idx, row) in self.rows.iter().enumerate() {
            if let Some(s) = row
                .realization
                .0
                .iter()
                .find(|&&s| s as usize >= num_states)
            {
                return Err(Error::InvalidSample(format!(
                    "row {idx} uses state {s} outside an alphabet of {num_states}"
                )));
            }
        }
        Ok(())
    }

    /// Rows extending `b` and their total weight `w(b)`.
    pub fn consistent_rows(&self, b: &PartialRealization) -> Result<(Vec<&SampleRow>, u64)> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let rows: Vec<&SampleRow> = self
            .rows
            .iter()
            .filter(|r| r.realization.extends(b))
            .collect();
        let w = rows.iter().map(|r| r.weight).sum();
        Ok((rows, w))
    }

    pub(crate) fn consistent<'a>(
        &'a self,
        b: &'a PartialRealization,
    ) -> impl Iterator<Item = &'a SampleRow> + 'a {
        self.rows.iter().filter(move |r| r.realization.extends(b))
    }

    /// `w(b)`
    pub fn weight_of(&self, b: &PartialRealization) -> u64 {
        self.consistent(b).map(|r| r.weight).sum()
    }

    /// Number of rows extending `b`.
    pub fn count_of(&self, b: &PartialRealization) -> usize {
        self.consistent(b).count()
    }

    /// `w(b_{i <- γ})` for every state `γ`, computed in one pass.
    pub fn weight_by_state(&self, b: &PartialRealization, i: usize, k: usize) -> Vec<u64> {
        let mut out = vec![0u64; k];
        for r in self.consistent(b) {
            out[r.realization.state(i) as usize] += r.weight;
        }
        out
    }

    /// Same sample with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Result<Self> {
        Self::new(
            self.n,
            self.rows
                .iter()
                .map(|r| (r.realization.clone(), r.weight * factor))
                .collect(),
        )
    }

    /// Rows consistent with `b`, restricted to the items of `keep`.
    pub fn induced(&self, b: &PartialRealization, keep: ItemSet) -> Result<Self> {
        Self::new(
            keep.len(),
            self.consistent(b)
                .map(|r| (r.realization.restrict(keep), r.weight))
                .collect(),
        )
    }

    pub fn contains(&self, a: &Realization) -> bool {
        self.rows.iter().any(|r| &r.realization == a)
    }

    pub fn state_column(&self, i: usize) -> impl Iterator<Item = State> + '_ {
        self.rows.iter().map(move |r| r.realization.state(i))
    }
}

/// Strictly positive exact item costs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostVector(Vec<Rational>);

impl CostVector {
    pub fn new(costs: Vec<Rational>) -> Result<Self> {
        for (i, c) in costs.iter().enumerate() {
            if !c.is_positive() {
                return Err(Error::InvalidCost(format!(
                    "cost of item {i} is not positive"
                )));
            }
        }
        Ok(Self(costs))
    }

    pub fn from_integers(costs: &[i64]) -> Result<Self> {
        Self::new(costs.iter().map(|&c| crate::rational::int(c)).collect())
    }

    pub fn unit(n: usize) -> Self {
        Self(vec![crate::rational::int(1); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn total(&self, items: ItemSet) -> Rational {
        items
            .iter()
            .fold(Rational::zero(), |acc, i| acc + &self.0[i])
    }

    pub fn restrict(&self, keep: ItemSet) -> CostVector {
        CostVector(keep.iter().map(|i| self.0[i].clone()).collect())
    }
}
