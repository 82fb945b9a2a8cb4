//! Adaptive Greedy under the sample distribution and its scenario wrapper.
//!
//! The selection rule is the usual expected-marginal-gain-per-cost rule:
//! `argmax_i E[Δg(b, i, a_i) | a ⪰ b] / c_i`, with the expectation taken
//! exactly over the sample rows extending `b`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CostVector, PartialRealization, ScenarioInstance, WeightedSample};
use crate::rational::Rational;
use crate::strategy::{Policy, Strategy, SuffixPolicy};
use crate::utility::{make_gw, UtilityRef};

pub struct AdaptiveGreedyPolicy {
    g: UtilityRef,
    sample: Arc<WeightedSample>,
    costs: CostVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Choice {
    pub item: usize,
    /// `Σ_{a ⪰ b} w(a) Δg(b, i, a_i)`; dividing by `w(b)` gives the expectation.
    pub weighted_gain: i128,
}

impl AdaptiveGreedyPolicy {
    pub fn new(g: UtilityRef, sample: Arc<WeightedSample>, costs: CostVector) -> Result<Self> {
        let n = g.num_items();
        if sample.num_items() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: sample.num_items(),
            });
        }
        if costs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: costs.len(),
            });
        }
        Ok(Self { g, sample, costs })
    }

    /// The greedy choice at `b`, or `None` once `g(b) = Q`. With no sample row
    /// extending `b` the lowest free item is taken.
    pub fn choose(&self, b: &PartialRealization) -> Result<Option<Choice>> {
        let g_b = self.g.eval(b);
        if g_b >= self.g.goal() {
            return Ok(None);
        }
        let free = b.free_items();
        let rows: Vec<_> = self
            .sample
            .rows()
            .iter()
            .filter(|r| r.realization.extends(b))
            .collect();
        if rows.is_empty() {
            return match free.iter().next() {
                Some(item) => Ok(Some(Choice {
                    item,
                    weighted_gain: 0,
                })),
                None => Err(Error::GoalUnreachable(format!(
                    "goal unmet at the full realization {b}"
                ))),
            };
        }
        let k = self.g.num_states();
        let mut best: Option<(Choice, Rational)> = None;
        for i in free.iter() {
            // gain per state, weighted by how much sample mass lands in that state
            let gains: Vec<i128> = (0..k as u8)
                .map(|s| self.g.eval(&b.with_state(i, s)) as i128 - g_b as i128)
                .collect();
            let weighted: i128 = rows
                .iter()
                .map(|r| gains[r.realization.state(i) as usize] * r.weight as i128)
                .sum();
            let score = Rational::from_integer(weighted.into()) / self.costs.get(i);
            if best.as_ref().is_none_or(|(_, s)| &score > s) {
                best = Some((
                    Choice {
                        item: i,
                        weighted_gain: weighted,
                    },
                    score,
                ));
            }
        }
        match best {
            Some((c, _)) => Ok(Some(c)),
            None => Err(Error::GoalUnreachable(format!(
                "goal unmet at the full realization {b}"
            ))),
        }
    }
}

impl Policy for AdaptiveGreedyPolicy {
    fn num_items(&self) -> usize {
        self.g.num_items()
    }
    fn num_states(&self) -> usize {
        self.g.num_states()
    }
    fn next_item(&self, observed: &PartialRealization) -> Result<Option<usize>> {
        Ok(self.choose(observed)?.map(|c| c.item))
    }
}

pub fn adaptive_greedy(
    g: UtilityRef,
    sample: Arc<WeightedSample>,
    costs: CostVector,
) -> Result<Strategy> {
    Ok(Strategy::Policy(Arc::new(AdaptiveGreedyPolicy::new(
        g, sample, costs,
    )?)))
}

/// Adaptive Greedy on `g_W` (goal `QW`), then the lowest free items until `g = Q`.
pub fn scenario_adaptive_greedy(instance: &ScenarioInstance) -> Result<Strategy> {
    let gw = make_gw(instance.utility().clone(), instance.sample().clone())?;
    let inner = AdaptiveGreedyPolicy::new(gw, instance.sample().clone(), instance.costs().clone())?;
    Ok(Strategy::Policy(Arc::new(SuffixPolicy::new(
        Arc::new(inner),
        instance.utility().clone(),
    )?)))
}
