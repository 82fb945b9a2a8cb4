//! Exhaustive solvers used as ground truth on small instances.

use std::collections::HashMap;

use num::Zero;
use serde::Serialize;

use crate::budgeted::SetFunction;
use crate::error::{Error, Result};
use crate::minsum::{
    all_cover_schedules, schedule_cost, JobFunction, Schedule, MAX_PERMUTATION_ITEMS,
};
use crate::model::{
    CostVector, DecisionTree, ItemSet, Node, PartialRealization, ScenarioInstance, State,
};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleLimits {
    pub max_items: usize,
    pub max_states: usize,
    pub max_rows: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_items: 6,
            max_states: 3,
            max_rows: 8,
        }
    }
}

impl OracleLimits {
    pub fn admits(&self, instance: &ScenarioInstance) -> Result<()> {
        let (n, k, m) = (
            instance.num_items(),
            instance.num_states(),
            instance.sample().len(),
        );
        if n > self.max_items || k > self.max_states || m > self.max_rows {
            return Err(Error::OracleBudgetExceeded(format!(
                "n={n}, |Γ|={k}, |S|={m} exceeds the limits n≤{}, |Γ|≤{}, |S|≤{}",
                self.max_items, self.max_states, self.max_rows
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Entry {
    /// `Σ_{a ⪰ b} w(a) · (cost still to pay below b)`, minimized.
    value: Rational,
    choice: Option<usize>,
}

/// Memoized minimum expected cost below every partial realization.
///
/// Values are weighted by the sample: `value(b) = w(b) · C*(instance induced by b)`.
/// Branches no sample row reaches cost nothing and are completed by querying
/// the remaining items in index order.
pub struct Oracle<'a> {
    instance: &'a ScenarioInstance,
    memo: HashMap<PartialRealization, Entry>,
}

impl<'a> Oracle<'a> {
    pub fn new(instance: &'a ScenarioInstance, limits: OracleLimits) -> Result<Self> {
        limits.admits(instance)?;
        Ok(Self {
            instance,
            memo: HashMap::new(),
        })
    }

    pub fn instance(&self) -> &ScenarioInstance {
        self.instance
    }

    /// `w(b) · C*` of the instance induced by `b`.
    pub fn weighted_value(&mut self, b: &PartialRealization) -> Result<Rational> {
        Ok(self.entry(b)?.value)
    }

    /// Optimal expected cost of the whole instance.
    pub fn optimal_cost(&mut self) -> Result<Rational> {
        let total = self.instance.sample().total_weight();
        if total == 0 {
            return Err(Error::EmptySample);
        }
        let v = self.weighted_value(&PartialRealization::empty(self.instance.num_items()))?;
        Ok(v / Rational::from_integer(total.into()))
    }

    fn entry(&mut self, b: &PartialRealization) -> Result<Entry> {
        if let Some(e) = self.memo.get(b) {
            return Ok(e.clone());
        }
        let g = self.instance.utility();
        let e = if g.eval(b) >= g.goal() {
            Entry {
                value: Rational::zero(),
                choice: None,
            }
        } else {
            let w = self.instance.sample().weight_of(b);
            if w == 0 {
                Entry {
                    value: Rational::zero(),
                    choice: None,
                }
            } else {
                let wr = Rational::from_integer(w.into());
                let mut best: Option<(Rational, usize)> = None;
                for i in b.free_items().iter() {
                    let mut v = &wr * self.instance.costs().get(i);
                    for s in 0..self.instance.num_states() {
                        v += self.entry(&b.with_state(i, s as State))?.value;
                    }
                    if best.as_ref().is_none_or(|(bv, _)| &v < bv) {
                        best = Some((v, i));
                    }
                }
                let (value, i) = best.ok_or_else(|| {
                    Error::GoalUnreachable(format!(
                        "no free item left at {b} but the goal is unmet"
                    ))
                })?;
                Entry {
                    value,
                    choice: Some(i),
                }
            }
        };
        self.memo.insert(b.clone(), e.clone());
        Ok(e)
    }

    /// An optimal tree rooted at `b`.
    pub fn tree_from(&mut self, b: &PartialRealization) -> Result<DecisionTree> {
        let mut t = DecisionTree::builder();
        let root = self.build(b, &mut t)?;
        t.set_root(root);
        Ok(t)
    }

    fn build(&mut self, b: &PartialRealization, t: &mut DecisionTree) -> Result<usize> {
        let g = self.instance.utility().clone();
        if g.eval(b) >= g.goal() {
            return Ok(t.push(Node::Leaf));
        }
        let item = match self.entry(b)?.choice {
            Some(i) => i,
            None => b
                .free_items()
                .iter()
                .next()
                .ok_or_else(|| Error::GoalUnreachable(format!("no free item left at {b}")))?,
        };
        let mut children = Vec::with_capacity(self.instance.num_states());
        for s in 0..self.instance.num_states() {
            children.push(self.build(&b.with_state(item, s as State), t)?);
        }
        Ok(t.push(Node::Internal { item, children }))
    }

    pub fn memo_size(&self) -> usize {
        self.memo.len()
    }
}

/// An optimal tree and its expected cost `C*`.
pub fn optimal_tree(instance: &ScenarioInstance) -> Result<(DecisionTree, Rational)> {
    optimal_tree_with(instance, OracleLimits::default())
}

pub fn optimal_tree_with(
    instance: &ScenarioInstance,
    limits: OracleLimits,
) -> Result<(DecisionTree, Rational)> {
    let mut oracle = Oracle::new(instance, limits)?;
    let cost = oracle.optimal_cost()?;
    let tree = oracle.tree_from(&PartialRealization::empty(instance.num_items()))?;
    Ok((tree, cost))
}

/// Same recursion as [`Oracle`] without memoization; exponential, for cross-checks.
pub fn optimal_cost_plain(instance: &ScenarioInstance, limits: OracleLimits) -> Result<Rational> {
    fn go(inst: &ScenarioInstance, b: &PartialRealization) -> Result<Rational> {
        let g = inst.utility();
        if g.eval(b) >= g.goal() {
            return Ok(Rational::zero());
        }
        let w = inst.sample().weight_of(b);
        if w == 0 {
            return Ok(Rational::zero());
        }
        let mut best: Option<Rational> = None;
        for i in b.free_items().iter() {
            let mut v = Rational::from_integer(w.into()) * inst.costs().get(i);
            for s in 0..inst.num_states() {
                v += go(inst, &b.with_state(i, s as State))?;
            }
            best = Some(match best {
                Some(bv) if bv <= v => bv,
                _ => v,
            });
        }
        best.ok_or_else(|| Error::GoalUnreachable(format!("no free item left at {b}")))
    }
    limits.admits(instance)?;
    let total = instance.sample().total_weight();
    if total == 0 {
        return Err(Error::EmptySample);
    }
    Ok(
        go(instance, &PartialRealization::empty(instance.num_items()))?
            / Rational::from_integer(total.into()),
    )
}

pub const MAX_BUDGETED_ITEMS: usize = 20;

/// `max f(R)` over `R ⊆ N` with `Σ_{i∈R} c_i ≤ B`; the first maximizer in
/// subset order wins ties.
pub fn optimal_budgeted(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
    budget: &Rational,
) -> Result<(ItemSet, Rational)> {
    if ground.len() > MAX_BUDGETED_ITEMS {
        return Err(Error::OracleBudgetExceeded(format!(
            "{} items exceeds the limit of {MAX_BUDGETED_ITEMS}",
            ground.len()
        )));
    }
    let mut best: Option<(ItemSet, Rational)> = None;
    for set in ground.subsets() {
        if &costs.total(set) > budget {
            continue;
        }
        let v = f.eval(set);
        if best.as_ref().is_none_or(|(_, bv)| &v > bv) {
            best = Some((set, v));
        }
    }
    Ok(best.unwrap_or_else(|| (ItemSet::EMPTY, f.eval(ItemSet::EMPTY))))
}

/// Cheapest full-cost ordering of the ground set, cut after the pair that
/// completes coverage (later pairs add no cost).
pub fn optimal_schedule(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
) -> Result<(Schedule, Rational)> {
    if ground.len() > MAX_PERMUTATION_ITEMS {
        return Err(Error::OracleBudgetExceeded(format!(
            "{} items exceeds the limit of {MAX_PERMUTATION_ITEMS}",
            ground.len()
        )));
    }
    let full = f.eval(ground);
    if f.eval(ItemSet::EMPTY) >= full {
        return Ok((Schedule::empty(), Rational::zero()));
    }
    let job = JobFunction::new(f, costs)?;
    let mut best: Option<(Schedule, Rational)> = None;
    for s in all_cover_schedules(ground, costs) {
        let c = schedule_cost(&job, &s);
        if best.as_ref().is_none_or(|(_, bc)| &c < bc) {
            best = Some((s, c));
        }
    }
    let (s, c) = best.expect("nonempty ground set");
    let mut covered = ItemSet::EMPTY;
    let mut cut = s.len();
    for (j, (i, _)) in s.pairs().iter().enumerate() {
        covered = covered.with(*i);
        if f.eval(covered) >= full {
            cut = j + 1;
            break;
        }
    }
    Ok((s.prefix(cut), c))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::budgeted::AdditiveSetFunction;
    use crate::model::{Realization, StateAlphabet, WeightedSample};
    use crate::rational::int;
    use crate::utility::{k_of_n_utility, FnUtility};

    #[test]
    fn needs_every_item() {
        // g = number of set items; every realization needs all three queries
        let g = Arc::new(FnUtility::new(3, 2, 3, |b| b.num_set() as u64));
        let sample = WeightedSample::uniform(
            3,
            vec![Realization(vec![0, 1, 0]), Realization(vec![1, 1, 1])],
        )
        .unwrap();
        let inst = ScenarioInstance::new(
            g,
            Arc::new(sample),
            CostVector::unit(3),
            StateAlphabet::binary(),
        )
        .unwrap();
        let (tree, c) = optimal_tree(&inst).unwrap();
        assert_eq!(c, int(3));
        assert_eq!(inst.expected_cost(&tree).unwrap(), int(3));
    }

    #[test]
    fn goal_at_root_costs_nothing() {
        let g = Arc::new(FnUtility::new(2, 2, 1, |_| 1));
        let sample = WeightedSample::uniform(2, vec![Realization(vec![0, 1])]).unwrap();
        let inst = ScenarioInstance::new(
            g,
            Arc::new(sample),
            CostVector::unit(2),
            StateAlphabet::binary(),
        )
        .unwrap();
        let (tree, c) = optimal_tree(&inst).unwrap();
        assert_eq!(c, int(0));
        assert_eq!(tree.num_nodes(), 1);
    }

    #[test]
    fn cheap_separator() {
        // k-of-n with n=2, k=1: one 1 or two 0s. Item 0 is cheap; on rows (1,0)
        // and (0,0) it settles the first row outright, the second needs item 1.
        let g = k_of_n_utility(2, 1).unwrap();
        let sample =
            WeightedSample::uniform(2, vec![Realization(vec![1, 0]), Realization(vec![0, 0])])
                .unwrap();
        let costs = CostVector::from_integers(&[1, 5]).unwrap();
        let inst =
            ScenarioInstance::new(g, Arc::new(sample), costs, StateAlphabet::binary()).unwrap();
        let (tree, c) = optimal_tree(&inst).unwrap();
        // hand enumeration: start with 0 -> (1 + (1+5))/2 = 7/2; start with 1 -> 5 + 1 = 6
        assert_eq!(c, Rational::new(7.into(), 2.into()));
        assert_eq!(inst.expected_cost(&tree).unwrap(), c);
        assert_eq!(
            optimal_cost_plain(&inst, OracleLimits::default()).unwrap(),
            c
        );
    }

    #[test]
    fn refuses_large_instances() {
        let g = k_of_n_utility(7, 2).unwrap();
        let sample = WeightedSample::uniform(7, vec![Realization(vec![0; 7])]).unwrap();
        let inst = ScenarioInstance::new(
            g,
            Arc::new(sample),
            CostVector::unit(7),
            StateAlphabet::binary(),
        )
        .unwrap();
        assert!(matches!(
            optimal_tree(&inst),
            Err(Error::OracleBudgetExceeded(_))
        ));
    }

    #[test]
    fn budgeted_examples() {
        let f = AdditiveSetFunction::new(vec![int(3), int(2)]);
        let costs = CostVector::from_integers(&[2, 2]).unwrap();
        let all = ItemSet::full(2);
        assert_eq!(
            optimal_budgeted(all, &f, &costs, &int(0)).unwrap(),
            (ItemSet::EMPTY, int(0))
        );
        assert_eq!(
            optimal_budgeted(all, &f, &costs, &int(4)).unwrap(),
            (all, int(5))
        );
        assert_eq!(
            optimal_budgeted(all, &f, &costs, &int(3)).unwrap(),
            (ItemSet::single(0), int(3))
        );
    }

    #[test]
    fn schedule_examples() {
        let one = AdditiveSetFunction::new(vec![int(2)]);
        let (s, c) = optimal_schedule(ItemSet::full(1), &one, &CostVector::unit(1)).unwrap();
        assert_eq!(s.items(), vec![0]);
        assert_eq!(c, int(1));
        let f = AdditiveSetFunction::new(vec![int(1), int(3), int(2)]);
        let (s, _) = optimal_schedule(ItemSet::full(3), &f, &CostVector::unit(3)).unwrap();
        assert_eq!(s.items(), vec![1, 2, 0]);
    }
}
