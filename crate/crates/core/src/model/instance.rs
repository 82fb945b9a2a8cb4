use std::sync::Arc;

use super::realization::{PartialRealization, StateAlphabet};
use super::sample::{CostVector, WeightedSample};
use super::tree::{self, DecisionTree};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::utility::{check_goal, CheckOutcome, InducedUtility, UtilityRef};

/// `Γ^n` sizes up to this bound are fully enumerated when checking the goal.
const GOAL_CHECK_LIMIT: usize = 1 << 16;

/// `(g, Q, S, w, c)` together with the state alphabet.
#[derive(Clone)]
pub struct ScenarioInstance {
    utility: UtilityRef,
    sample: Arc<WeightedSample>,
    costs: CostVector,
    alphabet: StateAlphabet,
}

impl std::fmt::Debug for ScenarioInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScenarioInstance")
            .field("utility", &self.utility.describe())
            .field("sample", &self.sample)
            .field("costs", &self.costs)
            .finish()
    }
}

impl ScenarioInstance {
    pub fn new(
        utility: UtilityRef,
        sample: Arc<WeightedSample>,
        costs: CostVector,
        alphabet: StateAlphabet,
    ) -> Result<Self> {
        let n = utility.num_items();
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
        if alphabet.len() != utility.num_states() {
            return Err(Error::InvalidAlphabet(format!(
                "alphabet has {} states but the utility expects {}",
                alphabet.len(),
                utility.num_states()
            )));
        }
        if utility.goal() == 0 {
            return Err(Error::InvalidUtility("goal value must be positive".into()));
        }
        sample.check_states(alphabet.len())?;
        if let (CheckOutcome::Violated(w), _) =
            check_goal(&*utility, Some(&sample), GOAL_CHECK_LIMIT)
        {
            return Err(Error::InvalidUtility(format!(
                "utility is {} instead of the goal {} on realization ({})",
                w.value,
                utility.goal(),
                w.realization
                    .iter()
                    .map(|&s| alphabet.name(s))
                    .collect::<Vec<_>>()
                    .join(",")
            )));
        }
        Ok(Self {
            utility,
            sample,
            costs,
            alphabet,
        })
    }

    pub fn utility(&self) -> &UtilityRef {
        &self.utility
    }

    pub fn goal(&self) -> u64 {
        self.utility.goal()
    }

    pub fn sample(&self) -> &Arc<WeightedSample> {
        &self.sample
    }

    pub fn costs(&self) -> &CostVector {
        &self.costs
    }

    pub fn alphabet(&self) -> &StateAlphabet {
        &self.alphabet
    }

    pub fn num_items(&self) -> usize {
        self.utility.num_items()
    }

    pub fn num_states(&self) -> usize {
        self.alphabet.len()
    }

    /// Same sample and costs with a different utility of the same shape.
    pub fn with_utility(&self, utility: UtilityRef) -> Result<Self> {
        Self::new(
            utility,
            self.sample.clone(),
            self.costs.clone(),
            self.alphabet.clone(),
        )
    }

    pub fn expected_cost(&self, tree: &DecisionTree) -> Result<Rational> {
        tree::expected_cost(tree, &self.sample, &self.costs)
    }

    /// The instance over the free items of `b`, keeping the rows consistent with `b`.
    pub fn induced_instance(&self, b: &PartialRealization) -> Result<Self> {
        if b.len() != self.num_items() {
            return Err(Error::DimensionMismatch {
                expected: self.num_items(),
                found: b.len(),
            });
        }
        let free = b.free_items();
        let utility: UtilityRef = Arc::new(InducedUtility::new(self.utility.clone(), b.clone())?);
        let sample = Arc::new(self.sample.induced(b, free)?);
        Ok(Self {
            utility,
            sample,
            costs: self.costs.restrict(free),
            alphabet: self.alphabet.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Realization;
    use crate::rational::int;
    use crate::utility::k_of_n_utility;

    fn instance() -> ScenarioInstance {
        let sample = WeightedSample::new(
            3,
            vec![
                (Realization(vec![0, 1, 1]), 1),
                (Realization(vec![1, 1, 0]), 2),
                (Realization(vec![1, 0, 0]), 3),
            ],
        )
        .unwrap();
        ScenarioInstance::new(
            k_of_n_utility(3, 2).unwrap(),
            Arc::new(sample),
            CostVector::from_integers(&[1, 2, 3]).unwrap(),
            StateAlphabet::binary(),
        )
        .unwrap()
    }

    #[test]
    fn induced_examples() {
        let inst = instance();
        let same = inst
            .induced_instance(&PartialRealization::empty(3))
            .unwrap();
        assert_eq!(same.num_items(), 3);
        assert_eq!(same.sample().as_ref(), inst.sample().as_ref());

        let b = PartialRealization::from_entries(vec![None, Some(1), None]);
        let ind = inst.induced_instance(&b).unwrap();
        assert_eq!(ind.num_items(), 2);
        assert_eq!(ind.sample().len(), 2);
        assert_eq!(ind.sample().total_weight(), 3);
        assert_eq!(ind.costs().as_slice(), &[int(1), int(3)]);
        // g'(1,*) = g(1,1,*): two ones reached, zeros still 0
        let d = PartialRealization::from_entries(vec![Some(1), None]);
        assert_eq!(
            ind.utility().eval(&d),
            inst.utility().eval(&PartialRealization::from_entries(vec![
                Some(1),
                Some(1),
                None
            ]))
        );

        let full = PartialRealization::from_entries(vec![Some(1), Some(1), Some(0)]);
        let done = inst.induced_instance(&full).unwrap();
        assert_eq!(done.num_items(), 0);
        assert_eq!(
            done.utility().eval(&PartialRealization::empty(0)),
            done.goal()
        );
    }

    #[test]
    fn rejects_mismatches() {
        let inst = instance();
        assert!(ScenarioInstance::new(
            inst.utility().clone(),
            inst.sample().clone(),
            CostVector::unit(2),
            StateAlphabet::binary()
        )
        .is_err());
        assert!(ScenarioInstance::new(
            inst.utility().clone(),
            inst.sample().clone(),
            CostVector::unit(3),
            StateAlphabet::numbered(3).unwrap()
        )
        .is_err());
    }
}
