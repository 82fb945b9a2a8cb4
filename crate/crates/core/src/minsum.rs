//! Discrete min-sum scheduling: timed item sequences, truncation, the cost
//! integral, and the standard greedy schedule.

use itertools::Itertools;
use num::{Signed, Zero};
use serde::Serialize;

use crate::budgeted::SetFunction;
use crate::error::{Error, Result};
use crate::model::{CostVector, ItemSet, PartialRealization, ScenarioInstance, State};
use crate::par::{self, Parallelism};
use crate::rational::Rational;

/// A sequence of `(item, time)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pairs: Vec<(usize, Rational)>,
}

impl Serialize for Schedule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.pairs.len()))?;
        for (i, t) in &self.pairs {
            seq.serialize_element(&(i, t.to_string()))?;
        }
        seq.end()
    }
}

impl Schedule {
    pub fn new(pairs: Vec<(usize, Rational)>) -> Result<Self> {
        if pairs.iter().any(|(_, t)| t.is_negative()) {
            return Err(Error::InvalidArgument(
                "schedule times must be nonnegative".into(),
            ));
        }
        Ok(Self { pairs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Each item once, at its full cost.
    pub fn full_cost(items: &[usize], costs: &CostVector) -> Self {
        Self {
            pairs: items.iter().map(|&i| (i, costs.get(i).clone())).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, Rational)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn items(&self) -> Vec<usize> {
        self.pairs.iter().map(|(i, _)| *i).collect()
    }

    /// `ℓ(S)`
    pub fn length(&self) -> Rational {
        self.pairs
            .iter()
            .fold(Rational::zero(), |acc, (_, t)| acc + t)
    }

    /// The first `j` pairs.
    pub fn prefix(&self, j: usize) -> Schedule {
        Schedule {
            pairs: self.pairs[..j.min(self.pairs.len())].to_vec(),
        }
    }

    /// `self ⊕ other`
    pub fn concat(&self, other: &Schedule) -> Schedule {
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        Schedule { pairs }
    }
}

/// `S⟨t⟩`: the first `k` pairs with `k = max{j : τ_1 + … + τ_j < t}`, followed
/// by the next item run for the remaining time. Returns `S` when `t > ℓ(S)`.
pub fn truncate(s: &Schedule, t: &Rational) -> Result<Schedule> {
    if t.is_negative() {
        return Err(Error::InvalidArgument(
            "truncation time must be nonnegative".into(),
        ));
    }
    if t > &s.length() || s.is_empty() {
        return Ok(s.clone());
    }
    let mut prefix = Rational::zero();
    let mut k = 0;
    // prefix sums are nondecreasing, so the qualifying j form an initial run
    for (j, (_, tau)) in s.pairs.iter().enumerate() {
        let next = &prefix + tau;
        if &next < t {
            prefix = next;
            k = j + 1;
        } else {
            break;
        }
    }
    let mut pairs = s.pairs[..k].to_vec();
    if let Some((item, _)) = s.pairs.get(k) {
        pairs.push((*item, t - &prefix));
    }
    Ok(Schedule { pairs })
}

/// `f^c(S) = f(base ∪ {i | (i, c_i) ∈ S}) / scale`.
///
/// `scale` defaults to `f(N)`; `base` is empty unless the function was
/// conditioned on a prefix schedule.
pub struct JobFunction<'a> {
    f: &'a dyn SetFunction,
    costs: &'a CostVector,
    scale: Rational,
    base: ItemSet,
}

impl<'a> JobFunction<'a> {
    pub fn new(f: &'a dyn SetFunction, costs: &'a CostVector) -> Result<Self> {
        let scale = f.eval(f.ground());
        if !scale.is_positive() {
            return Err(Error::InvalidArgument("f(N) must be positive".into()));
        }
        Ok(Self {
            f,
            costs,
            scale,
            base: ItemSet::EMPTY,
        })
    }

    pub fn with_scale(
        f: &'a dyn SetFunction,
        costs: &'a CostVector,
        scale: Rational,
    ) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::InvalidArgument("scale must be positive".into()));
        }
        Ok(Self {
            f,
            costs,
            scale,
            base: ItemSet::EMPTY,
        })
    }

    /// `f_{G}`: credit for the pairs of `prefix` is granted up front.
    pub fn conditioned(&self, prefix: &Schedule) -> Self {
        Self {
            f: self.f,
            costs: self.costs,
            scale: self.scale.clone(),
            base: self.base.union(self.credited(prefix)),
        }
    }

    pub fn scale(&self) -> &Rational {
        &self.scale
    }

    /// Items run for exactly their cost.
    pub fn credited(&self, s: &Schedule) -> ItemSet {
        s.pairs
            .iter()
            .filter(|(i, t)| t == self.costs.get(*i))
            .map(|(i, _)| *i)
            .collect()
    }

    pub fn value(&self, s: &Schedule) -> Rational {
        self.f.eval(self.base.union(self.credited(s))) / &self.scale
    }
}

/// `∫_0^{ℓ(S)} 1 − f^c(S⟨t⟩) dt`, summed exactly over the pieces between
/// consecutive completion times.
pub fn schedule_cost(job: &JobFunction<'_>, s: &Schedule) -> Rational {
    let one = Rational::from_integer(1.into());
    let mut credited = job.base;
    let mut total = Rational::zero();
    for (i, tau) in &s.pairs {
        let level = job.f.eval(credited) / &job.scale;
        total += tau * (&one - level);
        if tau == job.costs.get(*i) {
            credited = credited.with(*i);
        }
    }
    total
}

/// Appends the best gain-per-cost unscheduled item at full cost until `f(N)` is reached.
pub fn standard_greedy(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
) -> Result<Schedule> {
    let full = f.eval(ground);
    if !full.is_positive() {
        return Err(Error::InvalidArgument("f(N) must be positive".into()));
    }
    let mut chosen = ItemSet::EMPTY;
    let mut value = f.eval(chosen);
    let mut pairs = Vec::new();
    while value < full {
        let mut best: Option<(usize, Rational)> = None;
        for i in ground.iter().filter(|&i| !chosen.contains(i)) {
            let r = (f.eval(chosen.with(i)) - &value) / costs.get(i);
            if best.as_ref().is_none_or(|(_, b)| &r > b) {
                best = Some((i, r));
            }
        }
        let Some((i, r)) = best else { break };
        if !r.is_positive() {
            return Err(Error::InvalidArgument(
                "no item makes progress; f is not submodular".into(),
            ));
        }
        chosen = chosen.with(i);
        value = f.eval(chosen);
        pairs.push((i, costs.get(i).clone()));
    }
    Ok(Schedule { pairs })
}

/// Every ordering of `ground` at full cost.
pub fn all_cover_schedules(ground: ItemSet, costs: &CostVector) -> Vec<Schedule> {
    let items: Vec<usize> = ground.iter().collect();
    let len = items.len();
    items
        .into_iter()
        .permutations(len)
        .map(|p| Schedule::full_cost(&p, costs))
        .collect()
}

pub const MAX_PERMUTATION_ITEMS: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct GreedyFactorReport {
    pub greedy: Schedule,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub greedy_cost: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub best_cost: Rational,
    pub schedules_checked: usize,
    pub holds: bool,
}

fn min_cost_over(
    schedules: &[Schedule],
    par: Parallelism,
    cost: impl Fn(&Schedule) -> Rational + Sync + Send,
) -> Rational {
    par::map_slice(par, schedules, cost)
        .into_iter()
        .min()
        .expect("at least one schedule")
}

/// `cost(f^c, G) ≤ 4 · cost(f^c, S)` for every ordering `S` of the ground set.
/// Costs are normalized by `f(ground)`.
pub fn check_greedy_factor(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
    par: Parallelism,
) -> Result<GreedyFactorReport> {
    if ground.len() > MAX_PERMUTATION_ITEMS {
        return Err(Error::EnumerationTooLarge {
            size: ground.len() as u128,
            limit: MAX_PERMUTATION_ITEMS as u128,
        });
    }
    let job = JobFunction::with_scale(f, costs, f.eval(ground))?;
    let greedy = standard_greedy(ground, f, costs)?;
    let greedy_cost = schedule_cost(&job, &greedy);
    let schedules = all_cover_schedules(ground, costs);
    let best_cost = min_cost_over(&schedules, par, |s| schedule_cost(&job, s));
    let holds = greedy_cost <= Rational::from_integer(4.into()) * &best_cost;
    Ok(GreedyFactorReport {
        greedy,
        greedy_cost,
        best_cost,
        schedules_checked: schedules.len(),
        holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncatedBoundsReport {
    /// `d = max{j : ℓ(G_j) < B}` with `G_j` the first `j − 1` greedy pairs.
    pub d: usize,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub cost_g_d: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub cost_g_d1: Rational,
    /// `min_S cost(f, S⟨B⟩)` over every ordering `S`.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub best_truncated: Rational,
    pub schedules_checked: usize,
    pub holds_4: bool,
    pub holds_8: bool,
}

/// `cost(f, G_d) ≤ 4 · cost(f, S⟨B⟩)` and `cost(f, G_{d+1}) ≤ 8 · cost(f, S⟨B⟩)`
/// for every ordering `S` of the ground set, normalized by `f(ground)`.
pub fn check_truncated_bounds(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
    budget: &Rational,
    par: Parallelism,
) -> Result<TruncatedBoundsReport> {
    if ground.len() > MAX_PERMUTATION_ITEMS {
        return Err(Error::EnumerationTooLarge {
            size: ground.len() as u128,
            limit: MAX_PERMUTATION_ITEMS as u128,
        });
    }
    if !budget.is_positive() {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let job = JobFunction::with_scale(f, costs, f.eval(ground))?;
    let greedy = standard_greedy(ground, f, costs)?;
    if greedy.length() < *budget {
        return Err(Error::InvalidArgument(
            "greedy schedule is shorter than the budget".into(),
        ));
    }
    // ℓ(G_j) = length of the first j − 1 pairs; G_1 is empty.
    let mut d = 1;
    let mut len = Rational::zero();
    for (_, tau) in greedy.pairs() {
        len += tau;
        if &len < budget {
            d += 1;
        } else {
            break;
        }
    }
    let g_d = greedy.prefix(d - 1);
    let g_d1 = greedy.prefix(d);
    let cost_g_d = schedule_cost(&job, &g_d);
    let cost_g_d1 = schedule_cost(&job, &g_d1);
    let schedules = all_cover_schedules(ground, costs);
    let best_truncated = min_cost_over(&schedules, par, |s| {
        schedule_cost(&job, &truncate(s, budget).expect("budget is positive"))
    });
    Ok(TruncatedBoundsReport {
        d,
        holds_4: cost_g_d <= Rational::from_integer(4.into()) * &best_truncated,
        holds_8: cost_g_d1 <= Rational::from_integer(8.into()) * &best_truncated,
        cost_g_d,
        cost_g_d1,
        best_truncated,
        schedules_checked: schedules.len(),
    })
}

/// `h_p(R) = 1 − Pr[a agrees with σ on R | a ⪰ b]` over the free items of `b`.
pub struct HpFunction {
    ground: ItemSet,
    rows: Vec<(Vec<State>, u64)>,
    sigma: Vec<Option<State>>,
    total: u64,
}

impl SetFunction for HpFunction {
    fn ground(&self) -> ItemSet {
        self.ground
    }
    fn eval(&self, set: ItemSet) -> Rational {
        let agree: u64 = self
            .rows
            .iter()
            .filter(|(a, _)| set.iter().all(|i| Some(a[i]) == self.sigma[i]))
            .map(|(_, w)| w)
            .sum();
        Rational::new(
            ((self.total - agree) as i64).into(),
            (self.total as i64).into(),
        )
    }
}

/// `σ` holds a state for every free item of `b`.
pub fn h_p_function(
    instance: &ScenarioInstance,
    b: &PartialRealization,
    sigma: &[Option<State>],
) -> Result<HpFunction> {
    let (rows, total) = instance.sample().consistent_rows(b)?;
    if total == 0 {
        return Err(Error::InvalidArgument(
            "conditional distribution is undefined when w(b) = 0".into(),
        ));
    }
    let ground = b.free_items();
    if sigma.len() != b.len() || ground.iter().any(|i| sigma[i].is_none()) {
        return Err(Error::InvalidArgument(
            "σ must assign every free item".into(),
        ));
    }
    Ok(HpFunction {
        ground,
        rows: rows
            .iter()
            .map(|r| (r.realization.0.clone(), r.weight))
            .collect(),
        sigma: sigma.to_vec(),
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budgeted::AdditiveSetFunction;
    use crate::rational::{int, ratio};

    fn sched(p: &[(usize, i64)]) -> Schedule {
        Schedule::new(p.iter().map(|&(i, t)| (i, int(t))).collect()).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let s = sched(&[(1, 2), (2, 3)]);
        assert_eq!(truncate(&s, &int(4)).unwrap(), sched(&[(1, 2), (2, 2)]));
        assert_eq!(truncate(&s, &int(5)).unwrap(), s);
        assert_eq!(truncate(&s, &int(9)).unwrap(), s);
        assert_eq!(truncate(&s, &int(0)).unwrap(), sched(&[(1, 0)]));
        assert_eq!(truncate(&s, &int(2)).unwrap(), sched(&[(1, 2)]));
        assert!(truncate(&s, &int(-1)).is_err());
    }

    #[test]
    fn cost_examples() {
        let costs = CostVector::from_integers(&[2]).unwrap();
        let f = AdditiveSetFunction::new(vec![int(1)]);
        let job = JobFunction::new(&f, &costs).unwrap();
        assert_eq!(schedule_cost(&job, &sched(&[(0, 2)])), int(2));

        let halves = AdditiveSetFunction::new(vec![int(1), int(1)]);
        let unit = CostVector::unit(2);
        let job = JobFunction::new(&halves, &unit).unwrap();
        assert_eq!(schedule_cost(&job, &sched(&[(0, 1), (1, 1)])), ratio(3, 2));
        // a partial run earns nothing
        assert_eq!(
            schedule_cost(
                &job,
                &Schedule::new(vec![(0, ratio(1, 2)), (1, int(1))]).unwrap()
            ),
            ratio(3, 2)
        );

        let done = CoverageDone;
        let job = JobFunction::new(&done, &unit).unwrap();
        assert_eq!(schedule_cost(&job, &sched(&[(0, 1), (1, 1)])), int(0));
    }

    struct CoverageDone;
    impl SetFunction for CoverageDone {
        fn ground(&self) -> ItemSet {
            ItemSet::full(2)
        }
        fn eval(&self, _: ItemSet) -> Rational {
            int(1)
        }
    }

    #[test]
    fn greedy_examples() {
        let f = AdditiveSetFunction::new(vec![int(4), int(1)]);
        let g = standard_greedy(ItemSet::full(2), &f, &CostVector::unit(2)).unwrap();
        assert_eq!(g.items(), vec![0, 1]);
        let f = AdditiveSetFunction::new(vec![int(1), int(4)]);
        assert_eq!(
            standard_greedy(ItemSet::full(2), &f, &CostVector::unit(2))
                .unwrap()
                .items(),
            vec![1, 0]
        );
        let zero = AdditiveSetFunction::new(vec![int(0)]);
        assert!(standard_greedy(ItemSet::full(1), &zero, &CostVector::unit(1)).is_err());
        let r = check_greedy_factor(
            ItemSet::full(2),
            &f,
            &CostVector::unit(2),
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(r.holds);
        assert_eq!(r.schedules_checked, 2);
    }

    #[test]
    fn truncated_bounds_on_single_item() {
        let f = AdditiveSetFunction::new(vec![int(3)]);
        let costs = CostVector::from_integers(&[2]).unwrap();
        for b in [int(1), int(2)] {
            let r =
                check_truncated_bounds(ItemSet::full(1), &f, &costs, &b, Parallelism::Sequential)
                    .unwrap();
            assert_eq!(r.d, 1);
            assert!(r.holds_4 && r.holds_8);
        }
        assert!(check_truncated_bounds(
            ItemSet::full(1),
            &f,
            &costs,
            &int(3),
            Parallelism::Sequential
        )
        .is_err());
    }

    #[test]
    fn additivity_identity() {
        let f = AdditiveSetFunction::new(vec![int(3), int(1), int(2)]);
        let costs = CostVector::from_integers(&[1, 2, 3]).unwrap();
        let job = JobFunction::new(&f, &costs).unwrap();
        let g = sched(&[(0, 1)]);
        let s = sched(&[(2, 3), (1, 2)]);
        let lhs = schedule_cost(&job, &g) + schedule_cost(&job.conditioned(&g), &s);
        assert_eq!(lhs, schedule_cost(&job, &g.concat(&s)));
    }

    // One item of cost 2 and B = 1/8: d = 1, G_2 = <(0, 2)> costs 2, while the
    // only schedule truncated at B runs item 0 for 1/8 and costs 1/8.
    #[test]
    fn factor_eight_fails_below_first_greedy_cost() {
        let f = AdditiveSetFunction::new(vec![int(1)]);
        let costs = CostVector::from_integers(&[2]).unwrap();
        let r = check_truncated_bounds(
            ItemSet::full(1),
            &f,
            &costs,
            &ratio(1, 8),
            Parallelism::Sequential,
        )
        .unwrap();
        assert_eq!(
            (
                r.d,
                r.cost_g_d.clone(),
                r.cost_g_d1.clone(),
                r.best_truncated.clone()
            ),
            (1, int(0), int(2), ratio(1, 8))
        );
        assert!(r.holds_4 && !r.holds_8);
        let r = check_truncated_bounds(
            ItemSet::full(1),
            &f,
            &costs,
            &int(2),
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(r.holds_4 && r.holds_8);
    }
}
