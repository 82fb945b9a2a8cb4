//! Budgeted submodular maximization: Wolsey's greedy and the budget search
//! that sizes each backbone.

use std::collections::BTreeSet;

use num::{BigInt, Integer, One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CostVector, ItemSet};
use crate::par::{self, Parallelism};
use crate::rational::Rational;

/// A set function over a ground set of item indices.
pub trait SetFunction: Sync {
    fn ground(&self) -> ItemSet;
    fn eval(&self, set: ItemSet) -> Rational;
}

/// `f(R) = Σ_{i∈R} v_i`.
#[derive(Clone, Debug)]
pub struct AdditiveSetFunction {
    values: Vec<Rational>,
}

impl AdditiveSetFunction {
    pub fn new(values: Vec<Rational>) -> Self {
        Self { values }
    }
}

impl SetFunction for AdditiveSetFunction {
    fn ground(&self) -> ItemSet {
        ItemSet::full(self.values.len())
    }
    fn eval(&self, set: ItemSet) -> Rational {
        set.iter()
            .fold(Rational::zero(), |acc, i| acc + &self.values[i])
    }
}

/// Weighted coverage: `f(R)` is the weight of elements covered by some set in `R`.
#[derive(Clone, Debug)]
pub struct CoverageSetFunction {
    sets: Vec<Vec<usize>>,
    weights: Vec<u64>,
}

impl CoverageSetFunction {
    pub fn new(sets: Vec<Vec<usize>>, weights: Vec<u64>) -> Result<Self> {
        if let Some(bad) = sets.iter().flatten().find(|&&e| e >= weights.len()) {
            return Err(Error::InvalidArgument(format!(
                "element {bad} has no weight"
            )));
        }
        Ok(Self { sets, weights })
    }
}

impl SetFunction for CoverageSetFunction {
    fn ground(&self) -> ItemSet {
        ItemSet::full(self.sets.len())
    }
    fn eval(&self, set: ItemSet) -> Rational {
        let mut covered = vec![false; self.weights.len()];
        for i in set.iter() {
            for &e in &self.sets[i] {
                covered[e] = true;
            }
        }
        let total: u64 = covered
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| **c)
            .map(|(_, w)| w)
            .sum();
        Rational::from_integer(total.into())
    }
}

/// `χ` with `e^χ = 2 − χ` and `α = 1 − e^{−χ}`.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyConstants {
    pub chi: f64,
    pub alpha: f64,
    /// `|e^χ − (2 − χ)|`
    pub residual: f64,
    /// `alpha` converted exactly; used for every feasibility comparison.
    #[serde(skip)]
    pub alpha_exact: Rational,
}

pub const CHI_TOLERANCE: f64 = 1e-12;

/// Bisection on `[0, 1]` for the root of `e^χ + χ − 2`.
pub fn solve_chi() -> GreedyConstants {
    let phi = |x: f64| x.exp() + x - 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let chi = if phi(lo).abs() <= phi(hi).abs() {
        lo
    } else {
        hi
    };
    let alpha = 1.0 - (-chi).exp();
    GreedyConstants {
        chi,
        alpha,
        residual: phi(chi).abs(),
        alpha_exact: Rational::from_float(alpha).expect("finite"),
    }
}

fn ratio_better(
    gain: &Rational,
    cost: &Rational,
    best: &Option<(usize, Rational)>,
) -> Option<Rational> {
    let r = gain / cost;
    match best {
        Some((_, b)) if &r <= b => None,
        _ => Some(r),
    }
}

/// Wolsey's greedy for `max f(R)` subject to `Σ_{i∈R} c_i ≤ B`.
///
/// Adds the best gain-per-cost item among those with `c_i ≤ B` until the spend
/// exceeds `B` (the last pick may overshoot) or no candidate remains, then
/// returns the better of the last pick alone and the earlier picks.
pub fn wolsey_greedy(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
    budget: &Rational,
) -> ItemSet {
    let mut remaining = ground;
    let mut picked = ItemSet::EMPTY;
    let mut spent = Rational::zero();
    let mut value = f.eval(picked);
    let mut last = None;
    loop {
        let mut best: Option<(usize, Rational)> = None;
        for i in remaining.iter().filter(|&i| costs.get(i) <= budget) {
            let gain = f.eval(picked.with(i)) - &value;
            if let Some(r) = ratio_better(&gain, costs.get(i), &best) {
                best = Some((i, r));
            }
        }
        let Some((i, _)) = best else { break };
        remaining = remaining.without(i);
        picked = picked.with(i);
        spent += costs.get(i);
        value = f.eval(picked);
        last = Some(i);
        if &spent > budget || remaining.is_empty() {
            break;
        }
    }
    match last {
        None => ItemSet::EMPTY,
        Some(ik) => {
            let rest = picked.without(ik);
            if f.eval(ItemSet::single(ik)) >= f.eval(rest) {
                ItemSet::single(ik)
            } else {
                rest
            }
        }
    }
}

/// Budgets the search ranges over.
enum Candidates {
    /// Sorted distinct subset sums.
    Sums(Vec<Rational>),
    /// `j · total / steps` for `j = 0..=steps`.
    Grid { total: Rational, steps: u64 },
}

impl Candidates {
    fn len(&self) -> usize {
        match self {
            Candidates::Sums(v) => v.len(),
            Candidates::Grid { steps, .. } => *steps as usize + 1,
        }
    }

    fn get(&self, idx: usize) -> Rational {
        match self {
            Candidates::Sums(v) => v[idx].clone(),
            Candidates::Grid { total, steps } => {
                total * Rational::new(BigInt::from(idx), BigInt::from(*steps))
            }
        }
    }
}

pub const SUBSET_SUM_ITEMS: usize = 20;
pub const GRID_STEPS: u64 = 1 << 20;
/// Candidate lists up to this length are fully re-checked for monotonicity.
pub const FULL_SCAN_LIMIT: usize = 1024;

fn subset_sums(ground: ItemSet, costs: &CostVector) -> Vec<Rational> {
    let den = ground
        .iter()
        .fold(BigInt::one(), |acc, i| acc.lcm(costs.get(i).denom()));
    let mut sums: BTreeSet<BigInt> = BTreeSet::new();
    sums.insert(BigInt::zero());
    for i in ground.iter() {
        let c = costs.get(i) * Rational::from_integer(den.clone());
        let c = c.to_integer();
        let shifted: Vec<BigInt> = sums.iter().map(|s| s + &c).collect();
        sums.extend(shifted);
    }
    sums.into_iter()
        .map(|s| Rational::new(s, den.clone()))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FoundBudget {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub budget: Rational,
    pub selected: Vec<usize>,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub value: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub target: Rational,
    pub candidates: usize,
    pub probes: usize,
    /// Feasibility was not monotone over the candidates; the smallest
    /// feasible budget was taken by linear scan instead.
    pub linear_scan: bool,
}

pub fn find_budget(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
) -> Result<FoundBudget> {
    find_budget_with(ground, f, costs, &solve_chi(), Parallelism::Sequential)
}

/// Smallest candidate budget at which [`wolsey_greedy`] reaches `α · f(N')`.
pub fn find_budget_with(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
    constants: &GreedyConstants,
    par: Parallelism,
) -> Result<FoundBudget> {
    let full = f.eval(ground);
    if !full.is_positive() {
        return Err(Error::InvalidArgument(
            "budget search needs f(N') > 0".into(),
        ));
    }
    let target = &constants.alpha_exact * &full;
    let candidates = if ground.len() <= SUBSET_SUM_ITEMS {
        Candidates::Sums(subset_sums(ground, costs))
    } else {
        Candidates::Grid {
            total: costs.total(ground),
            steps: GRID_STEPS,
        }
    };
    let run = |idx: usize| {
        let set = wolsey_greedy(ground, f, costs, &candidates.get(idx));
        let value = f.eval(set);
        (set, value)
    };
    let feasible = |idx: usize| run(idx).1 >= target;

    let last = candidates.len() - 1;
    if !feasible(last) {
        return Err(Error::GoalUnreachable(
            "greedy misses the target even with the whole cost budget".into(),
        ));
    }
    let (mut lo, mut hi) = (0usize, last);
    let mut probes = 1;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        probes += 1;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut chosen = lo;
    let mut linear_scan = false;
    if candidates.len() <= FULL_SCAN_LIMIT {
        let all = par::map_range(par, candidates.len(), feasible);
        probes += all.len();
        let first = all
            .iter()
            .position(|&ok| ok)
            .expect("last candidate is feasible");
        if first != lo || all[first..].iter().any(|&ok| !ok) {
            linear_scan = true;
            chosen = first;
        }
    }
    let (set, value) = run(chosen);
    Ok(FoundBudget {
        budget: candidates.get(chosen),
        selected: set.iter().collect(),
        value,
        target,
        candidates: candidates.len(),
        probes,
        linear_scan,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WolseyCheck {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub greedy_value: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub optimal_value: Rational,
    pub holds: bool,
}

/// Compares Wolsey's greedy against the exhaustive optimum at budget `B`.
pub fn check_wolsey_bound(
    ground: ItemSet,
    f: &dyn SetFunction,
    costs: &CostVector,
    budget: &Rational,
    constants: &GreedyConstants,
) -> Result<WolseyCheck> {
    let greedy_value = f.eval(wolsey_greedy(ground, f, costs, budget));
    let (_, optimal_value) = crate::oracle::optimal_budgeted(ground, f, costs, budget)?;
    let holds = greedy_value >= &constants.alpha_exact * &optimal_value;
    Ok(WolseyCheck {
        greedy_value,
        optimal_value,
        holds,
    })
}
