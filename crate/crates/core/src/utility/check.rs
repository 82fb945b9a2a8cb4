//! Exhaustive property checkers over `(Γ ∪ {*})^n`.
//!
//! Every checker enumerates partial realizations in code order (item 0 is the
//! least significant digit, digit 0 is `*`) and reports the first witness in
//! that order, regardless of how the enumeration is split across threads.

use std::collections::BTreeSet;

use num::Zero;
use serde::Serialize;

use super::Utility;
use crate::error::{Error, Result};
use crate::model::{
    all_realizations, PartialRealization, PartialSpace, Realization, State, WeightedSample,
};
use crate::par::{self, Parallelism};
use crate::rational::{ratio, Rational};

/// Largest `(|Γ|+1)^n` the checkers will enumerate by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CheckOutcome<W> {
    Holds,
    Violated(W),
}

impl<W> CheckOutcome<W> {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            CheckOutcome::Holds => None,
            CheckOutcome::Violated(w) => Some(w),
        }
    }

    fn from_option(w: Option<W>) -> Self {
        w.map_or(CheckOutcome::Holds, CheckOutcome::Violated)
    }
}

/// `g` tabulated over every partial realization.
pub struct ValueTable {
    space: PartialSpace,
    values: Vec<u64>,
}

impl ValueTable {
    pub fn build(g: &dyn Utility, limit: usize, par: Parallelism) -> Result<Self> {
        let space = PartialSpace::new(g.num_items(), g.num_states(), limit)?;
        let values = par::map_range(par, space.size(), |code| g.eval(&space.decode(code)));
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &PartialSpace {
        &self.space
    }

    pub fn value(&self, code: usize) -> u64 {
        self.values[code]
    }

    fn free_items(&self, code: usize) -> Vec<usize> {
        (0..self.space.n)
            .filter(|&i| self.space.digit(code, i) == 0)
            .collect()
    }

    fn extend(&self, code: usize, i: usize, s: State) -> usize {
        code + (s as usize + 1) * self.space.place(i)
    }

    fn delta(&self, code: usize, i: usize, s: State) -> i64 {
        self.values[self.extend(code, i, s)] as i64 - self.values[code] as i64
    }

    /// Codes of strict extensions of `code` that leave every item in `skip` free.
    fn strict_extensions(&self, code: usize, free: &[usize], skip: usize) -> Vec<usize> {
        let others: Vec<usize> = free.iter().copied().filter(|&j| j != skip).collect();
        let base = self.space.k + 1;
        let mut digits = vec![0usize; others.len()];
        let mut out = Vec::new();
        loop {
            // increment mixed-radix counter
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    return out;
                }
                digits[pos] += 1;
                if digits[pos] < base {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            let ext: usize = others
                .iter()
                .zip(&digits)
                .map(|(&j, &d)| d * self.space.place(j))
                .sum();
            out.push(code + ext);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonotoneWitness {
    pub b: String,
    pub item: usize,
    pub state: State,
    pub before: u64,
    pub after: u64,
}

pub fn check_monotone(g: &dyn Utility) -> Result<CheckOutcome<MonotoneWitness>> {
    check_monotone_with(g, DEFAULT_ENUMERATION_LIMIT, Parallelism::default())
}

/// `g(b) <= g(b_{i←γ})` for every `b`, free `i` and `γ`.
pub fn check_monotone_with(
    g: &dyn Utility,
    limit: usize,
    par: Parallelism,
) -> Result<CheckOutcome<MonotoneWitness>> {
    let table = ValueTable::build(g, limit, par)?;
    let k = g.num_states() as State;
    let hit = par::find_first_range(par, table.space.size(), |code| {
        for i in table.free_items(code) {
            for s in 0..k {
                let after = table.values[table.extend(code, i, s)];
                if after < table.values[code] {
                    return Some(MonotoneWitness {
                        b: table.space.decode(code).to_string(),
                        item: i,
                        state: s,
                        before: table.values[code],
                        after,
                    });
                }
            }
        }
        None
    });
    Ok(CheckOutcome::from_option(hit))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubmodularWitness {
    pub b: String,
    pub b_ext: String,
    pub item: usize,
    pub state: State,
    pub gain_at_b: i64,
    pub gain_at_ext: i64,
}

pub fn check_submodular(g: &dyn Utility) -> Result<CheckOutcome<SubmodularWitness>> {
    check_submodular_with(g, DEFAULT_ENUMERATION_LIMIT, Parallelism::default())
}

/// `Δg(b,i,γ) >= Δg(b',i,γ)` for every `b' ≻ b` with `b_i = b'_i = *`.
pub fn check_submodular_with(
    g: &dyn Utility,
    limit: usize,
    par: Parallelism,
) -> Result<CheckOutcome<SubmodularWitness>> {
    let table = ValueTable::build(g, limit, par)?;
    let k = g.num_states() as State;
    let hit = par::find_first_range(par, table.space.size(), |code| {
        let free = table.free_items(code);
        for &i in &free {
            let exts = table.strict_extensions(code, &free, i);
            for s in 0..k {
                let d = table.delta(code, i, s);
                for &ext in &exts {
                    let d2 = table.delta(ext, i, s);
                    if d2 > d {
                        return Some(SubmodularWitness {
                            b: table.space.decode(code).to_string(),
                            b_ext: table.space.decode(ext).to_string(),
                            item: i,
                            state: s,
                            gain_at_b: d,
                            gain_at_ext: d2,
                        });
                    }
                }
            }
        }
        None
    });
    Ok(CheckOutcome::from_option(hit))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdaptiveWitness {
    pub b: String,
    pub b_ext: String,
    pub item: usize,
    /// Expected gain at `b` as `numerator / w(b)`.
    pub expected_at_b: (i128, u64),
    pub expected_at_ext: (i128, u64),
}

pub fn check_adaptive_submodular(
    g: &dyn Utility,
    sample: &WeightedSample,
) -> Result<CheckOutcome<AdaptiveWitness>> {
    check_adaptive_submodular_with(g, sample, DEFAULT_ENUMERATION_LIMIT, Parallelism::default())
}

/// `E[Δg(b,i,·)] >= E[Δg(b',i,·)]` under the sample distribution, for every
/// `b' ≻ b` with `b_i = b'_i = *`. Pairs where either side has zero sample
/// weight are skipped since the conditional expectation is undefined there.
pub fn check_adaptive_submodular_with(
    g: &dyn Utility,
    sample: &WeightedSample,
    limit: usize,
    par: Parallelism,
) -> Result<CheckOutcome<AdaptiveWitness>> {
    if sample.num_items() != g.num_items() {
        return Err(Error::DimensionMismatch {
            expected: g.num_items(),
            found: sample.num_items(),
        });
    }
    sample.check_states(g.num_states())?;
    let table = ValueTable::build(g, limit, par)?;
    let n = g.num_items();
    let space = table.space;

    // Per code: w(b) and, for each item, Σ_{a ⪰ b} w(a)·Δg(b,i,a_i) (zero when i is set).
    let stats: Vec<(u64, Vec<i128>)> = par::map_range(par, space.size(), |code| {
        let b = space.decode(code);
        let mut w = 0u64;
        let mut nums = vec![0i128; n];
        for row in sample.consistent(&b) {
            w += row.weight;
            for (i, num) in nums.iter_mut().enumerate() {
                if !b.is_set(i) {
                    let d = table.delta(code, i, row.realization.state(i));
                    *num += d as i128 * row.weight as i128;
                }
            }
        }
        (w, nums)
    });

    let hit = par::find_first_range(par, space.size(), |code| {
        let (w, ref nums) = stats[code];
        if w == 0 {
            return None;
        }
        let free = table.free_items(code);
        for &i in &free {
            for ext in table.strict_extensions(code, &free, i) {
                let (w2, ref nums2) = stats[ext];
                if w2 == 0 {
                    continue;
                }
                if nums2[i] * (w as i128) > nums[i] * (w2 as i128) {
                    return Some(AdaptiveWitness {
                        b: space.decode(code).to_string(),
                        b_ext: space.decode(ext).to_string(),
                        item: i,
                        expected_at_b: (nums[i], w),
                        expected_at_ext: (nums2[i], w2),
                    });
                }
            }
        }
        None
    });
    Ok(CheckOutcome::from_option(hit))
}

/// Which partial realizations the `ρ` minimization ranges over.
#[derive(Clone, Copy, Debug)]
pub enum RhoScope<'a> {
    /// All of `(Γ ∪ {*})^n`: the true `ρ`.
    Full,
    /// Only partial realizations extended by some sample row. The minimum
    /// over this subset is an over-estimate of the true `ρ`.
    SampleReachable(&'a WeightedSample),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RhoReport {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub rho: Rational,
    /// `min(ρ, 1/9)`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub eta: Rational,
    pub witness_b: PartialRealization,
    pub witness_item: usize,
    pub witness_state: State,
    /// `false` when the minimization was restricted.
    pub exact: bool,
}

pub fn compute_rho(g: &dyn Utility) -> Result<RhoReport> {
    compute_rho_with(
        g,
        RhoScope::Full,
        DEFAULT_ENUMERATION_LIMIT,
        Parallelism::default(),
    )
}

/// Minimum of `Δg(b,i,γ) / (Q − g(b))` over `g(b) < Q`, free `i`, and `γ ≠ γ_{b,i}`.
pub fn compute_rho_with(
    g: &dyn Utility,
    scope: RhoScope<'_>,
    limit: usize,
    par: Parallelism,
) -> Result<RhoReport> {
    let q = g.goal();
    let k = g.num_states();
    let candidates: Vec<PartialRealization> = match scope {
        RhoScope::Full => {
            let space = PartialSpace::new(g.num_items(), k, limit)?;
            (0..space.size()).map(|c| space.decode(c)).collect()
        }
        RhoScope::SampleReachable(sample) => {
            let n = g.num_items();
            if n > 20 {
                return Err(Error::EnumerationTooLarge {
                    size: 1u128 << n,
                    limit: 1 << 20,
                });
            }
            let mut set = BTreeSet::new();
            for row in sample.rows() {
                let full = row.realization.to_partial();
                for mask in 0u64..(1u64 << n) {
                    let mut b = PartialRealization::empty(n);
                    for i in 0..n {
                        if mask >> i & 1 == 1 {
                            b.assign(i, full.get(i).expect("full"));
                        }
                    }
                    set.insert(b);
                }
            }
            set.into_iter().collect()
        }
    };

    // (gain, gap, b index, item, state)
    type Best = (i64, u64, usize, usize, State);
    let local: Vec<Option<Best>> = par::map_range(par, candidates.len(), |idx| {
        let b = &candidates[idx];
        let gb = g.eval(b);
        if gb >= q {
            return None;
        }
        let gap = q - gb;
        let mut best: Option<Best> = None;
        for i in (0..b.len()).filter(|&i| !b.is_set(i)) {
            let gains: Vec<i64> = (0..k as State)
                .map(|s| g.eval(&b.with_state(i, s)) as i64 - gb as i64)
                .collect();
            let worst = (0..k).min_by_key(|&s| (gains[s], s)).expect("states");
            for s in (0..k).filter(|&s| s != worst) {
                let cand = (gains[s], gap, idx, i, s as State);
                if best.is_none_or(|bb| {
                    (cand.0 as i128) * (bb.1 as i128) < (bb.0 as i128) * (cand.1 as i128)
                }) {
                    best = Some(cand);
                }
            }
        }
        best
    });
    let best = local
        .into_iter()
        .flatten()
        .fold(None::<Best>, |acc, cand| match acc {
            Some(bb) if (cand.0 as i128) * (bb.1 as i128) >= (bb.0 as i128) * (cand.1 as i128) => {
                Some(bb)
            }
            _ => Some(cand),
        });
    let (gain, gap, idx, item, state) = best.ok_or(Error::NoValidTriple)?;
    let rho = Rational::new(gain.into(), gap.into());
    let ninth = ratio(1, 9);
    let eta = if rho < ninth { rho.clone() } else { ninth };
    debug_assert!(!rho.is_zero() || gain == 0);
    Ok(RhoReport {
        rho,
        eta,
        witness_b: candidates[idx].clone(),
        witness_item: item,
        witness_state: state,
        exact: matches!(scope, RhoScope::Full),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoalWitness {
    pub realization: Vec<State>,
    pub value: u64,
}

/// `g(a) = Q` on every sample row, and on all of `Γ^n` when `|Γ|^n <= limit`.
/// Returns whether the full enumeration was performed alongside the outcome.
pub fn check_goal(
    g: &dyn Utility,
    sample: Option<&WeightedSample>,
    limit: usize,
) -> (CheckOutcome<GoalWitness>, bool) {
    let q = g.goal();
    let bad = |a: &Realization| {
        let v = g.eval(&a.to_partial());
        (v != q).then(|| GoalWitness {
            realization: a.0.clone(),
            value: v,
        })
    };
    if let Some(s) = sample {
        if let Some(w) = s.rows().iter().find_map(|r| bad(&r.realization)) {
            return (CheckOutcome::Violated(w), false);
        }
    }
    let (n, k) = (g.num_items(), g.num_states());
    let enumerable = (k as u128)
        .checked_pow(n as u32)
        .is_some_and(|s| s <= limit as u128);
    if enumerable {
        let hit = all_realizations(n, k).find_map(|a| bad(&a));
        (CheckOutcome::from_option(hit), true)
    } else {
        (CheckOutcome::Holds, false)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;
    use std::sync::Arc;

    use super::*;
    use crate::model::Realization;
    use crate::utility::{
        k_of_n_utility, make_gs, make_gw, make_hs, or_combine, CoverageUtility, FnUtility,
        TableUtility, UtilityRef,
    };

    fn pr(v: &[Option<u8>]) -> PartialRealization {
        PartialRealization::from_entries(v.to_vec())
    }

    fn sample3() -> Arc<WeightedSample> {
        Arc::new(
            WeightedSample::new(
                2,
                vec![
                    (Realization(vec![0, 0]), 1),
                    (Realization(vec![0, 1]), 2),
                    (Realization(vec![1, 1]), 3),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn monotone_examples() {
        let hs = make_hs(sample3(), 2).unwrap();
        assert!(check_monotone(&*hs).unwrap().holds());
        let stars = FnUtility::new(3, 2, 3, |b| (b.len() - b.num_set()) as u64);
        let out = check_monotone(&stars).unwrap();
        let w = out.witness().expect("anti-monotone");
        assert_eq!(w.b, "(*,*,*)");
        assert_eq!((w.item, w.state, w.before, w.after), (0, 0, 3, 2));
        let constant = FnUtility::new(3, 3, 1, |_| 1);
        assert!(check_monotone(&constant).unwrap().holds());
    }

    #[test]
    fn submodular_examples() {
        let g = k_of_n_utility(3, 2).unwrap();
        assert!(check_submodular(&*g).unwrap().holds());
        let cov: UtilityRef = Arc::new(
            CoverageUtility::new(
                2,
                2,
                vec![vec![vec![0, 1], vec![0]], vec![vec![1], vec![1]]],
            )
            .unwrap(),
        );
        let or = or_combine(g.clone(), k_of_n_utility(3, 1).unwrap()).unwrap();
        assert!(check_submodular(&*or).unwrap().holds());
        assert!(check_submodular(&*cov).unwrap().holds());

        // supermodular table: value 1 only when items 0 and 1 are both 1
        let mut values = HashMap::new();
        values.insert(pr(&[Some(1), Some(1)]), 1);
        let table = TableUtility::new(2, 2, 1, 0, values).unwrap();
        let out = check_submodular(&table).unwrap();
        let w = out.witness().expect("supermodular");
        assert_eq!(w.b, "(*,*)");
        assert_eq!(w.b_ext, "(*,1)");
        assert_eq!((w.item, w.state, w.gain_at_b, w.gain_at_ext), (0, 1, 0, 1));
    }

    #[test]
    fn gs_gw_are_monotone_submodular() {
        let g = k_of_n_utility(2, 1).unwrap();
        for h in [
            make_gs(g.clone(), sample3()).unwrap(),
            make_gw(g.clone(), sample3()).unwrap(),
        ] {
            assert!(check_monotone(&*h).unwrap().holds());
            assert!(check_submodular(&*h).unwrap().holds());
        }
    }

    #[test]
    fn adaptive_submodular_examples() {
        let g = k_of_n_utility(2, 2).unwrap();
        let s = sample3();
        let gw = make_gw(g.clone(), s.clone()).unwrap();
        assert!(check_adaptive_submodular(&*gw, &s).unwrap().holds());

        // Independent product distribution over {0,1}^2 (uniform) with a modular g.
        let uniform =
            WeightedSample::uniform(2, crate::model::all_realizations(2, 2).collect()).unwrap();
        let modular = FnUtility::new(2, 2, 2, |b| b.num_set() as u64);
        assert!(check_adaptive_submodular(&modular, &uniform)
            .unwrap()
            .holds());

        // Correlated sample where learning item 1 makes item 0 more valuable:
        // g rewards item 0 only in state 1; rows (1,1) and (0,0).
        let g = FnUtility::new(2, 2, 2, |b| match (b.get(0), b.get(1)) {
            (Some(_), Some(_)) => 2,
            (Some(1), None) => 1,
            (None, Some(_)) => 1,
            _ => 0,
        });
        let corr = WeightedSample::new(
            2,
            vec![(Realization(vec![1, 1]), 1), (Realization(vec![0, 0]), 1)],
        )
        .unwrap();
        let out = check_adaptive_submodular(&g, &corr).unwrap();
        let w = out.witness().expect("conditional gains invert");
        assert_eq!(w.b, "(*,*)");
        assert_eq!(w.b_ext, "(*,0)");
        assert_eq!(w.item, 0);
    }

    #[test]
    fn rho_examples() {
        let cov = CoverageUtility::new(
            2,
            2,
            vec![vec![vec![0, 1], vec![0]], vec![vec![1], vec![1]]],
        )
        .unwrap();
        let r = compute_rho(&cov).unwrap();
        assert_eq!(r.rho, ratio(1, 2));
        assert_eq!(r.eta, ratio(1, 9));
        assert_eq!(r.witness_b, PartialRealization::empty(2));
        assert_eq!((r.witness_item, r.witness_state), (1, 1));
        assert!(r.exact);

        let trivial = FnUtility::new(2, 2, 1, |_| 1);
        assert_eq!(compute_rho(&trivial), Err(Error::NoValidTriple));

        for k in 1..=4 {
            let g = k_of_n_utility(4, k).unwrap();
            assert!(compute_rho(&*g).unwrap().rho >= ratio(1, k as i64));
        }
        let gs = make_gs(k_of_n_utility(2, 1).unwrap(), sample3()).unwrap();
        assert!(compute_rho(&*gs).unwrap().rho >= ratio(1, 2));
    }

    #[test]
    fn restricted_rho_is_not_below_true_rho() {
        let g = make_gs(k_of_n_utility(2, 2).unwrap(), sample3()).unwrap();
        let full = compute_rho(&*g).unwrap();
        let s = sample3();
        let restricted = compute_rho_with(
            &*g,
            RhoScope::SampleReachable(&s),
            1 << 20,
            Parallelism::Sequential,
        )
        .unwrap();
        assert!(!restricted.exact);
        assert!(restricted.rho >= full.rho);
    }

    #[test]
    fn parallel_and_sequential_witnesses_match() {
        let stars = FnUtility::new(5, 2, 5, |b| (b.len() - b.num_set()) as u64);
        let a = check_monotone_with(&stars, 1 << 20, Parallelism::Sequential).unwrap();
        let b = check_monotone_with(&stars, 1 << 20, Parallelism::Rayon).unwrap();
        assert_eq!(a, b);
        let g = make_gs(k_of_n_utility(2, 1).unwrap(), sample3()).unwrap();
        let r1 = compute_rho_with(&*g, RhoScope::Full, 1 << 20, Parallelism::Sequential).unwrap();
        let r2 = compute_rho_with(&*g, RhoScope::Full, 1 << 20, Parallelism::Rayon).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn goal_check() {
        let g = k_of_n_utility(3, 2).unwrap();
        assert!(check_goal(&*g, None, 1 << 10).0.holds());
        let bad = FnUtility::new(2, 2, 2, |b| {
            b.num_set() as u64 - (b.get(0) == Some(1) && b.is_full()) as u64
        });
        let (out, full) = check_goal(&bad, None, 1 << 10);
        assert!(full);
        assert_eq!(out.witness().unwrap().realization, vec![1, 0]);
    }
}
