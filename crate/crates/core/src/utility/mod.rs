//! State-dependent utility functions `g: (Γ ∪ {*})^n → Z≥0` with a goal value,
//! the concrete families used by the solvers, and the OR combinator.

mod check;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::model::{all_realizations, ItemSet, PartialRealization, State, WeightedSample};

pub use check::{
    check_adaptive_submodular, check_adaptive_submodular_with, check_goal, check_monotone,
    check_monotone_with, check_submodular, check_submodular_with, compute_rho, compute_rho_with,
    AdaptiveWitness, CheckOutcome, GoalWitness, MonotoneWitness, RhoReport, RhoScope,
    SubmodularWitness, ValueTable, DEFAULT_ENUMERATION_LIMIT,
};

/// A monotone submodular utility with goal value [`Utility::goal`].
///
/// Implementations must be pure; the solvers evaluate them from several threads.
pub trait Utility: Send + Sync {
    fn num_items(&self) -> usize;
    fn num_states(&self) -> usize;
    /// `Q`
    fn goal(&self) -> u64;
    fn eval(&self, b: &PartialRealization) -> u64;

    fn describe(&self) -> String {
        format!("utility(n={}, Q={})", self.num_items(), self.goal())
    }
}

pub type UtilityRef = Arc<dyn Utility>;

impl fmt::Debug for dyn Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

fn check_item(g: &dyn Utility, b: &PartialRealization, i: usize) -> Result<()> {
    if b.len() != g.num_items() {
        return Err(Error::DimensionMismatch {
            expected: g.num_items(),
            found: b.len(),
        });
    }
    if i >= b.len() {
        return Err(Error::ItemOutOfRange {
            item: i,
            n: b.len(),
        });
    }
    if b.is_set(i) {
        return Err(Error::PositionAlreadySet { item: i });
    }
    Ok(())
}

/// `Δg(b, i, γ) = g(b_{i←γ}) − g(b)`.
pub fn delta(g: &dyn Utility, b: &PartialRealization, i: usize, state: State) -> Result<i64> {
    check_item(g, b, i)?;
    if state as usize >= g.num_states() {
        return Err(Error::StateOutOfRange {
            state: state as usize,
            size: g.num_states(),
        });
    }
    Ok(g.eval(&b.with_state(i, state)) as i64 - g.eval(b) as i64)
}

/// `γ_{b,i}`: the state with the smallest gain, lowest state index on ties.
pub fn gamma_worst(g: &dyn Utility, b: &PartialRealization, i: usize) -> Result<State> {
    check_item(g, b, i)?;
    Ok(worst_state(g, b, i).0)
}

/// `(γ_{b,i}, g(b_{i←γ_{b,i}}))`; no argument checks.
pub(crate) fn worst_state(g: &dyn Utility, b: &PartialRealization, i: usize) -> (State, u64) {
    let mut best: Option<(State, u64)> = None;
    for s in 0..g.num_states() as State {
        let v = g.eval(&b.with_state(i, s));
        if best.is_none_or(|(_, bv)| v < bv) {
            best = Some((s, v));
        }
    }
    best.expect("at least two states")
}

fn same_shape(a: &dyn Utility, b: &dyn Utility) -> Result<()> {
    if a.num_items() != b.num_items() {
        return Err(Error::DimensionMismatch {
            expected: a.num_items(),
            found: b.num_items(),
        });
    }
    if a.num_states() != b.num_states() {
        return Err(Error::DimensionMismatch {
            expected: a.num_states(),
            found: b.num_states(),
        });
    }
    Ok(())
}

/// Enumeration size below which combinators verify their preconditions.
const PRECONDITION_CHECK_LIMIT: u128 = 1 << 12;

/// Standard OR construction: `Q1·Q2 − (Q1 − g1(b))(Q2 − g2(b))`.
#[derive(Clone)]
pub struct OrUtility {
    left: UtilityRef,
    right: UtilityRef,
}

impl OrUtility {
    pub fn left(&self) -> &UtilityRef {
        &self.left
    }

    pub fn right(&self) -> &UtilityRef {
        &self.right
    }
}

impl Utility for OrUtility {
    fn num_items(&self) -> usize {
        self.left.num_items()
    }
    fn num_states(&self) -> usize {
        self.left.num_states()
    }
    fn goal(&self) -> u64 {
        self.left.goal() * self.right.goal()
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        let (q1, q2) = (self.left.goal(), self.right.goal());
        let (g1, g2) = (self.left.eval(b), self.right.eval(b));
        q1 * q2 - (q1 - g1) * (q2 - g2)
    }
    fn describe(&self) -> String {
        format!("or({}, {})", self.left.describe(), self.right.describe())
    }
}

/// Combines two utilities with the OR construction. When `Γ^n` is small the
/// precondition (every full realization reaches one of the two goals) is checked.
pub fn or_combine(g1: UtilityRef, g2: UtilityRef) -> Result<UtilityRef> {
    same_shape(&*g1, &*g2)?;
    let (n, k) = (g1.num_items(), g1.num_states());
    if (k as u128)
        .checked_pow(n as u32)
        .is_some_and(|s| s <= PRECONDITION_CHECK_LIMIT)
    {
        for a in all_realizations(n, k) {
            let b = a.to_partial();
            if g1.eval(&b) != g1.goal() && g2.eval(&b) != g2.goal() {
                return Err(Error::InvalidUtility(format!(
                    "neither operand reaches its goal on {b}"
                )));
            }
        }
    }
    Ok(Arc::new(OrUtility {
        left: g1,
        right: g2,
    }))
}

/// `h_S(b) = m − |{a ∈ S : a ⪰ b}|`, goal `m`.
#[derive(Clone, Debug)]
pub struct EliminatedCount {
    sample: Arc<WeightedSample>,
    num_states: usize,
}

impl Utility for EliminatedCount {
    fn num_items(&self) -> usize {
        self.sample.num_items()
    }
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn goal(&self) -> u64 {
        self.sample.len() as u64
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        (self.sample.len() - self.sample.count_of(b)) as u64
    }
    fn describe(&self) -> String {
        format!("h_S(m={})", self.sample.len())
    }
}

/// `h_W(b) = W − Σ_{a ⪰ b} w(a)`, goal `W`.
#[derive(Clone, Debug)]
pub struct EliminatedWeight {
    sample: Arc<WeightedSample>,
    num_states: usize,
}

impl Utility for EliminatedWeight {
    fn num_items(&self) -> usize {
        self.sample.num_items()
    }
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn goal(&self) -> u64 {
        self.sample.total_weight()
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        self.sample.total_weight() - self.sample.weight_of(b)
    }
    fn describe(&self) -> String {
        format!("h_W(W={})", self.sample.total_weight())
    }
}

pub fn make_hs(sample: Arc<WeightedSample>, num_states: usize) -> Result<UtilityRef> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.check_states(num_states)?;
    Ok(Arc::new(EliminatedCount { sample, num_states }))
}

pub fn make_hw(sample: Arc<WeightedSample>, num_states: usize) -> Result<UtilityRef> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    sample.check_states(num_states)?;
    Ok(Arc::new(EliminatedWeight { sample, num_states }))
}

/// `g_S = OR(g, h_S)` with goal `Q·m`.
pub fn make_gs(g: UtilityRef, sample: Arc<WeightedSample>) -> Result<UtilityRef> {
    let h = make_hs(sample, g.num_states())?;
    or_combine(g, h)
}

/// `g_W = OR(g, h_W)` with goal `Q·W`.
pub fn make_gw(g: UtilityRef, sample: Arc<WeightedSample>) -> Result<UtilityRef> {
    let h = make_hw(sample, g.num_states())?;
    or_combine(g, h)
}

/// Utility for evaluating a Boolean k-of-n function over `{0, 1}`:
/// `k(n−k+1) − ((n−k+1) − g0(b))(k − g1(b))` where `g1` counts ones capped at `k`
/// and `g0` counts zeros capped at `n−k+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KOfN {
    n: usize,
    k: usize,
}

impl KOfN {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "k-of-n needs 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

pub fn k_of_n_utility(n: usize, k: usize) -> Result<UtilityRef> {
    Ok(Arc::new(KOfN::new(n, k)?))
}

impl Utility for KOfN {
    fn num_items(&self) -> usize {
        self.n
    }
    fn num_states(&self) -> usize {
        2
    }
    fn goal(&self) -> u64 {
        (self.k * (self.n - self.k + 1)) as u64
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        let ones = b.entries().iter().filter(|e| **e == Some(1)).count();
        let zeros = b.entries().iter().filter(|e| **e == Some(0)).count();
        let q0 = self.n - self.k + 1;
        let g1 = ones.min(self.k);
        let g0 = zeros.min(q0);
        (self.k * q0 - (q0 - g0) * (self.k - g1)) as u64
    }
    fn describe(&self) -> String {
        format!("k_of_n(n={}, k={})", self.n, self.k)
    }
}

/// Coverage utility: each `(item, state)` pair covers a subset of a ground
/// universe and `g(b)` counts the elements covered by the set positions of `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageUtility {
    universe_size: usize,
    num_states: usize,
    /// `covers[item][state]`, sorted element lists.
    covers: Vec<Vec<Vec<u32>>>,
}

impl CoverageUtility {
    pub fn new(
        universe_size: usize,
        num_states: usize,
        covers: Vec<Vec<Vec<u32>>>,
    ) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::InvalidUtility(
                "coverage universe must be nonempty".into(),
            ));
        }
        let mut covers = covers;
        for (i, per_item) in covers.iter_mut().enumerate() {
            if per_item.len() != num_states {
                return Err(Error::InvalidUtility(format!(
                    "item {i} lists {} states, expected {num_states}",
                    per_item.len()
                )));
            }
            for set in per_item.iter_mut() {
                if let Some(e) = set.iter().find(|&&e| e as usize >= universe_size) {
                    return Err(Error::InvalidUtility(format!(
                        "element {e} outside universe of size {universe_size}"
                    )));
                }
                set.sort_unstable();
                set.dedup();
            }
        }
        let util = Self {
            universe_size,
            num_states,
            covers,
        };
        // An element is covered by every full realization iff some item covers it in all states.
        for e in 0..universe_size as u32 {
            let guaranteed = util
                .covers
                .iter()
                .any(|per_item| per_item.iter().all(|set| set.binary_search(&e).is_ok()));
            if !guaranteed {
                return Err(Error::InvalidUtility(format!(
                    "element {e} is left uncovered by some full realization"
                )));
            }
        }
        Ok(util)
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn covers(&self) -> &[Vec<Vec<u32>>] {
        &self.covers
    }
}

impl Utility for CoverageUtility {
    fn num_items(&self) -> usize {
        self.covers.len()
    }
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn goal(&self) -> u64 {
        self.universe_size as u64
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        let mut seen = vec![0u64; self.universe_size.div_ceil(64)];
        for (i, e) in b.entries().iter().enumerate() {
            if let Some(s) = e {
                for &x in &self.covers[i][*s as usize] {
                    seen[x as usize / 64] |= 1 << (x % 64);
                }
            }
        }
        seen.iter().map(|w| w.count_ones() as u64).sum()
    }
    fn describe(&self) -> String {
        format!(
            "coverage(n={}, |U|={})",
            self.covers.len(),
            self.universe_size
        )
    }
}

/// Explicit value table with a default for unlisted partial realizations.
/// Used to build counterexamples; no structural properties are assumed.
#[derive(Clone, Debug)]
pub struct TableUtility {
    n: usize,
    num_states: usize,
    goal: u64,
    default: u64,
    values: HashMap<PartialRealization, u64>,
}

impl TableUtility {
    pub fn new(
        n: usize,
        num_states: usize,
        goal: u64,
        default: u64,
        values: HashMap<PartialRealization, u64>,
    ) -> Result<Self> {
        for b in values.keys() {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.len(),
                });
            }
            b.check_states(num_states)?;
        }
        Ok(Self {
            n,
            num_states,
            goal,
            default,
            values,
        })
    }

    pub fn entries(&self) -> &HashMap<PartialRealization, u64> {
        &self.values
    }

    pub fn default_value(&self) -> u64 {
        self.default
    }
}

impl Utility for TableUtility {
    fn num_items(&self) -> usize {
        self.n
    }
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn goal(&self) -> u64 {
        self.goal
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        self.values.get(b).copied().unwrap_or(self.default)
    }
    fn describe(&self) -> String {
        format!("table(n={}, entries={})", self.n, self.values.len())
    }
}

/// Closure-backed utility, handy for tests and ad-hoc experiments.
pub struct FnUtility<F> {
    n: usize,
    num_states: usize,
    goal: u64,
    f: F,
}

impl<F> FnUtility<F>
where
    F: Fn(&PartialRealization) -> u64 + Send + Sync,
{
    pub fn new(n: usize, num_states: usize, goal: u64, f: F) -> Self {
        Self {
            n,
            num_states,
            goal,
            f,
        }
    }
}

impl<F> Utility for FnUtility<F>
where
    F: Fn(&PartialRealization) -> u64 + Send + Sync,
{
    fn num_items(&self) -> usize {
        self.n
    }
    fn num_states(&self) -> usize {
        self.num_states
    }
    fn goal(&self) -> u64 {
        self.goal
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        (self.f)(b)
    }
}

/// Caches evaluations keyed by partial realization. Safe for concurrent readers.
pub struct Memoized {
    inner: UtilityRef,
    cache: RwLock<HashMap<PartialRealization, u64>>,
}

impl Memoized {
    pub fn wrap(inner: UtilityRef) -> UtilityRef {
        Arc::new(Self {
            inner,
            cache: RwLock::new(HashMap::new()),
        })
    }
}

impl Utility for Memoized {
    fn num_items(&self) -> usize {
        self.inner.num_items()
    }
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }
    fn goal(&self) -> u64 {
        self.inner.goal()
    }
    fn eval(&self, b: &PartialRealization) -> u64 {
        if let Some(v) = self.cache.read().expect("cache lock").get(b) {
            return *v;
        }
        let v = self.inner.eval(b);
        self.cache.write().expect("cache lock").insert(b.clone(), v);
        v
    }
    fn describe(&self) -> String {
        self.inner.describe()
    }
}

/// `g'(d') = g(ν⁻¹(d'))`: the utility of the instance induced by a partial
/// realization `base`, defined over the free items of `base`.
pub struct InducedUtility {
    inner: UtilityRef,
    base: PartialRealization,
    free: ItemSet,
}

impl InducedUtility {
    pub fn new(inner: UtilityRef, base: PartialRealization) -> Result<Self> {
        if base.len() != inner.num_items() {
            return Err(Error::DimensionMismatch {
                expected: inner.num_items(),
                found: base.len(),
            });
        }
        let free = base.free_items();
        Ok(Self { inner, base, free })
    }

    /// `ν⁻¹(d')`
    pub fn lift(&self, d: &PartialRealization) -> PartialRealization {
        let mut full = self.base.clone();
        for (pos, i) in self.free.iter().enumerate() {
            if let Some(s) = d.get(pos) {
                full.assign(i, s);
            }
        }
        full
    }
}

impl Utility for InducedUtility {
    fn num_items(&self) -> usize {
        self.free.len()
    }
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }
    fn goal(&self) -> u64 {
        self.inner.goal()
    }
    fn eval(&self, d: &PartialRealization) -> u64 {
        self.inner.eval(&self.lift(d))
    }
    fn describe(&self) -> String {
        format!("induced({}, base={})", self.inner.describe(), self.base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Realization;

    fn pr(v: &[Option<u8>]) -> PartialRealization {
        PartialRealization::from_entries(v.to_vec())
    }

    fn sample() -> Arc<WeightedSample> {
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
    fn delta_and_worst_state() {
        let constant: UtilityRef = Arc::new(FnUtility::new(3, 2, 5, |_| 5));
        let b = PartialRealization::empty(3);
        assert_eq!(delta(&*constant, &b, 0, 1).unwrap(), 0);
        assert_eq!(gamma_worst(&*constant, &b, 2).unwrap(), 0);

        let g = k_of_n_utility(3, 2).unwrap();
        // g((1,*,*)) = 4 − (2)(1) = 2; g(*) = 0
        assert_eq!(delta(&*g, &b, 0, 1).unwrap(), 2);
        // from (1,*,*): state 0 gives 4 − 1·1 = 3 (Δ=1), state 1 gives 4 (Δ=2)
        let b1 = pr(&[Some(1), None, None]);
        assert_eq!(delta(&*g, &b1, 1, 0).unwrap(), 1);
        assert_eq!(delta(&*g, &b1, 1, 1).unwrap(), 2);
        assert_eq!(gamma_worst(&*g, &b1, 1).unwrap(), 0);

        let rewards_one: UtilityRef =
            Arc::new(FnUtility::new(1, 2, 1, |b| (b.get(0) == Some(1)) as u64));
        assert_eq!(
            gamma_worst(&*rewards_one, &PartialRealization::empty(1), 0).unwrap(),
            0
        );

        assert!(delta(&*g, &b1, 0, 0).is_err());
        assert!(delta(&*g, &b1, 7, 0).is_err());
    }

    #[test]
    fn or_examples() {
        let q1 = 2;
        let q2 = 3;
        let g1: UtilityRef = Arc::new(FnUtility::new(
            1,
            2,
            q1,
            |b| if b.is_set(0) { 2 } else { 1 },
        ));
        let g2: UtilityRef = Arc::new(FnUtility::new(
            1,
            2,
            q2,
            |b| if b.is_set(0) { 3 } else { 1 },
        ));
        let g = or_combine(g1, g2).unwrap();
        assert_eq!(g.goal(), 6);
        // g1 = g2 = 1 → 6 − 1·2 = 4
        assert_eq!(g.eval(&PartialRealization::empty(1)), 4);
        assert_eq!(g.eval(&pr(&[Some(0)])), 6);

        let z1: UtilityRef = Arc::new(FnUtility::new(1, 2, 2, |b| if b.is_set(0) { 2 } else { 0 }));
        let z2: UtilityRef = Arc::new(FnUtility::new(1, 2, 3, |_| 0));
        assert_eq!(
            or_combine(z1, z2)
                .unwrap()
                .eval(&PartialRealization::empty(1)),
            0
        );

        let bad1: UtilityRef = Arc::new(FnUtility::new(1, 2, 2, |_| 0));
        let bad2: UtilityRef = Arc::new(FnUtility::new(1, 2, 3, |_| 0));
        assert!(or_combine(bad1, bad2).is_err());
    }

    #[test]
    fn sample_elimination_examples() {
        let s = sample();
        let hs = make_hs(s.clone(), 2).unwrap();
        assert_eq!(hs.goal(), 3);
        assert_eq!(hs.eval(&PartialRealization::empty(2)), 0);
        assert_eq!(hs.eval(&pr(&[Some(0), None])), 1);
        assert_eq!(hs.eval(&pr(&[Some(1), Some(0)])), 3);

        let hw = make_hw(s.clone(), 2).unwrap();
        assert_eq!(hw.goal(), 6);
        assert_eq!(hw.eval(&PartialRealization::empty(2)), 0);
        assert_eq!(hw.eval(&pr(&[Some(0), None])), 3);
        assert_eq!(hw.eval(&pr(&[Some(1), Some(0)])), 6);

        let empty = Arc::new(WeightedSample::new(2, vec![]).unwrap());
        assert!(make_hs(empty, 2).is_err());
    }

    #[test]
    fn composed_gs_gw_examples() {
        // g = 2-of-2 style coverage: goal 1 once item 0 is known.
        let g: UtilityRef = Arc::new(FnUtility::new(2, 2, 1, |b| b.is_set(0) as u64));
        let s = sample();
        let gs = make_gs(g.clone(), s.clone()).unwrap();
        let gw = make_gw(g.clone(), s).unwrap();
        assert_eq!(gs.goal(), 3);
        assert_eq!(gw.goal(), 6);
        // b = (*,1): g = 0, h_S = 1, h_W = 1 → g_S = 3 − 1·2 = 1, g_W = 6 − 1·5 = 1
        let b = pr(&[None, Some(1)]);
        assert_eq!(gs.eval(&b), 1);
        assert_eq!(gw.eval(&b), 1);
        // b = (1,0): inconsistent with all rows → goal via h
        let b = pr(&[Some(1), Some(0)]);
        assert_eq!(gs.eval(&b), 3);
        assert_eq!(gw.eval(&b), 6);
        // b = (*,0): h_S = 2, h_W = 5 → g_S = 3 − 1·1 = 2, g_W = 6 − 1·1 = 5
        let b = pr(&[None, Some(0)]);
        assert_eq!(gs.eval(&b), 2);
        assert_eq!(gw.eval(&b), 5);
    }

    #[test]
    fn k_of_n_examples() {
        let g = k_of_n_utility(3, 2).unwrap();
        assert_eq!(g.goal(), 4);
        assert_eq!(g.eval(&pr(&[Some(1), Some(1), None])), 4);
        assert_eq!(g.eval(&PartialRealization::empty(3)), 0);
        assert!(k_of_n_utility(3, 0).is_err());
        assert!(k_of_n_utility(3, 4).is_err());
        // goal reached iff ≥ k ones or ≥ n−k+1 zeros
        let sp = crate::model::PartialSpace::new(3, 2, 1000).unwrap();
        for code in 0..sp.size() {
            let b = sp.decode(code);
            let ones = b.entries().iter().filter(|e| **e == Some(1)).count();
            let zeros = b.entries().iter().filter(|e| **e == Some(0)).count();
            assert_eq!(g.eval(&b) == 4, ones >= 2 || zeros >= 2, "{b}");
        }
    }

    #[test]
    fn coverage_validation() {
        // element 1 is never guaranteed
        let bad = CoverageUtility::new(
            2,
            2,
            vec![vec![vec![0, 1], vec![0]], vec![vec![0], vec![0]]],
        );
        assert!(bad.is_err());
        let ok = CoverageUtility::new(
            2,
            2,
            vec![vec![vec![0, 1], vec![0]], vec![vec![1], vec![1]]],
        )
        .unwrap();
        assert_eq!(ok.goal(), 2);
        assert_eq!(ok.eval(&pr(&[Some(1), None])), 1);
        assert_eq!(ok.eval(&pr(&[Some(0), None])), 2);
        assert!(CoverageUtility::new(2, 2, vec![vec![vec![5], vec![0]]]).is_err());
    }

    #[test]
    fn induced_lifts_into_base() {
        let g = k_of_n_utility(3, 2).unwrap();
        let base = pr(&[None, Some(1), None]);
        let ind = InducedUtility::new(g.clone(), base).unwrap();
        assert_eq!(ind.num_items(), 2);
        assert_eq!(
            ind.eval(&pr(&[Some(1), None])),
            g.eval(&pr(&[Some(1), Some(1), None]))
        );
        assert_eq!(
            ind.eval(&pr(&[None, Some(0)])),
            g.eval(&pr(&[None, Some(1), Some(0)]))
        );
    }

    #[test]
    fn memoized_agrees() {
        let g = k_of_n_utility(4, 2).unwrap();
        let m = Memoized::wrap(g.clone());
        let sp = crate::model::PartialSpace::new(4, 2, 1000).unwrap();
        for _ in 0..2 {
            for code in 0..sp.size() {
                let b = sp.decode(code);
                assert_eq!(m.eval(&b), g.eval(&b));
            }
        }
    }
}
