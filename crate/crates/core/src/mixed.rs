//! Mixed Greedy: each invocation builds a backbone along the worst-case
//! realization `σ` in two greedy stages sized by a common budget, then recurses
//! on every branch that leaves the backbone and on the backbone's end.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num::Zero;
use serde::Serialize;

use crate::budgeted::{find_budget_with, solve_chi, FoundBudget, GreedyConstants, SetFunction};
use crate::error::{Error, Result};
use crate::minsum::{h_p_function, schedule_cost, JobFunction, Schedule};
use crate::model::{DecisionTree, ItemSet, Node, PartialRealization, ScenarioInstance, State};
use crate::oracle::{Oracle, OracleLimits};
use crate::par::Parallelism;
use crate::rational::{int, Rational};
use crate::strategy::{Policy, Strategy, SuffixPolicy};
use crate::utility::{make_gs, worst_state, Utility};

/// `σ_i = argmin_γ Δg(b, i, γ)` for each free item; `None` at set items.
pub fn sigma_of(g: &dyn Utility, b: &PartialRealization) -> Vec<Option<State>> {
    (0..b.len())
        .map(|i| (!b.is_set(i)).then(|| worst_state(g, b, i).0))
        .collect()
}

fn with_sigma(b: &PartialRealization, sigma: &[Option<State>], set: ItemSet) -> PartialRealization {
    let mut out = b.clone();
    for i in set.iter() {
        out.assign(i, sigma[i].expect("σ covers free items"));
    }
    out
}

/// `g'(U) = g(b_U) − g(b)` where `b_U` sets each `i ∈ U` to `σ_i`.
pub struct SigmaGain<'a> {
    g: &'a dyn Utility,
    b: &'a PartialRealization,
    sigma: &'a [Option<State>],
    base: u64,
}

impl<'a> SigmaGain<'a> {
    pub fn new(g: &'a dyn Utility, b: &'a PartialRealization, sigma: &'a [Option<State>]) -> Self {
        Self {
            g,
            b,
            sigma,
            base: g.eval(b),
        }
    }
}

impl SetFunction for SigmaGain<'_> {
    fn ground(&self) -> ItemSet {
        self.b.free_items()
    }
    fn eval(&self, set: ItemSet) -> Rational {
        let v = self.g.eval(&with_sigma(self.b, self.sigma, set)) as i64 - self.base as i64;
        int(v)
    }
}

/// `h(R)`: weight of the rows extending `b` that differ from `σ` on some item of `R`.
pub struct Stage1Function {
    ground: ItemSet,
    rows: Vec<(Vec<State>, u64)>,
    sigma: Vec<Option<State>>,
}

impl SetFunction for Stage1Function {
    fn ground(&self) -> ItemSet {
        self.ground
    }
    fn eval(&self, set: ItemSet) -> Rational {
        let w: u64 = self
            .rows
            .iter()
            .filter(|(a, _)| set.iter().any(|i| Some(a[i]) != self.sigma[i]))
            .map(|(_, w)| w)
            .sum();
        Rational::from_integer(w.into())
    }
}

pub fn stage1_function(
    instance: &ScenarioInstance,
    b: &PartialRealization,
    sigma: &[Option<State>],
    eligible: ItemSet,
) -> Result<Stage1Function> {
    if !eligible.is_subset(b.free_items()) {
        return Err(Error::InvalidArgument(
            "eligible items must be free in b".into(),
        ));
    }
    let (rows, _) = instance.sample().consistent_rows(b)?;
    Ok(Stage1Function {
        ground: eligible,
        rows: rows
            .iter()
            .map(|r| (r.realization.0.clone(), r.weight))
            .collect(),
        sigma: sigma.to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stage {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LoopExit {
    /// The spend reached the budget.
    Budget,
    /// No eligible item was left.
    Exhausted,
    /// `g` reached `Q` on the backbone.
    Goal,
    /// The loop never ran (no sample row reaches `b` for stage 1).
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct BackboneStep {
    pub item: usize,
    pub stage: Stage,
    /// Marginal `h` gain in stage 1, `Δg(b, i, σ_i)` in stage 2.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub gain: Rational,
    /// The backbone state just before this item is queried.
    pub before: PartialRealization,
    /// Weight of sample rows reaching this node.
    pub reach_weight: u64,
}

/// Everything one invocation decides.
#[derive(Clone, Debug, Serialize)]
pub struct BackboneTrace {
    pub b: PartialRealization,
    pub goal: u64,
    pub g_entry: u64,
    /// `w(b)`
    pub entry_weight: u64,
    pub sigma: Vec<Option<State>>,
    pub budget: FoundBudget,
    pub eligible: Vec<usize>,
    pub steps: Vec<BackboneStep>,
    pub stage1_exit: LoopExit,
    pub stage2_exit: LoopExit,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub stage1_spent: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub stage2_spent: Rational,
    pub final_b: PartialRealization,
    pub g_final: u64,
    /// `Σ_v w(reach v) · c_v`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub c_y_weighted: Rational,
    /// `c_Y = Σ_v p̃(v) c_v`, zero when `w(b) = 0`.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub c_y: Rational,
}

impl BackboneTrace {
    pub fn budget_exits(&self) -> bool {
        self.stage1_exit == LoopExit::Budget && self.stage2_exit == LoopExit::Budget
    }

    /// `g(b_final) − g(b) ≥ (Q − g(b)) / 9`
    pub fn stage_progress_holds(&self) -> bool {
        9 * (self.g_final - self.g_entry) >= self.goal - self.g_entry
    }

    fn schedule(&self, instance: &ScenarioInstance, stage1_only: bool) -> Schedule {
        let items: Vec<usize> = self
            .steps
            .iter()
            .filter(|s| !stage1_only || s.stage == Stage::One)
            .map(|s| s.item)
            .collect();
        Schedule::full_cost(&items, instance.costs())
    }

    /// `S¹`
    pub fn stage1_schedule(&self, instance: &ScenarioInstance) -> Schedule {
        self.schedule(instance, true)
    }

    /// `S^Y`
    pub fn backbone_schedule(&self, instance: &ScenarioInstance) -> Schedule {
        self.schedule(instance, false)
    }
}

fn argmax(candidates: ItemSet, score: impl Fn(usize) -> Rational) -> Option<(usize, Rational)> {
    let mut best: Option<(usize, Rational)> = None;
    for i in candidates.iter() {
        let s = score(i);
        if best.as_ref().is_none_or(|(_, b)| &s > b) {
            best = Some((i, s));
        }
    }
    best
}

/// One invocation at `b`, without the recursive calls. `None` when `g(b) = Q`.
pub fn plan_backbone(
    instance: &ScenarioInstance,
    b: &PartialRealization,
    constants: &GreedyConstants,
) -> Result<Option<BackboneTrace>> {
    let g = instance.utility().as_ref();
    let q = g.goal();
    let g_entry = g.eval(b);
    if g_entry >= q {
        return Ok(None);
    }
    let free = b.free_items();
    if free.is_empty() {
        return Err(Error::GoalUnreachable(format!(
            "goal unmet at the full realization {b}"
        )));
    }
    let costs = instance.costs();
    let sample = instance.sample();
    let sigma = sigma_of(g, b);
    let gain = SigmaGain::new(g, b, &sigma);
    let budget = find_budget_with(free, &gain, costs, constants, Parallelism::Sequential)?;
    let big_b = budget.budget.clone();
    let initial: ItemSet = free.iter().filter(|&i| costs.get(i) <= &big_b).collect();
    let mut eligible = initial;
    let entry_weight = sample.weight_of(b);

    let mut cur = b.clone();
    let mut steps = Vec::new();
    let mut done = false;

    // Stage 1: knock sample weight off the backbone.
    let mut stage1_spent = Rational::zero();
    let stage1_exit = if entry_weight == 0 {
        LoopExit::Skipped
    } else {
        let h = stage1_function(instance, b, &sigma, initial)?;
        let mut r = ItemSet::EMPTY;
        let mut h_r = h.eval(r);
        loop {
            let Some((i, _)) = argmax(eligible, |i| (h.eval(r.with(i)) - &h_r) / costs.get(i))
            else {
                break LoopExit::Exhausted;
            };
            let h_next = h.eval(r.with(i));
            steps.push(BackboneStep {
                item: i,
                stage: Stage::One,
                gain: &h_next - &h_r,
                before: cur.clone(),
                reach_weight: sample.weight_of(&cur),
            });
            cur.assign(i, sigma[i].expect("free"));
            r = r.with(i);
            h_r = h_next;
            eligible = eligible.without(i);
            stage1_spent += costs.get(i);
            if g.eval(&cur) >= q {
                done = true;
                break LoopExit::Goal;
            }
            if stage1_spent >= big_b {
                break LoopExit::Budget;
            }
        }
    };

    // Stage 2: make progress on g along the backbone.
    let mut stage2_spent = Rational::zero();
    let stage2_exit = if done {
        LoopExit::Goal
    } else if eligible.is_empty() {
        LoopExit::Exhausted
    } else {
        loop {
            let g_cur = g.eval(&cur) as i64;
            let score = |i: usize| {
                let d = g.eval(&cur.with_state(i, sigma[i].expect("free"))) as i64 - g_cur;
                int(d) / costs.get(i)
            };
            let (i, _) = argmax(eligible, score).expect("eligible is nonempty");
            let s = sigma[i].expect("free");
            steps.push(BackboneStep {
                item: i,
                stage: Stage::Two,
                gain: int(g.eval(&cur.with_state(i, s)) as i64 - g_cur),
                before: cur.clone(),
                reach_weight: sample.weight_of(&cur),
            });
            cur.assign(i, s);
            eligible = eligible.without(i);
            stage2_spent += costs.get(i);
            if g.eval(&cur) >= q {
                break LoopExit::Goal;
            }
            if stage2_spent >= big_b {
                break LoopExit::Budget;
            }
            if eligible.is_empty() {
                break LoopExit::Exhausted;
            }
        }
    };

    let c_y_weighted = steps.iter().fold(Rational::zero(), |acc, s| {
        acc + Rational::from_integer(s.reach_weight.into()) * costs.get(s.item)
    });
    let c_y = if entry_weight == 0 {
        Rational::zero()
    } else {
        &c_y_weighted / Rational::from_integer(entry_weight.into())
    };
    let g_final = g.eval(&cur);
    Ok(Some(BackboneTrace {
        b: b.clone(),
        goal: q,
        g_entry,
        entry_weight,
        sigma,
        budget,
        eligible: initial.iter().collect(),
        steps,
        stage1_exit,
        stage2_exit,
        stage1_spent,
        stage2_spent,
        final_b: cur,
        g_final,
        c_y_weighted,
        c_y,
    }))
}

/// Mixed Greedy over one instance, with a cache of per-invocation plans.
pub struct MixedGreedy {
    instance: ScenarioInstance,
    constants: GreedyConstants,
    cache: Mutex<HashMap<PartialRealization, Arc<Option<BackboneTrace>>>>,
}

impl MixedGreedy {
    pub fn new(instance: ScenarioInstance) -> Self {
        Self {
            instance,
            constants: solve_chi(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn instance(&self) -> &ScenarioInstance {
        &self.instance
    }

    pub fn plan(&self, b: &PartialRealization) -> Result<Arc<Option<BackboneTrace>>> {
        if let Some(p) = self.cache.lock().expect("plan cache").get(b) {
            return Ok(p.clone());
        }
        let p = Arc::new(plan_backbone(&self.instance, b, &self.constants)?);
        self.cache
            .lock()
            .expect("plan cache")
            .insert(b.clone(), p.clone());
        Ok(p)
    }

    /// The full tree below `b` and the trace of every invocation in it, in
    /// the order they were made.
    pub fn build_tree(
        &self,
        b: &PartialRealization,
        node_cap: usize,
    ) -> Result<(DecisionTree, Vec<BackboneTrace>)> {
        let mut t = DecisionTree::builder();
        let mut traces = Vec::new();
        let root = self.build(b, &mut t, &mut traces, node_cap)?;
        t.set_root(root);
        Ok((t, traces))
    }

    fn build(
        &self,
        b: &PartialRealization,
        t: &mut DecisionTree,
        traces: &mut Vec<BackboneTrace>,
        cap: usize,
    ) -> Result<usize> {
        if t.num_nodes() >= cap {
            return Err(Error::EnumerationTooLarge {
                size: cap as u128 + 1,
                limit: cap as u128,
            });
        }
        let Some(plan) = plan_backbone(&self.instance, b, &self.constants)? else {
            return Ok(t.push(Node::Leaf));
        };
        let k = self.instance.num_states();
        let mut below = self.build(&plan.final_b, t, traces, cap)?;
        for step in plan.steps.iter().rev() {
            let sigma_i = plan.sigma[step.item].expect("free");
            let mut children = Vec::with_capacity(k);
            for s in 0..k as State {
                if s == sigma_i {
                    children.push(below);
                } else {
                    children.push(self.build(
                        &step.before.with_state(step.item, s),
                        t,
                        traces,
                        cap,
                    )?);
                }
            }
            below = t.push(Node::Internal {
                item: step.item,
                children,
            });
        }
        traces.push(plan);
        Ok(below)
    }
}

/// Mixed Greedy run online: every query replays the invocations from the root.
pub struct MixedGreedyPolicy {
    engine: Arc<MixedGreedy>,
}

impl MixedGreedyPolicy {
    pub fn new(instance: ScenarioInstance) -> Self {
        Self {
            engine: Arc::new(MixedGreedy::new(instance)),
        }
    }

    pub fn engine(&self) -> &MixedGreedy {
        &self.engine
    }
}

impl Policy for MixedGreedyPolicy {
    fn num_items(&self) -> usize {
        self.engine.instance.num_items()
    }
    fn num_states(&self) -> usize {
        self.engine.instance.num_states()
    }
    fn next_item(&self, observed: &PartialRealization) -> Result<Option<usize>> {
        let mut cur = PartialRealization::empty(observed.len());
        'invocation: loop {
            let plan = self.engine.plan(&cur)?;
            let Some(plan) = plan.as_ref() else {
                return Ok(None);
            };
            for step in &plan.steps {
                match observed.get(step.item) {
                    None => return Ok(Some(step.item)),
                    Some(s) if Some(s) == plan.sigma[step.item] => {}
                    Some(s) => {
                        cur = step.before.with_state(step.item, s);
                        continue 'invocation;
                    }
                }
            }
            cur = plan.final_b.clone();
        }
    }
}

pub const DEFAULT_TREE_CAP: usize = 100_000;

/// The explicit Mixed Greedy tree for the whole instance.
pub fn mixed_greedy(instance: &ScenarioInstance) -> Result<DecisionTree> {
    Ok(mixed_greedy_with_trace(instance)?.0)
}

pub fn mixed_greedy_with_trace(
    instance: &ScenarioInstance,
) -> Result<(DecisionTree, Vec<BackboneTrace>)> {
    MixedGreedy::new(instance.clone()).build_tree(
        &PartialRealization::empty(instance.num_items()),
        DEFAULT_TREE_CAP,
    )
}

pub fn mixed_greedy_policy(instance: &ScenarioInstance) -> Strategy {
    Strategy::Policy(Arc::new(MixedGreedyPolicy::new(instance.clone())))
}

/// Mixed Greedy on `g_S` (goal `Qm`), then the lowest free items until `g = Q`.
pub fn scenario_mixed_greedy(instance: &ScenarioInstance) -> Result<Strategy> {
    let gs = make_gs(instance.utility().clone(), instance.sample().clone())?;
    let inner = MixedGreedyPolicy::new(instance.with_utility(gs)?);
    Ok(Strategy::Policy(Arc::new(SuffixPolicy::new(
        Arc::new(inner),
        instance.utility().clone(),
    )?)))
}

#[derive(Clone, Debug, Serialize)]
pub struct HpAudit {
    /// `cost(h_p, S^Y)`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub cost_backbone: Rational,
    /// `cost(h_p, S¹)`
    #[serde(serialize_with = "crate::rational::serialize")]
    pub cost_stage1: Rational,
    pub holds: bool,
    /// `cost(h_p, S^Y) = c_Y`
    pub matches_c_y: bool,
    /// `h_p(R) · w(b) = h(R)` on every prefix of the backbone's stage-1 items.
    pub matches_stage1: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BackboneAudit {
    pub b: PartialRealization,
    pub entry_weight: u64,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub c_y_weighted: Rational,
    /// `w(b) · C*` of the instance induced by `b`.
    #[serde(serialize_with = "crate::rational::serialize")]
    pub optimal_weighted: Rational,
    /// `c_Y ≤ 24 C*`
    pub c_y_holds: bool,
    /// `None` when `w(b) = 0`.
    pub hp: Option<HpAudit>,
    pub budget_exits: bool,
    pub progress_holds: bool,
}

/// Checks one invocation's backbone against the oracle.
pub fn audit_trace(
    instance: &ScenarioInstance,
    trace: &BackboneTrace,
    oracle: &mut Oracle<'_>,
) -> Result<BackboneAudit> {
    let optimal_weighted = oracle.weighted_value(&trace.b)?;
    let c_y_holds = trace.c_y_weighted <= int(24) * &optimal_weighted;
    let hp = if trace.entry_weight == 0 {
        None
    } else {
        let hp = h_p_function(instance, &trace.b, &trace.sigma)?;
        let job = JobFunction::with_scale(&hp, instance.costs(), int(1))?;
        let cost_backbone = schedule_cost(&job, &trace.backbone_schedule(instance));
        let cost_stage1 = schedule_cost(&job, &trace.stage1_schedule(instance));
        let h = stage1_function(instance, &trace.b, &trace.sigma, trace.b.free_items())?;
        let w = Rational::from_integer(trace.entry_weight.into());
        let mut prefix = ItemSet::EMPTY;
        let mut matches_stage1 = hp.eval(prefix) * &w == h.eval(prefix);
        for s in &trace.steps {
            prefix = prefix.with(s.item);
            matches_stage1 &= hp.eval(prefix) * &w == h.eval(prefix);
        }
        Some(HpAudit {
            holds: cost_backbone <= int(3) * &cost_stage1,
            matches_c_y: cost_backbone == trace.c_y,
            matches_stage1,
            cost_backbone,
            cost_stage1,
        })
    };
    Ok(BackboneAudit {
        b: trace.b.clone(),
        entry_weight: trace.entry_weight,
        c_y_weighted: trace.c_y_weighted.clone(),
        optimal_weighted,
        c_y_holds,
        hp,
        budget_exits: trace.budget_exits(),
        progress_holds: trace.stage_progress_holds(),
    })
}

#[derive(Clone, Debug, Serialize)]
#[allow(clippy::large_enum_variant)]
pub enum AuditOutcome {
    Audited(BackboneAudit),
    /// `g(b) = Q`: the invocation returns a leaf and has no backbone.
    Leaf,
    Skipped(String),
}

/// Audits the invocation at `b`; skipped when the oracle refuses the instance.
pub fn backbone_audit(
    instance: &ScenarioInstance,
    b: &PartialRealization,
    limits: OracleLimits,
) -> Result<AuditOutcome> {
    let mut oracle = match Oracle::new(instance, limits) {
        Ok(o) => o,
        Err(Error::OracleBudgetExceeded(why)) => return Ok(AuditOutcome::Skipped(why)),
        Err(e) => return Err(e),
    };
    match plan_backbone(instance, b, &solve_chi())? {
        None => Ok(AuditOutcome::Leaf),
        Some(trace) => Ok(AuditOutcome::Audited(audit_trace(
            instance,
            &trace,
            &mut oracle,
        )?)),
    }
}

/// Audits every invocation made while building the full tree.
pub fn audit_all(instance: &ScenarioInstance, limits: OracleLimits) -> Result<Vec<BackboneAudit>> {
    let mut oracle = Oracle::new(instance, limits)?;
    let (_, traces) = mixed_greedy_with_trace(instance)?;
    traces
        .iter()
        .map(|t| audit_trace(instance, t, &mut oracle))
        .collect()
}
