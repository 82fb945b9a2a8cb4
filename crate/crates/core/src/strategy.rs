//! Strategies as explicit trees or as online policies.

use std::sync::Arc;

use num::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    follow, CostVector, DecisionTree, Node, PartialRealization, Realization, ScenarioInstance,
    State,
};
use crate::rational::Rational;
use crate::utility::UtilityRef;

/// Decides the next query from the states observed so far.
pub trait Policy: Send + Sync {
    fn num_items(&self) -> usize;
    fn num_states(&self) -> usize;
    /// `None` stops the strategy.
    fn next_item(&self, observed: &PartialRealization) -> Result<Option<usize>>;
}

#[derive(Clone)]
pub enum Strategy {
    Tree(DecisionTree),
    Policy(Arc<dyn Policy>),
}

impl std::fmt::Debug for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Tree(t) => write!(f, "Strategy::Tree({} nodes)", t.num_nodes()),
            Strategy::Policy(_) => f.write_str("Strategy::Policy"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Execution {
    pub items: Vec<usize>,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub cost: Rational,
    pub terminal: PartialRealization,
}

/// Runs `policy`, asking `state_of` for each queried item's state.
pub fn execute_online(
    policy: &dyn Policy,
    mut state_of: impl FnMut(usize) -> State,
    costs: &CostVector,
) -> Result<Execution> {
    let n = policy.num_items();
    let mut b = PartialRealization::empty(n);
    let mut items = Vec::new();
    let mut cost = Rational::zero();
    while let Some(i) = policy.next_item(&b)? {
        if i >= n {
            return Err(Error::ItemOutOfRange { item: i, n });
        }
        if b.is_set(i) {
            return Err(Error::MalformedTree(format!("policy repeated item {i}")));
        }
        let s = state_of(i);
        if s as usize >= policy.num_states() {
            return Err(Error::StateOutOfRange {
                state: s as usize,
                size: policy.num_states(),
            });
        }
        b.assign(i, s);
        cost += costs.get(i);
        items.push(i);
    }
    Ok(Execution {
        items,
        cost,
        terminal: b,
    })
}

/// Expands a policy into a tree, failing once more than `node_cap` nodes are needed.
pub fn materialize(policy: &dyn Policy, node_cap: usize) -> Result<DecisionTree> {
    fn go(
        p: &dyn Policy,
        b: &PartialRealization,
        t: &mut DecisionTree,
        cap: usize,
    ) -> Result<usize> {
        if t.num_nodes() >= cap {
            return Err(Error::EnumerationTooLarge {
                size: cap as u128 + 1,
                limit: cap as u128,
            });
        }
        match p.next_item(b)? {
            None => Ok(t.push(Node::Leaf)),
            Some(i) => {
                if i >= b.len() || b.is_set(i) {
                    return Err(Error::MalformedTree(format!(
                        "policy chose item {i} at {b}"
                    )));
                }
                let mut children = Vec::with_capacity(p.num_states());
                for s in 0..p.num_states() {
                    children.push(go(p, &b.with_state(i, s as State), t, cap)?);
                }
                Ok(t.push(Node::Internal { item: i, children }))
            }
        }
    }
    let mut t = DecisionTree::builder();
    let root = go(
        policy,
        &PartialRealization::empty(policy.num_items()),
        &mut t,
        node_cap,
    )?;
    t.set_root(root);
    Ok(t)
}

pub const DEFAULT_NODE_CAP: usize = 100_000;

impl Strategy {
    pub fn execute(&self, a: &Realization, costs: &CostVector) -> Result<Execution> {
        match self {
            Strategy::Tree(t) => {
                let (cost, terminal) = follow(t, a, costs)?;
                let items = query_order(t, a);
                Ok(Execution {
                    items,
                    cost,
                    terminal,
                })
            }
            Strategy::Policy(p) => execute_online(p.as_ref(), |i| a.state(i), costs),
        }
    }

    pub fn to_tree(&self, node_cap: usize) -> Result<DecisionTree> {
        match self {
            Strategy::Tree(t) => Ok(t.clone()),
            Strategy::Policy(p) => materialize(p.as_ref(), node_cap),
        }
    }

    /// `Σ_a w(a)/W · κ(a)` over the sample rows.
    pub fn expected_cost(&self, instance: &ScenarioInstance) -> Result<Rational> {
        let sample = instance.sample();
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut total = Rational::zero();
        for row in sample.rows() {
            let run = self.execute(&row.realization, instance.costs())?;
            total += run.cost * Rational::from_integer(row.weight.into());
        }
        Ok(total / Rational::from_integer(sample.total_weight().into()))
    }
}

fn query_order(t: &DecisionTree, a: &Realization) -> Vec<usize> {
    let mut out = Vec::new();
    let mut id = t.root();
    while let Node::Internal { item, children } = t.node(id) {
        out.push(*item);
        id = children[a.state(*item) as usize];
    }
    out
}

/// Runs `inner` until it stops, then queries the lowest free item until `g(b) = Q`.
pub struct SuffixPolicy {
    inner: Arc<dyn Policy>,
    g: UtilityRef,
}

impl SuffixPolicy {
    pub fn new(inner: Arc<dyn Policy>, g: UtilityRef) -> Result<Self> {
        if inner.num_items() != g.num_items() {
            return Err(Error::DimensionMismatch {
                expected: g.num_items(),
                found: inner.num_items(),
            });
        }
        Ok(Self { inner, g })
    }
}

impl Policy for SuffixPolicy {
    fn num_items(&self) -> usize {
        self.inner.num_items()
    }
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }
    fn next_item(&self, observed: &PartialRealization) -> Result<Option<usize>> {
        if let Some(i) = self.inner.next_item(observed)? {
            return Ok(Some(i));
        }
        if self.g.eval(observed) >= self.g.goal() {
            return Ok(None);
        }
        match observed.free_items().iter().next() {
            Some(i) => Ok(Some(i)),
            None => Err(Error::GoalUnreachable(format!(
                "goal unmet at the full realization {observed}"
            ))),
        }
    }
}

/// A tree used as a policy: walks from the root along the observed states.
pub struct TreePolicy {
    tree: DecisionTree,
    n: usize,
    k: usize,
}

impl TreePolicy {
    pub fn new(tree: DecisionTree, n: usize, k: usize) -> Self {
        Self { tree, n, k }
    }
}

impl Policy for TreePolicy {
    fn num_items(&self) -> usize {
        self.n
    }
    fn num_states(&self) -> usize {
        self.k
    }
    fn next_item(&self, observed: &PartialRealization) -> Result<Option<usize>> {
        let mut id = self.tree.root();
        loop {
            match self.tree.node(id) {
                Node::Leaf => return Ok(None),
                Node::Internal { item, children } => match observed.get(*item) {
                    None => return Ok(Some(*item)),
                    Some(s) => {
                        id = *children.get(s as usize).ok_or_else(|| {
                            Error::MalformedTree(format!("missing child for state {s}"))
                        })?
                    }
                },
            }
        }
    }
}
