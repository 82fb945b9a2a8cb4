use num::Zero;
use serde::{Deserialize, Serialize};

use super::realization::{PartialRealization, Realization, State};
use super::sample::{CostVector, WeightedSample};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::utility::Utility;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf,
    /// `children[γ]` is the γ-child.
    Internal {
        item: usize,
        children: Vec<usize>,
    },
}

/// An adaptive strategy stored as an arena of nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    root: usize,
}

impl DecisionTree {
    pub fn leaf() -> Self {
        Self {
            nodes: vec![Node::Leaf],
            root: 0,
        }
    }

    /// An empty arena; call [`DecisionTree::set_root`] once built.
    pub fn builder() -> Self {
        Self {
            nodes: Vec::new(),
            root: 0,
        }
    }

    pub fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn set_root(&mut self, root: usize) {
        self.root = root;
    }

    pub fn set_children(&mut self, id: usize, kids: Vec<usize>) {
        if let Node::Internal { children, .. } = &mut self.nodes[id] {
            *children = kids;
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Queries `items` in order on every path.
    pub fn chain(items: &[usize], num_states: usize) -> Self {
        fn build(t: &mut DecisionTree, items: &[usize], k: usize) -> usize {
            match items.split_first() {
                None => t.push(Node::Leaf),
                Some((&item, rest)) => {
                    let children = (0..k).map(|_| build(t, rest, k)).collect();
                    t.push(Node::Internal { item, children })
                }
            }
        }
        let mut t = Self::builder();
        t.root = build(&mut t, items, num_states);
        t
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, id: usize) -> usize {
            match &t.nodes[id] {
                Node::Leaf => 0,
                Node::Internal { children, .. } => {
                    1 + children.iter().map(|&c| go(t, c)).max().unwrap_or(0)
                }
            }
        }
        go(self, self.root)
    }
}

fn child(tree: &DecisionTree, id: usize, state: State) -> Result<(usize, usize)> {
    match tree.nodes.get(id) {
        None => Err(Error::MalformedTree(format!("node {id} does not exist"))),
        Some(Node::Leaf) => Err(Error::MalformedTree(format!("node {id} is a leaf"))),
        Some(Node::Internal { item, children }) => match children.get(state as usize) {
            Some(&c) if c < tree.nodes.len() => Ok((*item, c)),
            _ => Err(Error::MalformedTree(format!(
                "node {id} has no child for state {state}"
            ))),
        },
    }
}

/// `κ(τ, a)` and the partial realization observed on the way to the leaf.
pub fn follow(
    tree: &DecisionTree,
    a: &Realization,
    costs: &CostVector,
) -> Result<(Rational, PartialRealization)> {
    let n = a.len();
    if costs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: costs.len(),
        });
    }
    let mut b = PartialRealization::empty(n);
    let mut kappa = Rational::zero();
    let mut id = tree.root;
    for _ in 0..=n {
        match tree.nodes.get(id) {
            None => return Err(Error::MalformedTree(format!("node {id} does not exist"))),
            Some(Node::Leaf) => return Ok((kappa, b)),
            Some(Node::Internal { item, .. }) => {
                let i = *item;
                if i >= n {
                    return Err(Error::ItemOutOfRange { item: i, n });
                }
                if b.is_set(i) {
                    return Err(Error::MalformedTree(format!("item {i} repeats on a path")));
                }
                let s = a.state(i);
                b.assign(i, s);
                kappa += costs.get(i);
                id = child(tree, id, s)?.1;
            }
        }
    }
    Err(Error::MalformedTree(
        "path longer than the item count".into(),
    ))
}

/// `Σ_a w(a)/W · κ(τ, a)`.
pub fn expected_cost(
    tree: &DecisionTree,
    sample: &WeightedSample,
    costs: &CostVector,
) -> Result<Rational> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut total = Rational::zero();
    for row in sample.rows() {
        let (kappa, _) = follow(tree, &row.realization, costs)?;
        total += kappa * Rational::from_integer(row.weight.into());
    }
    Ok(total / Rational::from_integer(sample.total_weight().into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// A leaf whose observed partial realization misses the goal.
    GoalMissed {
        b: PartialRealization,
        value: u64,
    },
    RepeatedItem {
        b: PartialRealization,
        item: usize,
    },
    Structure(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TreeValidation {
    Valid,
    Invalid(Vec<Violation>),
    /// The node budget ran out before the walk finished.
    Unchecked {
        visited: usize,
    },
}

impl TreeValidation {
    pub fn is_valid(&self) -> bool {
        matches!(self, TreeValidation::Valid)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum ValidationScope<'a> {
    /// Every realization in `Γ^n`, by walking every node of the tree.
    AllRealizations {
        node_budget: usize,
    },
    SampleRows(&'a WeightedSample),
}

/// Checks that each realization ends at a leaf where `g(b) = Q` and that no
/// item repeats along a path. Every node of a well-formed tree is reached by
/// some realization, so walking the tree covers all of `Γ^n`.
pub fn validate_tree(
    tree: &DecisionTree,
    g: &dyn Utility,
    scope: ValidationScope<'_>,
) -> TreeValidation {
    let n = g.num_items();
    let k = g.num_states();
    let q = g.goal();
    let mut violations = Vec::new();
    match scope {
        ValidationScope::SampleRows(sample) => {
            let costs = CostVector::unit(n);
            for row in sample.rows() {
                match follow(tree, &row.realization, &costs) {
                    Ok((_, b)) => {
                        let v = g.eval(&b);
                        if v != q {
                            violations.push(Violation::GoalMissed { b, value: v });
                        }
                    }
                    Err(e) => violations.push(Violation::Structure(e.to_string())),
                }
            }
        }
        ValidationScope::AllRealizations { node_budget } => {
            let mut stack = vec![(tree.root, PartialRealization::empty(n))];
            let mut visited = 0usize;
            while let Some((id, b)) = stack.pop() {
                visited += 1;
                if visited > node_budget {
                    return TreeValidation::Unchecked {
                        visited: visited - 1,
                    };
                }
                match tree.nodes.get(id) {
                    None => {
                        violations.push(Violation::Structure(format!("node {id} does not exist")))
                    }
                    Some(Node::Leaf) => {
                        let v = g.eval(&b);
                        if v != q {
                            violations.push(Violation::GoalMissed { b, value: v });
                        }
                    }
                    Some(Node::Internal { item, children }) => {
                        let i = *item;
                        if i >= n {
                            violations.push(Violation::Structure(format!("item {i} out of range")));
                        } else if b.is_set(i) {
                            violations.push(Violation::RepeatedItem { b, item: i });
                        } else if children.len() != k {
                            violations.push(Violation::Structure(format!(
                                "node {id} has {} children, expected {k}",
                                children.len()
                            )));
                        } else {
                            for (s, &c) in children.iter().enumerate().rev() {
                                stack.push((c, b.with_state(i, s as State)));
                            }
                        }
                    }
                }
            }
        }
    }
    if violations.is_empty() {
        TreeValidation::Valid
    } else {
        TreeValidation::Invalid(violations)
    }
}
