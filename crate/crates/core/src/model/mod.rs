//! The shared data model: realizations, samples, costs, trees and instances.

mod instance;
mod realization;
mod sample;
mod tree;

pub use instance::ScenarioInstance;
pub use realization::{
    all_realizations, ItemSet, PartialRealization, PartialSpace, Realization, State, StateAlphabet,
    MAX_ITEMS,
};
pub use sample::{CostVector, SampleRow, WeightedSample};
pub use tree::{
    expected_cost, follow, validate_tree, DecisionTree, Node, TreeValidation, ValidationScope,
    Violation,
};
