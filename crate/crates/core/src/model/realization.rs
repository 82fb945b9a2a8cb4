use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported item count; item sets are stored as 64-bit masks.
pub const MAX_ITEMS: usize = 64;

/// Index of a state within a [`StateAlphabet`].
pub type State = u8;

/// The ordered set of states an item may take. The order drives every
/// deterministic tie-break in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateAlphabet {
    names: Vec<String>,
}

impl StateAlphabet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidAlphabet(
                "at least two states are required".into(),
            ));
        }
        if names.len() > State::MAX as usize {
            return Err(Error::InvalidAlphabet(format!(
                "too many states: {}",
                names.len()
            )));
        }
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() || a == "*" {
                return Err(Error::InvalidAlphabet(format!(
                    "reserved or empty state name {a:?}"
                )));
            }
            if names[..i].contains(a) {
                return Err(Error::InvalidAlphabet(format!("duplicate state {a:?}")));
            }
        }
        Ok(Self { names })
    }

    /// `{"0", "1"}`
    pub fn binary() -> Self {
        Self::new(["0", "1"]).expect("valid")
    }

    /// States named `"0"`, `"1"`, ... `"k-1"`.
    pub fn numbered(k: usize) -> Result<Self> {
        Self::new((0..k).map(|s| s.to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, s: State) -> &str {
        &self.names[s as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<State> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as State)
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        0..self.names.len() as State
    }
}

/// A set of item indices, stored as a bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet(pub u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ITEMS);
        if n == 64 {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << n) - 1)
        }
    }

    pub fn single(i: usize) -> Self {
        ItemSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn with(self, i: usize) -> Self {
        ItemSet(self.0 | 1u64 << i)
    }

    pub fn without(self, i: usize) -> Self {
        ItemSet(self.0 & !(1u64 << i))
    }

    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = ItemSet> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == full {
                None
            } else {
                Some((s.wrapping_sub(full)) & full)
            };
            Some(ItemSet(s))
        })
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        iter.into_iter().fold(ItemSet::EMPTY, ItemSet::with)
    }
}

/// Known item states, with `None` standing for the unknown marker `*`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialRealization {
    entries: Vec<Option<State>>,
}

impl PartialRealization {
    /// `(*, ..., *)`
    pub fn empty(n: usize) -> Self {
        Self {
            entries: vec![None; n],
        }
    }

    pub fn from_entries(entries: Vec<Option<State>>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Option<State>] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> Option<State> {
        self.entries[i]
    }

    pub fn is_set(&self, i: usize) -> bool {
        self.entries[i].is_some()
    }

    pub fn set_items(&self) -> ItemSet {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_some())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn free_items(&self) -> ItemSet {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn num_set(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    pub fn is_full(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// `b_{i <- state}`. Fails if `i` is out of range or already set.
    pub fn extend(&self, i: usize, state: State) -> Result<Self> {
        match self.entries.get(i) {
            None => Err(Error::ItemOutOfRange {
                item: i,
                n: self.len(),
            }),
            Some(Some(_)) => Err(Error::PositionAlreadySet { item: i }),
            Some(None) => {
                let mut next = self.clone();
                next.entries[i] = Some(state);
                Ok(next)
            }
        }
    }

    /// In-place `b_i <- state`; the caller guarantees `b_i = *`.
    pub(crate) fn assign(&mut self, i: usize, state: State) {
        debug_assert!(self.entries[i].is_none());
        self.entries[i] = Some(state);
    }

    pub(crate) fn with_state(&self, i: usize, state: State) -> Self {
        let mut next = self.clone();
        next.assign(i, state);
        next
    }

    /// `self ⪰ other`: agrees with `other` wherever `other` is set.
    pub fn is_extension_of(&self, other: &PartialRealization) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: other.len(),
                found: self.len(),
            });
        }
        Ok(self.extends_unchecked(other))
    }

    pub(crate) fn extends_unchecked(&self, other: &PartialRealization) -> bool {
        other
            .entries
            .iter()
            .zip(&self.entries)
            .all(|(o, s)| o.is_none() || o == s)
    }

    /// Restriction to the items of `keep`, in ascending order.
    pub fn restrict(&self, keep: ItemSet) -> PartialRealization {
        PartialRealization {
            entries: keep.iter().map(|i| self.entries[i]).collect(),
        }
    }

    pub fn check_states(&self, num_states: usize) -> Result<()> {
        for s in self.entries.iter().flatten() {
            if *s as usize >= num_states {
                return Err(Error::StateOutOfRange {
                    state: *s as usize,
                    size: num_states,
                });
            }
        }
        Ok(())
    }

    pub fn display_with(&self, alphabet: &StateAlphabet) -> String {
        let parts: Vec<&str> = self
            .entries
            .iter()
            .map(|e| match e {
                Some(s) => alphabet.name(*s),
                None => "*",
            })
            .collect();
        format!("({})", parts.join(","))
    }
}

impl fmt::Debug for PartialRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match e {
                Some(s) => write!(f, "{s}")?,
                None => write!(f, "*")?,
            }
        }
        write!(f, ")")
    }
}

impl fmt::Display for PartialRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<&Realization> for PartialRealization {
    fn from(a: &Realization) -> Self {
        a.to_partial()
    }
}

impl Serialize for PartialRealization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A full assignment of states to items.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Realization(pub Vec<State>);

impl Realization {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn state(&self, i: usize) -> State {
        self.0[i]
    }

    pub fn to_partial(&self) -> PartialRealization {
        PartialRealization {
            entries: self.0.iter().map(|&s| Some(s)).collect(),
        }
    }

    /// `self ⪰ b`
    pub fn extends(&self, b: &PartialRealization) -> bool {
        b.entries
            .iter()
            .zip(&self.0)
            .all(|(e, s)| e.is_none_or(|e| e == *s))
    }

    pub fn restrict(&self, keep: ItemSet) -> Realization {
        Realization(keep.iter().map(|i| self.0[i]).collect())
    }
}

/// Dense indexing of `(Γ ∪ {*})^n`: digit 0 is `*`, digit `s + 1` is state `s`.
#[derive(Clone, Copy, Debug)]
pub struct PartialSpace {
    pub n: usize,
    pub k: usize,
    size: usize,
}

impl PartialSpace {
    pub fn new(n: usize, k: usize, limit: usize) -> Result<Self> {
        let size = (k as u128 + 1).checked_pow(n as u32).unwrap_or(u128::MAX);
        if size > limit as u128 {
            return Err(Error::EnumerationTooLarge {
                size,
                limit: limit as u128,
            });
        }
        Ok(Self {
            n,
            k,
            size: size as usize,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn place(&self, i: usize) -> usize {
        (self.k + 1).pow(i as u32)
    }

    pub fn encode(&self, b: &PartialRealization) -> usize {
        b.entries
            .iter()
            .enumerate()
            .map(|(i, e)| e.map_or(0, |s| s as usize + 1) * self.place(i))
            .sum()
    }

    pub fn decode(&self, mut code: usize) -> PartialRealization {
        let base = self.k + 1;
        let entries = (0..self.n)
            .map(|_| {
                let d = code % base;
                code /= base;
                (d > 0).then(|| (d - 1) as State)
            })
            .collect();
        PartialRealization { entries }
    }

    pub fn digit(&self, code: usize, i: usize) -> usize {
        code / self.place(i) % (self.k + 1)
    }
}

/// Every realization in `Γ^n`, in lexicographic order with item 0 slowest.
pub fn all_realizations(n: usize, k: usize) -> impl Iterator<Item = Realization> {
    let total = (k as u128).pow(n as u32);
    (0..total).map(move |mut code| {
        let mut states = vec![0 as State; n];
        for slot in states.iter_mut().rev() {
            *slot = (code % k as u128) as State;
            code /= k as u128;
        }
        Realization(states)
    })
}
