//! Seeded random instances for tests and benchmarks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance_file::{CoverEntry, InstanceFile, SampleEntry, UtilitySpec, FORMAT_VERSION};
use crate::model::MAX_ITEMS;
use crate::rational::{int, to_decimal, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    Coverage,
    KOfN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wrap {
    None,
    GS,
    GW,
}

/// A base family, optionally wrapped. Written `coverage`, `k_of_n`,
/// `g_S:coverage`, `g_W:k_of_n` and so on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Family {
    pub base: Base,
    pub wrap: Wrap,
}

impl Family {
    pub const fn plain(base: Base) -> Self {
        Self {
            base,
            wrap: Wrap::None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.base {
            Base::Coverage => "coverage",
            Base::KOfN => "k_of_n",
        };
        match self.wrap {
            Wrap::None => f.write_str(base),
            Wrap::GS => write!(f, "g_S:{base}"),
            Wrap::GW => write!(f, "g_W:{base}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (wrap, base) = match s.split_once(':') {
            Some(("g_S", b)) => (Wrap::GS, b),
            Some(("g_W", b)) => (Wrap::GW, b),
            Some(_) => {
                return Err(Error::InvalidArgument(format!(
                    "unknown wrapper in family {s:?}"
                )))
            }
            None => (Wrap::None, s),
        };
        let base = match base {
            "coverage" => Base::Coverage,
            "k_of_n" => Base::KOfN,
            _ => return Err(Error::InvalidArgument(format!("unknown family {s:?}"))),
        };
        Ok(Self { base, wrap })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub seed: u64,
    pub n: usize,
    /// Forced to 2 for `k_of_n`.
    pub states: usize,
    /// Capped at `states^n` since rows are distinct.
    pub sample_size: usize,
    pub cost_min: Rational,
    pub cost_max: Rational,
    pub family: Family,
}

impl GenSpec {
    pub fn new(seed: u64, n: usize, family: Family) -> Self {
        Self {
            seed,
            n,
            states: 2,
            sample_size: 4,
            cost_min: int(1),
            cost_max: int(4),
            family,
        }
    }
}

/// Costs are drawn in steps of 1/4 and weights from 1..=5.
pub fn generate(spec: &GenSpec) -> Result<InstanceFile> {
    let n = spec.n;
    if n == 0 || n > MAX_ITEMS {
        return Err(Error::InvalidArgument(format!(
            "n must be in 1..={MAX_ITEMS}, got {n}"
        )));
    }
    if spec.sample_size == 0 {
        return Err(Error::EmptySample);
    }
    let k = match spec.family.base {
        Base::KOfN => 2,
        Base::Coverage => spec.states,
    };
    if !(2..=255).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "states must be in 2..=255, got {k}"
        )));
    }
    let quarter = |r: &Rational| r * int(4);
    let lo = quarter(&spec.cost_min).ceil().to_integer().to_i64();
    let hi = quarter(&spec.cost_max).floor().to_integer().to_i64();
    let (lo, hi) = match (lo, hi) {
        (Some(lo), Some(hi)) if lo >= 1 && lo <= hi => (lo, hi),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "cost range [{}, {}] holds no positive multiple of 1/4",
                spec.cost_min, spec.cost_max
            )))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let states: Vec<String> = (0..k).map(|s| s.to_string()).collect();

    let space = (k as f64).powi(n as i32);
    let rows = if (spec.sample_size as f64) < space {
        spec.sample_size
    } else {
        space as usize
    };
    let mut seen = BTreeSet::new();
    let mut sample = Vec::with_capacity(rows);
    while sample.len() < rows {
        let a: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        if seen.insert(a.clone()) {
            let weight = rng.gen_range(1..=5);
            sample.push(SampleEntry {
                assignment: a.iter().map(|&s| states[s].clone()).collect(),
                weight,
            });
        }
    }

    let costs = (0..n)
        .map(|_| {
            let c = Rational::new(rng.gen_range(lo..=hi).into(), 4.into());
            to_decimal(&c).expect("quarters terminate")
        })
        .collect();

    let base = match spec.family.base {
        Base::KOfN => UtilitySpec::KOfN {
            k: rng.gen_range(1..=n),
        },
        Base::Coverage => coverage(&mut rng, n, &states),
    };
    let utility = match spec.family.wrap {
        Wrap::None => base,
        Wrap::GS => UtilitySpec::GS {
            inner: Box::new(base),
        },
        Wrap::GW => UtilitySpec::GW {
            inner: Box::new(base),
        },
    };
    Ok(InstanceFile {
        version: FORMAT_VERSION,
        n,
        states,
        sample,
        costs,
        utility,
    })
}

// Every element gets an owner that covers it in all states, which makes the
// goal reachable on every full realization. The rest is random extras.
fn coverage(rng: &mut ChaCha8Rng, n: usize, states: &[String]) -> UtilitySpec {
    let universe = rng.gen_range(n..=2 * n);
    let mut owners: Vec<usize> = (0..universe).map(|e| e % n).collect();
    owners.shuffle(rng);
    let mut covers = Vec::new();
    for item in 0..n {
        for state in states {
            let elements: Vec<u32> = (0..universe)
                .filter(|&e| owners[e] == item || rng.gen_bool(0.3))
                .map(|e| e as u32)
                .collect();
            if !elements.is_empty() {
                covers.push(CoverEntry {
                    item: item + 1,
                    state: state.clone(),
                    elements,
                });
            }
        }
    }
    UtilitySpec::Coverage {
        universe_size: universe,
        covers,
    }
}

/// Desk-scale spec used by the acceptance suite and benches: `n ≤ 5`,
/// up to three states, up to eight rows.
pub fn desk_spec(seed: u64) -> GenSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let families = [
        Family::plain(Base::Coverage),
        Family::plain(Base::KOfN),
        Family {
            base: Base::Coverage,
            wrap: Wrap::GS,
        },
        Family {
            base: Base::KOfN,
            wrap: Wrap::GW,
        },
    ];
    let family = families[rng.gen_range(0..families.len())];
    let n = rng.gen_range(2..=5);
    let states = rng.gen_range(2..=3);
    GenSpec {
        seed,
        n,
        states,
        sample_size: rng.gen_range(1..=8),
        cost_min: Rational::new(1.into(), 4.into()),
        cost_max: int(3),
        family,
    }
}
