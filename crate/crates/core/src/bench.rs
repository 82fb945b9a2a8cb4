//! Ratio studies: each algorithm's expected cost against the optimum.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num::{One, Zero};
use serde::Serialize;

use crate::adaptive::scenario_adaptive_greedy;
use crate::error::{Error, Result};
use crate::mixed::{mixed_greedy, scenario_mixed_greedy};
use crate::model::ScenarioInstance;
use crate::oracle::{optimal_tree_with, OracleLimits};
use crate::par::{map_slice, Parallelism};
use crate::rational::{int, ln_upper_bound, to_f64, Rational};
use crate::strategy::Strategy;
use crate::utility::{compute_rho_with, make_gs, RhoScope, Utility, DEFAULT_ENUMERATION_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Mixed,
    ScenarioMixed,
    ScenarioAdaptive,
    Optimal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Mixed,
        Algorithm::ScenarioMixed,
        Algorithm::ScenarioAdaptive,
        Algorithm::Optimal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mixed => "mixed",
            Algorithm::ScenarioMixed => "scenario-mixed",
            Algorithm::ScenarioAdaptive => "scenario-adaptive",
            Algorithm::Optimal => "optimal",
        }
    }

    /// The strategy this algorithm produces. `Optimal` uses the oracle and
    /// fails outside `limits`.
    pub fn solve(self, instance: &ScenarioInstance, limits: OracleLimits) -> Result<Strategy> {
        match self {
            Algorithm::Mixed => Ok(Strategy::Tree(mixed_greedy(instance)?)),
            Algorithm::ScenarioMixed => scenario_mixed_greedy(instance),
            Algorithm::ScenarioAdaptive => scenario_adaptive_greedy(instance),
            Algorithm::Optimal => Ok(Strategy::Tree(optimal_tree_with(instance, limits)?.0)),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm {s:?}")))
    }
}

/// A ratio ceiling; `Unbounded` when `η = 0` or undefined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ceiling {
    Finite(Rational),
    Unbounded,
}

impl Serialize for Ceiling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ceiling::Finite(r) => s.serialize_str(&r.to_string()),
            Ceiling::Unbounded => s.serialize_str("inf"),
        }
    }
}

impl fmt::Display for Ceiling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ceiling::Finite(r) => write!(f, "{:.4}", to_f64(r)),
            Ceiling::Unbounded => f.write_str("inf"),
        }
    }
}

/// `1 + 24 · (1/η) · L` with `L ≥ ln q` a rational upper bound.
pub fn mixed_ceiling(q: u64, eta: Option<&Rational>) -> Ceiling {
    match eta {
        Some(eta) if !eta.is_zero() => {
            Ceiling::Finite(Rational::one() + int(24) * ln_upper_bound(q) / eta)
        }
        _ => Ceiling::Unbounded,
    }
}

/// `cost ≤ ceiling · C*`, exactly. With `C* = 0` the cost must be 0 too.
pub fn within_ceiling(cost: &Rational, c_star: &Rational, ceiling: &Ceiling) -> bool {
    if c_star.is_zero() {
        return cost.is_zero();
    }
    match ceiling {
        Ceiling::Finite(r) => cost <= &(r * c_star),
        Ceiling::Unbounded => true,
    }
}

/// `η = min(ρ, 1/9)` over the full partial-realization space, or `None` when
/// no triple qualifies (the goal already holds at the empty realization).
pub fn eta_of(g: &dyn Utility) -> Result<Option<Rational>> {
    match compute_rho_with(
        g,
        RhoScope::Full,
        DEFAULT_ENUMERATION_LIMIT,
        Parallelism::Sequential,
    ) {
        Ok(r) => Ok(Some(r.eta)),
        Err(Error::NoValidTriple) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    #[serde(serialize_with = "ser_opt")]
    pub expected_cost: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub ratio: Option<Rational>,
    /// Only for algorithms with an explicit ceiling.
    pub ceiling: Option<Ceiling>,
    /// Every sample row ends with `g = Q`.
    pub valid: Option<bool>,
    /// `None` when the oracle was skipped or the algorithm failed.
    pub pass: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub n: usize,
    pub states: usize,
    pub rows: usize,
    pub goal: u64,
    #[serde(serialize_with = "ser_opt")]
    pub eta: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub c_star: Option<Rational>,
    pub oracle_skipped: bool,
    pub results: Vec<AlgorithmResult>,
}

fn ser_opt<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl BenchRow {
    /// All decided pass flags hold. Rows with the oracle skipped count as passing.
    pub fn passes(&self) -> bool {
        self.results
            .iter()
            .all(|r| r.pass != Some(false) && r.error.is_none())
    }
}

fn sample_valid(instance: &ScenarioInstance, strategy: &Strategy) -> Result<bool> {
    let g = instance.utility();
    for row in instance.sample().rows() {
        let run = strategy.execute(&row.realization, instance.costs())?;
        if g.eval(&run.terminal) != g.goal() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One row. The per-algorithm flags are:
/// `mixed` within `1 + 24(1/η) ln Q`; `scenario-mixed` within the same
/// expression for `g_S` (goal `Qm`); `scenario-adaptive` at least `C*`;
/// `optimal` equal to `C*`.
pub fn bench_instance(
    name: &str,
    instance: &ScenarioInstance,
    algorithms: &[Algorithm],
    limits: OracleLimits,
) -> BenchRow {
    let c_star = optimal_tree_with(instance, limits).ok().map(|(_, c)| c);
    let oracle_skipped = c_star.is_none();
    let eta = eta_of(&**instance.utility()).ok().flatten();
    let results = algorithms
        .iter()
        .map(|&alg| run_one(instance, alg, limits, c_star.as_ref(), eta.as_ref()))
        .collect();
    BenchRow {
        name: name.to_string(),
        n: instance.num_items(),
        states: instance.num_states(),
        rows: instance.sample().len(),
        goal: instance.goal(),
        eta,
        c_star,
        oracle_skipped,
        results,
    }
}

fn run_one(
    instance: &ScenarioInstance,
    algorithm: Algorithm,
    limits: OracleLimits,
    c_star: Option<&Rational>,
    eta: Option<&Rational>,
) -> AlgorithmResult {
    let mut out = AlgorithmResult {
        algorithm,
        expected_cost: None,
        ratio: None,
        ceiling: None,
        valid: None,
        pass: None,
        error: None,
    };
    if algorithm == Algorithm::Optimal && c_star.is_none() {
        return out;
    }
    let outcome = (|| -> Result<()> {
        let strategy = algorithm.solve(instance, limits)?;
        let cost = strategy.expected_cost(instance)?;
        out.valid = Some(sample_valid(instance, &strategy)?);
        out.ceiling = match algorithm {
            Algorithm::Mixed => Some(mixed_ceiling(instance.goal(), eta)),
            Algorithm::ScenarioMixed => {
                let gs = make_gs(instance.utility().clone(), instance.sample().clone())?;
                Some(mixed_ceiling(gs.goal(), eta_of(&*gs)?.as_ref()))
            }
            _ => None,
        };
        if let Some(c) = c_star {
            if !c.is_zero() {
                out.ratio = Some(&cost / c);
            }
            let bound = match (&out.ceiling, algorithm) {
                (Some(ceiling), _) => within_ceiling(&cost, c, ceiling),
                (None, Algorithm::Optimal) => &cost == c,
                (None, _) => &cost >= c,
            };
            out.pass = Some(bound && out.valid == Some(true));
        }
        out.expected_cost = Some(cost);
        Ok(())
    })();
    if let Err(e) = outcome {
        out.error = Some(e.to_string());
    }
    out
}

/// Rows in input order; instances are processed concurrently under `Rayon`.
pub fn bench_all(
    instances: &[(String, ScenarioInstance)],
    algorithms: &[Algorithm],
    limits: OracleLimits,
    par: Parallelism,
) -> Vec<BenchRow> {
    map_slice(par, instances, |(name, inst)| {
        bench_instance(name, inst, algorithms, limits)
    })
}

fn fmt_opt(r: Option<&Rational>) -> String {
    r.map_or_else(|| "-".to_string(), |r| format!("{:.4}", to_f64(r)))
}

/// Fixed-width text table, one line per instance.
pub fn render_table(rows: &[BenchRow], algorithms: &[Algorithm]) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{:<24} {:>2} {:>2} {:>2} {:>6} {:>8} {:>10}",
        "instance", "n", "k", "m", "Q", "eta", "C*"
    );
    for a in algorithms {
        let _ = write!(
            s,
            " | {:<17} {:>10} {:>8} {:>10} {:>4}",
            a.name(),
            "cost",
            "ratio",
            "ceiling",
            "ok"
        );
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{:<24} {:>2} {:>2} {:>2} {:>6} {:>8} {:>10}",
            r.name,
            r.n,
            r.states,
            r.rows,
            r.goal,
            fmt_opt(r.eta.as_ref()),
            if r.oracle_skipped {
                "skipped".to_string()
            } else {
                fmt_opt(r.c_star.as_ref())
            }
        );
        for res in &r.results {
            let ok = match (&res.error, res.pass) {
                (Some(_), _) => "ERR",
                (None, Some(true)) => "pass",
                (None, Some(false)) => "FAIL",
                (None, None) => "-",
            };
            let ceiling = res
                .ceiling
                .as_ref()
                .map_or_else(|| "-".to_string(), |c| c.to_string());
            let _ = write!(
                s,
                " | {:<17} {:>10} {:>8} {:>10} {:>4}",
                "",
                fmt_opt(res.expected_cost.as_ref()),
                fmt_opt(res.ratio.as_ref()),
                ceiling,
                ok
            );
        }
        s.push('\n');
    }
    s
}

pub fn to_json(rows: &[BenchRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("bench rows always serialize");
    s.push('\n');
    s
}

/// Largest ratio observed for `algorithm`.
pub fn max_ratio(rows: &[BenchRow], algorithm: Algorithm) -> Option<Rational> {
    rows.iter()
        .flat_map(|r| r.results.iter())
        .filter(|r| r.algorithm == algorithm)
        .filter_map(|r| r.ratio.clone())
        .max()
}
