use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use scenario_cover::bench::{bench_all, render_table, to_json, Algorithm};
use scenario_cover::generate::{generate, Family, GenSpec};
use scenario_cover::instance_file::InstanceFile;
use scenario_cover::mixed::{mixed_greedy_policy, mixed_greedy_with_trace, DEFAULT_TREE_CAP};
use scenario_cover::model::{DecisionTree, Node, ScenarioInstance, StateAlphabet};
use scenario_cover::oracle::{optimal_tree_with, OracleLimits};
use scenario_cover::par::Parallelism;
use scenario_cover::rational::{int, parse_decimal, to_decimal, to_f64, Rational};
use scenario_cover::strategy::Strategy;
use scenario_cover::utility::{
    check_adaptive_submodular, check_goal, check_monotone, check_submodular, compute_rho, make_gs,
    CheckOutcome, DEFAULT_ENUMERATION_LIMIT,
};
use scenario_cover::Error;

#[derive(Parser)]
#[command(
    name = "scover",
    version,
    about = "Adaptive strategies for scenario submodular cover"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a strategy and report its expected cost.
    Solve {
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Largest tree written explicitly; bigger strategies are written as per-row traces.
        #[arg(long, default_value_t = DEFAULT_TREE_CAP)]
        tree_cap: usize,
    },
    /// Check a property of the instance's utility.
    Check {
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write a seeded random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        /// coverage, k_of_n, or either prefixed with g_S: or g_W:
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value_t = 4)]
        sample_size: usize,
        #[arg(long, default_value = "1")]
        cost_min: String,
        #[arg(long, default_value = "4")]
        cost_max: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare algorithms against the optimum on every instance in a directory.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated list.
        #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "mixed,scenario-mixed,scenario-adaptive,optimal")]
        algorithms: Vec<Algorithm>,
        /// Machine-readable table.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Monotone,
    Submodular,
    AdaptiveSubmodular,
    Rho,
    Goal,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit codes: 0 ok, 1 check failed, 2 usage or parse error, 3 budget refused.
enum Failure {
    Check(String),
    Usage(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EnumerationTooLarge { .. } | Error::OracleBudgetExceeded(_) => {
                Failure::Budget(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            algorithm,
            input,
            out,
            tree_cap,
        } => solve(algorithm, &input, &out, tree_cap),
        Command::Check { property, input } => check(property, &input),
        Command::Gen {
            seed,
            n,
            family,
            states,
            sample_size,
            cost_min,
            cost_max,
            out,
        } => gen(
            seed,
            n,
            family,
            states,
            sample_size,
            &cost_min,
            &cost_max,
            &out,
        ),
        Command::Bench {
            dir,
            algorithms,
            out,
            sequential,
        } => bench(&dir, &algorithms, out.as_deref(), sequential),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("refused: {m}");
            ExitCode::from(3)
        }
    }
}

fn read_file(path: &Path) -> Result<InstanceFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    InstanceFile::parse(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ScenarioInstance, Failure> {
    read_file(path)?
        .build()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn rational(r: &Rational) -> Value {
    json!({
        "exact": r.to_string(),
        "decimal": to_decimal(r).unwrap_or_else(|| format!("~{:.12}", to_f64(r))),
    })
}

/// Items are written 1-based and states by name, as in instance files.
fn tree_json(t: &DecisionTree, id: usize, alphabet: &StateAlphabet) -> Value {
    match t.node(id) {
        Node::Leaf => Value::String("leaf".into()),
        Node::Internal { item, children } => {
            let kids: serde_json::Map<String, Value> = children
                .iter()
                .enumerate()
                .map(|(s, &c)| {
                    (
                        alphabet.name(s as u8).to_string(),
                        tree_json(t, c, alphabet),
                    )
                })
                .collect();
            json!({ "item": item + 1, "children": kids })
        }
    }
}

fn strategy_json(
    strategy: &Strategy,
    instance: &ScenarioInstance,
    cap: usize,
) -> Result<Value, Failure> {
    let tree = match strategy {
        Strategy::Tree(t) if t.num_nodes() <= cap => Some(t.clone()),
        Strategy::Tree(_) => None,
        Strategy::Policy(_) => match strategy.to_tree(cap) {
            Ok(t) => Some(t),
            Err(Error::EnumerationTooLarge { .. }) => None,
            Err(e) => return Err(e.into()),
        },
    };
    if let Some(t) = tree {
        return Ok(
            json!({ "form": "tree", "nodes": t.num_nodes(), "root": tree_json(&t, t.root(), instance.alphabet()) }),
        );
    }
    let mut runs = Vec::new();
    for (idx, row) in instance.sample().rows().iter().enumerate() {
        let run = strategy.execute(&row.realization, instance.costs())?;
        runs.push(json!({
            "row": idx + 1,
            "items": run.items.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "cost": run.cost.to_string(),
        }));
    }
    Ok(json!({ "form": "policy-trace", "runs": runs }))
}

fn rho_json(g: &dyn scenario_cover::utility::Utility) -> Value {
    match compute_rho(g) {
        Ok(r) => json!({ "rho": r.rho.to_string(), "eta": r.eta.to_string() }),
        Err(_) => Value::Null,
    }
}

fn solve(algorithm: Algorithm, input: &Path, out: &Path, cap: usize) -> Result<(), Failure> {
    let instance = load(input)?;
    let limits = OracleLimits::default();
    let mut report = serde_json::Map::new();
    report.insert("algorithm".into(), json!(algorithm.name()));
    report.insert("n".into(), json!(instance.num_items()));
    report.insert("goal".into(), json!(instance.goal()));

    let (strategy, extra) = match algorithm {
        Algorithm::Mixed => match mixed_greedy_with_trace(&instance) {
            Err(Error::EnumerationTooLarge { .. }) => (
                mixed_greedy_policy(&instance),
                json!({ "rho": rho_json(&**instance.utility()) }),
            ),
            Err(e) => return Err(e.into()),
            Ok((tree, traces)) => {
                let root = traces.first().map(|t| {
                    json!({
                        "budget": t.budget.budget.to_string(),
                        "stage1_exit": t.stage1_exit,
                        "stage2_exit": t.stage2_exit,
                        "c_y": t.c_y.to_string(),
                    })
                });
                let extra = json!({ "rho": rho_json(&**instance.utility()), "root_invocation": root, "invocations": traces.len() });
                (Strategy::Tree(tree), extra)
            }
        },
        Algorithm::ScenarioMixed => {
            let gs = make_gs(instance.utility().clone(), instance.sample().clone())?;
            (
                algorithm.solve(&instance, limits)?,
                json!({ "rho_g_S": rho_json(&*gs) }),
            )
        }
        Algorithm::ScenarioAdaptive => (algorithm.solve(&instance, limits)?, Value::Null),
        Algorithm::Optimal => {
            let (tree, _) = optimal_tree_with(&instance, limits)?;
            (Strategy::Tree(tree), Value::Null)
        }
    };
    let cost = strategy.expected_cost(&instance)?;
    report.insert("expected_cost".into(), rational(&cost));
    match optimal_tree_with(&instance, limits) {
        Ok((_, c_star)) => {
            report.insert("c_star".into(), rational(&c_star));
            let ratio = if c_star == int(0) {
                Value::Null
            } else {
                rational(&(&cost / &c_star))
            };
            report.insert("ratio".into(), ratio);
        }
        Err(Error::OracleBudgetExceeded(_)) => {
            report.insert("c_star".into(), json!("oracle skipped"));
        }
        Err(e) => return Err(e.into()),
    }
    if !extra.is_null() {
        report.insert("audit".into(), extra);
    }
    report.insert("strategy".into(), strategy_json(&strategy, &instance, cap)?);
    let text =
        serde_json::to_string_pretty(&Value::Object(report)).expect("json values serialize") + "\n";
    write(out, &text)?;
    println!("{}: expected cost {}", algorithm.name(), cost);
    Ok(())
}

/// Rewrites a witness into file conventions: 1-based items, named states.
fn present(mut v: Value, alphabet: &StateAlphabet) -> Value {
    let name = |s: u64| alphabet.name(s as u8).to_string();
    if let Value::Object(map) = &mut v {
        for (key, field) in map.iter_mut() {
            match (key.as_str(), &*field) {
                ("item" | "witness_item", Value::Number(i)) => {
                    *field = json!(i.as_u64().unwrap() + 1)
                }
                ("state" | "witness_state", Value::Number(s)) => {
                    *field = json!(name(s.as_u64().unwrap()))
                }
                ("b" | "b_ext" | "witness_b", Value::String(b)) => {
                    let inner = b.trim_start_matches('(').trim_end_matches(')');
                    let parts: Vec<String> = inner
                        .split(',')
                        .filter(|p| !p.is_empty())
                        .map(|p| p.parse().map_or_else(|_| p.to_string(), name))
                        .collect();
                    *field = json!(format!("({})", parts.join(",")));
                }
                _ => {}
            }
        }
    }
    v
}

fn verdict<W: serde::Serialize>(
    property: &str,
    outcome: CheckOutcome<W>,
    alphabet: &StateAlphabet,
) -> Result<(), Failure> {
    let holds = outcome.holds();
    println!(
        "{}",
        serde_json::to_string_pretty(
            &json!({ "property": property, "holds": holds, "witness": present(json!(outcome.witness()), alphabet) })
        )
        .expect("json values serialize")
    );
    if holds {
        Ok(())
    } else {
        Err(Failure::Check(format!("{property} violated")))
    }
}

fn check(property: Property, input: &Path) -> Result<(), Failure> {
    let instance = load(input)?;
    let g = &**instance.utility();
    let alphabet = instance.alphabet();
    match property {
        Property::Monotone => verdict("monotone", check_monotone(g)?, alphabet),
        Property::Submodular => verdict("submodular", check_submodular(g)?, alphabet),
        Property::AdaptiveSubmodular => verdict(
            "adaptive-submodular",
            check_adaptive_submodular(g, instance.sample())?,
            alphabet,
        ),
        Property::Goal => {
            let (outcome, enumerated) =
                check_goal(g, Some(instance.sample()), DEFAULT_ENUMERATION_LIMIT);
            if !enumerated {
                eprintln!("note: only the sample rows were checked");
            }
            verdict("goal", outcome, alphabet)
        }
        Property::Rho => {
            let r = compute_rho(g)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&present(json!(r), alphabet))
                    .expect("rho reports serialize")
            );
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(
    seed: u64,
    n: usize,
    family: Family,
    states: usize,
    sample_size: usize,
    cost_min: &str,
    cost_max: &str,
    out: &Path,
) -> Result<(), Failure> {
    let spec = GenSpec {
        seed,
        n,
        states,
        sample_size,
        cost_min: parse_decimal(cost_min)?,
        cost_max: parse_decimal(cost_max)?,
        family,
    };
    let file = generate(&spec)?;
    let instance = file.build()?;
    let g = &**instance.utility();
    let (goal, _) = check_goal(g, Some(instance.sample()), DEFAULT_ENUMERATION_LIMIT);
    if !goal.holds() {
        return Err(Failure::Check("generated instance misses the goal".into()));
    }
    match (check_monotone(g), check_submodular(g)) {
        (Ok(m), Ok(s)) if !m.holds() || !s.holds() => {
            return Err(Failure::Check(
                "generated utility is not monotone submodular".into(),
            ))
        }
        // too large to enumerate; the families are monotone submodular by construction
        _ => {}
    }
    write(out, &file.emit())
}

fn bench(
    dir: &Path,
    algorithms: &[Algorithm],
    out: Option<&Path>,
    sequential: bool,
) -> Result<(), Failure> {
    let entries =
        fs::read_dir(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut instances = Vec::with_capacity(paths.len());
    for p in &paths {
        let name = p
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        instances.push((name, load(p)?));
    }
    let par = if sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Rayon
    };
    let rows = bench_all(&instances, algorithms, OracleLimits::default(), par);
    print!("{}", render_table(&rows, algorithms));
    if let Some(out) = out {
        write(out, &to_json(&rows))?;
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.passes())
        .map(|r| r.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "bound columns failed on {}",
            failed.join(", ")
        )))
    }
}
