use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use hereditary_lab::budget::{DEFAULT_NODES, DEFAULT_SECONDS};
use hereditary_lab::combin::parse_decimal;
use hereditary_lab::containers::{self, ContainerHypergraph};
use hereditary_lab::distance;
use hereditary_lab::extremal::{self, Goal, SearchOptions};
use hereditary_lab::instances::{colored, digraph, metric, triples};
use hereditary_lab::json::{self as hj, subset_key};
use hereditary_lab::template::one_based;
use hereditary_lab::types::type_space;
use hereditary_lab::verify::{self, Family};
use hereditary_lab::{Budget, LabError, Structure, Template, TypePool};

const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Serialize)]
#[command(
    name = "hereditary-lab",
    version,
    about = "Templates, extremal search and container hypergraphs"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct Global {
    /// Search-node budget.
    #[arg(long, global = true, default_value_t = DEFAULT_NODES)]
    budget: u64,
    /// Wall-clock limit in seconds.
    #[arg(long, global = true, default_value_t = DEFAULT_SECONDS)]
    time_limit: u64,
    /// Worker threads; 1 runs fully serial.
    #[arg(long, global = true, env = "HEREDITARY_LAB_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Also write an (n, ex, b_n) table.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    Metric,
    Digraph,
    Oriented,
    Triples,
    Colored,
}

#[derive(Args, Serialize, Clone)]
struct Source {
    /// Property JSON file.
    #[arg(long, visible_alias = "forbid", conflicts_with = "instance")]
    property: Option<PathBuf>,
    /// Built-in instance family.
    #[arg(long)]
    instance: Option<Kind>,
    /// Distance count for the metric instance.
    #[arg(long)]
    r: Option<usize>,
    /// Tournament size parameter for the digraph instances.
    #[arg(long = "tk")]
    tk: Option<usize>,
    /// Colored-instance spec file.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args, Serialize, Clone)]
struct InstanceArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// List S_r(H) with stable ids.
    Types {
        #[command(flatten)]
        source: Source,
        /// List every type on r points, realized or not.
        #[arg(long)]
        all: bool,
    },
    /// Enumerate or count the members of H on n points.
    Enumerate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count_only: bool,
    },
    /// ex(n,H) and its maximizers.
    Extremal {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        all_maximizers: bool,
        #[arg(long, default_value_t = extremal::DEFAULT_CAP)]
        cap: usize,
    },
    /// The sequence b_n = ex(n,H)^{1/C(n,r)}.
    Density {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        nmax: usize,
    },
    /// sub(T), |Ch(T)| and the errors of a template.
    Subcount {
        template: PathBuf,
        /// Also count by merging every choice function.
        #[arg(long)]
        by_merging: bool,
    },
    /// Decide whether a template is H-random.
    Hrandom {
        template: PathBuf,
        /// Also run the every-choice-function oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// dist and d between two structures, or dist between two templates.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        ac: bool,
        /// Exit with status 4 if dist ≤ (r!)²2^r·d fails.
        #[arg(long)]
        check_bound: bool,
    },
    /// The container hypergraph and its co-degree function.
    Containers {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// A rational, or "auto" for n^{-1/m}/gamma.
        #[arg(long, default_value = "auto")]
        tau: String,
        #[arg(long, default_value = "0.05")]
        gamma: String,
        #[arg(long, default_value = "0.1")]
        epsilon: String,
    },
    /// Near-extremal templates and their distance to the maximizers.
    ProbeStability {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = extremal::DEFAULT_CAP)]
        cap: usize,
    },
    /// Compare the generic search with an instance oracle.
    Verify {
        #[arg(long)]
        instance: Kind,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        nmax: usize,
        /// Random structure pairs for the distance bound, per run.
        #[arg(long, default_value_t = 0)]
        bound_samples: usize,
    },
    /// Emit the property JSON of a built-in instance.
    Instance(InstanceArgs),
}

struct Failure {
    code: u8,
    message: String,
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        let code = match e {
            LabError::BudgetExhausted(_) => EXIT_BUDGET,
            LabError::Verification(_) => EXIT_VERIFY,
            _ => EXIT_INVALID,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: msg.into(),
    }
}

type Out<T> = std::result::Result<T, Failure>;

/// A command's result plus the status it should exit with.
struct Outcome {
    result: Value,
    code: u8,
    csv: Option<String>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            code: 0,
            csv: None,
        }
    }
}

fn big(x: &BigUint) -> Value {
    Value::String(x.to_string())
}

fn rat(x: &BigRational) -> Value {
    Value::String(x.to_string())
}

fn ratf(x: &BigRational) -> Value {
    json!(x.to_f64())
}

fn parse_rational(s: &str) -> Out<BigRational> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad(format!("bad rational {s:?}")))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad(format!("bad rational {s:?}")))?;
        if q.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(BigRational::new(p, q));
    }
    let (p, q) = parse_decimal(s).ok_or_else(|| bad(format!("bad number {s:?}")))?;
    Ok(BigRational::new(p.into(), q.into()))
}

fn read(path: &Path) -> Out<String> {
    std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn colored_spec(path: Option<&PathBuf>) -> Out<colored::ColoredSpec> {
    let path = path.ok_or_else(|| bad("the colored instance needs --spec"))?;
    serde_json::from_str(&read(path)?).map_err(|e| bad(format!("{}: {e}", path.display())))
}

fn family(kind: Kind, r: Option<usize>, k: Option<usize>, spec: Option<&PathBuf>) -> Out<Family> {
    Ok(match kind {
        Kind::Metric => Family::Metric {
            r: r.ok_or_else(|| bad("the metric instance needs --r"))?,
        },
        Kind::Digraph => Family::Digraph { k: k.unwrap_or(2) },
        Kind::Oriented => Family::Oriented { k: k.unwrap_or(2) },
        Kind::Triples => Family::Triples,
        Kind::Colored => Family::Colored(colored_spec(spec)?),
    })
}

fn pool_of(src: &Source, budget: &Budget) -> Out<Arc<TypePool>> {
    match (&src.property, src.instance) {
        (Some(path), _) => {
            let prop = hj::parse_property(&read(path)?)?;
            Ok(TypePool::new(Arc::new(prop), budget)?)
        }
        (None, Some(kind)) => Ok(family(kind, src.r, src.tk, src.spec.as_ref())?.instance()?.pool),
        (None, None) => Err(bad("give --property FILE or --instance NAME")),
    }
}

fn load_template(path: &Path, budget: &Budget) -> Out<Template> {
    let base = path.parent();
    Ok(hj::parse_template(&read(path)?, base, budget)?)
}

fn choices_json(t: &Template) -> Value {
    let map: serde_json::Map<String, Value> = t
        .subsets()
        .iter()
        .map(|a| (subset_key(a), json!(t.ch(a).iter().map(|p| p.id()).collect::<Vec<_>>())))
        .collect();
    Value::Object(map)
}

fn windows_json(ws: &[Vec<usize>]) -> Value {
    json!(ws.iter().map(|w| one_based(w)).collect::<Vec<_>>())
}

fn csv_table(rows: &[(usize, BigUint, f64)]) -> String {
    let mut s = String::from("n,ex,b_n\n");
    for (n, ex, b) in rows {
        s.push_str(&format!("{n},{ex},{b}\n"));
    }
    s
}

fn run(cli: &Cli, budget: &Budget) -> Out<Outcome> {
    let g = &cli.global;
    let workers = g.workers.max(1);
    match &cli.command {
        Command::Types { source, all } => {
            let pool = pool_of(source, budget)?;
            let types = if *all {
                type_space(&pool.layout)?
            } else {
                pool.types.clone()
            };
            Ok(Outcome::ok(json!({
                "r": pool.r(),
                "count": types.len(),
                "types": hj::type_listing(&pool.layout, &types),
            })))
        }
        Command::Enumerate { source, n, count_only } => {
            let pool = pool_of(source, budget)?;
            let prop = &pool.prop;
            if *count_only {
                let count = prop.count_members(*n, budget)?;
                return Ok(Outcome::ok(json!({ "n": n, "count": big(&count) })));
            }
            let members = prop.enumerate_members(*n, budget)?;
            let list: Vec<_> = members.iter().map(|m| hj::structure_to_json(m, false)).collect();
            Ok(Outcome::ok(
                json!({ "n": n, "count": members.len().to_string(), "members": list }),
            ))
        }
        Command::Extremal {
            source,
            n,
            all_maximizers,
            cap,
        } => {
            let pool = pool_of(source, budget)?;
            let cap = if *all_maximizers { *cap } else { 1 };
            let opts = SearchOptions {
                goal: Goal::Maximize { cap },
                workers,
                filter: None,
            };
            let rep = extremal::search_extremal_with(&pool, *n, &opts, budget)?;
            let maximizers: Vec<Value> = rep.extremal_templates.iter().map(choices_json).collect();
            let b_n = rep.b_n();
            let result = json!({
                "n": n,
                "r": rep.r,
                "ex": big(&rep.ex),
                "exponent": rep.exponent(),
                "b_n": b_n,
                "maximizer_count": rep.extremal_templates.len(),
                "maximizers": maximizers,
                "truncated": rep.truncated,
                "exact": rep.exact,
                "stats": rep.stats,
            });
            let code = if rep.exact { 0 } else { EXIT_BUDGET };
            Ok(Outcome {
                result,
                code,
                csv: Some(csv_table(&[(*n, rep.ex.clone(), b_n)])),
            })
        }
        Command::Density { source, nmax } => {
            let pool = pool_of(source, budget)?;
            let seq = extremal::density_sequence(&pool, *nmax, workers, budget)?;
            let rows: Vec<_> = seq.points.iter().map(|p| (p.n, p.ex.clone(), p.b_n)).collect();
            Ok(Outcome {
                result: serde_json::to_value(&seq).expect("serializable"),
                code: 0,
                csv: Some(csv_table(&rows)),
            })
        }
        Command::Subcount { template, by_merging } => {
            let t = load_template(template, budget)?;
            let sc = t.sub_count(budget)?;
            let errors = t.detect_errors()?;
            let mut result = json!({
                "n": t.n,
                "r": t.r(),
                "choice_count": big(&t.choice_count()),
                "sub": big(&sc.count),
                "error_free": sc.error_free,
                "errors": windows_json(&errors),
            });
            if *by_merging {
                let merged = t.sub_count_by_merging(budget)?;
                result["sub_by_merging"] = big(&merged);
                result["merging_agrees"] = json!(merged == sc.count);
            }
            Ok(Outcome::ok(result))
        }
        Command::Hrandom { template, oracle } => {
            let t = load_template(template, budget)?;
            let errors = t.detect_errors()?;
            let window = if errors.is_empty() {
                t.first_bad_window(budget)?
            } else {
                None
            };
            let h_random = errors.is_empty() && window.is_none();
            let mut result = json!({
                "n": t.n,
                "h_random": h_random,
                "error_free": errors.is_empty(),
                "errors": windows_json(&errors),
                "bad_window": window.map(|w| one_based(&w)),
            });
            let mut code = 0;
            if *oracle {
                let o = t.is_h_random_oracle(budget)?;
                result["oracle"] = json!(o);
                if o != h_random {
                    code = EXIT_VERIFY;
                }
            }
            Ok(Outcome {
                result,
                code,
                csv: None,
            })
        }
        Command::Distance { a, b, ac, check_bound } => {
            let (ta, tb) = (read(a)?, read(b)?);
            if !is_template(&ta) && !is_template(&tb) {
                let x = hj::parse_structure(&ta).map_err(|e| bad(format!("{}: {e}", a.display())))?;
                let y = hj::parse_structure(&tb).map_err(|e| bad(format!("{}: {e}", b.display())))?;
                distance_structures(&x, &y, *ac, *check_bound)
            } else {
                let x = hj::parse_template(&ta, a.parent(), budget)?;
                let y = hj::parse_template(&tb, b.parent(), budget)?;
                let diff = distance::template_diff(&x, &y)?;
                let d = distance::template_dist(&x, &y)?;
                Ok(Outcome::ok(json!({
                    "kind": "template",
                    "dist": rat(&d),
                    "dist_f64": ratf(&d),
                    "diff": windows_json(&diff),
                })))
            }
        }
        Command::Containers {
            source,
            n,
            k,
            tau,
            gamma,
            epsilon,
        } => {
            let pool = pool_of(source, budget)?;
            containers_cmd(&pool, *n, *k, tau, gamma, epsilon, workers, budget)
        }
        Command::ProbeStability {
            source,
            n,
            epsilon,
            cap,
        } => {
            let pool = pool_of(source, budget)?;
            let (num, den) = parse_decimal(epsilon).ok_or_else(|| bad(format!("bad epsilon {epsilon:?}")))?;
            let p = extremal::stability_probe(&pool, *n, (&num, &den), *cap, workers, budget)?;
            let near: Vec<Value> = p
                .near_extremal
                .iter()
                .map(|x| json!({ "choices": choices_json(&x.template), "sub": big(&x.sub), "min_dist": rat(&x.min_dist) }))
                .collect();
            let result = json!({
                "n": p.n,
                "epsilon": format!("{}/{}", p.epsilon.0, p.epsilon.1),
                "ex": big(&p.ex),
                "threshold": big(&p.threshold),
                "near_extremal_count": near.len(),
                "near_extremal": near,
                "worst_gap": rat(&p.worst_gap),
                "worst_gap_f64": ratf(&p.worst_gap),
                "exact": p.exact,
                "truncated": p.truncated,
            });
            let code = if p.exact && !p.truncated { 0 } else { EXIT_BUDGET };
            Ok(Outcome {
                result,
                code,
                csv: None,
            })
        }
        Command::Verify {
            instance,
            r,
            k,
            spec,
            nmax,
            bound_samples,
        } => {
            let fam = family(*instance, *r, *k, spec.as_ref())?;
            let rep = verify::verify(&fam, *nmax, workers, budget)?;
            let mut result = serde_json::to_value(&rep).expect("serializable");
            let mut code = if !rep.passed {
                EXIT_VERIFY
            } else if !rep.exact {
                EXIT_BUDGET
            } else {
                0
            };
            if *bound_samples > 0 {
                let sig = fam.instance()?.pool.prop.sig.clone();
                let size = (2 * sig.r()).max(2);
                let s = distance::sampled_bound_check(&sig, size, *bound_samples, g.seed)?;
                result["distance_bound"] = json!({ "n": size, "checked": s.checked, "violations": s.violations });
                if s.violations > 0 {
                    code = EXIT_VERIFY;
                }
            }
            let rows: Vec<_> = rep
                .rows
                .iter()
                .map(|row| {
                    let e = hereditary_lab::combin::binom(row.n, fam.instance().map(|i| i.pool.r()).unwrap_or(2));
                    let b = (extremal::big_ln(&row.search_ex) / e as f64).exp();
                    (row.n, row.search_ex.clone(), b)
                })
                .collect();
            Ok(Outcome {
                result,
                code,
                csv: Some(csv_table(&rows)),
            })
        }
        Command::Instance(_) => unreachable!("handled before the report envelope"),
    }
}

fn is_template(text: &str) -> bool {
    serde_json::from_str::<Value>(text).is_ok_and(|v| v.get("choices").is_some())
}

fn distance_structures(x: &Structure, y: &Structure, ac: bool, check_bound: bool) -> Out<Outcome> {
    let diff = distance::diff(x, y)?;
    let bc = distance::distance_bound(x, y)?;
    let mut result = json!({
        "kind": "structure",
        "dist": rat(&bc.dist),
        "dist_f64": ratf(&bc.dist),
        "diff": windows_json(&diff),
        "d": rat(&bc.d),
        "d_f64": ratf(&bc.d),
        "bound_lhs": rat(&bc.dist),
        "bound_rhs": rat(&bc.rhs),
        "bound_holds": bc.holds,
    });
    if ac {
        let entries: Vec<Value> = distance::index(&x.sig)
            .iter()
            .map(|e| {
                let a = distance::dh(e, x);
                let b = distance::dh(e, y);
                let sym = a.iter().filter(|t| !b.contains(t)).count() + b.iter().filter(|t| !a.contains(t)).count();
                json!({ "relation": x.sig.relations[e.rel].name, "partition": e.partition, "symmetric_difference": sym })
            })
            .collect();
        result["index"] = json!(entries);
    }
    let code = if check_bound && !bc.holds { EXIT_VERIFY } else { 0 };
    Ok(Outcome {
        result,
        code,
        csv: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn containers_cmd(
    pool: &Arc<TypePool>,
    n: usize,
    k: usize,
    tau: &str,
    gamma: &str,
    epsilon: &str,
    workers: usize,
    budget: &Budget,
) -> Out<Outcome> {
    let r = pool.r();
    let hg = ContainerHypergraph::build(pool, k, n, workers, budget)?;
    let m = if k > r {
        Some(containers::exponent_m(k, r)?)
    } else {
        None
    };
    let gamma_r = parse_rational(gamma)?;
    let eps = parse_rational(epsilon)?;
    let tau_r = if tau == "auto" {
        let m = m.as_ref().ok_or_else(|| bad("tau auto needs k > r"))?;
        containers::auto_tau(n, m, gamma_r.to_f64().unwrap_or(f64::NAN))?
    } else {
        parse_rational(tau)?
    };
    let rep = hg.codegree_function(&tau_r, budget)?;
    let sr = containers::type_space_size(pool);
    let th = rep.threshold(&eps, &sr);
    let gi = containers::gamma_inequality(k, r, &sr, &gamma_r, &eps)?;
    Ok(Outcome::ok(json!({
        "n": n,
        "k": k,
        "r": r,
        "v": hg.v(),
        "e": hg.e(),
        "alpha": hg.alpha,
        "s": hg.s,
        "m": m.as_ref().map(rat),
        "tau": rat(&rep.tau),
        "tau_f64": ratf(&rep.tau),
        "d": rat(&rep.d),
        "codegree_sums": rep.codegree_sums.iter().map(big).collect::<Vec<_>>(),
        "delta_j": rep.delta_j.iter().map(rat).collect::<Vec<_>>(),
        "delta": rat(&rep.delta),
        "delta_f64": ratf(&rep.delta),
        "epsilon_prime": rat(&th.epsilon_prime),
        "threshold": rat(&th.threshold),
        "threshold_f64": ratf(&th.threshold),
        "parameters_in_range": th.in_range,
        "threshold_met": th.met,
        "gamma_inequality_holds": gi.holds,
    })))
}

fn instance_cmd(args: &InstanceArgs) -> Out<Value> {
    let prop = match args.kind {
        Kind::Metric => metric::property(args.r.ok_or_else(|| bad("instance metric needs --r"))?)?,
        Kind::Digraph => digraph::property(args.k.unwrap_or(2))?,
        Kind::Oriented => digraph::oriented_property(args.k.unwrap_or(2))?,
        Kind::Triples => triples::property()?,
        Kind::Colored => {
            let c = colored::colored_instance(&colored_spec(args.spec.as_ref())?)?;
            for d in &c.dropped {
                eprintln!("warning: color {d:?} is never realized and was dropped");
            }
            (*c.instance.pool.prop).clone()
        }
    };
    Ok(serde_json::to_value(hj::property_to_json(&prop)).expect("serializable"))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Types { .. } => "types",
        Command::Enumerate { .. } => "enumerate",
        Command::Extremal { .. } => "extremal",
        Command::Density { .. } => "density",
        Command::Subcount { .. } => "subcount",
        Command::Hrandom { .. } => "hrandom",
        Command::Distance { .. } => "distance",
        Command::Containers { .. } => "containers",
        Command::ProbeStability { .. } => "probe-stability",
        Command::Verify { .. } => "verify",
        Command::Instance(_) => "instance",
    }
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Out<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| bad(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(out, "{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let status = if let Command::Instance(args) = &cli.command {
        instance_cmd(args)
            .and_then(|v| write_out(g.output.as_ref(), &serde_json::to_string_pretty(&v).expect("json")))
            .map(|_| 0)
    } else {
        let budget = Budget::new(g.budget, Some(Duration::from_secs(g.time_limit)));
        let start = Instant::now();
        run(&cli, &budget).and_then(|out| {
            let report = json!({
                "tool": "hereditary-lab",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command_name(&cli.command),
                "config": &cli,
                "result": out.result,
                "status": out.code,
                "timing": { "elapsed_ms": start.elapsed().as_millis() as u64, "nodes": budget.used() },
            });
            write_out(g.output.as_ref(), &serde_json::to_string_pretty(&report).expect("json"))?;
            if let (Some(path), Some(csv)) = (g.csv.as_ref(), out.csv) {
                std::fs::write(path, csv).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            }
            Ok(out.code)
        })
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
