use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tsppc_core::bench::{
    self, load_corpus, records_to_csv, run_bench, timing_study, write_atomically, BenchError, BenchOptions,
};
use tsppc_core::exact::{exact_oracle, DEFAULT_NODE_LIMIT};
use tsppc_core::generator::{generate_with_provenance, Direction, GeneratorConfig};
use tsppc_core::heuristics::{achci_with, nearest_neighbor, AchciOptions, ArcRule, Evaluation};
use tsppc_core::io::{parse_tour, parse_tsplib, read_instance, write_instance, write_tour, InstanceFile, Sci3};
use tsppc_core::milp::{export_milp, MilpOptions, SubtourMode};
use tsppc_core::model::{validate_tour, Instance, Metric, PrecedenceViolation, Tour};
use tsppc_core::random::{seeded, uniform_cloud};

const WORKERS_ENV: &str = "TSPPC_WORKERS";

#[derive(Parser)]
#[command(name = "tsppc", version, about = "Precedence-constrained TSP toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a TSPLIB point cloud
    Gen {
        #[arg(long)]
        tsplib: PathBuf,
        #[arg(long)]
        direction: DirectionArg,
        #[arg(long, default_value = "euc2d-rounded")]
        metric: Metric,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build tours with the construction heuristics
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Tour file; with `--method both` the heuristic name is added before
        /// the extension
        #[arg(long)]
        tour_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = EvaluationArg::Incremental)]
        evaluation: EvaluationArg,
        #[arg(long, value_enum, default_value_t = ArcRuleArg::Detour)]
        arc_rule: ArcRuleArg,
        /// Run on the calling thread only
        #[arg(long)]
        sequential: bool,
    },
    /// Solve to optimality by dynamic programming (small instances only)
    Exact {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        limit: usize,
        #[arg(long)]
        tour_out: Option<PathBuf>,
    },
    /// Write the MILP model in LP format, with an optional MIP start
    ExportMilp {
        #[arg(long)]
        instance: PathBuf,
        /// Tour used as MIP start, written next to the model as `.mst`
        #[arg(long)]
        warm_start: Option<PathBuf>,
        /// Sequencing constraints instead of enumerated subtour sets
        #[arg(long)]
        mtz: bool,
        /// Omit product variables for depot payloads
        #[arg(long)]
        sparse: bool,
        #[arg(long)]
        big_m: Option<f64>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a tour against an instance
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        tour: PathBuf,
    },
    /// Compare both heuristics over a directory of TSPLIB files
    Bench {
        #[arg(long)]
        tsplib_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Directions::Both)]
        directions: Directions,
        #[arg(long)]
        out: PathBuf,
        /// Also time each children-central instance single-threaded
        #[arg(long)]
        timing_out: Option<PathBuf>,
        /// Write every tour into this directory
        #[arg(long)]
        tours_dir: Option<PathBuf>,
        #[arg(long, default_value = "euc2d-rounded")]
        metric: Metric,
        /// Costs with three significant figures
        #[arg(long)]
        compact: bool,
    },
    /// Construction time against size on uniform random clouds
    Timing {
        #[arg(long, value_delimiter = ',', default_value = "51,100,200,400,800")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, value_enum, default_value_t = EvaluationArg::Naive)]
        evaluation: EvaluationArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    #[value(alias = "children-central")]
    Children,
    #[value(alias = "parents-central")]
    Parents,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Children => Direction::ChildrenCentral,
            DirectionArg::Parents => Direction::ParentsCentral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Directions {
    Both,
    Children,
    Parents,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Achci,
    Nn,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArcRuleArg {
    /// Arc with the smallest added length
    Detour,
    /// Arc with the smallest insertion ratio
    Ratio,
}

impl From<ArcRuleArg> for ArcRule {
    fn from(r: ArcRuleArg) -> Self {
        match r {
            ArcRuleArg::Detour => ArcRule::Detour,
            ArcRuleArg::Ratio => ArcRule::Ratio,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluationArg {
    Naive,
    Incremental,
}

impl From<EvaluationArg> for Evaluation {
    fn from(e: EvaluationArg) -> Self {
        match e {
            EvaluationArg::Naive => Evaluation::Naive,
            EvaluationArg::Incremental => Evaluation::Incremental,
        }
    }
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn infeasible(message: impl Display) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }

    fn io(message: impl Display) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Heuristic { .. } => Failure::infeasible(e),
            _ => Failure::io(e),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<InstanceFile, Failure> {
    read_instance(&read(path)?).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn load_tour(path: &Path, instance: &Instance) -> Result<Vec<usize>, Failure> {
    let doc = parse_tour(&read(path)?).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    if doc.order.iter().any(|&n| n >= instance.node_count()) {
        return Err(Failure::io(format!(
            "{}: tour references nodes outside the instance",
            path.display()
        )));
    }
    Ok(doc.order)
}

fn with_suffix(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().map_err(|_| Failure {
        code: 2,
        message: format!("{WORKERS_ENV} must be a positive integer, got {raw:?}"),
    })?;
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let _ = workers;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_workers()?;
    match cli.command {
        Command::Gen {
            tsplib,
            direction,
            metric,
            out,
        } => {
            let cloud = parse_tsplib(&read(&tsplib)?).map_err(|e| Failure::io(format!("{}: {e}", tsplib.display())))?;
            let config = GeneratorConfig::new(direction.into()).with_metric(metric);
            let (instance, provenance) = generate_with_provenance(&cloud, config).map_err(Failure::infeasible)?;
            write(&out, &write_instance(&InstanceFile::new(instance.clone(), provenance)))?;
            println!(
                "{}: {} locations, {} commodities, metric {}",
                instance.name(),
                instance.location_count(),
                instance.commodities().len(),
                instance.metric()
            );
        }
        Command::Solve {
            instance,
            method,
            tour_out,
            evaluation,
            arc_rule,
            sequential,
        } => {
            let file = load_instance(&instance)?;
            let inst = &file.instance;
            let mut tours: Vec<(&str, Tour)> = Vec::new();
            if method != Method::Achci {
                tours.push(("nn", nearest_neighbor(inst).map_err(Failure::infeasible)?));
            }
            if method != Method::Nn {
                let options = AchciOptions {
                    evaluation: evaluation.into(),
                    arc_rule: arc_rule.into(),
                    parallel: !sequential,
                };
                let out = achci_with(inst, &options).map_err(Failure::infeasible)?;
                println!(
                    "achci ccw {} cw {}",
                    out.as_built.tour.cost(),
                    out.reversed.tour.cost()
                );
                tours.push(("achci", out.into_tour()));
            }
            for (name, tour) in &tours {
                println!("{name} {} ({})", tour.cost(), Sci3(tour.cost()));
            }
            if let [(_, nn), (_, ac)] = tours.as_slice() {
                println!("delta {:.1}%", bench::BenchRecord::delta(nn.cost(), ac.cost()));
            }
            if let Some(path) = tour_out {
                for (name, tour) in &tours {
                    let target = if tours.len() > 1 { with_suffix(&path, name) } else { path.clone() };
                    write(&target, &write_tour(tour, inst, name))?;
                }
            }
        }
        Command::Exact {
            instance,
            limit,
            tour_out,
        } => {
            let file = load_instance(&instance)?;
            let sol = exact_oracle(&file.instance, limit).map_err(Failure::infeasible)?;
            println!("optimal {} ({} states)", sol.tour.cost(), sol.states);
            if let Some(path) = tour_out {
                write(&path, &write_tour(&sol.tour, &file.instance, "exact"))?;
            }
        }
        Command::ExportMilp {
            instance,
            warm_start,
            mtz,
            sparse,
            big_m,
            out,
        } => {
            let file = load_instance(&instance)?;
            let inst = &file.instance;
            let start = match &warm_start {
                Some(p) => {
                    let order = load_tour(p, inst)?;
                    Some(Tour::new(inst, order).map_err(Failure::infeasible)?)
                }
                None => None,
            };
            let options = MilpOptions {
                subtour: if mtz { SubtourMode::Mtz } else { SubtourMode::Dfj },
                sparse,
                big_m,
            };
            let export = export_milp(inst, start.as_ref(), &options).map_err(Failure::infeasible)?;
            write(&out, &export.lp)?;
            if let Some(mst) = export.warm_start {
                write(&out.with_extension("mst"), &mst)?;
            }
            println!(
                "{} variables, {} constraints, big M {}, subtour {}",
                export.model.variables.len(),
                export.model.constraints.len(),
                export.model.big_m,
                options.subtour.as_str()
            );
        }
        Command::Validate { instance, tour } => {
            let file = load_instance(&instance)?;
            let order = load_tour(&tour, &file.instance)?;
            let report = validate_tour(&file.instance, &order).map_err(Failure::infeasible)?;
            match report.violation {
                None => println!(
                    "feasible: cost {} max payload {}",
                    report.cost, report.max_payload
                ),
                Some(v) => {
                    if let PrecedenceViolation::NegativePayload { node, .. } = v {
                        println!("infeasible at node {node}");
                    }
                    return Err(Failure::infeasible(v));
                }
            }
        }
        Command::Bench {
            tsplib_dir,
            directions,
            out,
            timing_out,
            tours_dir,
            metric,
            compact,
        } => {
            let corpus: Vec<_> = load_corpus(&tsplib_dir)?.into_iter().map(|(_, c)| c).collect();
            let dirs: &[Direction] = match directions {
                Directions::Both => &Direction::BOTH,
                Directions::Children => &[Direction::ChildrenCentral],
                Directions::Parents => &[Direction::ParentsCentral],
            };
            let options = BenchOptions {
                metric,
                ..BenchOptions::default()
            };
            let outcomes = run_bench(&corpus, dirs, &options)?;
            if let Some(dir) = &tours_dir {
                fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
                for o in &outcomes {
                    let cloud = corpus.iter().find(|c| c.name == o.record.instance).expect("bench input");
                    let direction: Direction = o.record.direction.parse().expect("written by bench");
                    let inst = tsppc_core::generator::generate(cloud, GeneratorConfig::new(direction).with_metric(metric))
                        .map_err(Failure::infeasible)?;
                    for (name, tour) in [("nn", &o.nn), ("achci", &o.achci)] {
                        let path = dir.join(format!("{}.{name}.tour", inst.name()));
                        write(&path, &write_tour(tour, &inst, name))?;
                    }
                }
            }
            let records: Vec<_> = outcomes.into_iter().map(|o| o.record).collect();
            write_atomically(&out, &records_to_csv(&records, compact)?)?;
            for r in &records {
                println!(
                    "{:<12} {:<17} nn {:>10} achci {:>10} {:>6.1}%",
                    r.instance,
                    r.direction,
                    Sci3(r.nn_cost).to_string(),
                    Sci3(r.achci_cost).to_string(),
                    r.delta_percent
                );
            }
            if let Some(path) = timing_out {
                let report = timing_study(&corpus, metric, Evaluation::Incremental, 3)?;
                write_atomically(&path, &report.to_csv()?)?;
                print_fit(&report);
            }
        }
        Command::Timing {
            sizes,
            seed,
            repeats,
            evaluation,
            out,
        } => {
            let mut rng = seeded(seed);
            let clouds: Vec<_> = sizes.iter().map(|&n| uniform_cloud(&mut rng, n, 10_000)).collect();
            let report = timing_study(&clouds, Metric::Euc2dRounded, evaluation.into(), repeats)?;
            write_atomically(&out, &report.to_csv()?)?;
            for r in &report.rows {
                println!("{:>6} {:<6} {:.6}s", r.nodes, r.heuristic, r.seconds);
            }
            print_fit(&report);
        }
    }
    Ok(())
}

fn print_fit(report: &bench::TimingReport) {
    let f = report.achci_fit;
    println!(
        "achci seconds ~ {:.3e} n^3 + {:.3e}, R^2 {:.4}",
        f.slope, f.intercept, f.r_squared
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
