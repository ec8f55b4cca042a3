use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stochpump::adiabatic::{analytic_current, Quadrature};
use stochpump::dynamics::{average_current, SolverOptions};
use stochpump::io::{parse_graph, parse_protocol};
use stochpump::params::{enumerate_top_cells, DEFAULT_CELL_CAP};
use stochpump::sweep::{sweep, Period, SweepOptions};
use stochpump::topo::{arc_decompose, current_of_decomposition, ground_holonomy_probe, TopoOptions, TwistConvention};
use stochpump::trees::{enumerate_spanning_trees, DEFAULT_TREE_CAP};
use stochpump::{CycleBasis, Error, Graph, IntCurrentReport, Protocol};

#[derive(Parser)]
#[command(name = "stochpump", version, about = "Stochastic pump currents on finite multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Integrator tolerance per unit time.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol: f64,
    /// Tolerance for grouping well energies.
    #[arg(long, global = true, default_value_t = 1e-6)]
    delta_e: f64,
    /// Tolerance for grouping barrier energies.
    #[arg(long, global = true, default_value_t = 1e-6)]
    delta_w: f64,
    /// Loop samples for the robustness check.
    #[arg(long, global = true, default_value_t = 1024)]
    samples: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Literal,
    Magnetic,
}

#[derive(Subcommand)]
enum Command {
    /// Betti number, spanning-tree count and cycle basis.
    GraphInfo { graph: PathBuf },
    /// Essential and inessential top-dimensional cells.
    Cells { graph: PathBuf },
    /// Average current per period of the periodic solution.
    Simulate {
        graph: PathBuf,
        protocol: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        tau: f64,
        /// Output grid intervals per period.
        #[arg(long, default_value_t = 1024)]
        intervals: usize,
    },
    /// Adiabatic current at fixed temperature.
    Adiabatic {
        graph: PathBuf,
        protocol: PathBuf,
        #[arg(long)]
        beta: f64,
    },
    /// Robustness of the loop and its integer current.
    Topological { graph: PathBuf, protocol: PathBuf },
    /// Grid of currents over temperatures and periods.
    Sweep {
        graph: PathBuf,
        protocol: PathBuf,
        /// Comma-separated inverse temperatures.
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        /// Comma-separated driving periods; `adiabatic` for the limit.
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<String>,
    },
    /// Winding of the ground-state holonomy as one generator's phase turns.
    Holonomy {
        graph: PathBuf,
        protocol: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Index into the cycle basis.
        #[arg(long, default_value_t = 0)]
        generator: usize,
        /// Loop steps for the transport.
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Convention::Literal)]
        convention: Convention,
    },
}

enum Failure {
    Lib(Error),
    Io(String),
    NonRobust(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonRobust { .. } | Error::RefinementLimit { .. } | Error::AmbiguousGrouping { .. } => 3,
        Error::Overflow { .. }
        | Error::StepFailure { .. }
        | Error::NearSingularMonodromy { .. }
        | Error::Degenerate { .. }
        | Error::CountLimitExceeded { .. }
        | Error::NotConserved { .. }
        | Error::NotZeroSum { .. } => 4,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(graph: &Path, protocol: Option<&Path>) -> Result<(Graph, Option<Protocol>), Failure> {
    let g = parse_graph(&read(graph)?)?;
    let p = match protocol {
        Some(path) => Some(parse_protocol(&read(path)?, Some(&g))?),
        None => None,
    };
    Ok((g, p))
}

fn topo_options(c: &Common) -> TopoOptions {
    TopoOptions {
        delta_e: c.delta_e,
        delta_w: c.delta_w,
        samples: c.samples,
        ..Default::default()
    }
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let c = &cli.common;
    let report = match &cli.command {
        Command::GraphInfo { graph } => {
            let (g, _) = load(graph, None)?;
            let basis = CycleBasis::new(&g);
            let trees = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP)?;
            json!({
                "vertices": g.vertex_count(),
                "edges": g.edges(),
                "betti_number": basis.len(),
                "spanning_trees": trees.len(),
                "reference_tree": basis.reference_tree.edges(),
                "generators": basis.generators,
                "cycles": basis.cycles,
            })
        }
        Command::Cells { graph } => {
            let (g, _) = load(graph, None)?;
            let cells = enumerate_top_cells(&g, DEFAULT_CELL_CAP)?;
            if c.format == Format::Csv {
                let rows: Vec<Vec<String>> = cells
                    .iter()
                    .map(|cell| {
                        let h1: Vec<String> = cell.height.h1.iter().map(|x| x.to_string()).collect();
                        let q: Vec<String> = cell.current.as_slice().iter().map(|x| x.to_string()).collect();
                        vec![
                            cell.minima.0.to_string(),
                            cell.minima.1.to_string(),
                            cell.tie.0.to_string(),
                            cell.tie.1.to_string(),
                            h1.join(" "),
                            cell.dimension.to_string(),
                            cell.essential.to_string(),
                            cell.forest_agrees.to_string(),
                            q.join(" "),
                        ]
                    })
                    .collect();
                return Ok(csv_table(
                    &["min_i", "min_j", "tie_a", "tie_b", "h1", "dimension", "essential", "forest_agrees", "current"],
                    &rows,
                ));
            }
            serde_json::to_value(&cells).expect("cells serialize")
        }
        Command::Simulate {
            graph,
            protocol,
            beta,
            tau,
            intervals,
        } => {
            let (g, p) = load(graph, Some(protocol))?;
            let opts = SolverOptions {
                tol: c.tol,
                grid_intervals: *intervals,
            };
            let a = average_current(&g, p.as_ref().unwrap(), *beta, *tau, &opts)?;
            json!({
                "beta": beta,
                "tau_d": tau,
                "tol": c.tol,
                "current": a.report,
                "lattice_distance": a.report.lattice_distance(),
                "restricted_monodromy_norm": a.restricted_monodromy_norm,
                "monodromy_inverse_norm": a.inverse_norm,
                "fixed_point_discrepancy": a.fixed_point_discrepancy,
                "periodicity_residual": a.periodicity_residual,
            })
        }
        Command::Adiabatic { graph, protocol, beta } => {
            let (g, p) = load(graph, Some(protocol))?;
            let r = analytic_current(&g, p.as_ref().unwrap(), *beta, &Quadrature::default())?;
            json!({
                "beta": beta,
                "current": r,
                "lattice_distance": r.lattice_distance(),
                "nearest_lattice_point": r.nearest_lattice_point(),
            })
        }
        Command::Topological { graph, protocol } => {
            let (g, p) = load(graph, Some(protocol))?;
            match arc_decompose(&g, p.as_ref().unwrap(), &topo_options(c)) {
                Ok(d) => {
                    let q = IntCurrentReport::new(&g, &CycleBasis::new(&g), current_of_decomposition(&g, &d))?;
                    json!({ "robust": true, "current": q, "arcs": d.arcs, "junctions": d.junctions })
                }
                Err(e @ (Error::NonRobust { t } | Error::RefinementLimit { t })) => {
                    return Err(Failure::NonRobust(json!({
                        "robust": false,
                        "failure_t": t,
                        "reason": e.to_string(),
                    })))
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::Sweep {
            graph,
            protocol,
            beta,
            tau,
        } => {
            let (g, p) = load(graph, Some(protocol))?;
            let periods = tau
                .iter()
                .map(|s| match s.trim() {
                    "adiabatic" => Ok(Period::Adiabatic),
                    other => other
                        .parse::<f64>()
                        .map(Period::Finite)
                        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("bad period {other:?}")))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let opts = SweepOptions {
                solver: SolverOptions {
                    tol: c.tol,
                    ..Default::default()
                },
                topo: topo_options(c),
                ..Default::default()
            };
            let r = sweep(&g, p.as_ref().unwrap(), beta, &periods, &opts)?;
            if c.format == Format::Csv {
                return Ok(r.to_csv());
            }
            serde_json::to_value(&r).expect("sweep serializes")
        }
        Command::Holonomy {
            graph,
            protocol,
            beta,
            generator,
            steps,
            convention,
        } => {
            let (g, p) = load(graph, Some(protocol))?;
            let conv = match convention {
                Convention::Literal => TwistConvention::Literal,
                Convention::Magnetic => TwistConvention::Magnetic,
            };
            let r = ground_holonomy_probe(&g, p.as_ref().unwrap(), *beta, *generator, *steps, conv)?;
            json!({
                "beta": beta,
                "generator": generator,
                "convention": conv,
                "winding": r.winding,
                "min_gap": r.min_gap,
                "steps": r.steps,
                "stable": r.stable,
            })
        }
    };
    Ok(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n")
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.as_deref();
    let (text, code) = match run(&cli) {
        Ok(text) => (text, 0),
        Err(Failure::NonRobust(report)) => {
            eprintln!("error: {}", report["reason"].as_str().unwrap_or_default());
            (serde_json::to_string_pretty(&report).expect("reports serialize") + "\n", 3)
        }
        Err(Failure::Io(message)) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            (
                serde_json::to_string_pretty(&json!({ "error": e.to_string(), "exit_code": code })).expect("reports serialize")
                    + "\n",
                code,
            )
        }
    };
    if let Err(message) = emit(out, &text) {
        eprintln!("error: {message}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
