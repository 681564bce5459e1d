//! `ctmc-ldp`: command-line access to the rate-function solvers and the
//! Monte Carlo harness.
//!
//! Exit codes: 0 on success, 1 when the library rejects the input on
//! mathematical grounds, 2 for unreadable or malformed input and usage errors.

mod input;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctmc_ldp::montecarlo::RNG_ALGORITHM;
use ctmc_ldp::{
    cycle_decomposition, duality_check, dv_sup, empirical_pair, estimate_ldp_slope, joint_rate,
    minimize_flow, simulate, Chain, Flow, FlowMethod, SolverConfig, VertexFn,
};
use serde_json::{json, Map, Value};

use output::{number, put_extended, render, Format};

#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input; exit code 2.
    Input(anyhow::Error),
    /// Input rejected by the library; exit code 1.
    Domain(ctmc_ldp::Error),
}

impl From<ctmc_ldp::Error> for Failure {
    fn from(e: ctmc_ldp::Error) -> Self {
        Failure::Domain(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "ctmc-ldp", version, about = "Large-deviation rate functions of finite Markov chains")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Newton stopping tolerance on the gradient max-norm.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Largest accepted |rate_inf - rate_sup| for the duality subcommand.
    #[arg(long, global = true, default_value_t = 1e-6)]
    duality_tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    DualNewton,
    CycleBasis,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DualityRoute {
    /// Flow minimization against the potential supremum.
    Contraction,
    /// Primal flow problem against its conjugate dual over gradients.
    Fenchel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimulationOutput {
    Trajectory,
    Pair,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a chain file and summarize it.
    Validate { chain: PathBuf },
    /// Stationary distribution.
    Stationary { chain: PathBuf },
    /// Joint rate I(μ, Q) of a measure and a flow.
    Rate {
        chain: PathBuf,
        measure: PathBuf,
        #[arg(long)]
        flow: PathBuf,
    },
    /// Rate of a measure as the least cost of a divergence-free flow.
    MinFlow {
        chain: PathBuf,
        measure: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::DualNewton)]
        method: Method,
    },
    /// Rate of a measure as a supremum over potentials.
    DvSup { chain: PathBuf, measure: PathBuf },
    /// Compare the two sides of a duality.
    Duality {
        chain: PathBuf,
        measure: PathBuf,
        #[arg(long, value_enum, default_value_t = DualityRoute::Contraction)]
        method: DualityRoute,
    },
    /// Split a divergence-free flow into weighted cycles.
    Decompose { chain: PathBuf, flow: PathBuf },
    /// Simulate one path.
    Simulate {
        chain: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long, value_enum, default_value_t = SimulationOutput::Pair)]
        output: SimulationOutput,
    },
    /// Estimate the exponential decay rate of P(μ_T ∈ event).
    LdpSlope {
        chain: PathBuf,
        #[arg(long)]
        start: String,
        /// Half-space `name>=θ` or `name:c,name:c>=θ`; repeat to intersect.
        #[arg(long = "event", required = true)]
        events: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values_t = [50.0, 100.0, 200.0, 400.0])]
        horizons: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub duality_tol: f64,
    pub seed: u64,
    pub format: Format,
    pub inputs: Vec<PathBuf>,
}

impl RunConfig {
    fn from_args(global: &GlobalArgs, inputs: Vec<PathBuf>) -> Result<Self, Failure> {
        if !(global.tol > 0.0 && global.duality_tol > 0.0) {
            return Err(Failure::Input(anyhow::anyhow!("tolerances must be positive")));
        }
        if global.max_iter == 0 {
            return Err(Failure::Input(anyhow::anyhow!("--max-iter must be at least 1")));
        }
        Ok(RunConfig {
            solver: SolverConfig {
                gradient_tol: global.tol,
                max_iter: global.max_iter,
                ..SolverConfig::default()
            },
            duality_tol: global.duality_tol,
            seed: global.seed,
            format: global.format,
            inputs,
        })
    }
}

fn by_state(chain: &Chain, values: &[f64]) -> Value {
    Value::Object(
        chain
            .names()
            .iter()
            .zip(values)
            .map(|(n, &v)| (n.clone(), number(v)))
            .collect(),
    )
}

fn edge_list(chain: &Chain, flow: &Flow) -> Value {
    Value::Array(
        chain
            .edges()
            .iter()
            .zip(flow.values())
            .filter(|(_, &v)| v != 0.0)
            .map(|(e, &v)| json!({"from": chain.name(e.from), "to": chain.name(e.to), "value": v}))
            .collect(),
    )
}

fn names(chain: &Chain, states: &[usize]) -> Value {
    json!(states.iter().map(|&x| chain.name(x)).collect::<Vec<_>>())
}

fn potential(chain: &Chain, g: &VertexFn) -> Value {
    by_state(chain, g.values())
}

fn inputs(paths: &[&Path]) -> Vec<PathBuf> {
    paths.iter().map(|p| p.to_path_buf()).collect()
}

fn run(cli: &Cli) -> Result<(&'static str, Map<String, Value>, Format), Failure> {
    let mut out = Map::new();
    let name = match &cli.command {
        Command::Validate { chain } => {
            let _cfg = RunConfig::from_args(&cli.global, inputs(&[chain]))?;
            let c = input::load_chain(chain)?;
            let pi = c.stationary_distribution()?;
            out.insert("states".into(), json!(c.n_states()));
            out.insert("edges".into(), json!(c.n_edges()));
            out.insert("irreducible".into(), json!(true));
            out.insert(
                "reversible".into(),
                json!(c.is_reversible(&pi, &SolverConfig::default().tol)),
            );
            "validate"
        }
        Command::Stationary { chain } => {
            let cfg = RunConfig::from_args(&cli.global, inputs(&[chain]))?;
            let c = input::load_chain(chain)?;
            let pi = c.stationary_distribution_with(&cfg.solver.tol)?;
            out.insert("stationary".into(), by_state(&c, pi.weights()));
            out.insert("balance_residual".into(), number(c.balance_residual(pi.weights())));
            "stationary"
        }
        Command::Rate { chain, measure, flow } => {
            let _cfg = RunConfig::from_args(&cli.global, inputs(&[chain, measure, flow]))?;
            let c = input::load_chain(chain)?;
            let mu = input::load_measure(&c, measure)?;
            let q = input::load_flow(&c, flow)?;
            put_extended(&mut out, "rate", joint_rate(&c, &mu, &q)?);
            out.insert(
                "divergence_residual".into(),
                number(ctmc_ldp::functionals::divergence_residual(&c, &q)?),
            );
            "rate"
        }
        Command::MinFlow { chain, measure, method } => {
            let cfg = RunConfig::from_args(&cli.global, inputs(&[chain, measure]))?;
            let c = input::load_chain(chain)?;
            let mu = input::load_measure(&c, measure)?;
            let method = match method {
                Method::DualNewton => FlowMethod::DualNewton,
                Method::CycleBasis => FlowMethod::CycleBasis,
            };
            let res = minimize_flow(&c, &mu, &cfg.solver.with_method(method))?;
            put_extended(&mut out, "rate_inf", res.rate_inf);
            out.insert("rate_sup".into(), number(res.rate_sup));
            out.insert("duality_gap".into(), number(res.duality_gap));
            out.insert("sup_attained".into(), json!(res.sup_attained));
            out.insert("method".into(), json!(format!("{:?}", res.method)));
            out.insert("iterations".into(), json!(res.iterations));
            out.insert("optimal_flow".into(), edge_list(&c, &res.optimal_flow));
            out.insert(
                "classes".into(),
                Value::Array(res.partition.classes.iter().map(|cl| names(&c, cl)).collect()),
            );
            out.insert("class_order".into(), json!(res.condensation.order));
            out.insert("cross_class_mass".into(), number(res.cross_class_mass));
            out.insert("divergence_residual".into(), number(res.divergence_residual));
            out.insert("solver_residual".into(), number(res.solver_residual));
            out.insert("cycle_residual".into(), number(res.cycle_residual));
            "min-flow"
        }
        Command::DvSup { chain, measure } => {
            let cfg = RunConfig::from_args(&cli.global, inputs(&[chain, measure]))?;
            let c = input::load_chain(chain)?;
            let mu = input::load_measure(&c, measure)?;
            let sup = dv_sup(&c, &mu, &cfg.solver)?;
            out.insert("value".into(), number(sup.value));
            out.insert("attained".into(), json!(sup.attained));
            if let Some(g) = &sup.maximizer {
                out.insert("maximizer".into(), potential(&c, g));
            }
            if let Some(seq) = &sup.sequence {
                let levels: Vec<Value> = sup
                    .sequence_values
                    .iter()
                    .map(|&(n, v)| json!({"n": n, "value": number(v), "potential": potential(&c, &seq.at(n))}))
                    .collect();
                out.insert("sequence".into(), Value::Array(levels));
            }
            out.insert("iterations".into(), json!(sup.iterations));
            out.insert("residual".into(), number(sup.residual));
            "dv-sup"
        }
        Command::Duality { chain, measure, method } => {
            let cfg = RunConfig::from_args(&cli.global, inputs(&[chain, measure]))?;
            let c = input::load_chain(chain)?;
            let mu = input::load_measure(&c, measure)?;
            let (inf, sup, attained, route) = match method {
                DualityRoute::Contraction => {
                    let primal = minimize_flow(&c, &mu, &cfg.solver.with_method(FlowMethod::CycleBasis))?;
                    let dual = dv_sup(&c, &mu, &cfg.solver)?;
                    (primal.rate_inf.to_f64(), dual.value, dual.attained, "contraction")
                }
                DualityRoute::Fenchel => {
                    let rep = duality_check(&c, &mu, &cfg.solver)?;
                    (rep.inf_side, rep.sup_side, rep.attained, "fenchel")
                }
            };
            let gap = (inf - sup).abs();
            out.insert("route".into(), json!(route));
            out.insert("rate_inf".into(), number(inf));
            out.insert("rate_sup".into(), number(sup));
            out.insert("gap".into(), number(gap));
            out.insert("tolerance".into(), number(cfg.duality_tol));
            out.insert("within_tolerance".into(), json!(gap <= cfg.duality_tol * inf.max(1.0)));
            out.insert("sup_attained".into(), json!(attained));
            "duality"
        }
        Command::Decompose { chain, flow } => {
            let _cfg = RunConfig::from_args(&cli.global, inputs(&[chain, flow]))?;
            let c = input::load_chain(chain)?;
            let q = input::load_flow(&c, flow)?;
            let dec = cycle_decomposition(&c, &q)?;
            let cycles: Vec<Value> = dec
                .cycles
                .iter()
                .map(|(cycle, w)| json!({"cycle": names(&c, cycle), "weight": w}))
                .collect();
            out.insert("cycles".into(), Value::Array(cycles));
            "decompose"
        }
        Command::Simulate { chain, start, horizon, output } => {
            let cfg = RunConfig::from_args(&cli.global, inputs(&[chain]))?;
            let c = input::load_chain(chain)?;
            let x0 = c.state_index(start)?;
            let traj = simulate(&c, x0, *horizon, cfg.seed)?;
            out.insert("seed".into(), json!(cfg.seed));
            out.insert("rng".into(), json!(RNG_ALGORITHM));
            out.insert("horizon".into(), number(*horizon));
            match output {
                SimulationOutput::Trajectory => {
                    out.insert("initial".into(), json!(c.name(x0)));
                    let jumps: Vec<Value> = traj
                        .jumps
                        .iter()
                        .map(|&(t, to)| json!({"time": t, "to": c.name(to)}))
                        .collect();
                    out.insert("jumps".into(), Value::Array(jumps));
                }
                SimulationOutput::Pair => {
                    let pair = empirical_pair(&c, &traj)?;
                    out.insert("jumps".into(), json!(traj.jumps.len()));
                    out.insert("measure".into(), by_state(&c, pair.measure.weights()));
                    out.insert("flow".into(), edge_list(&c, &pair.flow));
                }
            }
            "simulate"
        }
        Command::LdpSlope { chain, start, events, horizons, samples } => {
            let cfg = RunConfig::from_args(&cli.global, inputs(&[chain]))?;
            let c = input::load_chain(chain)?;
            let x0 = c.state_index(start)?;
            let event = input::parse_event(&c, events)?;
            let est = estimate_ldp_slope(&c, x0, &event, horizons, *samples, cfg.seed)?;
            let rows: Vec<Value> = est
                .per_horizon
                .iter()
                .map(|h| {
                    json!({
                        "horizon": h.horizon,
                        "samples": h.estimate.samples,
                        "hits": h.estimate.hits,
                        "probability": h.estimate.probability,
                        "std_error": h.estimate.std_error,
                        "slope": h.slope.map_or(Value::Null, number),
                        "slope_std_error": h.slope_std_error.map_or(Value::Null, number),
                        "slope_lower_bound": h.slope_lower_bound.map_or(Value::Null, number),
                    })
                })
                .collect();
            out.insert("event".into(), json!(events));
            out.insert("per_horizon".into(), Value::Array(rows));
            out.insert("slope".into(), est.slope.map_or(Value::Null, number));
            out.insert("slope_std_error".into(), est.slope_std_error.map_or(Value::Null, number));
            out.insert(
                "finite_size_coefficient".into(),
                est.finite_size_coefficient.map_or(Value::Null, number),
            );
            out.insert("seed".into(), json!(est.seed));
            out.insert("rng".into(), json!(est.rng));
            "ldp-slope"
        }
    };
    Ok((name, out, cli.global.format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok((name, body, format)) => {
            print!("{}", render(name, body, format));
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn run_config_rejects_bad_settings() {
        let cli = Cli::try_parse_from(["ctmc-ldp", "validate", "x.json", "--max-iter", "0"]).unwrap();
        assert!(matches!(RunConfig::from_args(&cli.global, vec![]), Err(Failure::Input(_))));
        let cli = Cli::try_parse_from(["ctmc-ldp", "validate", "x.json", "--tol=-1"]).unwrap();
        assert!(matches!(RunConfig::from_args(&cli.global, vec![]), Err(Failure::Input(_))));
    }
}
