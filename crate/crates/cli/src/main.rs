//! `hfl`: command-line front end for the hfl-core experiments.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hfl_core::harmonic::EnergyMethod;

#[derive(Parser, Debug)]
#[command(name = "hfl", version, about = "Harmonic maps, random walks and fixed-point experiments")]
pub struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    /// Write the report, CSV tables and a timing sidecar here instead of
    /// printing the report.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Print one table of the report as CSV on stdout.
    #[arg(long, global = true, value_name = "TABLE")]
    pub csv: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discrete harmonic flow.
    #[command(subcommand)]
    Flow(FlowCmd),
    /// Local and n-step energies of an equivariant map.
    #[command(subcommand)]
    Energy(EnergyCmd),
    /// Exact fixed point of an action, if any.
    Fixedpoint(ActionArgs),
    /// Near-critical point search.
    #[command(subcommand)]
    Delta(DeltaCmd),
    /// Finite graphs: generation, spectral statistics, energy inequality.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Random labellings of a graph by free-group generators.
    #[command(subcommand)]
    Gmodel(GmodelCmd),
    /// Link graphs and the spectral fixed-point criterion.
    #[command(subcommand)]
    Criterion(CriterionCmd),
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Args, Debug)]
pub struct ActionArgs {
    /// Group description (JSON).
    #[arg(long)]
    pub group: PathBuf,
    /// Affine action (JSON).
    #[arg(long)]
    pub action: PathBuf,
}

#[derive(Args, Debug)]
pub struct MapArgs {
    #[command(flatten)]
    pub action: ActionArgs,
    /// `f(e)`, comma separated; zero when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
pub enum FlowCmd {
    /// Iterate the harmonic flow and classify its stability.
    Run(FlowRunArgs),
    /// Solve for the harmonic maps directly.
    Solve(ActionArgs),
}

#[derive(Args, Debug)]
pub struct FlowRunArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Ball radius for the stability check.
    #[arg(long, default_value_t = hfl_core::harmonic::DEFAULT_FLOW_RADIUS)]
    pub radius: usize,
    /// Maximum number of flow steps.
    #[arg(long, default_value_t = hfl_core::harmonic::DEFAULT_FLOW_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = hfl_core::harmonic::HARMONIC_TOL)]
    pub tol: f64,
    /// Largest n in the energy growth table of the final iterate.
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = Method::Moments)]
    pub method: Method,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Method {
    Convolution,
    Moments,
}

impl From<Method> for EnergyMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Convolution => EnergyMethod::Convolution,
            Method::Moments => EnergyMethod::Moments,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum EnergyCmd {
    /// `E(f)(x)`.
    Local(EnergyArgs),
    /// `E^(k)(f)(x)` for `k = 1..=n`.
    Nstep(NstepArgs),
}

#[derive(Args, Debug)]
pub struct EnergyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Base point, e.g. `"g0 g1^-1"`.
    #[arg(long, default_value = "e")]
    pub x: String,
}

#[derive(Args, Debug)]
pub struct NstepArgs {
    #[command(flatten)]
    pub energy: EnergyArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Method::Convolution)]
    pub method: Method,
}

#[derive(Subcommand, Debug)]
pub enum DeltaCmd {
    /// Move to points with half the displacement until none is in reach.
    Search(DeltaArgs),
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Step radius factor `j >= 1`.
    #[arg(long, default_value_t = 2.0)]
    pub j: f64,
    /// Maximum number of moves.
    #[arg(long, default_value_t = 1000)]
    pub cap: usize,
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    /// Random k-regular graph, optionally with a girth floor.
    Gen(GraphGenArgs),
    /// Spectral gap, girth and diameter.
    Stats(GraphArgs),
    /// Check `E_{mu^n} <= (2/λ₁) E_mu` for given or random maps.
    EnergyIneq(EnergyIneqArgs),
}

#[derive(Args, Debug)]
pub struct GraphArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Args, Debug)]
pub struct GraphGenArgs {
    #[arg(long)]
    pub vertices: usize,
    #[arg(long)]
    pub degree: usize,
    #[arg(long)]
    pub girth: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EnergyIneqArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Map values (JSON `{"values": [[..], ..]}`, one vector per vertex).
    #[arg(long, conflicts_with_all = ["maps", "dim"])]
    pub map: Option<PathBuf>,
    /// Number of random Gaussian maps when no map file is given.
    #[arg(long, default_value_t = 10)]
    pub maps: usize,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    /// Largest walk length.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum GmodelCmd {
    /// Uniform random labelling.
    Sample(SampleArgs),
    /// Pushforward of the graph walk to the free group.
    Pushforward(PushforwardArgs),
    /// Fit the expected pushforward walk by free-group walks.
    FitMixture(MonteCarloArgs),
    /// Fraction of labellings whose walks stay within a factor 2 of the mean.
    Concentration(MonteCarloArgs),
    /// Relators of the labelled graph's presentation.
    Relators(RelatorsArgs),
    /// Transplanted energy inequality for an action of `F_m`.
    Transplant(TransplantArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Free-group rank.
    #[arg(long)]
    pub m: usize,
}

#[derive(Args, Debug)]
pub struct LabelledArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Labelling (JSON `{"m": .., "labels": [..]}`).
    #[arg(long)]
    pub labelling: PathBuf,
}

#[derive(Args, Debug)]
pub struct PushforwardArgs {
    #[command(flatten)]
    pub labelled: LabelledArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "e")]
    pub x: String,
}

#[derive(Args, Debug)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct RelatorsArgs {
    #[command(flatten)]
    pub labelled: LabelledArgs,
    /// Root of the spanning tree.
    #[arg(long, default_value_t = 0)]
    pub root: usize,
}

#[derive(Args, Debug)]
pub struct TransplantArgs {
    #[command(flatten)]
    pub labelled: LabelledArgs,
    /// Affine action of `F_m` (JSON).
    #[arg(long)]
    pub action: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v0: Option<Vec<f64>>,
    #[arg(long, default_value = "e")]
    pub x: String,
    #[arg(long)]
    pub n: usize,
}

#[derive(Subcommand, Debug)]
pub enum CriterionCmd {
    /// Build the link graph.
    Link(LinkArgs),
    /// `κ₂` of the link.
    K2(LinkArgs),
    /// Decide `C κ₂ < √2`.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
pub struct LinkArgs {
    /// Presentation (JSON); links come from its length-3 relators.
    #[arg(long, required_unless_present = "group", conflicts_with = "group")]
    pub presentation: Option<PathBuf>,
    /// Finite group (JSON); links come from its multiplication table.
    #[arg(long)]
    pub group: Option<PathBuf>,
    /// Edge weights (JSON `{"edges": [["s", "t", w], ..]}`).
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub link: LinkArgs,
    /// Growth constant `C`.
    #[arg(long = "C", id = "C")]
    pub c: f64,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    /// Run one criterion (1-10) instead of the whole battery.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10))]
    pub only: Option<u8>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    output::run(cli)
}
