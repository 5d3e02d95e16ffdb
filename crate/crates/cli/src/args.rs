use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::jobs::Init;

#[derive(Debug, Parser)]
#[command(
    name = "giftplace",
    version,
    about = "Graph-filter initial placement toolkit"
)]
pub struct Cli {
    /// More log output; repeat for more.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a start placement and write the result as `.pl`.
    Gift(GiftArgs),
    /// Run the gradient-descent placer from a chosen start.
    Place(PlaceArgs),
    /// Eigenvalue histograms and filter responses as CSV.
    Spectrum(SpectrumArgs),
    /// Quality measures of a placement as JSON.
    Metrics(MetricsArgs),
    /// Write a synthetic Bookshelf design.
    Benchgen(BenchgenArgs),
    /// Paired center-start and filtered-start placer runs on one design.
    Report(ReportArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GiftFlags {
    /// `key = value` settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Standard deviation of the start jitter around the region center.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Filter terms as `sigma:k:alpha` triples, comma separated.
    #[arg(long)]
    pub terms: Option<String>,
    /// Skip nets with more pins than this when building the graph.
    #[arg(long)]
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PlacerFlags {
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda_growth: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub stop_overflow: Option<f64>,
    #[arg(long)]
    pub grid_nx: Option<usize>,
    #[arg(long)]
    pub grid_ny: Option<usize>,
    #[arg(long)]
    pub target_density: Option<f64>,
    #[arg(long)]
    pub penalty_refine: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GiftArgs {
    #[arg(long)]
    pub aux: PathBuf,
    /// Output `.pl`.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-phase timing JSON; defaults next to the output.
    #[arg(long)]
    pub timing: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub gift: GiftFlags,
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    #[arg(long)]
    pub aux: PathBuf,
    /// `center`, `gift`, `eigen`, or `file:PATH`.
    #[arg(long, default_value = "gift")]
    pub init: Init,
    #[arg(long)]
    pub out: PathBuf,
    /// Trace CSV; defaults next to the output.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub gift: GiftFlags,
    #[command(flatten)]
    pub placer: PlacerFlags,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub aux: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 1.0, 2.0, 3.0])]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4])]
    pub k: Vec<u32>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Directory for `histogram.csv`, `response.csv` and the manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub aux: PathBuf,
    /// Placement to measure.
    #[arg(long)]
    pub pl: PathBuf,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub grid_nx: Option<usize>,
    #[arg(long)]
    pub grid_ny: Option<usize>,
    #[arg(long)]
    pub target_density: Option<f64>,
    #[arg(long)]
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchgenArgs {
    /// Total cells, IO terminals included.
    #[arg(long)]
    pub cells: usize,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub terminals: Option<usize>,
    /// `all2`, `mixed`, or `degree:weight` pairs such as `2:0.7,3:0.3`.
    #[arg(long, default_value = "mixed")]
    pub fanout: String,
    /// Random long-range nets per movable cell.
    #[arg(long)]
    pub long_range: Option<f64>,
    #[arg(long)]
    pub utilization: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Base name of the written files.
    #[arg(long, default_value = "bench")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub aux: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub gift: GiftFlags,
    #[command(flatten)]
    pub placer: PlacerFlags,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded locations.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
