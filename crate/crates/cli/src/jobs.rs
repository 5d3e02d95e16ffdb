//! Fully resolved commands. A job carries every setting a run depends on,
//! so the manifest that records it can replay the run without the original
//! flags or settings file.

use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use giftplace::bench::{self, BenchSpec};
use giftplace::gift::{self, GiftConfig, PhaseTiming};
use giftplace::metrics::{self, GridConfig};
use giftplace::netlist::{parse_design, read_placement, write_placement};
use giftplace::placer::{run_placer, PlacerConfig, PlacerTrace};
use giftplace::spectral;
use giftplace::{graph, Design, Placement, SparseSymMatrix};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Start placement for the placer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Center,
    Gift,
    Eigen,
    File(PathBuf),
}

impl FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "center" => Ok(Init::Center),
            "gift" => Ok(Init::Gift),
            "eigen" => Ok(Init::Eigen),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Init::File(PathBuf::from(p))),
                _ => Err(format!(
                    "expected center, gift, eigen or file:PATH, got `{s}`"
                )),
            },
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::Center => f.write_str("center"),
            Init::Gift => f.write_str("gift"),
            Init::Eigen => f.write_str("eigen"),
            Init::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GiftJob {
    pub aux: PathBuf,
    pub out: PathBuf,
    pub timing: PathBuf,
    pub gift: GiftConfig,
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceJob {
    pub aux: PathBuf,
    pub init: Init,
    pub out: PathBuf,
    pub trace: PathBuf,
    pub gift: GiftConfig,
    pub placer: PlacerConfig,
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJob {
    pub aux: PathBuf,
    pub sigmas: Vec<f64>,
    pub ks: Vec<u32>,
    pub bins: usize,
    pub dir: PathBuf,
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsJob {
    pub aux: PathBuf,
    pub pl: PathBuf,
    pub out: PathBuf,
    pub grid: GridConfig,
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchgenJob {
    pub spec: BenchSpec,
    pub dir: PathBuf,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJob {
    pub aux: PathBuf,
    pub dir: PathBuf,
    pub gift: GiftConfig,
    pub placer: PlacerConfig,
    pub max_clique_pins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Gift(GiftJob),
    Place(PlaceJob),
    Spectrum(SpectrumJob),
    Metrics(MetricsJob),
    Benchgen(BenchgenJob),
    Report(ReportJob),
}

/// What a finished job read, wrote, and how long each phase took.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<PhaseTiming>,
}

/// One arm of a paired comparison in `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArmSummary {
    pub init: String,
    pub iterations: usize,
    pub converged: bool,
    pub hpwl: f64,
    pub overflow: f64,
    pub init_seconds: f64,
    pub place_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedReport {
    pub design: PathBuf,
    pub cells: usize,
    pub nets: usize,
    /// Iterations count optimizer steps.
    pub center: ArmSummary,
    pub gift: ArmSummary,
    pub iteration_ratio: f64,
    pub hpwl_ratio: f64,
}

fn timed<T>(phase: &str, timings: &mut Vec<PhaseTiming>, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(PhaseTiming::new(phase, start.elapsed().as_secs_f64()));
    out
}

pub fn load_design(aux: &Path) -> Result<(Design, PhaseTiming), CliError> {
    let start = Instant::now();
    let design = parse_design(aux)?;
    Ok((
        design,
        PhaseTiming::new("parse", start.elapsed().as_secs_f64()),
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

fn write_trace(path: &Path, trace: &PlacerTrace) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    trace
        .write_csv(BufWriter::new(file))
        .map_err(CliError::io(path))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(CliError::io(p)),
        _ => Ok(()),
    }
}

fn redirect_file(path: &mut PathBuf, dir: &Path) {
    if let Some(name) = path.file_name() {
        *path = dir.join(name);
    }
}

/// Start placement for `init`, with its phase timing.
fn start_placement(
    design: &Design,
    adj: &SparseSymMatrix,
    init: &Init,
    gift_cfg: &GiftConfig,
) -> Result<(Placement, PhaseTiming), CliError> {
    let start = Instant::now();
    let g = match init {
        Init::Center => gift::initial_signal(design, gift_cfg),
        Init::Gift => gift::gift_place(design, adj, gift_cfg)?.placement,
        Init::Eigen => spectral::eigenvector_baseline(design, adj)?.placement,
        Init::File(p) => read_placement(design, p)?,
    };
    let phase = match init {
        Init::Center | Init::File(_) => "init",
        Init::Gift => "filter",
        Init::Eigen => "eigen",
    };
    Ok((g, PhaseTiming::new(phase, start.elapsed().as_secs_f64())))
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Gift(_) => "gift",
            Job::Place(_) => "place",
            Job::Spectrum(_) => "spectrum",
            Job::Metrics(_) => "metrics",
            Job::Benchgen(_) => "benchgen",
            Job::Report(_) => "report",
        }
    }

    pub fn aux(&self) -> Option<&Path> {
        match self {
            Job::Gift(j) => Some(&j.aux),
            Job::Place(j) => Some(&j.aux),
            Job::Spectrum(j) => Some(&j.aux),
            Job::Metrics(j) => Some(&j.aux),
            Job::Report(j) => Some(&j.aux),
            Job::Benchgen(_) => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Job::Gift(j) => j.gift.seed,
            Job::Place(j) => j.gift.seed,
            Job::Report(j) => j.gift.seed,
            Job::Benchgen(j) => j.spec.seed,
            Job::Spectrum(_) | Job::Metrics(_) => 0,
        }
    }

    /// Where the manifest goes unless the caller names a path.
    pub fn default_manifest(&self) -> PathBuf {
        match self {
            Job::Gift(j) => j.out.with_extension("manifest.json"),
            Job::Place(j) => j.out.with_extension("manifest.json"),
            Job::Metrics(j) => j.out.with_extension("manifest.json"),
            Job::Spectrum(j) => j.dir.join("manifest.json"),
            Job::Report(j) => j.dir.join("manifest.json"),
            Job::Benchgen(j) => j.dir.join(format!("{}.manifest.json", j.name)),
        }
    }

    /// Send every output into `dir`, keeping file names.
    pub fn redirect(&mut self, dir: &Path) {
        match self {
            Job::Gift(j) => {
                redirect_file(&mut j.out, dir);
                redirect_file(&mut j.timing, dir);
            }
            Job::Place(j) => {
                redirect_file(&mut j.out, dir);
                redirect_file(&mut j.trace, dir);
            }
            Job::Metrics(j) => redirect_file(&mut j.out, dir),
            Job::Spectrum(j) => j.dir = dir.to_path_buf(),
            Job::Report(j) => j.dir = dir.to_path_buf(),
            Job::Benchgen(j) => j.dir = dir.to_path_buf(),
        }
    }

    pub fn run(&self) -> Result<Outcome, CliError> {
        match self.aux() {
            Some(aux) => {
                let (design, parse) = load_design(aux)?;
                self.run_on(Some(&design), parse)
            }
            None => self.run_on(None, PhaseTiming::new("parse", 0.0)),
        }
    }

    /// Run with the design already parsed (`None` only for `benchgen`).
    pub fn run_on(&self, design: Option<&Design>, parse: PhaseTiming) -> Result<Outcome, CliError> {
        let mut out = Outcome {
            timings: vec![parse],
            ..Outcome::default()
        };
        if let Some(aux) = self.aux() {
            out.inputs.push(aux.to_path_buf());
        }
        let need = || design.ok_or_else(|| CliError::Usage("no design".into()));
        match self {
            Job::Gift(j) => run_gift(j, need()?, &mut out)?,
            Job::Place(j) => run_place(j, need()?, &mut out)?,
            Job::Spectrum(j) => run_spectrum(j, need()?, &mut out)?,
            Job::Metrics(j) => run_metrics(j, need()?, &mut out)?,
            Job::Report(j) => run_report(j, need()?, &mut out)?,
            Job::Benchgen(j) => run_benchgen(j, &mut out)?,
        }
        Ok(out)
    }
}

fn run_gift(j: &GiftJob, design: &Design, out: &mut Outcome) -> Result<(), CliError> {
    let adj = timed("graph", &mut out.timings, || {
        graph::build_clique_graph(design, j.max_clique_pins)
    });
    let run = gift::gift_place(design, &adj, &j.gift)?;
    out.timings.push(run.timing());
    ensure_parent(&j.out)?;
    timed("write", &mut out.timings, || {
        write_placement(design, &run.placement, &j.out)
    })?;
    write_json(&j.timing, &serde_json::json!({ "phases": out.timings }))?;
    out.outputs.extend([j.out.clone(), j.timing.clone()]);
    Ok(())
}

fn place_arm(
    design: &Design,
    adj: &SparseSymMatrix,
    init: &Init,
    gift_cfg: &GiftConfig,
    placer: &PlacerConfig,
    timings: &mut Vec<PhaseTiming>,
) -> Result<(Placement, PlacerTrace), CliError> {
    let (g0, t) = start_placement(design, adj, init, gift_cfg)?;
    timings.push(t);
    let (g, trace) = timed("place", timings, || run_placer(design, &g0, placer))?;
    log::info!(
        "{init}: {} iterations, converged {}, hpwl {:.3}",
        trace.iterations(),
        trace.converged(),
        trace.last().hpwl
    );
    Ok((g, trace))
}

fn run_place(j: &PlaceJob, design: &Design, out: &mut Outcome) -> Result<(), CliError> {
    let adj = timed("graph", &mut out.timings, || {
        graph::build_clique_graph(design, j.max_clique_pins)
    });
    if let Init::File(p) = &j.init {
        out.inputs.push(p.clone());
    }
    let (g, trace) = place_arm(design, &adj, &j.init, &j.gift, &j.placer, &mut out.timings)?;
    ensure_parent(&j.out)?;
    ensure_parent(&j.trace)?;
    timed("write", &mut out.timings, || -> Result<(), CliError> {
        write_placement(design, &g, &j.out)?;
        write_trace(&j.trace, &trace)
    })?;
    out.outputs.extend([j.out.clone(), j.trace.clone()]);
    Ok(())
}

fn run_spectrum(j: &SpectrumJob, design: &Design, out: &mut Outcome) -> Result<(), CliError> {
    if design.num_cells() == 0 {
        return Err(CliError::EmptyDesign);
    }
    if design.num_cells() > spectral::DENSE_LIMIT {
        return Err(spectral::SpectralError::TooLargeForDense {
            n: design.num_cells(),
            limit: spectral::DENSE_LIMIT,
        }
        .into());
    }
    let adj = timed("graph", &mut out.timings, || {
        graph::build_clique_graph(design, j.max_clique_pins)
    });
    let mut hists = Vec::new();
    let mut responses = Vec::new();
    let start = Instant::now();
    for &sigma in &j.sigmas {
        let lap = graph::augmented_normalized_laplacian(&adj, sigma)?;
        let basis = spectral::eigendecompose(&lap)?;
        hists.push((
            sigma,
            spectral::eigenvalue_histogram(basis.lambdas(), j.bins),
        ));
        for &k in &j.ks {
            responses.push((
                sigma,
                k,
                spectral::filter_response(sigma, k, basis.lambdas()),
            ));
        }
    }
    out.timings
        .push(PhaseTiming::new("eigen", start.elapsed().as_secs_f64()));
    fs::create_dir_all(&j.dir).map_err(CliError::io(&j.dir))?;
    let hist_path = j.dir.join("histogram.csv");
    let resp_path = j.dir.join("response.csv");
    let mut buf = Vec::new();
    spectral::write_histogram_csv(&mut buf, &hists).expect("write to Vec");
    fs::write(&hist_path, &buf).map_err(CliError::io(&hist_path))?;
    buf.clear();
    spectral::write_response_csv(&mut buf, &responses).expect("write to Vec");
    fs::write(&resp_path, &buf).map_err(CliError::io(&resp_path))?;
    out.outputs.extend([hist_path, resp_path]);
    Ok(())
}

fn run_metrics(j: &MetricsJob, design: &Design, out: &mut Outcome) -> Result<(), CliError> {
    out.inputs.push(j.pl.clone());
    let g = read_placement(design, &j.pl)?;
    let adj = timed("graph", &mut out.timings, || {
        graph::build_clique_graph(design, j.max_clique_pins)
    });
    let report = timed("metrics", &mut out.timings, || {
        metrics::report(design, &adj, &g, &j.grid)
    })?;
    ensure_parent(&j.out)?;
    write_json(&j.out, &report)?;
    out.outputs.push(j.out.clone());
    Ok(())
}

fn run_benchgen(j: &BenchgenJob, out: &mut Outcome) -> Result<(), CliError> {
    let design = timed("generate", &mut out.timings, || bench::generate(&j.spec))?;
    let aux = timed("write", &mut out.timings, || {
        giftplace::netlist::write_design(&design, None, &j.dir, &j.name)
    })?;
    out.outputs.push(aux);
    for ext in ["nodes", "nets", "pl", "scl"] {
        out.outputs.push(j.dir.join(format!("{}.{ext}", j.name)));
    }
    Ok(())
}

fn summarize(init: &Init, trace: &PlacerTrace, timings: &[PhaseTiming]) -> ArmSummary {
    let last = trace.last();
    let secs = |phase: &str| {
        timings
            .iter()
            .filter(|t| t.phase == phase)
            .map(|t| t.seconds)
            .sum()
    };
    ArmSummary {
        init: init.to_string(),
        iterations: trace.iterations(),
        converged: trace.converged(),
        hpwl: last.hpwl,
        overflow: last.overflow,
        init_seconds: timings
            .iter()
            .filter(|t| t.phase != "place")
            .map(|t| t.seconds)
            .sum(),
        place_seconds: secs("place"),
    }
}

fn run_report(j: &ReportJob, design: &Design, out: &mut Outcome) -> Result<(), CliError> {
    let adj = timed("graph", &mut out.timings, || {
        graph::build_clique_graph(design, None)
    });
    fs::create_dir_all(&j.dir).map_err(CliError::io(&j.dir))?;
    let mut arms = Vec::new();
    for (label, init) in [("center", Init::Center), ("gift", Init::Gift)] {
        let mut t = Vec::new();
        let (g, trace) = place_arm(design, &adj, &init, &j.gift, &j.placer, &mut t)?;
        let pl = j.dir.join(format!("{label}.pl"));
        let csv = j.dir.join(format!("{label}.trace.csv"));
        write_placement(design, &g, &pl)?;
        write_trace(&csv, &trace)?;
        out.outputs.extend([pl, csv]);
        arms.push(summarize(&init, &trace, &t));
        out.timings.extend(
            t.into_iter()
                .map(|p| PhaseTiming::new(format!("{label}.{}", p.phase), p.seconds)),
        );
    }
    let gift_arm = arms.pop().expect("two arms");
    let center = arms.pop().expect("two arms");
    let report = PairedReport {
        design: j.aux.clone(),
        cells: design.num_cells(),
        nets: design.num_nets(),
        iteration_ratio: gift_arm.iterations as f64 / center.iterations.max(1) as f64,
        hpwl_ratio: gift_arm.hpwl / center.hpwl,
        center,
        gift: gift_arm,
    };
    let path = j.dir.join("report.json");
    write_json(&path, &report)?;
    out.outputs.push(path);
    Ok(())
}
