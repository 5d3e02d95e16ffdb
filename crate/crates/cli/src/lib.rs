//! Command-line front end for `giftplace`. Every command resolves its flags
//! into a [`Job`], runs it, and records a [`RunManifest`] that `replay` can
//! re-execute.

pub mod args;
pub mod error;
pub mod jobs;
pub mod manifest;
pub mod settings;

use std::path::PathBuf;

use giftplace::bench::BenchSpec;
use giftplace::metrics::GridConfig;

pub use args::Cli;
use args::{BenchgenArgs, Command, GiftArgs, MetricsArgs, PlaceArgs, ReportArgs, SpectrumArgs};
pub use error::CliError;
use jobs::{BenchgenJob, GiftJob, Job, MetricsJob, PlaceJob, ReportJob, SpectrumJob};
pub use manifest::RunManifest;
use settings::Settings;

/// Run one command. Returns the manifest it wrote and where.
pub fn run(cli: Cli) -> Result<(RunManifest, PathBuf), CliError> {
    match cli.command {
        Command::Gift(a) => gift(a),
        Command::Place(a) => place(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Metrics(a) => metrics(a),
        Command::Benchgen(a) => benchgen(a),
        Command::Report(a) => report(a),
        Command::Replay(a) => {
            let recorded = RunManifest::load(&a.manifest)?;
            let mut job = recorded.job;
            if let Some(dir) = &a.out_dir {
                job.redirect(dir);
            }
            let path = job.default_manifest();
            execute(job, None, Some(path))
        }
    }
}

fn execute(
    job: Job,
    design: Option<(giftplace::Design, giftplace::gift::PhaseTiming)>,
    manifest: Option<PathBuf>,
) -> Result<(RunManifest, PathBuf), CliError> {
    let outcome = match design {
        Some((d, parse)) => job.run_on(Some(&d), parse)?,
        None => job.run()?,
    };
    let path = manifest.unwrap_or_else(|| job.default_manifest());
    let m = RunManifest::new(job, outcome);
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    m.save(&path)?;
    Ok((m, path))
}

fn gift(a: GiftArgs) -> Result<(RunManifest, PathBuf), CliError> {
    let s = Settings::from_flags(&a.gift, None)?;
    let job = Job::Gift(GiftJob {
        timing: a
            .timing
            .unwrap_or_else(|| a.out.with_extension("timing.json")),
        aux: a.aux,
        out: a.out,
        gift: s.gift_config()?,
        max_clique_pins: s.max_clique_pins,
    });
    execute(job, None, a.manifest)
}

fn place(a: PlaceArgs) -> Result<(RunManifest, PathBuf), CliError> {
    let s = Settings::from_flags(&a.gift, Some(&a.placer))?;
    let gift = s.gift_config()?;
    let (design, parse) = jobs::load_design(&a.aux)?;
    let placer = s.placer_config(&design)?;
    let job = Job::Place(PlaceJob {
        trace: a.trace.unwrap_or_else(|| a.out.with_extension("trace.csv")),
        aux: a.aux,
        init: a.init,
        out: a.out,
        gift,
        placer,
        max_clique_pins: s.max_clique_pins,
    });
    execute(job, Some((design, parse)), a.manifest)
}

fn spectrum(a: SpectrumArgs) -> Result<(RunManifest, PathBuf), CliError> {
    if a.sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(CliError::Usage(
            "sigma values must be finite and >= 0".into(),
        ));
    }
    if a.k.contains(&0) {
        return Err(CliError::Usage("powers must be >= 1".into()));
    }
    let job = Job::Spectrum(SpectrumJob {
        aux: a.aux,
        sigmas: a.sigma,
        ks: a.k,
        bins: a.bins.max(1),
        dir: a.out_dir,
        max_clique_pins: a.max_clique_pins,
    });
    execute(job, None, None)
}

fn metrics(a: MetricsArgs) -> Result<(RunManifest, PathBuf), CliError> {
    let (design, parse) = jobs::load_design(&a.aux)?;
    let mut grid = GridConfig::for_design(&design);
    grid.nx = a.grid_nx.unwrap_or(grid.nx).max(1);
    grid.ny = a.grid_ny.unwrap_or(grid.ny).max(1);
    grid.target_density = a.target_density.unwrap_or(grid.target_density);
    let job = Job::Metrics(MetricsJob {
        aux: a.aux,
        pl: a.pl,
        out: a.out,
        grid,
        max_clique_pins: a.max_clique_pins,
    });
    execute(job, Some((design, parse)), a.manifest)
}

fn benchgen(a: BenchgenArgs) -> Result<(RunManifest, PathBuf), CliError> {
    let mut spec = BenchSpec::new(a.cells, a.seed);
    spec.rows = a.rows;
    spec.cols = a.cols;
    spec.terminals = a.terminals;
    spec.fanout = a.fanout.parse()?;
    if let Some(r) = a.long_range {
        spec.long_range_ratio = r;
    }
    if let Some(u) = a.utilization {
        spec.utilization = u;
    }
    let job = Job::Benchgen(BenchgenJob {
        spec,
        dir: a.out_dir,
        name: a.name,
    });
    execute(job, None, None)
}

fn report(a: ReportArgs) -> Result<(RunManifest, PathBuf), CliError> {
    let s = Settings::from_flags(&a.gift, Some(&a.placer))?;
    let gift = s.gift_config()?;
    let (design, parse) = jobs::load_design(&a.aux)?;
    let placer = s.placer_config(&design)?;
    let job = Job::Report(ReportJob {
        aux: a.aux,
        dir: a.out_dir,
        gift,
        placer,
        max_clique_pins: s.max_clique_pins,
    });
    execute(job, Some((design, parse)), None)
}
