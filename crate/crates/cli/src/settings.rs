//! `key = value` settings files. Blank lines and `#` comments are ignored;
//! later lines override earlier ones; command-line flags override the file.

use std::path::Path;
use std::str::FromStr;

use giftplace::gift::GiftConfig;
use giftplace::placer::PlacerConfig;
use giftplace::{Design, FilterTerm};

use crate::args::{GiftFlags, PlacerFlags};
use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub seed: Option<u64>,
    pub jitter: Option<f64>,
    pub terms: Option<Vec<FilterTerm>>,
    pub max_clique_pins: Option<usize>,
    pub gamma: Option<f64>,
    pub lambda0: Option<f64>,
    pub lambda_growth: Option<f64>,
    pub step: Option<f64>,
    pub max_iters: Option<usize>,
    pub stop_overflow: Option<f64>,
    pub grid_nx: Option<usize>,
    pub grid_ny: Option<usize>,
    pub target_density: Option<f64>,
    pub penalty_refine: Option<usize>,
}

fn value<T: FromStr>(file: &str, line: usize, key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse().map_err(|_| CliError::Config {
        file: file.to_string(),
        line,
        reason: format!("bad value `{raw}` for `{key}`"),
    })
}

/// `sigma:k:alpha` triples separated by commas.
pub fn parse_terms(s: &str) -> Result<Vec<FilterTerm>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').map(str::trim).collect();
        let [sigma, k, alpha] = fields[..] else {
            return Err(format!("expected sigma:k:alpha, got `{part}`"));
        };
        let sigma: f64 = sigma.parse().map_err(|_| format!("bad sigma `{sigma}`"))?;
        let k: u32 = k.parse().map_err(|_| format!("bad power `{k}`"))?;
        let alpha: f64 = alpha.parse().map_err(|_| format!("bad weight `{alpha}`"))?;
        if !(sigma.is_finite() && sigma >= 0.0) || k == 0 || !alpha.is_finite() {
            return Err(format!("invalid term `{part}`"));
        }
        out.push(FilterTerm::new(sigma, k, alpha));
    }
    if out.is_empty() {
        return Err("no filter terms".into());
    }
    Ok(out)
}

impl Settings {
    pub fn parse(text: &str, file: &str) -> Result<Self, CliError> {
        let mut s = Settings::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, val) = content.split_once('=').ok_or_else(|| CliError::Config {
                file: file.to_string(),
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, val) = (key.trim(), val.trim());
            let (f, l, k, r) = (file, line, key, val);
            match key {
                "seed" => s.seed = Some(value(f, l, k, r)?),
                "jitter" => s.jitter = Some(value(f, l, k, r)?),
                "terms" => {
                    s.terms = Some(parse_terms(val).map_err(|reason| CliError::Config {
                        file: file.to_string(),
                        line,
                        reason,
                    })?)
                }
                "max_clique_pins" => s.max_clique_pins = Some(value(f, l, k, r)?),
                "gamma" => s.gamma = Some(value(f, l, k, r)?),
                "lambda0" => s.lambda0 = Some(value(f, l, k, r)?),
                "lambda_growth" => s.lambda_growth = Some(value(f, l, k, r)?),
                "step" => s.step = Some(value(f, l, k, r)?),
                "max_iters" => s.max_iters = Some(value(f, l, k, r)?),
                "stop_overflow" => s.stop_overflow = Some(value(f, l, k, r)?),
                "grid_nx" => s.grid_nx = Some(value(f, l, k, r)?),
                "grid_ny" => s.grid_ny = Some(value(f, l, k, r)?),
                "target_density" => s.target_density = Some(value(f, l, k, r)?),
                "penalty_refine" => s.penalty_refine = Some(value(f, l, k, r)?),
                other => {
                    return Err(CliError::Config {
                        file: file.to_string(),
                        line,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Settings file named by `--config` (if any) with the gift flags on top.
    pub fn from_flags(gift: &GiftFlags, placer: Option<&PlacerFlags>) -> Result<Self, CliError> {
        let mut s = match &gift.config {
            Some(p) => Self::load(p)?,
            None => Settings::default(),
        };
        s.seed = gift.seed.or(s.seed);
        s.jitter = gift.jitter.or(s.jitter);
        if let Some(t) = &gift.terms {
            s.terms = Some(parse_terms(t).map_err(CliError::Usage)?);
        }
        s.max_clique_pins = gift.max_clique_pins.or(s.max_clique_pins);
        if let Some(p) = placer {
            s.gamma = p.gamma.or(s.gamma);
            s.lambda0 = p.lambda0.or(s.lambda0);
            s.lambda_growth = p.lambda_growth.or(s.lambda_growth);
            s.step = p.step.or(s.step);
            s.max_iters = p.max_iters.or(s.max_iters);
            s.stop_overflow = p.stop_overflow.or(s.stop_overflow);
            s.grid_nx = p.grid_nx.or(s.grid_nx);
            s.grid_ny = p.grid_ny.or(s.grid_ny);
            s.target_density = p.target_density.or(s.target_density);
            s.penalty_refine = p.penalty_refine.or(s.penalty_refine);
        }
        Ok(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn gift_config(&self) -> Result<GiftConfig, CliError> {
        let mut c = GiftConfig {
            seed: self.seed(),
            ..GiftConfig::default()
        };
        if let Some(j) = self.jitter {
            c.jitter_scale = j;
        }
        if let Some(t) = &self.terms {
            c.terms = t.clone();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn placer_config(&self, design: &Design) -> Result<PlacerConfig, CliError> {
        let mut c = PlacerConfig::for_design(design);
        c.seed = self.seed();
        c.gamma = self.gamma.unwrap_or(c.gamma);
        c.lambda0 = self.lambda0.unwrap_or(c.lambda0);
        c.lambda_growth = self.lambda_growth.unwrap_or(c.lambda_growth);
        c.step = self.step.or(c.step);
        c.max_iters = self.max_iters.unwrap_or(c.max_iters);
        c.stop_overflow = self.stop_overflow.unwrap_or(c.stop_overflow);
        c.grid.nx = self.grid_nx.unwrap_or(c.grid.nx);
        c.grid.ny = self.grid_ny.unwrap_or(c.grid.ny);
        c.grid.target_density = self.target_density.unwrap_or(c.grid.target_density);
        c.penalty_refine = self.penalty_refine.unwrap_or(c.penalty_refine);
        c.validate()?;
        Ok(c)
    }
}
