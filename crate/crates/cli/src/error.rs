use std::io;
use std::path::PathBuf;

use giftplace::bench::BenchError;
use giftplace::gift::GiftError;
use giftplace::metrics::MetricsError;
use giftplace::placer::PlacerError;
use giftplace::spectral::SpectralError;
use giftplace::{GraphError, NetlistError};
use thiserror::Error;

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_GRAPH: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DIVERGENCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{file}:{line}: {reason}")]
    Config {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("design has no cells")]
    EmptyDesign,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Gift(#[from] GiftError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Placer(#[from] PlacerError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 1 parse, 2 graph, 3 io, 4 placer divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Config { .. }
            | CliError::EmptyDesign
            | CliError::Manifest { .. } => EXIT_PARSE,
            CliError::Netlist(NetlistError::Io { .. }) => EXIT_IO,
            CliError::Netlist(_) => EXIT_PARSE,
            CliError::Bench(BenchError::Netlist(NetlistError::Io { .. })) => EXIT_IO,
            CliError::Bench(_) => EXIT_PARSE,
            CliError::Graph(_)
            | CliError::Spectral(_)
            | CliError::Gift(_)
            | CliError::Metrics(_) => EXIT_GRAPH,
            CliError::Placer(PlacerError::DivergenceDetected { .. }) => EXIT_DIVERGENCE,
            CliError::Placer(_) => EXIT_PARSE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(
            CliError::Netlist(NetlistError::MissingFile("a.nodes".into())).exit_code(),
            1
        );
        assert_eq!(
            CliError::Spectral(SpectralError::TooLargeForDense {
                n: 3000,
                limit: 2000
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::Io {
                path: "x".into(),
                source: io::Error::other("disk full")
            }
            .exit_code(),
            3
        );
        assert_eq!(
            CliError::Placer(PlacerError::DivergenceDetected { iter: 3, step: 1.0 }).exit_code(),
            4
        );
    }
}
