use entperc::entanglement::EntanglementError;
use entperc::lattice::LatticeError;
use entperc::percolation::PercolationError;
use entperc::protocols::ProtocolError;
use entperc::series::SeriesError;
use thiserror::Error;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_STATISTICAL: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Percolation(#[from] PercolationError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

fn percolation_is_statistical(e: &PercolationError) -> bool {
    matches!(e, PercolationError::NonBracketing { .. } | PercolationError::NoConditioningEvents)
}

impl CliError {
    /// 3 when the run completed but the statistics could not settle the
    /// question, 1 on a failed write to stdout, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Percolation(e) | CliError::Protocol(ProtocolError::Percolation(e))
                if percolation_is_statistical(e) =>
            {
                EXIT_STATISTICAL
            }
            CliError::Protocol(ProtocolError::NoSignChange { .. } | ProtocolError::InsufficientSeparation { .. }) => {
                EXIT_STATISTICAL
            }
            CliError::Io(_) => 1,
            _ => EXIT_CONFIG,
        }
    }
}
