//! High-density series in `q = 1 - p`.

mod enumerate;
mod polynomial;

use thiserror::Error;

use crate::lattice::LatticeKind;

pub use enumerate::{
    enumerate_clusters, neighbours, origins, series_from_classes, theta_series, ClusterClass, MAX_T,
    STOP_WINDOW,
};
pub use polynomial::{compose_q_power, eval_series, Coeff, Polynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("no cluster enumeration for {0} lattices")]
    UnsupportedKind(LatticeKind),
    #[error("order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("enumeration exceeded its memory budget")]
    ResourceLimit,
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
}

/// Names accepted by [`published_series`].
pub const PUBLISHED: [&str; 8] = [
    "theta_square",
    "pi_square",
    "pi_square_b",
    "theta_triangular",
    "theta_hexagonal",
    "theta_kagome",
    "pi_bowtie",
    "theta_cep1",
];

/// Literature series used as constants.
///
/// * `pi_square`: `A = (0,0)`, `A′ = (1,1)` on the square lattice.
/// * `pi_square_b`: two nearest neighbours of the square lattice.
/// * `pi_bowtie`: the bowtie triple `A, A′, A″`.
/// * `theta_cep1`: the hexagonal row with `q -> q^2` (a double bond is lost
///   only if both copies fail).
pub fn published_series(name: &str) -> Result<Polynomial, SeriesError> {
    let p = match name {
        "theta_square" => Polynomial::from_ints(&[1, 0, 0, 0, -1, 0, -4], 6),
        "pi_square" => Polynomial::from_ints(&[1, 0, 0, 0, 0, 0, 0, 0, -4, 0, -18], 10),
        "pi_square_b" => Polynomial::from_ints(&[1, 0, 0, 0, 0, 0, -1, 1, -8], 8),
        "theta_triangular" => Polynomial::from_ints(
            &[1, 0, 0, 0, 0, 0, -1, 0, 0, 0, -6, 6, -6, 0, -21, 42],
            15,
        ),
        "theta_hexagonal" => Polynomial::from_ints(&[1, 0, 0, -1, -3, -6, -25], 6),
        "theta_kagome" => Polynomial::from_ints(&[1, 0, 0, 0, -1, 0, -6], 6),
        "pi_bowtie" => {
            let mut c = vec![0; 15];
            c[0] = 1;
            c[14] = -4;
            Polynomial::from_ints(&c, 14)
        }
        "theta_cep1" => published_series("theta_hexagonal")?.compose_q_power(2),
        _ => return Err(SeriesError::UnknownSeries(name.to_string())),
    };
    Ok(p)
}

/// Published θ series of a lattice, if there is one.
pub fn published_theta(kind: LatticeKind) -> Option<Polynomial> {
    let name = match kind {
        LatticeKind::Square => "theta_square",
        LatticeKind::Triangular => "theta_triangular",
        LatticeKind::Hexagonal => "theta_hexagonal",
        LatticeKind::Kagome => "theta_kagome",
        _ => return None,
    };
    published_series(name).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_rows() {
        assert_eq!(
            published_series("theta_square").unwrap().to_string(),
            "1 - 1*q^4 - 4*q^6 (order 6)"
        );
        assert_eq!(
            published_series("pi_bowtie").unwrap().to_string(),
            "1 - 4*q^14 (order 14)"
        );
        let cep1 = published_series("theta_cep1").unwrap();
        assert_eq!(cep1.truncate(8).to_string(), "1 - 1*q^6 - 3*q^8 (order 8)");
        assert!(published_series("theta_cubic").is_err());
        for name in PUBLISHED {
            assert_eq!(published_series(name).unwrap().coeff(0), Coeff::from_integer(1));
        }
    }

    #[test]
    fn cep1_is_hexagonal_at_q_squared() {
        let cep1 = published_series("theta_cep1").unwrap();
        let hex = published_series("theta_hexagonal").unwrap();
        assert!((cep1.eval_at_q(0.2) - hex.eval_at_q(0.04)).abs() < 1e-15);
    }
}
