//! Majorization calculus for pure bipartite states.
//!
//! Singlet conversion probabilities (SCP) for a single pure bond, optimal
//! distillation of several bonds joining the same pair of nodes, and the SCP
//! bookkeeping of entanglement swapping between two identical bonds.

use std::fmt;

use thiserror::Error;

/// Absolute tolerance used for normalization and ordering checks.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("{what} = {value} is outside the domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("target Schmidt vector is identically zero")]
    ZeroTarget,
    #[error("Schmidt coefficients must be non-negative, non-increasing and sum to 1")]
    NotSchmidt,
    #[error("swapping bonds with different states (alpha1 = {0}, beta1 = {1}) has no known SCP")]
    AsymmetricSwap(f64, f64),
}

type Result<T> = std::result::Result<T, EntanglementError>;

fn check_range(what: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_nan() || value < lo || value > hi {
        Err(EntanglementError::Domain { what, value, lo, hi })
    } else {
        Ok(value)
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        check_range("probability", value, 0.0, 1.0).map(Probability)
    }

    /// Clamps tiny floating excursions outside `[0, 1]`.
    pub(crate) fn clamped(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `q = 1 - p`.
    pub fn complement(self) -> Self {
        Probability(1.0 - self.0)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Schmidt coefficients `(a0, a1)` of a two-qubit pure state, `a0 >= a1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtState {
    a0: f64,
    a1: f64,
}

impl SchmidtState {
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        if !(a0.is_finite() && a1.is_finite())
            || a1 < 0.0
            || a0 + TOLERANCE < a1
            || (a0 + a1 - 1.0).abs() > TOLERANCE
        {
            return Err(EntanglementError::NotSchmidt);
        }
        Ok(SchmidtState { a0, a1 })
    }

    pub fn from_alpha0(a0: f64) -> Result<Self> {
        check_range("alpha0", a0, 0.5, 1.0)?;
        Ok(SchmidtState { a0, a1: 1.0 - a0 })
    }

    /// The state whose single-bond SCP is `p`, i.e. `a1 = p / 2`.
    pub fn from_scp(p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0)?;
        Ok(SchmidtState {
            a0: 1.0 - p / 2.0,
            a1: p / 2.0,
        })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
}

/// Schmidt coefficients of an arbitrary pure bipartite state, sorted
/// non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector(Vec<f64>);

impl SchmidtVector {
    /// Sorts `coeffs` descending and checks the invariants.
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(EntanglementError::Empty);
        }
        if coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(EntanglementError::NotSchmidt);
        }
        let total: f64 = coeffs.iter().sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(EntanglementError::NotSchmidt);
        }
        coeffs.sort_by(|a, b| b.total_cmp(a));
        Ok(SchmidtVector(coeffs))
    }

    /// The maximally entangled two-qubit state, zero padded to `len`.
    pub fn singlet(len: usize) -> Self {
        let mut v = vec![0.0; len.max(2)];
        v[0] = 0.5;
        v[1] = 0.5;
        SchmidtVector(v)
    }

    pub fn padded(&self, len: usize) -> Self {
        let mut v = self.0.clone();
        if v.len() < len {
            v.resize(len, 0.0);
        }
        SchmidtVector(v)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for SchmidtVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<SchmidtState> for SchmidtVector {
    fn from(s: SchmidtState) -> Self {
        SchmidtVector(vec![s.a0, s.a1])
    }
}

/// SCP of a single pure bond: `min{1, 2(1 - a0)}`.
pub fn scp_pure(alpha0: f64) -> Result<Probability> {
    check_range("alpha0", alpha0, 0.5, 1.0)?;
    Ok(Probability::clamped((2.0 * (1.0 - alpha0)).min(1.0)))
}

/// `min{1, x}`, snapping values within [`TOLERANCE`] of 1 to exactly 1 so
/// that saturation at the boundary survives rounding.
fn saturate(x: f64) -> Probability {
    if x >= 1.0 - TOLERANCE {
        Probability(1.0)
    } else {
        Probability::clamped(x)
    }
}

fn ascending_prefix_sums(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Weak submajorization `r ≺_w s`: every prefix sum of the ascending sort of
/// `r` is at least the corresponding prefix sum of `s`.
pub fn submajorized(r: &[f64], s: &[f64]) -> Result<bool> {
    if r.len() != s.len() {
        return Err(EntanglementError::LengthMismatch(r.len(), s.len()));
    }
    if r.is_empty() {
        return Err(EntanglementError::Empty);
    }
    let pr = ascending_prefix_sums(r);
    let ps = ascending_prefix_sums(s);
    Ok(pr.iter().zip(&ps).all(|(a, b)| a >= b))
}

/// Schmidt vector of `n` independent pure bonds viewed as one bipartite state:
/// the `2^n` products of one coefficient from each bond, sorted descending.
pub fn tensor_schmidt(states: &[SchmidtState]) -> Result<SchmidtVector> {
    if states.is_empty() {
        return Err(EntanglementError::Empty);
    }
    let mut gammas = vec![1.0];
    for s in states {
        gammas = gammas
            .iter()
            .flat_map(|g| [g * s.a0, g * s.a1])
            .collect();
    }
    gammas.sort_by(|a, b| b.total_cmp(a));
    Ok(SchmidtVector(gammas))
}

/// Optimal probability of converting `psi` into `phi` by LOCC: the largest
/// `p` in `[0, 1]` with `psi ≺_w p·phi`. Unequal lengths are zero padded.
///
/// Evaluated in closed form as the minimum over `k` of the ratio of the
/// `k`-smallest-entry sums; `max_conversion_probability` agrees with a
/// bisection over `submajorized` to 1e-12.
pub fn max_conversion_probability(psi: &[f64], phi: &[f64]) -> Result<Probability> {
    if psi.is_empty() || phi.is_empty() {
        return Err(EntanglementError::Empty);
    }
    if phi.iter().all(|&x| x == 0.0) {
        return Err(EntanglementError::ZeroTarget);
    }
    let d = psi.len().max(phi.len());
    let mut r = psi.to_vec();
    let mut s = phi.to_vec();
    r.resize(d, 0.0);
    s.resize(d, 0.0);
    let pr = ascending_prefix_sums(&r);
    let ps = ascending_prefix_sums(&s);
    let mut best = 1.0f64;
    for (a, b) in pr.iter().zip(&ps) {
        if *b > 0.0 {
            best = best.min(a / b);
        }
    }
    Ok(Probability::clamped(best))
}

/// Maximum probability of distilling one singlet from pure bonds with the
/// given larger Schmidt coefficients: `min{1, 2(1 - ∏ a0_i)}`.
pub fn distill_probability(alphas0: &[f64]) -> Result<Probability> {
    if alphas0.is_empty() {
        return Err(EntanglementError::Empty);
    }
    let mut prod = 1.0;
    for &a in alphas0 {
        prod *= check_range("alpha0", a, 0.5, 1.0)?;
    }
    Ok(saturate(2.0 * (1.0 - prod)))
}

/// Average SCP after swapping two identical bonds with smaller Schmidt
/// coefficient `alpha1`: equal to the single-bond SCP `2·alpha1`.
pub fn swap_scp(alpha1: f64) -> Result<Probability> {
    check_range("alpha1", alpha1, 0.0, 0.5)?;
    Ok(Probability::clamped(2.0 * alpha1))
}

/// Swap SCP for two bonds given as states. Only identical bonds are allowed.
pub fn swap_scp_bonds(a: SchmidtState, b: SchmidtState) -> Result<Probability> {
    if (a.a1 - b.a1).abs() > TOLERANCE {
        return Err(EntanglementError::AsymmetricSwap(a.a1, b.a1));
    }
    swap_scp(a.a1)
}

/// Swap SCP expressed through the single-bond SCPs of the two bonds.
pub fn swap_probability(p_first: f64, p_second: f64) -> Result<Probability> {
    swap_scp_bonds(SchmidtState::from_scp(p_first)?, SchmidtState::from_scp(p_second)?)
}

/// CEP I on a double bond: convert each copy separately and keep at least one.
pub fn cep1_density(p: Probability) -> Probability {
    let q = 1.0 - p.value();
    Probability::clamped(1.0 - q * q)
}

/// CEP II on a double bond: distill both copies together,
/// `min{1, 2[1 - (1 - p/2)^2]}`.
pub fn cep2_density(p: Probability) -> Probability {
    let a0 = 1.0 - p.value() / 2.0;
    saturate(2.0 * (1.0 - a0 * a0))
}
