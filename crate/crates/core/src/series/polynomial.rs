use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;

pub type Coeff = Ratio<i64>;

/// Truncated power series in `q = 1 - p`, known exactly up to `q^order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Coeff>,
    order: usize,
}

impl Polynomial {
    /// Builds a series from integer coefficients of `q^0, q^1, ...`; missing
    /// coefficients up to `order` are zero, extra ones are dropped.
    pub fn from_ints(coeffs: &[i64], order: usize) -> Self {
        Self::new(coeffs.iter().map(|&c| Coeff::from_integer(c)).collect(), order)
    }

    pub fn new(mut coeffs: Vec<Coeff>, order: usize) -> Self {
        coeffs.resize(order + 1, Coeff::from_integer(0));
        Polynomial { coeffs, order }
    }

    pub fn constant(c: i64, order: usize) -> Self {
        Self::from_ints(&[c], order)
    }

    /// `p^b q^t = (1 - q)^b q^t`, truncated at `order`.
    pub fn monomial_pq(b: u32, t: u32, order: usize) -> Self {
        let mut coeffs = vec![Coeff::from_integer(0); order + 1];
        let mut binom: i64 = 1;
        for k in 0..=b as usize {
            let deg = t as usize + k;
            if deg > order {
                break;
            }
            let sign = if k % 2 == 0 { 1 } else { -1 };
            coeffs[deg] = Coeff::from_integer(sign * binom);
            binom = binom * (b as i64 - k as i64) / (k as i64 + 1);
        }
        Polynomial { coeffs, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Coeff {
        self.coeffs.get(k).copied().unwrap_or_else(|| Coeff::from_integer(0))
    }

    /// Coefficients as integers, if they all are.
    pub fn integer_coeffs(&self) -> Option<Vec<i64>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    /// Lowest degree with a non-zero coefficient; `order + 1` for zero.
    pub fn valuation(&self) -> usize {
        self.coeffs
            .iter()
            .position(|c| *c != Coeff::from_integer(0))
            .unwrap_or(self.order + 1)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Polynomial {
            coeffs: self.coeffs[..=order].to_vec(),
            order,
        }
    }

    /// Value at `q = 1 - p` by Horner's rule.
    pub fn eval_at_p(&self, p: f64) -> f64 {
        self.eval_at_q(1.0 - p)
    }

    pub fn eval_at_q(&self, q: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * q + (*c.numer() as f64) / (*c.denom() as f64))
    }

    /// Substitutes `q -> q^k`.
    pub fn compose_q_power(&self, k: usize) -> Self {
        assert!(k >= 1, "power must be at least 1");
        let order = self.order * k;
        let mut coeffs = vec![Coeff::from_integer(0); order + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * k] = *c;
        }
        Polynomial { coeffs, order }
    }

    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return Polynomial::constant(1, self.order);
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = &out * self;
        }
        out
    }

    /// `q^(order + 1)` at density `p`: the size of the first omitted power.
    pub fn truncation_scale(&self, p: f64) -> f64 {
        (1.0 - p).abs().powi(self.order as i32 + 1)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let order = self.order.min(rhs.order);
        let coeffs = (0..=order).map(|k| self.coeff(k) + rhs.coeff(k)).collect();
        Polynomial { coeffs, order }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            order: self.order,
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    /// The product is known up to `min(N_f + val(g), N_g + val(f))`.
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let order = (self.order + rhs.valuation()).min(rhs.order + self.valuation());
        let mut coeffs = vec![Coeff::from_integer(0); order + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Coeff::from_integer(0) {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j > order {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs, order }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn write_coeff(f: &mut fmt::Formatter<'_>, c: Coeff) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.to_integer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

/// Canonical form, e.g. `1 - 1*q^4 - 4*q^6 (order 6)`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zero = Coeff::from_integer(0);
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == zero {
                continue;
            }
            let mag = if c < zero { -c } else { c };
            match (first, c < zero) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            write_coeff(f, mag)?;
            if k > 0 {
                write!(f, "*q^{k}")?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " (order {})", self.order)
    }
}

/// Value of a series at density `p`.
pub fn eval_series(poly: &Polynomial, p: f64) -> f64 {
    poly.eval_at_p(p)
}

/// `poly(q^k)`.
pub fn compose_q_power(poly: &Polynomial, k: usize) -> Polynomial {
    poly.compose_q_power(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta_sq() -> Polynomial {
        Polynomial::from_ints(&[1, 0, 0, 0, -1, 0, -4], 6)
    }

    #[test]
    fn canonical_text() {
        assert_eq!(theta_sq().to_string(), "1 - 1*q^4 - 4*q^6 (order 6)");
        assert_eq!(Polynomial::constant(0, 3).to_string(), "0 (order 3)");
        assert_eq!(
            Polynomial::from_ints(&[0, 0, 2, -3], 3).to_string(),
            "2*q^2 - 3*q^3 (order 3)"
        );
    }

    #[test]
    fn evaluation() {
        assert_eq!(eval_series(&theta_sq(), 1.0), 1.0);
        assert!((eval_series(&theta_sq(), 0.9) - 0.999896).abs() < 1e-15);
    }

    #[test]
    fn composition() {
        assert_eq!(compose_q_power(&theta_sq(), 1), theta_sq());
        assert_eq!(compose_q_power(&Polynomial::constant(1, 4), 3), Polynomial::constant(1, 12));
        let hex = Polynomial::from_ints(&[1, 0, 0, -1, -3, -6, -25], 6);
        assert_eq!(
            hex.compose_q_power(2),
            Polynomial::from_ints(&[1, 0, 0, 0, 0, 0, -1, 0, -3, 0, -6, 0, -25], 12)
        );
    }

    #[test]
    fn product_order_tracks_valuation() {
        let t = theta_sq();
        let one = Polynomial::constant(1, 6);
        let two = Polynomial::constant(2, 6);
        let t2 = &t * &t;
        assert_eq!(t2.order(), 6);
        let gap = &one - &t2;
        assert_eq!(gap.valuation(), 4);
        let p_double = &t2 * &(&two - &t2);
        assert_eq!(p_double.order(), 6);
        let alt = &Polynomial::constant(1, 10) - &gap.pow(2);
        assert_eq!(alt.order(), 10);
        assert_eq!(alt, Polynomial::from_ints(&[1, 0, 0, 0, 0, 0, 0, 0, -4, 0, -32], 10));
    }

    #[test]
    fn monomials() {
        assert_eq!(
            Polynomial::monomial_pq(2, 3, 6),
            Polynomial::from_ints(&[0, 0, 0, 1, -2, 1], 6)
        );
        assert_eq!(Polynomial::monomial_pq(5, 7, 6), Polynomial::constant(0, 6));
    }
}
