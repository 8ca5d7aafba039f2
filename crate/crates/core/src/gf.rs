//! Generating-function route to the normalized drift.
//!
//! `Δ*_n(k) = [z^{k-1}] (z + 1/n)^k (1-z)^{-2} (1 + z/n)^{n+1-k}`, evaluated
//! by multiplying truncated power series. Nothing here shares code with the
//! double-sum evaluation in [`crate::drift`], so the two act as mutual oracles.

use num_traits::{One, Zero};

use crate::drift::ProblemSize;
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Power series truncated after a fixed degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Rational>,
}

impl TruncatedSeries {
    /// The constant `1` kept up to degree `max_degree`.
    pub fn one(max_degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); max_degree + 1];
        coeffs[0] = Rational::one();
        TruncatedSeries { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>, max_degree: usize) -> Self {
        coeffs.resize(max_degree + 1, Rational::zero());
        TruncatedSeries { coeffs }
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, degree: usize) -> &Rational {
        &self.coeffs[degree]
    }

    /// Cauchy product, dropping every term above the truncation degree.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let d = self.max_degree().min(other.max_degree());
        let mut out = vec![Rational::zero(); d + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(d + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(d + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        TruncatedSeries { coeffs: out }
    }

    /// `self^exp` by repeated multiplication.
    pub fn pow(&self, exp: usize) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(self.max_degree());
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }
}

/// `Δ*_n(k)` by coefficient extraction; exact rational only.
pub fn normalized_drift_gf(n: ProblemSize, k: usize) -> Result<Rational> {
    let size = n.get();
    if k > size + 1 {
        return Err(Error::domain("k", k, format!("0..={} for n = {n}", size + 1)));
    }
    if k == 0 {
        return Ok(Rational::zero());
    }
    let degree = k - 1;
    let inv_n = Rational::ratio(1, size as u64);
    let shifted = TruncatedSeries::from_coeffs(vec![inv_n.clone(), Rational::one()], degree);
    let damped = TruncatedSeries::from_coeffs(vec![Rational::one(), inv_n], degree);
    // (1 - z)^{-2} = Σ (h+1) z^h
    let pole = TruncatedSeries::from_coeffs(
        (0..=degree).map(|h| Rational::from_u64(h as u64 + 1)).collect(),
        degree,
    );
    let product = shifted.pow(k).mul(&pole).mul(&damped.pow(size + 1 - k));
    Ok(product.coeff(degree).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::normalized_drift;

    fn size(n: usize) -> ProblemSize {
        ProblemSize::new(n).unwrap()
    }

    #[test]
    fn series_product_truncates() {
        let one_plus_z = TruncatedSeries::from_coeffs(vec![Rational::one(), Rational::one()], 3);
        let cube = one_plus_z.pow(5);
        let want: Vec<Rational> = [1u64, 5, 10, 10].iter().map(|&c| Rational::from_u64(c)).collect();
        assert_eq!(cube, TruncatedSeries::from_coeffs(want, 3));
    }

    #[test]
    fn gf_examples() {
        assert_eq!(
            normalized_drift_gf(size(2), 1).unwrap(),
            normalized_drift::<Rational>(size(2), 1).unwrap()
        );
        let six_fifths = Rational::ratio(6, 5);
        assert_eq!(
            normalized_drift_gf(size(5), 6).unwrap(),
            six_fifths.clone() * six_fifths.powu(5)
        );
        assert_eq!(normalized_drift_gf(size(9), 0).unwrap(), Rational::zero());
        assert!(normalized_drift_gf(size(3), 5).is_err());
    }
}
