//! Scalar backends.
//!
//! Every table in the crate is generic over [`Scalar`], which is implemented
//! for `f64` and for arbitrary-precision rationals ([`Rational`]). The
//! rational backend reproduces the probabilities exactly; the float backend
//! scales to large `n`.

use std::fmt::{self, Debug};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational number used by the [`Backend::ExactRational`] backend.
pub type Rational = BigRational;

/// Largest `n` accepted by the exact-rational backend unless configured otherwise.
/// Entries carry denominators of size `n^Θ(n)`.
pub const DEFAULT_RATIONAL_CAP: usize = 64;

/// Exponents above which `(1 - 1/n)^m` is evaluated through the logarithm.
const LOG_POWER_THRESHOLD: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Float64,
    ExactRational,
}

impl Backend {
    /// Checks that a table of size `n` may be built with this backend.
    pub fn check_capacity(self, n: usize, cap: usize) -> Result<()> {
        match self {
            Backend::ExactRational if n > cap => Err(Error::Capacity { n, cap }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Float64 => f.write_str("float"),
            Backend::ExactRational => f.write_str("rational"),
        }
    }
}

/// Arithmetic needed by the drift, kernel and hitting-time computations.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + Debug + PartialOrd + Send + Sync + 'static
{
    const BACKEND: Backend;

    fn from_u64(v: u64) -> Self;

    /// `num / den`, exact in the rational backend.
    fn ratio(num: u64, den: u64) -> Self;

    /// Converts a float constant (e, log n, ...) into the backend.
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// `self^exp` by repeated squaring.
    fn powu(&self, exp: usize) -> Self {
        num_traits::pow::pow(self.clone(), exp)
    }

    /// `(1 - 1/n)^exp`.
    fn complement_power(n: usize, exp: usize) -> Self {
        Self::ratio(n as u64 - 1, n as u64).powu(exp)
    }

    /// Sum of a sequence; the float backend compensates rounding.
    fn sum_all<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().fold(Self::zero(), |acc, x| acc + x)
    }

    /// Text rendering; rationals print as `p/q`, floats with `precision`
    /// significant decimals.
    fn render(&self, precision: usize) -> String;

    /// JSON rendering; rationals become `{num, den}` objects.
    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float64;

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn complement_power(n: usize, exp: usize) -> Self {
        if exp > LOG_POWER_THRESHOLD {
            (exp as f64 * (-1.0 / n as f64).ln_1p()).exp()
        } else {
            (1.0 - 1.0 / n as f64).powu(exp)
        }
    }

    fn sum_all<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for x in iter {
            acc.add(x);
        }
        acc.value()
    }

    fn render(&self, precision: usize) -> String {
        render_float(*self, precision)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::ExactRational;

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn ratio(num: u64, den: u64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite float constant")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn render(&self, _precision: usize) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "num": self.numer().to_string(),
            "den": self.denom().to_string(),
        })
    }
}

/// Renders `v` with `precision` significant digits, switching to scientific
/// notation outside `[1e-4, 1e15)`.
pub fn render_float(v: f64, precision: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-4..1e15).contains(&a) {
        let int_digits = a.log10().floor() as i64 + 1;
        let decimals = (precision as i64 - int_digits).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{:.*e}", precision.saturating_sub(1), v)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Binomial coefficient as a backend scalar, `0` when `k > n`.
pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    if k > n {
        return S::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(S::one(), |acc, i| {
        acc * S::from_u64((n - i) as u64) / S::from_u64((i + 1) as u64)
    })
}

/// Absolute value for any scalar.
pub fn abs<S: Scalar>(v: &S) -> S {
    if *v < S::zero() {
        -v.clone()
    } else {
        v.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials_match_in_both_backends() {
        assert_eq!(binomial::<Rational>(10, 3), Rational::from_u64(120));
        assert_eq!(binomial::<f64>(10, 3), 120.0);
        assert_eq!(binomial::<f64>(3, 5), 0.0);
        assert_eq!(Scalar::to_f64(&binomial::<Rational>(60, 30)), 118264581564861424.0);
    }

    #[test]
    fn complement_power_branches_agree() {
        let n = 1_000_000;
        let via_log = <f64 as Scalar>::complement_power(n, 2 * n);
        let direct = (1.0 - 1.0 / n as f64).powu(2 * n);
        assert!((direct - via_log).abs() <= 1e-9 * direct);
        assert!((via_log - (-2.0f64).exp()).abs() < 1e-6);
        let exact = <Rational as Scalar>::complement_power(4, 4);
        assert_eq!(exact, Rational::ratio(81, 256));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = <f64 as Scalar>::sum_all([1e16, 1.0, -1e16, 1.0]);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn rendering() {
        assert_eq!(Rational::ratio(2, 8).render(15), "1/4");
        assert_eq!(Rational::from_u64(3).render(15), "3");
        assert_eq!(render_float(0.25, 5), "0.25000");
        assert_eq!(render_float(1234.5, 6), "1234.50");
        assert_eq!(render_float(1.5e-7, 3), "1.50e-7");
        assert_eq!(
            Rational::ratio(1, 3).to_json(),
            serde_json::json!({"num": "1", "den": "3"})
        );
    }

    #[test]
    fn capacity() {
        assert!(Backend::ExactRational.check_capacity(64, 64).is_ok());
        assert_eq!(
            Backend::ExactRational.check_capacity(65, 64),
            Err(Error::Capacity { n: 65, cap: 64 })
        );
        assert!(Backend::Float64.check_capacity(100_000, 64).is_ok());
    }
}
