//! Exact drift of the zero-count process.
//!
//! State `k` is the number of zero-bits of the current search point. The
//! drift `Δ_n(k)` is the expected one-step decrease of that count under
//! standard bit mutation with rate `1/n` and elitist selection. The
//! normalized drift `Δ*_n(k) = Δ_{n+1}(k) (1 - 1/(n+1))^{-(n+1)}` drops the
//! `(1 - 1/n)` factors and is defined for `k = 0..=n+1`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar, DEFAULT_RATIONAL_CAP};

/// Number of bits `n`; always at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ProblemSize(usize);

impl ProblemSize {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            Err(Error::InvalidSize { n })
        } else {
            Ok(ProblemSize(n))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// `⌊n/2⌋`, the zero-count of the standard start point.
    pub fn half(self) -> usize {
        self.0 / 2
    }
}

impl TryFrom<usize> for ProblemSize {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        ProblemSize::new(n)
    }
}

impl From<ProblemSize> for usize {
    fn from(n: ProblemSize) -> usize {
        n.0
    }
}

impl fmt::Display for ProblemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Probability mass function of `Binomial(trials, 1/n)`.
///
/// In the float backend the tail is cut once a term underflows to zero; all
/// later terms are smaller still.
pub fn mutation_pmf<S: Scalar>(n: ProblemSize, trials: usize) -> Vec<S> {
    let n = n.get();
    let mut pmf = Vec::with_capacity(trials + 1);
    let mut term = S::complement_power(n, trials);
    pmf.push(term.clone());
    for i in 0..trials {
        term = term * S::ratio((trials - i) as u64, ((i + 1) * (n - 1)) as u64);
        if S::BACKEND == Backend::Float64 && term.is_zero() {
            break;
        }
        pmf.push(term.clone());
    }
    pmf
}

fn check_state(n: ProblemSize, k: usize, max: usize) -> Result<()> {
    if k > max {
        return Err(Error::domain("k", k, format!("0..={max} for n = {n}")));
    }
    Ok(())
}

/// `Σ_{ℓ≥1} a[ℓ] Σ_{j<ℓ} (ℓ-j) b[j]`, the expected positive part of `A - B`
/// for independent counts with masses `a` and `b`.
fn positive_part_mean<S: Scalar>(a: &[S], b: &[S]) -> S {
    // Running Σ b[j] and Σ j b[j] over j < ℓ.
    let mut mass = S::zero();
    let mut moment = S::zero();
    let mut terms = Vec::with_capacity(a.len());
    for (l, a_l) in a.iter().enumerate().skip(1) {
        if let Some(b_prev) = b.get(l - 1) {
            mass = mass + b_prev.clone();
            moment = moment + b_prev.clone() * S::from_u64((l - 1) as u64);
        }
        let inner = S::from_u64(l as u64) * mass.clone() - moment.clone();
        terms.push(a_l.clone() * inner);
    }
    S::sum_all(terms)
}

/// Exact drift `Δ_n(k)` for `0 ≤ k ≤ n`.
///
/// The number of flipped zero-bits `a ~ Bin(k, 1/n)` and flipped one-bits
/// `b ~ Bin(n-k, 1/n)` are independent; the offspring is accepted iff
/// `a ≥ b`, so the drift is `E[(a - b)^+]`.
pub fn drift<S: Scalar>(n: ProblemSize, k: usize) -> Result<S> {
    check_state(n, k, n.get())?;
    if k == 0 {
        return Ok(S::zero());
    }
    let a = mutation_pmf::<S>(n, k);
    let b = mutation_pmf::<S>(n, n.get() - k);
    Ok(positive_part_mean(&a, &b))
}

/// Powers `C(m, i) n^{-i}` for `i = 0..=m`, cut at float underflow.
fn scaled_binomials<S: Scalar>(n: usize, m: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(m + 1);
    let mut term = S::one();
    out.push(term.clone());
    for i in 0..m {
        term = term * S::ratio((m - i) as u64, ((i + 1) * n) as u64);
        if S::BACKEND == Backend::Float64 && term.is_zero() {
            break;
        }
        out.push(term.clone());
    }
    out
}

/// Normalized drift `Δ*_n(k)` for `0 ≤ k ≤ n+1`:
/// `Σ_{ℓ=1}^{k} C(k,ℓ) Σ_{j<ℓ} (ℓ-j) C(n+1-k, j) n^{-(j+ℓ)}`.
pub fn normalized_drift<S: Scalar>(n: ProblemSize, k: usize) -> Result<S> {
    check_state(n, k, n.get() + 1)?;
    if k == 0 {
        return Ok(S::zero());
    }
    let a = scaled_binomials::<S>(n.get(), k);
    let b = scaled_binomials::<S>(n.get(), n.get() + 1 - k);
    Ok(positive_part_mean(&a, &b))
}

/// Sandwich `e^{-1} k/n ≤ Δ_n(k) ≤ k/n` (float).
pub fn drift_bounds(n: ProblemSize, k: usize) -> (f64, f64) {
    let upper = k as f64 / n.get() as f64;
    (upper / std::f64::consts::E, upper)
}

/// Sandwich `(1+1/n)^{k-1} k/n ≤ Δ*_n(k) ≤ (1+1/n)^n k/n`, exact in `S`.
pub fn normalized_drift_bounds<S: Scalar>(n: ProblemSize, k: usize) -> (S, S) {
    let n = n.get();
    let base = S::ratio(n as u64 + 1, n as u64);
    let slope = S::ratio(k as u64, n as u64);
    if k == 0 {
        return (S::zero(), S::zero());
    }
    (base.powu(k - 1) * slope.clone(), base.powu(n) * slope)
}

/// Drifts and normalized drifts of one problem size.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftTable<S> {
    n: ProblemSize,
    delta: Vec<S>,
    delta_star: Vec<S>,
}

impl<S: Scalar> DriftTable<S> {
    /// Builds the table with the default rational cap.
    pub fn build(n: ProblemSize) -> Result<Self> {
        Self::build_capped(n, DEFAULT_RATIONAL_CAP)
    }

    pub fn build_capped(n: ProblemSize, rational_cap: usize) -> Result<Self> {
        S::BACKEND.check_capacity(n.get(), rational_cap)?;
        let delta = (0..=n.get())
            .into_par_iter()
            .map(|k| drift::<S>(n, k))
            .collect::<Result<Vec<_>>>()?;
        let delta_star = (0..=n.get() + 1)
            .into_par_iter()
            .map(|k| normalized_drift::<S>(n, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(DriftTable {
            n,
            delta,
            delta_star,
        })
    }

    pub fn n(&self) -> ProblemSize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    /// `Δ_n(k)` for `k = 0..=n`.
    pub fn delta(&self) -> &[S] {
        &self.delta
    }

    /// `Δ*_n(k)` for `k = 0..=n+1`.
    pub fn delta_star(&self) -> &[S] {
        &self.delta_star
    }
}

/// Free-function form of [`DriftTable::build`].
pub fn build_drift_table<S: Scalar>(n: ProblemSize) -> Result<DriftTable<S>> {
    DriftTable::build(n)
}
