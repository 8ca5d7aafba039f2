//! Exact expected optimization times.
//!
//! `g(k)` is the expected number of iterations until the zero-count reaches
//! 0 from state `k`. It solves the first-step recurrence of the
//! non-increasing chain, filled in increasing `k`. The inverse-drift sums
//! `Q_k = Σ_{j≤k} 1/Δ(j)` bound it from above.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::drift::{DriftTable, ProblemSize};
use crate::error::{Error, Result};
use crate::kernel::TransitionKernel;
use crate::scalar::{Backend, Rational, Scalar};

/// Exact hitting times `g(k)` and inverse-drift sums `Q_k`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingProfile<S> {
    n: ProblemSize,
    g: Vec<S>,
    q: Vec<S>,
}

impl<S: Scalar> HittingProfile<S> {
    pub fn n(&self) -> ProblemSize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    pub fn g(&self) -> &[S] {
        &self.g
    }

    pub fn q(&self) -> &[S] {
        &self.q
    }
}

/// Hitting times `g(0..=max_state)` from the first-step recurrence
/// `g(k) = (1 + Σ_{1≤j<k} p(k,j) g(j)) / Σ_{j<k} p(k,j)`.
pub fn hitting_times<S: Scalar>(kernel: &TransitionKernel<S>, max_state: usize) -> Result<Vec<S>> {
    let n = kernel.n().get();
    if max_state > n {
        return Err(Error::domain("max_state", max_state, format!("0..={n}")));
    }
    let mut g = Vec::with_capacity(max_state + 1);
    g.push(S::zero());
    for k in 1..=max_state {
        let row = kernel.row(k);
        let leaving = kernel.leaving(k);
        if leaving.is_zero() {
            return Err(Error::Numeric(format!(
                "state {k} of n = {n} has zero leaving probability"
            )));
        }
        let weighted = S::sum_all(
            std::iter::once(S::one())
                .chain((1..k).map(|j| row[j].clone() * g[j].clone())),
        );
        g.push(weighted / leaving);
    }
    Ok(g)
}

/// `Q_{k0} = Σ_{k=1}^{k0} 1/Δ_n(k)`.
pub fn inverse_drift_sum<S: Scalar>(table: &DriftTable<S>, k0: usize) -> Result<S> {
    let n = table.n().get();
    if k0 > n {
        return Err(Error::domain("k0", k0, format!("0..={n}")));
    }
    Ok(S::sum_all(
        table.delta()[1..=k0].iter().map(|d| S::one() / d.clone()),
    ))
}

fn inverse_drift_prefix<S: Scalar>(table: &DriftTable<S>) -> Vec<S> {
    let mut q = Vec::with_capacity(table.delta().len());
    q.push(S::zero());
    match S::BACKEND {
        Backend::Float64 => {
            let mut acc = crate::scalar::NeumaierSum::default();
            for d in &table.delta()[1..] {
                acc.add(1.0 / d.to_f64());
                q.push(S::from_f64(acc.value()));
            }
        }
        Backend::ExactRational => {
            let mut acc = S::zero();
            for d in &table.delta()[1..] {
                acc = acc + S::one() / d.clone();
                q.push(acc.clone());
            }
        }
    }
    q
}

/// Full hitting profile of one problem size.
pub fn hitting_profile<S: Scalar>(
    kernel: &TransitionKernel<S>,
    table: &DriftTable<S>,
) -> Result<HittingProfile<S>> {
    if kernel.n() != table.n() {
        return Err(Error::Mismatch(format!(
            "kernel has n = {}, drift table has n = {}",
            kernel.n(),
            table.n()
        )));
    }
    let n = kernel.n();
    let g = hitting_times(kernel, n.get())?;
    let q = inverse_drift_prefix(table);
    Ok(HittingProfile { n, g, q })
}

/// Harmonic number `H_m`.
pub fn harmonic(m: usize) -> f64 {
    if m <= 1_000_000 {
        // Smallest terms first.
        let mut acc = crate::scalar::NeumaierSum::default();
        for i in (1..=m).rev() {
            acc.add(1.0 / i as f64);
        }
        acc.value()
    } else {
        let x = m as f64;
        crate::asymptotics::EULER_GAMMA + x.ln() + 0.5 / x - 1.0 / (12.0 * x * x)
            + 1.0 / (120.0 * x.powi(4))
    }
}

fn poly(coeffs: &[i64], n: usize) -> Rational {
    let x = BigInt::from(n);
    let value = coeffs
        .iter()
        .fold(BigInt::zero(), |acc, &c| acc * &x + BigInt::from(c));
    Rational::from_integer(value)
}

/// Closed forms of `g(0..=3)`.
///
/// `g(2)` and `g(3)` carry the prefactor `(1 - 1/n)^{-n}`; the exact
/// recurrence rules out the often-quoted `(1 - 1/n)^{1-n}`.
pub fn closed_form_g(n: ProblemSize, k: usize) -> Result<Rational> {
    let size = n.get();
    let base = Rational::ratio(size as u64 - 1, size as u64);
    match k {
        0 => Ok(Rational::zero()),
        1 => Ok(Rational::from_u64(size as u64) / base.powu(size - 1)),
        2 => {
            let num = poly(&[3, -8, 6, -1], size);
            let den = poly(&[2, -2, -1], size);
            Ok(num / den / base.powu(size))
        }
        3 if size >= 3 => {
            let num = poly(&[22, -114, 203, -117, -38, 49, -7, 2], size);
            let den = poly(&[12, -36, 4, 60, -23, -21, -2], size);
            Ok(num / den / base.powu(size))
        }
        3 => Err(Error::domain("n", size, "n >= 3 for the closed form of g(3)")),
        _ => Err(Error::domain("k", k, "0..=3 (closed forms exist only for small states)")),
    }
}
