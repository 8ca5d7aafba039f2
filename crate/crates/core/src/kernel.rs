//! Transition kernel of the zero-count chain.
//!
//! From state `k` the chain moves to `j < k` when the mutation flips
//! `k - j + ℓ` zero-bits and `ℓ` one-bits for some `ℓ ≥ 0`. Every other
//! outcome either keeps the fitness or is rejected, so `p(k, k)` is the
//! complement of the improving moves.

use rayon::prelude::*;

use crate::drift::{mutation_pmf, ProblemSize};
use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar, DEFAULT_RATIONAL_CAP};

/// Row `p(k, 0..=k)`.
fn kernel_row<S: Scalar>(n: ProblemSize, k: usize) -> Vec<S> {
    let zeros = mutation_pmf::<S>(n, k);
    let ones = mutation_pmf::<S>(n, n.get() - k);
    let mut row = vec![S::zero(); k + 1];
    for m in 1..=k {
        // p(k, k-m) = Σ_ℓ P[a = m+ℓ] P[b = ℓ]
        let terms = zeros
            .iter()
            .skip(m)
            .zip(ones.iter())
            .map(|(a, b)| a.clone() * b.clone());
        row[k - m] = S::sum_all(terms);
    }
    let leaving = S::sum_all(row[..k].iter().cloned());
    row[k] = S::one() - leaving;
    row
}

fn check_pair(n: ProblemSize, k: usize, j: usize) -> Result<()> {
    if k > n.get() {
        return Err(Error::domain("k", k, format!("0..={n}")));
    }
    if j > k {
        return Err(Error::domain(
            "j",
            j,
            format!("0..={k} (the chain never increases the zero-count)"),
        ));
    }
    Ok(())
}

/// One-step probability `p(k, j)` of moving from `k` to `j` zero-bits.
pub fn transition_prob<S: Scalar>(n: ProblemSize, k: usize, j: usize) -> Result<S> {
    check_pair(n, k, j)?;
    Ok(kernel_row::<S>(n, k).swap_remove(j))
}

/// `p(k, ≤ j) = Σ_{j' ≤ j} p(k, j')` for `j < k`.
pub fn transition_tail<S: Scalar>(n: ProblemSize, k: usize, j: usize) -> Result<S> {
    check_pair(n, k, j)?;
    if j == k {
        return Err(Error::domain("j", j, format!("0..{k}")));
    }
    let row = kernel_row::<S>(n, k);
    Ok(S::sum_all(row[..=j].iter().cloned()))
}

/// The two upper bounds `C(k, ℓ) n^{-ℓ} ≤ (k/n)^ℓ / ℓ!` on `p(k, ≤ k-ℓ)`.
///
/// Both are formed as running products of factors `≤ 1` so the float
/// backend underflows only when the bound itself does.
pub fn tail_bounds<S: Scalar>(n: ProblemSize, k: usize, jump: usize) -> (S, S) {
    let n = n.get() as u64;
    let k = k as u64;
    let mut choose = S::one();
    let mut poisson = S::one();
    for i in 0..jump as u64 {
        choose = choose * S::ratio(k.saturating_sub(i), (i + 1) * n);
        poisson = poisson * S::ratio(k, (i + 1) * n);
    }
    (choose, poisson)
}

/// Lower-triangular row-stochastic kernel `p(k, j)`, `0 ≤ j ≤ k ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel<S> {
    n: ProblemSize,
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> TransitionKernel<S> {
    pub fn build(n: ProblemSize) -> Result<Self> {
        Self::build_capped(n, DEFAULT_RATIONAL_CAP)
    }

    pub fn build_capped(n: ProblemSize, rational_cap: usize) -> Result<Self> {
        S::BACKEND.check_capacity(n.get(), rational_cap)?;
        let rows = (0..=n.get())
            .into_par_iter()
            .map(|k| kernel_row::<S>(n, k))
            .collect();
        Ok(TransitionKernel { n, rows })
    }

    pub fn n(&self) -> ProblemSize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    /// `p(k, 0..=k)`.
    pub fn row(&self, k: usize) -> &[S] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// `p(k, j)`; zero above the diagonal.
    pub fn prob(&self, k: usize, j: usize) -> S {
        self.rows[k].get(j).cloned().unwrap_or_else(S::zero)
    }

    /// `p(k, ≤ j)`.
    pub fn tail(&self, k: usize, j: usize) -> S {
        let row = &self.rows[k];
        S::sum_all(row[..=j.min(k)].iter().cloned())
    }

    /// Probability of leaving state `k`, summed directly over `j < k`.
    pub fn leaving(&self, k: usize) -> S {
        S::sum_all(self.rows[k][..k].iter().cloned())
    }

    /// `Σ_{j<k} (k - j) p(k, j)`, which must reproduce `Δ_n(k)`.
    pub fn expected_decrease(&self, k: usize) -> S {
        S::sum_all(
            self.rows[k][..k]
                .iter()
                .enumerate()
                .map(|(j, p)| p.clone() * S::from_u64((k - j) as u64)),
        )
    }
}

/// Free-function form of [`TransitionKernel::build`].
pub fn build_kernel<S: Scalar>(n: ProblemSize) -> Result<TransitionKernel<S>> {
    TransitionKernel::build(n)
}
