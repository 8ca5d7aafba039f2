//! Data behind the two comparison plots: expansion errors of `Δ*` and `1/Δ*`
//! against `α = k/n`, and the gap between `Q_{⌊n/2⌋}` and the exact runtime.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{ExpansionEval, Order};
use crate::drift::{DriftTable, ProblemSize};
use crate::error::{Error, Result};
use crate::hitting::hitting_profile;
use crate::kernel::TransitionKernel;

/// One `(n, k)` point of the expansion-error plot.
///
/// `err_m = Δ* - approx_m`; `inv_err_m = 1/Δ* - (order-m expansion of 1/Δ*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub delta_star_exact: f64,
    pub approx0: f64,
    pub approx1: f64,
    pub approx2: f64,
    pub err0: f64,
    pub err1: f64,
    pub err2: f64,
    pub inv_err0: f64,
    pub inv_err1: f64,
    pub inv_err2: f64,
}

/// One `n` of the runtime-gap plot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeGapRow {
    pub n: usize,
    pub q_exact: f64,
    pub g_exact: f64,
    pub diff: f64,
    pub diff_minus_half_e_log: f64,
}

/// Inclusive range of problem sizes, written `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeRange {
    pub lo: ProblemSize,
    pub hi: ProblemSize,
}

impl SizeRange {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        let lo = ProblemSize::new(lo)?;
        let hi = ProblemSize::new(hi)?;
        if lo > hi {
            return Err(Error::domain("n-range", format!("{lo}:{hi}"), "lo <= hi"));
        }
        Ok(SizeRange { lo, hi })
    }

    pub fn sizes(&self) -> impl Iterator<Item = ProblemSize> {
        (self.lo.get()..=self.hi.get()).map(|n| ProblemSize::new(n).expect("n >= lo >= 2"))
    }
}

impl std::str::FromStr for SizeRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain("n-range", s, "lo:hi with 2 <= lo <= hi");
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        SizeRange::new(lo, hi)
    }
}

/// Rows for `k = 1..=n`.
pub fn expansion_rows(n: ProblemSize) -> Result<Vec<ExpansionRow>> {
    let table = DriftTable::<f64>::build(n)?;
    let size = n.get();
    (1..=size)
        .map(|k| {
            let exact = table.delta_star()[k];
            let eval = ExpansionEval::at(k as f64 / size as f64, n)?;
            let inv = |order| 1.0 / exact - eval.inverse(n, order);
            Ok(ExpansionRow {
                n: size,
                k,
                alpha: eval.alpha,
                delta_star_exact: exact,
                approx0: eval.approx[0],
                approx1: eval.approx[1],
                approx2: eval.approx[2],
                err0: exact - eval.approx[0],
                err1: exact - eval.approx[1],
                err2: exact - eval.approx[2],
                inv_err0: inv(Order::Zero),
                inv_err1: inv(Order::One),
                inv_err2: inv(Order::Two),
            })
        })
        .collect()
}

pub fn expansion_figure(range: SizeRange) -> Result<Vec<ExpansionRow>> {
    let sizes: Vec<ProblemSize> = range.sizes().collect();
    let blocks: Vec<Vec<ExpansionRow>> = sizes
        .into_par_iter()
        .map(expansion_rows)
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn runtime_gap_row(n: ProblemSize) -> Result<RuntimeGapRow> {
    let kernel = TransitionKernel::<f64>::build(n)?;
    let table = DriftTable::<f64>::build(n)?;
    let profile = hitting_profile(&kernel, &table)?;
    let half = n.half();
    let q = profile.q()[half];
    let g = profile.g()[half];
    let diff = q - g;
    Ok(RuntimeGapRow {
        n: n.get(),
        q_exact: q,
        g_exact: g,
        diff,
        diff_minus_half_e_log: diff - 0.5 * E * (n.get() as f64).ln(),
    })
}

pub fn runtime_gap_figure(range: SizeRange) -> Result<Vec<RuntimeGapRow>> {
    let sizes: Vec<ProblemSize> = range.sizes().collect();
    sizes.into_par_iter().map(runtime_gap_row).collect()
}
