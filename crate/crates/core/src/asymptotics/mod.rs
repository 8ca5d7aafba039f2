//! Asymptotic expansion of the normalized drift and of the runtime.
//!
//! For `α = k/n` bounded away from 1,
//! `Δ*_n(k) = S_1(α) + T_1(α)/n + T_2(α)/n² + O(n⁻³)`. Summing the inverse
//! gives the expansion `Q_{⌊n/2⌋} = e n log n - C_1 n + e log n + O(1)` of the
//! inverse-drift sum, which sits `(e/2) log n + O(1)` above the expected
//! runtime `e n log n - C_1 n + (e/2) log n + C_2`.

pub mod quadrature;
pub mod special;

use std::f64::consts::{E, LN_2};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::drift::ProblemSize;
use crate::error::{Error, Result};

pub use special::{bessel_i, s_r, t1, t2};

/// Euler–Mascheroni constant.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// Constant term of the expected-runtime expansion; taken as published.
pub const C2: f64 = 0.597_898_75;

/// Coefficients `d_0, d_1, d_2` of the `log n / n^k` terms in the refined
/// runtime expansion, as published. Recorded only; no estimator uses them.
pub const REFINED_LOG_COEFFS: [f64; 3] = [0.5, 1.125, 1.9375];

/// Default distance `ε` from `α = 1` inside which the expansion is not used.
pub const DEFAULT_EPS: f64 = 0.125;

/// Width of the sliver `[0, SLIVER]` where `1/S_1(t) - 1/t` is replaced by its limit.
const SLIVER: f64 = 1e-6;

/// `lim_{t→0} (1/S_1(t) - 1/t)`, from `S_1(t) = t + (3/2)t² + …`.
pub const INTEGRAND_LIMIT: f64 = -1.5;

const QUAD_TOL: f64 = 1e-12;

/// `1/S_1(t) - 1/t`, written as `-(S_1(t) - t) / (t S_1(t))` to avoid
/// cancellation near the origin.
pub fn c0_integrand(t: f64) -> f64 {
    if t == 0.0 {
        return INTEGRAND_LIMIT;
    }
    let excess = special::s1_excess(t);
    -excess / (t * (t + excess))
}

/// `C_0 = γ - log 2 + ∫_0^{1/2} (1/S_1(t) - 1/t) dt`.
pub fn constant_c0() -> Result<f64> {
    static C0: OnceLock<std::result::Result<f64, Error>> = OnceLock::new();
    C0.get_or_init(|| {
        let body = quadrature::integrate(c0_integrand, SLIVER, 0.5, QUAD_TOL, QUAD_TOL, 200)?;
        Ok(EULER_GAMMA - LN_2 + INTEGRAND_LIMIT * SLIVER + body.value)
    })
    .clone()
}

/// `C_1 = -e C_0`, the linear coefficient of the runtime.
pub fn constant_c1() -> Result<f64> {
    Ok(-E * constant_c0()?)
}

/// Number of correction terms kept in the expansion of `Δ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Order {
    Zero,
    One,
    Two,
}

impl Order {
    pub const ALL: [Order; 3] = [Order::Zero, Order::One, Order::Two];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<usize> for Order {
    type Error = Error;

    fn try_from(v: usize) -> Result<Self> {
        match v {
            0 => Ok(Order::Zero),
            1 => Ok(Order::One),
            2 => Ok(Order::Two),
            _ => Err(Error::domain("order", v, "{0, 1, 2}")),
        }
    }
}

/// Expansion ingredients at one normalized state `α`, plus the three
/// truncations of `Δ*` for a given `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEval {
    pub alpha: f64,
    pub s0: f64,
    pub s1: f64,
    pub t1: f64,
    pub t2: f64,
    /// Orders 0, 1 and 2 of `Δ*_n(αn)`.
    pub approx: [f64; 3],
}

impl ExpansionEval {
    pub fn at(alpha: f64, n: ProblemSize) -> Result<Self> {
        let s0 = s_r(0, alpha)?;
        let s1 = s_r(1, alpha)?;
        let t1 = t1(alpha)?;
        let t2 = t2(alpha)?;
        let n = n.get() as f64;
        let first = s1 + t1 / n;
        Ok(ExpansionEval {
            alpha,
            s0,
            s1,
            t1,
            t2,
            approx: [s1, first, first + t2 / (n * n)],
        })
    }

    pub fn delta_star(&self, order: Order) -> f64 {
        self.approx[order.index()]
    }

    /// Truncations of `1/Δ*`:
    /// `1/S_1 - T_1/(n S_1²) - (S_1 T_2 - T_1²)/(n² S_1³)`.
    pub fn inverse(&self, n: ProblemSize, order: Order) -> f64 {
        let n = n.get() as f64;
        let s1 = self.s1;
        let mut v = 1.0 / s1;
        if order >= Order::One {
            v -= self.t1 / (n * s1 * s1);
        }
        if order >= Order::Two {
            v -= (s1 * self.t2 - self.t1 * self.t1) / (n * n * s1 * s1 * s1);
        }
        v
    }
}

/// Order-truncated expansion of `Δ*_n(k)`, valid for `1 ≤ k ≤ (1-ε)n`.
pub fn expansion_delta_star(n: ProblemSize, k: usize, order: Order, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("eps", eps, "(0, 1)"));
    }
    let limit = (1.0 - eps) * n.get() as f64;
    if k == 0 || k as f64 > limit {
        return Err(Error::domain(
            "k",
            k,
            format!("1..={} (k ≤ (1-ε)n with ε = {eps})", limit.floor()),
        ));
    }
    let alpha = k as f64 / n.get() as f64;
    Ok(ExpansionEval::at(alpha, n)?.delta_star(order))
}

/// Closed-form runtime estimates for one problem size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeEstimate {
    pub n: ProblemSize,
    /// `e n log n - C_1 n + e log n`, the estimate of `Q_{⌊n/2⌋}`.
    pub q_asym: f64,
    /// `e n log n - C_1 n + (e/2) log n + C_2`, the estimate of `E[T]`.
    pub et_asym: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub gamma: f64,
}

impl RuntimeEstimate {
    pub fn new(n: ProblemSize) -> Result<Self> {
        let c0 = constant_c0()?;
        let c1 = -E * c0;
        let x = n.get() as f64;
        let log_n = x.ln();
        let lead = E * x * log_n - c1 * x;
        Ok(RuntimeEstimate {
            n,
            q_asym: lead + E * log_n,
            et_asym: lead + 0.5 * E * log_n + C2,
            c0,
            c1,
            c2: C2,
            gamma: EULER_GAMMA,
        })
    }
}

pub fn asymptotic_q(n: ProblemSize) -> Result<f64> {
    Ok(RuntimeEstimate::new(n)?.q_asym)
}

pub fn asymptotic_et(n: ProblemSize) -> Result<f64> {
    Ok(RuntimeEstimate::new(n)?.et_asym)
}
