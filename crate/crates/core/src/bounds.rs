//! Error functional `η` and mechanical verification of the drift lemmas.
//!
//! `η(k) = Σ_{ℓ<k} p(k,ℓ) Σ_{j=ℓ+1}^{k} 1/Δ(j)` is the one-step drift of the
//! potential `Q_k` at state `k`. If `η` stays within `[η_min, η_max]` then the
//! expected hitting time lies between `Q/η_max` and `Q/η_min`; the checks
//! below evaluate every inequality of that argument on the exact kernel and
//! record the observed slack.

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::{normalized_drift_bounds, DriftTable, ProblemSize};
use crate::error::{Error, Result};
use crate::hitting::{harmonic, hitting_profile, HittingProfile};
use crate::kernel::{tail_bounds, TransitionKernel};
use crate::scalar::{Backend, Rational, Scalar, DEFAULT_RATIONAL_CAP};

/// Lower-bound constant `c₁ = 4 e^{7/2}` of the runtime corridor.
pub fn corridor_c1() -> f64 {
    4.0 * E.powf(3.5)
}

/// Upper-bound constant `c₂ = e^{-2} / (12 (1 + e^{-2}/4))` of the corridor.
pub fn corridor_c2() -> f64 {
    let x = (-2.0f64).exp();
    x / (12.0 * (1.0 + x / 4.0))
}

/// Floats this close to their bound are re-decided in exact arithmetic.
pub const NEAR_BOUND_TOL: f64 = 1e-9;

/// Relative rounding allowance for float verdicts that cannot be re-decided
/// exactly. Several inequalities hold with equality at an endpoint.
pub const FLOAT_ROUNDING_TOL: f64 = 1e-12;

/// `η(k)` for `1 ≤ k ≤ n`.
pub fn eta<S: Scalar>(kernel: &TransitionKernel<S>, table: &DriftTable<S>, k: usize) -> Result<S> {
    check_same(kernel, table)?;
    let n = table.n().get();
    if k == 0 || k > n {
        return Err(Error::domain("k", k, format!("1..={n}")));
    }
    Ok(eta_unchecked(kernel, table, k))
}

fn eta_unchecked<S: Scalar>(kernel: &TransitionKernel<S>, table: &DriftTable<S>, k: usize) -> S {
    let row = kernel.row(k);
    let delta = table.delta();
    // Walk ℓ downwards so the inner sum over j = ℓ+1..=k grows by one term.
    let mut crossed = S::zero();
    let mut terms = Vec::with_capacity(k);
    for l in (0..k).rev() {
        crossed = crossed + S::one() / delta[l + 1].clone();
        terms.push(row[l].clone() * crossed.clone());
    }
    S::sum_all(terms)
}

fn check_same<S: Scalar>(kernel: &TransitionKernel<S>, table: &DriftTable<S>) -> Result<()> {
    if kernel.n() != table.n() {
        return Err(Error::Mismatch(format!(
            "kernel has n = {}, drift table has n = {}",
            kernel.n(),
            table.n()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Max,
    Min,
}

/// Maximum or minimum of `η` over `k_lo..=k_hi`.
pub fn eta_star<S: Scalar>(
    kernel: &TransitionKernel<S>,
    table: &DriftTable<S>,
    k_lo: usize,
    k_hi: usize,
    mode: Extremum,
) -> Result<S> {
    check_same(kernel, table)?;
    let n = table.n().get();
    if k_lo == 0 || k_lo > k_hi || k_hi > n {
        return Err(Error::domain(
            "range",
            format!("{k_lo}..={k_hi}"),
            format!("non-empty subrange of 1..={n}"),
        ));
    }
    let values = (k_lo..=k_hi).map(|k| eta_unchecked(kernel, table, k));
    Ok(extremum(values, mode).expect("non-empty range"))
}

fn extremum<S: Scalar>(values: impl Iterator<Item = S>, mode: Extremum) -> Option<S> {
    values.reduce(|a, b| match (mode, b.partial_cmp(&a)) {
        (Extremum::Max, Some(std::cmp::Ordering::Greater)) => b,
        (Extremum::Min, Some(std::cmp::Ordering::Less)) => b,
        _ => a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one inequality over its range, reported at the point of least slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub range: String,
    /// Analytic bound at the extremal point.
    pub bound: Option<f64>,
    /// Observed value at the extremal point.
    pub observed: Option<f64>,
    /// `null` when the check does not apply to this `n`.
    pub pass: Option<bool>,
    pub status: CheckStatus,
    /// Where the slack is smallest, e.g. `k=3` or `k=5,l=2`.
    pub worst_at: Option<String>,
    /// Signed distance to the bound; negative means violated.
    pub slack: Option<f64>,
    /// Whether the verdict was decided in exact rational arithmetic.
    pub exact: bool,
}

/// `η` profile and inequality verdicts for one problem size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: ProblemSize,
    pub backend: Backend,
    /// `η(k)` for `k = 1..=n`.
    pub eta: Vec<f64>,
    /// `max η` over `1..=⌊n/2⌋`.
    pub eta_star_max: f64,
    pub eta_star_max_range: String,
    /// `min η` over `2..=n` (just `{n}` when `n = 2`).
    pub eta_star_min: f64,
    pub eta_star_min_range: String,
    pub checks: Vec<CheckRecord>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// `observed ≤ bound`
    Upper,
    /// `observed ≥ bound`
    Lower,
}

struct Probe<S> {
    at: String,
    observed: S,
    bound: S,
}

/// Everything the checks need for one `n` and backend.
struct Lab<S> {
    n: ProblemSize,
    table: DriftTable<S>,
    kernel: TransitionKernel<S>,
    profile: HittingProfile<S>,
    eta: Vec<S>,
}

impl<S: Scalar> Lab<S> {
    fn build(n: ProblemSize, cap: usize) -> Result<Self> {
        let table = DriftTable::<S>::build_capped(n, cap)?;
        let kernel = TransitionKernel::<S>::build_capped(n, cap)?;
        let profile = hitting_profile(&kernel, &table)?;
        let eta = std::iter::once(S::zero())
            .chain((1..=n.get()).map(|k| eta_unchecked(&kernel, &table, k)))
            .collect();
        Ok(Lab {
            n,
            table,
            kernel,
            profile,
            eta,
        })
    }

    fn size(&self) -> usize {
        self.n.get()
    }

    fn c(v: f64) -> S {
        S::from_f64(v)
    }

    fn frac(a: usize, b: usize) -> S {
        S::ratio(a as u64, b as u64)
    }

    fn eta_star(&self, lo: usize, hi: usize, mode: Extremum) -> S {
        extremum(self.eta[lo..=hi].iter().cloned(), mode).expect("non-empty range")
    }

    fn log_n(&self) -> S {
        Self::c((self.size() as f64).ln())
    }
}

/// One named inequality.
struct Check {
    id: &'static str,
    side: Side,
}

const CHECKS: &[Check] = &[
    Check { id: "delta.diff.lower", side: Side::Lower },
    Check { id: "delta.diff.upper", side: Side::Upper },
    Check { id: "delta_star.diff.lower", side: Side::Lower },
    Check { id: "delta_star.diff.upper", side: Side::Upper },
    Check { id: "delta.sandwich.lower", side: Side::Lower },
    Check { id: "delta.sandwich.upper", side: Side::Upper },
    Check { id: "delta_star.sandwich.lower", side: Side::Lower },
    Check { id: "delta_star.sandwich.upper", side: Side::Upper },
    Check { id: "tail.binomial", side: Side::Upper },
    Check { id: "tail.poisson", side: Side::Upper },
    Check { id: "inv_delta.diff.upper", side: Side::Upper },
    Check { id: "inv_delta.diff.lower", side: Side::Lower },
    Check { id: "eta.at_least_one", side: Side::Lower },
    Check { id: "eta.upper", side: Side::Upper },
    Check { id: "eta.lower", side: Side::Lower },
    Check { id: "g.below_q", side: Side::Upper },
    Check { id: "q.envelope", side: Side::Upper },
    Check { id: "theorem.lower", side: Side::Lower },
    Check { id: "theorem.upper", side: Side::Upper },
    Check { id: "corridor.lower", side: Side::Lower },
    Check { id: "corridor.upper", side: Side::Upper },
];

/// Identifiers of every check in report order.
pub fn check_ids() -> impl Iterator<Item = &'static str> {
    CHECKS.iter().map(|c| c.id)
}

fn at_k(k: usize) -> String {
    format!("k={k}")
}

/// Range label and probes of a check; `None` range means not applicable.
fn probes<S: Scalar>(lab: &Lab<S>, id: &str) -> (String, Vec<Probe<S>>) {
    type L<S> = Lab<S>;
    let n = lab.size();
    let half = lab.n.half();
    let delta = lab.table.delta();
    let star = lab.table.delta_star();
    let g = lab.profile.g();
    let q = lab.profile.q();
    let probe = |at: String, observed: S, bound: S| Probe { at, observed, bound };
    let theorem_applies = n >= 4;
    match id {
        "delta.diff.lower" | "delta.diff.upper" => {
            let bound = if id.ends_with("lower") {
                S::one() / (L::<S>::c(E) * S::from_u64(n as u64))
            } else {
                L::<S>::frac(2, n - 1)
            };
            let ps = (0..n)
                .map(|k| probe(at_k(k), delta[k + 1].clone() - delta[k].clone(), bound.clone()))
                .collect();
            (format!("k=0..={}", n - 1), ps)
        }
        "delta_star.diff.lower" | "delta_star.diff.upper" => {
            let bound = if id.ends_with("lower") {
                L::<S>::frac(1, n)
            } else {
                L::<S>::c(2.0 * E) / S::from_u64(n as u64)
            };
            let ps = (0..=n)
                .map(|k| probe(at_k(k), star[k + 1].clone() - star[k].clone(), bound.clone()))
                .collect();
            (format!("k=0..={n}"), ps)
        }
        "delta.sandwich.lower" | "delta.sandwich.upper" => {
            let ps = (1..=n)
                .map(|k| {
                    let slope = L::<S>::frac(k, n);
                    let bound = if id.ends_with("lower") {
                        slope / L::<S>::c(E)
                    } else {
                        slope
                    };
                    probe(at_k(k), delta[k].clone(), bound)
                })
                .collect();
            (format!("k=1..={n}"), ps)
        }
        "delta_star.sandwich.lower" | "delta_star.sandwich.upper" => {
            let ps = (0..=n + 1)
                .map(|k| {
                    let (lo, hi) = normalized_drift_bounds::<S>(lab.n, k);
                    let bound = if id.ends_with("lower") { lo } else { hi };
                    probe(at_k(k), star[k].clone(), bound)
                })
                .collect();
            (format!("k=0..={}", n + 1), ps)
        }
        "tail.binomial" | "tail.poisson" => {
            let mut ps = Vec::new();
            for k in 1..=n {
                let row = lab.kernel.row(k);
                // cumulative[j] = p(k, ≤ j)
                let mut cumulative = Vec::with_capacity(k);
                let mut acc = S::zero();
                for p in &row[..k] {
                    acc = acc + p.clone();
                    cumulative.push(acc.clone());
                }
                for jump in 1..=k {
                    let (choose, poisson) = tail_bounds::<S>(lab.n, k, jump);
                    let bound = if id == "tail.binomial" { choose } else { poisson };
                    ps.push(probe(
                        format!("k={k},l={jump}"),
                        cumulative[k - jump].clone(),
                        bound,
                    ));
                }
            }
            ("1<=l<=k<=n".to_string(), ps)
        }
        "inv_delta.diff.upper" => {
            let mut ps = Vec::new();
            let coeff = L::<S>::c(2.0 * E * E);
            for k in 2..=n {
                for l in 1..k {
                    let observed =
                        S::one() / delta[k - l].clone() - S::one() / delta[k].clone();
                    let bound = coeff.clone() * S::from_u64((l * n * n) as u64)
                        / S::from_u64((k * (k - l) * (n - 1)) as u64);
                    ps.push(probe(format!("k={k},l={l}"), observed, bound));
                }
            }
            ("1<=l<k<=n".to_string(), ps)
        }
        "inv_delta.diff.lower" => {
            let ps = (2..=half)
                .map(|k| {
                    let observed =
                        S::one() / delta[k - 1].clone() - S::one() / delta[k].clone();
                    let bound =
                        S::from_u64(n as u64) / (L::<S>::c(E) * S::from_u64((k * k) as u64));
                    probe(at_k(k), observed, bound)
                })
                .collect();
            (format!("k=2..={half}"), ps)
        }
        "eta.at_least_one" => {
            let ps = (1..=n)
                .map(|k| probe(at_k(k), lab.eta[k].clone(), S::one()))
                .collect();
            (format!("k=1..={n}"), ps)
        }
        "eta.upper" => {
            let bound = S::one() + L::<S>::c(2.0 * E.powf(2.5)) / S::from_u64(n as u64 - 1);
            let ps = (1..=half)
                .map(|k| probe(at_k(k), lab.eta[k].clone(), bound.clone()))
                .collect();
            (format!("k=1..={half}"), ps)
        }
        "eta.lower" => {
            let bound = S::one() + L::<S>::c((-2.0f64).exp() / 4.0) / S::from_u64(n as u64);
            let ps = (2..=half)
                .map(|k| probe(at_k(k), lab.eta[k].clone(), bound.clone()))
                .collect();
            (format!("k=2..={half}"), ps)
        }
        "g.below_q" => {
            let ps = (1..=n)
                .map(|k| probe(at_k(k), g[k].clone(), q[k].clone()))
                .collect();
            (format!("k=1..={n}"), ps)
        }
        "q.envelope" => {
            let ps = (1..=n)
                .map(|k| {
                    let bound = L::<S>::c(E * n as f64 * harmonic(k));
                    probe(at_k(k), q[k].clone(), bound)
                })
                .collect();
            (format!("k=1..={n}"), ps)
        }
        "theorem.lower" if theorem_applies => {
            let eta_max = lab.eta_star(1, half, Extremum::Max);
            let bound = S::sum_all(
                (1..=half).map(|k| S::one() / (eta_max.clone() * delta[k].clone())),
            );
            (
                format!("X0={half}"),
                vec![probe(at_k(half), g[half].clone(), bound)],
            )
        }
        "theorem.upper" if theorem_applies => {
            let eta_min = lab.eta_star(2, n, Extremum::Min);
            let bound = S::sum_all(
                std::iter::once(S::one() / delta[1].clone()).chain(
                    (2..=half).map(|k| S::one() / (eta_min.clone() * delta[k].clone())),
                ),
            );
            (
                format!("X0={half}"),
                vec![probe(at_k(half), g[half].clone(), bound)],
            )
        }
        "corridor.lower" if theorem_applies => {
            let bound = q[half].clone() - L::<S>::c(corridor_c1()) * lab.log_n();
            (
                format!("X0={half}"),
                vec![probe(at_k(half), g[half].clone(), bound)],
            )
        }
        "corridor.upper" if theorem_applies => {
            let bound = q[half].clone() - L::<S>::c(corridor_c2()) * lab.log_n();
            (
                format!("X0={half}"),
                vec![probe(at_k(half), g[half].clone(), bound)],
            )
        }
        _ => ("n>=4".to_string(), Vec::new()),
    }
}

struct Verdict {
    record: CheckRecord,
    near_bound: bool,
}

fn judge<S: Scalar>(lab: &Lab<S>, check: &Check) -> Verdict {
    let (range, ps) = probes(lab, check.id);
    let exact = S::BACKEND == Backend::ExactRational;
    let margin = |p: &Probe<S>| match check.side {
        Side::Upper => p.bound.clone() - p.observed.clone(),
        Side::Lower => p.observed.clone() - p.bound.clone(),
    };
    let worst = ps
        .iter()
        .map(|p| (margin(p), p))
        .reduce(|a, b| if b.0 < a.0 { b } else { a });
    let Some((slack, p)) = worst else {
        return Verdict {
            record: CheckRecord {
                check_id: check.id.to_string(),
                range,
                bound: None,
                observed: None,
                pass: None,
                status: CheckStatus::NotApplicable,
                worst_at: None,
                slack: None,
                exact,
            },
            near_bound: false,
        };
    };
    let bound = p.bound.to_f64();
    let observed = p.observed.to_f64();
    let slack_f = slack.to_f64();
    let scale = bound.abs().max(observed.abs()).max(f64::MIN_POSITIVE);
    let pass = if exact {
        slack >= S::zero()
    } else {
        slack_f >= -FLOAT_ROUNDING_TOL * scale
    };
    let near_bound = !exact && slack_f.abs() <= NEAR_BOUND_TOL * scale;
    Verdict {
        record: CheckRecord {
            check_id: check.id.to_string(),
            range,
            bound: Some(bound),
            observed: Some(observed),
            pass: Some(pass),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            worst_at: Some(p.at.clone()),
            slack: Some(slack_f),
            exact,
        },
        near_bound,
    }
}

fn report_from<S: Scalar>(lab: &Lab<S>, checks: Vec<CheckRecord>) -> BoundReport {
    let n = lab.size();
    let half = lab.n.half();
    let min_lo = if n >= 3 { 2 } else { n };
    BoundReport {
        n: lab.n,
        backend: S::BACKEND,
        eta: lab.eta[1..].iter().map(|v| v.to_f64()).collect(),
        eta_star_max: lab.eta_star(1, half, Extremum::Max).to_f64(),
        eta_star_max_range: format!("k=1..={half}"),
        eta_star_min: lab.eta_star(min_lo, n, Extremum::Min).to_f64(),
        eta_star_min_range: format!("k={min_lo}..={n}"),
        checks,
    }
}

/// Runs every check for `n`.
///
/// With [`Backend::Float64`], any verdict within [`NEAR_BOUND_TOL`] of its
/// bound (or failing) is recomputed in exact arithmetic when `n` is within
/// the rational cap. With [`Backend::ExactRational`] everything is exact.
pub fn verify_inequalities(n: ProblemSize, backend: Backend) -> Result<BoundReport> {
    verify_inequalities_capped(n, backend, DEFAULT_RATIONAL_CAP)
}

pub fn verify_inequalities_capped(
    n: ProblemSize,
    backend: Backend,
    rational_cap: usize,
) -> Result<BoundReport> {
    match backend {
        Backend::ExactRational => {
            let lab = Lab::<Rational>::build(n, rational_cap)?;
            let checks = CHECKS.par_iter().map(|c| judge(&lab, c).record).collect();
            Ok(report_from(&lab, checks))
        }
        Backend::Float64 => {
            let lab = Lab::<f64>::build(n, rational_cap)?;
            let verdicts: Vec<Verdict> = CHECKS.par_iter().map(|c| judge(&lab, c)).collect();
            let needs_exact = verdicts.iter().any(|v| v.near_bound);
            let exact_lab = if needs_exact && n.get() <= rational_cap {
                Some(Lab::<Rational>::build(n, rational_cap)?)
            } else {
                None
            };
            let checks = verdicts
                .into_iter()
                .zip(CHECKS)
                .map(|(v, c)| match (&exact_lab, v.near_bound) {
                    (Some(exact), true) => judge(exact, c).record,
                    _ => v.record,
                })
                .collect();
            Ok(report_from(&lab, checks))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(n: usize) -> ProblemSize {
        ProblemSize::new(n).unwrap()
    }

    fn parts<S: Scalar>(n: usize) -> (TransitionKernel<S>, DriftTable<S>) {
        let n = size(n);
        (
            TransitionKernel::build(n).unwrap(),
            DriftTable::build(n).unwrap(),
        )
    }

    #[test]
    fn constants() {
        assert!((corridor_c1() - 132.4618).abs() < 1e-4);
        assert!((1.0 / corridor_c2() - 91.6687).abs() < 1e-4);
    }

    #[test]
    fn eta_examples() {
        let (kernel, table) = parts::<Rational>(2);
        assert_eq!(eta(&kernel, &table, 1).unwrap(), Rational::ratio(1, 1));
        assert_eq!(
            eta_star(&kernel, &table, 1, 1, Extremum::Max).unwrap(),
            Rational::ratio(1, 1)
        );

        let (kernel, table) = parts::<f64>(4);
        let v = eta(&kernel, &table, 2).unwrap();
        assert!((1.0..=1.0 + 2.0 * E.powf(2.5) / 3.0).contains(&v));

        let (kernel, table) = parts::<f64>(8);
        assert!(eta(&kernel, &table, 4).unwrap() >= 1.0 + (-2.0f64).exp() / 32.0);

        let (kernel, table) = parts::<f64>(16);
        let max = eta_star(&kernel, &table, 1, 8, Extremum::Max).unwrap();
        assert!(max <= 1.0 + 2.0 * E.powf(2.5) / 15.0);
        let min = eta_star(&kernel, &table, 2, 8, Extremum::Min).unwrap();
        assert!(min >= 1.0 + (-2.0f64).exp() / 64.0);
    }

    #[test]
    fn eta_errors() {
        let (kernel, table) = parts::<f64>(6);
        assert!(eta(&kernel, &table, 0).is_err());
        assert!(eta(&kernel, &table, 7).is_err());
        assert!(eta_star(&kernel, &table, 3, 2, Extremum::Min).is_err());
        let other = DriftTable::<f64>::build(size(7)).unwrap();
        assert!(matches!(eta(&kernel, &other, 1), Err(Error::Mismatch(_))));
    }

    #[test]
    fn eta_is_drift_of_inverse_drift_potential() {
        let (kernel, table) = parts::<Rational>(9);
        let q: Vec<Rational> = std::iter::once(Rational::ratio(0, 1))
            .chain((1..=9).scan(Rational::ratio(0, 1), |acc, k| {
                *acc += Rational::ratio(1, 1) / table.delta()[k].clone();
                Some(acc.clone())
            }))
            .collect();
        for k in 1..=9 {
            let drift: Rational = (0..=k)
                .map(|j| kernel.prob(k, j) * (q[k].clone() - q[j].clone()))
                .sum();
            assert_eq!(eta(&kernel, &table, k).unwrap(), drift);
        }
    }

    #[test]
    fn small_n_marks_theorems_not_applicable() {
        let report = verify_inequalities(size(2), Backend::Float64).unwrap();
        for id in ["corridor.lower", "corridor.upper", "theorem.lower", "theorem.upper", "eta.lower"] {
            assert_eq!(report.check(id).unwrap().status, CheckStatus::NotApplicable, "{id}");
            assert_eq!(report.check(id).unwrap().pass, None);
        }
        assert!(report.all_pass());
        assert_eq!(report.eta_star_max, 1.0);
    }

    #[test]
    fn all_checks_pass_at_n4() {
        let report = verify_inequalities(size(4), Backend::Float64).unwrap();
        for c in &report.checks {
            assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
        }
        assert_eq!(report.checks.len(), check_ids().count());
        // Δ*_n(1) - Δ*_n(0) = 1/n exactly, so this verdict needs exact arithmetic.
        assert!(report.check("delta_star.diff.lower").unwrap().exact);
        let exact = verify_inequalities(size(4), Backend::ExactRational).unwrap();
        assert!(exact.checks.iter().all(|c| c.exact && c.status == CheckStatus::Pass));
    }

    #[test]
    fn report_is_deterministic() {
        let a = verify_inequalities(size(12), Backend::Float64).unwrap();
        let b = verify_inequalities(size(12), Backend::Float64).unwrap();
        assert_eq!(a, b);
    }
}
