//! Exact, bounded, asymptotic and simulated runtimes of the (1+1) EA on OneMax.
//!
//! - [`drift`], [`gf`] and [`kernel`]: the exact drift, an independent
//!   generating-function oracle for it, and the transition kernel of the
//!   zero-count chain.
//! - [`hitting`]: exact expected hitting times and inverse-drift sums.
//! - [`bounds`]: the error functional `η` and checks of every inequality in
//!   the runtime corridor argument.
//! - [`asymptotics`]: the series, Bessel and quadrature machinery behind the
//!   asymptotic expansion, and the resulting runtime estimates.
//! - [`sim`]: seeded Monte Carlo simulation.
//! - [`figures`]: tables behind the comparison plots.

pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod drift;
pub mod error;
pub mod figures;
pub mod gf;
pub mod hitting;
pub mod kernel;
pub mod scalar;
pub mod sim;

pub use drift::{build_drift_table, drift, normalized_drift, DriftTable, ProblemSize};
pub use error::{Error, Result};
pub use hitting::{hitting_profile, hitting_times, inverse_drift_sum, HittingProfile};
pub use kernel::{build_kernel, transition_prob, TransitionKernel};
pub use scalar::{Backend, Rational, Scalar};
