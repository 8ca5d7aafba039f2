//! Entire-function series: `S_r`, the modified Bessel functions `I_0`, `I_1`,
//! and the correction terms `T_1`, `T_2`.
//!
//! Every series stops once a term drops below `1e-17` of the running sum,
//! with a hard cap of [`MAX_TERMS`] terms.

use crate::error::{Error, Result};

pub const MAX_TERMS: usize = 400;
const REL_CUTOFF: f64 = 1e-17;

fn check_unit(what: &'static str, z: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain(what, z, "[0, 1]"));
    }
    Ok(())
}

/// `Σ_{ℓ≥from} z^ℓ/ℓ! Σ_{j<ℓ} (ℓ-j)^r (1-z)^j/j!` for `r ∈ {0, 1}`.
///
/// The inner sums are built incrementally: with `E(ℓ) = Σ_{j<ℓ} w^j/j!`,
/// the `r = 0` inner sum is `E(ℓ)` and the `r = 1` inner sum is
/// `Σ_{m≤ℓ} E(m)`.
fn s_series(r: u32, z: f64, from: usize) -> f64 {
    let w = 1.0 - z;
    let mut outer = 1.0; // z^ℓ / ℓ!
    let mut exp_term = 1.0; // w^{ℓ-1} / (ℓ-1)!
    let mut exp_prefix = 0.0; // E(ℓ)
    let mut cumulative = 0.0; // Σ_{m≤ℓ} E(m)
    let mut sum = 0.0;
    for l in 1..MAX_TERMS {
        outer *= z / l as f64;
        exp_prefix += exp_term;
        exp_term *= w / l as f64;
        cumulative += exp_prefix;
        if l < from {
            continue;
        }
        let inner = if r == 0 { exp_prefix } else { cumulative };
        let term = outer * inner;
        sum += term;
        if term.abs() <= REL_CUTOFF * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

/// `S_r(z) = Σ_{ℓ≥0} z^ℓ/ℓ! Σ_{j=0}^{ℓ-1} (ℓ-j)^r (1-z)^j/j!` for `r ∈ {0, 1}`.
pub fn s_r(r: u32, z: f64) -> Result<f64> {
    if r > 1 {
        return Err(Error::domain("r", r, "{0, 1}"));
    }
    check_unit("z", z)?;
    Ok(s_series(r, z, 1))
}

/// `S_1(z) - z`, summed without the leading term so that it keeps full
/// relative precision near `z = 0`.
pub fn s1_excess(z: f64) -> f64 {
    s_series(1, z, 2)
}

/// Modified Bessel function of the first kind, `I_ν(x)` for `ν ∈ {0, 1}`.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64> {
    if nu > 1 {
        return Err(Error::domain("nu", nu, "{0, 1}"));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain("x", x, "[0, ∞)"));
    }
    let half = x / 2.0;
    let y = half * half;
    let mut term = if nu == 0 { 1.0 } else { half };
    let mut sum = term;
    for m in 1..MAX_TERMS {
        term *= y / (m as f64 * (m as f64 + nu as f64));
        sum += term;
        if term <= REL_CUTOFF * sum {
            break;
        }
    }
    Ok(sum)
}

/// `Σ_m u^m / (m! (m+shift)!)`; equals `I_0(2√u)` for shift 0 and
/// `I_1(2√u)/√u` for shift 1. Entire in `u`, so endpoints need no care.
fn bessel_u_series(shift: u32, u: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = term;
    for m in 1..MAX_TERMS {
        term *= u / (m as f64 * (m as f64 + shift as f64));
        sum += term;
        if term.abs() <= REL_CUTOFF * sum.abs() {
            break;
        }
    }
    sum
}

/// `I_0(2√u)`.
pub fn bessel_i0_sqrt(u: f64) -> f64 {
    bessel_u_series(0, u)
}

/// `I_1(2√u)/√u`, with value 1 at `u = 0`.
pub fn bessel_i1_sqrt_scaled(u: f64) -> f64 {
    bessel_u_series(1, u)
}

/// First-order correction
/// `T_1(α) = S_1/2 - 2α S_0 - α I_0(2√(α(1-α))) - √(α(1-α)) I_1(2√(α(1-α)))`.
pub fn t1(alpha: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    Ok(t1_unchecked(alpha))
}

pub(crate) fn t1_unchecked(alpha: f64) -> f64 {
    let u = alpha * (1.0 - alpha);
    0.5 * s_series(1, alpha, 1) - 2.0 * alpha * s_series(0, alpha, 1)
        - alpha * bessel_i0_sqrt(u)
        - u * bessel_i1_sqrt_scaled(u)
}

/// Second-order correction
/// `T_2(α) = -S_1/24 + α S_0 + (1+6α)/12 I_0(2s) - (1-10α+4α²)/(12 s) I_1(2s)`
/// with `s = √(α(1-α))`.
pub fn t2(alpha: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    Ok(t2_unchecked(alpha))
}

pub(crate) fn t2_unchecked(alpha: f64) -> f64 {
    let u = alpha * (1.0 - alpha);
    -s_series(1, alpha, 1) / 24.0
        + alpha * s_series(0, alpha, 1)
        + (1.0 + 6.0 * alpha) / 12.0 * bessel_i0_sqrt(u)
        - (1.0 - 10.0 * alpha + 4.0 * alpha * alpha) / 12.0 * bessel_i1_sqrt_scaled(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    /// Plain double loop over the defining series, no incremental tricks.
    fn s_r_brute(r: u32, z: f64) -> f64 {
        let mut total = 0.0;
        let mut fact_l = 1.0;
        for l in 1..60usize {
            fact_l *= l as f64;
            let mut inner = 0.0;
            let mut fact_j = 1.0;
            for j in 0..l {
                if j > 0 {
                    fact_j *= j as f64;
                }
                inner += ((l - j) as f64).powi(r as i32) * (1.0 - z).powi(j as i32) / fact_j;
            }
            total += z.powi(l as i32) / fact_l * inner;
        }
        total
    }

    #[test]
    fn s_r_matches_brute_force() {
        for &z in &[0.0, 1e-3, 0.1, 0.37, 0.5, 0.9, 1.0] {
            for r in 0..=1 {
                assert_relative_eq!(
                    s_r(r, z).unwrap(),
                    s_r_brute(r, z),
                    max_relative = 1e-14,
                    epsilon = 1e-300
                );
            }
        }
    }

    #[test]
    fn s_r_examples() {
        assert_eq!(s_r(1, 0.0).unwrap(), 0.0);
        assert_relative_eq!(s_r(1, 1.0).unwrap(), E, max_relative = 1e-15);
        let z = 1e-4;
        assert_relative_eq!(s_r(1, z).unwrap(), z + 1.5 * z * z, max_relative = 1e-7);
        assert!(s_r(2, 0.5).is_err());
        assert!(s_r(1, 1.5).is_err());
        assert_relative_eq!(s1_excess(0.3) + 0.3, s_r(1, 0.3).unwrap(), max_relative = 1e-15);
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_relative_eq!(bessel_i(0, 1.0).unwrap(), 1.266_065_877_752_008_4, max_relative = 1e-15);
        assert_relative_eq!(bessel_i(1, 1.0).unwrap(), 0.565_159_103_992_485, max_relative = 1e-15);
        assert_relative_eq!(bessel_i(0, 2.0).unwrap(), 2.279_585_302_336_067_3, max_relative = 1e-15);
        assert!(bessel_i(0, -0.1).is_err());
        assert!(bessel_i(2, 1.0).is_err());
    }

    #[test]
    fn u_series_agree_with_bessel() {
        for &u in &[1e-6f64, 0.01, 0.1875, 0.25] {
            let x = 2.0 * u.sqrt();
            assert_relative_eq!(bessel_i0_sqrt(u), bessel_i(0, x).unwrap(), max_relative = 1e-14);
            assert_relative_eq!(
                bessel_i1_sqrt_scaled(u),
                bessel_i(1, x).unwrap() / u.sqrt(),
                max_relative = 1e-14
            );
        }
        assert_eq!(bessel_i1_sqrt_scaled(0.0), 1.0);
    }

    #[test]
    fn corrections_near_zero() {
        assert_eq!(t1(0.0).unwrap(), 0.0);
        assert_eq!(t2(0.0).unwrap(), 0.0);
        assert!((t1(0.01).unwrap() + 0.015).abs() < 2e-4);
        assert!((t2(0.01).unwrap() - 0.01348).abs() < 2e-4);
        assert!(t1(1.0).unwrap().is_finite());
        assert!(t2(1.0).unwrap().is_finite());
        assert!(t1(-0.1).is_err());
    }

    #[test]
    fn corrections_match_sqrt_form() {
        for &a in &[0.05f64, 0.3, 0.5, 0.77] {
            let s = (a * (1.0 - a)).sqrt();
            let i0 = bessel_i(0, 2.0 * s).unwrap();
            let i1 = bessel_i(1, 2.0 * s).unwrap();
            let s1 = s_r(1, a).unwrap();
            let s0 = s_r(0, a).unwrap();
            let t1_direct = 0.5 * s1 - 2.0 * a * s0 - a * i0 - s * i1;
            let t2_direct = -s1 / 24.0 + a * s0 + (1.0 + 6.0 * a) / 12.0 * i0
                - (1.0 - 10.0 * a + 4.0 * a * a) / (12.0 * s) * i1;
            assert_relative_eq!(t1(a).unwrap(), t1_direct, max_relative = 1e-13);
            assert_relative_eq!(t2(a).unwrap(), t2_direct, max_relative = 1e-12);
        }
    }
}
