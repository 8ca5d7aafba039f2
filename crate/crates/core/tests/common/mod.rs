#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use onemax_runtime::{ProblemSize, Rational, Scalar};

pub fn size(n: usize) -> ProblemSize {
    ProblemSize::new(n).unwrap()
}

pub fn q(a: u64, b: u64) -> Rational {
    Rational::ratio(a, b)
}

/// Transition rows by enumerating every flip mask of a bit string whose
/// first `k` bits are zero. Exponential in `n`; only for tiny sizes.
pub fn enumerated_kernel(n: usize) -> Vec<Vec<Rational>> {
    let p = q(1, n as u64);
    let keep = Rational::one() - p.clone();
    let weight: Vec<Rational> = (0..=n)
        .map(|c| p.clone().powu(c) * keep.clone().powu(n - c))
        .collect();
    (0..=n)
        .map(|k| {
            let zero_mask: u32 = (1u32 << k) - 1;
            let mut row = vec![Rational::zero(); k + 1];
            for mask in 0u32..(1 << n) {
                let flips = mask.count_ones() as usize;
                let a = (mask & zero_mask).count_ones() as usize;
                let b = flips - a;
                let next = if a >= b { k - a + b } else { k };
                row[next] += weight[flips].clone();
            }
            row
        })
        .collect()
}

/// Expected absorption times from states `1..=n` by an LU solve of
/// `(I - P_transient) g = 1`.
pub fn absorbing_solve(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len() - 1;
    let mut a = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        for j in 1..=k {
            a[(k - 1, j - 1)] -= rows[k][j];
        }
    }
    let rhs = DVector::<f64>::from_element(n, 1.0);
    let g = a.lu().solve(&rhs).expect("non-singular");
    std::iter::once(0.0).chain(g.iter().copied()).collect()
}

/// Leading Taylor coefficients at 0 of `f`, from a least-squares polynomial
/// fit of degree `degree` on Chebyshev points of `[0, width]`.
pub fn taylor_coefficients(f: impl Fn(f64) -> f64, width: f64, degree: usize) -> Vec<f64> {
    let points = 4 * (degree + 1);
    let xs: Vec<f64> = (0..points)
        .map(|i| {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / points as f64;
            0.5 * width * (1.0 - theta.cos())
        })
        .collect();
    // Scale the variable to [0, 1] for conditioning, then undo.
    let design = DMatrix::<f64>::from_fn(points, degree + 1, |r, c| (xs[r] / width).powi(c as i32));
    let values = DVector::<f64>::from_iterator(points, xs.iter().map(|&x| f(x)));
    let fit = design
        .svd(true, true)
        .solve(&values, 1e-300)
        .expect("least squares");
    fit.iter()
        .enumerate()
        .map(|(c, v)| v / width.powi(c as i32))
        .collect()
}
