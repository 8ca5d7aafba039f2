mod common;

use common::size;
use onemax_runtime::sim::{
    run, run_with_samples, step_bitstring, step_statechain, BitState, Engine, SimConfig, Start,
};
use onemax_runtime::{drift, hitting_profile, DriftTable, TransitionKernel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 1_000_000;

fn one_step_counts(engine: Engine, n: usize, k: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k + 1];
    let start = BitState::with_zeros(size(n), k).unwrap();
    let mut state = start.clone();
    for _ in 0..DRAWS {
        let next = match engine {
            Engine::StateChain => step_statechain(k, size(n), &mut rng),
            Engine::Bitstring => {
                state.clone_from(&start);
                step_bitstring(&mut state, &mut rng)
            }
        };
        counts[next] += 1;
    }
    counts
}

/// Pearson statistic after pooling cells with expected count below 5.
fn chi_square(counts: &[u64], probs: &[f64]) -> Option<(f64, usize)> {
    let total = counts.iter().sum::<u64>() as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = p * total;
        if expected < 5.0 {
            pooled.0 += c as f64;
            pooled.1 += expected;
        } else {
            cells.push((c as f64, expected));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    if cells.len() < 2 {
        return None;
    }
    let stat = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    Some((stat, cells.len() - 1))
}

#[test]
fn engines_reproduce_the_exact_kernel() {
    for n in 2..=8 {
        let kernel = TransitionKernel::<f64>::build(size(n)).unwrap();
        for k in 0..=n {
            for (i, engine) in [Engine::StateChain, Engine::Bitstring].into_iter().enumerate() {
                let seed = (n * 100 + k * 2 + i) as u64;
                let counts = one_step_counts(engine, n, k, seed);
                let Some((stat, df)) = chi_square(&counts, kernel.row(k)) else {
                    assert_eq!(counts[k], DRAWS as u64);
                    continue;
                };
                let critical = ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - 1e-3);
                assert!(
                    stat <= critical,
                    "{engine} n = {n}, k = {k}: chi2 = {stat} > {critical} (df {df})"
                );
            }
        }
    }
}

#[test]
fn one_step_from_two_of_three() {
    let counts = one_step_counts(Engine::StateChain, 3, 2, 99);
    let expected = [2.0 / 27.0, 1.0 / 3.0, 16.0 / 27.0];
    for (c, p) in counts.iter().zip(expected) {
        let freq = *c as f64 / DRAWS as f64;
        let se = (p * (1.0 - p) / DRAWS as f64).sqrt();
        assert!((freq - p).abs() < 4.0 * se, "{freq} vs {p}");
    }
}

#[test]
fn empirical_decrease_matches_drift() {
    let n = 20;
    for k in [1usize, 7, 15, 20] {
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let decreases: Vec<f64> = (0..DRAWS)
            .map(|_| (k - step_statechain(k, size(n), &mut rng)) as f64)
            .collect();
        let mean = decreases.iter().sum::<f64>() / DRAWS as f64;
        let var = decreases.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (DRAWS - 1) as f64;
        let se = (var / DRAWS as f64).sqrt();
        let exact = drift::<f64>(size(n), k).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "k = {k}: {mean} vs {exact}");
    }
}

#[test]
fn smallest_instance_means() {
    for (k, engine) in [(1, Engine::StateChain), (2, Engine::Bitstring)] {
        let config = SimConfig::new(size(2), Start::FixedZeros(k), 100_000, 3, engine).unwrap();
        let report = run(&config).unwrap();
        assert_eq!(report.truncated, 0);
        assert!((report.mean - 4.0).abs() < 4.0 * report.std_error, "{report:?}");
    }
}

#[test]
fn start_at_optimum_takes_no_iterations() {
    let config = SimConfig::new(size(9), Start::FixedZeros(0), 10, 1, Engine::Bitstring).unwrap();
    let report = run(&config).unwrap();
    assert_eq!((report.mean, report.max), (0.0, 0));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let config = SimConfig::new(size(30), Start::UniformRandom, 64, 42, Engine::Bitstring).unwrap();
    let in_pool = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_with_samples(&config).unwrap())
    };
    assert_eq!(in_pool(1), in_pool(3));
}

#[test]
fn mid_size_mean_matches_exact() {
    let n = size(30);
    let g = hitting_profile(
        &TransitionKernel::<f64>::build(n).unwrap(),
        &DriftTable::<f64>::build(n).unwrap(),
    )
    .unwrap()
    .g()[15];
    for engine in [Engine::StateChain, Engine::Bitstring] {
        let config = SimConfig::new(n, Start::FixedZeros(15), 40_000, 17, engine).unwrap();
        let report = run(&config).unwrap();
        assert!((report.mean - g).abs() < 4.0 * report.std_error, "{report:?} vs {g}");
    }
}
