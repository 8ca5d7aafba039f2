//! Monte Carlo simulation of the (1+1) EA on OneMax.
//!
//! Two engines draw from the same process. `Bitstring` mutates an explicit
//! bit vector, locating flipped positions by geometric skips. `StateChain`
//! tracks only the zero-count and draws the flipped zeros and ones as
//! binomials. Replicate `r` of a run uses ChaCha8 stream `r` under the
//! configured seed, so results do not depend on the thread count.

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drift::ProblemSize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Start {
    /// Start from a point with exactly `k` zero-bits.
    FixedZeros(usize),
    /// Start from a uniformly random bit string.
    UniformRandom,
}

impl fmt::Display for Start {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Start::FixedZeros(k) => write!(f, "fixed:{k}"),
            Start::UniformRandom => f.write_str("uniform"),
        }
    }
}

impl FromStr for Start {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain("start", s, "fixed:<k> or uniform");
        match s.split_once(':') {
            Some(("fixed", k)) => k.parse().map(Start::FixedZeros).map_err(|_| bad()),
            None if s == "uniform" => Ok(Start::UniformRandom),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Start {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Start {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Bitstring,
    StateChain,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Bitstring => f.write_str("bitstring"),
            Engine::StateChain => f.write_str("state_chain"),
        }
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bitstring" => Ok(Engine::Bitstring),
            "state_chain" | "statechain" | "chain" => Ok(Engine::StateChain),
            _ => Err(Error::domain("engine", s, "bitstring or state_chain")),
        }
    }
}

/// Default iteration cap `⌈100 e n (ln n + 1)⌉`.
pub fn default_max_iters(n: ProblemSize) -> u64 {
    let x = n.get() as f64;
    (100.0 * E * x * (x.ln() + 1.0)).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: ProblemSize,
    pub start: Start,
    pub replicates: u64,
    pub seed: u64,
    pub engine: Engine,
    pub max_iters: u64,
}

impl SimConfig {
    pub fn new(n: ProblemSize, start: Start, replicates: u64, seed: u64, engine: Engine) -> Result<Self> {
        let config = SimConfig {
            n,
            start,
            replicates,
            seed,
            engine,
            max_iters: default_max_iters(n),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_max_iters(mut self, max_iters: u64) -> Result<Self> {
        self.max_iters = max_iters;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if let Start::FixedZeros(k) = self.start {
            if k > self.n.get() {
                return Err(Error::domain("start zeros", k, format!("0..={}", self.n)));
            }
        }
        if self.replicates == 0 {
            return Err(Error::domain("replicates", 0, "at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters", 0, "at least 1"));
        }
        Ok(())
    }

    /// Generator of replicate `r`.
    pub fn rng(&self, replicate: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replicate);
        rng
    }
}

/// `Binomial(trials, p)` by inversion; cheap when `trials · p` is small.
pub fn binomial_inversion<R: Rng + ?Sized>(rng: &mut R, trials: usize, p: f64) -> usize {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    let odds = p / (1.0 - p);
    let mut pmf = (trials as f64 * (-p).ln_1p()).exp();
    let mut cdf = pmf;
    let u: f64 = rng.random();
    let mut x = 0;
    while u >= cdf && x < trials {
        pmf *= (trials - x) as f64 / (x + 1) as f64 * odds;
        x += 1;
        cdf += pmf;
        if pmf == 0.0 {
            break;
        }
    }
    x
}

/// One iteration on the zero-count: `a ~ Bin(k, 1/n)` zeros and
/// `b ~ Bin(n-k, 1/n)` ones flip; the offspring is kept iff `a ≥ b`.
pub fn step_statechain<R: Rng + ?Sized>(k: usize, n: ProblemSize, rng: &mut R) -> usize {
    let n = n.get();
    let p = 1.0 / n as f64;
    let a = binomial_inversion(rng, k, p);
    let b = binomial_inversion(rng, n - k, p);
    if a >= b {
        k - a + b
    } else {
        k
    }
}

/// Explicit search point with its cached zero-count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitState {
    bits: Vec<bool>,
    zeros: usize,
    scratch: Vec<usize>,
}

impl BitState {
    /// The point whose first `k` bits are zero.
    pub fn with_zeros(n: ProblemSize, k: usize) -> Result<Self> {
        if k > n.get() {
            return Err(Error::domain("k", k, format!("0..={n}")));
        }
        let bits = (0..n.get()).map(|i| i >= k).collect();
        Ok(Self::from_bits(bits))
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let zeros = bits.iter().filter(|b| !**b).count();
        BitState {
            bits,
            zeros,
            scratch: Vec::new(),
        }
    }

    pub fn uniform<R: Rng + ?Sized>(n: ProblemSize, rng: &mut R) -> Self {
        Self::from_bits((0..n.get()).map(|_| rng.random::<bool>()).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }
}

/// Geometric skips between flipped positions: the gap before the next flip
/// is `⌊ln U / ln(1 - 1/n)⌋`.
fn flipped_positions<R: Rng + ?Sized>(n: usize, rng: &mut R, out: &mut Vec<usize>) {
    out.clear();
    let log_keep = (-1.0 / n as f64).ln_1p();
    let mut pos = 0usize;
    loop {
        let u = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_keep).floor();
        if skip >= (n - pos) as f64 {
            return;
        }
        pos += skip as usize;
        out.push(pos);
        pos += 1;
    }
}

/// One iteration on an explicit bit string: every bit flips independently
/// with probability `1/n`, and the offspring replaces the parent iff it has
/// at least as many ones. Returns the new zero-count.
pub fn step_bitstring<R: Rng + ?Sized>(state: &mut BitState, rng: &mut R) -> usize {
    let n = state.bits.len();
    let mut flips = std::mem::take(&mut state.scratch);
    flipped_positions(n, rng, &mut flips);
    let zeros_flipped = flips.iter().filter(|&&i| !state.bits[i]).count();
    let ones_flipped = flips.len() - zeros_flipped;
    if zeros_flipped >= ones_flipped {
        for &i in &flips {
            state.bits[i] = !state.bits[i];
        }
        state.zeros = state.zeros - zeros_flipped + ones_flipped;
    }
    state.scratch = flips;
    state.zeros
}

/// Outcome of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Replicate {
    iterations: u64,
    truncated: bool,
}

fn initial_zeros<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> usize {
    match config.start {
        Start::FixedZeros(k) => k,
        Start::UniformRandom => (0..config.n.get()).filter(|_| !rng.random::<bool>()).count(),
    }
}

fn replicate(config: &SimConfig, r: u64, mut trace: Option<&mut Vec<usize>>) -> Replicate {
    let mut rng = config.rng(r);
    let mut record = |k: usize| {
        if let Some(t) = trace.as_deref_mut() {
            t.push(k);
        }
    };
    let mut t = 0u64;
    match config.engine {
        Engine::StateChain => {
            let mut k = initial_zeros(config, &mut rng);
            record(k);
            while k > 0 && t < config.max_iters {
                k = step_statechain(k, config.n, &mut rng);
                t += 1;
                record(k);
            }
            Replicate {
                iterations: t,
                truncated: k > 0,
            }
        }
        Engine::Bitstring => {
            let mut state = match config.start {
                Start::FixedZeros(k) => BitState::with_zeros(config.n, k).expect("validated"),
                Start::UniformRandom => BitState::uniform(config.n, &mut rng),
            };
            record(state.zeros);
            while state.zeros > 0 && t < config.max_iters {
                step_bitstring(&mut state, &mut rng);
                t += 1;
                record(state.zeros);
            }
            Replicate {
                iterations: t,
                truncated: state.zeros > 0,
            }
        }
    }
}

/// Zero-count after each iteration of replicate `r`, starting with the initial state.
pub fn trace(config: &SimConfig, r: u64) -> Result<Vec<usize>> {
    config.validate()?;
    let mut out = Vec::new();
    replicate(config, r, Some(&mut out));
    Ok(out)
}

/// Summary of the runtimes of all replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
    pub min: u64,
    pub max: u64,
    /// Runs stopped at `max_iters`; their cap is counted as the runtime.
    pub truncated: u64,
}

impl RunStats {
    pub fn from_samples(samples: &[u64], truncated: u64) -> Result<Self> {
        let count = samples.len() as u64;
        if count == 0 {
            return Err(Error::domain("samples", 0, "at least 1"));
        }
        let sum: u128 = samples.iter().map(|&x| x as u128).sum();
        let sum_sq: u128 = samples.iter().map(|&x| (x as u128) * (x as u128)).sum();
        let c = count as f64;
        let mean = sum as f64 / c;
        let std_error = if count > 1 {
            // Σ(x - mean)² = Σx² - (Σx)²/c, formed in integers.
            let centred = (sum_sq * count as u128 - sum * sum) as f64 / c;
            (centred / (c - 1.0) / c).sqrt()
        } else {
            0.0
        };
        Ok(RunStats {
            samples: count,
            mean,
            std_error,
            min: *samples.iter().min().expect("non-empty"),
            max: *samples.iter().max().expect("non-empty"),
            truncated,
        })
    }

    /// Whether the mean is trustworthy, i.e. no run was truncated.
    pub fn is_valid(&self) -> bool {
        self.truncated == 0
    }
}

/// Stats together with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: ProblemSize,
    pub start: Start,
    pub engine: Engine,
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
    pub min: u64,
    pub max: u64,
    pub truncated: u64,
    pub seed: u64,
}

impl SimReport {
    fn new(config: &SimConfig, stats: RunStats) -> Self {
        SimReport {
            n: config.n,
            start: config.start,
            engine: config.engine,
            samples: stats.samples,
            mean: stats.mean,
            std_error: stats.std_error,
            min: stats.min,
            max: stats.max,
            truncated: stats.truncated,
            seed: config.seed,
        }
    }

    pub fn stats(&self) -> RunStats {
        RunStats {
            samples: self.samples,
            mean: self.mean,
            std_error: self.std_error,
            min: self.min,
            max: self.max,
            truncated: self.truncated,
        }
    }
}

/// Runs all replicates and returns the report with the raw runtimes in replicate order.
pub fn run_with_samples(config: &SimConfig) -> Result<(SimReport, Vec<u64>)> {
    config.validate()?;
    let results: Vec<Replicate> = (0..config.replicates)
        .into_par_iter()
        .map(|r| replicate(config, r, None))
        .collect();
    let truncated = results.iter().filter(|r| r.truncated).count() as u64;
    let samples: Vec<u64> = results.iter().map(|r| r.iterations).collect();
    let stats = RunStats::from_samples(&samples, truncated)?;
    Ok((SimReport::new(config, stats), samples))
}

pub fn run(config: &SimConfig) -> Result<SimReport> {
    run_with_samples(config).map(|(report, _)| report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn size(n: usize) -> ProblemSize {
        ProblemSize::new(n).unwrap()
    }

    #[test]
    fn parse_start_and_engine() {
        assert_eq!("fixed:25".parse::<Start>().unwrap(), Start::FixedZeros(25));
        assert_eq!("uniform".parse::<Start>().unwrap(), Start::UniformRandom);
        assert!("fixed:x".parse::<Start>().is_err());
        assert!("random".parse::<Start>().is_err());
        assert_eq!("statechain".parse::<Engine>().unwrap(), Engine::StateChain);
        assert_eq!(Start::FixedZeros(3).to_string(), "fixed:3");
    }

    #[test]
    fn config_validation() {
        let n = size(5);
        assert!(SimConfig::new(n, Start::FixedZeros(6), 1, 0, Engine::Bitstring).is_err());
        assert!(SimConfig::new(n, Start::FixedZeros(5), 0, 0, Engine::Bitstring).is_err());
        let c = SimConfig::new(n, Start::FixedZeros(5), 1, 0, Engine::Bitstring).unwrap();
        assert_eq!(c.max_iters, default_max_iters(n));
        assert!(c.max_iters as f64 >= 100.0 * E * 5.0 * (5f64.ln() + 1.0));
        assert!(c.with_max_iters(0).is_err());
    }

    #[test]
    fn optimum_is_absorbing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = size(6);
        let mut state = BitState::with_zeros(n, 0).unwrap();
        for _ in 0..1000 {
            assert_eq!(step_bitstring(&mut state, &mut rng), 0);
            assert_eq!(step_statechain(0, n, &mut rng), 0);
        }
        assert!(state.bits().iter().all(|b| *b));
    }

    #[test]
    fn worse_offspring_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = size(10);
        let mut state = BitState::with_zeros(n, 4).unwrap();
        for _ in 0..10_000 {
            let before = state.zeros();
            let after = step_bitstring(&mut state, &mut rng);
            assert!(after <= before);
            assert_eq!(after, state.bits().iter().filter(|b| !**b).count());
        }
    }

    #[test]
    fn binomial_inversion_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 200_000;
        let total: usize = (0..draws).map(|_| binomial_inversion(&mut rng, 40, 0.05)).sum();
        let mean = total as f64 / draws as f64;
        let se = (40.0 * 0.05 * 0.95 / draws as f64).sqrt();
        assert!((mean - 2.0).abs() < 4.0 * se, "{mean}");
        assert_eq!(binomial_inversion(&mut rng, 0, 0.5), 0);
    }

    #[test]
    fn stats_from_samples() {
        let s = RunStats::from_samples(&[1, 2, 3, 4], 0).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1, 4));
        assert!(s.is_valid());
        assert!(RunStats::from_samples(&[], 0).is_err());
    }

    #[test]
    fn truncation_is_recorded() {
        let c = SimConfig::new(size(30), Start::FixedZeros(15), 20, 5, Engine::StateChain)
            .unwrap()
            .with_max_iters(3)
            .unwrap();
        let report = run(&c).unwrap();
        assert_eq!(report.truncated, 20);
        assert_eq!(report.max, 3);
        assert!(!report.stats().is_valid());
    }

    #[test]
    fn traces_are_monotone_and_deterministic() {
        for engine in [Engine::Bitstring, Engine::StateChain] {
            let c = SimConfig::new(size(20), Start::UniformRandom, 4, 11, engine).unwrap();
            let t = trace(&c, 2).unwrap();
            assert!(t.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(*t.last().unwrap(), 0);
            assert_eq!(t, trace(&c, 2).unwrap());
        }
    }
}
