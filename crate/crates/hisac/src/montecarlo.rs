//! Seeded, parallel Monte Carlo estimation.
//!
//! Draws are split into fixed chunks of [`CHUNK`] samples. Chunk `c` reads
//! ChaCha20 stream `c` under the master seed, and chunk summaries are merged
//! in chunk order, so an estimate depends on the seed alone and never on the
//! worker count.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::SensingChannel;
use crate::downlink::{mmse_of_beam, sr_instantaneous};
use crate::error::{Error, Result};
use crate::linalg::{cn_vec, normalized, CVector};
use crate::params::ScenarioParams;

/// Samples per chunk.
pub const CHUNK: usize = 4096;

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    /// Parallel lanes; 0 uses every available core.
    pub workers: usize,
    /// Confidence multiplier for pass/fail checks.
    pub ci_z: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { trials: 100_000, seed: 42, workers: 0, ci_z: 3.0 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::Config(format!("at least 100 trials are needed, got {}", self.trials)));
        }
        if !(self.ci_z > 0.0) {
            return Err(Error::Config(format!("ci_z must be positive, got {}", self.ci_z)));
        }
        Ok(())
    }

    pub fn with_trials(self, trials: usize) -> Self {
        Self { trials, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// |mean − reference|/se, infinite when a nonzero gap meets a zero SE.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = (self.mean - reference).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.se
        }
    }
}

#[derive(Clone, Copy)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Self = Self { n: 0, mean: 0.0, m2: 0.0 };

    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        Self { n, mean, m2 }
    }

    fn estimate(self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate { mean: self.mean, se: (var / self.n as f64).sqrt(), n: self.n }
    }
}

/// Generator for chunk `chunk` under `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn run_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}

/// Estimates the means of `dim` quantities produced together by `draw`,
/// which fills its output slice from one random draw.
pub fn estimate_vec<F>(mc: &McConfig, dim: usize, draw: F) -> Result<Vec<Estimate>>
where
    F: Fn(&mut ChaCha20Rng, &mut [f64]) + Sync,
{
    mc.validate()?;
    let chunks = mc.trials.div_ceil(CHUNK);
    let partial: Vec<std::result::Result<Vec<Moments>, usize>> = run_pool(mc.workers, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(mc.seed, c as u64);
                let start = c * CHUNK;
                let len = CHUNK.min(mc.trials - start);
                let mut acc = vec![Moments::EMPTY; dim];
                let mut out = vec![0.0; dim];
                for i in 0..len {
                    draw(&mut rng, &mut out);
                    for (m, &x) in acc.iter_mut().zip(&out) {
                        if !x.is_finite() {
                            return Err(start + i);
                        }
                        m.push(x);
                    }
                }
                Ok(acc)
            })
            .collect()
    })?;
    let mut total = vec![Moments::EMPTY; dim];
    for p in partial {
        let p = p.map_err(|i| Error::Numeric(format!("non-finite Monte Carlo sample at draw {i}")))?;
        for (t, m) in total.iter_mut().zip(p) {
            *t = t.merge(m);
        }
    }
    Ok(total.into_iter().map(Moments::estimate).collect())
}

/// Mean and SE of `rate` over draws.
pub fn estimate_ecr<F>(mc: &McConfig, rate: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha20Rng) -> f64 + Sync,
{
    Ok(estimate_vec(mc, 1, |rng, out| out[0] = rate(rng))?[0])
}

/// Frequency of `rate < r0` over draws.
pub fn estimate_op<F>(mc: &McConfig, rate: F, r0: f64) -> Result<Estimate>
where
    F: Fn(&mut ChaCha20Rng) -> f64 + Sync,
{
    estimate_ecr(mc, |rng| {
        let r = rate(rng);
        if r.is_nan() {
            f64::NAN
        } else if r < r0 {
            1.0
        } else {
            0.0
        }
    })
}

/// Outcome of the SR/MSE ranking comparison.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub probes: usize,
    /// Kendall τ between the SR ranking and the reversed MSE ranking.
    pub kendall_tau: f64,
    /// Pairs ordered differently by the two criteria.
    pub violations: usize,
    /// The matched filter has both the largest SR and the smallest MSE.
    pub matched_is_optimal: bool,
}

/// Ranks `probes` random unit beams plus the matched filter by SR and by MSE.
pub fn mmse_sr_equivalence(
    hs: &SensingChannel,
    params: &ScenarioParams,
    probes: usize,
    seed: u64,
) -> EquivalenceReport {
    let mut rng = chunk_rng(seed, 0);
    let matched = normalized(&hs.h_s.map(|z| z.conj()));
    let mut beams: Vec<CVector> = vec![matched];
    for _ in 0..probes {
        beams.push(normalized(&CVector::from_vec(cn_vec(&mut rng, hs.n()))));
    }
    equivalence_of(&beams, hs, params)
}

/// Ranking comparison over an explicit beam set; beam 0 is taken as the
/// candidate optimum.
pub fn equivalence_of(beams: &[CVector], hs: &SensingChannel, params: &ScenarioParams) -> EquivalenceReport {
    let sr: Vec<f64> = beams.iter().map(|w| sr_instantaneous(w, hs, params)).collect();
    let mse: Vec<f64> = beams.iter().map(|w| mmse_of_beam(w, hs, params)).collect();
    let (mut concordant, mut discordant) = (0usize, 0usize);
    for i in 0..beams.len() {
        for j in i + 1..beams.len() {
            let a = (sr[i] - sr[j]).signum();
            let b = (mse[j] - mse[i]).signum();
            if a == b {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (concordant + discordant).max(1) as f64;
    let matched_is_optimal = sr.iter().all(|&s| s <= sr[0]) && mse.iter().all(|&m| m >= mse[0]);
    EquivalenceReport {
        probes: beams.len(),
        kendall_tau: (concordant as f64 - discordant as f64) / pairs,
        violations: discordant,
        matched_is_optimal,
    }
}

/// h̄ ~ CN(0, I_n) scaled by √λ: coordinates of h_c in the basis U.
pub fn comm_coords<R: rand::Rng + ?Sized>(eigs: &[f64], rng: &mut R) -> Vec<Complex64> {
    eigs.iter().map(|l| crate::linalg::cn(rng) * l.sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::exponential_ecr;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn constant_rate_has_zero_error() {
        let mc = McConfig::default().with_trials(1000);
        let e = estimate_ecr(&mc, |_| 2.5).unwrap();
        assert_eq!((e.mean, e.se), (2.5, 0.0));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let f = |rng: &mut ChaCha20Rng| {
            let x: f64 = Exp1.sample(rng);
            (1.0 + 10.0 * x).log2()
        };
        let one = estimate_ecr(&McConfig { workers: 1, ..McConfig::default() }.with_trials(20_000), f).unwrap();
        let four = estimate_ecr(&McConfig { workers: 4, ..McConfig::default() }.with_trials(20_000), f).unwrap();
        assert_eq!(one, four);
        assert!(one.z_score(exponential_ecr(10.0)) < 3.0);
    }

    #[test]
    fn outage_limits() {
        let mc = McConfig::default().with_trials(500);
        let f = |rng: &mut ChaCha20Rng| Exp1.sample(rng);
        assert_eq!(estimate_op(&mc, f, 0.0).unwrap().mean, 0.0);
        assert_eq!(estimate_op(&mc, f, f64::INFINITY).unwrap().mean, 1.0);
    }

    #[test]
    fn non_finite_draw_is_reported() {
        let mc = McConfig::default().with_trials(500);
        assert!(estimate_ecr(&mc, |_| f64::NAN).is_err());
    }
}
