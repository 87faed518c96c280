//! Seeded trial fan-out and sufficient-statistics aggregation.
//!
//! Trial `i` draws from ChaCha stream `i` of the run seed, and trials are
//! grouped into fixed-size chunks whose partial sums are merged in chunk
//! order. Results are therefore bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CHUNK: u64 = 2048;

/// Running sums of a vector-valued per-trial statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(dims: usize) -> Self {
        Moments {
            count: 0,
            sum: vec![0.0; dims],
            sum_sq: vec![0.0; dims],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        for (i, &v) in x.iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self, i: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.mean(i);
        ((self.sum_sq[i] - n * m * m) / (n - 1.0)).max(0.0)
    }

    pub fn std_error(&self, i: usize) -> f64 {
        (self.variance(i) / self.count as f64).sqrt()
    }
}

/// The random stream of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `trials` independent trials on the current rayon pool.
///
/// `trial(index, rng, out)` writes `dims` statistics into `out`.
pub fn run_trials<F>(trials: u64, seed: u64, dims: usize, trial: F) -> Moments
where
    F: Fn(u64, &mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::new(dims);
            let mut out = vec![0.0; dims];
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(seed, i);
                out.iter_mut().for_each(|v| *v = 0.0);
                trial(i, &mut rng, &mut out);
                m.push(&out);
            }
            m
        })
        .collect();
    partials.iter().fold(Moments::new(dims), |mut acc, p| {
        acc.merge(p);
        acc
    })
}
