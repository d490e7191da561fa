//! Monte Carlo accumulators and batch-means error bars.

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

/// Splits `0..samples` into `batches` contiguous ranges of near-equal size.
pub fn batch_ranges(samples: usize, batches: usize) -> Vec<Range<usize>> {
    let batches = batches.max(1).min(samples.max(1));
    let base = samples / batches;
    let extra = samples % batches;
    let mut out = Vec::with_capacity(batches);
    let mut start = 0;
    for b in 0..batches {
        let len = base + usize::from(b < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Runs `work` over every batch in parallel. Results come back in batch order,
/// so downstream merges do not depend on the worker count.
pub fn run_batches<A, F>(samples: usize, batches: usize, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(usize, Range<usize>) -> A + Sync,
{
    batch_ranges(samples, batches)
        .into_par_iter()
        .enumerate()
        .map(|(b, r)| work(b, r))
        .collect()
}

/// Standard error of the mean of `estimates`, treating each as one batch.
pub fn batch_standard_error(estimates: &[f64]) -> f64 {
    let b = estimates.len();
    if b < 2 {
        return 0.0;
    }
    let mean = estimates.iter().sum::<f64>() / b as f64;
    let var = estimates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    (var / b as f64).sqrt()
}

/// Mean of a complex random variable with its standard error.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexMean {
    n: u64,
    sum: Complex64,
    sum_abs2: f64,
}

impl ComplexMean {
    pub fn push(&mut self, z: Complex64) {
        self.n += 1;
        self.sum += z;
        self.sum_abs2 += z.norm_sqr();
    }

    pub fn merge(&mut self, other: &ComplexMean) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_abs2 += other.sum_abs2;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> Complex64 {
        if self.n == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.sum / self.n as f64
        }
    }

    /// `sqrt(E|z - mean|^2 / N)`, the radius of the complex error disc.
    pub fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_abs2 - self.sum.norm_sqr() / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Accumulates the non-conjugated covariance `E[uv] - E[u]E[v]` of two
/// complex samples. The estimate uses the `N - 1` normalisation, which is
/// unbiased for this bilinear form just as for the real case.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairedCovariance {
    n: u64,
    sum_u: Complex64,
    sum_v: Complex64,
    sum_uv: Complex64,
}

impl PairedCovariance {
    pub fn push(&mut self, u: Complex64, v: Complex64) {
        self.n += 1;
        self.sum_u += u;
        self.sum_v += v;
        self.sum_uv += u * v;
    }

    pub fn merge(&mut self, other: &PairedCovariance) {
        self.n += other.n;
        self.sum_u += other.sum_u;
        self.sum_v += other.sum_v;
        self.sum_uv += other.sum_uv;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn covariance(&self) -> Complex64 {
        if self.n < 2 {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.n as f64;
        (self.sum_uv - self.sum_u * self.sum_v / n) / (n - 1.0)
    }
}
