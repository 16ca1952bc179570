//! Monte Carlo plumbing: order-preserving parallel maps and batch-means errors.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_BATCHES: usize = 20;

/// Maps `f` over `items`, in parallel when the `parallel` feature is on.
/// The output order always matches the input order.
#[cfg(feature = "parallel")]
pub fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Same as [`par_map`] but always sequential, for benchmarks and replay checks.
pub fn seq_map<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Runs `f` on a pool with `threads` workers (0 means all cores).
#[cfg(feature = "parallel")]
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Batch-means standard error of the mean.
    pub se: f64,
    pub n: usize,
    pub batches: usize,
}

impl Estimate {
    /// `|mean - target| <= k * se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }

    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.se
    }
}

/// Mean and batch-means standard error of `xs` split into `batches`
/// contiguous batches of equal size (the remainder is spread over the first ones).
pub fn batch_means(xs: &[f64], batches: usize) -> Result<Estimate> {
    let n = xs.len();
    if batches < 2 || n < batches {
        return Err(Error::InsufficientSamples(format!("{n} samples for {batches} batches")));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let base = n / batches;
    let extra = n % batches;
    let mut start = 0;
    let mut acc = 0.0;
    for k in 0..batches {
        let len = base + usize::from(k < extra);
        let m = xs[start..start + len].iter().sum::<f64>() / len as f64;
        acc += (m - mean).powi(2) * len as f64;
        start += len;
    }
    // variance of a single draw estimated from the batch means
    let var = acc / (batches - 1) as f64;
    Ok(Estimate { mean, se: (var / n as f64).sqrt(), n, batches })
}

/// Sample Pearson correlation of two equally long series.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InsufficientSamples("correlation needs two equal series".into()));
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("constant series has no correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Correlation with a batch-means standard error. Each batch's correlation
/// is computed separately and the spread of those values gives the error.
pub fn correlation_estimate(xs: &[f64], ys: &[f64], batches: usize) -> Result<Estimate> {
    let n = xs.len();
    if n != ys.len() || batches < 2 || n < 4 * batches {
        return Err(Error::InsufficientSamples(format!("{n} samples for {batches} batches")));
    }
    let mean = correlation(xs, ys)?;
    let len = n / batches;
    let per: Vec<f64> = (0..batches)
        .map(|k| correlation(&xs[k * len..(k + 1) * len], &ys[k * len..(k + 1) * len]))
        .collect::<Result<_>>()?;
    let m = per.iter().sum::<f64>() / batches as f64;
    let var = per.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(Estimate { mean, se: (var / batches as f64).sqrt(), n, batches })
}

/// Sample variance with a standard error from the spread of per-batch variances.
pub fn variance_estimate(xs: &[f64], batches: usize) -> Result<Estimate> {
    let n = xs.len();
    if batches < 2 || n < 4 * batches {
        return Err(Error::InsufficientSamples(format!("{n} samples for {batches} batches")));
    }
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    };
    let len = n / batches;
    let per: Vec<f64> = (0..batches).map(|k| var(&xs[k * len..(k + 1) * len])).collect();
    let m = per.iter().sum::<f64>() / batches as f64;
    let spread = per.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok(Estimate { mean: var(xs), se: (spread / batches as f64).sqrt(), n, batches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_has_zero_error() {
        let e = batch_means(&[2.0; 100], 20).unwrap();
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.se, 0.0);
    }

    #[test]
    fn batch_means_matches_iid_error() {
        // alternating +-1 within batches: batch means are exactly 0
        let xs: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let e = batch_means(&xs, 20).unwrap();
        assert!(e.mean.abs() < 1e-15 && e.se < 1e-15);
    }

    #[test]
    fn too_few_samples() {
        assert!(batch_means(&[1.0; 5], 20).is_err());
    }

    #[test]
    fn par_map_preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        assert_eq!(par_map(&v, |x| x * 2), seq_map(&v, |x| x * 2));
    }

    #[test]
    fn perfect_correlation() {
        let xs: Vec<f64> = (0..50).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((correlation(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
    }
}
