//! Small numeric helpers shared across modules: compensated summation,
//! confidence intervals, and total-variation distance.

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum with compensation.
pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// Two-sided 95% z quantile used for all reported half-widths.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean and 95% CI half-width of i.i.d. samples via batch means: the samples
/// are split in order into `batches` contiguous batches and the half-width is
/// computed from the spread of the batch means. Falls back to the plain
/// standard error when there are fewer samples than requested batches.
pub fn batch_means_ci(samples: &[f64], batches: usize) -> (f64, f64) {
    assert!(!samples.is_empty(), "batch_means_ci on empty sample set");
    let mean = kahan_sum(samples.iter().copied()) / samples.len() as f64;
    let b = batches.clamp(1, samples.len());
    if samples.len() == 1 {
        return (mean, 0.0);
    }
    let means: Vec<f64> = samples
        .chunks((samples.len() + b - 1) / b)
        .map(|c| kahan_sum(c.iter().copied()) / c.len() as f64)
        .collect();
    let m = means.len() as f64;
    if means.len() == 1 {
        // Single batch: fall back to the standard error of the samples.
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
            / (samples.len() - 1) as f64;
        return (mean, Z95 * (var / samples.len() as f64).sqrt());
    }
    let bm = means.iter().sum::<f64>() / m;
    let var = means.iter().map(|x| (x - bm).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, Z95 * (var / m).sqrt())
}

/// Plain-mean 95% CI half-width.
pub fn mean_ci(samples: &[f64]) -> (f64, f64) {
    assert!(!samples.is_empty(), "mean_ci on empty sample set");
    let n = samples.len() as f64;
    let mean = kahan_sum(samples.iter().copied()) / n;
    if samples.len() == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

/// Total-variation distance between two finite measures given aligned mass
/// vectors (missing cells must be zero-filled by the caller).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "total_variation on unaligned vectors");
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Conservative estimate of the standard deviation of the empirical TV
/// distance between two independent multinomial estimates with `np` and `nq`
/// samples: per-cell binomial variances propagated through the half-sum of
/// absolute differences.
pub fn tv_noise_sigma(p: &[f64], q: &[f64], np: usize, nq: usize) -> f64 {
    assert_eq!(p.len(), q.len());
    let (np, nq) = (np.max(1) as f64, nq.max(1) as f64);
    let var: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| a * (1.0 - a) / np + b * (1.0 - b) / nq)
        .sum();
    0.5 * var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_handles_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-9)).abs() < 1e-12);
    }

    #[test]
    fn batch_means_matches_plain_mean() {
        let xs: Vec<f64> = (0..64).map(|i| (i % 7) as f64).collect();
        let (m1, ci1) = batch_means_ci(&xs, 8);
        let (m2, _) = mean_ci(&xs);
        assert!((m1 - m2).abs() < 1e-12);
        assert!(ci1 > 0.0);
    }

    #[test]
    fn tv_basics() {
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert!((total_variation(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_sample_ci_is_zero() {
        let (m, ci) = batch_means_ci(&[2.5], 8);
        assert_eq!(m, 2.5);
        assert_eq!(ci, 0.0);
    }
}
