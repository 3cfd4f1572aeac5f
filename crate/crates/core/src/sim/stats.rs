//! Streaming moment accumulation with numerically stable merging.

/// Welford accumulator; `merge` combines partial results pairwise without
/// catastrophic cancellation, so chunked reductions stay stable.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        RunningStats::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let delta = other.mean - self.mean;
        let total = n1 + n2;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (0 for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n as f64 - 1.0)).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Collapse per-path values into independent samples: under antithetic
/// pairing consecutive paths share a pair, so their average is the i.i.d.
/// unit. Statistics over those units give honest standard errors.
pub fn pairwise_stats(values: &[f64], antithetic: bool) -> RunningStats {
    let mut stats = RunningStats::new();
    if antithetic {
        for pair in values.chunks_exact(2) {
            stats.push(0.5 * (pair[0] + pair[1]));
        }
    } else {
        for &v in values {
            stats.push(v);
        }
    }
    stats
}

/// log(Σ e^{x_i}) without overflow.
pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values
        .clone()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.13 - 5.0).collect();
        let mut whole = RunningStats::new();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = RunningStats::new();
        let mut right = RunningStats::new();
        xs[..377].iter().for_each(|&x| left.push(x));
        xs[377..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(whole.count(), left.count());
        assert!((whole.mean() - left.mean()).abs() < 1e-12);
        assert!((whole.variance() - left.variance()).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_handles_large_exponents() {
        let v = log_sum_exp([1000.0, 1000.0f64].into_iter());
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn pairwise_reduces_count_under_antithetics() {
        let vals = vec![1.0, 3.0, -1.0, 5.0];
        let s = pairwise_stats(&vals, true);
        assert_eq!(s.count(), 2);
        assert!((s.mean() - 2.0).abs() < 1e-15);
    }
}
