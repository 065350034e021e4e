//! Sample statistics with a fixed reduction order.

use crate::par::tree_sum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance (`n − 1` denominator); zero when `n < 2`.
    pub variance: f64,
    /// Fourth central moment (biased, `n` denominator).
    pub m4: f64,
}

impl SampleMoments {
    pub fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                variance: f64::NAN,
                m4: f64::NAN,
            };
        }
        let mean = tree_sum(xs) / n as f64;
        let dev2: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let ss = tree_sum(&dev2);
        let dev4: Vec<f64> = dev2.iter().map(|d| d * d).collect();
        let m4 = tree_sum(&dev4) / n as f64;
        let variance = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
        Self {
            n,
            mean,
            variance: variance.max(0.0),
            m4,
        }
    }

    /// Standard error of the mean.
    pub fn mean_se(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.variance / self.n as f64).sqrt()
        }
    }

    /// Large-sample standard error of the unbiased variance,
    /// `sqrt((μ4 − σ⁴ (n−3)/(n−1)) / n)`.
    pub fn variance_se(&self) -> f64 {
        if self.n < 4 {
            return 0.0;
        }
        let n = self.n as f64;
        let s4 = self.variance * self.variance;
        ((self.m4 - s4 * (n - 3.0) / (n - 1.0)).max(0.0) / n).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_small_sample() {
        let m = SampleMoments::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((m.mean_se() - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_sample_has_zero_spread() {
        let m = SampleMoments::from_slice(&[1.0; 50]);
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.mean_se(), 0.0);
        assert_eq!(m.variance_se(), 0.0);
        let m = SampleMoments::from_slice(&[0.7; 50]);
        assert!(m.variance < 1e-28);
    }
}
