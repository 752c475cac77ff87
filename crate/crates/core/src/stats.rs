//! Replicate summaries and the small set of test statistics the diagnostics use.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Mean and variance of a sample, with the fourth central moment kept for the
/// standard error of the variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    /// Fourth central moment (biased, 1/n).
    pub m4: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                var: f64::NAN,
                m4: f64::NAN,
            };
        }
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (mut s2, mut s4) = (0.0, 0.0);
        for x in xs {
            let d = x - mean;
            s2 += d * d;
            s4 += d * d * d * d;
        }
        let var = if n > 1 { s2 / (nf - 1.0) } else { 0.0 };
        Self {
            n,
            mean,
            var,
            m4: s4 / nf,
        }
    }

    pub fn se_mean(&self) -> f64 {
        (self.var / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance, `sqrt((m4 - (n-3)/(n-1) s^4) / n)`.
    pub fn se_var(&self) -> f64 {
        let n = self.n as f64;
        if self.n < 4 {
            return f64::NAN;
        }
        let v = (self.m4 - (n - 3.0) / (n - 1.0) * self.var * self.var) / n;
        v.max(0.0).sqrt()
    }
}

/// Unbiased sample covariance.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n as f64 - 1.0)
}

/// Kendall's tau-a between two equally long sequences.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += (xs[j] - xs[i]).signum() * (ys[j] - ys[i]).signum();
        }
    }
    s / (n * (n - 1) / 2) as f64
}

/// Result of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square homogeneity test on integer-valued samples. Values are
/// binned individually, then tail bins are pooled until every bin's expected
/// count is at least 5 in both samples.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let max = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ca = vec![0f64; max + 1];
    let mut cb = vec![0f64; max + 1];
    for &x in a {
        ca[x as usize] += 1.0;
    }
    for &x in b {
        cb[x as usize] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    // pool adjacent bins left to right until each has enough mass
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for k in 0..=max {
        acc_a += ca[k];
        acc_b += cb[k];
        let pooled = acc_a + acc_b;
        if pooled * na.min(nb) / total >= 5.0 {
            bins.push((acc_a, acc_b));
            acc_a = 0.0;
            acc_b = 0.0;
        }
    }
    if acc_a + acc_b > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc_a;
                last.1 += acc_b;
            }
            None => bins.push((acc_a, acc_b)),
        }
    }
    let mut stat = 0.0;
    for &(x, y) in &bins {
        let pooled = x + y;
        let ea = pooled * na / total;
        let eb = pooled * nb / total;
        if ea > 0.0 {
            stat += (x - ea).powi(2) / ea;
        }
        if eb > 0.0 {
            stat += (y - eb).powi(2) / eb;
        }
    }
    let dof = bins.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map(|c| c.sf(stat))
            .unwrap_or(f64::NAN)
    };
    ChiSquare {
        statistic: stat,
        dof,
        p_value,
    }
}

/// Chi-square goodness of fit of categorical counts against expected counts.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> ChiSquare {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = observed.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .map(|c| c.sf(stat))
            .unwrap_or(f64::NAN)
    };
    ChiSquare {
        statistic: stat,
        dof,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_basics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.var - 5.0 / 3.0).abs() < 1e-15);
        assert!(s.se_var().is_finite());
    }

    #[test]
    fn tau_extremes() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 4.0, 9.0]), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
    }

    #[test]
    fn chi_square_identical_samples() {
        let a: Vec<u64> = (0..1000).map(|i| i % 7).collect();
        let c = chi_square_two_sample(&a, &a);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
        let b: Vec<u64> = (0..1000).map(|i| i % 3).collect();
        assert!(chi_square_two_sample(&a, &b).p_value < 1e-6);
    }
}
