//! Small statistics kit: median-of-means, Kolmogorov–Smirnov distances and
//! the largest-summand diagnostic.

use serde::Serialize;

/// Number of blocks used by every median-of-means estimate in the crate.
pub const MOM_BLOCKS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RobustMean {
    pub estimate: f64,
    pub std_err: f64,
}

/// Median of block means over `blocks` contiguous blocks. The standard
/// error is the block-mean spread scaled by √(π/2) for the median.
pub fn median_of_means(values: &[f64], blocks: usize) -> RobustMean {
    let n = values.len();
    if n == 0 {
        return RobustMean { estimate: f64::NAN, std_err: f64::NAN };
    }
    let k = blocks.clamp(1, n);
    let mut means: Vec<f64> = (0..k)
        .map(|j| {
            let (lo, hi) = (j * n / k, (j + 1) * n / k);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let (_, sd) = mean_sd(&means);
    means.sort_by(f64::total_cmp);
    let med = if k % 2 == 1 { means[k / 2] } else { 0.5 * (means[k / 2 - 1] + means[k / 2]) };
    let se = if k > 1 { (std::f64::consts::PI / 2.0).sqrt() * sd / (k as f64).sqrt() } else { f64::NAN };
    RobustMean { estimate: med, std_err: se }
}

/// Sample mean and (n−1)-normalised standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// sup_x |F_n(x) − F(x)| for sorted data.
pub fn ks_one_sample(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        // ties count as one jump
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        // F(x−) against the empirical level just below x
        let f_left = cdf(x.next_down());
        d = d.max((j as f64 / n - cdf(x)).abs()).max((f_left - i as f64 / n).abs());
        i = j;
    }
    d
}

/// Two-sample KS distance for sorted inputs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample critical value √(−ln(α/2)/2)·√((n+m)/(nm)).
pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(alpha / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummandDiagnostic {
    /// (block size, median over blocks of max/sum).
    pub fractions: Vec<(usize, f64)>,
    /// Least-squares slope of ln(fraction) against ln(block size).
    pub slope: f64,
    pub suspect_infinite: bool,
}

/// Fractions above this slope are treated as non-decaying.
pub const SUSPECT_SLOPE: f64 = -0.25;

/// Share of the sum carried by the largest summand, over doubling block
/// sizes. For a finite mean the share decays like a power of the block size;
/// for an infinite mean it stays of order one.
pub fn largest_summand_diagnostic(weights: &[f64]) -> SummandDiagnostic {
    let n = weights.len();
    let mut fractions = Vec::new();
    let mut size = (n / 64).max(16);
    while size <= n {
        let blocks = n / size;
        let mut fr: Vec<f64> = (0..blocks)
            .map(|k| {
                let blk = &weights[k * size..(k + 1) * size];
                let sum: f64 = blk.iter().sum();
                let max = blk.iter().cloned().fold(0.0, f64::max);
                if sum > 0.0 {
                    max / sum
                } else {
                    0.0
                }
            })
            .collect();
        fr.sort_by(f64::total_cmp);
        fractions.push((size, fr[fr.len() / 2]));
        size *= 2;
    }
    let pts: Vec<(f64, f64)> =
        fractions.iter().filter(|(_, f)| *f > 0.0).map(|&(s, f)| ((s as f64).ln(), f.ln())).collect();
    let slope = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    SummandDiagnostic { fractions, slope, suspect_infinite: !(slope <= SUSPECT_SLOPE) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn median_of_means_of_constant() {
        let v = vec![2.5; 1000];
        let r = median_of_means(&v, MOM_BLOCKS);
        assert_eq!(r.estimate, 2.5);
        assert_eq!(r.std_err, 0.0);
    }

    #[test]
    fn ks_against_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        v.sort_by(f64::total_cmp);
        let d = ks_one_sample(&v, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.63 / (v.len() as f64).sqrt(), "{d}");
        let shifted: Vec<f64> = v.iter().map(|x| x + 0.05).collect();
        assert!((ks_two_sample(&v, &shifted) - 0.05).abs() < 0.01);
        assert!((ks_two_sample_critical(100_000, 100_000, 1e-3) - 1.9495 * (2e-5f64).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn ks_handles_atoms() {
        let v = vec![0.0, 0.0, 1.0, 1.0];
        let d = ks_one_sample(&v, |x| if x < 0.0 { 0.0 } else if x < 1.0 { 0.5 } else { 1.0 });
        assert_eq!(d, 0.0);
    }

    #[test]
    fn summand_diagnostic_separates_tails() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let light: Vec<f64> = (0..1 << 16).map(|_| -rng.random::<f64>().ln_1p()).map(|x: f64| x.abs() + 1.0).collect();
        assert!(!largest_summand_diagnostic(&light).suspect_infinite);
        // Pareto with index 0.7: infinite mean
        let heavy: Vec<f64> = (0..1 << 16).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / 0.7)).collect();
        assert!(largest_summand_diagnostic(&heavy).suspect_infinite);
    }
}
