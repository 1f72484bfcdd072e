//! Monte Carlo engine for X = Σ_{k≥1} Π_{k−1} B_k and the chain
//! X_n = A_n X_{n−1} + B_n.
//!
//! The sample index space is cut into fixed chunks of [`CHUNK_SIZE`]; chunk
//! `c` owns the ChaCha stream `(purpose << 40) | c` under the master seed.
//! Output therefore depends only on the configuration, never on the number
//! of worker threads.

mod bound;
mod convergence;
pub mod stats;

pub use bound::{stochastic_bound_check, BoundCheckRow, StochasticBound};
pub use convergence::{check_convergence, ConvergenceReport, ConvergenceVerdict, LogMoment};

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{JointInput, JointSampler, ModelError, ScalarDistribution};
use stats::{largest_summand_diagnostic, mean_sd, median_of_means, SummandDiagnostic, MOM_BLOCKS};

pub const CHUNK_SIZE: usize = 4096;

/// Stream families, so that different estimators never share draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Batch = 1,
    Conditional = 2,
    ExpMoment = 3,
    FixedPoint = 4,
    FixedPointPairs = 5,
    Convergence = 6,
    BoundY = 7,
    BoundCheck = 8,
    Constant = 9,
    Auxiliary = 10,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Mode {
    SeriesTruncation,
    FixedIterations(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_samples: usize,
    pub master_seed: u64,
    pub truncation_eps: f64,
    pub max_terms: usize,
    pub n_streams: usize,
    pub mode: Mode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_samples: 100_000,
            master_seed: 0x5eed,
            truncation_eps: 1e-16,
            max_terms: 1_000_000,
            n_streams: 1,
            mode: Mode::SeriesTruncation,
        }
    }
}

impl SimConfig {
    pub fn with_samples(self, n_samples: usize) -> Self {
        SimConfig { n_samples, ..self }
    }
    pub fn with_seed(self, master_seed: u64) -> Self {
        SimConfig { master_seed, ..self }
    }
    pub fn with_streams(self, n_streams: usize) -> Self {
        SimConfig { n_streams, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationReport {
    pub mean_terms: f64,
    pub hit_max_terms: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeedProvenance {
    pub master_seed: u64,
    pub chunk_size: usize,
    pub stream_family: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub truncation: TruncationReport,
    pub provenance: SeedProvenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TailMethod {
    Empirical,
    ConditionalSmoothed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub x: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub method: TailMethod,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Draw {
    pub value: f64,
    pub terms: usize,
    pub truncated: bool,
}

/// The RNG owned by one chunk of one stream family.
pub fn chunk_rng(master_seed: u64, purpose: Purpose, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((purpose as u64) << 40) | chunk as u64);
    rng
}

/// Runs `work(rng, len)` on every chunk and concatenates the outputs in
/// chunk order.
pub fn run_chunks<T, F>(n: usize, master_seed: u64, purpose: Purpose, n_streams: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<T> + Sync,
{
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let one = |c: usize| {
        let mut rng = chunk_rng(master_seed, purpose, c);
        work(&mut rng, CHUNK_SIZE.min(n - c * CHUNK_SIZE))
    };
    let parts: Vec<Vec<T>> = if n_streams <= 1 || n_chunks <= 1 {
        (0..n_chunks).map(one).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(n_streams).build() {
            Ok(pool) => pool.install(|| (0..n_chunks).into_par_iter().map(one).collect()),
            Err(_) => (0..n_chunks).map(one).collect(),
        }
    };
    parts.into_iter().flatten().collect()
}

/// One perpetuity draw: the partial series up to the first n with
/// |Π_n| ≤ eps, or the chain after a fixed number of steps from X₀ = 0.
#[inline]
pub fn draw_perpetuity<R: rand::Rng + ?Sized>(sampler: &JointSampler, cfg: &SimConfig, rng: &mut R) -> Draw {
    match cfg.mode {
        Mode::SeriesTruncation => {
            let mut sum = 0.0;
            let mut pi = 1.0f64;
            let mut n = 0usize;
            loop {
                let (a, b) = sampler.sample(rng);
                sum += pi * b;
                pi *= a;
                n += 1;
                if pi.abs() <= cfg.truncation_eps {
                    return Draw { value: sum, terms: n, truncated: false };
                }
                if n >= cfg.max_terms {
                    return Draw { value: sum, terms: n, truncated: true };
                }
            }
        }
        Mode::FixedIterations(steps) => {
            let mut x = 0.0;
            for _ in 0..steps {
                let (a, b) = sampler.sample(rng);
                x = a * x + b;
            }
            Draw { value: x, terms: steps, truncated: false }
        }
    }
}

fn draws_for(joint: &JointInput, cfg: &SimConfig, purpose: Purpose) -> Result<(Vec<Draw>, JointSampler), ModelError> {
    let sampler = joint.sampler()?;
    let draws = run_chunks(cfg.n_samples, cfg.master_seed, purpose, cfg.n_streams, |rng, len| {
        (0..len).map(|_| draw_perpetuity(&sampler, cfg, rng)).collect()
    });
    Ok((draws, sampler))
}

fn batch_from(draws: Vec<Draw>, cfg: &SimConfig, purpose: Purpose) -> SampleBatch {
    let n = draws.len();
    let total_terms: f64 = draws.iter().map(|d| d.terms as f64).sum();
    let hits = draws.iter().filter(|d| d.truncated).count();
    SampleBatch {
        values: draws.into_iter().map(|d| d.value).collect(),
        truncation: TruncationReport { mean_terms: if n > 0 { total_terms / n as f64 } else { 0.0 }, hit_max_terms: hits },
        provenance: SeedProvenance { master_seed: cfg.master_seed, chunk_size: CHUNK_SIZE, stream_family: purpose as u64 },
    }
}

/// `n_samples` independent perpetuity draws.
pub fn sample_batch(joint: &JointInput, cfg: &SimConfig) -> Result<SampleBatch, ModelError> {
    sample_batch_for(joint, cfg, Purpose::Batch)
}

pub fn sample_batch_for(joint: &JointInput, cfg: &SimConfig, purpose: Purpose) -> Result<SampleBatch, ModelError> {
    let (draws, _) = draws_for(joint, cfg, purpose)?;
    Ok(batch_from(draws, cfg, purpose))
}

/// Exceedance fractions with binomial standard errors.
pub fn empirical_tail(values: &[f64], xs: &[f64]) -> Vec<TailEstimate> {
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    xs.iter()
        .map(|&x| {
            let above = sorted.len() - sorted.partition_point(|&v| v <= x);
            let p = above as f64 / n;
            TailEstimate { x, p_hat: p, std_err: (p * (1.0 - p) / n).sqrt(), method: TailMethod::Empirical }
        })
        .collect()
}

/// P{X > x} = E S_B(x − A·X′) with X′ an independent perpetuity draw,
/// averaged over fresh (A, X′) pairs and aggregated by median-of-means.
pub fn conditional_tail_estimates(joint: &JointInput, cfg: &SimConfig, xs: &[f64]) -> Result<Vec<TailEstimate>, ModelError> {
    if !joint.is_independent() {
        return Err(ModelError::Unsupported(
            "the smoothed estimator needs A independent of B; use the empirical tail for dependent laws".into(),
        ));
    }
    let b = &joint.b;
    b.survival(0.0)?;
    let sampler = joint.sampler()?;
    let pairs: Vec<(f64, f64)> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::Conditional, cfg.n_streams, |rng, len| {
        (0..len)
            .map(|_| {
                let a = sampler.sample_a(rng).expect("independent joint");
                let x = draw_perpetuity(&sampler, cfg, rng).value;
                (a, x)
            })
            .collect()
    });
    xs.iter()
        .map(|&x| {
            let mut terms = Vec::with_capacity(pairs.len());
            for &(a, xp) in &pairs {
                terms.push(b.survival(x - a * xp)?);
            }
            let m = median_of_means(&terms, MOM_BLOCKS);
            Ok(TailEstimate {
                x,
                p_hat: m.estimate.clamp(0.0, 1.0),
                std_err: m.std_err,
                method: TailMethod::ConditionalSmoothed,
            })
        })
        .collect()
}

pub fn conditional_tail_estimate(joint: &JointInput, cfg: &SimConfig, x: f64) -> Result<TailEstimate, ModelError> {
    Ok(conditional_tail_estimates(joint, cfg, &[x])?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpMomentEstimate {
    pub r: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub diagnostic: SummandDiagnostic,
    /// Draws whose e^{rX} overflowed and were clamped to f64::MAX.
    pub overflowed: usize,
    pub truncation: TruncationReport,
}

/// Sample mean of e^{rX}. Never a verdict: the summand diagnostic only
/// flags samples that look like they come from an infinite mean.
pub fn estimate_exp_moment(joint: &JointInput, cfg: &SimConfig, r: f64) -> Result<ExpMomentEstimate, ModelError> {
    if r == 0.0 {
        return Ok(ExpMomentEstimate {
            r,
            estimate: 1.0,
            std_err: 0.0,
            diagnostic: SummandDiagnostic { fractions: vec![], slope: f64::NEG_INFINITY, suspect_infinite: false },
            overflowed: 0,
            truncation: TruncationReport { mean_terms: 0.0, hit_max_terms: 0 },
        });
    }
    let batch = sample_batch_for(joint, cfg, Purpose::ExpMoment)?;
    let mut overflowed = 0;
    let w: Vec<f64> = batch
        .values
        .iter()
        .map(|&x| {
            let e = (r * x).exp();
            if e.is_finite() {
                e
            } else {
                overflowed += 1;
                f64::MAX
            }
        })
        .collect();
    let (mean, sd) = mean_sd(&w);
    Ok(ExpMomentEstimate {
        r,
        estimate: mean,
        std_err: sd / (w.len() as f64).sqrt(),
        diagnostic: largest_summand_diagnostic(&w),
        overflowed,
        truncation: batch.truncation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointCheck {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub sigma: f64,
    pub within_3_sigma: bool,
}

/// Compares ψ̂(r) with Ê[e^{rB} ψ̂(rA)], ψ̂ from an independent batch of X.
/// The variance of the right side combines both batches by the delta method.
pub fn fixed_point_check(joint: &JointInput, cfg: &SimConfig, r: f64) -> Result<FixedPointCheck, ModelError> {
    let x = sample_batch_for(joint, cfg, Purpose::FixedPoint)?.values;
    let sampler = joint.sampler()?;
    let pairs: Vec<(f64, f64)> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::FixedPointPairs, cfg.n_streams, |rng, len| {
        (0..len).map(|_| sampler.sample(rng)).collect()
    });
    let lhs_w: Vec<f64> = x.iter().map(|v| (r * v).exp()).collect();
    let (lhs, lhs_sd) = mean_sd(&lhs_w);
    let n = pairs.len() as f64;
    let m = x.len() as f64;

    // group the pair weights e^{rB} by the value of A
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut sorted: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (a, (r * b).exp())).collect();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    for (a, w) in sorted {
        match groups.last_mut() {
            Some(g) if g.0 == a => g.1 += w,
            _ => groups.push((a, w)),
        }
    }
    if groups.len() > 64 {
        // continuous A: ψ̂ at every distinct rA from a sub-batch of X
        let sub = &x[..x.len().min(4096)];
        let psi = |s: f64| sub.iter().map(|v| (s * v).exp()).sum::<f64>() / sub.len() as f64;
        let h: Vec<f64> = pairs.iter().map(|&(a, b)| (r * b).exp() * psi(r * a)).collect();
        let (rhs, sd) = mean_sd(&h);
        let sigma = (lhs_sd * lhs_sd / m + sd * sd / n).sqrt();
        return Ok(FixedPointCheck { r, lhs, rhs, sigma, within_3_sigma: (lhs - rhs).abs() <= 3.0 * sigma });
    }
    let psi_hat: Vec<f64> = groups.iter().map(|&(a, _)| x.iter().map(|v| (r * a * v).exp()).sum::<f64>() / m).collect();
    let rhs: f64 = groups.iter().zip(&psi_hat).map(|(g, p)| g.1 * p).sum::<f64>() / n;
    // pair-side variance: h_i = e^{rB_i} ψ̂(rA_i)
    let index_of = |a: f64| groups.binary_search_by(|g| g.0.total_cmp(&a)).unwrap();
    let h: Vec<f64> = pairs.iter().map(|&(a, b)| (r * b).exp() * psi_hat[index_of(a)]).collect();
    let (_, h_sd) = mean_sd(&h);
    // X-side variance: g(x) = Σ_groups (W_g/N) e^{r a_g x}
    let g: Vec<f64> = x.iter().map(|v| groups.iter().map(|gr| gr.1 / n * (r * gr.0 * v).exp()).sum()).collect();
    let (_, g_sd) = mean_sd(&g);
    let sigma_rhs2 = h_sd * h_sd / n + g_sd * g_sd / m;
    let sigma = (lhs_sd * lhs_sd / m + sigma_rhs2).sqrt();
    Ok(FixedPointCheck { r, lhs, rhs, sigma, within_3_sigma: (lhs - rhs).abs() <= 3.0 * sigma })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistributionalFixedPoint {
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Two-sample KS between a batch of X and a batch of A·X′ + B.
pub fn distributional_fixed_point(joint: &JointInput, cfg: &SimConfig, alpha: f64) -> Result<DistributionalFixedPoint, ModelError> {
    let mut x = sample_batch_for(joint, cfg, Purpose::FixedPoint)?.values;
    let sampler = joint.sampler()?;
    let mut y: Vec<f64> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::FixedPointPairs, cfg.n_streams, |rng, len| {
        (0..len)
            .map(|_| {
                let xp = draw_perpetuity(&sampler, cfg, rng).value;
                let (a, b) = sampler.sample(rng);
                a * xp + b
            })
            .collect()
    });
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let ks = stats::ks_two_sample(&x, &y);
    let critical = stats::ks_two_sample_critical(x.len(), y.len(), alpha);
    Ok(DistributionalFixedPoint { ks, critical, pass: ks < critical })
}

/// Empirical characteristic function (1/n) Σ e^{itX_k}.
pub fn empirical_charfn(values: &[f64], t: f64) -> num_complex::Complex64 {
    let n = values.len() as f64;
    let (c, s) = values.iter().fold((0.0, 0.0), |(c, s), v| (c + (t * v).cos(), s + (t * v).sin()));
    num_complex::Complex64::new(c / n, s / n)
}

/// Single-column CSV with a comment header carrying the config hash and
/// seed. Values use the shortest round-trip representation.
pub fn write_samples_csv(path: &Path, batch: &SampleBatch, config_hash: &str) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "# config_sha256={config_hash} seed={}", batch.provenance.master_seed)?;
    writeln!(w, "x")?;
    for v in &batch.values {
        writeln!(w, "{v}")?;
    }
    w.flush()
}

/// Sample from a law conditioned on exceeding `lo`, by inverting its
/// survival function on (0, S(lo)].
pub(crate) fn conditional_inverse(d: &ScalarDistribution, lo: f64, u: f64) -> Result<f64, ModelError> {
    let target = u * d.survival(lo)?;
    if let ScalarDistribution::SurvivalDefined(law) = d {
        return Ok(law.inverse(target).max(lo));
    }
    let mut a = lo;
    let mut step = 1.0;
    let mut b = lo + step;
    while d.survival(b)? > target {
        a = b;
        step *= 2.0;
        b = a + step;
        if !b.is_finite() {
            return Err(ModelError::InvalidParameter("survival does not reach the target level".into()));
        }
    }
    while b - a > 1e-12 * b.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if d.survival(m)? > target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ScalarDistribution as D;

    fn cfg(n: usize) -> SimConfig {
        SimConfig::default().with_samples(n).with_seed(42)
    }

    #[test]
    fn geometric_series_for_constants() {
        let j = JointInput::independent(D::point_mass(0.5), D::point_mass(1.0));
        let s = j.sampler().unwrap();
        let mut rng = chunk_rng(1, Purpose::Batch, 0);
        let d = draw_perpetuity(&s, &cfg(1), &mut rng);
        assert!((d.value - 2.0).abs() < 1e-15);
        assert_eq!(d.terms, 54);
        assert!(!d.truncated);
    }

    #[test]
    fn empty_and_deterministic_batches() {
        let j = JointInput::independent(D::beta(2.0, 1.0), D::exponential(1.0));
        assert!(sample_batch(&j, &cfg(0)).unwrap().values.is_empty());
        let a = sample_batch(&j, &cfg(10_000)).unwrap();
        let b = sample_batch(&j, &cfg(10_000)).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_batch(&j, &cfg(10_000).with_streams(4)).unwrap();
        assert_eq!(a.values, c.values);
    }

    #[test]
    fn truncation_cap_is_reported() {
        let a = D::mixture(vec![(0.999, D::point_mass(1.0)), (0.001, D::point_mass(0.5))]);
        let j = JointInput::independent(a, D::exponential(1.0));
        let c = SimConfig { max_terms: 100, ..cfg(1000) };
        let b = sample_batch(&j, &c).unwrap();
        assert!(b.truncation.hit_max_terms > 800);
    }

    #[test]
    fn empirical_tail_edges() {
        let v = vec![2.0; 10];
        let t = empirical_tail(&v, &[1.0, 3.0]);
        assert_eq!((t[0].p_hat, t[0].std_err), (1.0, 0.0));
        assert_eq!(t[1].p_hat, 0.0);
    }

    #[test]
    fn fixed_iterations_match_series_in_law() {
        let j = JointInput::independent(D::point_mass(0.5), D::point_mass(1.0));
        let c = SimConfig { mode: Mode::FixedIterations(3), ..cfg(4) };
        let b = sample_batch(&j, &c).unwrap();
        assert!(b.values.iter().all(|&v| v == 1.75));
    }

    #[test]
    fn conditional_estimator_far_left_is_one() {
        let j = JointInput::independent(D::point_mass(0.5), D::exponential(1.0));
        let e = conditional_tail_estimate(&j, &cfg(2048), -1e6).unwrap();
        assert_eq!(e.p_hat, 1.0);
        let dep = JointInput::threshold(D::exponential(1.0), 0.3, 0.7, 1.0);
        assert!(conditional_tail_estimate(&dep, &cfg(10), 1.0).is_err());
    }

    #[test]
    fn exp_moment_at_zero_is_one() {
        let j = JointInput::independent(D::point_mass(0.5), D::exponential(1.0));
        assert_eq!(estimate_exp_moment(&j, &cfg(10), 0.0).unwrap().estimate, 1.0);
    }

    #[test]
    fn conditional_inverse_respects_threshold() {
        let d = D::exponential(1.0);
        let x = conditional_inverse(&d, 3.0, 0.5).unwrap();
        assert!((x - (3.0 + 2f64.ln())).abs() < 1e-10);
    }
}
