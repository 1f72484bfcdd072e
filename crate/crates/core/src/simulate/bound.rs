//! Executable form of the stochastic upper bound AZ + B ≤_st Z for A in
//! (0, 1] and a gamma-like right tail of B with c < −1.
//!
//! Y = (B′ + d)·1{B′ > q}; Z is Y conditioned on Y ≥ x₀, where x₀ is the
//! first point of a grid beyond which the smoothed estimate of P{AY+B > x}
//! stays below P{Y > x}.

use rand::Rng;
use serde::Serialize;

use super::stats::median_of_means;
use super::{conditional_inverse, run_chunks, Purpose, SimConfig, MOM_BLOCKS};
use crate::model::{ModelError, Sampler, ScalarDistribution, SurvivalKind};
use crate::quadrature::integrate_semi_infinite;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticBound {
    pub b: f64,
    pub q: f64,
    pub d: f64,
    pub x0: f64,
    /// E e^{bB}1{A=1} + E e^{bB}1{B>q}.
    pub tilt_mass: f64,
    /// P{Z > x} ~ c_z·P{B > x}.
    pub c_z: f64,
    /// Z = d + B′ conditioned on B′ > z_floor.
    pub z_floor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheckRow {
    pub x: f64,
    pub p_transformed: f64,
    pub p_z: f64,
    pub sigma: f64,
    pub holds: bool,
}

/// E e^{bB}1{B > q} = e^{bq}S(q) + b∫_q^∞ e^{bx}S(x) dx.
fn tilted_tail(bdist: &ScalarDistribution, b: f64, q: f64) -> Result<f64, ModelError> {
    if let ScalarDistribution::SurvivalDefined(law) = bdist {
        if let SurvivalKind::PowerExp { c, b: rate } = law.kind() {
            if *rate == b && *c < -1.0 && q >= 0.0 {
                return Ok((1.0 + q).powf(*c) + b * (1.0 + q).powf(c + 1.0) / (-c - 1.0));
            }
        }
    }
    let head = (b * q).exp() * bdist.survival(q)?;
    let tail = integrate_semi_infinite(|x| (b * x).exp() * bdist.survival(x).unwrap_or(f64::NAN), q, 1e-10, 1e-3);
    if !tail.converged || !tail.value.is_finite() {
        return Err(ModelError::NoClosedForm(format!("E e^(bB)1{{B>q}} did not converge at q = {q}")));
    }
    Ok(head + b * tail.value)
}

impl StochasticBound {
    /// Chooses q on a doubling search, d with e^{bd} twice the lower bound,
    /// then x₀ by grid search using `cfg.n_samples` smoothed draws.
    pub fn construct(
        a: &ScalarDistribution,
        bdist: &ScalarDistribution,
        b: f64,
        cfg: &SimConfig,
    ) -> Result<StochasticBound, ModelError> {
        let atom1 = a.prob_eq(1.0) * bdist.mgf(b);
        if a.prob_eq(1.0) > 0.0 && !atom1.is_finite() {
            return Err(ModelError::InvalidParameter("E e^(bB)1{A=1} is infinite".into()));
        }
        let mut q = 1.0;
        let mut tilt = atom1 + tilted_tail(bdist, b, q)?;
        while tilt >= 1.0 {
            q *= 2.0;
            if q > 1e4 {
                return Err(ModelError::InvalidParameter("no q with E e^(bB)1{A=1} + E e^(bB)1{B>q} < 1".into()));
            }
            tilt = atom1 + tilted_tail(bdist, b, q)?;
        }
        let below_q = 1.0 - bdist.survival(q)?;
        let d = (2.0 * below_q / (1.0 - tilt)).max(1.0).ln() / b;

        let y_survival = |x: f64| -> Result<f64, ModelError> {
            if x < 0.0 {
                Ok(1.0)
            } else if x < q + d {
                bdist.survival(q)
            } else {
                bdist.survival(x - d)
            }
        };
        let a_sampler = Sampler::new(a)?;
        let s_q = bdist.survival(q)?;
        let pairs: Vec<(f64, f64)> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::BoundY, cfg.n_streams, |rng, len| {
            (0..len)
                .map(|_| {
                    let av = a_sampler.sample(rng);
                    let y = if rng.random::<f64>() < s_q {
                        d + conditional_inverse(bdist, q, rng.random::<f64>()).unwrap_or(q)
                    } else {
                        0.0
                    };
                    (av, y)
                })
                .collect()
        });
        // grid up to where P{Y > x} falls to 1e-4
        let mut x_max = q + d;
        while y_survival(x_max)? > 1e-4 {
            x_max += 1.0;
        }
        let grid: Vec<f64> = (0..=200).map(|k| x_max * k as f64 / 200.0).collect();
        let mut x0 = 0.0;
        for &x in grid.iter().rev() {
            let mut terms = Vec::with_capacity(pairs.len());
            for &(av, y) in &pairs {
                terms.push(bdist.survival(x - av * y)?);
            }
            let m = median_of_means(&terms, MOM_BLOCKS);
            if m.estimate + 3.0 * m.std_err > y_survival(x)? {
                x0 = x + x_max / 200.0;
                break;
            }
        }
        let z_floor = if x0 <= 0.0 { q } else { q.max(x0 - d) };
        let c_z = (b * d).exp() / bdist.survival(z_floor)?;
        Ok(StochasticBound { b, q, d, x0, tilt_mass: tilt, c_z, z_floor })
    }

    pub fn survival_z(&self, bdist: &ScalarDistribution, x: f64) -> Result<f64, ModelError> {
        if x < self.z_floor + self.d {
            Ok(1.0)
        } else {
            Ok(bdist.survival(x - self.d)? / bdist.survival(self.z_floor)?)
        }
    }

    pub fn sample_z<R: Rng + ?Sized>(&self, bdist: &ScalarDistribution, rng: &mut R) -> Result<f64, ModelError> {
        Ok(self.d + conditional_inverse(bdist, self.z_floor, rng.random::<f64>())?)
    }
}

/// Empirical P{AZ+B > x} against empirical P{Z > x} at `n_points` grid
/// points spanning the bulk and the upper tail of Z.
pub fn stochastic_bound_check(
    a: &ScalarDistribution,
    bdist: &ScalarDistribution,
    bound: &StochasticBound,
    cfg: &SimConfig,
    n_points: usize,
) -> Result<Vec<BoundCheckRow>, ModelError> {
    let a_s = Sampler::new(a)?;
    let b_s = Sampler::new(bdist)?;
    let draws: Vec<(f64, f64)> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::BoundCheck, cfg.n_streams, |rng, len| {
        (0..len)
            .map(|_| {
                let z = bound.sample_z(bdist, rng).unwrap_or(f64::NAN);
                let z2 = bound.sample_z(bdist, rng).unwrap_or(f64::NAN);
                (z, a_s.sample(rng) * z2 + b_s.sample(rng))
            })
            .collect()
    });
    if draws.iter().any(|p| p.0.is_nan()) {
        return Err(ModelError::InvalidSurvival("conditional inversion failed while sampling Z".into()));
    }
    let lo = bound.z_floor + bound.d - 1.0;
    let mut hi = lo + 1.0;
    while bound.survival_z(bdist, hi)? > 1e-3 {
        hi += 0.5;
    }
    let n = draws.len() as f64;
    Ok((0..n_points)
        .map(|k| {
            let x = lo + (hi - lo) * k as f64 / (n_points - 1).max(1) as f64;
            let pt = draws.iter().filter(|p| p.1 > x).count() as f64 / n;
            let pz = draws.iter().filter(|p| p.0 > x).count() as f64 / n;
            let sigma = ((pt * (1.0 - pt) + pz * (1.0 - pz)) / n).sqrt();
            BoundCheckRow { x, p_transformed: pt, p_z: pz, sigma, holds: pt <= pz + 3.0 * sigma }
        })
        .collect())
}
