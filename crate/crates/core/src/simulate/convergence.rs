//! Goldie–Maller check: E log|A| < 0 and E log(1 + |B|) < ∞.

use serde::Serialize;

use super::{run_chunks, stats::mean_sd, Purpose};
use crate::model::{JointInput, ModelError, Sampler, ScalarDistribution, Tri};
use crate::special::digamma;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MC_DRAWS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceVerdict {
    Converges,
    Diverges,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogMoment {
    pub value: f64,
    /// Zero for symbolic values.
    pub std_err: f64,
    pub symbolic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub verdict: ConvergenceVerdict,
    pub e_log_abs_a: LogMoment,
    pub log_moment_b_finite: Tri,
    pub evidence: String,
}

/// E log|D| for the closed-form table, None elsewhere.
pub(crate) fn symbolic_log_abs(d: &ScalarDistribution) -> Option<f64> {
    use ScalarDistribution as D;
    match d {
        D::PointMass(v) => Some(v.abs().ln()),
        D::Beta { p, q } => Some(digamma(*p) - digamma(p + q)),
        D::Uniform { lo, hi } => {
            let f = |u: f64| if u == 0.0 { 0.0 } else { u * u.abs().ln() - u };
            Some((f(*hi) - f(*lo)) / (hi - lo))
        }
        D::Exponential { rate } => Some(-EULER_GAMMA - rate.ln()),
        D::Gamma { shape, rate } => Some(digamma(*shape) - rate.ln()),
        D::Negated(inner) => symbolic_log_abs(inner),
        D::Scaled { inner, factor } => Some(symbolic_log_abs(inner)? + factor.abs().ln()),
        D::Mixture(parts) => parts.iter().map(|(w, p)| Some(w * symbolic_log_abs(p)?)).sum(),
        _ => None,
    }
}

/// Symbolic finiteness of E log(1 + |D|): bounded support or an MGF finite
/// on both sides of zero.
pub(crate) fn log_moment_finite(d: &ScalarDistribution) -> Tri {
    let s = d.support();
    if s.lo.is_finite() && s.hi.is_finite() {
        return Tri::True;
    }
    let dom = d.mgf_domain();
    let right = s.hi.is_finite() || dom.hi > 0.0;
    let left = s.lo.is_finite() || dom.lo < 0.0;
    if right && left {
        Tri::True
    } else {
        Tri::Unknown
    }
}

fn log_abs_a(joint: &JointInput, seed: u64) -> Result<LogMoment, ModelError> {
    let a = joint.a_marginal();
    if let Some(v) = symbolic_log_abs(&a) {
        return Ok(LogMoment { value: v, std_err: 0.0, symbolic: true });
    }
    let sampler = Sampler::new(&a)?;
    let logs: Vec<f64> =
        run_chunks(MC_DRAWS, seed, Purpose::Convergence, 1, |rng, len| (0..len).map(|_| sampler.sample(rng).abs().ln()).collect());
    let (m, sd) = mean_sd(&logs);
    Ok(LogMoment { value: m, std_err: sd / (MC_DRAWS as f64).sqrt(), symbolic: false })
}

/// Three-valued convergence verdict for the series Σ Π_{k−1} B_k. Monte
/// Carlo evidence on E log|A| counts only outside a ±3σ band.
pub fn check_convergence(joint: &JointInput) -> Result<ConvergenceReport, ModelError> {
    let la = log_abs_a(joint, 0x6c6f67)?;
    let lb = log_moment_finite(&joint.b);
    let band = 3.0 * la.std_err;
    let how = if la.symbolic { "exact" } else { "Monte Carlo" };
    let (verdict, evidence) = if la.value - band >= 0.0 {
        (ConvergenceVerdict::Diverges, format!("E log|A| = {:.6} ≥ 0 ({how})", la.value))
    } else if la.value + band < 0.0 {
        match lb {
            Tri::True => (ConvergenceVerdict::Converges, format!("E log|A| = {:.6} < 0 ({how}) and E log(1+|B|) < ∞", la.value)),
            _ => (
                ConvergenceVerdict::Unknown,
                format!("E log|A| = {:.6} < 0 ({how}) but E log(1+|B|) < ∞ is not established", la.value),
            ),
        }
    } else {
        (ConvergenceVerdict::Unknown, format!("E log|A| = {:.6} ± {:.1e} straddles 0", la.value, band))
    };
    Ok(ConvergenceReport { verdict, e_log_abs_a: la, log_moment_b_finite: lb, evidence })
}
