//! Tail constants of X in the three gamma-like regimes, and the
//! characteristic function of X when A ~ Beta(λ, 1).
//!
//! * Tail inherited from B through ψ: P{X > x} ~ E ψ(bA)·P{B > x}.
//! * Gamma-like B with c < −1 and A ∈ (0, 1]:
//!   P{X > x} ~ E f(X)/(1 − E e^{bB}1{A=1})·P{B > x}.
//! * A ~ Beta(λ, 1) and P{B > x} = C e^{−bx} + r(x): P{X > x} ~ K x^{λC} e^{−bx}.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::criteria::{mgf_on_a_atom, scaled_mgf_criterion, Condition, MomentVerdict, Status, Verdict};
use crate::model::{
    exp_plus_remainder_of, tail_model_of, Dependence, JointInput, ModelError, ScalarDistribution, StructuralFlags,
    TailModel, Tri,
};
use crate::quadrature::{integrate_finite_complex, integrate_semi_infinite, QuadResult};
use crate::simulate::stats::{median_of_means, MOM_BLOCKS};
use crate::simulate::{draw_perpetuity, run_chunks, Purpose, SimConfig};
use crate::special::{exp_ratio, ln_gamma};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailTheorem {
    /// P{X > x} ~ E ψ(bA)·P{B > x}, A independent of B.
    ScaledMgf,
    /// Gamma-like B with c < −1 and A ∈ (0, 1].
    GammaLikeB,
    /// A ~ Beta(λ, 1) with B = C e^{−bx} + r(x) on the right.
    BetaA,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstantSource {
    ClosedForm,
    Quadrature { abs_error: f64 },
    MonteCarlo { std_err: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailForm {
    pub a: f64,
    pub c: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailPrediction {
    pub theorem: TailTheorem,
    /// Predicted P{X > x} ~ a·x^c·e^{−bx}.
    pub form: TailForm,
    pub constant: f64,
    pub source: ConstantSource,
    pub preconditions_trace: Vec<Condition>,
    /// When set, the prediction is constant·P{B > x} with the exact
    /// survival function of B rather than its asymptote.
    #[serde(skip)]
    pub b_law: Option<ScalarDistribution>,
}

impl TailPrediction {
    pub fn std_err(&self) -> Option<f64> {
        match self.source {
            ConstantSource::MonteCarlo { std_err } => Some(std_err),
            _ => None,
        }
    }

    /// The asymptote a·x^c·e^{−bx}.
    pub fn asymptote(&self, x: f64) -> f64 {
        let TailForm { a, c, b } = self.form;
        a * x.powf(c) * (-b * x).exp()
    }

    /// Predicted P{X > x}.
    pub fn predicted(&self, x: f64) -> f64 {
        match &self.b_law {
            Some(b) => self.constant * b.survival(x).unwrap_or(f64::NAN),
            None => self.asymptote(x),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("precondition not established: {name} ({detail})")]
    Precondition { name: String, detail: String },
    #[error("moment condition not established: {}", .0.verdict_summary())]
    Verdict(Box<MomentVerdict>),
    #[error("quadrature did not converge for {what}: error estimate {}", .result.abs_error_estimate)]
    Quadrature { what: String, result: QuadResult<f64> },
    #[error("characteristic function quadrature did not converge at t = {t}")]
    CharFn { t: f64 },
}

impl MomentVerdict {
    fn verdict_summary(&self) -> String {
        let blocking: Vec<&str> =
            self.condition_trace.iter().filter(|c| c.status != Status::Satisfied).map(|c| c.name.as_str()).collect();
        format!("{:?} for {} (blocking: {})", self.verdict, self.quantity, blocking.join(", "))
    }
}

fn precondition(name: &str, detail: impl Into<String>) -> AsymptoticsError {
    AsymptoticsError::Precondition { name: name.into(), detail: detail.into() }
}

fn satisfied(name: &str, witness: impl Into<String>) -> Condition {
    Condition { name: name.into(), status: Status::Satisfied, witness: witness.into() }
}

/// ψ(s) = Π_{k≥0} φ(s·γ^k) for A ≡ γ, truncated once a factor is within
/// 1e-16 of one.
pub fn psi_constant_a(b: &ScalarDistribution, gamma: f64, s: f64) -> f64 {
    let mut prod = 1.0;
    let mut arg = s;
    for _ in 0..10_000 {
        let f = b.mgf(arg);
        if !f.is_finite() {
            return f64::INFINITY;
        }
        prod *= f;
        if (f - 1.0).abs() < 1e-16 {
            break;
        }
        arg *= gamma;
    }
    prod
}

/// Constant E ψ(bA) of the tail inherited from B.
pub fn scaled_mgf_constant(joint: &JointInput, b: f64, cfg: &SimConfig) -> Result<TailPrediction, AsymptoticsError> {
    let verdict = scaled_mgf_criterion(joint, b).map_err(|e| precondition("scaled_mgf_criterion", e.to_string()))?;
    if verdict.verdict != Verdict::Finite {
        return Err(AsymptoticsError::Verdict(Box::new(verdict)));
    }
    let bl = &joint.b;
    let tm = tail_model_of(bl).ok_or_else(|| precondition("gamma_like_b", "no gamma-like tail model for B"))?;
    let (ta, tc, tb) = tm.leading();
    if tb != b {
        return Err(precondition("decay_rate_matches", format!("B decays at rate {tb}, requested b = {b}")));
    }
    let mut trace = verdict.condition_trace.clone();
    trace.push(satisfied("scaled_mgf_finite", format!("E psi(bA) < inf at b = {b}")));
    let a = joint.a_marginal();
    let (constant, source) = if let Some(g) = a.as_constant() {
        (psi_constant_a(bl, g, b * g), ConstantSource::ClosedForm)
    } else {
        let sampler = joint.sampler()?;
        let w: Vec<f64> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::Constant, cfg.n_streams, |rng, len| {
            (0..len)
                .map(|_| {
                    let av = sampler.sample_a(rng).expect("independent joint");
                    let x = draw_perpetuity(&sampler, cfg, rng).value;
                    (b * av * x).exp()
                })
                .collect()
        });
        let m = median_of_means(&w, MOM_BLOCKS);
        (m.estimate, ConstantSource::MonteCarlo { std_err: m.std_err })
    };
    Ok(TailPrediction {
        theorem: TailTheorem::ScaledMgf,
        form: TailForm { a: constant * ta, c: tc, b },
        constant,
        source,
        preconditions_trace: trace,
        b_law: Some(bl.clone()),
    })
}

/// f(y) with P{Ay + B > x} ~ f(y)·P{B > x}: E e^{byA} for A independent
/// of B, e^{byζ₁} under threshold dependence.
pub fn f_function(joint: &JointInput, b: f64, y: f64) -> Result<f64, ModelError> {
    if y == 0.0 {
        return Ok(1.0);
    }
    match (&joint.dependence, &joint.a) {
        (Dependence::Independent, Some(a)) => Ok(a.mgf(b * y)),
        (Dependence::ThresholdDependent { zeta1, .. }, _) => Ok((b * y * zeta1).exp()),
        _ => Err(ModelError::Unsupported("f needs an independent or threshold-dependent joint".into())),
    }
}

/// Constant E f(X)/(1 − E e^{bB}1{A=1}) for a gamma-like B with c < −1.
pub fn gamma_like_constant(joint: &JointInput, tail: &TailModel, cfg: &SimConfig) -> Result<TailPrediction, AsymptoticsError> {
    let TailModel::GammaLike { a: ta, c, b } = *tail else {
        return Err(precondition("gamma_like_b", "tail model must be gamma-like"));
    };
    tail.validate()?;
    if c >= -1.0 {
        return Err(precondition("power_below_minus_one", format!("c = {c} must be below -1")));
    }
    let bl = &joint.b;
    if bl.support().hi.is_finite() {
        return Err(precondition("gamma_like_b", "B is bounded above, so no gamma-like tail is possible"));
    }
    let mut trace = vec![satisfied("power_below_minus_one", format!("c = {c}"))];
    let a = joint.a_marginal();
    let sa = a.support();
    if !(sa.lo >= 0.0 && sa.hi <= 1.0 && a.prob_eq(0.0) == 0.0) {
        return Err(precondition("a_in_unit_interval", format!("supp A = [{}, {}]", sa.lo, sa.hi)));
    }
    trace.push(satisfied("a_in_unit_interval", format!("supp A = [{}, {}]", sa.lo, sa.hi)));
    let w = mgf_on_a_atom(joint, 1.0, b);
    let w = match w.value() {
        Some(v) if v < 1.0 => v,
        _ => return Err(precondition("unit_atom_mgf_below_one", format!("E exp(bB)1{{A=1}} = {w:?}"))),
    };
    trace.push(satisfied("unit_atom_mgf_below_one", format!("E exp(bB)1{{A=1}} = {w}")));
    let flags = StructuralFlags::of(joint);
    if flags.log_moment_b_minus_finite != Tri::True {
        return Err(precondition("log_moment_b_minus_finite", "E log(1 + B^-) < inf is not established"));
    }
    trace.push(satisfied("log_moment_b_minus_finite", "E log(1 + B^-) < inf"));
    let sampler = joint.sampler()?;
    let xs: Vec<f64> = run_chunks(cfg.n_samples, cfg.master_seed, Purpose::Constant, cfg.n_streams, |rng, len| {
        (0..len).map(|_| draw_perpetuity(&sampler, cfg, rng).value).collect()
    });
    let mut fx = Vec::with_capacity(xs.len());
    for &x in &xs {
        fx.push(f_function(joint, b, x)?);
    }
    let m = median_of_means(&fx, MOM_BLOCKS);
    let denom = 1.0 - w;
    let constant = m.estimate / denom;
    Ok(TailPrediction {
        theorem: TailTheorem::GammaLikeB,
        form: TailForm { a: constant * ta, c, b },
        constant,
        source: ConstantSource::MonteCarlo { std_err: m.std_err / denom },
        preconditions_trace: trace,
        b_law: Some(bl.clone()),
    })
}

/// K for A ~ Beta(λ, 1) and P{B > x} = C e^{−bx} + r(x):
/// K = C b^{Cλ}/Γ(Cλ+1)·exp(λ[∫₀^∞ (e^{by}−1)/y·r(y) dy − ∫₀^∞ (1−e^{−by})/y·P{B ≤ −y} dy]).
pub fn beta_tail_constant(
    lambda: f64,
    tail: &TailModel,
    left_tail: Option<&dyn Fn(f64) -> f64>,
) -> Result<TailPrediction, AsymptoticsError> {
    let TailModel::ExpPlusRemainder { c_coef, b, r, flags } = tail else {
        return Err(precondition("exp_plus_remainder", "tail model must be C e^(-bx) + r(x)"));
    };
    if !(lambda > 0.0) {
        return Err(precondition("lambda_positive", format!("lambda = {lambda}")));
    }
    tail.validate()?;
    if flags.vanishes != Tri::True {
        return Err(precondition("remainder_vanishes", "e^(bx) r(x) -> 0 is not asserted"));
    }
    if flags.integrable != Tri::True {
        return Err(precondition("remainder_integrable", "integrability of e^(by) r(y)/y is not asserted"));
    }
    let (c_coef, b) = (*c_coef, *b);
    let mut trace = vec![
        satisfied("remainder_vanishes", "asserted"),
        satisfied("remainder_integrable", "asserted"),
    ];
    const TOL: f64 = 1e-12;
    // decay of e^{by} r(y) is unknown beyond integrability; probe slowly
    let hint = 0.05 * b.min(1.0);
    let right = integrate_semi_infinite(|y| exp_ratio(b, y) * r(y), 0.0, TOL, hint);
    if !right.converged {
        return Err(AsymptoticsError::Quadrature { what: "remainder integral".into(), result: right });
    }
    let (left_value, left_err) = match left_tail {
        Some(lt) => {
            let q = integrate_semi_infinite(|y| -exp_ratio(-b, y) * lt(-y), 0.0, TOL, hint);
            if !q.converged {
                return Err(AsymptoticsError::Quadrature { what: "left-tail integral".into(), result: q });
            }
            trace.push(satisfied("left_tail_integral", format!("{} +- {:.1e}", q.value, q.abs_error_estimate)));
            (q.value, q.abs_error_estimate)
        }
        None => (0.0, 0.0),
    };
    let cl = c_coef * lambda;
    let log_k = c_coef.ln() + cl * b.ln() - ln_gamma(cl + 1.0) + lambda * (right.value - left_value);
    let k = log_k.exp();
    let err = k * lambda * (right.abs_error_estimate + left_err);
    Ok(TailPrediction {
        theorem: TailTheorem::BetaA,
        form: TailForm { a: k, c: cl, b },
        constant: k,
        source: ConstantSource::Quadrature { abs_error: err },
        preconditions_trace: trace,
        b_law: None,
    })
}

/// λ when A ~ Beta(λ, 1) independent of B.
fn beta_lambda(joint: &JointInput) -> Result<f64, AsymptoticsError> {
    match (&joint.dependence, &joint.a) {
        (Dependence::Independent, Some(ScalarDistribution::Beta { p, q })) if *q == 1.0 => Ok(*p),
        (Dependence::Independent, Some(ScalarDistribution::Uniform { lo, hi })) if *lo == 0.0 && *hi == 1.0 => Ok(1.0),
        _ => Err(precondition("a_beta_lambda_1", "A must be Beta(lambda, 1) and independent of B")),
    }
}

/// K from the joint: the remainder form and left tail are read off B.
pub fn beta_tail_prediction(joint: &JointInput) -> Result<TailPrediction, AsymptoticsError> {
    let lambda = beta_lambda(joint)?;
    let b = &joint.b;
    let flags = StructuralFlags::of(joint);
    if flags.log_moment_b_minus_finite != Tri::True {
        return Err(precondition("log_moment_b_minus_finite", "E log(1 + B^-) < inf is not established"));
    }
    let tail = exp_plus_remainder_of(b).ok_or_else(|| precondition("exp_plus_remainder", "B has no C e^(-bx) + r(x) form"))?;
    let mut pred = if b.support().lo >= 0.0 {
        beta_tail_constant(lambda, &tail, None)?
    } else {
        let left = |y: f64| b.cdf(y).unwrap_or(f64::NAN);
        beta_tail_constant(lambda, &tail, Some(&left))?
    };
    pred.preconditions_trace.insert(0, satisfied("a_beta_lambda_1", format!("lambda = {lambda}")));
    Ok(pred)
}

/// A theorem that was tried and why it did not apply.
#[derive(Clone, Debug, Serialize)]
pub struct NearMiss {
    pub theorem: TailTheorem,
    pub reason: String,
}

/// Tries the Beta(λ, 1) regime, then gamma-like B with c < −1, then the
/// tail inherited through ψ. On failure every attempt is reported.
pub fn predict_tail(joint: &JointInput, cfg: &SimConfig) -> Result<TailPrediction, Vec<NearMiss>> {
    let mut misses = Vec::new();
    let mut miss = |theorem, e: AsymptoticsError| misses.push(NearMiss { theorem, reason: e.to_string() });
    match beta_tail_prediction(joint) {
        Ok(p) => return Ok(p),
        Err(e) => miss(TailTheorem::BetaA, e),
    }
    match tail_model_of(&joint.b) {
        Some(tm) => {
            match gamma_like_constant(joint, &tm, cfg) {
                Ok(p) => return Ok(p),
                Err(e) => miss(TailTheorem::GammaLikeB, e),
            }
            match scaled_mgf_constant(joint, tm.rate(), cfg) {
                Ok(p) => return Ok(p),
                Err(e) => miss(TailTheorem::ScaledMgf, e),
            }
        }
        None => {
            let e = precondition("gamma_like_b", "B has no gamma-like right tail");
            miss(TailTheorem::GammaLikeB, e.clone());
            miss(TailTheorem::ScaledMgf, e);
        }
    }
    Err(misses)
}

/// Ψ(t) = Φ(t)·exp(λ ∫₀^t (Φ(u) − 1)/u du) for A ~ Beta(λ, 1).
pub fn perpetuity_cf(joint: &JointInput, t: f64, tol: f64) -> Result<Complex64, AsymptoticsError> {
    let lambda = beta_lambda(joint)?;
    let b = &joint.b;
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if t < 0.0 {
        return Ok(perpetuity_cf(joint, -t, tol)?.conj());
    }
    let i_mean = b.mean().map(|m| Complex64::new(0.0, m));
    let integrand = |u: f64| -> Complex64 {
        if u.abs() < 1e-7 {
            if let Some(im) = i_mean {
                return im;
            }
        }
        (b.charfn(u) - 1.0) / u
    };
    let q = integrate_finite_complex(integrand, 0.0, t, tol);
    if !q.converged {
        return Err(AsymptoticsError::CharFn { t });
    }
    Ok(b.charfn(t) * (q.value * lambda).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SurvivalLaw;
    use ScalarDistribution as D;

    #[test]
    fn constant_a_product() {
        let j = JointInput::independent(D::point_mass(0.5), D::exponential(1.0));
        let p = scaled_mgf_constant(&j, 1.0, &SimConfig::default()).unwrap();
        assert!((p.constant - 3.462_746_619_455_061).abs() < 1e-12);
        assert_eq!(p.source, ConstantSource::ClosedForm);
        assert!((p.predicted(8.0) - p.constant * (-8.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn divergent_constant_is_refused() {
        let j = JointInput::independent(D::beta(2.0, 1.0), D::exponential(1.0));
        assert!(matches!(scaled_mgf_constant(&j, 1.0, &SimConfig::default()), Err(AsymptoticsError::Verdict(_))));
    }

    #[test]
    fn f_function_values() {
        let j = JointInput::independent(D::uniform(0.0, 1.0), D::exponential(1.0));
        assert_eq!(f_function(&j, 1.0, 0.0).unwrap(), 1.0);
        assert!((f_function(&j, 1.0, 2.0).unwrap() - 3.194_528_049_465_325).abs() < 1e-13);
        let dep = JointInput::threshold(D::exponential(1.0), 0.3, 0.7, 1.0);
        assert!((f_function(&dep, 1.0, 2.0).unwrap() - 0.6f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn gamma_like_refuses_bounded_b() {
        let j = JointInput::independent(D::uniform(0.0, 1.0), D::uniform(0.0, 1.0));
        let tm = TailModel::GammaLike { a: 1.0, c: -2.0, b: 1.0 };
        assert!(matches!(gamma_like_constant(&j, &tm, &SimConfig::default()), Err(AsymptoticsError::Precondition { .. })));
    }

    #[test]
    fn k_reduces_to_gamma_constant() {
        // exponential B, Beta(c, 1) A: K = b^c/Γ(c+1)
        for &(c, b) in &[(2.0, 1.0), (0.7, 2.5)] {
            let j = JointInput::independent(D::beta(c, 1.0), D::exponential(b));
            let p = beta_tail_prediction(&j).unwrap();
            let want = (c * f64::ln(b) - ln_gamma(c + 1.0)).exp();
            assert!(((p.constant - want) / want).abs() < 1e-10, "{} vs {want}", p.constant);
        }
    }

    #[test]
    fn k_two_sided_exponentials() {
        // B = ξ − η with unit exponentials: K = 1/√(2π)
        let j = JointInput::independent(D::beta(1.0, 1.0), D::difference(D::exponential(1.0), D::exponential(1.0)));
        let p = beta_tail_prediction(&j).unwrap();
        assert!((p.constant / (1.0 / (2.0 * std::f64::consts::PI).sqrt()) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cf_against_gamma_difference() {
        // λ = 1, a = 1, b = 2: Ψ(t) = (2/(2−it))^{4/3} (1/(1+it))^{5/3}
        let bl = D::difference(D::exponential(2.0), D::exponential(1.0));
        let j = JointInput::independent(D::uniform(0.0, 1.0), bl);
        for &t in &[0.5, 1.0, 2.0, -1.0] {
            let z = perpetuity_cf(&j, t, 1e-12).unwrap();
            let i = Complex64::i();
            let want = (2.0 / (2.0 - i * t)).powf(4.0 / 3.0) * (1.0 / (1.0 + i * t)).powf(5.0 / 3.0);
            assert!((z - want).norm() < 1e-9, "t={t}: {z} vs {want}");
        }
    }

    #[test]
    fn cf_neg_log_ratio() {
        let bl = D::survival_defined(SurvivalLaw::neg_log_ratio(1.0, 2.0));
        let j = JointInput::independent(D::beta(2.0, 1.0), bl.clone());
        for &t in &[0.5, 1.0] {
            let z = perpetuity_cf(&j, t, 1e-12).unwrap() / bl.charfn(t);
            let i = Complex64::i();
            let lg = crate::special::ln_gamma_complex;
            let want = (lg(1.0 - i * t) + ln_gamma(3.0) - ln_gamma(1.0) - lg(3.0 - i * t)).exp();
            assert!((z - want).norm() < 1e-5, "t={t}: {z} vs {want}");
        }
    }
}
