//! Right-tail descriptions: gamma-like a·x^c·e^{−bx}, or C·e^{−bx} + r(x).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::joint::Tri;
use super::scalar::ScalarDistribution;
use super::survival_law::SurvivalKind;
use super::ModelError;
use crate::special::ln_gamma;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RemainderFlags {
    /// e^{bx} r(x) → 0.
    pub vanishes: Tri,
    /// ∫₁^∞ e^{by}/y r⁺(y) dy < ∞ and ∫₁^∞ e^{(b+ε)y}/y r⁻(y) dy < ∞ for some ε > 0.
    pub integrable: Tri,
}

#[derive(Clone)]
pub enum TailModel {
    /// P{D > x} ~ a·x^c·e^{−bx}.
    GammaLike { a: f64, c: f64, b: f64 },
    /// P{D > x} = C·e^{−bx} + r(x) for x ≥ 0.
    ExpPlusRemainder { c_coef: f64, b: f64, r: Arc<dyn Fn(f64) -> f64 + Send + Sync>, flags: RemainderFlags },
}

impl fmt::Debug for TailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TailModel::GammaLike { a, c, b } => write!(f, "GammaLike {{ a: {a}, c: {c}, b: {b} }}"),
            TailModel::ExpPlusRemainder { c_coef, b, flags, .. } => {
                write!(f, "ExpPlusRemainder {{ C: {c_coef}, b: {b}, flags: {flags:?} }}")
            }
        }
    }
}

impl TailModel {
    pub fn rate(&self) -> f64 {
        match self {
            TailModel::GammaLike { b, .. } | TailModel::ExpPlusRemainder { b, .. } => *b,
        }
    }

    /// (a, c, b) of the leading gamma-like term.
    pub fn leading(&self) -> (f64, f64, f64) {
        match self {
            TailModel::GammaLike { a, c, b } => (*a, *c, *b),
            TailModel::ExpPlusRemainder { c_coef, b, .. } => (*c_coef, 0.0, *b),
        }
    }

    /// The asymptote a·x^c·e^{−bx}, or C·e^{−bx}.
    pub fn asymptote(&self, x: f64) -> f64 {
        let (a, c, b) = self.leading();
        a * x.powf(c) * (-b * x).exp()
    }

    /// Parameter checks; for the remainder form also that C·e^{−bx} + r(x)
    /// is a survival function on a grid over [0, 50/b].
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            TailModel::GammaLike { a, c, b } => {
                if !(*a > 0.0 && *b > 0.0 && c.is_finite()) {
                    return Err(ModelError::InvalidParameter(format!("gamma-like tail needs a, b > 0 (a={a}, c={c}, b={b})")));
                }
            }
            TailModel::ExpPlusRemainder { c_coef, b, r, .. } => {
                if !(*c_coef > 0.0 && *b > 0.0) {
                    return Err(ModelError::InvalidParameter(format!("remainder tail needs C, b > 0 (C={c_coef}, b={b})")));
                }
                let mut prev = f64::INFINITY;
                for k in 0..=2000 {
                    let x = 50.0 / b * k as f64 / 2000.0;
                    let s = c_coef * (-b * x).exp() + r(x);
                    if !(-1e-12..=1.0 + 1e-12).contains(&s) {
                        return Err(ModelError::InvalidSurvival(format!("C·e^(-bx) + r(x) = {s} at x = {x}")));
                    }
                    if s > prev + 1e-12 {
                        return Err(ModelError::InvalidSurvival(format!("C·e^(-bx) + r(x) increases at x = {x}")));
                    }
                    prev = s;
                }
            }
        }
        Ok(())
    }
}

/// Gamma-like description of the right tail, when it can be read off the
/// variant tree. Laws bounded above have none.
pub fn tail_model_of(d: &ScalarDistribution) -> Option<TailModel> {
    let (a, c, b, _) = leading_tail(d)?;
    Some(TailModel::GammaLike { a, c, b })
}

/// C·e^{−bx} + r(x) form with r computed from the exact survival function.
/// Available when the leading term is purely exponential.
pub fn exp_plus_remainder_of(d: &ScalarDistribution) -> Option<TailModel> {
    let (a, c, b, integrable) = leading_tail(d)?;
    if c != 0.0 {
        return None;
    }
    d.survival(0.0).ok()?;
    let law = d.clone();
    let r = move |x: f64| law.survival(x).unwrap_or(f64::NAN) - a * (-b * x).exp();
    Some(TailModel::ExpPlusRemainder {
        c_coef: a,
        b,
        r: Arc::new(r),
        flags: RemainderFlags { vanishes: Tri::True, integrable },
    })
}

/// (a, c, b, remainder integrability) of the leading term.
fn leading_tail(d: &ScalarDistribution) -> Option<(f64, f64, f64, Tri)> {
    use ScalarDistribution as D;
    if let Some(terms) = d.sum_terms() {
        // exact expansion Σ coef·x^p·e^{−rate·x}; every non-leading term
        // decays strictly faster, so the remainder is integrable
        let mut acc: Vec<(f64, i32, f64)> = Vec::new();
        for t in &terms {
            for (coef, p, rate) in t.right_tail() {
                match acc.iter_mut().find(|e| e.1 == p && e.2 == rate) {
                    Some(e) => e.0 += t.weight * coef,
                    None => acc.push((t.weight * coef, p, rate)),
                }
            }
        }
        acc.retain(|e| e.0.abs() > 1e-300);
        let b = acc.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            return None;
        }
        let (coef, p, _) = acc.iter().filter(|e| e.2 == b).max_by_key(|e| e.1).copied()?;
        if coef <= 0.0 {
            return None;
        }
        return Some((coef, p as f64, b, Tri::True));
    }
    match d {
        D::Gamma { shape, rate } => {
            let a = ((shape - 1.0) * rate.ln() - ln_gamma(*shape)).exp();
            Some((a, shape - 1.0, *rate, Tri::from_bool(*shape == 1.0)))
        }
        D::SurvivalDefined(law) => match law.kind() {
            SurvivalKind::PowerExp { c, b } => Some((1.0, *c, *b, Tri::from_bool(*c == 0.0))),
            // r(x) = O(e^{−(b+min(1,λ))x})
            SurvivalKind::NegLogRatio { b, lambda } => Some((1.0 / lambda, 0.0, *b, Tri::True)),
            SurvivalKind::Custom { .. } => None,
        },
        D::Shifted { inner, offset } => {
            let (a, c, b, i) = leading_tail(inner)?;
            Some((a * (b * offset).exp(), c, b, i))
        }
        D::Scaled { inner, factor } if *factor > 0.0 => {
            let (a, c, b, i) = leading_tail(inner)?;
            Some((a * factor.powf(-c), c, b / factor, i))
        }
        D::Mixture(parts) => {
            let mut best: Option<(f64, f64, f64, Tri)> = None;
            for (w, p) in parts {
                if p.support().hi.is_finite() {
                    continue;
                }
                let (a, c, b, i) = leading_tail(p)?;
                best = Some(match best {
                    None => (w * a, c, b, i),
                    Some(cur) => {
                        if b < cur.2 || (b == cur.2 && c > cur.1) {
                            (w * a, c, b, i)
                        } else if b == cur.2 && c == cur.1 {
                            (cur.0 + w * a, c, b, if i == cur.3 { i } else { Tri::Unknown })
                        } else {
                            cur
                        }
                    }
                });
            }
            best
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SurvivalLaw;
    use ScalarDistribution as D;

    #[test]
    fn exponential_and_gamma_tails() {
        let (a, c, b) = tail_model_of(&D::exponential(2.0)).unwrap().leading();
        assert_eq!((a, c, b), (1.0, 0.0, 2.0));
        let (a, c, b) = tail_model_of(&D::gamma(3.0, 1.0)).unwrap().leading();
        assert!((a - 0.5).abs() < 1e-14 && c == 2.0 && b == 1.0);
        assert!(tail_model_of(&D::beta(2.0, 1.0)).is_none());
    }

    #[test]
    fn two_sided_mixture_constant() {
        // ξ − η with survival p·e^{−bx} + (1−p)·e^{−cx} on each side
        let (p, b, c) = (0.5, 1.0, 2.0);
        let xi = D::mixture(vec![(p, D::exponential(b)), (1.0 - p, D::exponential(c))]);
        let d = D::difference(xi.clone(), xi);
        let m = exp_plus_remainder_of(&d).unwrap();
        let c1 = p * p + 2.0 * p * (1.0 - p) * c / (b + c);
        let c2 = (1.0 - p) * (1.0 - p) + 2.0 * p * (1.0 - p) * b / (b + c);
        let TailModel::ExpPlusRemainder { c_coef, b: rate, r, flags } = &m else { panic!() };
        assert!((c_coef - c1 / 2.0).abs() < 1e-15);
        assert_eq!(*rate, b);
        assert_eq!(flags.integrable, Tri::True);
        for &x in &[0.0, 0.5, 3.0] {
            assert!((r(x) - c2 / 2.0 * (-c * x).exp()).abs() < 1e-15, "x={x}");
        }
        m.validate().unwrap();
    }

    #[test]
    fn neg_log_ratio_remainder() {
        let d = D::survival_defined(SurvivalLaw::neg_log_ratio(1.0, 2.0));
        let TailModel::ExpPlusRemainder { c_coef, r, .. } = exp_plus_remainder_of(&d).unwrap() else { panic!() };
        assert_eq!(c_coef, 0.5);
        // λ = 2: r(x) = e^{−2x}/2
        assert!((r(1.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn power_exp_is_gamma_like() {
        let d = D::survival_defined(SurvivalLaw::power_exp(-2.0, 1.0));
        let (a, c, b) = tail_model_of(&d).unwrap().leading();
        assert_eq!((a, c, b), (1.0, -2.0, 1.0));
        assert!(exp_plus_remainder_of(&d).is_none());
    }

    #[test]
    fn bad_remainder_is_rejected() {
        let m = TailModel::ExpPlusRemainder {
            c_coef: 1.0,
            b: 1.0,
            r: Arc::new(|x| 0.5 * x.sin()),
            flags: RemainderFlags { vanishes: Tri::Unknown, integrable: Tri::Unknown },
        };
        assert!(m.validate().is_err());
    }
}
