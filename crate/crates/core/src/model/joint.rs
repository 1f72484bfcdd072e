//! The law of (A, B), its sampler, structural flags and nondegeneracy.

use rand::Rng;
use serde::Serialize;

use super::sampler::Sampler;
use super::scalar::ScalarDistribution;
use super::ModelError;

pub use super::scalar::MgfDomain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Tri::True
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Dependence {
    Independent,
    /// A = ζ₁ on {B > q} and ζ₂ on {B ≤ q}.
    ThresholdDependent { zeta1: f64, zeta2: f64, q: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointInput {
    /// Marginal of A. Absent for threshold dependence, where A is derived.
    pub a: Option<ScalarDistribution>,
    pub b: ScalarDistribution,
    pub dependence: Dependence,
}

impl JointInput {
    pub fn independent(a: ScalarDistribution, b: ScalarDistribution) -> Self {
        JointInput { a: Some(a), b, dependence: Dependence::Independent }
    }

    pub fn threshold(b: ScalarDistribution, zeta1: f64, zeta2: f64, q: f64) -> Self {
        JointInput { a: None, b, dependence: Dependence::ThresholdDependent { zeta1, zeta2, q } }
    }

    pub fn is_independent(&self) -> bool {
        self.dependence == Dependence::Independent
    }

    /// Parameter checks on both marginals plus the dependence structure.
    pub fn validate_parameters(&self) -> Result<(), ModelError> {
        self.b.validate()?;
        match (&self.dependence, &self.a) {
            (Dependence::Independent, Some(a)) => a.validate(),
            (Dependence::Independent, None) => Err(ModelError::InvalidParameter("independent joint needs a law for A".into())),
            (Dependence::ThresholdDependent { zeta1, zeta2, q }, a) => {
                if a.is_some() {
                    return Err(ModelError::InvalidParameter(
                        "threshold dependence derives A from B; the law of A must be absent".into(),
                    ));
                }
                for z in [zeta1, zeta2] {
                    if !(*z > 0.0 && *z < 1.0) {
                        return Err(ModelError::InvalidParameter(format!("threshold levels must lie in (0, 1), got {z}")));
                    }
                }
                if zeta1 == zeta2 {
                    return Err(ModelError::InvalidParameter("threshold levels must differ".into()));
                }
                if !q.is_finite() {
                    return Err(ModelError::InvalidParameter(format!("threshold q must be finite, got {q}")));
                }
                self.b.survival(*q).map(|_| ())
            }
        }
    }

    /// Full validation: parameters, then nondegeneracy.
    pub fn validate(&self) -> Result<Nondegeneracy, ModelError> {
        self.validate_parameters()?;
        validate_nondegeneracy(self)
    }

    /// Marginal law of A. Under threshold dependence this is the two-atom
    /// law with P{A = ζ₁} = P{B > q}.
    pub fn a_marginal(&self) -> ScalarDistribution {
        match (&self.dependence, &self.a) {
            (Dependence::Independent, Some(a)) => a.clone(),
            (Dependence::ThresholdDependent { zeta1, zeta2, q }, _) => {
                let p = self.b.survival(*q).unwrap_or(f64::NAN);
                if p >= 1.0 {
                    ScalarDistribution::PointMass(*zeta1)
                } else if p <= 0.0 {
                    ScalarDistribution::PointMass(*zeta2)
                } else {
                    ScalarDistribution::Mixture(vec![
                        (p, ScalarDistribution::PointMass(*zeta1)),
                        (1.0 - p, ScalarDistribution::PointMass(*zeta2)),
                    ])
                }
            }
            (Dependence::Independent, None) => ScalarDistribution::PointMass(f64::NAN),
        }
    }

    pub fn sampler(&self) -> Result<JointSampler, ModelError> {
        self.validate_parameters()?;
        let b = Sampler::new(&self.b)?;
        let a = match (&self.dependence, &self.a) {
            (Dependence::Independent, Some(a)) => ASampler::Independent(Sampler::new(a)?),
            (Dependence::ThresholdDependent { zeta1, zeta2, q }, _) => {
                ASampler::Threshold { zeta1: *zeta1, zeta2: *zeta2, q: *q }
            }
            _ => unreachable!("checked by validate_parameters"),
        };
        Ok(JointSampler { a, b })
    }
}

#[derive(Clone, Debug)]
enum ASampler {
    Independent(Sampler),
    Threshold { zeta1: f64, zeta2: f64, q: f64 },
}

#[derive(Clone, Debug)]
pub struct JointSampler {
    a: ASampler,
    b: Sampler,
}

impl JointSampler {
    /// One draw of (A, B). Under threshold dependence B is drawn first.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match &self.a {
            ASampler::Independent(sa) => {
                let a = sa.sample(rng);
                let b = self.b.sample(rng);
                (a, b)
            }
            ASampler::Threshold { zeta1, zeta2, q } => {
                let b = self.b.sample(rng);
                (if b > *q { *zeta1 } else { *zeta2 }, b)
            }
        }
    }

    pub fn sample_b<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.b.sample(rng)
    }

    /// Draws A alone; only meaningful for independent joints.
    pub fn sample_a<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match &self.a {
            ASampler::Independent(sa) => Some(sa.sample(rng)),
            ASampler::Threshold { .. } => None,
        }
    }
}

pub fn sample_pair<R: Rng + ?Sized>(sampler: &JointSampler, rng: &mut R) -> (f64, f64) {
    sampler.sample(rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructuralFlags {
    pub p_a_eq_1: Option<f64>,
    pub p_a_eq_neg1: Option<f64>,
    /// P{0 < A ≤ 1}.
    pub p_a_in_0_1: Option<f64>,
    pub p_a_pos: Option<f64>,
    pub p_a_neg: Option<f64>,
    pub p_b_eq_0: f64,
    /// P{|A| ≤ 1} = 1.
    pub a_bounded_by_1: Tri,
    /// P{|A| < 1} = 1.
    pub a_strictly_inside_1: Tri,
    /// P{A > 0} = 1.
    pub a_positive: Tri,
    pub b_nonneg: Tri,
    pub b_nonpos: Tri,
    pub b_unbounded_right: Tri,
    pub mgf_b_domain: MgfDomain,
    /// E log(1 + B⁻) < ∞.
    pub log_moment_b_minus_finite: Tri,
}

impl StructuralFlags {
    pub fn of(joint: &JointInput) -> StructuralFlags {
        let a = joint.a_marginal();
        let b = &joint.b;
        let sa = a.support();
        let sb = b.support();
        let s0 = a.survival(0.0).ok();
        let s1 = a.survival(1.0).ok();
        let p_a0 = a.prob_eq(0.0);
        let p_a_eq_1 = Some(a.prob_eq(1.0));
        let p_a_eq_neg1 = Some(a.prob_eq(-1.0));
        let p_a_pos = s0;
        let p_a_neg = s0.map(|s| (1.0 - s - p_a0).max(0.0));
        let p_a_in_0_1 = s0.zip(s1).map(|(s0, s1)| (s0 - s1).max(0.0));

        let a_bounded_by_1 = if sa.lo >= -1.0 && sa.hi <= 1.0 {
            Tri::True
        } else {
            let above = s1.map(|s| s > 0.0).unwrap_or(false);
            let below = a.survival(-1.0).ok().map(|s| 1.0 - s - a.prob_eq(-1.0) > 0.0).unwrap_or(false);
            if above || below {
                Tri::False
            } else {
                Tri::Unknown
            }
        };
        let a_strictly_inside_1 = match a_bounded_by_1 {
            Tri::True => Tri::from_bool(a.prob_eq(1.0) == 0.0 && a.prob_eq(-1.0) == 0.0),
            other => other,
        };
        let a_positive = if sa.lo > 0.0 || (sa.lo == 0.0 && p_a0 == 0.0) {
            Tri::True
        } else if p_a0 > 0.0 || s0.map(|s| s < 1.0).unwrap_or(false) {
            Tri::False
        } else {
            Tri::Unknown
        };
        let b0 = b.prob_eq(0.0);
        let bs0 = b.survival(0.0).ok();
        let b_nonneg = if sb.lo >= 0.0 {
            Tri::True
        } else if bs0.map(|s| 1.0 - s - b0 > 0.0).unwrap_or(false) {
            Tri::False
        } else {
            Tri::Unknown
        };
        let b_nonpos = if sb.hi <= 0.0 {
            Tri::True
        } else if bs0.map(|s| s > 0.0).unwrap_or(false) {
            Tri::False
        } else {
            Tri::Unknown
        };
        let b_unbounded_right = if sb.hi.is_infinite() {
            if b.is_custom_survival() {
                Tri::Unknown
            } else {
                Tri::True
            }
        } else {
            Tri::False
        };
        let dom = b.mgf_domain();
        let log_moment_b_minus_finite = if sb.lo.is_finite() || dom.lo < 0.0 { Tri::True } else { Tri::Unknown };
        StructuralFlags {
            p_a_eq_1,
            p_a_eq_neg1,
            p_a_in_0_1,
            p_a_pos,
            p_a_neg,
            p_b_eq_0: b0,
            a_bounded_by_1,
            a_strictly_inside_1,
            a_positive,
            b_nonneg,
            b_nonpos,
            b_unbounded_right,
            mgf_b_domain: dom,
            log_moment_b_minus_finite,
        }
    }
}

impl ScalarDistribution {
    /// True when the law is, or mixes in, a user-supplied survival function
    /// whose support end cannot be read off symbolically.
    pub(crate) fn is_custom_survival(&self) -> bool {
        use ScalarDistribution as D;
        match self {
            D::SurvivalDefined(law) => law.is_custom(),
            D::Negated(i) | D::Shifted { inner: i, .. } | D::Scaled { inner: i, .. } => i.is_custom_survival(),
            D::Mixture(parts) => parts.iter().any(|(_, d)| d.is_custom_survival()),
            D::Difference { left, right } => left.is_custom_survival() || right.is_custom_survival(),
            _ => false,
        }
    }
}

/// Whether the support of X is unbounded on the right. Proven only in the
/// simple cases: A > 0 a.s. with B unbounded right, or |A| ≤ a < 1 with B
/// bounded.
pub fn support_unbounded_right(joint: &JointInput) -> Tri {
    let flags = StructuralFlags::of(joint);
    if flags.a_positive.is_true() && flags.b_unbounded_right.is_true() {
        return Tri::True;
    }
    let sa = joint.a_marginal().support();
    let sb = joint.b.support();
    if sa.lo.abs().max(sa.hi.abs()) < 1.0 && sb.lo.is_finite() && sb.hi.is_finite() {
        return Tri::False;
    }
    Tri::Unknown
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nondegeneracy {
    pub notes: Vec<String>,
}

/// Checks P{A = 0} = 0, P{B = 0} < 1 and P{B + cA = c} < 1 for every c.
pub fn validate_nondegeneracy(joint: &JointInput) -> Result<Nondegeneracy, ModelError> {
    let a = joint.a_marginal();
    let b = &joint.b;
    let pa0 = a.prob_eq(0.0);
    if pa0 > 0.0 {
        return Err(ModelError::Degenerate(format!("P{{A = 0}} = {pa0}, must be 0")));
    }
    let pb0 = b.prob_eq(0.0);
    if pb0 >= 1.0 {
        return Err(ModelError::Degenerate("P{B = 0} = 1, must be below 1".into()));
    }
    let mut notes = Vec::new();
    match &joint.dependence {
        Dependence::Independent => {
            // With A and B independent, B = c(1 − A) a.s. forces both to be
            // constant (c ≠ 0), so only the two-constant case can fail.
            if let (Some(av), Some(bv)) = (a.as_constant(), b.as_constant()) {
                if av != 1.0 {
                    let c = bv / (1.0 - av);
                    return Err(ModelError::Degenerate(format!(
                        "B + cA = c almost surely for c = {c}; X is the constant {c}"
                    )));
                }
            }
        }
        Dependence::ThresholdDependent { zeta1, zeta2, q } => {
            // B = c(1 − ζ₁) on {B > q} and B = c(1 − ζ₂) on {B ≤ q}
            let atoms = b.atoms();
            let mass: f64 = atoms.iter().map(|(_, w)| w).sum();
            if (mass - 1.0).abs() < 1e-12 {
                let candidates: Vec<f64> = atoms
                    .iter()
                    .map(|&(v, _)| if v > *q { v / (1.0 - zeta1) } else { v / (1.0 - zeta2) })
                    .collect();
                for &c in &candidates {
                    let fits = atoms.iter().all(|&(v, _)| {
                        let target = if v > *q { c * (1.0 - zeta1) } else { c * (1.0 - zeta2) };
                        (v - target).abs() <= 1e-12 * v.abs().max(1.0)
                    });
                    if fits {
                        return Err(ModelError::Degenerate(format!("B + cA = c almost surely for c = {c}")));
                    }
                }
            } else {
                notes.push("B has a continuous part, so B + cA is not almost surely constant".into());
            }
        }
    }
    Ok(Nondegeneracy { notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SurvivalLaw;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use ScalarDistribution as D;

    #[test]
    fn constant_pair_samples_constants() {
        let j = JointInput::independent(D::point_mass(0.5), D::point_mass(2.0));
        let s = j.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(sample_pair(&s, &mut rng), (0.5, 2.0));
        }
    }

    #[test]
    fn threshold_dependence_sets_a_from_b() {
        let j = JointInput::threshold(D::exponential(1.0), 0.3, 0.7, 1.0);
        j.validate().unwrap();
        let s = j.sampler().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let (a, b) = s.sample(&mut rng);
            assert_eq!(a, if b > 1.0 { 0.3 } else { 0.7 });
        }
        let m = j.a_marginal();
        assert!((m.prob_eq(0.3) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn threshold_rejects_a_law_and_equal_levels() {
        let mut j = JointInput::threshold(D::exponential(1.0), 0.3, 0.3, 1.0);
        assert!(j.validate().is_err());
        j.dependence = Dependence::ThresholdDependent { zeta1: 0.3, zeta2: 0.6, q: 1.0 };
        j.a = Some(D::uniform(0.0, 1.0));
        assert!(j.validate().is_err());
    }

    #[test]
    fn nondegeneracy_cases() {
        let j = JointInput::independent(D::point_mass(0.5), D::point_mass(1.0));
        match validate_nondegeneracy(&j) {
            Err(ModelError::Degenerate(m)) => assert!(m.contains("c = 2"), "{m}"),
            other => panic!("expected violation, got {other:?}"),
        }
        let j = JointInput::independent(D::point_mass(0.0), D::exponential(1.0));
        assert!(matches!(validate_nondegeneracy(&j), Err(ModelError::Degenerate(m)) if m.contains("A = 0")));
        let j = JointInput::independent(D::beta(2.0, 1.0), D::exponential(1.0));
        assert!(validate_nondegeneracy(&j).is_ok());
        let j = JointInput::independent(D::beta(2.0, 1.0), D::point_mass(0.0));
        assert!(validate_nondegeneracy(&j).is_err());
        // B two-valued and matched to the threshold levels: c = 1 gives
        // B = 0.7 on {B > 0.5} and B = 0.3 on {B ≤ 0.5}
        let b = D::mixture(vec![(0.5, D::point_mass(0.7)), (0.5, D::point_mass(0.3))]);
        let j = JointInput::threshold(b, 0.3, 0.7, 0.5);
        assert!(validate_nondegeneracy(&j).is_err());
    }

    #[test]
    fn flags_for_mixed_a() {
        let a = D::mixture(vec![(0.5, D::point_mass(1.0)), (0.5, D::uniform(0.0, 1.0))]);
        let f = StructuralFlags::of(&JointInput::independent(a, D::exponential(3.0)));
        assert_eq!(f.p_a_eq_1, Some(0.5));
        assert_eq!(f.a_positive, Tri::True);
        assert_eq!(f.a_bounded_by_1, Tri::True);
        assert_eq!(f.a_strictly_inside_1, Tri::False);
        assert_eq!(f.p_a_in_0_1, Some(1.0));
        assert_eq!((f.mgf_b_domain.hi, f.mgf_b_domain.hi_closed), (3.0, false));
        assert_eq!(f.b_nonneg, Tri::True);
        assert_eq!(f.log_moment_b_minus_finite, Tri::True);

        let a = D::mixture(vec![(0.3, D::point_mass(-1.0)), (0.7, D::point_mass(0.5))]);
        let f = StructuralFlags::of(&JointInput::independent(a, D::exponential(1.0)));
        assert_eq!(f.p_a_eq_neg1, Some(0.3));
        assert_eq!(f.a_positive, Tri::False);
        assert!((f.p_a_neg.unwrap() - 0.3).abs() < 1e-15);

        let b = D::survival_defined(SurvivalLaw::neg_log_ratio(1.0, 2.0));
        let f = StructuralFlags::of(&JointInput::independent(D::beta(2.0, 1.0), b));
        assert_eq!((f.mgf_b_domain.hi, f.mgf_b_domain.hi_closed), (1.0, false));
        let f = StructuralFlags::of(&JointInput::independent(D::uniform(-2.0, 0.5), D::exponential(1.0)));
        assert_eq!(f.a_bounded_by_1, Tri::False);
    }

    #[test]
    fn unbounded_support_helper() {
        let j = JointInput::independent(D::beta(2.0, 1.0), D::exponential(1.0));
        assert_eq!(support_unbounded_right(&j), Tri::True);
        let j = JointInput::independent(D::point_mass(0.5), D::uniform(0.0, 1.0));
        assert_eq!(support_unbounded_right(&j), Tri::False);
    }
}
