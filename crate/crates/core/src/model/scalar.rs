//! One-dimensional laws as a variant tree, with exact survival functions,
//! MGFs and characteristic functions wherever a closed form exists.

use num_complex::Complex64;

use super::survival_law::SurvivalLaw;
use super::ModelError;
use crate::quadrature::{integrate_finite, integrate_finite_complex, integrate_semi_infinite, semi_infinite_with, QuadOptions, QuadResult};
use crate::special::{hyp1f1, hyp1f1_complex};

/// Survival values computed by convolution carry this absolute tolerance.
pub const CONVOLUTION_TOL: f64 = 1e-10;
/// A numeric MGF integral above this is reported as divergent.
const MGF_DIVERGENCE: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub enum ScalarDistribution {
    PointMass(f64),
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Beta { p: f64, q: f64 },
    Uniform { lo: f64, hi: f64 },
    Negated(Box<ScalarDistribution>),
    Shifted { inner: Box<ScalarDistribution>, offset: f64 },
    Scaled { inner: Box<ScalarDistribution>, factor: f64 },
    Mixture(Vec<(f64, ScalarDistribution)>),
    /// left − right with independent parts.
    Difference { left: Box<ScalarDistribution>, right: Box<ScalarDistribution> },
    SurvivalDefined(SurvivalLaw),
}

/// Closed hull of the support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

/// The set of s with E e^{sD} < ∞: an interval containing 0.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct MgfDomain {
    pub lo: f64,
    pub lo_closed: bool,
    pub hi: f64,
    pub hi_closed: bool,
}

impl MgfDomain {
    pub const ALL: MgfDomain = MgfDomain { lo: f64::NEG_INFINITY, lo_closed: false, hi: f64::INFINITY, hi_closed: false };

    pub fn contains(&self, s: f64) -> bool {
        (s > self.lo || (s == self.lo && self.lo_closed)) && (s < self.hi || (s == self.hi && self.hi_closed))
    }

    fn negate(self) -> MgfDomain {
        MgfDomain { lo: -self.hi, lo_closed: self.hi_closed, hi: -self.lo, hi_closed: self.lo_closed }
    }

    fn intersect(self, o: MgfDomain) -> MgfDomain {
        let (lo, lo_closed) = match self.lo.partial_cmp(&o.lo) {
            Some(std::cmp::Ordering::Greater) => (self.lo, self.lo_closed),
            Some(std::cmp::Ordering::Less) => (o.lo, o.lo_closed),
            _ => (self.lo, self.lo_closed && o.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.partial_cmp(&o.hi) {
            Some(std::cmp::Ordering::Less) => (self.hi, self.hi_closed),
            Some(std::cmp::Ordering::Greater) => (o.hi, o.hi_closed),
            _ => (self.hi, self.hi_closed && o.hi_closed),
        };
        MgfDomain { lo, lo_closed, hi, hi_closed }
    }
}

/// shift + Σ sign·Exp(rate) with at most two exponential parts, the building
/// block for closed-form survival of mixtures and differences of exponentials.
#[derive(Clone, Debug)]
pub(crate) struct SumTerm {
    pub weight: f64,
    pub shift: f64,
    pub exps: Vec<(f64, f64)>,
}

impl ScalarDistribution {
    pub fn point_mass(v: f64) -> Self {
        ScalarDistribution::PointMass(v)
    }
    pub fn exponential(rate: f64) -> Self {
        ScalarDistribution::Exponential { rate }
    }
    pub fn gamma(shape: f64, rate: f64) -> Self {
        ScalarDistribution::Gamma { shape, rate }
    }
    pub fn beta(p: f64, q: f64) -> Self {
        ScalarDistribution::Beta { p, q }
    }
    pub fn uniform(lo: f64, hi: f64) -> Self {
        ScalarDistribution::Uniform { lo, hi }
    }
    pub fn negated(inner: ScalarDistribution) -> Self {
        ScalarDistribution::Negated(Box::new(inner))
    }
    pub fn shifted(inner: ScalarDistribution, offset: f64) -> Self {
        ScalarDistribution::Shifted { inner: Box::new(inner), offset }
    }
    pub fn scaled(inner: ScalarDistribution, factor: f64) -> Self {
        ScalarDistribution::Scaled { inner: Box::new(inner), factor }
    }
    pub fn mixture(parts: Vec<(f64, ScalarDistribution)>) -> Self {
        ScalarDistribution::Mixture(parts)
    }
    pub fn difference(left: ScalarDistribution, right: ScalarDistribution) -> Self {
        ScalarDistribution::Difference { left: Box::new(left), right: Box::new(right) }
    }
    pub fn survival_defined(law: SurvivalLaw) -> Self {
        ScalarDistribution::SurvivalDefined(law)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        use ScalarDistribution::*;
        let bad = |m: String| Err(ModelError::InvalidParameter(m));
        match self {
            PointMass(v) => {
                if !v.is_finite() {
                    return bad(format!("point mass at non-finite value {v}"));
                }
            }
            Exponential { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            Gamma { shape, rate } => {
                if !(*shape > 0.0 && *rate > 0.0 && shape.is_finite() && rate.is_finite()) {
                    return bad(format!("gamma parameters must be positive, got shape={shape}, rate={rate}"));
                }
            }
            Beta { p, q } => {
                if !(*p > 0.0 && *q > 0.0 && p.is_finite() && q.is_finite()) {
                    return bad(format!("beta parameters must be positive, got p={p}, q={q}"));
                }
            }
            Uniform { lo, hi } => {
                if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                    return bad(format!("uniform needs lo < hi, got [{lo}, {hi}]"));
                }
            }
            Negated(inner) => inner.validate()?,
            Shifted { inner, offset } => {
                if !offset.is_finite() {
                    return bad(format!("non-finite shift {offset}"));
                }
                inner.validate()?
            }
            Scaled { inner, factor } => {
                if *factor == 0.0 || !factor.is_finite() {
                    return bad(format!("scale factor must be finite and nonzero, got {factor}"));
                }
                inner.validate()?
            }
            Mixture(parts) => {
                if parts.is_empty() {
                    return bad("empty mixture".into());
                }
                let mut total = 0.0;
                for (w, d) in parts {
                    if !(*w > 0.0 && *w <= 1.0) {
                        return bad(format!("mixture weight {w} outside (0, 1]"));
                    }
                    total += w;
                    d.validate()?;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("mixture weights sum to {total}, expected 1"));
                }
            }
            Difference { left, right } => {
                left.validate()?;
                right.validate()?;
            }
            SurvivalDefined(law) => law.validate()?,
        }
        Ok(())
    }

    /// Atoms as (value, probability), merged and sorted by value.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        use ScalarDistribution::*;
        let raw: Vec<(f64, f64)> = match self {
            PointMass(v) => vec![(*v, 1.0)],
            Exponential { .. } | Gamma { .. } | Beta { .. } | Uniform { .. } | SurvivalDefined(_) => vec![],
            Negated(inner) => inner.atoms().into_iter().map(|(v, w)| (-v, w)).collect(),
            Shifted { inner, offset } => inner.atoms().into_iter().map(|(v, w)| (v + offset, w)).collect(),
            Scaled { inner, factor } => inner.atoms().into_iter().map(|(v, w)| (v * factor, w)).collect(),
            Mixture(parts) => parts.iter().flat_map(|(pw, d)| d.atoms().into_iter().map(move |(v, w)| (v, w * pw))).collect(),
            Difference { left, right } => {
                let r = right.atoms();
                left.atoms().into_iter().flat_map(|(lv, lw)| r.iter().map(move |&(rv, rw)| (lv - rv, lw * rw))).collect()
            }
        };
        merge_atoms(raw)
    }

    /// P{D = v}.
    pub fn prob_eq(&self, v: f64) -> f64 {
        self.atoms().iter().filter(|(a, _)| *a == v).map(|(_, w)| w).sum()
    }

    /// Total atomic mass.
    pub fn atom_mass(&self) -> f64 {
        self.atoms().iter().map(|(_, w)| w).sum()
    }

    /// Single-valued laws return that value.
    pub fn as_constant(&self) -> Option<f64> {
        let atoms = self.atoms();
        if atoms.len() == 1 && (atoms[0].1 - 1.0).abs() < 1e-12 {
            Some(atoms[0].0)
        } else {
            None
        }
    }

    pub fn support(&self) -> Support {
        use ScalarDistribution::*;
        match self {
            PointMass(v) => Support { lo: *v, hi: *v },
            Exponential { .. } | Gamma { .. } => Support { lo: 0.0, hi: f64::INFINITY },
            Beta { .. } => Support { lo: 0.0, hi: 1.0 },
            Uniform { lo, hi } => Support { lo: *lo, hi: *hi },
            Negated(inner) => {
                let s = inner.support();
                Support { lo: -s.hi, hi: -s.lo }
            }
            Shifted { inner, offset } => {
                let s = inner.support();
                Support { lo: s.lo + offset, hi: s.hi + offset }
            }
            Scaled { inner, factor } => {
                let s = inner.support();
                let (a, b) = (s.lo * factor, s.hi * factor);
                // 0·∞ cannot occur: factor is finite and nonzero
                Support { lo: a.min(b), hi: a.max(b) }
            }
            Mixture(parts) => parts.iter().fold(Support { lo: f64::INFINITY, hi: f64::NEG_INFINITY }, |acc, (_, d)| {
                let s = d.support();
                Support { lo: acc.lo.min(s.lo), hi: acc.hi.max(s.hi) }
            }),
            Difference { left, right } => {
                let (l, r) = (left.support(), right.support());
                Support { lo: l.lo - r.hi, hi: l.hi - r.lo }
            }
            SurvivalDefined(law) => Support { lo: law.support_lo(), hi: f64::INFINITY },
        }
    }

    /// P{D > x}. Closed form where available, otherwise a convolution with
    /// absolute error at most [`CONVOLUTION_TOL`].
    pub fn survival(&self, x: f64) -> Result<f64, ModelError> {
        use ScalarDistribution::*;
        if x.is_nan() {
            return Err(ModelError::InvalidParameter("survival at NaN".into()));
        }
        Ok(match self {
            PointMass(v) => indicator(*v > x),
            Exponential { rate } => {
                if x < 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Gamma { shape, rate } => {
                if x <= 0.0 {
                    1.0
                } else {
                    statrs::function::gamma::gamma_ur(*shape, rate * x)
                }
            }
            Beta { p, q } => {
                if x <= 0.0 {
                    1.0
                } else if x >= 1.0 {
                    0.0
                } else {
                    // 1 − I_x(p, q) = I_{1−x}(q, p)
                    statrs::function::beta::beta_reg(*q, *p, 1.0 - x)
                }
            }
            Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Negated(inner) => complement_below(inner, -x)?,
            Shifted { inner, offset } => inner.survival(x - offset)?,
            Scaled { inner, factor } => {
                if *factor > 0.0 {
                    inner.survival(x / factor)?
                } else {
                    complement_below(inner, x / factor)?
                }
            }
            Mixture(parts) => {
                let mut s = 0.0;
                for (w, d) in parts {
                    s += w * d.survival(x)?;
                }
                s
            }
            Difference { left, right } => {
                if let Some(terms) = self.sum_terms() {
                    terms.iter().map(|t| t.weight * t.survival(x)).sum::<f64>().clamp(0.0, 1.0)
                } else {
                    difference_survival(left, right, x)?
                }
            }
            SurvivalDefined(law) => law.survival(x),
        })
    }

    /// P{D ≤ x}.
    pub fn cdf(&self, x: f64) -> Result<f64, ModelError> {
        Ok(1.0 - self.survival(x)?)
    }

    /// Density of the absolutely continuous part, where one is available.
    pub fn density(&self, x: f64) -> Option<f64> {
        use ScalarDistribution::*;
        match self {
            PointMass(_) => Some(0.0),
            Exponential { rate } => Some(if x < 0.0 { 0.0 } else { rate * (-rate * x).exp() }),
            Gamma { shape, rate } => Some(if x <= 0.0 {
                if *shape == 1.0 && x == 0.0 {
                    *rate
                } else {
                    0.0
                }
            } else {
                let ln = shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - crate::special::ln_gamma(*shape);
                ln.exp()
            }),
            Beta { p, q } => Some(if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                ((p - 1.0) * x.ln() + (q - 1.0) * (-x).ln_1p() - crate::special::ln_gamma(*p) - crate::special::ln_gamma(*q)
                    + crate::special::ln_gamma(p + q))
                .exp()
            }),
            Uniform { lo, hi } => Some(if x < *lo || x > *hi { 0.0 } else { 1.0 / (hi - lo) }),
            Negated(inner) => inner.density(-x),
            Shifted { inner, offset } => inner.density(x - offset),
            Scaled { inner, factor } => inner.density(x / factor).map(|d| d / factor.abs()),
            Mixture(parts) => {
                let mut s = 0.0;
                for (w, d) in parts {
                    s += w * d.density(x)?;
                }
                Some(s)
            }
            Difference { .. } => None,
            SurvivalDefined(law) => Some(survival_law_density(law, x)),
        }
    }

    pub fn mgf_domain(&self) -> MgfDomain {
        use ScalarDistribution::*;
        match self {
            PointMass(_) | Beta { .. } | Uniform { .. } => MgfDomain::ALL,
            Exponential { rate } | Gamma { rate, .. } => {
                MgfDomain { lo: f64::NEG_INFINITY, lo_closed: false, hi: *rate, hi_closed: false }
            }
            Negated(inner) => inner.mgf_domain().negate(),
            Shifted { inner, .. } => inner.mgf_domain(),
            Scaled { inner, factor } => {
                let d = inner.mgf_domain();
                let f = factor.abs();
                let scaled = MgfDomain { lo: d.lo / f, lo_closed: d.lo_closed, hi: d.hi / f, hi_closed: d.hi_closed };
                if *factor > 0.0 {
                    scaled
                } else {
                    scaled.negate()
                }
            }
            Mixture(parts) => parts.iter().fold(MgfDomain::ALL, |acc, (_, d)| acc.intersect(d.mgf_domain())),
            Difference { left, right } => left.mgf_domain().intersect(right.mgf_domain().negate()),
            SurvivalDefined(law) => {
                let (hi, hi_closed) = law.mgf_right_end();
                MgfDomain { lo: f64::NEG_INFINITY, lo_closed: false, hi, hi_closed }
            }
        }
    }

    /// E e^{sD}, +∞ outside the domain.
    pub fn mgf(&self, s: f64) -> f64 {
        use ScalarDistribution::*;
        if s == 0.0 {
            return 1.0;
        }
        match self {
            PointMass(v) => (s * v).exp(),
            Exponential { rate } => {
                if s < *rate {
                    rate / (rate - s)
                } else {
                    f64::INFINITY
                }
            }
            Gamma { shape, rate } => {
                if s < *rate {
                    (rate / (rate - s)).powf(*shape)
                } else {
                    f64::INFINITY
                }
            }
            Beta { p, q } => hyp1f1(*p, p + q, s),
            Uniform { lo, hi } => {
                let w = s * (hi - lo);
                (s * lo).exp() * w.exp_m1() / w
            }
            Negated(inner) => inner.mgf(-s),
            Shifted { inner, offset } => (s * offset).exp() * inner.mgf(s),
            Scaled { inner, factor } => inner.mgf(s * factor),
            Mixture(parts) => parts.iter().map(|(w, d)| w * d.mgf(s)).sum(),
            Difference { left, right } => left.mgf(s) * right.mgf(-s),
            SurvivalDefined(law) => survival_law_mgf(law, s),
        }
    }

    /// E e^{itD}.
    pub fn charfn(&self, t: f64) -> Complex64 {
        use ScalarDistribution::*;
        if t == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let i = Complex64::i();
        match self {
            PointMass(v) => (i * (t * v)).exp(),
            Exponential { rate } => Complex64::new(*rate, 0.0) / Complex64::new(*rate, -t),
            Gamma { shape, rate } => (Complex64::new(*rate, 0.0) / Complex64::new(*rate, -t)).powf(*shape),
            Beta { p, q } => {
                if t.abs() <= 15.0 {
                    hyp1f1_complex(*p, p + q, Complex64::new(0.0, t))
                } else {
                    let dens = |x: f64| self.density(x).unwrap_or(0.0);
                    integrate_finite_complex(|x| (i * (t * x)).exp() * dens(x), 0.0, 1.0, 1e-12).value
                }
            }
            Uniform { lo, hi } => {
                let w = t * (hi - lo);
                (i * (t * lo)).exp() * ((i * w).exp() - 1.0) / (i * w)
            }
            Negated(inner) => inner.charfn(-t),
            Shifted { inner, offset } => (i * (t * offset)).exp() * inner.charfn(t),
            Scaled { inner, factor } => inner.charfn(t * factor),
            Mixture(parts) => parts.iter().map(|(w, d)| d.charfn(t) * *w).sum(),
            Difference { left, right } => left.charfn(t) * right.charfn(-t),
            SurvivalDefined(law) => {
                // E e^{itD} = e^{it·lo} + it ∫_lo^∞ e^{itx} S(x) dx
                let lo = law.support_lo();
                let r = crate::quadrature::integrate_semi_infinite_complex(
                    |x| (i * (t * x)).exp() * law.survival(x),
                    lo,
                    1e-13,
                    law.decay_hint(),
                );
                (i * (t * lo)).exp() + i * t * r.value
            }
        }
    }

    /// E D when it exists and can be computed.
    pub fn mean(&self) -> Option<f64> {
        use ScalarDistribution::*;
        match self {
            PointMass(v) => Some(*v),
            Exponential { rate } => Some(1.0 / rate),
            Gamma { shape, rate } => Some(shape / rate),
            Beta { p, q } => Some(p / (p + q)),
            Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            Negated(inner) => inner.mean().map(|m| -m),
            Shifted { inner, offset } => inner.mean().map(|m| m + offset),
            Scaled { inner, factor } => inner.mean().map(|m| m * factor),
            Mixture(parts) => parts.iter().map(|(w, d)| d.mean().map(|m| w * m)).sum(),
            Difference { left, right } => Some(left.mean()? - right.mean()?),
            SurvivalDefined(law) => {
                let lo = law.support_lo();
                let r = integrate_semi_infinite(|x| law.survival(x), lo, 1e-12, law.decay_hint());
                r.converged.then_some(lo + r.value)
            }
        }
    }

    /// Decomposition into shift ± exponential sums, when every leaf is an
    /// atom or an exponential.
    pub(crate) fn sum_terms(&self) -> Option<Vec<SumTerm>> {
        use ScalarDistribution::*;
        match self {
            PointMass(v) => Some(vec![SumTerm { weight: 1.0, shift: *v, exps: vec![] }]),
            Exponential { rate } => Some(vec![SumTerm { weight: 1.0, shift: 0.0, exps: vec![(*rate, 1.0)] }]),
            Gamma { shape, rate } if *shape == 1.0 => {
                Some(vec![SumTerm { weight: 1.0, shift: 0.0, exps: vec![(*rate, 1.0)] }])
            }
            Negated(inner) => Some(
                inner
                    .sum_terms()?
                    .into_iter()
                    .map(|t| SumTerm { weight: t.weight, shift: -t.shift, exps: t.exps.iter().map(|&(r, s)| (r, -s)).collect() })
                    .collect(),
            ),
            Shifted { inner, offset } => Some(
                inner.sum_terms()?.into_iter().map(|t| SumTerm { shift: t.shift + offset, ..t }).collect(),
            ),
            Scaled { inner, factor } => Some(
                inner
                    .sum_terms()?
                    .into_iter()
                    .map(|t| SumTerm {
                        weight: t.weight,
                        shift: t.shift * factor,
                        exps: t.exps.iter().map(|&(r, s)| (r / factor.abs(), s * factor.signum())).collect(),
                    })
                    .collect(),
            ),
            Mixture(parts) => {
                let mut out = Vec::new();
                for (w, d) in parts {
                    for t in d.sum_terms()? {
                        out.push(SumTerm { weight: t.weight * w, ..t });
                    }
                }
                Some(out)
            }
            Difference { left, right } => {
                let (l, r) = (left.sum_terms()?, right.sum_terms()?);
                let mut out = Vec::with_capacity(l.len() * r.len());
                for a in &l {
                    for b in &r {
                        if a.exps.len() + b.exps.len() > 2 {
                            return None;
                        }
                        let mut exps = a.exps.clone();
                        exps.extend(b.exps.iter().map(|&(rate, s)| (rate, -s)));
                        out.push(SumTerm { weight: a.weight * b.weight, shift: a.shift - b.shift, exps });
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }
}

impl SumTerm {
    /// P{shift + Σ sign·E_k > x}.
    pub(crate) fn survival(&self, x: f64) -> f64 {
        let y = x - self.shift;
        match self.exps.as_slice() {
            [] => indicator(y < 0.0),
            [(a, s)] => {
                if *s > 0.0 {
                    if y < 0.0 {
                        1.0
                    } else {
                        (-a * y).exp()
                    }
                } else if y >= 0.0 {
                    0.0
                } else {
                    -(a * y).exp_m1()
                }
            }
            [(a, sa), (b, sb)] => {
                if *sa > 0.0 && *sb > 0.0 {
                    hypo_survival(*a, *b, y)
                } else if *sa < 0.0 && *sb < 0.0 {
                    if y >= 0.0 {
                        0.0
                    } else {
                        1.0 - hypo_survival(*a, *b, -y)
                    }
                } else {
                    let (up, down) = if *sa > 0.0 { (*a, *b) } else { (*b, *a) };
                    laplace_survival(up, down, y)
                }
            }
            _ => unreachable!("sum terms carry at most two exponentials"),
        }
    }

    /// Exact right-tail expansion Σ coef·x^power·e^{−rate·x}, valid for
    /// x ≥ shift.
    pub(crate) fn right_tail(&self) -> Vec<(f64, i32, f64)> {
        let s = self.shift;
        match self.exps.as_slice() {
            [] => vec![],
            [(a, sa)] => {
                if *sa > 0.0 {
                    vec![((a * s).exp(), 0, *a)]
                } else {
                    vec![]
                }
            }
            [(a, sa), (b, sb)] => {
                if *sa > 0.0 && *sb > 0.0 {
                    if a == b {
                        let e = (a * s).exp();
                        vec![(e * (1.0 - a * s), 0, *a), (e * a, 1, *a)]
                    } else {
                        vec![(b / (b - a) * (a * s).exp(), 0, *a), (-a / (b - a) * (b * s).exp(), 0, *b)]
                    }
                } else if *sa < 0.0 && *sb < 0.0 {
                    vec![]
                } else {
                    let (up, down) = if *sa > 0.0 { (*a, *b) } else { (*b, *a) };
                    vec![(down / (up + down) * (up * s).exp(), 0, up)]
                }
            }
            _ => unreachable!("sum terms carry at most two exponentials"),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn merge_atoms(mut raw: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (v, w) in raw {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// P{D < y} = 1 − P{D > y} − P{D = y}.
fn complement_below(d: &ScalarDistribution, y: f64) -> Result<f64, ModelError> {
    Ok((1.0 - d.survival(y)? - d.prob_eq(y)).clamp(0.0, 1.0))
}

/// P{E_a + E_b > y} for independent exponentials.
fn hypo_survival(a: f64, b: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if (a - b).abs() <= 1e-9 * a.max(b) {
        let m = 0.5 * (a + b);
        (-m * y).exp() * (1.0 + m * y)
    } else {
        (b * (-a * y).exp() - a * (-b * y).exp()) / (b - a)
    }
}

/// P{E_up − E_down > y}, the asymmetric Laplace law.
fn laplace_survival(up: f64, down: f64, y: f64) -> f64 {
    if y >= 0.0 {
        down / (up + down) * (-up * y).exp()
    } else {
        1.0 - up / (up + down) * (down * y).exp()
    }
}

/// ∫ S_left(x + r) f_right(r) dr over the support [lo, hi] of the right
/// density, which may be unbounded on either side.
pub fn convolution_survival(
    x: f64,
    survival_left: &dyn Fn(f64) -> f64,
    density_right: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    decay: f64,
    tol: f64,
) -> QuadResult<f64> {
    let g = |r: f64| survival_left(x + r) * density_right(r);
    integrate_line(&g, lo, hi, decay, tol)
}

fn integrate_line(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, decay: f64, tol: f64) -> QuadResult<f64> {
    let first = integrate_line_abs(g, lo, hi, decay, tol);
    // deep tails: redo with a tolerance relative to the first estimate
    let scale = first.value.abs();
    if first.converged && scale > 0.0 && scale < 1e3 * tol {
        let second = integrate_line_abs(g, lo, hi, decay, (scale * tol).max(f64::MIN_POSITIVE));
        if second.converged {
            return second;
        }
    }
    first
}

fn integrate_line_abs(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, decay: f64, tol: f64) -> QuadResult<f64> {
    let opts = QuadOptions::absolute(tol);
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => integrate_finite(g, lo, hi, tol),
        (true, false) => semi_infinite_with(g, lo, opts, decay),
        (false, true) => semi_infinite_with(|y| g(-y), -hi, opts, decay),
        (false, false) => {
            let a = semi_infinite_with(g, 0.0, opts, decay);
            let b = semi_infinite_with(|y| g(-y), 0.0, opts, decay);
            QuadResult {
                value: a.value + b.value,
                abs_error_estimate: a.abs_error_estimate + b.abs_error_estimate,
                subdivisions: a.subdivisions + b.subdivisions,
                converged: a.converged && b.converged,
            }
        }
    }
}

fn decay_of(d: &ScalarDistribution) -> f64 {
    let dom = d.mgf_domain();
    let r = dom.hi.min(-dom.lo);
    if r.is_finite() && r > 0.0 {
        r
    } else {
        1.0
    }
}

/// P{L − R > x} by conditioning on whichever side has a density.
fn difference_survival(left: &ScalarDistribution, right: &ScalarDistribution, x: f64) -> Result<f64, ModelError> {
    if right.density(0.0).is_some() && left.survival(0.0).is_ok() {
        // E_R S_L(x + R): continuous part by quadrature, atoms exactly
        let sup = right.support();
        let sl = |y: f64| left.survival(y).unwrap_or(f64::NAN);
        let dr = |r: f64| right.density(r).unwrap_or(f64::NAN);
        let mut total = 0.0;
        if right.atom_mass() < 1.0 {
            let q = convolution_survival(x, &sl, &dr, sup.lo, sup.hi, decay_of(right), CONVOLUTION_TOL);
            if !q.converged || !q.value.is_finite() {
                return Err(ModelError::NoClosedForm(format!("convolution did not converge at x = {x}")));
            }
            total += q.value;
        }
        for (v, w) in right.atoms() {
            total += w * left.survival(x + v)?;
        }
        return Ok(total.clamp(0.0, 1.0));
    }
    if left.density(0.0).is_some() && right.survival(0.0).is_ok() {
        // P{R < L − x} = E_L[1 − S_R(L − x) − P{R = L − x}]
        let sup = left.support();
        let g = |l: f64| (1.0 - right.survival(l - x).unwrap_or(f64::NAN)) * left.density(l).unwrap_or(f64::NAN);
        let mut total = 0.0;
        if left.atom_mass() < 1.0 {
            let q = integrate_line(&g, sup.lo, sup.hi, decay_of(left), CONVOLUTION_TOL);
            if !q.converged || !q.value.is_finite() {
                return Err(ModelError::NoClosedForm(format!("convolution did not converge at x = {x}")));
            }
            total += q.value;
        }
        for (v, w) in left.atoms() {
            total += w * complement_below(right, v - x)?;
        }
        return Ok(total.clamp(0.0, 1.0));
    }
    Err(ModelError::NoClosedForm("difference of laws without densities".into()))
}

fn survival_law_density(law: &SurvivalLaw, x: f64) -> f64 {
    use super::survival_law::SurvivalKind;
    if x < law.support_lo() {
        return 0.0;
    }
    if let SurvivalKind::PowerExp { c, b } = law.kind() {
        return (1.0 + x).powf(*c) * (-b * x).exp() * (b - c / (1.0 + x));
    }
    // fourth-order central difference, one-sided at the support edge
    let h = 1e-4 * x.abs().max(1.0);
    let lo = law.support_lo();
    if x - 2.0 * h < lo {
        let s = |k: f64| law.survival(x + k * h);
        return (-(-3.0 * s(0.0) + 4.0 * s(1.0) - s(2.0)) / (2.0 * h)).max(0.0);
    }
    let s = |k: f64| law.survival(x + k * h);
    (-(-s(2.0) + 8.0 * s(1.0) - 8.0 * s(-1.0) + s(-2.0)) / (12.0 * h)).max(0.0)
}

fn survival_law_mgf(law: &SurvivalLaw, s: f64) -> f64 {
    use super::survival_law::SurvivalKind;
    let (hi, closed) = law.mgf_right_end();
    let lo = law.support_lo();
    if let SurvivalKind::PowerExp { c, b } = law.kind() {
        if s > hi || (s == hi && !closed) {
            return f64::INFINITY;
        }
        if s == *b {
            // 1 + b ∫_0^∞ (1+x)^c dx
            return 1.0 - b / (c + 1.0);
        }
    } else if !law.is_custom() && (s > hi || (s == hi && !closed)) {
        return f64::INFINITY;
    }
    // E e^{sD} = e^{s·lo} + s ∫_lo^∞ e^{sx} S(x) dx
    let decay = (law.decay_hint() - s).max(1e-3);
    let r = integrate_semi_infinite(|x| (s * x).exp() * law.survival(x), lo, 1e-12, decay);
    if !r.converged || r.value.abs() > MGF_DIVERGENCE || !r.value.is_finite() {
        return f64::INFINITY;
    }
    (s * lo).exp() + s * r.value
}
