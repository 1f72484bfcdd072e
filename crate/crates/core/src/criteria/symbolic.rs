//! Closed-form table for the expectations that theorem hypotheses read.
//! Anything outside the table is `Unknown`; nothing here is estimated.

use serde::Serialize;

use crate::model::{JointInput, ScalarDistribution, SurvivalKind, Tri};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Sym {
    Value(f64),
    /// Finite, value not computed.
    Finite,
    Infinite,
    Unknown,
}

impl Sym {
    pub fn is_finite(self) -> Tri {
        match self {
            Sym::Value(v) => Tri::from_bool(v.is_finite()),
            Sym::Finite => Tri::True,
            Sym::Infinite => Tri::False,
            Sym::Unknown => Tri::Unknown,
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Sym::Value(v) => Some(v),
            Sym::Infinite => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Product of nonnegative quantities with 0·∞ = 0.
    pub fn mul(self, o: Sym) -> Sym {
        use Sym::*;
        match (self, o) {
            (Value(a), _) | (_, Value(a)) if a == 0.0 => Value(0.0),
            (Value(a), Value(b)) => Value(a * b),
            (Infinite, _) | (_, Infinite) => {
                if matches!((self, o), (Unknown, _) | (_, Unknown)) {
                    Unknown
                } else {
                    Infinite
                }
            }
            (Unknown, _) | (_, Unknown) => Unknown,
            _ => Finite,
        }
    }

    pub fn scale(self, w: f64) -> Sym {
        Sym::Value(w).mul(self)
    }

    /// Sum of nonnegative quantities.
    pub fn add(self, o: Sym) -> Sym {
        use Sym::*;
        match (self, o) {
            (Infinite, _) | (_, Infinite) => Infinite,
            (Unknown, _) | (_, Unknown) => Unknown,
            (Value(a), Value(b)) => Value(a + b),
            _ => Finite,
        }
    }

    pub fn less_than(self, bound: f64) -> Tri {
        match self {
            Sym::Value(v) => Tri::from_bool(v < bound),
            Sym::Infinite => Tri::False,
            _ => Tri::Unknown,
        }
    }
}

/// φ_D(s) = E e^{sD}.
pub fn mgf_sym(d: &ScalarDistribution, s: f64) -> Sym {
    if s == 0.0 {
        return Sym::Value(1.0);
    }
    if d.is_custom_survival() {
        return Sym::Unknown;
    }
    if !d.mgf_domain().contains(s) {
        return Sym::Infinite;
    }
    let v = d.mgf(s);
    if v.is_finite() {
        Sym::Value(v)
    } else {
        Sym::Unknown
    }
}

/// E e^{sB}1{A = v}.
pub fn mgf_on_a_atom(joint: &JointInput, v: f64, s: f64) -> Sym {
    let a = joint.a_marginal();
    let p = a.prob_eq(v);
    if p == 0.0 {
        return Sym::Value(0.0);
    }
    if joint.is_independent() {
        mgf_sym(&joint.b, s).scale(p)
    } else {
        Sym::Unknown
    }
}

/// Order k of the pole of φ_D at an open end s of its domain: φ(u) grows
/// like |s − u|^{−k}. `right` selects the end.
fn pole_order(d: &ScalarDistribution, s: f64, right: bool) -> Option<f64> {
    use ScalarDistribution as D;
    let dom = d.mgf_domain();
    let at_end = if right { dom.hi == s && !dom.hi_closed } else { dom.lo == s && !dom.lo_closed };
    if dom.contains(s) {
        return Some(0.0);
    }
    if !at_end {
        return None;
    }
    match d {
        D::Exponential { rate } if right && *rate == s => Some(1.0),
        D::Gamma { shape, rate } if right && *rate == s => Some(*shape),
        D::Negated(i) => pole_order(i, -s, !right),
        D::Shifted { inner, .. } => pole_order(inner, s, right),
        D::Scaled { inner, factor } => pole_order(inner, s * factor, if *factor > 0.0 { right } else { !right }),
        D::Mixture(parts) => {
            parts.iter().try_fold(0.0f64, |k, (_, p)| Some(k.max(pole_order(p, s, right)?)))
        }
        D::Difference { left, right: r } => Some(pole_order(left, s, right)? + pole_order(r, -s, !right)?),
        D::SurvivalDefined(law) => match law.kind() {
            SurvivalKind::NegLogRatio { b, .. } if right && *b == s => Some(1.0),
            _ => None,
        },
        _ => None,
    }
}

/// Exponent κ of the density of D near an end of its support: density
/// ~ dist^κ. An atom at the end counts as κ = −1.
fn end_exponent(d: &ScalarDistribution, upper: bool) -> Option<f64> {
    use ScalarDistribution as D;
    match d {
        D::PointMass(_) => Some(-1.0),
        D::Beta { p, q } => Some(if upper { q - 1.0 } else { p - 1.0 }),
        D::Uniform { .. } => Some(0.0),
        D::Negated(i) => end_exponent(i, !upper),
        D::Shifted { inner, .. } => end_exponent(inner, upper),
        D::Scaled { inner, factor } => end_exponent(inner, if *factor > 0.0 { upper } else { !upper }),
        D::Mixture(parts) => {
            let s = d.support();
            let end = if upper { s.hi } else { s.lo };
            parts
                .iter()
                .filter(|(_, p)| {
                    let ps = p.support();
                    (if upper { ps.hi } else { ps.lo }) == end
                })
                .try_fold(f64::INFINITY, |k, (_, p)| Some(k.min(end_exponent(p, upper)?)))
        }
        _ => None,
    }
}

/// Components of a mixture tree with their weights.
fn components(d: &ScalarDistribution) -> Vec<(f64, &ScalarDistribution)> {
    match d {
        ScalarDistribution::Mixture(parts) => {
            parts.iter().flat_map(|(w, p)| components(p).into_iter().map(move |(v, q)| (w * v, q))).collect()
        }
        other => vec![(1.0, other)],
    }
}

/// E φ_B(rA) for A independent of B.
pub fn mgf_at_scaled(b: &ScalarDistribution, a: &ScalarDistribution, r: f64) -> Sym {
    let mut total = Sym::Value(0.0);
    for (w, c) in components(a) {
        let term = if let Some(v) = c.as_constant() {
            mgf_sym(b, r * v)
        } else {
            mgf_over_continuous(b, c, r)
        };
        total = total.add(term.scale(w));
    }
    total
}

fn mgf_over_continuous(b: &ScalarDistribution, c: &ScalarDistribution, r: f64) -> Sym {
    if b.is_custom_survival() {
        return Sym::Unknown;
    }
    let sup = c.support();
    if !(sup.lo.is_finite() && sup.hi.is_finite()) {
        return Sym::Unknown;
    }
    let (lo, hi) = ((r * sup.lo).min(r * sup.hi), (r * sup.lo).max(r * sup.hi));
    let dom = b.mgf_domain();
    if dom.contains(lo) && dom.contains(hi) {
        return Sym::Finite;
    }
    // the continuous laws in the table have positive density on their hull
    if hi > dom.hi || lo < dom.lo {
        return Sym::Infinite;
    }
    let mut out = Sym::Finite;
    for (s, right) in [(hi, true), (lo, false)] {
        if dom.contains(s) {
            continue;
        }
        // s·/r maps back to the upper end of c when r > 0
        let upper = if r > 0.0 { right } else { !right };
        match (pole_order(b, s, right), end_exponent(c, upper)) {
            (Some(k), Some(kappa)) => {
                if kappa + 1.0 <= k {
                    out = Sym::Infinite;
                }
            }
            _ => return Sym::Unknown,
        }
    }
    out
}

/// E e^{rA₁(B₂ + A₂B₃)} for A independent of B, in closed form when A is
/// purely atomic: Σ_{i,j} w_i w_j φ(r a_i) φ(r a_i a_j).
pub fn two_step_mgf(b: &ScalarDistribution, a: &ScalarDistribution, r: f64) -> Sym {
    let atoms = a.atoms();
    let mass: f64 = atoms.iter().map(|(_, w)| w).sum();
    if (mass - 1.0).abs() > 1e-12 {
        return Sym::Unknown;
    }
    let mut total = Sym::Value(0.0);
    for &(ai, wi) in &atoms {
        let first = mgf_sym(b, r * ai);
        for &(aj, wj) in &atoms {
            total = total.add(first.mul(mgf_sym(b, r * ai * aj)).scale(wi * wj));
        }
    }
    total
}

/// E φ_B(r A₁A₂) from the support of |A| alone: finite when r·[−m², m²] lies
/// inside the domain of φ, with m = sup|A|.
pub fn mgf_at_product_bound(b: &ScalarDistribution, a: &ScalarDistribution, r: f64) -> Sym {
    let atoms = a.atoms();
    if (atoms.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-12 {
        let mut total = Sym::Value(0.0);
        for &(ai, wi) in &atoms {
            for &(aj, wj) in &atoms {
                total = total.add(mgf_sym(b, r * ai * aj).scale(wi * wj));
            }
        }
        return total;
    }
    if b.is_custom_survival() {
        return Sym::Unknown;
    }
    let s = a.support();
    let m = s.lo.abs().max(s.hi.abs());
    let dom = b.mgf_domain();
    if dom.contains(r * m * m) && dom.contains(-r * m * m) {
        Sym::Finite
    } else {
        Sym::Unknown
    }
}
