//! Sound verdicts on E e^{rX} < ∞, E e^{r|X|} < ∞ and E ψ(rA) < ∞.
//!
//! A verdict is Finite or Infinite only when every hypothesis of the
//! criterion used is established symbolically; otherwise it is
//! Inconclusive and the trace names the blocking condition.

mod symbolic;

pub use symbolic::{mgf_at_product_bound, mgf_at_scaled, mgf_on_a_atom, mgf_sym, two_step_mgf, Sym};

use serde::Serialize;
use thiserror::Error;

use crate::model::{support_unbounded_right, validate_nondegeneracy, JointInput, ModelError, StructuralFlags, Tri};
use crate::simulate::{check_convergence, ConvergenceVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Finite,
    Infinite,
    Inconclusive,
}

/// Which criterion produced a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// P{A > 0} = 1.
    PositiveA,
    /// P{A < 0}P{A > 0} > 0 with B ≥ 0.
    MixedSignA,
    /// P{A < 0} = 1.
    NegativeA,
    /// E e^{r|X|} with P{|A| = 1} = 0.
    AbsoluteNoUnitAtoms,
    /// E e^{r|X|} with P{|A| = 1} ∈ (0, 1).
    AbsoluteWithUnitAtoms,
    /// E ψ(rA) for A ∈ (0, 1].
    ScaledPositiveA,
    /// E ψ(rA) for A ∈ (−1, 0).
    ScaledNegativeA,
    /// E ψ(rA) for |A| ∈ (0, 1] with an atom at −1.
    ScaledWithNegativeUnitAtom,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Satisfied,
    Violated,
    Unknown,
}

impl From<Tri> for Status {
    fn from(t: Tri) -> Self {
        match t {
            Tri::True => Status::Satisfied,
            Tri::False => Status::Violated,
            Tri::Unknown => Status::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub status: Status,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentVerdict {
    pub verdict: Verdict,
    pub theorem_used: Criterion,
    /// The moment the verdict is about, e.g. "E exp(rX)".
    pub quantity: String,
    pub r: f64,
    pub condition_trace: Vec<Condition>,
}

impl MomentVerdict {
    fn new(theorem: Criterion, quantity: &str, r: f64) -> Self {
        MomentVerdict {
            verdict: Verdict::Inconclusive,
            theorem_used: theorem,
            quantity: quantity.into(),
            r,
            condition_trace: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, t: Tri, witness: impl Into<String>) -> Tri {
        self.condition_trace.push(Condition { name: name.into(), status: t.into(), witness: witness.into() });
        t
    }

    fn with(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("r must be positive and finite, got {0}")]
    BadR(f64),
    #[error("the series defining X diverges: {0}")]
    Divergent(String),
    #[error("criterion not applicable: {0}")]
    NotApplicable(String),
}

const MGF_X: &str = "E exp(rX)";
const MGF_ABS_X: &str = "E exp(r|X|)";
const MGF_SCALED: &str = "E psi(rA)";

fn fmt_sym(s: Sym) -> String {
    match s {
        Sym::Value(v) => format!("{v}"),
        Sym::Finite => "finite".into(),
        Sym::Infinite => "inf".into(),
        Sym::Unknown => "unknown".into(),
    }
}

fn and3(ts: &[Tri]) -> Tri {
    if ts.contains(&Tri::False) {
        Tri::False
    } else if ts.iter().all(|t| t.is_true()) {
        Tri::True
    } else {
        Tri::Unknown
    }
}

fn check_r(r: f64) -> Result<(), CriteriaError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(CriteriaError::BadR(r))
    }
}

/// Nondegeneracy and almost sure convergence, recorded in the trace.
/// Divergence is an error; unknown convergence leaves the trace open.
fn common_hypotheses(joint: &JointInput, v: &mut MomentVerdict) -> Result<Tri, CriteriaError> {
    validate_nondegeneracy(joint)?;
    v.push("nondegenerate", Tri::True, "P{A=0}=0, P{B=0}<1, B+cA not a.s. constant");
    let conv = check_convergence(joint)?;
    let t = match conv.verdict {
        ConvergenceVerdict::Converges => Tri::True,
        ConvergenceVerdict::Diverges => return Err(CriteriaError::Divergent(conv.evidence)),
        ConvergenceVerdict::Unknown => Tri::Unknown,
    };
    Ok(v.push("series_converges", t, conv.evidence))
}

fn p_le_1(joint: &JointInput) -> Tri {
    let a = joint.a_marginal();
    if a.support().hi <= 1.0 {
        Tri::True
    } else {
        match a.survival(1.0) {
            Ok(s) if s > 0.0 => Tri::False,
            _ => Tri::Unknown,
        }
    }
}

/// Criterion for A > 0 a.s.: A ≤ 1, E e^{rB} < ∞ and E e^{rB}1{A=1} < 1
/// are sufficient; when the support of X is unbounded on the right they are
/// also necessary. With A ∈ (0, 1] the strict inequality is necessary
/// regardless of the support.
pub fn exp_moment_positive_a(joint: &JointInput, r: f64, unbounded_right: Tri) -> Result<MomentVerdict, CriteriaError> {
    check_r(r)?;
    let flags = StructuralFlags::of(joint);
    if !flags.a_positive.is_true() {
        return Err(CriteriaError::NotApplicable("A is not almost surely positive; use the mixed-sign criterion".into()));
    }
    let mut v = MomentVerdict::new(Criterion::PositiveA, MGF_X, r);
    let conv = common_hypotheses(joint, &mut v)?;
    let bound = v.push("a_at_most_one", p_le_1(joint), format!("sup A = {}", joint.a_marginal().support().hi));
    let phi = mgf_sym(&joint.b, r);
    let mgf_ok = v.push("mgf_b_finite", phi.is_finite(), format!("E exp(rB) = {}", fmt_sym(phi)));
    let w = mgf_on_a_atom(joint, 1.0, r);
    let atom_ok = v.push("unit_atom_mgf_below_one", w.less_than(1.0), format!("E exp(rB)1{{A=1}} = {}", fmt_sym(w)));
    let support = v.push("x_unbounded_right", unbounded_right, "support of X");
    if conv != Tri::True {
        return Ok(v);
    }
    let all = and3(&[bound, mgf_ok, atom_ok]);
    Ok(match all {
        Tri::True => v.with(Verdict::Finite),
        Tri::False if support.is_true() => v.with(Verdict::Infinite),
        // A in (0, 1] with E e^{rB}1{A=1} ≥ 1 rules out finiteness outright
        Tri::False if bound.is_true() && atom_ok == Tri::False => v.with(Verdict::Infinite),
        Tri::False if support == Tri::False => {
            v.push(
                "bounded_support_needs_all_b_mgfs",
                Tri::Unknown,
                "with X bounded above, E exp(sB) < inf for all s > 0 is necessary but not a criterion",
            );
            v
        }
        _ => v,
    })
}

/// Criteria for A negative with positive probability and P{A=−1} = 0.
/// Mixed signs need B ≥ 0; then E e^{rX} < ∞ iff |A| ≤ 1 and the
/// conditions of the positive case hold. For A < 0 a.s. the second
/// condition is E e^{r(B₁+A₁B₂)} < ∞.
pub fn exp_moment_mixed_a(joint: &JointInput, r: f64) -> Result<MomentVerdict, CriteriaError> {
    check_r(r)?;
    let flags = StructuralFlags::of(joint);
    let p_neg1 = flags.p_a_eq_neg1.unwrap_or(0.0);
    if p_neg1 > 0.0 {
        return Err(CriteriaError::NotApplicable("P{A=-1} > 0; use the absolute-moment criterion".into()));
    }
    let (p_pos, p_neg) = match (flags.p_a_pos, flags.p_a_neg) {
        (Some(p), Some(n)) => (p, n),
        _ => return Err(CriteriaError::NotApplicable("sign probabilities of A are not available".into())),
    };
    if p_neg <= 0.0 {
        return Err(CriteriaError::NotApplicable("A is not negative with positive probability".into()));
    }
    let a = joint.a_marginal();
    let sa = a.support();
    let abs_bound = if sa.lo >= -1.0 && sa.hi <= 1.0 { Tri::True } else { flags.a_bounded_by_1 };
    if p_pos > 0.0 {
        let mut v = MomentVerdict::new(Criterion::MixedSignA, MGF_X, r);
        let conv = common_hypotheses(joint, &mut v)?;
        let nonneg = v.push("b_nonnegative", flags.b_nonneg, format!("inf supp B = {}", joint.b.support().lo));
        if nonneg != Tri::True {
            v.push(
                "open_case_two_sided_b",
                Tri::Unknown,
                "no criterion is known when A and B both take both signs",
            );
            return Ok(v);
        }
        let bound = v.push("abs_a_at_most_one", abs_bound, format!("supp A = [{}, {}]", sa.lo, sa.hi));
        let phi = mgf_sym(&joint.b, r);
        let mgf_ok = v.push("mgf_b_finite", phi.is_finite(), format!("E exp(rB) = {}", fmt_sym(phi)));
        let w = mgf_on_a_atom(joint, 1.0, r);
        let atom_ok = v.push("unit_atom_mgf_below_one", w.less_than(1.0), format!("E exp(rB)1{{A=1}} = {}", fmt_sym(w)));
        if conv != Tri::True {
            return Ok(v);
        }
        return Ok(match and3(&[bound, mgf_ok, atom_ok]) {
            Tri::True => v.with(Verdict::Finite),
            Tri::False => v.with(Verdict::Infinite),
            Tri::Unknown => v,
        });
    }
    let mut v = MomentVerdict::new(Criterion::NegativeA, MGF_X, r);
    let conv = common_hypotheses(joint, &mut v)?;
    let bound = v.push("abs_a_at_most_one", abs_bound, format!("supp A = [{}, {}]", sa.lo, sa.hi));
    let two = if joint.is_independent() { mgf_sym(&joint.b, r).mul(mgf_at_scaled(&joint.b, &a, r)) } else { Sym::Unknown };
    let two_ok = v.push("two_term_mgf_finite", two.is_finite(), format!("E exp(r(B1+A1B2)) = {}", fmt_sym(two)));
    if conv != Tri::True {
        return Ok(v);
    }
    Ok(match and3(&[bound, two_ok]) {
        Tri::True => v.with(Verdict::Finite),
        Tri::False => v.with(Verdict::Infinite),
        Tri::Unknown => v,
    })
}

/// Criterion for E e^{r|X|} < ∞. Without atoms at ±1: |A| < 1 and
/// E e^{r|B|} < ∞. With P{|A|=1} ∈ (0,1): |A| ≤ 1, E e^{r|B|} < ∞ and
/// E e^{−rB}1{A=−1}·E e^{rB}1{A=−1} < (1 − E e^{−rB}1{A=1})(1 − E e^{rB}1{A=1}).
/// When P{A=−1} > 0 this is also the criterion for E e^{rX}.
pub fn abs_moment_criterion(joint: &JointInput, r: f64) -> Result<MomentVerdict, CriteriaError> {
    check_r(r)?;
    let a = joint.a_marginal();
    let p1 = a.prob_eq(1.0);
    let pm1 = a.prob_eq(-1.0);
    let unit = p1 + pm1;
    let flags = StructuralFlags::of(joint);
    let sa = a.support();
    let b = &joint.b;
    let phi_p = mgf_sym(b, r);
    let phi_m = mgf_sym(b, -r);
    let abs_mgf = phi_p.add(phi_m);
    if unit == 0.0 {
        let mut v = MomentVerdict::new(Criterion::AbsoluteNoUnitAtoms, MGF_ABS_X, r);
        let conv = common_hypotheses(joint, &mut v)?;
        let inside = if sa.lo > -1.0 && sa.hi < 1.0 { Tri::True } else { flags.a_strictly_inside_1 };
        let inside = v.push("abs_a_below_one", inside, format!("supp A = [{}, {}]", sa.lo, sa.hi));
        let m = v.push("abs_mgf_b_finite", abs_mgf.is_finite(), format!("E exp(rB) + E exp(-rB) = {}", fmt_sym(abs_mgf)));
        if conv != Tri::True {
            return Ok(v);
        }
        return Ok(match and3(&[inside, m]) {
            Tri::True => v.with(Verdict::Finite),
            Tri::False => v.with(Verdict::Infinite),
            Tri::Unknown => v,
        });
    }
    if unit >= 1.0 {
        return Err(CriteriaError::NotApplicable("P{|A|=1} = 1 is outside both absolute-moment criteria".into()));
    }
    let mut v = MomentVerdict::new(Criterion::AbsoluteWithUnitAtoms, MGF_ABS_X, r);
    let conv = common_hypotheses(joint, &mut v)?;
    let bound = if sa.lo >= -1.0 && sa.hi <= 1.0 { Tri::True } else { flags.a_bounded_by_1 };
    let bound = v.push("abs_a_at_most_one", bound, format!("supp A = [{}, {}]", sa.lo, sa.hi));
    let m = v.push("abs_mgf_b_finite", abs_mgf.is_finite(), format!("E exp(rB) + E exp(-rB) = {}", fmt_sym(abs_mgf)));
    let lhs = mgf_on_a_atom(joint, -1.0, -r).mul(mgf_on_a_atom(joint, -1.0, r));
    let f_m = mgf_on_a_atom(joint, 1.0, -r);
    let f_p = mgf_on_a_atom(joint, 1.0, r);
    let balance = match (lhs.value(), f_m.value(), f_p.value()) {
        (Some(l), Some(u), Some(w)) => {
            // both factors must be positive: each alone bounds the
            // contribution of the runs A = 1 in one direction
            Tri::from_bool(u < 1.0 && w < 1.0 && l < (1.0 - u) * (1.0 - w))
        }
        _ => Tri::Unknown,
    };
    let witness = format!(
        "lhs = {}, rhs factors = (1 - {}), (1 - {})",
        fmt_sym(lhs),
        fmt_sym(f_m),
        fmt_sym(f_p)
    );
    let balance = v.push("unit_atom_balance", balance, witness);
    if conv != Tri::True {
        return Ok(v);
    }
    Ok(match and3(&[bound, m, balance]) {
        Tri::True => v.with(Verdict::Finite),
        Tri::False => v.with(Verdict::Infinite),
        Tri::Unknown => v,
    })
}

/// Verdict on E e^{rX} < ∞, routed by the sign structure of A.
/// `unbounded_right` defaults to the symbolic helper when absent.
pub fn moment_verdict(joint: &JointInput, r: f64, unbounded_right: Option<Tri>) -> Result<MomentVerdict, CriteriaError> {
    check_r(r)?;
    joint.validate_parameters()?;
    let flags = StructuralFlags::of(joint);
    if flags.p_a_eq_neg1.unwrap_or(0.0) > 0.0 {
        let mut v = abs_moment_criterion(joint, r)?;
        v.quantity = MGF_X.into();
        v.condition_trace.push(Condition {
            name: "negative_unit_atom".into(),
            status: Status::Satisfied,
            witness: "P{A=-1} > 0, so E exp(rX) and E exp(r|X|) are finite together".into(),
        });
        return Ok(v);
    }
    if flags.a_positive.is_true() {
        let u = unbounded_right.unwrap_or_else(|| support_unbounded_right(joint));
        return exp_moment_positive_a(joint, r, u);
    }
    if flags.p_a_neg.map(|p| p > 0.0).unwrap_or(false) {
        return exp_moment_mixed_a(joint, r);
    }
    let mut v = MomentVerdict::new(Criterion::None, MGF_X, r);
    v.push("sign_of_a", Tri::Unknown, "the sign structure of A could not be established");
    Ok(v)
}

/// Criterion for E ψ(rA) < ∞ with A independent of B and P{A=1} < 1.
pub fn scaled_mgf_criterion(joint: &JointInput, r: f64) -> Result<MomentVerdict, CriteriaError> {
    check_r(r)?;
    if !joint.is_independent() {
        return Err(CriteriaError::NotApplicable("E psi(rA) criterion needs A independent of B".into()));
    }
    joint.validate_parameters()?;
    let a = joint.a_marginal();
    let b = &joint.b;
    let sa = a.support();
    let p1 = a.prob_eq(1.0);
    let pm1 = a.prob_eq(-1.0);
    if p1 >= 1.0 {
        return Err(CriteriaError::NotApplicable("P{A=1} must be below 1".into()));
    }
    let positive = sa.lo >= 0.0 && sa.hi <= 1.0 && a.prob_eq(0.0) == 0.0;
    let negative = sa.lo >= -1.0 && sa.hi <= 0.0 && pm1 == 0.0 && a.prob_eq(0.0) == 0.0;
    let unit_neg = sa.lo >= -1.0 && sa.hi <= 1.0 && pm1 > 0.0 && pm1 < 1.0 && a.prob_eq(0.0) == 0.0;

    if positive {
        let mut v = MomentVerdict::new(Criterion::ScaledPositiveA, MGF_SCALED, r);
        common_hypotheses(joint, &mut v)?;
        let t = if p1 == 0.0 {
            let e = mgf_at_scaled(b, &a, r);
            v.push("mgf_b_at_scaled_a_finite", e.is_finite(), format!("E phi(rA) = {}", fmt_sym(e)))
        } else {
            let w = mgf_sym(b, r).scale(p1);
            v.push("unit_atom_mgf_below_one", w.less_than(1.0), format!("phi(r)P{{A=1}} = {}", fmt_sym(w)))
        };
        return Ok(match t {
            Tri::True => v.with(Verdict::Finite),
            Tri::False => v.with(Verdict::Infinite),
            Tri::Unknown => v,
        });
    }
    if negative {
        let mut v = MomentVerdict::new(Criterion::ScaledNegativeA, MGF_SCALED, r);
        common_hypotheses(joint, &mut v)?;
        let flags = StructuralFlags::of(joint);
        let (name, e) = if let Some(g) = a.as_constant() {
            // A = −γ: φ(−rγ) < ∞ and φ(rγ²) < ∞
            ("two_step_mgf_finite", mgf_sym(b, r * g).mul(mgf_sym(b, r * g * g)))
        } else if a.atom_mass() >= 1.0 - 1e-12 {
            ("two_step_mgf_finite", two_step_mgf(b, &a, r))
        } else if flags.b_nonneg.is_true() {
            ("mgf_b_at_product_finite", mgf_at_product_bound(b, &a, r))
        } else if flags.b_nonpos.is_true() {
            ("mgf_b_at_scaled_a_finite", mgf_at_scaled(b, &a, r))
        } else {
            ("two_step_mgf_finite", Sym::Unknown)
        };
        let t = v.push(name, e.is_finite(), format!("value = {}", fmt_sym(e)));
        return Ok(match t {
            Tri::True => v.with(Verdict::Finite),
            Tri::False => v.with(Verdict::Infinite),
            Tri::Unknown => v,
        });
    }
    if unit_neg {
        let mut v = MomentVerdict::new(Criterion::ScaledWithNegativeUnitAtom, MGF_SCALED, r);
        common_hypotheses(joint, &mut v)?;
        let (pp, pm) = (mgf_sym(b, r), mgf_sym(b, -r));
        let t = match (pp.value(), pm.value()) {
            (Some(fp), Some(fm)) => {
                let lhs = if fp.is_infinite() || fm.is_infinite() { f64::INFINITY } else { fm * fp * pm1 * pm1 };
                let (u, w) = (fm * p1, fp * p1);
                let u = if p1 == 0.0 { 0.0 } else { u };
                let w = if p1 == 0.0 { 0.0 } else { w };
                Tri::from_bool(u < 1.0 && w < 1.0 && lhs < (1.0 - u) * (1.0 - w))
            }
            _ => Tri::Unknown,
        };
        let t = v.push(
            "unit_atom_balance",
            t,
            format!("phi(r) = {}, phi(-r) = {}, P{{A=1}} = {p1}, P{{A=-1}} = {pm1}", fmt_sym(pp), fmt_sym(pm)),
        );
        return Ok(match t {
            Tri::True => v.with(Verdict::Finite),
            Tri::False => v.with(Verdict::Infinite),
            Tri::Unknown => v,
        });
    }
    let mut v = MomentVerdict::new(Criterion::None, MGF_SCALED, r);
    v.push("a_in_covered_range", Tri::False, format!("supp A = [{}, {}]", sa.lo, sa.hi));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScalarDistribution as D;

    fn ind(a: D, b: D) -> JointInput {
        JointInput::independent(a, b)
    }

    #[test]
    fn positive_a_table() {
        let j = ind(D::beta(2.0, 1.0), D::exponential(1.0));
        assert_eq!(moment_verdict(&j, 0.5, None).unwrap().verdict, Verdict::Finite);
        let v = moment_verdict(&j, 1.5, None).unwrap();
        assert_eq!((v.verdict, v.theorem_used), (Verdict::Infinite, Criterion::PositiveA));
        // boundary of the MGF domain
        assert_eq!(moment_verdict(&j, 1.0, None).unwrap().verdict, Verdict::Infinite);
        let a = D::mixture(vec![(0.5, D::point_mass(1.0)), (0.5, D::uniform(0.0, 1.0))]);
        let v = moment_verdict(&ind(a, D::exponential(2.0)), 1.0, None).unwrap();
        assert_eq!(v.verdict, Verdict::Infinite);
    }

    #[test]
    fn bounded_support_stays_inconclusive() {
        let a = D::uniform(0.5, 1.5);
        let j = ind(a, D::exponential(1.0));
        let v = exp_moment_positive_a(&j, 0.5, Tri::False).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert!(v.condition_trace.iter().any(|c| c.name == "bounded_support_needs_all_b_mgfs"));
    }

    #[test]
    fn mixed_and_negative_a() {
        let a = D::mixture(vec![(0.5, D::point_mass(0.5)), (0.5, D::point_mass(-0.5))]);
        let v = moment_verdict(&ind(a, D::exponential(2.0)), 1.0, None).unwrap();
        assert_eq!((v.verdict, v.theorem_used), (Verdict::Finite, Criterion::MixedSignA));
        let j = ind(D::point_mass(-0.5), D::exponential(1.0));
        let v = moment_verdict(&j, 0.5, None).unwrap();
        assert_eq!((v.verdict, v.theorem_used), (Verdict::Finite, Criterion::NegativeA));
        assert_eq!(moment_verdict(&j, 1.2, None).unwrap().verdict, Verdict::Infinite);
    }

    #[test]
    fn open_case_is_inconclusive() {
        let a = D::mixture(vec![(0.5, D::point_mass(0.5)), (0.5, D::point_mass(-0.5))]);
        let b = D::difference(D::exponential(1.0), D::exponential(1.0));
        let v = moment_verdict(&ind(a, b), 0.5, None).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        assert!(v.condition_trace.iter().any(|c| c.name == "open_case_two_sided_b"));
    }

    #[test]
    fn absolute_moment_table() {
        let v = abs_moment_criterion(&ind(D::point_mass(0.5), D::exponential(2.0)), 1.0).unwrap();
        assert_eq!((v.verdict, v.theorem_used), (Verdict::Finite, Criterion::AbsoluteNoUnitAtoms));
        let a = D::mixture(vec![(0.3, D::point_mass(-1.0)), (0.7, D::point_mass(0.5))]);
        let v = moment_verdict(&ind(a, D::point_mass(0.1)), 1.0, None).unwrap();
        assert_eq!((v.verdict, v.theorem_used), (Verdict::Finite, Criterion::AbsoluteWithUnitAtoms));
        let a = D::mixture(vec![(0.999, D::point_mass(-1.0)), (0.001, D::point_mass(0.5))]);
        let v = moment_verdict(&ind(a, D::exponential(1.0)), 0.9, None).unwrap();
        assert_eq!(v.verdict, Verdict::Infinite);
    }

    #[test]
    fn scaled_mgf_cases() {
        let v = scaled_mgf_criterion(&ind(D::beta(2.0, 1.0), D::exponential(1.0)), 1.0).unwrap();
        assert_eq!(v.verdict, Verdict::Infinite);
        let v = scaled_mgf_criterion(&ind(D::point_mass(0.5), D::exponential(1.0)), 1.0).unwrap();
        assert_eq!(v.verdict, Verdict::Finite);
        let v = scaled_mgf_criterion(&ind(D::point_mass(-0.5), D::exponential(1.0)), 1.0).unwrap();
        assert_eq!((v.verdict, v.theorem_used), (Verdict::Finite, Criterion::ScaledNegativeA));
        let dep = JointInput::threshold(D::exponential(1.0), 0.3, 0.7, 1.0);
        assert!(scaled_mgf_criterion(&dep, 1.0).is_err());
    }

    #[test]
    fn divergent_series_is_an_error() {
        let j = ind(D::point_mass(1.5), D::exponential(1.0));
        assert!(matches!(moment_verdict(&j, 0.5, None), Err(CriteriaError::Divergent(_))));
        assert!(matches!(moment_verdict(&j, -1.0, None), Err(CriteriaError::BadR(_))));
    }

    #[test]
    fn verdict_json_shape() {
        let v = moment_verdict(&ind(D::beta(2.0, 1.0), D::exponential(1.0)), 0.5, None).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.starts_with(r#"{"verdict":"Finite","theorem_used":"positive_a""#), "{s}");
    }
}
