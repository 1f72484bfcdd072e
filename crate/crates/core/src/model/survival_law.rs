//! Laws given directly by their survival function, sampled by numeric
//! inversion against a cached monotone grid.

use std::fmt;
use std::sync::{Arc, OnceLock};

use super::ModelError;

/// Named survival families plus an escape hatch for user-supplied functions.
#[derive(Clone)]
pub enum SurvivalKind {
    /// S(x) = (1+x)^c · e^{−bx} on x ≥ 0. Gamma-like with a = 1.
    PowerExp { c: f64, b: f64 },
    /// S(x) = (1/λ) · e^{−bx} (1 − e^{−λx}) / (1 − e^{−x}) on x > 0.
    NegLogRatio { b: f64, lambda: f64 },
    /// Arbitrary nonincreasing S with S(support_lo) = 1.
    Custom {
        name: String,
        survival: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        /// Largest s known to keep E e^{sD} finite, if any.
        mgf_hi: Option<f64>,
    },
}

impl fmt::Debug for SurvivalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurvivalKind::PowerExp { c, b } => write!(f, "PowerExp {{ c: {c}, b: {b} }}"),
            SurvivalKind::NegLogRatio { b, lambda } => write!(f, "NegLogRatio {{ b: {b}, lambda: {lambda} }}"),
            SurvivalKind::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl PartialEq for SurvivalKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SurvivalKind::PowerExp { c: c1, b: b1 }, SurvivalKind::PowerExp { c: c2, b: b2 }) => c1 == c2 && b1 == b2,
            (SurvivalKind::NegLogRatio { b: b1, lambda: l1 }, SurvivalKind::NegLogRatio { b: b2, lambda: l2 }) => {
                b1 == b2 && l1 == l2
            }
            (SurvivalKind::Custom { survival: s1, .. }, SurvivalKind::Custom { survival: s2, .. }) => Arc::ptr_eq(s1, s2),
            _ => false,
        }
    }
}

#[derive(Clone)]
pub struct SurvivalLaw {
    kind: SurvivalKind,
    support_lo: f64,
    grid: Arc<OnceLock<InverseGrid>>,
}

impl fmt::Debug for SurvivalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurvivalLaw").field("kind", &self.kind).field("support_lo", &self.support_lo).finish()
    }
}

impl PartialEq for SurvivalLaw {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.support_lo == other.support_lo
    }
}

impl SurvivalLaw {
    pub fn power_exp(c: f64, b: f64) -> Self {
        Self::from_kind(SurvivalKind::PowerExp { c, b }, 0.0)
    }

    pub fn neg_log_ratio(b: f64, lambda: f64) -> Self {
        Self::from_kind(SurvivalKind::NegLogRatio { b, lambda }, 0.0)
    }

    pub fn custom<F>(name: impl Into<String>, support_lo: f64, mgf_hi: Option<f64>, survival: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_kind(SurvivalKind::Custom { name: name.into(), survival: Arc::new(survival), mgf_hi }, support_lo)
    }

    fn from_kind(kind: SurvivalKind, support_lo: f64) -> Self {
        SurvivalLaw { kind, support_lo, grid: Arc::new(OnceLock::new()) }
    }

    pub fn kind(&self) -> &SurvivalKind {
        &self.kind
    }

    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, SurvivalKind::Custom { .. })
    }

    /// P{D > x}.
    pub fn survival(&self, x: f64) -> f64 {
        if x < self.support_lo {
            return 1.0;
        }
        match &self.kind {
            SurvivalKind::PowerExp { c, b } => (1.0 + x).powf(*c) * (-b * x).exp(),
            SurvivalKind::NegLogRatio { b, lambda } => {
                if x <= 0.0 {
                    return 1.0;
                }
                // (1 − e^{−λx})/(1 − e^{−x}) via expm1 to keep precision near 0
                let ratio = (-lambda * x).exp_m1() / (-x).exp_m1();
                (-b * x).exp() * ratio / lambda
            }
            SurvivalKind::Custom { survival, .. } => survival(x).clamp(0.0, 1.0),
        }
    }

    /// Right end of the MGF domain and whether it is included.
    pub fn mgf_right_end(&self) -> (f64, bool) {
        match &self.kind {
            // E e^{bD} = 1 + b ∫ (1+x)^c dx, finite iff c < −1
            SurvivalKind::PowerExp { c, b } => (*b, *c < -1.0),
            SurvivalKind::NegLogRatio { b, .. } => (*b, false),
            SurvivalKind::Custom { mgf_hi, .. } => match mgf_hi {
                Some(h) => (*h, true),
                None => (0.0, true),
            },
        }
    }

    /// Rate for envelope hints when integrating against S.
    pub(crate) fn decay_hint(&self) -> f64 {
        match &self.kind {
            SurvivalKind::PowerExp { b, .. } | SurvivalKind::NegLogRatio { b, .. } => *b,
            SurvivalKind::Custom { mgf_hi, .. } => mgf_hi.filter(|h| *h > 0.0).unwrap_or(1.0),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match &self.kind {
            SurvivalKind::PowerExp { c, b } => {
                if !(*b > 0.0) || !c.is_finite() {
                    return Err(ModelError::InvalidParameter(format!("power_exp needs b > 0 and finite c (b={b}, c={c})")));
                }
                if *c > *b {
                    return Err(ModelError::InvalidParameter(format!(
                        "power_exp survival is not monotone for c > b (c={c}, b={b})"
                    )));
                }
                Ok(())
            }
            SurvivalKind::NegLogRatio { b, lambda } => {
                if !(*b > 0.0 && *lambda > 0.0) {
                    return Err(ModelError::InvalidParameter(format!("neg_log_ratio needs b, lambda > 0 (b={b}, lambda={lambda})")));
                }
                if 2.0 * b + lambda <= 1.0 {
                    return Err(ModelError::InvalidParameter(format!(
                        "neg_log_ratio survival is not decreasing unless 2b + lambda > 1 (b={b}, lambda={lambda})"
                    )));
                }
                Ok(())
            }
            SurvivalKind::Custom { name, .. } => {
                let lo = self.support_lo;
                if !lo.is_finite() {
                    return Err(ModelError::InvalidParameter(format!("survival '{name}' needs a finite support_lo")));
                }
                let s0 = self.survival(lo);
                if (s0 - 1.0).abs() > 1e-12 {
                    return Err(ModelError::InvalidSurvival(format!("S(support_lo) = {s0}, expected 1")));
                }
                let mut prev = s0;
                for k in 1..=2000 {
                    let x = lo + 0.05 * k as f64;
                    let s = self.survival(x);
                    if s > prev + 1e-14 {
                        return Err(ModelError::InvalidSurvival(format!("S increases at x = {x}")));
                    }
                    prev = s;
                }
                let far = self.survival(lo + 1e4);
                if far > 1e-6 {
                    return Err(ModelError::InvalidSurvival(format!("S(support_lo + 1e4) = {far} does not vanish")));
                }
                Ok(())
            }
        }
    }

    pub(crate) fn grid(&self) -> &InverseGrid {
        self.grid.get_or_init(|| InverseGrid::build(self))
    }

    /// Solves S(x) = u for u ∈ (0, 1].
    pub fn inverse(&self, u: f64) -> f64 {
        self.grid().invert(self, u)
    }
}

/// Cached (x, S(x)) table bracketing every quantile the sampler can ask for.
pub(crate) struct InverseGrid {
    xs: Vec<f64>,
    ss: Vec<f64>,
}

const X_TOL: f64 = 1e-12;

impl InverseGrid {
    fn build(law: &SurvivalLaw) -> Self {
        let lo = law.support_lo;
        let mut xs = vec![lo];
        let mut ss = vec![1.0];
        let mut x = lo;
        while x - lo < 1e4 {
            let h = if x - lo < 50.0 { 0.01 } else { 0.5 };
            x += h;
            let s = law.survival(x);
            xs.push(x);
            ss.push(s);
            if s < 1e-300 {
                break;
            }
        }
        InverseGrid { xs, ss }
    }

    fn invert(&self, law: &SurvivalLaw, u: f64) -> f64 {
        let n = self.ss.len();
        // first index with S ≤ u
        let k = self.ss.partition_point(|&s| s > u);
        if k == 0 {
            return self.xs[0];
        }
        if k >= n {
            return extend_beyond(law, *self.xs.last().unwrap(), u);
        }
        let (mut a, mut b) = (self.xs[k - 1], self.xs[k]);
        let (mut ga, mut gb) = (self.ss[k - 1] - u, self.ss[k] - u);
        if gb == 0.0 {
            return b;
        }
        // ln S is close to linear inside a cell; start from that chord, then
        // run Illinois false position until the bracket is below X_TOL.
        let la = self.ss[k - 1].ln();
        let lb = self.ss[k].ln();
        let lu = u.ln();
        let mut x = if lb.is_finite() && la > lb { a + (b - a) * (la - lu) / (la - lb) } else { 0.5 * (a + b) };
        x = x.clamp(a, b);
        let mut side = 0i8;
        let w = 0.5 * X_TOL;
        for _ in 0..200 {
            if b - a <= X_TOL {
                break;
            }
            // stay at least X_TOL/2 inside the bracket so it always shrinks
            x = x.clamp(a + w, b - w);
            let gx = law.survival(x) - u;
            if gx > 0.0 {
                a = x;
                ga = gx;
                if side == 1 {
                    gb *= 0.5;
                }
                side = 1;
            } else {
                b = x;
                gb = gx;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            }
            x = (a * gb - b * ga) / (gb - ga);
            if !x.is_finite() {
                x = 0.5 * (a + b);
            }
        }
        0.5 * (a + b)
    }
}

fn extend_beyond(law: &SurvivalLaw, start: f64, u: f64) -> f64 {
    let mut a = start;
    let mut step = 1.0;
    let mut b = a + step;
    while law.survival(b) > u {
        a = b;
        step *= 2.0;
        b = a + step;
        if !b.is_finite() {
            return f64::INFINITY;
        }
    }
    while b - a > X_TOL * b.abs().max(1.0) {
        let m = 0.5 * (a + b);
        if law.survival(m) > u {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
