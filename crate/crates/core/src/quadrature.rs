//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.
//!
//! A 15-point Kronrod rule with the embedded 7-point Gauss rule gives both
//! the panel value and its error estimate. Panels are bisected in order of
//! decreasing error until the accumulated estimate meets the requested
//! tolerance or the panel cap is reached. Complex integrands share one panel
//! subdivision for their real and imaginary parts.

use num_complex::Complex64;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

/// Default cap on the number of panels.
pub const DEFAULT_MAX_PANELS: usize = 10_000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Values a quadrature rule can accumulate: reals and complex numbers.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    /// Component-wise absolute values, summed. Used for error bookkeeping.
    fn l1(self) -> f64;
    fn components(self) -> [f64; 2];
}

impl QuadValue for f64 {
    fn l1(self) -> f64 {
        self.abs()
    }
    fn components(self) -> [f64; 2] {
        [self, 0.0]
    }
}

impl QuadValue for Complex64 {
    fn l1(self) -> f64 {
        self.re.abs() + self.im.abs()
    }
    fn components(self) -> [f64; 2] {
        [self.re, self.im]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, rel_tol: 0.0, max_panels: DEFAULT_MAX_PANELS }
    }

    fn target<T: QuadValue>(&self, value: T) -> f64 {
        self.abs_tol.max(self.rel_tol * value.l1())
    }
}

struct Panel<T> {
    lo: f64,
    hi: f64,
    value: T,
    error: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// One 15-point Kronrod panel. Returns (value, error estimate).
fn gk15<T, F>(f: &F, lo: f64, hi: f64) -> (T, f64)
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv1 = [T::default(); 7];
    let mut fv2 = [T::default(); 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kron = kron + (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + (f1 + f2) * WG[j / 2];
        }
    }
    // per-component error, then summed
    let mut err = 0.0;
    let kc = kron.components();
    let gc = gauss.components();
    let fcc = fc.components();
    for c in 0..2 {
        let mean = 0.5 * kc[c];
        let mut res_abs = WGK[7] * fcc[c].abs();
        let mut res_asc = WGK[7] * (fcc[c] - mean).abs();
        for j in 0..7 {
            let a = fv1[j].components()[c];
            let b = fv2[j].components()[c];
            res_abs += WGK[j] * (a.abs() + b.abs());
            res_asc += WGK[j] * ((a - mean).abs() + (b - mean).abs());
        }
        let e = (kc[c] - gc[c]) * half;
        err += rescale_error(e, res_abs * half.abs(), res_asc * half.abs());
    }
    (kron * half, err)
}

/// Adaptive integration over the union of the given consecutive breakpoints.
fn adaptive<T, F>(f: &F, breaks: &[f64], opts: QuadOptions) -> QuadResult<T>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let mut heap = BinaryHeap::new();
    let mut total = T::default();
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        total = total + v;
        total_err += e;
        heap.push(Panel { lo: w[0], hi: w[1], value: v, error: e });
    }
    while total_err > opts.target(total) && heap.len() < opts.max_panels {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi || (worst.hi - worst.lo) < 4.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs()) {
            // cannot refine further; put it back and stop
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(f, worst.lo, mid);
        let (v2, e2) = gk15(f, mid, worst.hi);
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Panel { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }
    // recompute sums from scratch to shed accumulated cancellation
    let mut value = T::default();
    let mut err = 0.0;
    for p in heap.iter() {
        value = value + p.value;
        err += p.error;
    }
    QuadResult { value, abs_error_estimate: err, subdivisions: heap.len(), converged: err <= opts.target(value) }
}

/// ∫_lo^hi f with an absolute tolerance.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> QuadResult<f64> {
    integrate_finite_with(f, lo, hi, QuadOptions::absolute(tol))
}

pub fn integrate_finite_with<T: QuadValue, F: Fn(f64) -> T>(f: F, lo: f64, hi: f64, opts: QuadOptions) -> QuadResult<T> {
    if lo == hi {
        return QuadResult { value: T::default(), abs_error_estimate: 0.0, subdivisions: 0, converged: true };
    }
    adaptive(&f, &[lo, hi], opts)
}

/// Complex-valued integrand over a finite range.
pub fn integrate_finite_complex<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, tol: f64) -> QuadResult<Complex64> {
    integrate_finite_with(f, lo, hi, QuadOptions::absolute(tol))
}

/// ∫_lo^∞ f for integrands decaying at least like e^{−decay_hint·y}.
///
/// The range is probed at steps of `1/decay_hint`; the truncation point is
/// the first of three consecutive probes where |f| < tol·1e-3. The decay
/// envelope bounds the discarded remainder, which is added to the error.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, lo: f64, tol: f64, decay_hint: f64) -> QuadResult<f64> {
    semi_infinite_with(f, lo, QuadOptions::absolute(tol), decay_hint)
}

pub fn integrate_semi_infinite_complex<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    tol: f64,
    decay_hint: f64,
) -> QuadResult<Complex64> {
    semi_infinite_with(f, lo, QuadOptions::absolute(tol), decay_hint)
}

pub fn semi_infinite_with<T: QuadValue, F: Fn(f64) -> T>(f: F, lo: f64, opts: QuadOptions, decay_hint: f64) -> QuadResult<T> {
    assert!(decay_hint > 0.0, "decay_hint must be positive");
    let step = 1.0 / decay_hint;
    let threshold = opts.abs_tol.max(f64::MIN_POSITIVE) * 1e-3;
    let cap = lo + 1e4 / decay_hint;
    let mut breaks = vec![lo];
    let mut quiet = 0usize;
    let mut envelope = 0.0f64;
    let mut y = lo;
    let mut found = false;
    // probe with a finer step near the origin, where most integrands here
    // carry their mass
    let mut k = 0usize;
    while y < cap {
        let h = if k < 8 { step / 8.0 } else { step };
        y += h;
        k += 1;
        let m = f(y).l1();
        breaks.push(y);
        if m < threshold {
            quiet += 1;
            envelope = envelope.max(m);
            if quiet == 3 {
                found = true;
                break;
            }
        } else {
            quiet = 0;
            envelope = 0.0;
        }
    }
    // half the budget for the panels, leaving room for the tail bound
    let inner = QuadOptions { abs_tol: 0.5 * opts.abs_tol, rel_tol: 0.5 * opts.rel_tol, ..opts };
    let mut res = adaptive(&f, &breaks, inner);
    if !found {
        res.converged = false;
        return res;
    }
    let tail = envelope / decay_hint;
    res.abs_error_estimate += tail;
    res.converged = res.abs_error_estimate <= opts.target(res.value) && res.converged;
    res
}

/// ∫_0^∞ (e^{−ay} − e^{−(a+b)y})/y dy = ln((a+b)/a).
pub fn frullani(a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b >= 0.0, "frullani needs a > 0, b >= 0");
    (b / a).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polynomial_on_unit_interval() {
        let r = integrate_finite(|x| x * x, 0.0, 1.0, 1e-10);
        assert!(r.converged);
        assert!((r.value - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn exp_ratio_integral_matches_series_oracle() {
        // Σ 1/(n·n!) summed independently
        let mut oracle = 0.0;
        let mut fact = 1.0;
        for n in 1..30 {
            fact *= n as f64;
            oracle += 1.0 / (n as f64 * fact);
        }
        assert!((oracle - 1.317_902_151_454_403_8).abs() < 1e-15);
        let r = integrate_finite(|y| crate::special::exp_ratio(1.0, y), 0.0, 1.0, 1e-10);
        assert!(r.converged);
        assert!((r.value - oracle).abs() < 1e-10);
    }

    #[test]
    fn complex_integrand_matches_antiderivative() {
        // (Φ(u) − 1)/u with Φ(u) = 1/(1 − iu) equals i/(1 − iu);
        // antiderivative −ln(1 − iu)
        let i = Complex64::new(0.0, 1.0);
        let r = integrate_finite_complex(|u| (1.0 / (1.0 - i * u) - 1.0) / u, 0.0, 1.0, 1e-12);
        let exact = -(Complex64::new(1.0, -1.0)).ln();
        assert!(r.converged);
        assert!((r.value - exact).norm() < 1e-11, "{:?} vs {exact}", r.value);
    }

    #[test]
    fn semi_infinite_exponential_and_frullani() {
        let r = integrate_semi_infinite(|y| (-y).exp(), 0.0, 1e-10, 1.0);
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10);

        let r = integrate_semi_infinite(|y| ((-y).exp() - (-2.0 * y).exp()) / y, 0.0, 1e-12, 1.0);
        assert!((r.value - std::f64::consts::LN_2).abs() < 1e-11);

        // (e^{by} − 1)/y · C e^{−(b+ε)y} with b = ε = C = 1 reduces to the
        // same Frullani integral
        let r = integrate_semi_infinite(|y| crate::special::exp_ratio(1.0, y) * (-2.0 * y).exp(), 0.0, 1e-12, 1.0);
        assert!((r.value - std::f64::consts::LN_2).abs() < 1e-11);
    }

    #[test]
    fn frullani_closed_form() {
        assert!((frullani(1.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-16);
        assert_eq!(frullani(2.0, 0.0), 0.0);
        assert!((frullani(1.0, 3.0) - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 0.0, max_panels: 20 };
        let r = integrate_finite_with(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, opts);
        assert!(!r.converged);
        assert!(r.value.is_finite());
        // no observed decay before the cap
        let r = integrate_semi_infinite(|_| 1.0, 0.0, 1e-8, 1.0);
        assert!(!r.converged);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn semi_infinite_reproduces_frullani(a in 0.1f64..10.0, b in 0.1f64..10.0) {
            let r = integrate_semi_infinite(
                |y| crate::special::exp_ratio(-a, y) - crate::special::exp_ratio(-(a + b), y),
                0.0, 1e-13, a);
            let exact = frullani(a, b);
            prop_assert!(((r.value - exact) / exact).abs() < 1e-8, "a={a} b={b}: {} vs {exact}", r.value);
        }

        #[test]
        fn linearity(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, rate in 0.3f64..4.0, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let f = move |y: f64| (c0 + c1 * y) * (-rate * y).exp();
            let g = move |y: f64| (c1 - c0 * y * y) * (-(rate + 0.5) * y).exp();
            let rf = integrate_semi_infinite(f, 0.0, 1e-11, rate);
            let rg = integrate_semi_infinite(g, 0.0, 1e-11, rate);
            let rh = integrate_semi_infinite(move |y| alpha * f(y) + beta * g(y), 0.0, 1e-11, rate);
            let bound = alpha.abs() * rf.abs_error_estimate + beta.abs() * rg.abs_error_estimate + rh.abs_error_estimate + 1e-12;
            prop_assert!((rh.value - alpha * rf.value - beta * rg.value).abs() <= bound);
        }
    }
}
