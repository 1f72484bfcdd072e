//! Samplers compiled once from a distribution tree so that the hot loop only
//! dispatches on a flat enum.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::scalar::ScalarDistribution;
use super::survival_law::{SurvivalKind, SurvivalLaw};
use super::ModelError;

#[derive(Clone, Debug)]
pub enum Sampler {
    Const(f64),
    Exp { inv_rate: f64 },
    Gamma(rand_distr::Gamma<f64>),
    /// Beta(p, 1) as U^{1/p}.
    BetaP1 { inv_p: f64 },
    /// Beta(1, q) as 1 − U^{1/q}.
    Beta1Q { inv_q: f64 },
    Beta(rand_distr::Beta<f64>),
    Uniform { lo: f64, width: f64 },
    Affine { inner: Box<Sampler>, scale: f64, shift: f64 },
    Mixture { cumulative: Vec<f64>, parts: Vec<Sampler> },
    Difference(Box<Sampler>, Box<Sampler>),
    /// min(Exp(b), U^{1/c} − 1), whose survival is (1+x)^c e^{−bx}.
    PowerExp { inv_rate: f64, inv_c: f64 },
    Inverse(SurvivalLaw),
}

/// Uniform on (0, 1].
#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

impl Sampler {
    pub fn new(d: &ScalarDistribution) -> Result<Self, ModelError> {
        use ScalarDistribution as D;
        d.validate()?;
        Ok(match d {
            D::PointMass(v) => Sampler::Const(*v),
            D::Exponential { rate } => Sampler::Exp { inv_rate: 1.0 / rate },
            D::Gamma { shape, rate } => {
                if *shape == 1.0 {
                    Sampler::Exp { inv_rate: 1.0 / rate }
                } else {
                    Sampler::Gamma(
                        rand_distr::Gamma::new(*shape, 1.0 / rate).map_err(|e| ModelError::InvalidParameter(e.to_string()))?,
                    )
                }
            }
            D::Beta { p, q } => {
                if *q == 1.0 {
                    Sampler::BetaP1 { inv_p: 1.0 / p }
                } else if *p == 1.0 {
                    Sampler::Beta1Q { inv_q: 1.0 / q }
                } else {
                    Sampler::Beta(rand_distr::Beta::new(*p, *q).map_err(|e| ModelError::InvalidParameter(e.to_string()))?)
                }
            }
            D::Uniform { lo, hi } => Sampler::Uniform { lo: *lo, width: hi - lo },
            D::Negated(inner) => Self::affine(Sampler::new(inner)?, -1.0, 0.0),
            D::Shifted { inner, offset } => Self::affine(Sampler::new(inner)?, 1.0, *offset),
            D::Scaled { inner, factor } => Self::affine(Sampler::new(inner)?, *factor, 0.0),
            D::Mixture(parts) => {
                let mut acc = 0.0;
                let mut cumulative = Vec::with_capacity(parts.len());
                let mut samplers = Vec::with_capacity(parts.len());
                for (w, p) in parts {
                    acc += w;
                    cumulative.push(acc);
                    samplers.push(Sampler::new(p)?);
                }
                // guard against the last cumulative weight rounding below 1
                if let Some(last) = cumulative.last_mut() {
                    *last = f64::INFINITY;
                }
                Sampler::Mixture { cumulative, parts: samplers }
            }
            D::Difference { left, right } => Sampler::Difference(Box::new(Sampler::new(left)?), Box::new(Sampler::new(right)?)),
            D::SurvivalDefined(law) => Self::for_law(law),
        })
    }

    fn affine(inner: Sampler, scale: f64, shift: f64) -> Sampler {
        match inner {
            Sampler::Const(v) => Sampler::Const(v * scale + shift),
            Sampler::Affine { inner, scale: s0, shift: t0 } => Sampler::Affine { inner, scale: s0 * scale, shift: t0 * scale + shift },
            other => Sampler::Affine { inner: Box::new(other), scale, shift },
        }
    }

    fn for_law(law: &SurvivalLaw) -> Sampler {
        match law.kind() {
            SurvivalKind::PowerExp { c, b } if *c == 0.0 => Sampler::Exp { inv_rate: 1.0 / b },
            SurvivalKind::PowerExp { c, b } if *c < 0.0 => Sampler::PowerExp { inv_rate: 1.0 / b, inv_c: 1.0 / c },
            SurvivalKind::NegLogRatio { b, lambda } if lambda.fract() == 0.0 && *lambda <= 64.0 => {
                // integer λ = n: S(x) = (1/n) Σ_{k<n} e^{−(b+k)x}
                let n = *lambda as usize;
                let w = 1.0 / n as f64;
                let cumulative = (1..=n).map(|k| if k == n { f64::INFINITY } else { k as f64 * w }).collect();
                let parts = (0..n).map(|k| Sampler::Exp { inv_rate: 1.0 / (b + k as f64) }).collect();
                Sampler::Mixture { cumulative, parts }
            }
            _ => {
                let _ = law.inverse(0.5); // build the grid before workers share it
                Sampler::Inverse(law.clone())
            }
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Const(v) => *v,
            Sampler::Exp { inv_rate } => {
                let e: f64 = Exp1.sample(rng);
                e * inv_rate
            }
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::BetaP1 { inv_p } => open_unit(rng).powf(*inv_p),
            Sampler::Beta1Q { inv_q } => 1.0 - open_unit(rng).powf(*inv_q),
            Sampler::Beta(b) => b.sample(rng),
            Sampler::Uniform { lo, width } => lo + width * rng.random::<f64>(),
            Sampler::Affine { inner, scale, shift } => inner.sample(rng) * scale + shift,
            Sampler::Mixture { cumulative, parts } => {
                let u: f64 = rng.random();
                let k = cumulative.partition_point(|&c| c <= u);
                parts[k].sample(rng)
            }
            Sampler::Difference(l, r) => l.sample(rng) - r.sample(rng),
            Sampler::PowerExp { inv_rate, inv_c } => {
                let e: f64 = Exp1.sample(rng);
                let w = open_unit(rng).powf(*inv_c) - 1.0;
                (e * inv_rate).min(w)
            }
            Sampler::Inverse(law) => law.inverse(open_unit(rng)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use ScalarDistribution as D;

    fn check_survival(d: &D, xs: &[f64], n: usize, seed: u64) {
        let s = Sampler::new(d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        for &x in xs {
            let p = d.survival(x).unwrap();
            let emp = draws.iter().filter(|&&v| v > x).count() as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
            assert!((emp - p).abs() <= 4.0 * sigma, "{d:?} x={x}: empirical {emp} vs {p}");
        }
    }

    #[test]
    fn sampled_survival_matches_closed_forms() {
        let n = 200_000;
        check_survival(&D::exponential(2.0), &[0.1, 0.5, 1.0, 2.0], n, 1);
        check_survival(&D::gamma(2.5, 1.0), &[0.5, 1.0, 2.5, 5.0], n, 2);
        check_survival(&D::beta(2.0, 1.0), &[0.2, 0.5, 0.9], n, 3);
        check_survival(&D::beta(1.0, 3.0), &[0.05, 0.3, 0.6], n, 4);
        check_survival(&D::beta(2.0, 3.0), &[0.2, 0.4, 0.7], n, 5);
        check_survival(&D::difference(D::exponential(1.0), D::exponential(2.0)), &[-1.0, 0.0, 1.0, 3.0], n, 6);
        let pe = D::survival_defined(SurvivalLaw::power_exp(-2.0, 1.0));
        check_survival(&pe, &[0.1, 0.5, 1.0, 3.0, 6.0], n, 7);
        let pos = D::survival_defined(SurvivalLaw::power_exp(0.5, 1.0));
        check_survival(&pos, &[0.1, 1.0, 3.0], n, 8);
        let nl = D::survival_defined(SurvivalLaw::neg_log_ratio(1.0, 2.0));
        check_survival(&nl, &[0.2, 1.0, 3.0], n, 9);
        let nl_frac = D::survival_defined(SurvivalLaw::neg_log_ratio(1.0, 0.5));
        check_survival(&nl_frac, &[0.2, 1.0, 3.0], n, 10);
        check_survival(&D::scaled(D::uniform(0.0, 1.0), -3.0), &[-2.5, -1.0, -0.1], n, 11);
    }

    #[test]
    fn mixture_atoms_are_exact() {
        let d = D::mixture(vec![(0.25, D::point_mass(0.0)), (0.75, D::exponential(1.0))]);
        let s = Sampler::new(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 400_000;
        let zeros = (0..n).filter(|_| s.sample(&mut rng) == 0.0).count() as f64 / n as f64;
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((zeros - 0.25).abs() < 3.0 * sigma + 1e-12);
    }

    #[test]
    fn point_mass_and_affine_collapse() {
        let d = D::shifted(D::scaled(D::point_mass(2.0), -0.5), 3.0);
        let s = Sampler::new(&d).unwrap();
        assert!(matches!(s, Sampler::Const(v) if v == 2.0));
    }
}
