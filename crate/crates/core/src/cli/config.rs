//! Experiment files: one `dotted.path = value` assignment per line, `#`
//! comments, blank lines ignored.
//!
//! ```text
//! joint.dependence.variant = independent
//! joint.A.variant = beta
//! joint.A.p = 2
//! joint.A.q = 1
//! joint.B.variant = exponential
//! joint.B.rate = 1
//! sim.n_samples = 100000
//! moments.r = 0.5
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Dependence, JointInput, ScalarDistribution, SurvivalKind, SurvivalLaw};
use crate::simulate::{Mode, SimConfig};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key `{key}` assigned twice")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    BadValue { key: String, value: String, expected: &'static str },
    #[error("key `{key}`: unknown variant `{value}`")]
    UnknownVariant { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub joint: Option<JointInput>,
    pub sim: SimConfig,
    pub r: Option<f64>,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub cf_tol: f64,
    pub case: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            joint: None,
            sim: SimConfig::default(),
            r: None,
            x_grid: Vec::new(),
            t_grid: Vec::new(),
            cf_tol: 1e-10,
            case: None,
            out_dir: None,
        }
    }
}

/// Key/value pairs with consumption tracking, so leftovers can be reported.
struct Entries {
    map: BTreeMap<String, String>,
    used: BTreeSet<String>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<&str> {
        let v = self.map.get(key)?;
        self.used.insert(key.to_string());
        Some(v.as_str())
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        let dotted = format!("{prefix}.");
        self.map.keys().any(|k| k.starts_with(&dotted))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => parse_f64(key, v).map(Some),
        }
    }

    fn req_f64(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?.ok_or_else(|| ConfigError::Missing(key.into()))
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::BadValue { key: key.into(), value: v.into(), expected: "an unsigned integer" }),
        }
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some(v) => {
                let v = v.to_string();
                v.split(',').map(|s| parse_f64(key, s.trim())).collect()
            }
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::BadValue { key: key.into(), value: v.into(), expected: "a finite number" }),
    }
}

fn parse_seed(key: &str, v: &str) -> Result<u64, ConfigError> {
    let bad = || ConfigError::BadValue { key: key.into(), value: v.into(), expected: "a u64 seed" };
    match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).map_err(|_| bad()),
        None => v.parse().map_err(|_| bad()),
    }
}

fn lines(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.into() })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() || k.contains(char::is_whitespace) {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.into() });
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::Duplicate { line: i + 1, key: k.into() });
        }
    }
    Ok(map)
}

pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut e = Entries { map: lines(text)?, used: BTreeSet::new() };
    let mut cfg = ExperimentConfig::default();
    // report misspelt top-level sections before anything else
    for k in e.map.keys() {
        let top = k.split('.').next().unwrap_or("");
        if !["joint", "sim", "moments", "tail", "charfn", "validate", "output"].contains(&top) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
    }
    if e.has_prefix("joint") {
        cfg.joint = Some(parse_joint(&mut e)?);
    }
    let sim = &mut cfg.sim;
    if let Some(n) = e.usize("sim.n_samples")? {
        sim.n_samples = n;
    }
    if let Some(v) = e.take("sim.seed") {
        let v = v.to_string();
        sim.master_seed = parse_seed("sim.seed", &v)?;
    }
    if let Some(x) = e.f64("sim.truncation_eps")? {
        sim.truncation_eps = x;
    }
    if let Some(n) = e.usize("sim.max_terms")? {
        sim.max_terms = n;
    }
    if let Some(n) = e.usize("sim.n_streams")? {
        sim.n_streams = n;
    }
    if let Some(v) = e.take("sim.mode") {
        let v = v.to_string();
        sim.mode = match v.as_str() {
            "series" => Mode::SeriesTruncation,
            "fixed" => Mode::FixedIterations(
                e.usize("sim.iterations")?.ok_or_else(|| ConfigError::Missing("sim.iterations".into()))?,
            ),
            _ => return Err(ConfigError::UnknownVariant { key: "sim.mode".into(), value: v }),
        };
    }
    cfg.r = e.f64("moments.r")?;
    cfg.x_grid = e.list("tail.x_grid")?;
    cfg.t_grid = e.list("charfn.t_grid")?;
    if let Some(t) = e.f64("charfn.tol")? {
        cfg.cf_tol = t;
    }
    cfg.case = e.take("validate.case").map(str::to_string);
    cfg.out_dir = e.take("output.dir").map(PathBuf::from);
    if let Some(k) = e.map.keys().find(|k| !e.used.contains(*k)) {
        return Err(ConfigError::UnknownKey(k.clone()));
    }
    validate_sim(&cfg.sim)?;
    Ok(cfg)
}

fn validate_sim(sim: &SimConfig) -> Result<(), ConfigError> {
    if sim.n_streams == 0 {
        return Err(ConfigError::Invalid("sim.n_streams must be at least 1".into()));
    }
    if !(sim.truncation_eps > 0.0) {
        return Err(ConfigError::Invalid("sim.truncation_eps must be positive".into()));
    }
    if sim.max_terms == 0 {
        return Err(ConfigError::Invalid("sim.max_terms must be at least 1".into()));
    }
    Ok(())
}

fn parse_joint(e: &mut Entries) -> Result<JointInput, ConfigError> {
    let dep = e.take("joint.dependence.variant").unwrap_or("independent").to_string();
    let b = parse_law(e, "joint.B")?;
    match dep.as_str() {
        "independent" => Ok(JointInput::independent(parse_law(e, "joint.A")?, b)),
        "threshold" => {
            let z1 = e.req_f64("joint.dependence.zeta1")?;
            let z2 = e.req_f64("joint.dependence.zeta2")?;
            let q = e.req_f64("joint.dependence.q")?;
            Ok(JointInput::threshold(b, z1, z2, q))
        }
        _ => Err(ConfigError::UnknownVariant { key: "joint.dependence.variant".into(), value: dep }),
    }
}

fn parse_law(e: &mut Entries, prefix: &str) -> Result<ScalarDistribution, ConfigError> {
    use ScalarDistribution as D;
    let vkey = format!("{prefix}.variant");
    let variant = e.take(&vkey).ok_or_else(|| ConfigError::Missing(vkey.clone()))?.to_string();
    let mut num = |name: &str| e.req_f64(&format!("{prefix}.{name}"));
    let law = match variant.as_str() {
        "point_mass" => D::point_mass(num("value")?),
        "exponential" => D::exponential(num("rate")?),
        "gamma" => D::gamma(num("shape")?, num("rate")?),
        "beta" => D::beta(num("p")?, num("q")?),
        "uniform" => D::uniform(num("lo")?, num("hi")?),
        "power_exp" => D::survival_defined(SurvivalLaw::power_exp(num("c")?, num("b")?)),
        "neg_log_ratio" => D::survival_defined(SurvivalLaw::neg_log_ratio(num("b")?, num("lambda")?)),
        "negated" => D::negated(parse_law(e, &format!("{prefix}.inner"))?),
        "shifted" => {
            let offset = e.req_f64(&format!("{prefix}.offset"))?;
            D::shifted(parse_law(e, &format!("{prefix}.inner"))?, offset)
        }
        "scaled" => {
            let factor = e.req_f64(&format!("{prefix}.factor"))?;
            D::scaled(parse_law(e, &format!("{prefix}.inner"))?, factor)
        }
        "difference" => {
            D::difference(parse_law(e, &format!("{prefix}.left"))?, parse_law(e, &format!("{prefix}.right"))?)
        }
        "mixture" => {
            let mut parts = Vec::new();
            for i in 0.. {
                let p = format!("{prefix}.parts.{i}");
                if !e.has_prefix(&p) {
                    break;
                }
                let w = e.req_f64(&format!("{p}.weight"))?;
                parts.push((w, parse_law(e, &format!("{p}.law"))?));
            }
            if parts.is_empty() {
                return Err(ConfigError::Missing(format!("{prefix}.parts.0.weight")));
            }
            D::mixture(parts)
        }
        _ => return Err(ConfigError::UnknownVariant { key: vkey, value: variant }),
    };
    Ok(law)
}

/// Canonical text form; `parse(&serialize(c)) == c` for every config
/// without user-supplied survival functions.
pub fn serialize(cfg: &ExperimentConfig) -> Result<String, ConfigError> {
    let mut out = String::new();
    if let Some(j) = &cfg.joint {
        match &j.dependence {
            Dependence::Independent => {
                line(&mut out, "joint.dependence.variant", "independent");
                let a = j.a.as_ref().ok_or_else(|| ConfigError::Invalid("independent joint without A".into()))?;
                write_law(&mut out, "joint.A", a)?;
            }
            Dependence::ThresholdDependent { zeta1, zeta2, q } => {
                line(&mut out, "joint.dependence.variant", "threshold");
                line(&mut out, "joint.dependence.zeta1", zeta1);
                line(&mut out, "joint.dependence.zeta2", zeta2);
                line(&mut out, "joint.dependence.q", q);
            }
        }
        write_law(&mut out, "joint.B", &j.b)?;
    }
    let s = &cfg.sim;
    line(&mut out, "sim.n_samples", s.n_samples);
    line(&mut out, "sim.seed", s.master_seed);
    line(&mut out, "sim.truncation_eps", s.truncation_eps);
    line(&mut out, "sim.max_terms", s.max_terms);
    line(&mut out, "sim.n_streams", s.n_streams);
    match s.mode {
        Mode::SeriesTruncation => line(&mut out, "sim.mode", "series"),
        Mode::FixedIterations(n) => {
            line(&mut out, "sim.mode", "fixed");
            line(&mut out, "sim.iterations", n);
        }
    }
    if let Some(r) = cfg.r {
        line(&mut out, "moments.r", r);
    }
    if !cfg.x_grid.is_empty() {
        line(&mut out, "tail.x_grid", join(&cfg.x_grid));
    }
    if !cfg.t_grid.is_empty() {
        line(&mut out, "charfn.t_grid", join(&cfg.t_grid));
    }
    line(&mut out, "charfn.tol", cfg.cf_tol);
    if let Some(c) = &cfg.case {
        line(&mut out, "validate.case", c);
    }
    if let Some(d) = &cfg.out_dir {
        line(&mut out, "output.dir", d.display());
    }
    Ok(out)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn line(out: &mut String, key: &str, v: impl std::fmt::Display) {
    let _ = writeln!(out, "{key} = {v}");
}

fn write_law(out: &mut String, prefix: &str, d: &ScalarDistribution) -> Result<(), ConfigError> {
    use ScalarDistribution as D;
    let variant = |out: &mut String, v: &str| line(out, &format!("{prefix}.variant"), v);
    let param = |out: &mut String, k: &str, v: f64| line(out, &format!("{prefix}.{k}"), v);
    match d {
        D::PointMass(v) => {
            variant(out, "point_mass");
            param(out, "value", *v);
        }
        D::Exponential { rate } => {
            variant(out, "exponential");
            param(out, "rate", *rate);
        }
        D::Gamma { shape, rate } => {
            variant(out, "gamma");
            param(out, "shape", *shape);
            param(out, "rate", *rate);
        }
        D::Beta { p, q } => {
            variant(out, "beta");
            param(out, "p", *p);
            param(out, "q", *q);
        }
        D::Uniform { lo, hi } => {
            variant(out, "uniform");
            param(out, "lo", *lo);
            param(out, "hi", *hi);
        }
        D::Negated(inner) => {
            variant(out, "negated");
            write_law(out, &format!("{prefix}.inner"), inner)?;
        }
        D::Shifted { inner, offset } => {
            variant(out, "shifted");
            param(out, "offset", *offset);
            write_law(out, &format!("{prefix}.inner"), inner)?;
        }
        D::Scaled { inner, factor } => {
            variant(out, "scaled");
            param(out, "factor", *factor);
            write_law(out, &format!("{prefix}.inner"), inner)?;
        }
        D::Difference { left, right } => {
            variant(out, "difference");
            write_law(out, &format!("{prefix}.left"), left)?;
            write_law(out, &format!("{prefix}.right"), right)?;
        }
        D::Mixture(parts) => {
            variant(out, "mixture");
            for (i, (w, p)) in parts.iter().enumerate() {
                line(out, &format!("{prefix}.parts.{i}.weight"), w);
                write_law(out, &format!("{prefix}.parts.{i}.law"), p)?;
            }
        }
        D::SurvivalDefined(law) => match law.kind() {
            SurvivalKind::PowerExp { c, b } => {
                variant(out, "power_exp");
                param(out, "c", *c);
                param(out, "b", *b);
            }
            SurvivalKind::NegLogRatio { b, lambda } => {
                variant(out, "neg_log_ratio");
                param(out, "b", *b);
                param(out, "lambda", *lambda);
            }
            SurvivalKind::Custom { name, .. } => {
                return Err(ConfigError::Invalid(format!("custom survival law `{name}` has no text form")))
            }
        },
    }
    Ok(())
}

/// SHA-256 of the canonical text form, hex encoded.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String, ConfigError> {
    Ok(hex::encode(Sha256::digest(serialize(cfg)?.as_bytes())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
# Beta(2,1) multiplier, exponential increment
joint.A.variant = beta
joint.A.p = 2
joint.A.q = 1
joint.B.variant = exponential
joint.B.rate = 1
sim.n_samples = 1000
sim.seed = 0x2a
moments.r = 0.5
tail.x_grid = 1, 2.5, 4
";

    #[test]
    fn parses_example() {
        let c = parse(EXAMPLE).unwrap();
        let j = c.joint.unwrap();
        assert_eq!(j.a, Some(ScalarDistribution::beta(2.0, 1.0)));
        assert_eq!(j.b, ScalarDistribution::exponential(1.0));
        assert_eq!(c.sim.master_seed, 42);
        assert_eq!(c.x_grid, vec![1.0, 2.5, 4.0]);
        assert_eq!(c.r, Some(0.5));
    }

    #[test]
    fn round_trips() {
        use ScalarDistribution as D;
        let mut c = parse(EXAMPLE).unwrap();
        c.joint = Some(JointInput::independent(
            D::mixture(vec![(0.3, D::point_mass(-1.0)), (0.7, D::scaled(D::uniform(0.0, 1.0), 0.5))]),
            D::difference(D::survival_defined(SurvivalLaw::power_exp(-2.0, 1.0)), D::negated(D::gamma(1.5, 0.1))),
        ));
        c.sim.mode = Mode::FixedIterations(50);
        c.t_grid = vec![0.1, 1.0 / 3.0];
        c.out_dir = Some("runs/a".into());
        let text = serialize(&c).unwrap();
        assert_eq!(parse(&text).unwrap(), c);
        let t = ExperimentConfig { joint: Some(JointInput::threshold(D::exponential(1.0), 0.3, 0.7, 1.0)), ..c };
        assert_eq!(parse(&serialize(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = format!("{EXAMPLE}disttribution = beta\n");
        assert_eq!(parse(&bad), Err(ConfigError::UnknownKey("disttribution".into())));
        let bad = format!("{EXAMPLE}joint.A.rate = 3\n");
        assert_eq!(parse(&bad), Err(ConfigError::UnknownKey("joint.A.rate".into())));
        assert!(matches!(parse("joint.A.variant = cauchy\njoint.B.variant = exponential\njoint.B.rate = 1"),
            Err(ConfigError::UnknownVariant { .. })));
        assert!(matches!(parse("sim.n_samples 3"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn hash_is_stable() {
        let c = parse(EXAMPLE).unwrap();
        assert_eq!(config_hash(&c).unwrap(), config_hash(&parse(&serialize(&c).unwrap()).unwrap()).unwrap());
        assert_eq!(config_hash(&c).unwrap().len(), 64);
    }
}
