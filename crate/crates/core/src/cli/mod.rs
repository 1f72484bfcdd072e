//! Command-line surface: experiment files in, JSON reports and plot-ready
//! CSV out.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{perpetuity_cf, predict_tail, TailPrediction};
use crate::criteria::{moment_verdict, CriteriaError, Verdict};
use crate::model::{validate_nondegeneracy, JointInput};
use crate::oracle::{compare_empirical, find_case};
use crate::simulate::{
    check_convergence, conditional_tail_estimates, empirical_tail, sample_batch, write_samples_csv, ConvergenceVerdict,
    TailEstimate,
};
pub use config::{config_hash, parse, serialize, ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_NO_THEOREM: i32 = 5;
pub const EXIT_VALIDATION_FAILED: i32 = 6;

#[derive(Parser, Debug)]
#[command(name = "perpetuity", version, about = "Simulate perpetuities, decide exponential moments and predict tails")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment file with `dotted.key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV and JSON outputs; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 4 when the moment verdict is inconclusive.
    #[arg(long, global = true)]
    strict: bool,
    /// With `tail`: simulate and emit the predicted/empirical ratio table.
    #[arg(long, global = true)]
    verify: bool,
    /// Omit wall-clock timestamps so reports are byte-reproducible.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw samples of X; writes samples.csv and simulate.json.
    Simulate,
    /// Decide whether E exp(rX) is finite at `moments.r`.
    Moments,
    /// Predict the tail P{X > x} ~ a x^c e^(-bx).
    Tail,
    /// Compare simulation against an exact reference case.
    Validate {
        /// Reference case id (E1..E5); defaults to `validate.case`.
        case: Option<String>,
    },
    /// Evaluate the characteristic function of X on `charfn.t_grid`.
    Charfn,
}

/// An error with its exit status.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, format!("config error: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_CONFIG, format!("i/o error: {e}"))
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "{}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", p.display())))?;
            parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.sim.master_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = Some(o.clone());
    }
    if let Some(d) = &cfg.out_dir {
        fs::create_dir_all(d)?;
    }
    let ctx = Context { cfg, timestamp: !cli.no_timestamp };
    match &cli.command {
        Command::Simulate => cmd_simulate(&ctx, stdout),
        Command::Moments => cmd_moments(&ctx, cli.strict, stdout),
        Command::Tail => cmd_tail(&ctx, cli.verify, stdout),
        Command::Validate { case } => cmd_validate(&ctx, case.as_deref(), stdout),
        Command::Charfn => cmd_charfn(&ctx, stdout),
    }
}

struct Context {
    cfg: ExperimentConfig,
    timestamp: bool,
}

impl Context {
    fn joint(&self) -> Result<&JointInput, Failure> {
        let j = self.cfg.joint.as_ref().ok_or_else(|| Failure::new(EXIT_CONFIG, "config error: missing key `joint.B.variant`"))?;
        j.validate_parameters().map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: {e}")))?;
        Ok(j)
    }

    /// Parameter checks, nondegeneracy and the convergence gate.
    fn convergent_joint(&self) -> Result<&JointInput, Failure> {
        let j = self.joint()?;
        validate_nondegeneracy(j).map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: {e}")))?;
        let conv = check_convergence(j).map_err(|e| Failure::new(EXIT_CONFIG, format!("config error: {e}")))?;
        if conv.verdict == ConvergenceVerdict::Diverges {
            return Err(Failure::new(EXIT_DIVERGENT, format!("the series defining X diverges: {}", conv.evidence)));
        }
        Ok(j)
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.cfg.out_dir.as_ref().map(|d| d.join(name))
    }

    fn hash(&self) -> Result<String, Failure> {
        Ok(config_hash(&self.cfg)?)
    }

    /// Pretty JSON with the shared header fields, to stdout and optionally
    /// to `<out>/<name>`.
    fn report<T: Serialize>(&self, name: &str, body: &T, stdout: &mut dyn Write) -> Result<(), Failure> {
        let mut v = serde_json::to_value(body).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
        if let Some(obj) = v.as_object_mut() {
            obj.insert("config_sha256".into(), json!(self.hash()?));
            obj.insert("seed".into(), json!(self.cfg.sim.master_seed));
            if self.timestamp {
                let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                obj.insert("timestamp".into(), json!(now));
            }
        }
        let text = serde_json::to_string_pretty(&v).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))? + "\n";
        stdout.write_all(text.as_bytes())?;
        if let Some(p) = self.path(name) {
            fs::write(p, text)?;
        }
        Ok(())
    }
}

fn model_failure(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_CONFIG, format!("model error: {e}"))
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    n_samples: usize,
    mean_terms: f64,
    truncated_draws: usize,
    tail: &'a [TailEstimate],
}

fn cmd_simulate(ctx: &Context, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let joint = ctx.convergent_joint()?;
    let batch = sample_batch(joint, &ctx.cfg.sim).map_err(model_failure)?;
    if let Some(p) = ctx.path("samples.csv") {
        write_samples_csv(&p, &batch, &ctx.hash()?)?;
    }
    let tail = empirical_tail(&batch.values, &ctx.cfg.x_grid);
    let summary = SimulateSummary {
        n_samples: batch.values.len(),
        mean_terms: batch.truncation.mean_terms,
        truncated_draws: batch.truncation.hit_max_terms,
        tail: &tail,
    };
    ctx.report("simulate.json", &summary, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_moments(ctx: &Context, strict: bool, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let joint = ctx.joint()?;
    let r = ctx.cfg.r.ok_or_else(|| Failure::new(EXIT_CONFIG, "config error: missing key `moments.r`"))?;
    let v = match moment_verdict(joint, r, None) {
        Ok(v) => v,
        Err(CriteriaError::Divergent(why)) => {
            return Err(Failure::new(EXIT_DIVERGENT, format!("the series defining X diverges: {why}")))
        }
        Err(e) => return Err(Failure::new(EXIT_CONFIG, format!("config error: {e}"))),
    };
    ctx.report("moments.json", &v, stdout)?;
    if strict && v.verdict == Verdict::Inconclusive {
        return Ok(EXIT_INCONCLUSIVE);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RatioRow {
    x: f64,
    predicted: f64,
    empirical: f64,
    std_err: f64,
    ratio: f64,
}

fn cmd_tail(ctx: &Context, verify: bool, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let joint = ctx.convergent_joint()?;
    let pred = match predict_tail(joint, &ctx.cfg.sim) {
        Ok(p) => p,
        Err(misses) => {
            let mut msg = String::from("no tail theorem applies:");
            for m in misses {
                msg.push_str(&format!("\n  {:?}: {}", m.theorem, m.reason));
            }
            return Err(Failure::new(EXIT_NO_THEOREM, msg));
        }
    };
    if !verify {
        ctx.report("tail.json", &pred, stdout)?;
        return Ok(EXIT_OK);
    }
    let rows = ratio_table(ctx, joint, &pred)?;
    if let Some(p) = ctx.path("ratio.csv") {
        let mut w = csv::Writer::from_path(p).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
        for r in &rows {
            w.serialize(r).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
        }
        w.flush()?;
    }
    ctx.report("tail.json", &json!({ "prediction": pred, "ratios": rows }), stdout)?;
    Ok(EXIT_OK)
}

fn ratio_table(ctx: &Context, joint: &JointInput, pred: &TailPrediction) -> Result<Vec<RatioRow>, Failure> {
    let xs = if ctx.cfg.x_grid.is_empty() {
        (1..=8).map(|k| k as f64 / pred.form.b).collect()
    } else {
        ctx.cfg.x_grid.clone()
    };
    let est = if joint.is_independent() {
        conditional_tail_estimates(joint, &ctx.cfg.sim, &xs)
    } else {
        sample_batch(joint, &ctx.cfg.sim).map(|b| empirical_tail(&b.values, &xs))
    }
    .map_err(model_failure)?;
    Ok(est
        .into_iter()
        .map(|e| {
            let predicted = pred.predicted(e.x);
            RatioRow { x: e.x, predicted, empirical: e.p_hat, std_err: e.std_err, ratio: e.p_hat / predicted }
        })
        .collect())
}

fn cmd_validate(ctx: &Context, case: Option<&str>, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let id = case
        .or(ctx.cfg.case.as_deref())
        .ok_or_else(|| Failure::new(EXIT_CONFIG, "config error: no case id given (argument or `validate.case`)"))?;
    let case = find_case(id).ok_or_else(|| Failure::new(EXIT_CONFIG, format!("unknown reference case `{id}`")))?;
    let report = compare_empirical(&case, &ctx.cfg.sim).map_err(model_failure)?;
    ctx.report("validate.json", &report, stdout)?;
    Ok(if report.pass { EXIT_OK } else { EXIT_VALIDATION_FAILED })
}

fn cmd_charfn(ctx: &Context, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let joint = ctx.convergent_joint()?;
    let ts = if ctx.cfg.t_grid.is_empty() { (0..=20).map(|k| k as f64 * 0.25).collect() } else { ctx.cfg.t_grid.clone() };
    let mut text = String::from("t,re,im\n");
    for &t in &ts {
        let z = perpetuity_cf(joint, t, ctx.cfg.cf_tol).map_err(|e| Failure::new(EXIT_NO_THEOREM, e.to_string()))?;
        text.push_str(&format!("{t},{},{}\n", z.re, z.im));
    }
    match ctx.path("charfn.csv") {
        Some(p) => write_file(&p, &text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    fs::write(p, text).map_err(Failure::from)
}
