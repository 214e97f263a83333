//! The `ilnl` command line.
//!
//! Hyperparameters may come from flags or from a flat `key=value` file given
//! with `--config` (keys are the long flag names, `#` starts a comment);
//! flags win. Exit codes: 0 success, 2 usage, 3 data, 4 transport.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::blackbox::{self, wrap_as_blackbox, BlackBoxHandle, RemoteOptions};
use crate::data::{load_csv, make_synthetic_pair, write_csv, DatasetSplit, ShiftSpec};
use crate::error::{Error, Result};
use crate::eval::evaluate;
use crate::iterative::{run_iterlnl, IterConfig, ReinitPolicy};
use crate::lnl::LnlConfig;
use crate::model::{load_checkpoint, save_checkpoint, train_source, TrainConfig};
use crate::report::{self, generate_report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_TRANSPORT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ilnl", version, about = "Black-box domain adaptation with iterative noisy-label learning")]
pub struct Cli {
    /// Flat key=value file of defaults; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic source/target pair as CSV.
    GenData(GenDataArgs),
    /// Train the source model on labeled CSV data.
    TrainSource(TrainSourceArgs),
    /// Serve a checkpoint as a prediction-only HTTP API.
    Serve(ServeArgs),
    /// Adapt to unlabeled target data through a black box.
    Adapt(AdaptArgs),
    /// Score a black box on labeled data.
    Eval(EvalArgs),
    /// Build transition matrices and curves from a run directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n_source: Option<usize>,
    #[arg(long)]
    pub n_target: Option<usize>,
    /// Comma-separated translation; missing trailing coordinates are zero.
    /// Defaults to 6 along the first axis.
    #[arg(long)]
    pub translate: Option<String>,
    /// Rotation in radians in the plane of the first two coordinates.
    #[arg(long, allow_hyphen_values = true)]
    pub rotation: Option<f64>,
    #[arg(long)]
    pub spread: Option<f64>,
    #[arg(long)]
    pub mean_scale: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Hidden widths, comma-separated (empty for a linear model).
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainSourceArgs {
    /// Labeled CSV (label in the last column).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
}

#[derive(Debug, Args)]
pub struct BlackBoxArgs {
    /// Local checkpoint to use as the black box.
    #[arg(long, conflicts_with = "endpoint")]
    pub checkpoint: Option<PathBuf>,
    /// Base URL of a running `serve` instance.
    #[arg(long)]
    pub endpoint: Option<String>,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    #[command(flatten)]
    pub blackbox: BlackBoxArgs,
    /// Target CSV. Unlabeled unless --target-labels is given.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// The target CSV's last column holds ground truth, used only for reporting accuracy.
    #[arg(long)]
    pub target_labels: bool,
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
    /// Iterative steps M.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Single step (M = 1).
    #[arg(long)]
    pub no_iter: bool,
    #[arg(long)]
    pub no_category_sampling: bool,
    #[arg(long)]
    pub no_rescale: bool,
    /// Labeled target validation CSV; ε becomes one minus the black box's accuracy on it.
    #[arg(long)]
    pub val_set: Option<PathBuf>,
    /// Fixed noise rate instead of estimating it.
    #[arg(long)]
    pub noise_rate: Option<f64>,
    /// Continue from the previous step's model instead of a fresh init.
    #[arg(long)]
    pub warm_start: bool,
    #[arg(long)]
    pub early_stop_tol: Option<f64>,
    #[arg(long)]
    pub no_early_stop: bool,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub buffer_len: Option<usize>,
    #[arg(long)]
    pub n_k_fraction: Option<f64>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub blackbox: BlackBoxArgs,
    /// Labeled CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Write the transition matrix here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub run_dir: PathBuf,
    /// Labeled target CSV for accuracy and transition matrices.
    #[arg(long)]
    pub eval: Option<PathBuf>,
    /// Defaults to `<run-dir>/report`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parsed `--config` file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected key=value, got {line:?}"),
            })?;
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    /// Flag value, else file value, else `default`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    fn flag(&self, set: bool, key: &str) -> Result<bool> {
        Ok(set || self.get::<bool>(key)?.unwrap_or(false))
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.values.get(key).map(PathBuf::from))
    }

    fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.values.get(key).cloned())
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        Error::Transport(_) | Error::Protocol(_) => EXIT_TRANSPORT,
        Error::Parse { .. }
        | Error::Data(_)
        | Error::Dimension { .. }
        | Error::Checkpoint(_)
        | Error::MissingArtifact(_)
        | Error::Io { .. } => EXIT_DATA,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::GenData(a) => cmd_gen_data(a, &file),
        Command::TrainSource(a) => cmd_train_source(a, &file),
        Command::Serve(a) => cmd_serve(a, &file),
        Command::Adapt(a) => cmd_adapt(a, &file),
        Command::Eval(a) => cmd_eval(a, &file),
        Command::Report(a) => cmd_report(a),
    }
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required --{flag}")))
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| Error::Config(format!("{what}: cannot parse {p:?}"))))
        .collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_gen_data(a: GenDataArgs, file: &ConfigFile) -> Result<()> {
    let base = ShiftSpec::unbalanced_benchmark();
    let d = file.pick(a.d, "d", base.d)?;
    let translation = match file.string(a.translate, "translate") {
        Some(t) => {
            let t: Vec<f64> = parse_list(&t, "translate")?;
            if t.len() > d {
                return Err(Error::Config(format!("translate has {} entries for d={d}", t.len())));
            }
            let mut full = vec![0.0; d];
            full[..t.len()].copy_from_slice(&t);
            full
        }
        None if d == base.d => base.translation.clone(),
        None => vec![0.0; d],
    };
    let spec = ShiftSpec {
        k: file.pick(a.k, "k", base.k)?,
        d,
        n_source: file.pick(a.n_source, "n-source", base.n_source)?,
        n_target: file.pick(a.n_target, "n-target", base.n_target)?,
        translation,
        rotation: file.pick(a.rotation, "rotation", base.rotation)?,
        spread: file.pick(a.spread, "spread", base.spread)?,
        mean_scale: file.pick(a.mean_scale, "mean-scale", base.mean_scale)?,
        seed: file.pick(a.seed, "seed", base.seed)?,
    };
    let (source, target) = make_synthetic_pair(&spec)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    write_csv(&source, a.out_dir.join("source.csv"), true)?;
    write_csv(&target, a.out_dir.join("target.csv"), false)?;
    write_csv(&target, a.out_dir.join("target_eval.csv"), true)?;
    println!(
        "wrote {} source and {} target rows (k={}, d={}) to {}",
        source.len(),
        target.len(),
        spec.k,
        spec.d,
        a.out_dir.display()
    );
    Ok(())
}

fn train_config(t: &TrainArgs, file: &ConfigFile) -> Result<TrainConfig> {
    let defaults = TrainConfig::default();
    let hidden = match file.string(t.hidden.clone(), "hidden") {
        Some(h) => parse_list(&h, "hidden")?,
        None => defaults.hidden,
    };
    Ok(TrainConfig {
        hidden,
        iterations: file.pick(t.iterations, "iterations", defaults.iterations)?,
        batch_size: file.pick(t.batch_size, "batch-size", defaults.batch_size)?,
        eta0: file.pick(t.eta0, "eta0", defaults.eta0)?,
        momentum: file.pick(t.momentum, "momentum", defaults.momentum)?,
        seed: file.pick(t.seed, "seed", defaults.seed)?,
    })
}

fn cmd_train_source(a: TrainSourceArgs, file: &ConfigFile) -> Result<()> {
    let data = required(file.path(a.data, "data"), "data")?;
    let out = required(file.path(a.out, "out"), "out")?;
    let cfg = train_config(&a.train, file)?;
    let source = load_csv(&data, true, None)?;
    let model = train_source(&source, &cfg)?;
    save_checkpoint(&model, &out)?;
    let ev = evaluate(&wrap_as_blackbox(model), &source)?;
    let bytes = fs::read(&out).map_err(|e| Error::io(&out, e))?;
    let cfg_hash = hex_digest(format!("{cfg:?}").as_bytes());
    let prov = report::provenance(cfg.seed, &cfg_hash[..16]);
    let report_path = PathBuf::from(format!("{}.report.csv", out.display()));
    let mut text = format!("# {prov}\nclass,support,accuracy\n");
    for (c, (n, acc)) in ev.support.iter().zip(&ev.per_class).enumerate() {
        text.push_str(&format!(
            "{c},{n},{}\n",
            acc.map(|a| format!("{a:?}")).unwrap_or_default()
        ));
    }
    text.push_str(&format!("all,{},{:?}\n", source.len(), ev.accuracy));
    fs::write(&report_path, text).map_err(|e| Error::io(&report_path, e))?;
    println!("source accuracy {:.4}", ev.accuracy);
    println!("checkpoint {} sha256 {}", out.display(), hex_digest(&bytes));
    Ok(())
}

fn cmd_serve(a: ServeArgs, file: &ConfigFile) -> Result<()> {
    let ckpt = required(file.path(a.checkpoint, "checkpoint"), "checkpoint")?;
    let server = blackbox::serve(&ckpt, &a.bind)?;
    println!("listening on {}", server.url());
    let _ = std::io::stdout().flush();
    server.wait();
    Ok(())
}

fn open_blackbox(b: BlackBoxArgs, file: &ConfigFile) -> Result<BlackBoxHandle> {
    match (file.path(b.checkpoint, "checkpoint"), file.string(b.endpoint, "endpoint")) {
        (Some(p), None) => Ok(wrap_as_blackbox(load_checkpoint(p)?)),
        (None, Some(url)) => BlackBoxHandle::remote(&url, RemoteOptions::default()),
        (Some(_), Some(_)) => Err(Error::Config("give either --checkpoint or --endpoint, not both".into())),
        (None, None) => Err(Error::Config("missing black box: --checkpoint or --endpoint".into())),
    }
}

/// Load a CSV whose class count comes from the black box's output width.
fn load_for_blackbox(path: &Path, has_labels: bool, handle: &BlackBoxHandle) -> Result<DatasetSplit> {
    // Any class count passes parsing; the real one is the black box's output width.
    let probe = load_csv(path, has_labels, Some(usize::MAX))?;
    let k = handle
        .predict_batch(probe.features().slice(ndarray::s![0..1, ..]))?
        .ncols();
    load_csv(path, has_labels, Some(k))
}

pub fn adapt_config(a: &AdaptArgs, file: &ConfigFile) -> Result<IterConfig> {
    let train = train_config(&a.train, file)?;
    let defaults = LnlConfig::default();
    let lnl = LnlConfig {
        gamma: file.pick(a.gamma, "gamma", defaults.gamma)?,
        kappa: file.pick(a.kappa, "kappa", defaults.kappa)?,
        buffer_len: file.pick(a.buffer_len, "buffer-len", defaults.buffer_len)?,
        n_k_fraction: file.pick(a.n_k_fraction, "n-k-fraction", defaults.n_k_fraction)?,
        iterations: train.iterations,
        batch_size: train.batch_size,
        eta0: train.eta0,
        momentum: train.momentum,
        hidden: train.hidden,
        no_rescale: file.flag(a.no_rescale, "no-rescale")?,
        no_category_sampling: file.flag(a.no_category_sampling, "no-category-sampling")?,
        noise_rate_override: file.pick_opt(a.noise_rate, "noise-rate")?,
        validation_set: None,
    };
    let steps = if file.flag(a.no_iter, "no-iter")? {
        1
    } else {
        file.pick(a.steps, "steps", 5)?
    };
    let early_stop_tolerance = if file.flag(a.no_early_stop, "no-early-stop")? {
        None
    } else {
        Some(file.pick(a.early_stop_tol, "early-stop-tol", 0.01)?)
    };
    Ok(IterConfig {
        steps,
        lnl,
        reinit: if file.flag(a.warm_start, "warm-start")? {
            ReinitPolicy::WarmStart
        } else {
            ReinitPolicy::Fresh
        },
        early_stop_tolerance,
        seed: train.seed,
        run_dir: Some(file.path(a.run_dir.clone(), "run-dir").unwrap_or_else(|| PathBuf::from("runs/default"))),
    })
}

fn cmd_adapt(a: AdaptArgs, file: &ConfigFile) -> Result<()> {
    let mut cfg = adapt_config(&a, file)?;
    let target_path = required(file.path(a.target.clone(), "target"), "target")?;
    let target_labels = file.flag(a.target_labels, "target-labels")?;
    let val_path = file.path(a.val_set.clone(), "val-set");
    let handle = open_blackbox(a.blackbox, file)?;
    let mut target = load_for_blackbox(&target_path, target_labels, &handle)?;
    if target_labels {
        target = target.hide_labels();
    }
    if let Some(vp) = val_path {
        let val = load_csv(&vp, true, Some(target.k()))?;
        cfg.lnl.validation_set = Some(Arc::new(val));
    }
    let outcome = run_iterlnl(&handle, &target, &cfg)?;
    let run_dir = cfg.run_dir.clone().expect("adapt always sets a run dir");
    let final_ckpt = run_dir.join("final.ckpt");
    save_checkpoint(&outcome.model, &final_ckpt)?;
    for r in &outcome.trace {
        let acc = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "step {} eps_est {:.4} label_acc {} model_acc {}",
            r.step,
            r.epsilon_est,
            acc(r.label_accuracy),
            acc(r.model_accuracy)
        );
    }
    let bytes = fs::read(&final_ckpt).map_err(|e| Error::io(&final_ckpt, e))?;
    println!("final checkpoint {} sha256 {}", final_ckpt.display(), hex_digest(&bytes));
    println!("trace {}", run_dir.join("trace.csv").display());
    Ok(())
}

fn cmd_eval(a: EvalArgs, file: &ConfigFile) -> Result<()> {
    let data = required(file.path(a.data, "data"), "data")?;
    let out = file.path(a.out, "out");
    let handle = open_blackbox(a.blackbox, file)?;
    let split = load_for_blackbox(&data, true, &handle)?;
    let ev = evaluate(&handle, &split)?;
    print!("{}", ev.render_table());
    if let Some(out) = out {
        let prov = report::provenance(0, &hex_digest(data.display().to_string().as_bytes())[..16]);
        fs::write(&out, ev.transition_csv(&prov)).map_err(|e| Error::io(&out, e))?;
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let out_dir = a.out_dir.unwrap_or_else(|| a.run_dir.join("report"));
    let eval = match &a.eval {
        Some(p) => Some(load_csv(p, true, None)?),
        None => None,
    };
    let summary = generate_report(&a.run_dir, eval.as_ref(), &out_dir)?;
    for n in &summary.notices {
        println!("note: {n}");
    }
    for (i, ev) in summary.label_evaluations.iter().enumerate() {
        println!("step {} noisy-label transition matrix:\n{}", i + 1, ev.render_table());
    }
    for p in &summary.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let f = ConfigFile::parse("# comment\nsteps = 3\nno_rescale=true # trailing\n", Path::new("c")).unwrap();
        assert_eq!(f.get::<usize>("steps").unwrap(), Some(3));
        assert!(f.flag(false, "no-rescale").unwrap());
        assert_eq!(f.pick(Some(7usize), "steps", 1).unwrap(), 7);
        assert!(ConfigFile::parse("novalue\n", Path::new("c")).is_err());
    }

    #[test]
    fn adapt_defaults() {
        let cli = Cli::try_parse_from(["ilnl", "adapt", "--checkpoint", "x", "--target", "t"]).unwrap();
        let Command::Adapt(a) = cli.command else { panic!() };
        let cfg = adapt_config(&a, &ConfigFile::default()).unwrap();
        assert_eq!(cfg.lnl.batch_size, 64);
        assert_eq!(cfg.lnl.eta0, 0.01);
        assert_eq!(cfg.lnl.kappa, 2.0);
        assert_eq!(cfg.lnl.gamma, 0.9);
        assert_eq!(cfg.lnl.buffer_len, 100);
        assert_eq!(cfg.lnl.n_k_fraction, 0.5);
    }

    #[test]
    fn no_iter_forces_single_step() {
        let cli = Cli::try_parse_from(["ilnl", "adapt", "--no-iter", "--steps", "4"]).unwrap();
        let Command::Adapt(a) = cli.command else { panic!() };
        assert_eq!(adapt_config(&a, &ConfigFile::default()).unwrap().steps, 1);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Data("x".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::Transport("x".into())), EXIT_TRANSPORT);
        assert_eq!(run(["ilnl", "train-source", "--out", "x.ckpt"]), EXIT_USAGE);
        assert!(Cli::try_parse_from(["ilnl", "bogus"]).is_err());
    }
}
