use anyhow::{Context, Result};
use arnold_core::mobius::Observable;
use arnold_tool::commands::{
  self, CommandOutput, FlowArgs, FlowCheck, MethodArg, MobiusArgs, MobiusStat, OrbitArgs,
  OrbitQuery, ShearArgs, Sl2Check,
};
use arnold_tool::{
  run_suite_with_workers, write_outputs, AlphaSpec, ExperimentConfig, Format, LemmaId,
};
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Numerical experiments on special flows over irrational rotations with logarithmic roofs.
#[derive(Parser)]
#[command(name = "arnold", version)]
struct Cli {
  /// Experiment config (TOML).
  #[arg(long, global = true)]
  config: Option<PathBuf>,
  /// Overrides the config seed.
  #[arg(long, global = true)]
  seed: Option<u64>,
  /// Worker threads (all cores by default).
  #[arg(long, global = true)]
  workers: Option<usize>,
  /// Directory for report files; single-shot commands print to stdout without it.
  #[arg(long, global = true)]
  out_dir: Option<PathBuf>,
  #[arg(long, global = true, value_enum, default_value = "csv")]
  format: Format,
  #[command(subcommand)]
  cmd: Command,
}

#[derive(Args, Clone)]
struct AlphaArgs {
  /// golden, silver, constructed:GAP, quad:a,b,d,c, a quotient list, or a decimal.
  #[arg(long, default_value = "golden")]
  alpha: AlphaSpec,
  #[arg(long, default_value_t = 40)]
  depth: usize,
}

#[derive(Subcommand)]
enum Command {
  /// Continued fraction, convergents and Diophantine diagnostics.
  Cf {
    #[command(flatten)]
    alpha: AlphaArgs,
    #[arg(long)]
    check_diophantine: bool,
    /// Build the constructed rotation number with this witness gap instead.
    #[arg(long, value_name = "WITNESS_GAP")]
    construct_d: Option<usize>,
  },
  /// Orbit queries at one scale.
  Orbit {
    #[command(flatten)]
    alpha: AlphaArgs,
    #[arg(long)]
    x: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum)]
    query: OrbitQuery,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Second point for `classify`.
    #[arg(long)]
    y2: Option<f64>,
    #[arg(long, value_enum, default_value = "accelerated")]
    method: MethodArg,
  },
  /// Run one check of the suite.
  Verify {
    #[arg(long)]
    lemma: LemmaId,
    #[arg(long)]
    roof: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<AlphaSpec>,
    /// Samples per scale (and flow instances, triples).
    #[arg(long)]
    samples: Option<usize>,
  },
  /// Special flow evolution and its identities.
  Flow {
    #[arg(long)]
    roof: Option<PathBuf>,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[arg(long)]
    x: f64,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value = "evolve")]
    check: FlowCheck,
    /// Rescaling factor.
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    /// First scale of the good-set intersection for `hits`.
    #[arg(long, default_value_t = 2)]
    s0: usize,
  },
  /// Drift series between two pairs of points.
  Shear {
    #[arg(long)]
    roof: Option<PathBuf>,
    #[command(flatten)]
    alpha: AlphaArgs,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    /// x,x',y,y'
    #[arg(long, value_delimiter = ',', num_args = 4)]
    points: Vec<f64>,
    #[arg(long)]
    wmax: u64,
    #[arg(long)]
    rpq: Option<f64>,
    #[arg(long)]
    cpq: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    kappa: f64,
  },
  /// Matrix identities in SL(2, R).
  Sl2 {
    #[arg(long, value_enum)]
    check: Sl2Check,
    /// key=value pairs, comma separated.
    #[arg(long, default_value = "")]
    params: String,
  },
  /// Möbius statistics.
  Mobius {
    #[arg(long, value_enum)]
    stat: MobiusStat,
    #[arg(long = "N", default_value_t = 1_000_000)]
    n: u64,
    #[arg(long = "M", default_value_t = 100_000)]
    m: u64,
    #[arg(long = "H")]
    h: Option<u64>,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    q: u64,
    #[arg(long)]
    roof: Option<PathBuf>,
    #[command(flatten)]
    alpha: AlphaArgs,
    /// Observable as JSON, e.g. {"kind":"base-interval","a":0,"b":0.5,"centered":true}.
    #[arg(long)]
    observable: Option<String>,
    #[arg(long, default_value_t = 0.123)]
    x0: f64,
    #[arg(long, default_value_t = 1.0)]
    t0: f64,
  },
  /// Run the checks selected in the config.
  Suite,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
  let mut cfg = match &cli.config {
    Some(p) => ExperimentConfig::load(p)?,
    None => ExperimentConfig::default(),
  };
  if let Some(s) = cli.seed {
    cfg.seed = s;
  }
  Ok(cfg)
}

fn run_and_report(cli: &Cli, cfg: &ExperimentConfig) -> Result<bool> {
  let out = run_suite_with_workers(cfg, cli.workers)?;
  let dir = cli
    .out_dir
    .clone()
    .unwrap_or_else(|| cfg.output.dir.clone());
  let (report, summary) = write_outputs(&out, &dir, cfg, cli.format)?;
  for l in &out.summary.lemmas {
    println!(
      "{:<20} checked {:>5}  skipped {:>5}  failed rows {:>4}  {}",
      l.lemma.name(),
      l.checked,
      l.skipped,
      l.failed_rows,
      if l.pass { "pass" } else { "FAIL" }
    );
  }
  println!("report: {}", report.display());
  println!("summary: {}", summary.display());
  Ok(out.summary.pass)
}

fn emit(cli: &Cli, name: &str, out: &CommandOutput) -> Result<()> {
  let mut verdict = out.verdict.clone();
  if let (Format::Json, Some(t)) = (cli.format, &out.table) {
    verdict["table"] = t.to_json();
  }
  let json = serde_json::to_string_pretty(&verdict)? + "\n";
  match &cli.out_dir {
    Some(dir) => {
      std::fs::create_dir_all(dir)?;
      std::fs::write(dir.join(format!("{name}.json")), &json)?;
      if let Some(t) = &out.table {
        std::fs::write(dir.join(format!("{name}.csv")), t.to_csv()?)?;
      }
    }
    None => {
      let mut stdout = std::io::stdout().lock();
      match (cli.format, &out.table) {
        (Format::Csv, Some(t)) => stdout.write_all(&t.to_csv()?)?,
        _ => stdout.write_all(json.as_bytes())?,
      }
    }
  }
  Ok(())
}

fn roof_of(path: &Option<PathBuf>, cfg: &ExperimentConfig) -> Result<arnold_core::roof::RoofSpec> {
  match path {
    Some(p) => commands::load_roof(Some(Path::new(p))),
    None => Ok(cfg.roof.clone()),
  }
}

fn run(cli: &Cli) -> Result<bool> {
  let cfg = load_config(cli)?;
  let (name, out) = match &cli.cmd {
    Command::Suite => return run_and_report(cli, &cfg),
    Command::Verify {
      lemma,
      roof,
      alpha,
      samples,
    } => {
      let mut cfg = cfg.clone();
      cfg.lemmas = vec![*lemma];
      cfg.roof = roof_of(roof, &cfg)?;
      if let Some(a) = alpha {
        cfg.alpha = a.clone();
      }
      if let Some(s) = samples {
        cfg.samples.per_scale = *s;
        cfg.samples.flow = *s;
        cfg.samples.triples = *s;
      }
      cfg.validate()?;
      return run_and_report(cli, &cfg);
    }
    Command::Cf {
      alpha,
      check_diophantine,
      construct_d,
    } => (
      "cf",
      commands::cf(&alpha.alpha, alpha.depth, *check_diophantine, *construct_d)?,
    ),
    Command::Orbit {
      alpha,
      x,
      n,
      query,
      m,
      y2,
      method,
    } => {
      let a = OrbitArgs {
        alpha: alpha.alpha.clone(),
        depth: alpha.depth,
        x: *x,
        n: *n,
        query: *query,
        m: *m,
        y2: *y2,
        method: *method,
      };
      ("orbit", commands::orbit(&a)?)
    }
    Command::Flow {
      roof,
      alpha,
      x,
      s,
      t,
      check,
      c,
      s0,
    } => {
      let a = FlowArgs {
        roof: roof_of(roof, &cfg)?,
        alpha: alpha.alpha.clone(),
        depth: alpha.depth,
        x: *x,
        s: *s,
        t: *t,
        check: *check,
        c: *c,
        s0: *s0,
      };
      ("flow", commands::flow(&a)?)
    }
    Command::Shear {
      roof,
      alpha,
      p,
      q,
      points,
      wmax,
      rpq,
      cpq,
      eps,
      kappa,
    } => {
      let a = ShearArgs {
        roof: roof_of(roof, &cfg)?,
        alpha: alpha.alpha.clone(),
        depth: alpha.depth,
        p: *p,
        q: *q,
        points: [points[0], points[1], points[2], points[3]],
        w_max: *wmax,
        r_pq: *rpq,
        c_pq: *cpq,
        eps: *eps,
        kappa: *kappa,
      };
      ("shear", commands::shear(&a)?)
    }
    Command::Sl2 { check, params } => (
      "sl2",
      commands::sl2(*check, &commands::parse_params(params)?)?,
    ),
    Command::Mobius {
      stat,
      n,
      m,
      h,
      p,
      q,
      roof,
      alpha,
      observable,
      x0,
      t0,
    } => {
      let observable = match observable {
        Some(s) => serde_json::from_str(s).context("observable")?,
        None => Observable::BaseInterval {
          a: 0.0,
          b: 0.5,
          centered: true,
        },
      };
      let a = MobiusArgs {
        stat: *stat,
        n: *n,
        m: *m,
        h: *h,
        p: *p,
        q: *q,
        roof: roof_of(roof, &cfg)?,
        alpha: alpha.alpha.clone(),
        depth: alpha.depth,
        observable,
        x0: *x0,
        t0: *t0,
      };
      ("mobius", commands::mobius(&a)?)
    }
  };
  emit(cli, name, &out)?;
  Ok(out.pass)
}

fn main() -> ExitCode {
  let cli = Cli::parse();
  match run(&cli) {
    Ok(true) => ExitCode::SUCCESS,
    Ok(false) => ExitCode::from(1),
    Err(e) => {
      eprintln!("error: {e:#}");
      ExitCode::from(2)
    }
  }
}
