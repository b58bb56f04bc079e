//! Experiment suites: seeded instances, calibrate-then-freeze, report emission.
//!
//! Each selected check draws its instances from its own seeded stream, runs
//! them on the worker pool, and gathers the results in instance order, so the
//! output depends only on the config.

use crate::config::{Budgets, ExperimentConfig, LemmaId, Params, Samples};
use crate::sampling::{self, SuiteRng, PHASE_AUX, PHASE_TEST, PHASE_TRAIN};
use anyhow::{Context, Result};
use arnold_core::birkhoff::{
  calibrate, denjoy_koksma_check, resonant_decomposition, verify_f_bound, verify_fprime_far,
  verify_fprime_goodscale, verify_higher_derivatives, verify_special_times, Constants,
  FBoundOptions, GoodScaleInput, HigherDerivativeInput,
};
use arnold_core::orbit::{closest_return, range_min, window_halfwidth, Method};
use arnold_core::report::LemmaReport;
use arnold_core::roof::{Roof, RoofSpec, TrigPoly};
use arnold_core::shear::almost_linear_check;
use arnold_core::specialflow::{
  flow_property_residual, verify_rescaling, FlowPoint, FLOW_TOLERANCE,
};
use arnold_core::{ContinuedFraction, Error, Rotation};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const SCHEMA_VERSION: u32 = 1;

/// Draws per instance when sampling base points under an avoidance condition.
const GOODSCALE_TRIES: usize = 200;

/// Column order of the CSV report.
pub const CSV_COLUMNS: [&str; 8] = [
  "lemma", "instance", "x", "scale", "measured", "bound", "margin", "pass",
];

/// One checked inequality of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
  /// Report id of the inequality.
  pub lemma: String,
  /// Index of the instance within its check.
  pub instance: usize,
  /// Base point.
  pub x: f64,
  /// Size parameter of the instance: a return time, a time length or a window length.
  pub scale: f64,
  pub measured: f64,
  pub bound: f64,
  pub margin: f64,
  pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
  Csv,
  Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSummary {
  pub lemma: LemmaId,
  pub alpha: String,
  pub calibrated: bool,
  pub train_instances: usize,
  pub train_skipped: usize,
  pub instances: usize,
  pub checked: usize,
  /// Instances whose hypotheses were not met.
  pub skipped: usize,
  pub rows: usize,
  pub failed_rows: usize,
  pub worst_margin: Option<f64>,
  pub constants: Constants,
  pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
  pub schema_version: u32,
  pub seed: u64,
  pub alpha: String,
  pub depth: usize,
  pub roof: RoofSpec,
  pub selection: Vec<LemmaId>,
  pub samples: Samples,
  pub budgets: Budgets,
  pub params: Params,
  pub lemmas: Vec<LemmaSummary>,
  pub rows: usize,
  pub failed_rows: usize,
  pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
  pub rows: Vec<Row>,
  pub summary: Summary,
}

type Check<'a> = Box<dyn Fn(&Constants) -> arnold_core::Result<LemmaReport> + Send + Sync + 'a>;

/// A seeded instance, ready to run against a set of constants.
struct Case<'a> {
  x: f64,
  scale: f64,
  run: Check<'a>,
}

impl<'a> Case<'a> {
  fn new(
    x: f64,
    scale: f64,
    run: impl Fn(&Constants) -> arnold_core::Result<LemmaReport> + Send + Sync + 'a,
  ) -> Self {
    Case {
      x,
      scale,
      run: Box::new(run),
    }
  }
}

struct Setup<'a> {
  cfg: &'a ExperimentConfig,
  rot: Rotation,
  roof: RoofSpec,
}

/// Scales `n` with `lo < q_n <= hi`, `q_n >= 2`, and `q_{n+1}` known.
fn scales(rot: &Rotation, lo: f64, hi: f64) -> Vec<usize> {
  (1..rot.user_depth())
    .filter(|&n| {
      let q = rot.q_f64(n).unwrap_or(f64::INFINITY);
      q >= 2.0 && q > lo && q <= hi
    })
    .collect()
}

fn per_scale<'a>(
  ctx: &'a Setup<'a>,
  rng: &mut SuiteRng,
  lo: f64,
  hi: f64,
  mut make: impl FnMut(&mut SuiteRng, usize) -> Option<Case<'a>>,
) -> Vec<Case<'a>> {
  let mut out = Vec::new();
  for n in scales(&ctx.rot, lo, hi) {
    for _ in 0..ctx.cfg.samples.per_scale {
      if let Some(c) = make(rng, n) {
        out.push(c);
      }
    }
  }
  out
}

/// Golden prefix with one large quotient: `q_{n+1} = spike q_n + q_{n-1}`.
pub fn spiked_rotation(n: usize, spike: u64, depth: usize) -> Result<Rotation> {
  let mut a = vec![1u64; depth.max(n + 2)];
  a[n] = spike;
  Ok(Rotation::new(&ContinuedFraction::from_quotients(&a)?)?)
}

fn rename(mut r: LemmaReport, id: &str) -> LemmaReport {
  r.lemma_id = id.to_string();
  r
}

/// Instances of a check for scales `lo < q <= hi`.
fn cases<'a>(
  lemma: LemmaId,
  ctx: &'a Setup<'a>,
  rng: &mut SuiteRng,
  lo: f64,
  hi: f64,
) -> Result<Vec<Case<'a>>> {
  let (rot, roof, p) = (&ctx.rot, &ctx.roof, &ctx.cfg.params);
  let method = Method::Accelerated;
  let cases = match lemma {
    LemmaId::DenjoyKoksma => {
      let hi = hi.min(ctx.cfg.budgets.dk_max_q);
      let cos = TrigPoly {
        c0: 0.0,
        cos_coeffs: vec![1.0],
        sin_coeffs: vec![],
      };
      per_scale(ctx, rng, lo, hi, |rng, n| {
        let x = sampling::circle_point(rng);
        let q = rot.q(n).ok()?;
        let cos = cos.clone();
        Some(Case::new(x.to_f64(), q as f64, move |_| {
          let trunc = roof.truncate(q, 0)?;
          let a = denjoy_koksma_check(&trunc, rot, x, n)?;
          let b = denjoy_koksma_check(&cos, rot, x, n)?;
          Ok(LemmaReport::combine(
            "denjoy-koksma",
            vec![
              rename(a, "denjoy-koksma.truncated"),
              rename(b, "denjoy-koksma.cos"),
            ],
          ))
        }))
      })
    }
    LemmaId::SpecialTimes => per_scale(ctx, rng, lo, hi, |rng, n| {
      let x = sampling::circle_point(rng);
      let q = rot.q_f64(n).ok()?;
      Some(Case::new(x.to_f64(), q, move |c| {
        verify_special_times(roof, rot, x, n, c)
      }))
    }),
    LemmaId::FBound => per_scale(ctx, rng, lo, hi, |rng, n| {
      let x = sampling::circle_point(rng);
      let (q, q1) = (rot.q(n).ok()?, rot.q(n + 1).ok()?);
      let t = rng.gen_range(q.max(3)..q1.max(4));
      Some(Case::new(x.to_f64(), t as f64, move |c| {
        verify_f_bound(roof, rot, x, t, c, FBoundOptions::default())
      }))
    }),
    LemmaId::FprimeFar => per_scale(ctx, rng, lo, hi, |rng, n| {
      let x = sampling::circle_point(rng);
      let q1 = rot.q_f64(n + 1).ok()?;
      let top = (p.m * q1).floor().min(1e8) as u64;
      let r = sampling::log_uniform(rng, 2, top.max(2));
      let (m, eps) = (p.m, p.far_eps);
      Some(Case::new(x.to_f64(), r as f64, move |_| {
        verify_fprime_far(roof, rot, x, r, n, m, eps, method)
      }))
    }),
    LemmaId::FprimeGoodscale => per_scale(ctx, rng, lo, hi, |rng, n| {
      let x = sampling::circle_point(rng);
      let (q, q1) = (rot.q_f64(n).ok()?, rot.q(n + 1).ok()?);
      let t_lo = (q * q.ln()).ceil() as u64;
      let t_hi = (q1 - 1).min(100_000_000);
      if t_lo > t_hi {
        return None;
      }
      let t = sampling::log_uniform(rng, t_lo, t_hi);
      // draw x from the points whose length-T orbit avoids the window
      let w = window_halfwidth(q, 7.0 / 8.0).ok()?;
      let x = std::iter::once(x)
        .chain((1..GOODSCALE_TRIES).map(|_| sampling::circle_point(rng)))
        .find(|&x| range_min(rot, x, 0, t, method).is_ok_and(|m| m.dist() > w))?;
      let b = closest_return(rot, x, n, method).ok()?.b;
      let r_top = (b * t as f64 / 2.0).ceil() as u64;
      let r = rng.gen_range(0..r_top.max(1));
      let reach = (p.goodscale_eps.powi(3) * b * t as f64).floor() as u64;
      let s = (r + rng.gen_range(0..=reach))
        .saturating_sub(rng.gen_range(0..=reach))
        .min(t - 1);
      let inp = GoodScaleInput {
        x,
        n,
        t,
        r,
        s,
        m: p.m,
        eps: p.goodscale_eps,
      };
      Some(Case::new(x.to_f64(), t as f64, move |c| {
        verify_fprime_goodscale(roof, rot, &inp, c, method)
      }))
    }),
    LemmaId::Resonant => per_scale(ctx, rng, lo, hi, |rng, n| {
      let x = sampling::circle_point(rng);
      let (q, q1) = (rot.q(n).ok()?, rot.q(n + 1).ok()?);
      let r = sampling::log_uniform(rng, q.max(2), (q1 - 1).min(100_000_000));
      let delta = p.delta;
      Some(Case::new(x.to_f64(), r as f64, move |c| {
        Ok(resonant_decomposition(roof, rot, x, r, delta, c, method)?.report)
      }))
    }),
    LemmaId::HigherDerivatives => {
      // the scales come from the golden prefix shared by the whole family
      let golden = spiked_rotation(0, 1, ctx.cfg.depth)?;
      let mut out = Vec::new();
      for n in scales(&golden, lo, hi) {
        let srot = Arc::new(spiked_rotation(n, p.spike, ctx.cfg.depth)?);
        let q = srot.q(n)?;
        let q1 = srot.q_f64(n + 1)?;
        for _ in 0..ctx.cfg.samples.per_scale {
          let x = sampling::circle_point(rng);
          let k = rng.gen_range(1..=p.max_k);
          let b = closest_return(&srot, x, n, method)?.b;
          let w_top = ((b * q1 / 4.0 - q as f64).max(0.0) as u64)
            .min(20 * q)
            .max(q);
          let w = sampling::log_uniform(rng, q, w_top);
          let inp = HigherDerivativeInput {
            x,
            n,
            k,
            w,
            eps: p.higher_eps,
            b_max: p.b_max,
          };
          let srot = Arc::clone(&srot);
          out.push(Case::new(x.to_f64(), q as f64, move |c| {
            verify_higher_derivatives(roof, &srot, &inp, c)
          }));
        }
      }
      out
    }
    LemmaId::FlowSemigroup | LemmaId::Rescaling => {
      let f = Roof::Arnold(roof.clone());
      let big_t = p.flow_time;
      (0..ctx.cfg.samples.flow)
        .map(|_| {
          let z = sampling::circle_point(rng);
          let top = f.eval(z, 0).unwrap_or(1.0);
          let pt = FlowPoint::new(z, rng.gen::<f64>() * top);
          let (t1, t2) = (rng.gen_range(-big_t..big_t), rng.gen_range(-big_t..big_t));
          let c = rng.gen_range(0.25f64.ln()..4f64.ln()).exp();
          let f = f.clone();
          if lemma == LemmaId::FlowSemigroup {
            Case::new(z.to_f64(), t1.abs() + t2.abs(), move |_| {
              let res = flow_property_residual(&f, rot, pt, t1, t2)?;
              Ok(
                LemmaReport::upper("flow-semigroup", res, 1.0, FLOW_TOLERANCE)
                  .with_input("x", z.to_f64())
                  .with_input("t1", t1)
                  .with_input("t2", t2),
              )
            })
          } else {
            Case::new(z.to_f64(), t1.abs(), move |_| {
              verify_rescaling(&f, rot, c, pt, t1)
            })
          }
        })
        .collect()
    }
    LemmaId::AlmostLinear => (0..ctx.cfg.samples.triples)
      .map(|k| {
        let triple = if k % 2 == 0 {
          sampling::pal_triple(rng)
        } else {
          sampling::sal_triple(rng)
        };
        let probe = sampling::step_probe(rng);
        Case::new(triple.m, triple.l, move |_| {
          let id = if k % 2 == 0 {
            "almost-linear.pal"
          } else {
            "almost-linear.sal"
          };
          Ok(rename(almost_linear_check(&triple, &probe)?, id))
        })
      })
      .collect(),
  };
  Ok(cases)
}

/// Hypothesis and range failures skip an instance; anything else aborts.
fn skippable(e: &Error) -> bool {
  matches!(e, Error::HypothesisFailed(_) | Error::ScaleOutOfRange(_))
}

fn run_cases(
  lemma: LemmaId,
  phase: &str,
  cases: &[Case<'_>],
  consts: &Constants,
) -> Result<Vec<Option<LemmaReport>>> {
  let results: Vec<arnold_core::Result<LemmaReport>> =
    cases.par_iter().map(|c| (c.run)(consts)).collect();
  results
    .into_iter()
    .enumerate()
    .map(|(k, r)| match r {
      Ok(r) => Ok(Some(r)),
      Err(e) if skippable(&e) => Ok(None),
      Err(e) => Err(anyhow::Error::new(e).context(format!("{lemma} {phase} instance {k}"))),
    })
    .collect()
}

fn run_lemma(cfg: &ExperimentConfig, lemma: LemmaId) -> Result<(LemmaSummary, Vec<Row>)> {
  let alpha = cfg.alpha_for(lemma);
  let ctx = Setup {
    cfg,
    rot: alpha.rotation(cfg.depth)?,
    roof: cfg.roof.clone(),
  };
  let b = &cfg.budgets;
  let (mut train_n, mut train_skipped) = (0, 0);
  let mut consts = Constants::new();
  let test = if lemma.is_calibrated() {
    let mut rng = sampling::stream(cfg.seed, lemma.stream(), PHASE_TRAIN);
    let train = cases(lemma, &ctx, &mut rng, 0.0, b.train_max_q)?;
    let reports = run_cases(lemma, "train", &train, &Constants::new())?;
    train_n = train.len();
    train_skipped = reports.iter().filter(|r| r.is_none()).count();
    let fitted: Vec<LemmaReport> = reports.into_iter().flatten().collect();
    consts = calibrate(&fitted, &[]);
    for (k, v) in &cfg.calibration.0 {
      if k.starts_with(lemma.name()) {
        consts.insert(k.clone(), *v);
      }
    }
    let mut rng = sampling::stream(cfg.seed, lemma.stream(), PHASE_TEST);
    cases(lemma, &ctx, &mut rng, b.train_max_q, b.max_q)?
  } else {
    let mut rng = sampling::stream(cfg.seed, lemma.stream(), PHASE_AUX);
    cases(lemma, &ctx, &mut rng, 0.0, b.max_q)?
  };
  let reports = run_cases(lemma, "test", &test, &consts)?;
  let mut rows = Vec::new();
  let mut skipped = 0;
  for (k, (case, rep)) in test.iter().zip(&reports).enumerate() {
    let Some(rep) = rep else {
      skipped += 1;
      continue;
    };
    for leaf in rep.leaves() {
      rows.push(Row {
        lemma: leaf.lemma_id.clone(),
        instance: k,
        x: leaf.inputs.get("x").copied().unwrap_or(case.x),
        scale: case.scale,
        measured: leaf.measured,
        bound: leaf.bound,
        margin: leaf.margin,
        pass: leaf.pass,
      });
    }
  }
  let failed_rows = rows.iter().filter(|r| !r.pass).count();
  let summary = LemmaSummary {
    lemma,
    alpha: alpha.to_string(),
    calibrated: lemma.is_calibrated(),
    train_instances: train_n,
    train_skipped,
    instances: test.len(),
    checked: test.len() - skipped,
    skipped,
    rows: rows.len(),
    failed_rows,
    worst_margin: rows.iter().map(|r| r.margin).min_by(f64::total_cmp),
    constants: consts,
    // a check with no instance meeting its hypotheses has verified nothing
    pass: failed_rows == 0 && skipped < test.len(),
  };
  Ok((summary, rows))
}

/// Runs every selected check on the current thread pool.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteOutcome> {
  cfg.validate()?;
  let mut rows = Vec::new();
  let mut lemmas = Vec::new();
  for lemma in cfg.selection() {
    let (s, r) = run_lemma(cfg, lemma)?;
    lemmas.push(s);
    rows.extend(r);
  }
  let failed_rows = rows.iter().filter(|r| !r.pass).count();
  let summary = Summary {
    schema_version: SCHEMA_VERSION,
    seed: cfg.seed,
    alpha: cfg.alpha.to_string(),
    depth: cfg.depth,
    roof: cfg.roof.clone(),
    selection: cfg.selection(),
    samples: cfg.samples.clone(),
    budgets: cfg.budgets.clone(),
    params: cfg.params.clone(),
    rows: rows.len(),
    failed_rows,
    pass: lemmas.iter().all(|l| l.pass),
    lemmas,
  };
  Ok(SuiteOutcome { rows, summary })
}

/// Runs the suite on a dedicated pool of `workers` threads (all cores when `None`).
pub fn run_suite_with_workers(
  cfg: &ExperimentConfig,
  workers: Option<usize>,
) -> Result<SuiteOutcome> {
  let mut builder = rayon::ThreadPoolBuilder::new();
  if let Some(w) = workers {
    builder = builder.num_threads(w.max(1));
  }
  let pool = builder.build().context("building the worker pool")?;
  pool.install(|| run_suite(cfg))
}

pub fn rows_to_csv(rows: &[Row]) -> Result<Vec<u8>> {
  let mut w = csv::WriterBuilder::new()
    .has_headers(false)
    .from_writer(Vec::new());
  w.write_record(CSV_COLUMNS)?;
  for r in rows {
    w.serialize(r)?;
  }
  Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
}

/// Writes the instance report and the summary; returns their paths.
pub fn write_outputs(
  outcome: &SuiteOutcome,
  dir: &Path,
  cfg: &ExperimentConfig,
  format: Format,
) -> Result<(PathBuf, PathBuf)> {
  std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
  let report = match format {
    Format::Csv => dir.join(&cfg.output.csv),
    Format::Json => dir.join(Path::new(&cfg.output.csv).with_extension("json")),
  };
  let bytes = match format {
    Format::Csv => rows_to_csv(&outcome.rows)?,
    Format::Json => {
      let mut v = serde_json::to_vec_pretty(&outcome.rows)?;
      v.push(b'\n');
      v
    }
  };
  std::fs::write(&report, bytes).with_context(|| format!("writing {}", report.display()))?;
  let summary = dir.join(&cfg.output.json);
  let mut v = serde_json::to_vec_pretty(&outcome.summary)?;
  v.push(b'\n');
  std::fs::write(&summary, v).with_context(|| format!("writing {}", summary.display()))?;
  Ok((report, summary))
}

/// Leaf ids and constants of every calibrated check in the summary.
pub fn frozen_constants(summary: &Summary) -> BTreeMap<String, f64> {
  summary
    .lemmas
    .iter()
    .flat_map(|l| l.constants.0.clone())
    .collect()
}
