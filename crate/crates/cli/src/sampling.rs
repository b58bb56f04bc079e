//! Seeded randomness. Every draw comes from a ChaCha stream derived from the
//! config seed, one stream per (check, phase).

use arnold_core::shear::{GoodTriple, Piece, Reparam, StepProbe};
use arnold_core::CirclePoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SuiteRng = ChaCha8Rng;

pub const PHASE_TRAIN: u64 = 0;
pub const PHASE_TEST: u64 = 1;
pub const PHASE_AUX: u64 = 2;

pub fn stream(seed: u64, check: u64, phase: u64) -> SuiteRng {
  let mut rng = ChaCha8Rng::seed_from_u64(seed);
  rng.set_stream(check * 16 + phase);
  rng
}

/// Uniform point of the circle at full fixed-point resolution.
pub fn circle_point(rng: &mut SuiteRng) -> CirclePoint {
  CirclePoint::from_raw(rng.gen::<u128>())
}

/// Log-uniform integer in `[lo, hi]`.
pub fn log_uniform(rng: &mut SuiteRng, lo: u64, hi: u64) -> u64 {
  if hi <= lo {
    return lo;
  }
  let (a, b) = ((lo as f64).ln(), (hi as f64 + 1.0).ln());
  let v = rng.gen_range(a..b).exp().floor() as u64;
  v.clamp(lo, hi)
}

/// Step function with up to 11 knots in `[-20, 140]` and values in `(0, 1]`.
pub fn step_probe(rng: &mut SuiteRng) -> StepProbe {
  let count = rng.gen_range(1..12);
  let mut knots: Vec<f64> = (0..count).map(|_| rng.gen_range(-20.0..140.0)).collect();
  knots.sort_by(f64::total_cmp);
  knots.dedup();
  let values = (0..=knots.len())
    .map(|_| rng.gen_range(0.001..=1.0))
    .collect();
  StepProbe::new(knots, values).expect("sorted distinct knots")
}

/// Piecewise translation of `[M, M + L]`: cells with small gaps in between,
/// neighbouring shifts differing by less than `xi`, first shift within `xi L`.
pub fn pal_triple(rng: &mut SuiteRng) -> GoodTriple {
  let m = rng.gen_range(0.0..50.0);
  let l = rng.gen_range(5.0..60.0);
  let d = rng.gen_range(0.05..0.95);
  let xi = rng.gen_range(0.001..0.2);
  let count = rng.gen_range(1usize..40).min((l / d) as usize).max(1);
  let mut cuts: Vec<f64> = (0..count - 1).map(|_| rng.gen_range(0.0..l)).collect();
  cuts.sort_by(f64::total_cmp);
  let gap = 0.9 * xi * l / count as f64;
  let mut pieces = Vec::new();
  let mut shift = rng.gen_range(-1.0..1.0) * xi * l;
  let mut lo = 0.0;
  for k in 0..count {
    let hi = if k + 1 < count { cuts[k] } else { l };
    let g = gap * rng.gen::<f64>();
    let step = rng.gen_range(-1.0..1.0) * 0.999 * xi;
    if hi - lo > g {
      pieces.push(Piece {
        start: m + lo + g,
        end: m + hi,
        shift,
      });
      shift += step;
    }
    lo = hi;
  }
  let gap_shift = rng.gen_range(-2.0..2.0) * l;
  GoodTriple {
    m,
    l,
    d,
    xi,
    reparam: Reparam::Pal { pieces, gap_shift },
  }
}

/// Piecewise-linear reparametrisation with slopes in `(1 - xi, 1 + xi)`; the
/// starting offset is drawn so that both endpoints stay within `xi L`.
pub fn sal_triple(rng: &mut SuiteRng) -> GoodTriple {
  let m = rng.gen_range(0.0..50.0);
  let l = rng.gen_range(1.0..60.0);
  let d = rng.gen_range(0.05..0.95);
  let xi = rng.gen_range(0.001..0.2);
  let n = rng.gen_range(2usize..200);
  let h = l / (n - 1) as f64;
  let steps: Vec<f64> = (1..n)
    .map(|_| (1.0 + rng.gen_range(-1.0..1.0) * 0.99 * xi) * h)
    .collect();
  let drift: f64 = steps.iter().map(|s| s - h).sum();
  let room = 0.99 * xi * l;
  let (lo, hi) = ((-room).max(-room - drift), room.min(room - drift));
  let mut samples = vec![m + rng.gen_range(lo..=hi)];
  for s in steps {
    let last = *samples.last().unwrap();
    samples.push(last + s);
  }
  GoodTriple {
    m,
    l,
    d,
    xi,
    reparam: Reparam::Sal { samples },
  }
}
