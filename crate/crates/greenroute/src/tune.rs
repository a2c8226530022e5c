//! Brute-force optimal labels and the two-phase refinement climb.
//!
//! An [`EeEvaluator`] wraps a pure `(umin, umax) -> energy saving` function,
//! memoizes repeated points, and counts how many times the underlying
//! routing actually runs. [`refine`] walks a predicted pair to a local
//! optimum: phase one climbs `umin` toward the better neighbor until the
//! saving stops changing, phase two walks `umax` down while the saving does
//! not drop. [`brute_force_optimal`] sweeps the whole grid and is both the
//! training-label source and the speedup baseline (`speedup = 100 / N`).

use std::collections::HashMap;
use std::collections::HashSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::eeroute::{RouteError, RoutePlan, UtilityInterval};
use crate::netmodel::Topology;
use crate::par;
use crate::traffic::{FeatureVector, TrafficSnapshot};

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("invalid refine input: {0}")]
    InvalidInput(String),
    #[error("no convergence within {0} moves; pathological landscape")]
    IterationCap(usize),
    #[error(transparent)]
    Route(#[from] RouteError),
}

/// Pure energy-saving landscape with memoization and an evaluation counter.
/// The counter increments once per distinct point, i.e. once per actual run
/// of the underlying routing; cache hits are free.
pub struct EeEvaluator {
    f: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    cache: Mutex<HashMap<(u64, u64), f64>>,
    count: AtomicU64,
}

impl EeEvaluator {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        EeEvaluator {
            f: Box::new(f),
            cache: Mutex::new(HashMap::new()),
            count: AtomicU64::new(0),
        }
    }

    /// Evaluator closed over a fixed `(topology, snapshot, k)`: candidate
    /// paths are enumerated once, each evaluation routes the planned flows
    /// at the requested interval and returns the energy saving.
    pub fn for_snapshot(
        t: &Topology,
        s: &TrafficSnapshot,
        k: usize,
    ) -> Result<Self, TuneError> {
        let plan = RoutePlan::prepare(t, s, k)?;
        Ok(Self::new(move |umin, umax| {
            let u = UtilityInterval { umin, umax };
            plan.route(u).energy_saving
        }))
    }

    pub fn evaluate(&self, umin: f64, umax: f64) -> f64 {
        let key = (umin.to_bits(), umax.to_bits());
        if let Some(v) = self.cache.lock().unwrap().get(&key) {
            return *v;
        }
        let v = (self.f)(umin, umax);
        self.count.fetch_add(1, Ordering::Relaxed);
        self.cache.lock().unwrap().insert(key, v);
        v
    }

    /// Evaluation without the memo lock, for sweeps over known-distinct
    /// points. Still counted.
    fn evaluate_uncached(&self, umin: f64, umax: f64) -> f64 {
        let v = (self.f)(umin, umax);
        self.count.fetch_add(1, Ordering::Relaxed);
        v
    }

    /// Total underlying evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// A tuned `(umin, umax)` pair, its energy saving, the number of underlying
/// evaluations `N`, and the speedup `100 / N` relative to the 0..100 sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult {
    pub umin: f64,
    pub umax: f64,
    pub ee: f64,
    pub evaluations: u64,
    pub speedup: f64,
}

const MOVE_CAP: usize = 1000;

/// Improves a predicted `(umin0, umax0)` pair in two phases.
///
/// Phase one repeatedly evaluates the saving at `umin0` and both neighbors
/// `umin0 ± alpha`, moves toward the larger neighbor, and stops once the
/// saving changes by at most `beta`. Probes are clamped to `[0, umax0]`, so a
/// boundary direction can never look improving. A revisited `umin` value
/// would start a cycle; the walk then terminates on the best point it has
/// evaluated. Phase two lowers `umax0` by `alpha` while the saving does not
/// drop, never crossing below `umin`.
pub fn refine(
    ee: &EeEvaluator,
    umin0: f64,
    umax0: f64,
    alpha: f64,
    beta: f64,
) -> Result<TuneResult, TuneError> {
    if !(0.0 <= umin0 && umin0 <= umax0 && umax0 <= 100.0) {
        return Err(TuneError::InvalidInput(format!(
            "start ({umin0}, {umax0}) violates 0 <= umin <= umax <= 100"
        )));
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(TuneError::InvalidInput(format!("alpha {alpha} must be > 0")));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(TuneError::InvalidInput(format!("beta {beta} must be >= 0")));
    }
    let start_count = ee.evaluations();
    let umax = umax0;
    let mut umin = umin0;
    let ee_start = ee.evaluate(umin, umax);

    let mut visited: HashSet<u64> = HashSet::new();
    visited.insert(umin.to_bits());
    let mut best = (umin, ee_start);
    let mut moves = 0usize;
    let track = |pt: f64, value: f64, best: &mut (f64, f64)| {
        if value > best.1 {
            *best = (pt, value);
        }
    };

    loop {
        let ee_curr = ee.evaluate(umin, umax);
        track(umin, ee_curr, &mut best);
        let prev_pt = (umin - alpha).max(0.0);
        let next_pt = (umin + alpha).min(umax);
        let ee_prev = ee.evaluate(prev_pt, umax);
        track(prev_pt, ee_prev, &mut best);
        let ee_next = ee.evaluate(next_pt, umax);
        track(next_pt, ee_next, &mut best);

        let cand = if ee_prev < ee_next { next_pt } else { prev_pt };
        let ee_new = ee.evaluate(cand, umax);
        track(cand, ee_new, &mut best);

        moves += 1;
        if moves > MOVE_CAP {
            return Err(TuneError::IterationCap(MOVE_CAP));
        }
        if (ee_curr - ee_new).abs() <= beta {
            umin = cand;
            break;
        }
        if !visited.insert(cand.to_bits()) {
            // Cycle: the walk has been here before. Settle on the best
            // umin seen so far instead of oscillating forever.
            umin = best.0;
            break;
        }
        umin = cand;
    }
    // The terminating move may have stepped slightly downhill; never hand
    // back a pair worse than the start beyond the tolerance.
    if ee.evaluate(umin, umax) < ee_start - beta {
        umin = best.0;
    }

    let mut umax_cur = umax;
    let mut ee_curr = ee.evaluate(umin, umax_cur);
    loop {
        let down = umax_cur - alpha;
        if down < umin || down < 0.0 {
            break;
        }
        let ee_down = ee.evaluate(umin, down);
        if ee_down < ee_curr {
            break;
        }
        umax_cur = down;
        ee_curr = ee_down;
        moves += 1;
        if moves > MOVE_CAP {
            return Err(TuneError::IterationCap(MOVE_CAP));
        }
    }

    let evaluations = (ee.evaluations() - start_count).max(1);
    Ok(TuneResult {
        umin,
        umax: umax_cur,
        ee: ee_curr,
        evaluations,
        speedup: 100.0 / evaluations as f64,
    })
}

/// Exhaustively evaluates `{0, step, ..., 100}^2` restricted to
/// `umin <= umax` and returns the maximizer, ties broken toward the smallest
/// `umin`, then the smallest `umax`. Grid points evaluate independently (in
/// parallel when enabled); the tie-break is applied in a sequential pass, so
/// the result is order-independent.
pub fn brute_force_optimal(ee: &EeEvaluator, step: f64) -> Result<TuneResult, TuneError> {
    if !step.is_finite() || step <= 0.0 {
        return Err(TuneError::InvalidInput(format!("step {step} must be > 0")));
    }
    let start_count = ee.evaluations();
    let mut axis = Vec::new();
    let mut i = 0u64;
    loop {
        let v = i as f64 * step;
        if v >= 100.0 {
            break;
        }
        axis.push(v);
        i += 1;
    }
    axis.push(100.0);

    let mut pairs = Vec::with_capacity(axis.len() * (axis.len() + 1) / 2);
    for (i, &umin) in axis.iter().enumerate() {
        for &umax in &axis[i..] {
            pairs.push((umin, umax));
        }
    }
    let values = par::map_slice(&pairs, |&(umin, umax)| ee.evaluate_uncached(umin, umax));

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for (&(umin, umax), &value) in pairs.iter().zip(&values) {
        if value > best.0 {
            best = (value, umin, umax);
        }
    }
    let evaluations = (ee.evaluations() - start_count).max(1);
    Ok(TuneResult {
        umin: best.1,
        umax: best.2,
        ee: best.0,
        evaluations,
        speedup: 100.0 / evaluations as f64,
    })
}

/// A snapshot's feature vector with its brute-force-optimal parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSnapshot {
    pub timestamp: String,
    pub features: FeatureVector,
    pub umin: f64,
    pub umax: f64,
    pub ee: f64,
}

/// Labels each snapshot with the brute-force-optimal `(umin, umax)` pair and
/// its feature vector. Snapshots run independently and in parallel when
/// enabled; the output order matches the input order.
pub fn label_snapshots(
    t: &Topology,
    snapshots: &[TrafficSnapshot],
    step: f64,
    k: usize,
) -> Result<Vec<LabeledSnapshot>, TuneError> {
    let labeled: Vec<Result<LabeledSnapshot, TuneError>> = par::map_slice(snapshots, |s| {
        let ee = EeEvaluator::for_snapshot(t, s, k)?;
        let best = brute_force_optimal(&ee, step)?;
        Ok(LabeledSnapshot {
            timestamp: s.timestamp.clone(),
            features: s.to_feature_vector(t),
            umin: best.umin,
            umax: best.umax,
            ee: best.ee,
        })
    });
    labeled.into_iter().collect()
}
