//! Multi-start zeroth-order ascent of vol_k Q(S) over tight frames.
//!
//! Each step perturbs the current tight frame into an arbitrary frame S̃ and
//! retracts it onto the tight frames with the whitening map B_S̃ = A_S̃^{-1/2}.
//! A proposal is kept only if it increases the section volume.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{c_cube, extremal_frame, vaaler_lower};
use crate::conditions::{verify_section, ConditionsReport};
use crate::error::{Error, Result};
use crate::frame::{random_tight_frame, whiten, Frame, TightFrame};
use crate::linalg::{dot, norm};
use crate::polytope::{build_section, section_volume};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n: usize,
    pub k: usize,
    /// Number of cold restarts from random tight frames.
    pub restarts: usize,
    pub initial_step: f64,
    pub decay: f64,
    pub min_step: f64,
    pub seed: u64,
    pub max_iterations: usize,
    /// Minimum relative volume gain for a proposal to be accepted.
    pub improvement_tol: f64,
    /// Consecutive rejections before the step shrinks.
    pub patience: usize,
    /// Also start once from the balanced affine-cube frame.
    pub warm_start: bool,
    /// Generators whose directions agree to this (up to sign) are snapped
    /// onto exact duplicates when an ascent ends; 0 disables.
    pub snap: f64,
    pub tolerances: Tolerances,
}

impl OptimizerConfig {
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            restarts: 32,
            initial_step: 0.3,
            decay: 0.7,
            min_step: 1e-7,
            seed: 0,
            max_iterations: 2000,
            improvement_tol: 1e-13,
            patience: 25,
            warm_start: true,
            snap: 1e-6,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || self.n <= self.k {
            return Err(Error::Invalid(format!(
                "optimizer needs n > k ≥ 2 (n = {}, k = {})",
                self.n, self.k
            )));
        }
        let positive = [self.initial_step, self.min_step, self.improvement_tol];
        if positive.iter().any(|x| !(*x > 0.0)) || !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::Invalid("step sizes and tolerances must be positive, decay in (0, 1)".into()));
        }
        if !(self.snap >= 0.0) {
            return Err(Error::Invalid("snap must be non-negative".into()));
        }
        if self.patience == 0 || self.max_iterations == 0 {
            return Err(Error::Invalid("patience and max_iterations must be positive".into()));
        }
        if self.restarts == 0 && !self.warm_start {
            return Err(Error::Invalid("nothing to run: no restarts and no warm start".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Warm,
    Cold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub index: usize,
    pub kind: StartKind,
    pub frame: TightFrame,
    pub start_volume: f64,
    pub volume: f64,
    pub iterations: usize,
    pub accepted: usize,
    /// Initial point followed by every accepted step.
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    pub config: OptimizerConfig,
    pub best: TightFrame,
    pub best_volume: f64,
    pub best_restart: usize,
    /// 2^k·C(n, k).
    pub conjectured_max: f64,
    /// Set when the best volume beats the affine-cube volume by more than 1e-4.
    pub exceeds_conjecture: bool,
    pub conditions: ConditionsReport,
    pub restarts: Vec<RestartOutcome>,
}

impl OptimizeResult {
    pub fn cold_best(&self) -> Option<&RestartOutcome> {
        self.restarts
            .iter()
            .filter(|r| r.kind == StartKind::Cold)
            .max_by(|a, b| a.volume.total_cmp(&b.volume))
    }
}

#[derive(Debug, Clone, Copy)]
enum Proposal {
    JitterAll,
    JitterOne,
    Coordinate,
    ScaleOne,
    TowardOther,
    ToZero,
    ToOther,
}

impl Proposal {
    fn draw<R: Rng>(rng: &mut R) -> Self {
        match rng.random_range(0..100) {
            0..35 => Proposal::JitterAll,
            35..60 => Proposal::JitterOne,
            60..72 => Proposal::Coordinate,
            72..84 => Proposal::ScaleOne,
            84..94 => Proposal::TowardOther,
            94..97 => Proposal::ToZero,
            _ => Proposal::ToOther,
        }
    }
}

fn propose<R: Rng>(s: &TightFrame, step: f64, rng: &mut R) -> Vec<f64> {
    let (n, k) = (s.n(), s.k());
    let mut data = s.as_flat().to_vec();
    let scale = step / (n as f64).sqrt();
    let i = rng.random_range(0..n);
    match Proposal::draw(rng) {
        Proposal::JitterAll => data
            .iter_mut()
            .for_each(|x| *x += scale * rng.sample::<f64, _>(StandardNormal)),
        Proposal::JitterOne => data[i * k..(i + 1) * k]
            .iter_mut()
            .for_each(|x| *x += scale * rng.sample::<f64, _>(StandardNormal)),
        Proposal::Coordinate => {
            let j = rng.random_range(0..k);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            data[i * k + j] += sign * scale;
        }
        Proposal::ScaleOne => {
            let f = (step * rng.sample::<f64, _>(StandardNormal)).exp();
            data[i * k..(i + 1) * k].iter_mut().for_each(|x| *x *= f);
        }
        Proposal::TowardOther | Proposal::ToOther => {
            let j = (i + rng.random_range(1..n)) % n;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let t = if matches!(Proposal::draw(rng), Proposal::ToOther) { 1.0 } else { step.min(1.0) };
            for c in 0..k {
                let target = sign * data[j * k + c];
                data[i * k + c] += t * (target - data[i * k + c]);
            }
        }
        Proposal::ToZero => data[i * k..(i + 1) * k].fill(0.0),
    }
    data
}

fn retract(k: usize, data: Vec<f64>, tol: &Tolerances) -> Option<(TightFrame, f64)> {
    let frame = Frame::from_flat(k, data, tol).ok()?;
    let (_, tight) = whiten(&frame, tol).ok()?;
    let vol = section_volume(&tight, tol).ok()?;
    vol.is_finite().then_some((tight, vol))
}

/// Largest relative volume loss accepted when snapping near-duplicates.
const SNAP_LOSS: f64 = 1e-7;

/// Snaps generators that are parallel to within `snap` onto exact ±copies of
/// the earliest such generator, keeping their lengths. None if nothing moved.
fn snap_duplicates(frame: &Frame, snap: f64) -> Option<Vec<f64>> {
    let mut vs = frame.to_vecs();
    let mut moved = false;
    for j in 1..vs.len() {
        let lj = norm(&vs[j]);
        if lj == 0.0 {
            continue;
        }
        for i in 0..j {
            let li = norm(&vs[i]);
            if li == 0.0 {
                continue;
            }
            let c = dot(&vs[i], &vs[j]) / (li * lj);
            // |v̂_i ∓ v̂_j|² = 2(1 ∓ c)
            if 2.0 * (1.0 - c.abs()) <= snap * snap {
                let s = c.signum() * lj / li;
                let target: Vec<f64> = vs[i].iter().map(|x| s * x).collect();
                moved |= target != vs[j];
                vs[j] = target;
                break;
            }
        }
    }
    moved.then(|| vs.into_iter().flatten().collect())
}

/// One ascent run from `start`. Ascents tend to stall a hair away from
/// frames with repeated generators, so near-duplicates are snapped at the
/// end when that costs at most a 1e-7 relative loss.
pub fn ascend<R: Rng>(start: &TightFrame, config: &OptimizerConfig, rng: &mut R) -> Result<RestartOutcome> {
    let tol = &config.tolerances;
    let k = start.k();
    let mut current = start.clone();
    let mut volume = section_volume(&current, tol)?;
    let start_volume = volume;
    let mut trace = vec![TracePoint { iteration: 0, volume }];
    let mut step = config.initial_step;
    let mut misses = 0;
    let mut iterations = 0;
    let mut accepted = 0;
    while iterations < config.max_iterations && step >= config.min_step {
        iterations += 1;
        let proposal = propose(&current, step, rng);
        match retract(k, proposal, tol) {
            Some((next, v)) if v > volume * (1.0 + config.improvement_tol) => {
                current = next;
                volume = v;
                accepted += 1;
                misses = 0;
                step = (step / config.decay.sqrt()).min(config.initial_step);
                trace.push(TracePoint { iteration: iterations, volume });
            }
            _ => {
                misses += 1;
                if misses >= config.patience {
                    step *= config.decay;
                    misses = 0;
                }
            }
        }
    }
    if config.snap > 0.0 {
        if let Some((snapped, v)) =
            snap_duplicates(&current, config.snap).and_then(|d| retract(k, d, tol))
        {
            if v >= volume * (1.0 - SNAP_LOSS) {
                current = snapped;
                volume = v;
            }
        }
    }
    Ok(RestartOutcome {
        index: 0,
        kind: StartKind::Cold,
        frame: current,
        start_volume,
        volume,
        iterations,
        accepted,
        trace,
    })
}

fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Lexicographic order on Gram matrices, used to break exact volume ties.
fn gram_cmp(a: &Frame, b: &Frame) -> Ordering {
    let (ga, gb) = (a.gram(), b.gram());
    ga.iter()
        .zip(gb.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Runs the warm start (index 0, if enabled) and `restarts` cold starts in
/// parallel and returns the best section found. Deterministic given the seed.
pub fn maximize(config: &OptimizerConfig) -> Result<OptimizeResult> {
    config.validate()?;
    let tol = &config.tolerances;
    let (n, k) = (config.n, config.k);
    let mut starts: Vec<(usize, StartKind)> = Vec::new();
    if config.warm_start {
        starts.push((0, StartKind::Warm));
    }
    starts.extend((1..=config.restarts).map(|i| (i, StartKind::Cold)));

    let outcomes: Vec<RestartOutcome> = starts
        .par_iter()
        .map(|&(index, kind)| {
            let mut rng = restart_rng(config.seed, index);
            let start = match kind {
                StartKind::Warm => extremal_frame(n, k, None, None, tol)?,
                StartKind::Cold => random_tight_frame(&mut rng, n, k),
            };
            let mut out = ascend(&start, config, &mut rng)?;
            out.index = index;
            out.kind = kind;
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let winner = outcomes
        .iter()
        .reduce(|best, r| match r.volume.total_cmp(&best.volume) {
            Ordering::Greater => r,
            Ordering::Equal if gram_cmp(&r.frame, &best.frame).is_lt() => r,
            _ => best,
        })
        .expect("at least one start");
    let section = build_section(&winner.frame, tol)?;
    let conditions = verify_section(&winner.frame, &section, tol);
    let conjectured_max = vaaler_lower(k) * c_cube(n, k);
    let exceeds_conjecture = winner.volume > conjectured_max + 1e-4;
    if exceeds_conjecture {
        log::warn!(
            "n = {n}, k = {k}: found volume {} above the affine-cube value {conjectured_max}",
            winner.volume
        );
    }
    Ok(OptimizeResult {
        config: config.clone(),
        best: winner.frame.clone(),
        best_volume: winner.volume,
        best_restart: winner.index,
        conjectured_max,
        exceeds_conjecture,
        conditions,
        restarts: outcomes,
    })
}

/// 1/√det A_S̃ − vol Q(S̃)/vol Q(S). Nonnegative for every S̃ exactly when S
/// is a global maximizer.
pub fn criterion_gap(s: &TightFrame, s_tilde: &Frame, tol: &Tolerances) -> Result<f64> {
    let det = s_tilde.operator().det();
    if !(det > 0.0) {
        return Err(Error::NotAFrame("S̃ has a singular frame operator".into()));
    }
    let ratio = section_volume(s_tilde, tol)? / section_volume(s, tol)?;
    Ok(1.0 / det.sqrt() - ratio)
}

/// Smallest criterion gap over `samples` random perturbations S + σG.
pub fn probe_criterion<R: Rng>(
    s: &TightFrame,
    samples: usize,
    sigma: f64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let data: Vec<f64> = s
            .as_flat()
            .iter()
            .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let Ok(frame) = Frame::from_flat(s.k(), data, tol) else {
            continue;
        };
        worst = worst.min(criterion_gap(s, &frame, tol)?);
    }
    Ok(worst)
}
