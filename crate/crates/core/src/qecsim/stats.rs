//! Logical error rates, confidence intervals, sweeps and gain factors.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::MemoryCircuit;
use super::decoder::MatchingDecoder;
use super::dem::DetectorErrorModel;
use super::layout::{build_layout, Schedule};
use super::noise::{build_noise_model, PairMode, ScatterSource};
use super::sampler::{sample_shot, shot_rng, Scratch};
use super::QecError;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;
/// One-sided 95% quantile used when no failure was seen.
const Z95_ONE_SIDED: f64 = 1.6448536269514722;

/// Wilson score interval for `failures` out of `shots`. With no failures
/// the upper end is the one-sided 95% bound.
pub fn wilson_interval(failures: u64, shots: u64) -> (f64, f64) {
    if shots == 0 {
        return (0.0, 1.0);
    }
    let n = shots as f64;
    let p = failures as f64 / n;
    let z = if failures == 0 { Z95_ONE_SIDED } else { Z95 };
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    if failures == 0 {
        (0.0, centre + half)
    } else {
        ((centre - half).max(0.0), (centre + half).min(1.0))
    }
}

/// Physical over logical error rate; infinite when no failure was seen.
pub fn gain_factor(p_ph: f64, p_l: f64) -> f64 {
    if p_l > 0.0 {
        p_ph / p_l
    } else {
        f64::INFINITY
    }
}

/// One memory experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryConfig {
    pub distance: usize,
    /// Defaults to the distance.
    #[serde(default)]
    pub rounds: Option<usize>,
    pub schedule: Schedule,
    pub p_ph: f64,
    pub p_2q: f64,
    pub pair_mode: PairMode,
    pub shots: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub distance: usize,
    pub rounds: usize,
    pub p_ph: f64,
    pub p_2q: f64,
    pub shots: u64,
    pub failures: u64,
    pub p_l: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    /// Wall-clock seconds; not part of any artifact.
    #[serde(skip)]
    pub runtime_s: f64,
}

/// Failure fraction with its Wilson interval.
pub fn logical_error_rate(failures: u64, shots: u64) -> (f64, f64, f64) {
    let p = if shots == 0 { 0.0 } else { failures as f64 / shots as f64 };
    let (lo, hi) = wilson_interval(failures, shots);
    (p, lo, hi)
}

/// Runs `cfg.shots` shots and decodes them; a shot fails when either
/// sector's prediction disagrees with the true observable flip.
pub fn run_memory(cfg: &MemoryConfig, source: &ScatterSource) -> Result<SimResult, QecError> {
    let start = Instant::now();
    if cfg.shots == 0 {
        return Err(QecError::NoShots);
    }
    let rounds = cfg.rounds.unwrap_or(cfg.distance);
    if rounds == 0 {
        return Err(QecError::NoRounds);
    }
    let layout = build_layout(cfg.distance, cfg.schedule)?;
    let noise = build_noise_model(&layout, cfg.p_ph, cfg.p_2q, cfg.pair_mode, source)?;
    let dem = DetectorErrorModel::build(MemoryCircuit::new(layout, rounds), &noise);
    let decoder = MatchingDecoder::new(&dem);
    let failures: u64 = (0..cfg.shots as u64)
        .into_par_iter()
        .map_init(
            || Scratch::new(&dem),
            |scratch, shot| {
                let rec = sample_shot(&dem, &mut shot_rng(cfg.seed, shot), scratch);
                let predicted = decoder.decode(&rec.detectors);
                u64::from(predicted != rec.observables)
            },
        )
        .sum();
    let shots = cfg.shots as u64;
    let (p_l, ci_lo, ci_hi) = logical_error_rate(failures, shots);
    Ok(SimResult {
        distance: cfg.distance,
        rounds,
        p_ph: cfg.p_ph,
        p_2q: cfg.p_2q,
        shots,
        failures,
        p_l,
        ci_lo,
        ci_hi,
        seed: cfg.seed,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

pub type SweepPoint = SimResult;

/// Runs every `(distance, p)` cell with the template's other settings and
/// the same seed. When `p_2q_follows` is set the two-qubit rate tracks
/// `p` (as in the coupled-only threshold study); otherwise the template's
/// `p_2q` is kept.
pub fn threshold_sweep(
    distances: &[usize],
    p_grid: &[f64],
    template: &MemoryConfig,
    p_2q_follows: bool,
    source: &ScatterSource,
) -> Result<Vec<SweepPoint>, QecError> {
    if distances.len() < 2 {
        return Err(QecError::TooFewDistances);
    }
    let mut out = Vec::with_capacity(distances.len() * p_grid.len());
    for &d in distances {
        for &p in p_grid {
            let cfg = MemoryConfig {
                distance: d,
                rounds: template.rounds,
                p_ph: p,
                p_2q: if p_2q_follows { p } else { template.p_2q },
                ..template.clone()
            };
            let r = run_memory(&cfg, source)?;
            log::info!("d={d} p={p:.3e}: {}/{} failures ({:.1}s)", r.failures, r.shots, r.runtime_s);
            out.push(r);
        }
    }
    Ok(out)
}

/// Where the logical-error curves of successive distances cross, found by
/// linear interpolation of `ln p_L` against `ln p` between grid points at
/// which the ordering flips. Returns the median over distance pairs.
pub fn crossing_estimate(points: &[SweepPoint]) -> Option<f64> {
    let mut distances: Vec<usize> = points.iter().map(|p| p.distance).collect();
    distances.sort_unstable();
    distances.dedup();
    let curve = |d: usize| -> Vec<(f64, f64)> {
        let mut c: Vec<(f64, f64)> =
            points.iter().filter(|p| p.distance == d && p.p_l > 0.0).map(|p| (p.p_ph, p.p_l)).collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        c
    };
    let mut crossings = Vec::new();
    for pair in distances.windows(2) {
        let (small, large) = (curve(pair[0]), curve(pair[1]));
        let common: Vec<(f64, f64, f64)> = small
            .iter()
            .filter_map(|&(p, a)| large.iter().find(|&&(q, _)| q == p).map(|&(_, b)| (p, a, b)))
            .collect();
        for w in common.windows(2) {
            let g0 = (w[0].2 / w[0].1).ln();
            let g1 = (w[1].2 / w[1].1).ln();
            if g0 < 0.0 && g1 >= 0.0 {
                let (x0, x1) = (w[0].0.ln(), w[1].0.ln());
                let x = x0 + (x1 - x0) * (-g0) / (g1 - g0);
                crossings.push(x.exp());
                break;
            }
        }
    }
    crate::numeric::median(&crossings)
}
