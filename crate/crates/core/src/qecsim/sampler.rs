//! Shot sampling from the detector error model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dem::DetectorErrorModel;

/// Detection events and true observable flips of one shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    pub detectors: [Vec<u32>; 2],
    pub observables: [bool; 2],
}

/// Per-shot RNG: stream `shot` of the generator seeded with `seed`.
pub(crate) fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

pub(crate) struct Scratch {
    bits: [Vec<u64>; 2],
}

impl Scratch {
    pub fn new(dem: &DetectorErrorModel) -> Self {
        let c = dem.circuit();
        let words = |k| c.detector_count(k).div_ceil(64);
        Self { bits: [vec![0; words(super::StabilizerKind::X)], vec![0; words(super::StabilizerKind::Z)]] }
    }
}

/// Fires each mechanism independently, skipping ahead geometrically
/// between firings within groups of equal probability.
pub(crate) fn sample_shot(dem: &DetectorErrorModel, rng: &mut ChaCha8Rng, scratch: &mut Scratch) -> ShotRecord {
    let mut observables = [false; 2];
    for group in &dem.groups {
        if group.p <= 0.0 {
            continue;
        }
        let log_q = (1.0 - group.p).ln();
        let len = group.mechanisms.len();
        let mut pos = 0usize;
        loop {
            if group.p < 1.0 {
                let u: f64 = 1.0 - rng.random::<f64>();
                let skip = (u.ln() / log_q).floor();
                if skip >= (len - pos) as f64 {
                    break;
                }
                pos += skip as usize;
            }
            if pos >= len {
                break;
            }
            let mech = &group.mechanisms[pos];
            let total = *mech.cumulative.last().expect("outcomes");
            let r = rng.random::<f64>() * total;
            let idx = mech.cumulative.partition_point(|&c| c <= r).min(mech.effects.len() - 1);
            let effect = &mech.effects[idx];
            for s in 0..2 {
                for &d in &effect.detectors[s] {
                    scratch.bits[s][d as usize / 64] ^= 1 << (d % 64);
                }
                observables[s] ^= effect.observables[s];
            }
            pos += 1;
        }
    }
    let mut detectors = [Vec::new(), Vec::new()];
    for s in 0..2 {
        for (w, word) in scratch.bits[s].iter_mut().enumerate() {
            let mut x = *word;
            while x != 0 {
                let b = x.trailing_zeros();
                detectors[s].push(w as u32 * 64 + b);
                x &= x - 1;
            }
            *word = 0;
        }
    }
    ShotRecord { detectors, observables }
}

/// Samples `shots` records; shot `i` always uses RNG stream `i`.
pub fn simulate_memory(dem: &DetectorErrorModel, shots: usize, seed: u64) -> Vec<ShotRecord> {
    (0..shots as u64)
        .into_par_iter()
        .map_init(|| Scratch::new(dem), |scratch, shot| sample_shot(dem, &mut shot_rng(seed, shot), scratch))
        .collect()
}
