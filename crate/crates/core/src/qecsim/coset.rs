//! Exhaustive minimum-weight coset decoding for small codes, used to
//! check the matching decoder.

use super::layout::{StabilizerKind, SurfaceCodeLayout};
use super::QecError;

/// Largest data-qubit count the exhaustive table is built for.
const MAX_DATA: usize = 16;

/// For every syndrome and logical class of data-qubit errors of one type,
/// the smallest total weight of an error in that class.
#[derive(Debug, Clone)]
pub struct CosetDecoder {
    /// `table[sector][syndrome] = [weight without flip, weight with flip]`
    table: [Vec<[f64; 2]>; 2],
}

/// Per-class minimum weights for one syndrome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosetWeights {
    pub keep: f64,
    pub flip: f64,
}

impl CosetWeights {
    /// `Some(flip)` when one class is strictly lighter.
    pub fn decision(&self) -> Option<bool> {
        if self.keep < self.flip {
            Some(false)
        } else if self.flip < self.keep {
            Some(true)
        } else {
            None
        }
    }

    pub fn minimum(&self) -> f64 {
        self.keep.min(self.flip)
    }

    pub fn class(&self, flip: bool) -> f64 {
        if flip {
            self.flip
        } else {
            self.keep
        }
    }
}

impl CosetDecoder {
    /// `qubit_weights[i]` is the cost of an error on data qubit `i`.
    pub fn new(layout: &SurfaceCodeLayout, qubit_weights: &[f64]) -> Result<Self, QecError> {
        let n = layout.data_count();
        if n > MAX_DATA || qubit_weights.len() != n {
            return Err(QecError::Table(format!("exhaustive decoding needs at most {MAX_DATA} data qubits")));
        }
        let build = |kind: StabilizerKind, logical: &[usize]| {
            let checks = layout.checks(kind);
            let mut table = vec![[f64::INFINITY; 2]; 1 << checks.len()];
            for e in 0usize..1 << n {
                let syndrome = checks.iter().enumerate().fold(0usize, |acc, (i, c)| {
                    let parity = c.support.iter().filter(|&&q| e >> q & 1 == 1).count() % 2;
                    acc | parity << i
                });
                let flip = logical.iter().filter(|&&q| e >> q & 1 == 1).count() % 2;
                let w: f64 = (0..n).filter(|&q| e >> q & 1 == 1).map(|q| qubit_weights[q]).sum();
                let slot = &mut table[syndrome][flip];
                *slot = slot.min(w);
            }
            table
        };
        // Sector 0: X checks see Z errors, read against the logical X column.
        Ok(Self {
            table: [build(StabilizerKind::X, layout.logical_x()), build(StabilizerKind::Z, layout.logical_z())],
        })
    }

    /// Class weights for a syndrome given as a bit mask over the sector's checks.
    pub fn weights(&self, sector: usize, syndrome: usize) -> CosetWeights {
        let [keep, flip] = self.table[sector][syndrome];
        CosetWeights { keep, flip }
    }
}
