//! Minimum-weight perfect matching decoder on the detector graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::dem::{DetectorErrorModel, GraphEdge};
use super::matching::max_weight_matching;

/// Converts path lengths to integers for the exact matcher.
const WEIGHT_SCALE: f64 = 1e6;

/// Outcome of decoding one sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorDecoding {
    /// Whether the chosen correction flips the sector's observable.
    pub flip: bool,
    /// Matched defect pairs; `None` marks a match to the boundary.
    pub pairs: Vec<(u32, Option<u32>)>,
}

#[derive(Debug, Clone)]
struct SectorGraph {
    n: usize,
    /// `(neighbour or n for the boundary, weight, flips observable)`
    adjacency: Vec<Vec<(usize, f64, bool)>>,
    /// Row-major `n x (n + 1)`; column `n` is the boundary.
    dist: Vec<f64>,
    parity: Vec<bool>,
    pred: Vec<u32>,
}

impl SectorGraph {
    fn new(n: usize, edges: &[GraphEdge]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for e in edges {
            let w = -e.p.ln();
            let a = e.a as usize;
            match e.b {
                Some(b) => {
                    adjacency[a].push((b as usize, w, e.flips_observable));
                    adjacency[b as usize].push((a, w, e.flips_observable));
                }
                None => adjacency[a].push((n, w, e.flips_observable)),
            }
        }
        let width = n + 1;
        let mut dist = vec![f64::INFINITY; n * width];
        let mut parity = vec![false; n * width];
        let mut pred = vec![u32::MAX; n * width];
        for src in 0..n {
            let row = src * width;
            let mut heap = BinaryHeap::new();
            dist[row + src] = 0.0;
            heap.push((Reverse(OrdF64(0.0)), src));
            while let Some((Reverse(OrdF64(d)), u)) = heap.pop() {
                if d > dist[row + u] || u == n {
                    continue;
                }
                for &(v, w, obs) in &adjacency[u] {
                    let nd = d + w;
                    if nd < dist[row + v] {
                        dist[row + v] = nd;
                        parity[row + v] = parity[row + u] ^ obs;
                        pred[row + v] = u as u32;
                        heap.push((Reverse(OrdF64(nd)), v));
                    }
                }
            }
        }
        Self { n, adjacency, dist, parity, pred }
    }

    fn at(&self, src: usize, dst: usize) -> usize {
        src * (self.n + 1) + dst
    }

    fn decode(&self, defects: &[u32]) -> SectorDecoding {
        let k = defects.len();
        if k == 0 {
            return SectorDecoding { flip: false, pairs: Vec::new() };
        }
        let boundary: Vec<f64> = defects.iter().map(|&d| self.dist[self.at(d as usize, self.n)]).collect();
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let dij = self.dist[self.at(defects[i] as usize, defects[j] as usize)];
                if !dij.is_finite() {
                    continue;
                }
                let (bi, bj) = (boundary[i].min(1e12), boundary[j].min(1e12));
                let gain = ((bi + bj - dij) * WEIGHT_SCALE).round();
                if gain > 0.0 {
                    edges.push((i, j, gain as i64));
                }
            }
        }
        let mate = max_weight_matching(k, &edges);
        let mut flip = false;
        let mut pairs = Vec::new();
        for i in 0..k {
            match mate[i] {
                Some(j) if j > i => {
                    flip ^= self.parity[self.at(defects[i] as usize, defects[j] as usize)];
                    pairs.push((defects[i], Some(defects[j])));
                }
                Some(_) => {}
                None => {
                    flip ^= self.parity[self.at(defects[i] as usize, self.n)];
                    pairs.push((defects[i], None));
                }
            }
        }
        SectorDecoding { flip, pairs }
    }

    /// Graph edges along the shortest path from `src` to `dst` (or the boundary).
    fn path(&self, src: u32, dst: Option<u32>) -> Vec<(u32, Option<u32>)> {
        let target = dst.map_or(self.n, |d| d as usize);
        let src = src as usize;
        let mut out = Vec::new();
        let mut cur = target;
        while cur != src {
            let prev = self.pred[self.at(src, cur)];
            if prev == u32::MAX {
                break;
            }
            out.push((prev, (cur != self.n).then_some(cur as u32)));
            cur = prev as usize;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Matching decoder for both sectors of a detector error model. Edge
/// weights are `-ln p`; all-pairs shortest paths are precomputed.
#[derive(Debug, Clone)]
pub struct MatchingDecoder {
    sectors: [SectorGraph; 2],
}

impl MatchingDecoder {
    pub fn new(dem: &DetectorErrorModel) -> Self {
        let circuit = dem.circuit();
        let counts = [
            circuit.detector_count(super::StabilizerKind::X),
            circuit.detector_count(super::StabilizerKind::Z),
        ];
        Self::from_edges(counts, [dem.edges(0), dem.edges(1)])
    }

    /// Decoder over explicit per-sector graphs with `counts` detectors each.
    pub fn from_edges(counts: [usize; 2], edges: [&[GraphEdge]; 2]) -> Self {
        Self { sectors: [SectorGraph::new(counts[0], edges[0]), SectorGraph::new(counts[1], edges[1])] }
    }

    pub fn decode_sector(&self, sector: usize, defects: &[u32]) -> SectorDecoding {
        self.sectors[sector].decode(defects)
    }

    /// Predicted observable flips for both sectors.
    pub fn decode(&self, defects: &[Vec<u32>; 2]) -> [bool; 2] {
        [self.decode_sector(0, &defects[0]).flip, self.decode_sector(1, &defects[1]).flip]
    }

    /// Graph edges making up the correction for a decoding.
    pub fn correction(&self, sector: usize, decoding: &SectorDecoding) -> Vec<(u32, Option<u32>)> {
        decoding.pairs.iter().flat_map(|&(a, b)| self.sectors[sector].path(a, b)).collect()
    }

    /// Shortest-path length between two detectors (or to the boundary).
    pub fn distance(&self, sector: usize, a: u32, b: Option<u32>) -> f64 {
        let g = &self.sectors[sector];
        g.dist[g.at(a as usize, b.map_or(g.n, |x| x as usize))]
    }

    pub fn detector_count(&self, sector: usize) -> usize {
        self.sectors[sector].n
    }

    /// Number of graph edges at a detector (boundary edges included).
    pub fn degree(&self, sector: usize, detector: u32) -> usize {
        self.sectors[sector].adjacency[detector as usize].len()
    }
}
