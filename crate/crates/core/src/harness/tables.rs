//! Row layouts of the CSV artifacts.

use std::path::Path;

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::artifacts::{Artifact, DIGEST_KEY};
use super::HarnessError;
use crate::gatekit::{TrajectorySource, TrajectoryTable};
use crate::oracle::FlipHistogram;
use crate::qecsim::SimResult;

/// Shortest round-trip text for a float, in exponent form when very
/// large or small.
pub(crate) fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e7).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `traj.csv` (t, ion, mode, re_alpha, im_alpha) and `phi.csv`
/// (t, n, m, phi for n < m).
pub fn trajectory_csv(traj: &TrajectoryTable, digest: &str, traj_name: &str, phi_name: &str) -> [Artifact; 2] {
    let alpha = traj.alpha();
    let phi = traj.phi();
    let (n, modes) = (traj.ion_count(), traj.mode_count());
    let mut a_rows = Vec::with_capacity(traj.len() * n * modes);
    let mut p_rows = Vec::with_capacity(traj.len() * n * (n - 1) / 2);
    for (s, &t) in traj.times().iter().enumerate() {
        for ion in 0..n {
            for mode in 0..modes {
                let a = alpha[[s, mode, ion]];
                a_rows.push(vec![num(t), ion.to_string(), mode.to_string(), num(a.re), num(a.im)]);
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                p_rows.push(vec![num(t), a.to_string(), b.to_string(), num(phi[[s, a, b]])]);
            }
        }
    }
    [
        Artifact::csv(traj_name, &["t", "ion", "mode", "re_alpha", "im_alpha"], &a_rows, digest),
        Artifact::csv(phi_name, &["t", "n", "m", "phi"], &p_rows, digest),
    ]
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, HarnessError> {
    let bad = |msg: String| HarnessError::Config(vec![format!("{}: {msg}", path.display())]);
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let found: Vec<String> = r.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    let core: Vec<&str> = found.iter().map(String::as_str).filter(|h| *h != DIGEST_KEY).collect();
    if core != header {
        return Err(bad(format!("expected columns {header:?}, found {found:?}")));
    }
    r.records().collect::<Result<_, _>>().map_err(|e| bad(e.to_string()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T, HarnessError> {
    rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
        HarnessError::Config(vec![format!("{}: bad value in row {:?}", path.display(), rec.position().map(|p| p.line()))])
    })
}

/// Reads a trajectory written by [`trajectory_csv`]. Targets are taken to
/// be the final phases.
pub fn read_trajectory_csv(traj_path: &Path, phi_path: &Path) -> Result<TrajectoryTable, HarnessError> {
    let a_rows = read_rows(traj_path, &["t", "ion", "mode", "re_alpha", "im_alpha"])?;
    let p_rows = read_rows(phi_path, &["t", "n", "m", "phi"])?;
    let mut times: Vec<f64> = Vec::new();
    let (mut n, mut modes) = (0usize, 0usize);
    let mut parsed = Vec::with_capacity(a_rows.len());
    for rec in &a_rows {
        let t: f64 = field(rec, 0, traj_path)?;
        let ion: usize = field(rec, 1, traj_path)?;
        let mode: usize = field(rec, 2, traj_path)?;
        let a = Complex64::new(field(rec, 3, traj_path)?, field(rec, 4, traj_path)?);
        if times.last() != Some(&t) {
            times.push(t);
        }
        n = n.max(ion + 1);
        modes = modes.max(mode + 1);
        parsed.push((times.len() - 1, ion, mode, a));
    }
    let k = times.len();
    if parsed.len() != k * n * modes {
        return Err(HarnessError::Config(vec![format!("{}: incomplete trajectory grid", traj_path.display())]));
    }
    let mut alpha = Array3::zeros((k, modes, n));
    for (s, ion, mode, a) in parsed {
        alpha[[s, mode, ion]] = a;
    }
    let mut phi = Array3::zeros((k, n, n));
    let mut step = 0usize;
    for rec in &p_rows {
        let t: f64 = field(rec, 0, phi_path)?;
        while step < k && times[step] < t {
            step += 1;
        }
        if step >= k || times[step] != t {
            return Err(HarnessError::Config(vec![format!("{}: time {t} not on the trajectory grid", phi_path.display())]));
        }
        let a: usize = field(rec, 1, phi_path)?;
        let b: usize = field(rec, 2, phi_path)?;
        let p: f64 = field(rec, 3, phi_path)?;
        if a >= n || b >= n || a == b {
            return Err(HarnessError::Config(vec![format!("{}: bad ion pair ({a}, {b})", phi_path.display())]));
        }
        phi[[step, a, b]] = p;
        phi[[step, b, a]] = p;
    }
    let targets: Array2<f64> = phi.index_axis(ndarray::Axis(0), k - 1).to_owned();
    Ok(TrajectoryTable::from_parts(TrajectorySource::Loaded, times, alpha, phi, targets, 0.0)?)
}

/// `hist.csv`: one row per flip pattern, then a metadata row whose
/// pattern field reads `leakage=...;shots=...;seed=...`.
pub(crate) fn histogram_csv(name: &str, hist: &FlipHistogram, digest: &str) -> Artifact {
    let mut rows: Vec<Vec<String>> = (0..hist.probabilities.len())
        .map(|mask| {
            vec![
                hist.pattern_label(mask),
                hist.counts[mask].to_string(),
                num(hist.probabilities[mask]),
                num(hist.stderr[mask]),
            ]
        })
        .collect();
    rows.push(vec![
        format!("leakage={};shots={};seed={}", num(hist.leakage), hist.shots, hist.seed),
        String::new(),
        String::new(),
        String::new(),
    ]);
    Artifact::csv(name, &["pattern", "count", "p", "stderr"], &rows, digest)
}

pub(crate) const SWEEP_HEADER: [&str; 8] = ["d", "p_ph", "p_2q", "shots", "failures", "p_l", "ci_lo", "ci_hi"];

pub(crate) fn sweep_row(r: &SimResult) -> Vec<String> {
    vec![
        r.distance.to_string(),
        num(r.p_ph),
        num(r.p_2q),
        r.shots.to_string(),
        r.failures.to_string(),
        num(r.p_l),
        num(r.ci_lo),
        num(r.ci_hi),
    ]
}
