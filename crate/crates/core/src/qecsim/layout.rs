//! Rotated surface-code geometry and the per-round gate schedule.

use serde::{Deserialize, Serialize};

use super::QecError;

pub const MIN_DISTANCE: usize = 3;
pub const MAX_DISTANCE: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilizerKind {
    X,
    Z,
}

impl StabilizerKind {
    pub fn other(self) -> Self {
        match self {
            StabilizerKind::X => StabilizerKind::Z,
            StabilizerKind::Z => StabilizerKind::X,
        }
    }
}

/// How each stabilizer type is measured within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// One multiqubit gate per stabilizer type.
    #[serde(alias = "all")]
    Simultaneous,
    /// Two gates per type: X checks split by data-row parity, Z checks by
    /// data-column parity. Bulk ancillas take part in both halves.
    #[serde(alias = "split")]
    SplitRows,
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Schedule::Simultaneous => "simultaneous",
            Schedule::SplitRows => "split-rows",
        })
    }
}

impl std::str::FromStr for Schedule {
    type Err = QecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" | "simultaneous" => Ok(Schedule::Simultaneous),
            "split" | "split-rows" => Ok(Schedule::SplitRows),
            other => Err(QecError::BadSchedule(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilizer {
    pub kind: StabilizerKind,
    /// Qubit index of the measuring ancilla.
    pub ancilla: usize,
    /// Data qubit indices, sorted.
    pub support: Vec<usize>,
    /// Plaquette coordinates (row, column) on the `(d+1) x (d+1)` dual grid.
    pub plaquette: (usize, usize),
}

/// One multiqubit gate: a set of ancilla-data couplings applied together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateStep {
    pub kind: StabilizerKind,
    /// `(ancilla qubit, data qubit)` pairs.
    pub couplings: Vec<(usize, usize)>,
    /// Stabilizer indices whose ancilla is reset just before this step.
    pub prepare: Vec<usize>,
    /// Stabilizer indices whose ancilla is read out right after this step.
    pub measure: Vec<usize>,
}

impl GateStep {
    /// Every qubit touched by the gate, sorted.
    pub fn participants(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.couplings.iter().flat_map(|&(a, d)| [a, d]).collect();
        q.sort_unstable();
        q.dedup();
        q
    }
}

/// Data qubits on a `d x d` grid (index `row * d + col`) followed by the
/// `(d^2 - 1) / 2` ancillas, each shared by one X and one Z check.
#[derive(Debug, Clone)]
pub struct SurfaceCodeLayout {
    distance: usize,
    schedule: Schedule,
    x_checks: Vec<Stabilizer>,
    z_checks: Vec<Stabilizer>,
    logical_x: Vec<usize>,
    logical_z: Vec<usize>,
    x_steps: Vec<GateStep>,
    z_steps: Vec<GateStep>,
}

pub fn build_layout(d: usize, schedule: Schedule) -> Result<SurfaceCodeLayout, QecError> {
    if d % 2 == 0 || !(MIN_DISTANCE..=MAX_DISTANCE).contains(&d) {
        return Err(QecError::BadDistance(d));
    }
    let data = d * d;
    let mut x_checks = Vec::new();
    let mut z_checks = Vec::new();
    for i in 0..=d {
        for j in 0..=d {
            let is_x = (i + j) % 2 == 0;
            let bulk = (1..d).contains(&i) && (1..d).contains(&j);
            let top_bottom = (i == 0 || i == d) && (1..d).contains(&j);
            let left_right = (j == 0 || j == d) && (1..d).contains(&i);
            let keep = bulk || (is_x && top_bottom) || (!is_x && left_right);
            if !keep {
                continue;
            }
            let mut support = Vec::with_capacity(4);
            for r in i.saturating_sub(1)..=i.min(d - 1) {
                for c in j.saturating_sub(1)..=j.min(d - 1) {
                    support.push(r * d + c);
                }
            }
            let list = if is_x { &mut x_checks } else { &mut z_checks };
            let ancilla = data + list.len();
            let kind = if is_x { StabilizerKind::X } else { StabilizerKind::Z };
            list.push(Stabilizer { kind, ancilla, support, plaquette: (i, j) });
        }
    }
    let x_steps = steps(StabilizerKind::X, &x_checks, d, schedule);
    let z_steps = steps(StabilizerKind::Z, &z_checks, d, schedule);
    Ok(SurfaceCodeLayout {
        distance: d,
        schedule,
        x_checks,
        z_checks,
        logical_x: (0..d).map(|r| r * d).collect(),
        logical_z: (0..d).collect(),
        x_steps,
        z_steps,
    })
}

fn steps(kind: StabilizerKind, checks: &[Stabilizer], d: usize, schedule: Schedule) -> Vec<GateStep> {
    let group_of = |q: usize| match kind {
        StabilizerKind::X => (q / d) % 2,
        StabilizerKind::Z => (q % d) % 2,
    };
    let groups: Vec<usize> = match schedule {
        Schedule::Simultaneous => vec![0],
        Schedule::SplitRows => vec![0, 1],
    };
    let mut out: Vec<GateStep> = groups
        .iter()
        .map(|&g| {
            let couplings = checks
                .iter()
                .flat_map(|s| {
                    s.support
                        .iter()
                        .filter(move |&&q| schedule == Schedule::Simultaneous || group_of(q) == g)
                        .map(move |&q| (s.ancilla, q))
                })
                .collect();
            GateStep { kind, couplings, prepare: Vec::new(), measure: Vec::new() }
        })
        .collect();
    for (i, s) in checks.iter().enumerate() {
        let used: Vec<usize> =
            (0..out.len()).filter(|&k| out[k].couplings.iter().any(|&(a, _)| a == s.ancilla)).collect();
        out[*used.first().expect("check has couplings")].prepare.push(i);
        out[*used.last().expect("check has couplings")].measure.push(i);
    }
    out
}

impl SurfaceCodeLayout {
    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn schedule(&self) -> Schedule {
        self.schedule
    }

    pub fn data_count(&self) -> usize {
        self.distance * self.distance
    }

    pub fn ancilla_count(&self) -> usize {
        self.x_checks.len()
    }

    pub fn qubit_count(&self) -> usize {
        self.data_count() + self.ancilla_count()
    }

    pub fn is_data(&self, q: usize) -> bool {
        q < self.data_count()
    }

    pub fn checks(&self, kind: StabilizerKind) -> &[Stabilizer] {
        match kind {
            StabilizerKind::X => &self.x_checks,
            StabilizerKind::Z => &self.z_checks,
        }
    }

    pub fn steps(&self, kind: StabilizerKind) -> &[GateStep] {
        match kind {
            StabilizerKind::X => &self.x_steps,
            StabilizerKind::Z => &self.z_steps,
        }
    }

    /// Data qubits of the logical X operator (one grid column).
    pub fn logical_x(&self) -> &[usize] {
        &self.logical_x
    }

    /// Data qubits of the logical Z operator (one grid row).
    pub fn logical_z(&self) -> &[usize] {
        &self.logical_z
    }

    /// Data qubit grid position.
    pub fn coordinates(&self, q: usize) -> (usize, usize) {
        (q / self.distance, q % self.distance)
    }
}
