use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::NoiseError;

/// Tolerance on `identity + sum(terms) = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 0 first. Phases are not
/// tracked since only Pauli-diagonal channels are represented.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn from_paulis(paulis: Vec<Pauli>) -> Self {
        Self(paulis)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, q: usize) -> Pauli {
        self.0[q]
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        self.0[q] = p;
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Bitmask of qubits whose symbol flips the computational basis
    /// (X or Y). Only meaningful for up to 64 qubits.
    pub fn flip_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.has_x())
            .fold(0u64, |m, (i, _)| m | (1u64 << i))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| NoiseError::BadPauli(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

/// Pauli-diagonal channel: a sparse map from non-identity Pauli strings to
/// probabilities; the identity carries the remaining mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    qubit_count: usize,
    terms: BTreeMap<PauliString, f64>,
    identity: f64,
}

impl PauliChannel {
    pub fn identity_channel(qubit_count: usize) -> Self {
        Self { qubit_count, terms: BTreeMap::new(), identity: 1.0 }
    }

    /// Build a channel from explicit error terms. Identity strings are
    /// rejected (their mass is implied), as are duplicates, wrong lengths,
    /// and probabilities outside [0, 1]. Terms of exactly zero are dropped.
    pub fn from_terms<I>(qubit_count: usize, terms: I) -> Result<Self, NoiseError>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut map = BTreeMap::new();
        let mut total = 0.0;
        for (pauli, p) in terms {
            if pauli.len() != qubit_count {
                return Err(NoiseError::Channel(format!(
                    "string {pauli} has length {}, expected {qubit_count}",
                    pauli.len()
                )));
            }
            if pauli.is_identity() {
                return Err(NoiseError::Channel("identity listed as an error term".into()));
            }
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(NoiseError::Channel(format!("probability {p} for {pauli} not in [0, 1]")));
            }
            if p == 0.0 {
                continue;
            }
            total += p;
            if map.insert(pauli.clone(), p).is_some() {
                return Err(NoiseError::Channel(format!("duplicate string {pauli}")));
            }
        }
        if total > 1.0 + NORMALIZATION_TOLERANCE {
            return Err(NoiseError::Channel(format!("error mass {total} exceeds one")));
        }
        Ok(Self { qubit_count, terms: map, identity: (1.0 - total).max(0.0) })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn identity(&self) -> f64 {
        self.identity
    }

    pub fn terms(&self) -> &BTreeMap<PauliString, f64> {
        &self.terms
    }

    pub fn probability(&self, pauli: &PauliString) -> f64 {
        if pauli.is_identity() {
            self.identity
        } else {
            self.terms.get(pauli).copied().unwrap_or(0.0)
        }
    }

    /// Total non-identity mass.
    pub fn error_mass(&self) -> f64 {
        self.terms.values().sum()
    }

    /// Marginal distribution of computational-basis flip patterns (the X
    /// part of each string), keyed by bitmask, including the no-flip mass.
    pub fn flip_pattern_marginals(&self) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        *out.entry(0).or_insert(0.0) += self.identity;
        for (pauli, p) in &self.terms {
            *out.entry(pauli.flip_mask()).or_insert(0.0) += p;
        }
        out
    }

    pub fn to_document(&self) -> ChannelDocument {
        ChannelDocument {
            n: self.qubit_count,
            identity: self.identity,
            terms: self
                .terms
                .iter()
                .map(|(pauli, p)| ChannelTerm { pauli: pauli.to_string(), p: *p })
                .collect(),
        }
    }

    pub fn from_document(doc: &ChannelDocument) -> Result<Self, NoiseError> {
        let terms = doc
            .terms
            .iter()
            .map(|t| Ok((t.pauli.parse::<PauliString>()?, t.p)))
            .collect::<Result<Vec<_>, NoiseError>>()?;
        let channel = Self::from_terms(doc.n, terms)?;
        if (channel.identity - doc.identity).abs() > 1e-9 {
            return Err(NoiseError::Channel(format!(
                "identity {} disagrees with implied {}",
                doc.identity, channel.identity
            )));
        }
        Ok(channel)
    }
}

/// JSON form of a channel: `{"n": N, "identity": p0, "terms": [{"pauli": "IZX", "p": 0.1}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDocument {
    pub n: usize,
    pub identity: f64,
    pub terms: Vec<ChannelTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTerm {
    pub pauli: String,
    pub p: f64,
}
