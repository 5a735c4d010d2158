//! Subsystem layouts: the ordered list of qudits making up a composite system.
//!
//! The composite basis index is `Σ_k i_k · Π_{l>k} d_l`, i.e. the first
//! subsystem is the most significant digit.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the two spatially separated parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::A => write!(f, "A"),
            Party::B => write!(f, "B"),
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Party::A),
            "B" => Ok(Party::B),
            other => Err(Error::Format(format!("unknown party `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
    pub party: Party,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize, party: Party) -> Self {
        Self { label: label.into(), dim, party }
    }
}

/// Ordered list of subsystems; defines tensor index order and the A/B split.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    subsystems: Vec<Subsystem>,
}

impl SubsystemLayout {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::InvalidLayout("no subsystems".into()));
        }
        let mut seen = HashSet::new();
        for s in &subsystems {
            if s.dim < 2 {
                return Err(Error::InvalidLayout(format!("subsystem `{}` has dimension {} < 2", s.label, s.dim)));
            }
            if !seen.insert(s.label.as_str()) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(Self { subsystems })
    }

    /// Convenience constructor from `(label, dim, party)` triples.
    pub fn from_triples<S: AsRef<str>>(items: &[(S, usize, Party)]) -> Result<Self> {
        Self::new(items.iter().map(|(l, d, p)| Subsystem::new(l.as_ref(), *d, *p)).collect())
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn parties(&self) -> Vec<Party> {
        self.subsystems.iter().map(|s| s.party).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems.iter().position(|s| s.label == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn get(&self, label: &str) -> Result<&Subsystem> {
        Ok(&self.subsystems[self.position(label)?])
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subsystems.iter().any(|s| s.label == label)
    }

    /// Labels held by `party`, in layout order.
    pub fn party_labels(&self, party: Party) -> Vec<&str> {
        self.subsystems.iter().filter(|s| s.party == party).map(|s| s.label.as_str()).collect()
    }

    /// Place value of each subsystem's digit in the composite index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.subsystems.len()];
        for k in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.subsystems[k + 1].dim;
        }
        strides
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &SubsystemLayout) -> Result<Self> {
        for s in &other.subsystems {
            if self.contains(&s.label) {
                return Err(Error::LabelCollision(s.label.clone()));
            }
        }
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        Ok(Self { subsystems })
    }

    /// Positions (in the current layout) of `order`, checking it is a permutation.
    pub fn permutation_positions(&self, order: &[&str]) -> Result<Vec<usize>> {
        if order.len() != self.len() {
            return Err(Error::InvalidPermutation(format!("expected {} labels, got {}", self.len(), order.len())));
        }
        let mut used = vec![false; self.len()];
        let mut positions = Vec::with_capacity(order.len());
        for label in order {
            let p = self.position(label).map_err(|_| Error::InvalidPermutation(format!("unknown label `{label}`")))?;
            if used[p] {
                return Err(Error::InvalidPermutation(format!("label `{label}` repeated")));
            }
            used[p] = true;
            positions.push(p);
        }
        Ok(positions)
    }

    /// Layout reordered to `order`.
    pub fn permuted(&self, order: &[&str]) -> Result<Self> {
        let positions = self.permutation_positions(order)?;
        Ok(Self { subsystems: positions.iter().map(|&p| self.subsystems[p].clone()).collect() })
    }

    /// Same dims and parties, new labels.
    pub fn relabeled<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::InvalidLayout(format!("expected {} labels, got {}", self.len(), labels.len())));
        }
        Self::new(self.subsystems.iter().zip(labels).map(|(s, l)| Subsystem::new(l.as_ref(), s.dim, s.party)).collect())
    }

    /// Same dims and labels, new party assignment.
    pub fn with_parties(&self, parties: &[Party]) -> Result<Self> {
        if parties.len() != self.len() {
            return Err(Error::InvalidLayout(format!("expected {} parties, got {}", self.len(), parties.len())));
        }
        Ok(Self {
            subsystems: self
                .subsystems
                .iter()
                .zip(parties)
                .map(|(s, &p)| Subsystem::new(s.label.clone(), s.dim, p))
                .collect(),
        })
    }

    /// Sub-layout of the given labels, kept in layout order.
    pub fn restricted(&self, keep: &[&str]) -> Result<Self> {
        for l in keep {
            self.position(l)?;
        }
        Ok(Self { subsystems: self.subsystems.iter().filter(|s| keep.contains(&s.label.as_str())).cloned().collect() })
    }

    /// Split every composite index into the contribution of the subsystems
    /// in `selected` and the contribution of the rest.
    ///
    /// Returns `(selected_offsets, rest_offsets)` where every composite index
    /// is `selected_offsets[s] + rest_offsets[r]` for a unique pair `(s, r)`,
    /// with `s` enumerating the selected digits in the order given (first most
    /// significant) and `r` the remaining digits in layout order.
    pub(crate) fn split_offsets(&self, selected: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let strides = self.strides();
        let dims = self.dims();
        let rest: Vec<usize> = (0..self.len()).filter(|k| !selected.contains(k)).collect();
        let offsets = |positions: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &p in positions {
                let mut next = Vec::with_capacity(out.len() * dims[p]);
                for &base in &out {
                    for digit in 0..dims[p] {
                        next.push(base + digit * strides[p]);
                    }
                }
                out = next;
            }
            out
        };
        (offsets(selected), offsets(&rest))
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.subsystems.iter().map(|s| format!("{}[{}|{}]", s.label, s.dim, s.party)).collect();
        write!(f, "{}", parts.join(" ⊗ "))
    }
}
