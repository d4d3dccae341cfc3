use std::collections::HashMap;

use crate::error::{Error, Result};

/// Composite space of named modes, optionally restricted to kets with at
/// most `excitation_cap` total quanta.
#[derive(Debug, Clone)]
pub struct HilbertSpace {
    mode_dims: Vec<usize>,
    labels: Vec<String>,
    excitation_cap: Option<usize>,
    basis: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

impl PartialEq for HilbertSpace {
    fn eq(&self, other: &Self) -> bool {
        self.mode_dims == other.mode_dims && self.labels == other.labels && self.excitation_cap == other.excitation_cap
    }
}

impl HilbertSpace {
    pub fn new<S: AsRef<str>>(mode_dims: &[usize], labels: &[S]) -> Result<Self> {
        Self::build(mode_dims, labels, None)
    }

    pub fn with_cap<S: AsRef<str>>(mode_dims: &[usize], labels: &[S], cap: usize) -> Result<Self> {
        Self::build(mode_dims, labels, Some(cap))
    }

    /// `n` two-level modes.
    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(&vec![2; labels.len()], labels)
    }

    fn build<S: AsRef<str>>(mode_dims: &[usize], labels: &[S], cap: Option<usize>) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::InvalidParameters("space needs at least one mode".into()));
        }
        if mode_dims.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: mode_dims.len(), got: labels.len() });
        }
        if let Some(&d) = mode_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidParameters(format!("mode dimension {d} < 2")));
        }
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidParameters(format!("duplicate label {l}")));
            }
        }

        let mut basis = Vec::new();
        let mut occ = Vec::with_capacity(mode_dims.len());
        enumerate(mode_dims, cap, &mut occ, &mut basis);
        let index = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        Ok(Self { mode_dims: mode_dims.to_vec(), labels, excitation_cap: cap, basis, index })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn excitation_cap(&self) -> Option<usize> {
        self.excitation_cap
    }

    pub fn n_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Occupation vector of basis ket `i`.
    pub fn ket(&self, i: usize) -> &[usize] {
        &self.basis[i]
    }

    pub fn basis(&self) -> &[Vec<usize>] {
        &self.basis
    }

    /// Basis index of an occupation vector, `None` if it is truncated away.
    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Human-readable ket labels such as `"01"` (digits per mode).
    pub fn basis_labels(&self) -> Vec<String> {
        self.basis.iter().map(|b| b.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("")).collect()
    }
}

/// Depth-first lexicographic enumeration, pruning branches over the cap.
fn enumerate(dims: &[usize], budget: Option<usize>, occ: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let k = occ.len();
    if k == dims.len() {
        out.push(occ.clone());
        return;
    }
    let top = budget.map_or(dims[k], |b| dims[k].min(b + 1));
    for n in 0..top {
        occ.push(n);
        enumerate(dims, budget.map(|b| b - n), occ, out);
        occ.pop();
    }
}
