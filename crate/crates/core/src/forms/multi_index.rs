//! Ascending multi-indices and the sign bookkeeping of `dz̄_J`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::variety::WeightVector;
use crate::C64;

use super::FormError;

/// Strictly ascending list of zero-based coordinate indices.
///
/// Displayed and parsed one-based (`"1,3"` is `dz̄₁ ∧ dz̄₃`).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self, FormError> {
        for w in entries.windows(2) {
            if w[0] == w[1] {
                return Err(FormError::DuplicateIndex(w[0] + 1));
            }
            if w[0] > w[1] {
                return Err(FormError::NotAscending(entries.iter().map(|i| i + 1).collect()));
            }
        }
        Ok(Self(entries))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn single(j: usize) -> Self {
        Self(vec![j])
    }

    /// Parses a comma-separated one-based key such as `"1,3"`; `""` is `∅`.
    pub fn parse_key(key: &str) -> Result<Self, FormError> {
        let key = key.trim();
        if key.is_empty() {
            return Ok(Self::empty());
        }
        let entries = key
            .split(',')
            .map(|t| match t.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(FormError::InvalidKey(key.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn key(&self) -> String {
        self.0.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn max_entry(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `J ∖ {j}`.
    pub fn without(&self, j: usize) -> MultiIndex {
        Self(self.0.iter().copied().filter(|&k| k != j).collect())
    }

    /// `sign(j, K)` and the sorted `{j} ∪ K`.
    pub fn wedge_front(&self, j: usize) -> Result<(f64, MultiIndex), FormError> {
        let sign = sign_perm(j, self)?;
        let mut e = self.0.clone();
        let pos = e.partition_point(|&k| k < j);
        e.insert(pos, j);
        Ok((sign, Self(e)))
    }

    /// Shifts every entry by `offset`.
    pub fn shifted(&self, offset: usize) -> MultiIndex {
        Self(self.0.iter().map(|k| k + offset).collect())
    }

    /// All ascending multi-indices of length `q` over `0..n`.
    pub fn all(n: usize, q: usize) -> Vec<MultiIndex> {
        crate::linalg::combinations(n, q).into_iter().map(Self).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.key())
    }
}

impl TryFrom<String> for MultiIndex {
    type Error = FormError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse_key(&s)
    }
}

impl From<MultiIndex> for String {
    fn from(m: MultiIndex) -> Self {
        m.key()
    }
}

/// Sign of the permutation sorting `(j, K)`: `(−1)^{#{k ∈ K : k < j}}`.
pub fn sign_perm(j: usize, k: &MultiIndex) -> Result<f64, FormError> {
    if k.contains(j) {
        return Err(FormError::DuplicateIndex(j + 1));
    }
    let below = k.entries().iter().filter(|&&i| i < j).count();
    Ok(if below % 2 == 0 { 1.0 } else { -1.0 })
}

/// `β_J = Σ_{j∈J} β_j`.
pub fn beta_sum(j: &MultiIndex, beta: &WeightVector) -> u32 {
    j.entries().iter().map(|&k| beta.get(k)).sum()
}

/// Factor multiplying `z̄_j` in the multiplier `ℵ_J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlephMode {
    /// `β_j`.
    Weighted,
    /// `q = |J|` for every `j`.
    Cone,
}

/// `ℵ_J(z) = Σ_{j∈J} c_j z̄_j dz̄_{J∖j} / sign(j, J∖j)` as `(K, coefficient)`
/// pairs in ascending order of `j`.
pub fn aleph_multiplier(j: &MultiIndex, z: &[C64], beta: &WeightVector, mode: AlephMode) -> Vec<(MultiIndex, C64)> {
    let q = j.len() as f64;
    j.entries()
        .iter()
        .map(|&jj| {
            let k = j.without(jj);
            let sign = sign_perm(jj, &k).expect("jj is not in J without jj");
            let factor = match mode {
                AlephMode::Weighted => beta.get(jj) as f64,
                AlephMode::Cone => q,
            };
            (k, z[jj].conj() * (factor * sign))
        })
        .collect()
}
