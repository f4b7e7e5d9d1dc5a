//! Special functions: Laguerre polynomials, modified Bessel ratios, and the
//! generalized Hermite functions `h_m^α`.

pub mod bessel;
pub mod gamma;
pub mod hermite;
pub mod laguerre;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

pub use bessel::{bessel_i_ratio, bessel_i_ratio_scaled};
pub use hermite::{hermite_1d, hermite_1d_table, hermite_gen, normalizing_const, phi_factor};
pub use laguerre::laguerre_poly;

/// Multiplicity parameter `α ∈ [-1/2, ∞)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector<T = f64> {
    entries: Vec<T>,
}

impl<T: Real> AlphaVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("alpha must have at least one entry".into()));
        }
        if let Some(a) = entries.iter().find(|a| !(**a >= -T::half())) {
            return Err(Error::Domain(format!(
                "alpha entries must be >= -1/2, got {a}"
            )));
        }
        Ok(AlphaVector { entries })
    }

    /// `α = (a, …, a)` in dimension `d`.
    pub fn uniform(d: usize, a: T) -> Result<Self> {
        Self::new(vec![a; d])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> T {
        self.entries[j]
    }

    /// `|α| = Σ α_j`.
    pub fn norm1(&self) -> T {
        self.entries.iter().copied().sum()
    }

    pub fn shifted(&self, eps: &EpsVector) -> Vec<T> {
        self.entries
            .iter()
            .zip(eps.entries())
            .map(|(&a, &e)| if e == 1 { a + T::one() } else { a })
            .collect()
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: d,
            });
        }
        Ok(())
    }
}

impl Serialize for AlphaVector<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlphaVector<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        AlphaVector::new(v).map_err(serde::de::Error::custom)
    }
}

/// Index `m ∈ ℕ^d`, or the invalid index produced by lowering a zero entry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MultiIndex {
    Valid(Vec<usize>),
    Invalid,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex::Valid(entries)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex::Valid(vec![0; d])
    }

    /// Builds an index from signed entries; any negative entry yields `Invalid`.
    pub fn from_signed(entries: &[i64]) -> Self {
        if entries.iter().any(|&m| m < 0) {
            MultiIndex::Invalid
        } else {
            MultiIndex::Valid(entries.iter().map(|&m| m as usize).collect())
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, MultiIndex::Valid(_))
    }

    pub fn entries(&self) -> Option<&[usize]> {
        match self {
            MultiIndex::Valid(v) => Some(v),
            MultiIndex::Invalid => None,
        }
    }

    /// `|m|`; zero for the invalid index.
    pub fn length(&self) -> usize {
        self.entries().map_or(0, |m| m.iter().sum())
    }

    /// `m - e_j`.
    pub fn lower(&self, j: usize) -> MultiIndex {
        match self {
            MultiIndex::Valid(m) if m[j] > 0 => {
                let mut v = m.clone();
                v[j] -= 1;
                MultiIndex::Valid(v)
            }
            _ => MultiIndex::Invalid,
        }
    }

    /// `m + e_j`.
    pub fn raise(&self, j: usize) -> MultiIndex {
        match self {
            MultiIndex::Valid(m) => {
                let mut v = m.clone();
                v[j] += 1;
                MultiIndex::Valid(v)
            }
            MultiIndex::Invalid => MultiIndex::Invalid,
        }
    }

    /// Parity class `ε` with `m ∈ 𝒩_ε`.
    pub fn parity(&self) -> Option<EpsVector> {
        self.entries().map(|m| EpsVector {
            entries: m.iter().map(|&k| (k % 2) as u8).collect(),
        })
    }

    /// All indices with `|m| ≤ n_max` in dimension `d`, ordered by length and
    /// then lexicographically.
    pub fn all_up_to(d: usize, n_max: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for n in 0..=n_max {
            let mut cur = vec![0usize; d];
            compositions(n, 0, &mut cur, &mut out);
        }
        out
    }
}

fn compositions(rest: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = rest;
        out.push(MultiIndex::Valid(cur.clone()));
        return;
    }
    for k in (0..=rest).rev() {
        cur[pos] = k;
        compositions(rest - k, pos + 1, cur, out);
    }
}

/// Parity selector `ε ∈ {0,1}^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct EpsVector {
    entries: Vec<u8>,
}

impl EpsVector {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("eps must have at least one entry".into()));
        }
        if entries.iter().any(|&e| e > 1) {
            return Err(Error::Domain("eps entries must be 0 or 1".into()));
        }
        Ok(EpsVector { entries })
    }

    pub fn zero(d: usize) -> Self {
        EpsVector {
            entries: vec![0; d],
        }
    }

    /// `e_j` in dimension `d`.
    pub fn unit(d: usize, j: usize) -> Self {
        let mut entries = vec![0; d];
        entries[j] = 1;
        EpsVector { entries }
    }

    /// All `2^d` parity vectors, in binary counting order.
    pub fn all(d: usize) -> Vec<EpsVector> {
        (0..1usize << d)
            .map(|bits| EpsVector {
                entries: (0..d).map(|i| ((bits >> i) & 1) as u8).collect(),
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries
    }

    pub fn get(&self, j: usize) -> u8 {
        self.entries[j]
    }

    /// `|ε|`.
    pub fn norm1(&self) -> usize {
        self.entries.iter().map(|&e| e as usize).sum()
    }

    /// Whether `m ∈ 𝒩_ε`.
    pub fn contains(&self, m: &MultiIndex) -> bool {
        match m.entries() {
            Some(m) => {
                m.len() == self.dim()
                    && m.iter()
                        .zip(&self.entries)
                        .all(|(&k, &e)| (k % 2) as u8 == e)
            }
            None => false,
        }
    }

    /// `ε ± e_j` (flips coordinate `j`).
    pub fn flipped(&self, j: usize) -> EpsVector {
        let mut entries = self.entries.clone();
        entries[j] ^= 1;
        EpsVector { entries }
    }
}

impl TryFrom<Vec<u8>> for EpsVector {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        EpsVector::new(v)
    }
}

impl From<EpsVector> for Vec<u8> {
    fn from(e: EpsVector) -> Self {
        e.entries
    }
}

impl std::fmt::Display for EpsVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.entries {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_domain() {
        assert!(AlphaVector::new(vec![-0.5, 0.0]).is_ok());
        assert!(AlphaVector::new(vec![-0.5000001]).is_err());
        assert!(AlphaVector::<f64>::new(vec![]).is_err());
        assert!(AlphaVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn multi_index_lowering() {
        let m = MultiIndex::new(vec![0, 2]);
        assert_eq!(m.lower(0), MultiIndex::Invalid);
        assert_eq!(m.lower(1), MultiIndex::new(vec![0, 1]));
        assert_eq!(MultiIndex::Invalid.raise(0), MultiIndex::Invalid);
        assert_eq!(MultiIndex::from_signed(&[1, -1]), MultiIndex::Invalid);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(MultiIndex::all_up_to(1, 8).len(), 9);
        assert_eq!(MultiIndex::all_up_to(2, 8).len(), 45);
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
    }

    #[test]
    fn parity_classes_partition() {
        let all = MultiIndex::all_up_to(2, 6);
        for m in &all {
            let hits = EpsVector::all(2).iter().filter(|e| e.contains(m)).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn serde_round_trip() {
        let a = AlphaVector::new(vec![-0.5, 1.3]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[-0.5,1.3]");
        let back: AlphaVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<AlphaVector>("[-0.7]").is_err());
        let e: EpsVector = serde_json::from_str("[1,0]").unwrap();
        assert_eq!(e, EpsVector::unit(2, 0));
    }
}
