//! Binary expansion of continuous parameters.
//!
//! Every continuous parameter `w_d` is written as `sum_k b_k * z[g(d, k)]`
//! where `b` is a shared [`BasisVector`] and `g` maps each `(d, k)` slot to
//! a global binary variable. The full plan gives every slot its own bit;
//! a reduced plan lets strongly correlated pairs of parameters share the
//! bits that carry the largest basis coefficients.

use std::collections::BTreeSet;
use std::io::Write;

use crate::error::{check_len, Error, Result};

/// Basis coefficients ordered by ascending absolute value.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector(Vec<f64>);

impl BasisVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidBasis("basis must be non-empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v == 0.0) {
            return Err(Error::InvalidBasis(format!(
                "basis values must be finite and nonzero, found {v}"
            )));
        }
        if values.windows(2).any(|w| w[0].abs() > w[1].abs()) {
            return Err(Error::InvalidBasis(
                "basis values must be in ascending order of absolute value".into(),
            ));
        }
        Ok(Self(values))
    }

    /// `[0.5, -0.5, 1, -1, 2, -2, 4, -4, 8, -8]`, the basis used by the
    /// regression benchmark.
    pub fn signed_powers_of_two() -> Self {
        Self(vec![0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0, 8.0, -8.0])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Assignment of `(parameter, basis slot)` pairs to global binary variables.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingPlan {
    dims: usize,
    basis: BasisVector,
    /// `slots[d * K + k]` is the global bit for parameter `d`, slot `k`.
    slots: Vec<usize>,
    n_bits: usize,
}

impl EncodingPlan {
    /// One private bit per slot: the block-diagonal layout `I_D (x) b`.
    pub fn full(dims: usize, basis: BasisVector) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidConfig("need at least one parameter".into()));
        }
        let n_bits = dims * basis.len();
        Ok(Self {
            dims,
            basis,
            slots: (0..n_bits).collect(),
            n_bits,
        })
    }

    /// Shares the `shared` largest-magnitude slots within each pair.
    ///
    /// For a pair `(a, b)` with `a < b`, slots `K-1, K-2, ..., K-shared` of
    /// `a` are redirected to the bits of `b`. Bits are then renumbered
    /// densely, preserving their relative order.
    pub fn reduce(&self, pairs: &[(usize, usize)], shared: usize) -> Result<Self> {
        let k_len = self.basis.len();
        if shared > k_len {
            return Err(Error::InvalidPairs(format!(
                "shared bit count {shared} exceeds basis length {k_len}"
            )));
        }
        validate_pairs(self.dims, pairs)?;

        let mut slots = self.slots.clone();
        for &(p, q) in pairs {
            let (lo, hi) = if p < q { (p, q) } else { (q, p) };
            for k in (k_len - shared)..k_len {
                slots[lo * k_len + k] = slots[hi * k_len + k];
            }
        }

        let used: BTreeSet<usize> = slots.iter().copied().collect();
        let mut remap = vec![usize::MAX; self.n_bits];
        for (new, &old) in used.iter().enumerate() {
            remap[old] = new;
        }
        for g in &mut slots {
            *g = remap[*g];
        }

        Ok(Self {
            dims: self.dims,
            basis: self.basis.clone(),
            slots,
            n_bits: used.len(),
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn basis(&self) -> &BasisVector {
        &self.basis
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    /// Global bit index of slot `k` of parameter `d`.
    pub fn slot(&self, d: usize, k: usize) -> usize {
        self.slots[d * self.basis.len() + k]
    }

    /// Iterates `(d, k, global_bit)` in parameter-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let k_len = self.basis.len();
        self.slots
            .iter()
            .enumerate()
            .map(move |(idx, &g)| (idx / k_len, idx % k_len, g))
    }

    /// Maps a bit vector to continuous parameter values (`w = B' z`).
    pub fn decode(&self, z: &[bool]) -> Result<Vec<f64>> {
        check_len("encoded bit vector", self.n_bits, z.len())?;
        let b = self.basis.values();
        Ok(self
            .slots
            .chunks(b.len())
            .map(|row| {
                row.iter()
                    .zip(b)
                    .filter(|(&g, _)| z[g])
                    .map(|(_, &bk)| bk)
                    .sum()
            })
            .collect())
    }

    /// Writes the plan as text: a header `dims K n_bits`, the basis on one
    /// line prefixed by `basis`, then one `d k g` triple per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {}", self.dims, self.basis.len(), self.n_bits)?;
        let basis: Vec<String> = self.basis.values().iter().map(f64::to_string).collect();
        writeln!(out, "basis {}", basis.join(" "))?;
        for (d, k, g) in self.entries() {
            writeln!(out, "{d} {k} {g}")?;
        }
        Ok(())
    }
}

fn validate_pairs(dims: usize, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen = vec![false; dims];
    for &(p, q) in pairs {
        if p == q {
            return Err(Error::InvalidPairs(format!(
                "pair ({p}, {q}) is degenerate"
            )));
        }
        for v in [p, q] {
            if v >= dims {
                return Err(Error::InvalidPairs(format!(
                    "variable {v} out of range for {dims} parameters"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPairs(format!(
                    "variable {v} appears in more than one pair"
                )));
            }
            seen[v] = true;
        }
    }
    Ok(())
}
