//! Dense QUBO and Ising representations.
//!
//! A [`QuboProblem`] stores the full symmetric matrix `Q` and a constant
//! offset; the objective minimized everywhere in this crate is
//!
//! ```text
//! E(z) = sum_{i,j} Q[i][j] * z_i * z_j + offset,   z_i in {0, 1}
//! ```
//!
//! Linear terms live on the diagonal (`z_i^2 == z_i`). Formulations that
//! write the objective with a leading minus sign have to negate `Q` before
//! constructing the problem.
//!
//! An [`IsingProblem`] uses spins `s_i in {-1, +1}` and
//!
//! ```text
//! E(s) = -sum_{i<j} J[i][j] * s_i * s_j - sum_i h[i] * s_i + offset
//! ```
//!
//! The two forms are related by `z_i = (1 + s_i) / 2`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{check_len, Error, Result};

/// Quadratic objective over `n` binary variables, stored as a dense
/// symmetric row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n: usize,
    quad: Vec<f64>,
    offset: f64,
}

impl QuboProblem {
    /// Builds a problem from a row-major `n x n` matrix. The matrix must be
    /// exactly symmetric with finite entries.
    pub fn new(n: usize, quad: Vec<f64>, offset: f64) -> Result<Self> {
        check_len("QUBO matrix", n * n, quad.len())?;
        if !offset.is_finite() {
            return Err(Error::InvalidProblem("offset is not finite".into()));
        }
        for i in 0..n {
            for j in 0..n {
                let v = quad[i * n + j];
                if !v.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "entry ({i}, {j}) is not finite"
                    )));
                }
                if j > i && v != quad[j * n + i] {
                    return Err(Error::InvalidProblem(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, quad, offset })
    }

    /// Builds a problem from nested rows.
    pub fn from_rows(rows: &[Vec<f64>], offset: f64) -> Result<Self> {
        let n = rows.len();
        let mut quad = Vec::with_capacity(n * n);
        for row in rows {
            check_len("QUBO row", n, row.len())?;
            quad.extend_from_slice(row);
        }
        Self::new(n, quad, offset)
    }

    /// Builds a problem from an upper-triangular coefficient list: each
    /// `(i, j, v)` with `i <= j` sets `Q[i][j] = Q[j][i] = v`. Repeated
    /// entries accumulate.
    pub fn from_upper_entries(
        n: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        let mut quad = vec![0.0; n * n];
        for (i, j, v) in entries {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            quad[i * n + j] += v;
            if i != j {
                quad[j * n + i] += v;
            }
        }
        Self::new(n, quad, offset)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.quad[i * self.n + j]
    }

    /// Row `i` of the coefficient matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.quad[i * self.n..(i + 1) * self.n]
    }

    /// Largest absolute coefficient, including the offset.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.quad
            .iter()
            .fold(self.offset.abs(), |acc, v| acc.max(v.abs()))
    }

    pub fn energy(&self, z: &[bool]) -> Result<f64> {
        check_len("QUBO assignment", self.n, z.len())?;
        Ok(self.energy_unchecked(z))
    }

    pub(crate) fn energy_unchecked(&self, z: &[bool]) -> f64 {
        let mut total = 0.0;
        for (i, _) in z.iter().enumerate().filter(|(_, &b)| b) {
            let row = self.row(i);
            total += z
                .iter()
                .zip(row)
                .filter(|(&b, _)| b)
                .map(|(_, &q)| q)
                .sum::<f64>();
        }
        total + self.offset
    }

    /// Energy change caused by flipping bit `i`, computed from row `i` only.
    pub fn delta_energy(&self, z: &[bool], i: usize) -> Result<f64> {
        check_len("QUBO assignment", self.n, z.len())?;
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        let row = self.row(i);
        let mut field = 0.0;
        for (j, (&b, &q)) in z.iter().zip(row).enumerate() {
            if b && j != i {
                field += q;
            }
        }
        let step = if z[i] { -1.0 } else { 1.0 };
        Ok(step * (row[i] + 2.0 * field))
    }

    /// Converts to spin form. Energies agree under `z = (1 + s) / 2`.
    pub fn to_ising(&self) -> IsingProblem {
        let n = self.n;
        let mut couplings = vec![0.0; n * n.saturating_sub(1) / 2];
        let mut fields = vec![0.0; n];
        let mut offset = self.offset;
        for i in 0..n {
            let diag = self.get(i, i);
            fields[i] -= diag / 2.0;
            offset += diag / 2.0;
            for j in (i + 1)..n {
                let q = self.get(i, j);
                couplings[pair_index(n, i, j)] = -q / 2.0;
                fields[i] -= q / 2.0;
                fields[j] -= q / 2.0;
                offset += q / 2.0;
            }
        }
        IsingProblem {
            n,
            couplings,
            fields,
            offset,
        }
    }

    /// Writes the plain-text format: a header line `n offset`, then one
    /// `i j value` line per nonzero entry with `i <= j`.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.offset)?;
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v}")?;
                }
            }
        }
        Ok(())
    }

    /// Parses the format produced by [`QuboProblem::write_text`]. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut header: Option<(usize, f64)> = None;
        let mut entries = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match header {
                None => {
                    if fields.len() != 2 {
                        return Err(parse_err(lineno, "expected header `n offset`"));
                    }
                    let n = parse_field::<usize>(fields[0], lineno)?;
                    let offset = parse_field::<f64>(fields[1], lineno)?;
                    header = Some((n, offset));
                }
                Some((n, _)) => {
                    if fields.len() != 3 {
                        return Err(parse_err(lineno, "expected `i j value`"));
                    }
                    let i = parse_field::<usize>(fields[0], lineno)?;
                    let j = parse_field::<usize>(fields[1], lineno)?;
                    let v = parse_field::<f64>(fields[2], lineno)?;
                    if i > j {
                        return Err(parse_err(lineno, "entries must satisfy i <= j"));
                    }
                    if j >= n {
                        return Err(parse_err(lineno, "index out of range"));
                    }
                    entries.push((i, j, v));
                }
            }
        }
        let (n, offset) = header.ok_or_else(|| parse_err(0, "missing header"))?;
        Self::from_upper_entries(n, entries, offset)
    }
}

/// Spin-glass form with couplings `J[i][j]` for `i < j` and fields `h[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    /// Packed strict upper triangle, row by row.
    couplings: Vec<f64>,
    fields: Vec<f64>,
    offset: f64,
}

impl IsingProblem {
    /// Builds a problem from packed couplings (`(i, j)` with `i < j`, row
    /// by row) and fields.
    pub fn new(n: usize, couplings: Vec<f64>, fields: Vec<f64>, offset: f64) -> Result<Self> {
        check_len(
            "Ising couplings",
            n * n.saturating_sub(1) / 2,
            couplings.len(),
        )?;
        check_len("Ising fields", n, fields.len())?;
        if couplings
            .iter()
            .chain(&fields)
            .chain(std::iter::once(&offset))
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidProblem("non-finite Ising coefficient".into()));
        }
        Ok(Self {
            n,
            couplings,
            fields,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Coupling between spins `i` and `j` (`i != j`, either order).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.couplings[pair_index(self.n, a, b)]
    }

    /// Energy of a spin configuration; each entry must be `-1` or `+1`.
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        check_len("Ising assignment", self.n, spins.len())?;
        if let Some(bad) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidProblem(format!(
                "spin {bad} is {} (must be -1 or +1)",
                spins[bad]
            )));
        }
        let mut e = self.offset;
        for i in 0..self.n {
            let si = f64::from(spins[i]);
            e -= self.fields[i] * si;
            for j in (i + 1)..self.n {
                e -= self.couplings[pair_index(self.n, i, j)] * si * f64::from(spins[j]);
            }
        }
        Ok(e)
    }

    /// Converts back to binary form. Energies agree under `s = 2z - 1`.
    pub fn to_qubo(&self) -> QuboProblem {
        let n = self.n;
        let mut quad = vec![0.0; n * n];
        let mut offset = self.offset;
        for i in 0..n {
            let h = self.fields[i];
            quad[i * n + i] -= 2.0 * h;
            offset += h;
            for j in (i + 1)..n {
                let jij = self.couplings[pair_index(n, i, j)];
                quad[i * n + j] = -2.0 * jij;
                quad[j * n + i] = -2.0 * jij;
                quad[i * n + i] += 2.0 * jij;
                quad[j * n + j] += 2.0 * jij;
                offset -= jij;
            }
        }
        QuboProblem { n, quad, offset }
    }
}

/// Spin value of a bit: `0 -> -1`, `1 -> +1`.
pub fn bit_to_spin(z: bool) -> i8 {
    if z {
        1
    } else {
        -1
    }
}

pub fn spin_to_bit(s: i8) -> bool {
    s > 0
}

/// Formats a bit vector as a string of `0`/`1` characters.
pub fn bits_to_string(z: &[bool]) -> String {
    z.iter().fold(String::with_capacity(z.len()), |mut s, &b| {
        let _ = s.write_char(if b { '1' } else { '0' });
        s
    })
}

#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, &format!("cannot parse `{s}`")))
}
