//! Linear regression in continuous space and its QUBO formulation.
//!
//! The cost minimized throughout is the squared residual without its
//! constant term, `w^T X^T X w - 2 w^T X^T y`. Substituting `w = B' z`
//! from an [`EncodingPlan`] turns it into a QUBO over `z`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::encoding::EncodingPlan;
use crate::error::{check_len, Error, Result};
use crate::qubo::QuboProblem;

/// Design matrix with a leading column of ones, plus targets.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl RegressionDataset {
    /// Wraps an `N x D` design matrix whose first column is all ones.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidConfig(
                "dataset needs at least one sample and one parameter".into(),
            ));
        }
        check_len("regression targets", x.nrows(), y.len())?;
        if x.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::InvalidConfig(
                "first design column must be the constant 1".into(),
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "dataset has non-finite entries".into(),
            ));
        }
        Ok(Self { x, y })
    }

    /// Builds a dataset from raw feature rows, prepending the dummy column.
    pub fn from_features(features: &[Vec<f64>], targets: &[f64]) -> Result<Self> {
        check_len("regression targets", features.len(), targets.len())?;
        let n = features.len();
        let width = features.first().map_or(0, Vec::len);
        for row in features {
            check_len("feature row", width, row.len())?;
        }
        let x = DMatrix::from_fn(
            n,
            width + 1,
            |i, j| {
                if j == 0 {
                    1.0
                } else {
                    features[i][j - 1]
                }
            },
        );
        Self::new(x, DVector::from_column_slice(targets))
    }

    /// Sample count `N`.
    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    /// Parameter count `D`, including the intercept.
    pub fn n_params(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Dataset restricted to the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_samples()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.n_samples(),
            });
        }
        Self::new(self.x.select_rows(rows), self.y.select_rows(rows))
    }

    /// Reduced cost `w^T X^T X w - 2 w^T X^T y`.
    pub fn cost_reduced(&self, w: &[f64]) -> Result<f64> {
        check_len("weight vector", self.n_params(), w.len())?;
        let w = DVector::from_column_slice(w);
        let xw = &self.x * &w;
        Ok(xw.dot(&xw) - 2.0 * xw.dot(&self.y))
    }

    /// Mean absolute prediction error.
    pub fn mae(&self, w: &[f64]) -> Result<f64> {
        check_len("weight vector", self.n_params(), w.len())?;
        let pred = &self.x * DVector::from_column_slice(w);
        let total: f64 = pred
            .iter()
            .zip(self.y.iter())
            .map(|(p, y)| (y - p).abs())
            .sum();
        Ok(total / self.n_samples() as f64)
    }

    /// Least-squares weights from the normal equations.
    pub fn exact_solve(&self) -> Result<Vec<f64>> {
        let gram = Gram::new(self);
        let chol = gram.xtx.clone().cholesky().ok_or(Error::Singular)?;
        // rough reciprocal condition number from the factor's diagonal
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            (lo.min(*v), hi.max(*v))
        });
        if hi.is_nan() || hi <= 0.0 || (lo / hi).powi(2) < f64::EPSILON * diag.len() as f64 {
            return Err(Error::Singular);
        }
        let w = chol.solve(&gram.xty);
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(w.iter().copied().collect())
    }

    /// QUBO whose energy at `z` equals `cost_reduced(plan.decode(z))`.
    pub fn build_qubo(&self, plan: &EncodingPlan) -> Result<QuboProblem> {
        Gram::new(self).build_qubo(plan)
    }

    /// Reads comma-separated text with a header row: feature columns
    /// followed by the target column. The dummy column is added here.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let width = reader.headers()?.len();
        if width < 1 {
            return Err(Error::Parse {
                line: 1,
                message: "header has no columns".into(),
            });
        }
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let line = idx + 2;
            let values = record
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("cannot parse `{f}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let (target, feats) = values.split_last().ok_or(Error::Parse {
                line,
                message: "empty row".into(),
            })?;
            features.push(feats.to_vec());
            targets.push(*target);
        }
        Self::from_features(&features, &targets)
    }

    /// Writes the format accepted by [`RegressionDataset::read_csv`], with
    /// header `x1,...,x{D-1},y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let d = self.n_params();
        let mut header: Vec<String> = (1..d).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        writer.write_record(&header)?;
        for i in 0..self.n_samples() {
            let mut row: Vec<String> = (1..d).map(|j| self.x[(i, j)].to_string()).collect();
            row.push(self.y[i].to_string());
            writer.write_record(&row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Cached `X^T X` and `X^T y` for one dataset, reusable across plans.
#[derive(Debug, Clone)]
pub struct Gram {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
}

impl Gram {
    pub fn new(ds: &RegressionDataset) -> Self {
        Self {
            xtx: ds.x.tr_mul(&ds.x),
            xty: ds.x.tr_mul(&ds.y),
        }
    }

    pub fn xtx(&self) -> &DMatrix<f64> {
        &self.xtx
    }

    pub fn xty(&self) -> &DVector<f64> {
        &self.xty
    }

    /// `(B')^T X^T X B'` with `-2 (B')^T X^T y` folded onto the diagonal.
    pub fn build_qubo(&self, plan: &EncodingPlan) -> Result<QuboProblem> {
        check_len("encoding plan parameters", self.xty.len(), plan.dims())?;
        let n = plan.n_bits();
        let b = plan.basis().values();
        let slots: Vec<(usize, f64, usize)> =
            plan.entries().map(|(d, k, g)| (d, b[k], g)).collect();

        let mut quad = vec![0.0; n * n];
        for &(d, bk, g) in &slots {
            quad[g * n + g] -= 2.0 * bk * self.xty[d];
            for &(e, bl, h) in &slots {
                quad[g * n + h] += bk * bl * self.xtx[(d, e)];
            }
        }
        // Accumulation order differs between (g, h) and (h, g); mirror the
        // upper triangle so the matrix is exactly symmetric.
        for g in 0..n {
            for h in (g + 1)..n {
                quad[h * n + g] = quad[g * n + h];
            }
        }
        QuboProblem::new(n, quad, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::BasisVector;

    fn tiny() -> RegressionDataset {
        RegressionDataset::from_features(&[vec![]], &[2.0]).unwrap()
    }

    #[test]
    fn cost_examples() {
        let ds = tiny();
        assert_eq!(ds.cost_reduced(&[0.0]).unwrap(), 0.0);
        assert_eq!(ds.cost_reduced(&[1.0]).unwrap(), -3.0);
        assert!(ds.cost_reduced(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_missing_dummy_column() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 0.2]);
        assert!(RegressionDataset::new(x, DVector::from_vec(vec![1.0, 2.0])).is_err());
    }

    #[test]
    fn single_variable_qubo() {
        let ds = tiny();
        let plan = EncodingPlan::full(1, BasisVector::new(vec![1.0]).unwrap()).unwrap();
        let q = ds.build_qubo(&plan).unwrap();
        assert_eq!(q.n(), 1);
        assert_eq!(q.get(0, 0), -3.0);
        assert_eq!(q.energy(&[false]).unwrap(), 0.0);
        assert_eq!(q.energy(&[true]).unwrap(), -3.0);
        assert_eq!(plan.decode(&[true]).unwrap(), vec![1.0]);
    }

    #[test]
    fn qubo_plan_dimension_mismatch() {
        let plan = EncodingPlan::full(2, BasisVector::new(vec![1.0]).unwrap()).unwrap();
        assert!(tiny().build_qubo(&plan).is_err());
    }

    #[test]
    fn mae_examples() {
        let ds = RegressionDataset::from_features(&[vec![1.0], vec![-1.0]], &[3.0, -1.0]).unwrap();
        assert_eq!(ds.mae(&[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ds.mae(&[0.0, 2.0]).unwrap(), 1.0);
        assert!(ds.mae(&[0.0]).is_err());
    }

    #[test]
    fn exact_solve_single_equation() {
        assert_eq!(tiny().exact_solve().unwrap(), vec![2.0]);
    }

    #[test]
    fn exact_solve_singular() {
        // duplicated feature column
        let ds = RegressionDataset::from_features(
            &[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
            &[1.0, 2.0, 3.0],
        )
        .unwrap();
        assert!(matches!(ds.exact_solve(), Err(Error::Singular)));
    }

    #[test]
    fn csv_round_trip() {
        let ds =
            RegressionDataset::from_features(&[vec![0.25, -1.0], vec![0.5, 0.125]], &[3.5, -2.0])
                .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,y\n"));
        assert_eq!(RegressionDataset::read_csv(&buf[..]).unwrap(), ds);
    }

    #[test]
    fn csv_parse_error() {
        let err = RegressionDataset::read_csv("x1,y\n0.5,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn select_rows_bounds() {
        let ds = tiny();
        assert!(ds.select_rows(&[0]).is_ok());
        assert!(ds.select_rows(&[1]).is_err());
    }
}
