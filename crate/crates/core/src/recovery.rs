//! Least-squares map from the new feature space back to the old one.
//!
//! During the overlap the estimator accumulates `m1 = sum x_new x_new^T` and
//! `m2 = sum x_new x_old^T`; solving yields `m_star = (m1 + ridge I)^-1 m2`,
//! and an old-space instance is recovered as `m_star^T x_new`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{FeslError, Result};
use crate::types::{check_dim, FeatureVector};

/// Default ridge penalty added to the diagonal of `m1` before solving.
pub const DEFAULT_RIDGE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct MapEstimator {
    m1: DMatrix<f64>,
    m2: DMatrix<f64>,
    ridge: f64,
    m_star: Option<DMatrix<f64>>,
    samples_seen: usize,
}

impl MapEstimator {
    /// An empty estimator mapping `d2`-dim new features to `d1`-dim old ones.
    pub fn new(d1: usize, d2: usize, ridge: f64) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(FeslError::invalid("map dimensions must be positive"));
        }
        if !(ridge >= 0.0 && ridge.is_finite()) {
            return Err(FeslError::invalid(format!(
                "ridge must be finite and >= 0, got {ridge}"
            )));
        }
        Ok(MapEstimator {
            m1: DMatrix::zeros(d2, d2),
            m2: DMatrix::zeros(d2, d1),
            ridge,
            m_star: None,
            samples_seen: 0,
        })
    }

    /// A solved estimator wrapping a known `d2 x d1` map.
    pub fn from_map(m_star: DMatrix<f64>) -> Result<Self> {
        if m_star.iter().any(|v| !v.is_finite()) {
            return Err(FeslError::invalid("map has non-finite entries"));
        }
        let mut est = Self::new(m_star.ncols(), m_star.nrows(), 0.0)?;
        est.m_star = Some(m_star);
        Ok(est)
    }

    pub fn d1(&self) -> usize {
        self.m2.ncols()
    }

    pub fn d2(&self) -> usize {
        self.m2.nrows()
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn samples_seen(&self) -> usize {
        self.samples_seen
    }

    pub fn m1(&self) -> &DMatrix<f64> {
        &self.m1
    }

    pub fn m2(&self) -> &DMatrix<f64> {
        &self.m2
    }

    pub fn m_star(&self) -> Option<&DMatrix<f64>> {
        self.m_star.as_ref()
    }

    pub fn is_solved(&self) -> bool {
        self.m_star.is_some()
    }

    pub fn accumulate(&mut self, x_new: &FeatureVector, x_old: &FeatureVector) -> Result<()> {
        if self.is_solved() {
            return Err(FeslError::state("cannot accumulate into a solved map"));
        }
        check_dim(self.d2(), x_new.dim())?;
        check_dim(self.d1(), x_old.dim())?;
        let xn = x_new.values();
        self.m1.ger(1.0, xn, xn, 1.0);
        self.m2.ger(1.0, xn, x_old.values(), 1.0);
        self.samples_seen += 1;
        Ok(())
    }

    /// Solves the regularized normal equations through a Cholesky factorization.
    pub fn solve(&mut self) -> Result<()> {
        if self.samples_seen == 0 {
            return Err(FeslError::state("no overlap samples accumulated"));
        }
        if self.ridge == 0.0 && self.samples_seen < self.d2() {
            return Err(FeslError::Singular(format!(
                "{} samples cannot determine a map from {} new features",
                self.samples_seen,
                self.d2()
            )));
        }
        let mut system = self.m1.clone();
        for i in 0..system.nrows() {
            system[(i, i)] += self.ridge;
        }
        let chol = system.cholesky().ok_or_else(|| {
            FeslError::Singular("overlap Gram matrix is not positive definite".into())
        })?;
        let m_star = chol.solve(&self.m2);
        if m_star.iter().any(|v| !v.is_finite()) {
            return Err(FeslError::Singular(
                "map solution has non-finite entries".into(),
            ));
        }
        self.m_star = Some(m_star);
        Ok(())
    }

    /// `m_star^T x_new`, an estimate of the vanished old-space features.
    pub fn recover(&self, x_new: &FeatureVector) -> Result<FeatureVector> {
        let m = self
            .m_star
            .as_ref()
            .ok_or_else(|| FeslError::state("map has not been solved"))?;
        check_dim(self.d2(), x_new.dim())?;
        let out: DVector<f64> = m.tr_mul(x_new.values());
        FeatureVector::from_dvector(out)
    }

    /// Writes the solved map as text: a `fesl-map <d2> <d1>` header followed by
    /// `d2` rows of `d1` values.
    pub fn save_map(&self, path: &Path) -> Result<()> {
        let m = self
            .m_star
            .as_ref()
            .ok_or_else(|| FeslError::state("map has not been solved"))?;
        let mut out = format!("fesl-map {} {}\n", m.nrows(), m.ncols());
        for row in m.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
        fs::write(path, out).map_err(|e| FeslError::io(path, e))
    }

    pub fn load_map(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| FeslError::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| FeslError::format(1, "empty map file"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (rows, cols) = match parts.as_slice() {
            ["fesl-map", r, c] => (
                r.parse::<usize>()
                    .map_err(|_| FeslError::format(1, "bad row count"))?,
                c.parse::<usize>()
                    .map_err(|_| FeslError::format(1, "bad column count"))?,
            ),
            _ => return Err(FeslError::format(1, "expected 'fesl-map <d2> <d1>'")),
        };
        let mut data = Vec::with_capacity(rows * cols);
        let mut seen = 0;
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| FeslError::format(i + 1, e.to_string()))?;
            if row.len() != cols {
                return Err(FeslError::format(
                    i + 1,
                    format!("expected {cols} values, found {}", row.len()),
                ));
            }
            data.extend(row);
            seen += 1;
        }
        if seen != rows {
            return Err(FeslError::format(
                seen + 1,
                format!("expected {rows} rows, found {seen}"),
            ));
        }
        Self::from_map(DMatrix::from_row_slice(rows, cols, &data))
    }
}
