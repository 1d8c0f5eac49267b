use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::SpaceError;
use crate::scalar::{is_finite, JsonComplex, C64};

/// `{ "dim": n, "rows": [[{re, im}, …], …] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub rows: Vec<Vec<JsonComplex>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
            .collect();
        MatrixJson { dim: m.nrows(), rows }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<C64>, SpaceError> {
        if self.rows.len() != self.dim {
            return Err(SpaceError::Json(format!("expected {} rows, found {}", self.dim, self.rows.len())));
        }
        if let Some((i, row)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
            return Err(SpaceError::Json(format!("row {i} has {} entries, expected {}", row.len(), self.dim)));
        }
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| C64::from(self.rows[i][j]));
        if m.iter().any(|z| !is_finite(*z)) {
            return Err(SpaceError::NonFinite);
        }
        Ok(m)
    }
}

pub fn matrix_to_json(m: &DMatrix<C64>) -> String {
    serde_json::to_string(&MatrixJson::from_matrix(m)).expect("matrix serializes")
}

pub fn matrix_from_json(text: &str) -> Result<DMatrix<C64>, SpaceError> {
    let parsed: MatrixJson = serde_json::from_str(text).map_err(|e| SpaceError::Json(e.to_string()))?;
    parsed.to_matrix()
}
