use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Wire form of a matrix: `{"rows": r, "cols": c, "data": [[re, im], ...]}`,
/// row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let data = j.data.iter().map(|&[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::from_vec(j.rows, j.cols, data)
    }
}

impl ComplexMatrix {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MatrixJson::from(self)).expect("matrix serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&MatrixJson::from(self)).expect("matrix serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: MatrixJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        ComplexMatrix::try_from(j)
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let j: MatrixJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        ComplexMatrix::try_from(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_pauli_y() {
        let s = r#"{"rows":2,"cols":2,"data":[[0,0],[0,-1],[0,1],[0,0]]}"#;
        let m = ComplexMatrix::from_json_str(s).unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(m[(1, 0)], C64::new(0.0, 1.0));
    }

    #[test]
    fn rejects_bad_shape_and_non_finite() {
        let s = r#"{"rows":2,"cols":2,"data":[[0,0]]}"#;
        assert!(ComplexMatrix::from_json_str(s).is_err());
        let s = r#"{"rows":1,"cols":1,"data":[[1e999,0]]}"#;
        assert!(ComplexMatrix::from_json_str(s).is_err());
        let j = MatrixJson {
            rows: 1,
            cols: 1,
            data: vec![[f64::INFINITY, 0.0]],
        };
        assert_eq!(ComplexMatrix::try_from(j), Err(Error::NonFinite));
    }

    proptest! {
        #[test]
        fn json_round_trip(entries in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 6)) {
            let m = ComplexMatrix::from_vec(2, 3, entries.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let back = ComplexMatrix::from_json_str(&m.to_json_string()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
