//! Matrix JSON: {"dim": d, "field": "real"|"complex", "rows": [[...]]},
//! complex scalars as [re, im].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMat, Field, MatError, SquareMatrix};

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    field: Field,
    rows: Vec<Vec<ScalarJson>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    projective_only: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarJson {
    Real(f64),
    Complex([f64; 2]),
}

impl ScalarJson {
    fn to_complex(&self) -> Complex64 {
        match *self {
            ScalarJson::Real(x) => Complex64::new(x, 0.0),
            ScalarJson::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl SquareMatrix {
    pub fn from_json_str(s: &str) -> Result<Self, MatError> {
        let parsed: MatrixJson =
            serde_json::from_str(s).map_err(|e| MatError::BadJson(e.to_string()))?;
        if parsed.rows.len() != parsed.dim || parsed.rows.iter().any(|r| r.len() != parsed.dim) {
            return Err(MatError::BadJson(format!(
                "rows do not form a {0}x{0} matrix",
                parsed.dim
            )));
        }
        let data = CMat::from_fn(parsed.dim, parsed.dim, |i, j| parsed.rows[i][j].to_complex());
        if parsed.projective_only {
            Self::projective(data, parsed.field)
        } else {
            Self::new(data, parsed.field)
        }
    }

    pub fn to_json_string(&self) -> String {
        let d = self.dim();
        let rows: Vec<Vec<ScalarJson>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let z = self.data()[(i, j)];
                        match self.field() {
                            Field::Real => ScalarJson::Real(z.re),
                            Field::Complex => ScalarJson::Complex([z.re, z.im]),
                        }
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&MatrixJson {
            dim: d,
            field: self.field(),
            rows,
            projective_only: self.is_projective_only(),
        })
        .expect("matrix json serialization cannot fail")
    }
}
