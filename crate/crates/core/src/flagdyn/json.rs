//! Flag JSON: frames stored column-by-column, complex scalars as [re, im].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FlagError, FlagPoint, GrassPoint};
use crate::matgeo::{CMat, Field};

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

    fn of(z: Complex64, field: Field) -> Self {
        match field {
            Field::Real => ScalarJson::Real(z.re),
            Field::Complex => ScalarJson::Complex([z.re, z.im]),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FlagJson {
    dim: usize,
    field: Field,
    /// columns of the inner frame
    inner: Vec<Vec<ScalarJson>>,
    outer: Vec<Vec<ScalarJson>>,
    nested: bool,
}

fn frame_to_cols(frame: &CMat, field: Field) -> Vec<Vec<ScalarJson>> {
    (0..frame.ncols())
        .map(|j| {
            (0..frame.nrows())
                .map(|i| ScalarJson::of(frame[(i, j)], field))
                .collect()
        })
        .collect()
}

fn cols_to_frame(cols: &[Vec<ScalarJson>], dim: usize) -> Result<CMat, FlagError> {
    if cols.is_empty() || cols.iter().any(|c| c.len() != dim) {
        return Err(FlagError::BadJson("frame columns must have length dim".into()));
    }
    Ok(CMat::from_fn(dim, cols.len(), |i, j| cols[j][i].to_complex()))
}

impl FlagPoint {
    pub fn from_json_str(s: &str) -> Result<Self, FlagError> {
        let parsed: FlagJson =
            serde_json::from_str(s).map_err(|e| FlagError::BadJson(e.to_string()))?;
        let inner = GrassPoint::from_span(cols_to_frame(&parsed.inner, parsed.dim)?, parsed.field)?;
        let outer = GrassPoint::from_span(cols_to_frame(&parsed.outer, parsed.dim)?, parsed.field)?;
        FlagPoint::new(inner, outer, parsed.nested)
    }

    pub fn to_json_string(&self) -> String {
        let field = self.inner.field();
        serde_json::to_string(&FlagJson {
            dim: self.dim(),
            field,
            inner: frame_to_cols(self.inner.frame(), field),
            outer: frame_to_cols(self.outer.frame(), field),
            nested: self.nested,
        })
        .expect("flag json serialization cannot fail")
    }
}
