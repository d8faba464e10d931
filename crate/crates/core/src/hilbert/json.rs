//! Domain JSON. Accepted models: "klein" (unit ball), "ellipsoid"
//! (center + shape in the chart x_d = 1), "quadric" (raw symmetric matrix),
//! "polytope" (chart covector + facet covectors). Ellipsoids serialize back
//! as quadrics, polytopes as themselves.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{ConvexDomain, Ellipsoid, HilbertError, Polytope};
use crate::matgeo::RMat;

#[derive(Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum DomainJson {
    Klein {
        dim: usize,
    },
    Ellipsoid {
        dim: usize,
        center: Vec<f64>,
        shape: Vec<Vec<f64>>,
    },
    Quadric {
        q: Vec<Vec<f64>>,
    },
    Polytope {
        chart: Vec<f64>,
        halfspaces: Vec<Vec<f64>>,
    },
}

fn square(rows: &[Vec<f64>], what: &str) -> Result<RMat, HilbertError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(HilbertError::BadJson(format!("{what} must be square")));
    }
    Ok(RMat::from_fn(n, n, |i, j| rows[i][j]))
}

impl ConvexDomain {
    pub fn from_json_str(s: &str) -> Result<Self, HilbertError> {
        let parsed: DomainJson =
            serde_json::from_str(s).map_err(|e| HilbertError::BadJson(e.to_string()))?;
        match parsed {
            DomainJson::Klein { dim } => {
                if dim < 3 {
                    return Err(HilbertError::BadJson("klein ball needs dim >= 3".into()));
                }
                Ok(ConvexDomain::klein_ball(dim))
            }
            DomainJson::Ellipsoid { dim, center, shape } => {
                if center.len() != dim - 1 {
                    return Err(HilbertError::BadJson("center must have length dim - 1".into()));
                }
                ConvexDomain::ellipsoid_in_chart(&center, square(&shape, "shape")?)
            }
            DomainJson::Quadric { q } => {
                Ok(ConvexDomain::Ellipsoid(Ellipsoid::from_quadric(square(&q, "q")?)?))
            }
            DomainJson::Polytope { chart, halfspaces } => ConvexDomain::polytope(
                DVector::from_vec(chart),
                halfspaces.into_iter().map(DVector::from_vec).collect(),
            ),
        }
    }

    pub fn to_json_string(&self) -> String {
        let value = match self {
            ConvexDomain::Ellipsoid(e) => DomainJson::Quadric {
                q: matrix_rows(e.quadric()),
            },
            ConvexDomain::Polytope(p) => DomainJson::Polytope {
                chart: p.chart().as_slice().to_vec(),
                halfspaces: p.facets().iter().map(|f| f.as_slice().to_vec()).collect(),
            },
        };
        serde_json::to_string(&value).expect("domain json serialization cannot fail")
    }
}

fn matrix_rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl Polytope {
    pub fn from_json_str(s: &str) -> Result<Self, HilbertError> {
        match ConvexDomain::from_json_str(s)? {
            ConvexDomain::Polytope(p) => Ok(p),
            _ => Err(HilbertError::BadJson("expected a polytope model".into())),
        }
    }
}
