//! Hilbert geometry of properly convex domains: cross-ratio distances,
//! Hausdorff estimates for segments, polar duals, convex hulls in affine
//! charts, supporting hyperplanes, and the lifting-positivity check.
//!
//! Domains are immutable. An ellipsoid is stored as a projective quadric
//! {q > 0} of signature (1, d-1), so `transform` is exact conjugation;
//! a polytope is a chart functional plus homogeneous facet covectors,
//! positive on the interior. Polytopes are restricted to P(R^3), where
//! vertex enumeration and boundedness are exact planar computations.

mod json;

use nalgebra::DVector;

use crate::flagdyn::ProjPoint;
use crate::matgeo::{Field, MatError, RMat, SquareMatrix};
use crate::par;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HilbertError {
    #[error("point is not interior to the domain (margin < 1e-9)")]
    PointNotInterior,
    #[error("chord does not bracket the boundary")]
    LineBoundaryIntersectionFailure,
    #[error("dual domain is unbounded; domain was not properly convex")]
    UnboundedDual,
    #[error("chart functional vanishes on an input point")]
    ChartVanishes,
    #[error("point is not on the boundary within 1e-9")]
    NotOnBoundary,
    #[error("supporting data requires a smooth (ellipsoid) boundary")]
    NotSmooth,
    #[error("hulls computed in two charts disagree")]
    HullChartMismatch,
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("dimension mismatch")]
    DimMismatch,
    #[error("operation requires real-field data")]
    RealFieldRequired,
    #[error("bad domain JSON: {0}")]
    BadJson(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

const INTERIOR_MARGIN: f64 = 1e-9;

/// {[v] : v^T Q v > 0} with Q symmetric of signature (1, d-1); always a
/// properly convex domain projectively equivalent to a ball.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    /// unit spectral norm, symmetric
    q: RMat,
    /// positive eigendirection; an interior point
    witness: DVector<f64>,
    /// polar covector of the witness: positive on the domain, zero on a
    /// hyperplane missing its closure
    chart: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct Polytope {
    /// unit-norm chart functional, positive on the closed domain
    chart: DVector<f64>,
    /// unit-norm facet covectors, positive on the interior
    facets: Vec<DVector<f64>>,
    /// chart-normalized vertices, counterclockwise in chart coordinates
    vertices: Vec<DVector<f64>>,
    /// facet index pair meeting at each vertex
    adjacency: Vec<(usize, usize)>,
    /// vertex centroid, chart-normalized; interior witness
    witness: DVector<f64>,
    /// min facet margin at the witness
    inradius_lb: f64,
}

#[derive(Debug, Clone)]
pub enum ConvexDomain {
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
}

fn symmetric_eigen(m: &RMat) -> (DVector<f64>, RMat) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    (se.eigenvalues, se.eigenvectors)
}

impl Ellipsoid {
    pub fn from_quadric(q: RMat) -> Result<Self, HilbertError> {
        if q.nrows() != q.ncols() || q.nrows() < 3 {
            return Err(HilbertError::BadDomain("quadric must be square, d >= 3".into()));
        }
        let mut q = (&q + q.transpose()) * 0.5;
        let (eigs, vecs) = symmetric_eigen(&q);
        let scale = eigs.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if scale <= 0.0 {
            return Err(HilbertError::BadDomain("zero quadric".into()));
        }
        q /= scale;
        let pos: Vec<usize> = (0..eigs.len()).filter(|&i| eigs[i] > 1e-9 * scale).collect();
        let neg = (0..eigs.len()).filter(|&i| eigs[i] < -1e-9 * scale).count();
        if pos.len() != 1 || neg != q.nrows() - 1 {
            return Err(HilbertError::BadDomain(format!(
                "signature ({}, {}) is not (1, {})",
                pos.len(),
                neg,
                q.nrows() - 1
            )));
        }
        let witness = vecs.column(pos[0]).into_owned();
        let chart_raw = &q * &witness;
        let chart = &chart_raw / chart_raw.norm();
        Ok(Self { q, witness, chart })
    }

    /// Unit ball of the hyperbolic (Klein) model in the chart x_d = 1.
    pub fn klein_ball(d: usize) -> Self {
        let q = RMat::from_fn(d, d, |i, j| {
            if i != j {
                0.0
            } else if i == d - 1 {
                1.0
            } else {
                -1.0
            }
        });
        Self::from_quadric(q).expect("klein quadric has signature (1, d-1)")
    }

    /// {x : (x - center)^T shape (x - center) < 1} in the chart x_d = 1.
    pub fn in_chart(center: &[f64], shape: RMat) -> Result<Self, HilbertError> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n || n < 2 {
            return Err(HilbertError::DimMismatch);
        }
        let c = DVector::from_column_slice(center);
        let mc = &shape * &c;
        let mut q = RMat::zeros(n + 1, n + 1);
        q.view_mut((0, 0), (n, n)).copy_from(&(-&shape));
        for i in 0..n {
            q[(i, n)] = mc[i];
            q[(n, i)] = mc[i];
        }
        q[(n, n)] = 1.0 - c.dot(&mc);
        Self::from_quadric(q)
    }

    pub fn quadric(&self) -> &RMat {
        &self.q
    }

    fn eval(&self, v: &DVector<f64>) -> f64 {
        (v.transpose() * &self.q * v)[(0, 0)]
    }

    fn bilinear(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        (v.transpose() * &self.q * w)[(0, 0)]
    }
}

impl Polytope {
    /// `chart` must be positive on the closed solution set of
    /// {v : facet_i(v) >= 0}, which must be bounded in the chart {chart = 1}.
    pub fn new(chart: DVector<f64>, facets: Vec<DVector<f64>>) -> Result<Self, HilbertError> {
        let d = chart.len();
        if d != 3 {
            return Err(HilbertError::BadDomain(
                "polytope domains are supported in P(R^3) only".into(),
            ));
        }
        if facets.len() < 3 || facets.iter().any(|f| f.len() != d) {
            return Err(HilbertError::BadDomain("need >= 3 facet covectors".into()));
        }
        let cn = chart.norm();
        if cn < 1e-300 {
            return Err(HilbertError::BadDomain("zero chart functional".into()));
        }
        let chart = &chart / cn;
        let mut norm_facets = Vec::with_capacity(facets.len());
        for f in &facets {
            let n = f.norm();
            if n < 1e-300 {
                return Err(HilbertError::BadDomain("zero facet covector".into()));
            }
            norm_facets.push(f / n);
        }

        let (u1, u2) = chart_plane_basis(&chart);

        // bounded iff the facet normals restricted to the chart's plane at
        // infinity positively span it: no cyclic angular gap reaches pi
        let mut angles: Vec<f64> = norm_facets
            .iter()
            .filter_map(|f| {
                let (a, b) = (f.dot(&u1), f.dot(&u2));
                (a.hypot(b) > 1e-12).then(|| b.atan2(a))
            })
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let bounded = angles.len() >= 3 && {
            let worst = angles
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(angles[0] + std::f64::consts::TAU - angles[angles.len() - 1], f64::max);
            worst < std::f64::consts::PI - 1e-9
        };
        if !bounded {
            return Err(HilbertError::BadDomain("solution set unbounded in chart".into()));
        }

        // vertices: pairwise facet intersections on the chart, kept when
        // feasible for every other facet
        let mut vertices: Vec<DVector<f64>> = Vec::new();
        let mut adjacency: Vec<(usize, usize)> = Vec::new();
        for i in 0..norm_facets.len() {
            for j in i + 1..norm_facets.len() {
                let m = RMat::from_fn(3, 3, |r, c| match r {
                    0 => norm_facets[i][c],
                    1 => norm_facets[j][c],
                    _ => chart[c],
                });
                let rhs = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
                let Some(v) = m.lu().solve(&rhs) else { continue };
                if v.iter().any(|x| !x.is_finite()) || v.norm() > 1e12 {
                    continue;
                }
                if norm_facets.iter().all(|f| f.dot(&v) >= -1e-9 * v.norm()) {
                    let dup = vertices
                        .iter()
                        .any(|w| (w - &v).norm() <= 1e-7 * (1.0 + v.norm()));
                    if !dup {
                        vertices.push(v);
                        adjacency.push((i, j));
                    }
                }
            }
        }
        if vertices.len() < 3 {
            return Err(HilbertError::BadDomain("fewer than 3 vertices".into()));
        }

        let mut witness = DVector::zeros(3);
        for v in &vertices {
            witness += v;
        }
        witness /= vertices.len() as f64;
        let wn = witness.norm();
        let inradius_lb = norm_facets
            .iter()
            .map(|f| f.dot(&witness) / wn)
            .fold(f64::INFINITY, f64::min);
        if inradius_lb <= INTERIOR_MARGIN {
            return Err(HilbertError::BadDomain("empty interior".into()));
        }

        // counterclockwise order in chart coordinates
        let coords: Vec<(f64, f64)> = vertices
            .iter()
            .map(|v| (u1.dot(v), u2.dot(v)))
            .collect();
        let cx = coords.iter().map(|c| c.0).sum::<f64>() / coords.len() as f64;
        let cy = coords.iter().map(|c| c.1).sum::<f64>() / coords.len() as f64;
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| {
            let ta = (coords[a].1 - cy).atan2(coords[a].0 - cx);
            let tb = (coords[b].1 - cy).atan2(coords[b].0 - cx);
            ta.partial_cmp(&tb).unwrap()
        });
        let vertices: Vec<_> = order.iter().map(|&i| vertices[i].clone()).collect();
        let adjacency: Vec<_> = order.iter().map(|&i| adjacency[i]).collect();

        Ok(Self {
            chart,
            facets: norm_facets,
            vertices,
            adjacency,
            witness,
            inradius_lb,
        })
    }

    pub fn chart(&self) -> &DVector<f64> {
        &self.chart
    }

    pub fn facets(&self) -> &[DVector<f64>] {
        &self.facets
    }

    /// Chart-normalized homogeneous vertices, counterclockwise.
    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    pub fn inradius_lower_bound(&self) -> f64 {
        self.inradius_lb
    }
}

/// Orthonormal basis of the plane {chart = 0}.
fn chart_plane_basis(chart: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let d = chart.len();
    let mut m = RMat::zeros(d, d + 1);
    m.column_mut(0).copy_from(chart);
    for i in 0..d {
        m[(i, i + 1)] = 1.0;
    }
    let q = m.qr().q();
    (q.column(1).into_owned(), q.column(2).into_owned())
}

impl ConvexDomain {
    pub fn klein_ball(d: usize) -> Self {
        ConvexDomain::Ellipsoid(Ellipsoid::klein_ball(d))
    }

    pub fn ellipsoid_in_chart(center: &[f64], shape: RMat) -> Result<Self, HilbertError> {
        Ok(ConvexDomain::Ellipsoid(Ellipsoid::in_chart(center, shape)?))
    }

    pub fn polytope(chart: DVector<f64>, facets: Vec<DVector<f64>>) -> Result<Self, HilbertError> {
        Ok(ConvexDomain::Polytope(Polytope::new(chart, facets)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Ellipsoid(e) => e.q.nrows(),
            ConvexDomain::Polytope(p) => p.chart.len(),
        }
    }

    fn chart_covector(&self) -> &DVector<f64> {
        match self {
            ConvexDomain::Ellipsoid(e) => &e.chart,
            ConvexDomain::Polytope(p) => &p.chart,
        }
    }

    /// An interior point (quadric witness or vertex centroid).
    pub fn interior_witness(&self) -> ProjPoint {
        let w = match self {
            ConvexDomain::Ellipsoid(e) => &e.witness,
            ConvexDomain::Polytope(p) => &p.witness,
        };
        ProjPoint::from_real_slice(w.as_slice()).expect("witness is nonzero")
    }

    /// Scale-invariant interior margin of a unit representative; positive
    /// inside, and at least 1e-9 for `hilbert_distance` arguments.
    pub fn interior_margin(&self, p: &ProjPoint) -> Result<f64, HilbertError> {
        let v = real_unit_lift(self, p)?;
        Ok(match self {
            ConvexDomain::Ellipsoid(e) => e.eval(&v),
            ConvexDomain::Polytope(poly) => poly
                .facets
                .iter()
                .map(|f| f.dot(&v))
                .fold(f64::INFINITY, f64::min),
        })
    }

    /// g applied to the domain; exact on the defining data.
    pub fn transform(&self, g: &SquareMatrix) -> Result<ConvexDomain, HilbertError> {
        if g.field() != Field::Real {
            return Err(HilbertError::RealFieldRequired);
        }
        if g.dim() != self.dim() {
            return Err(HilbertError::DimMismatch);
        }
        let ginv = g.inverse()?;
        let gi = ginv.data().map(|z| z.re);
        match self {
            ConvexDomain::Ellipsoid(e) => {
                let q = gi.transpose() * &e.q * &gi;
                Ok(ConvexDomain::Ellipsoid(Ellipsoid::from_quadric(q)?))
            }
            ConvexDomain::Polytope(p) => {
                let push = |f: &DVector<f64>| gi.transpose() * f;
                Polytope::new(push(&p.chart), p.facets.iter().map(push).collect())
                    .map(ConvexDomain::Polytope)
            }
        }
    }
}

/// Unit real representative of p, signed so the domain's chart is positive.
fn real_unit_lift(dom: &ConvexDomain, p: &ProjPoint) -> Result<DVector<f64>, HilbertError> {
    if p.field() != Field::Real {
        return Err(HilbertError::RealFieldRequired);
    }
    if p.dim() != dom.dim() {
        return Err(HilbertError::DimMismatch);
    }
    let mut v = DVector::from_iterator(p.dim(), p.vector().iter().map(|z| z.re));
    if dom.chart_covector().dot(&v) < 0.0 {
        v = -v;
    }
    Ok(v)
}

/// Chart-normalized lift of an interior point: <chart, v> = 1.
fn chart_lift(dom: &ConvexDomain, p: &ProjPoint) -> Result<DVector<f64>, HilbertError> {
    let v = real_unit_lift(dom, p)?;
    let margin = match dom {
        ConvexDomain::Ellipsoid(e) => e.eval(&v),
        ConvexDomain::Polytope(poly) => poly
            .facets
            .iter()
            .map(|f| f.dot(&v))
            .fold(f64::INFINITY, f64::min),
    };
    if margin < INTERIOR_MARGIN {
        return Err(HilbertError::PointNotInterior);
    }
    let pairing = dom.chart_covector().dot(&v);
    if pairing <= 1e-12 {
        return Err(HilbertError::PointNotInterior);
    }
    Ok(v / pairing)
}

/// Chord parameters (t-, t+) of the boundary along v(t) = vp + t(vq - vp)
/// for chart-normalized interior lifts; t- < 0 and t+ > 1.
fn chord_params(
    dom: &ConvexDomain,
    vp: &DVector<f64>,
    vq: &DVector<f64>,
) -> Result<(f64, f64), HilbertError> {
    let delta = vq - vp;
    match dom {
        ConvexDomain::Ellipsoid(e) => {
            // <chart, delta> = 0, where the quadric is negative definite, so
            // the restricted quadratic opens downward and brackets [0, 1]
            let a = e.eval(&delta);
            let b = 2.0 * e.bilinear(vp, &delta);
            let c = e.eval(vp);
            let disc = b * b - 4.0 * a * c;
            if !(a < 0.0) || disc <= 0.0 {
                return Err(HilbertError::LineBoundaryIntersectionFailure);
            }
            let sq = disc.sqrt();
            let qq = if b >= 0.0 { -0.5 * (b + sq) } else { -0.5 * (b - sq) };
            let (r1, r2) = (qq / a, c / qq);
            Ok((r1.min(r2), r1.max(r2)))
        }
        ConvexDomain::Polytope(poly) => {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for f in &poly.facets {
                let alpha = f.dot(vp);
                let beta = f.dot(&delta);
                if beta > 1e-14 {
                    lo = lo.max(-alpha / beta);
                } else if beta < -1e-14 {
                    hi = hi.min(alpha / -beta);
                }
            }
            if !lo.is_finite() || !hi.is_finite() {
                return Err(HilbertError::LineBoundaryIntersectionFailure);
            }
            Ok((lo, hi))
        }
    }
}

/// (1/2) log of the cross ratio [a, p, q, b] of the chord through p and q,
/// with a, b the boundary points ordered a, p, q, b.
pub fn hilbert_distance(
    dom: &ConvexDomain,
    p: &ProjPoint,
    q: &ProjPoint,
) -> Result<f64, HilbertError> {
    let vp = chart_lift(dom, p)?;
    let vq = chart_lift(dom, q)?;
    if (&vq - &vp).norm() <= 1e-14 * vp.norm() {
        return Ok(0.0);
    }
    let (tm, tp) = chord_params(dom, &vp, &vq)?;
    if !(tm < 0.0 && tp > 1.0) {
        return Err(HilbertError::LineBoundaryIntersectionFailure);
    }
    let cr = ((1.0 - tm) * tp) / ((-tm) * (tp - 1.0));
    Ok(0.5 * cr.ln())
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct HausdorffCheck {
    pub hausdorff_est: f64,
    /// max of the endpoint distances; the quantity the estimate is tested against
    pub bound: f64,
    /// 2 x max Hilbert diameter of one sampling cell
    pub sampling_slack: f64,
    pub ok: bool,
}

/// Samples both segments and compares the empirical Hausdorff distance with
/// the endpoint bound max(d(p1,p2), d(q1,q2)). Sampling can only undershoot
/// the true Hausdorff distance by one cell diameter per side.
pub fn segment_hausdorff_check(
    dom: &ConvexDomain,
    p1: &ProjPoint,
    q1: &ProjPoint,
    p2: &ProjPoint,
    q2: &ProjPoint,
    samples: usize,
) -> Result<HausdorffCheck, HilbertError> {
    let samples = samples.max(2);
    let seg = |a: &ProjPoint, b: &ProjPoint| -> Result<Vec<ProjPoint>, HilbertError> {
        let va = chart_lift(dom, a)?;
        let vb = chart_lift(dom, b)?;
        (0..samples)
            .map(|i| {
                let s = i as f64 / (samples - 1) as f64;
                let v = &va * (1.0 - s) + &vb * s;
                ProjPoint::from_real_slice(v.as_slice())
                    .map_err(|_| HilbertError::PointNotInterior)
            })
            .collect()
    };
    let one = seg(p1, q1)?;
    let two = seg(p2, q2)?;

    let dist = |a: &ProjPoint, b: &ProjPoint| hilbert_distance(dom, a, b);
    let directed = |from: &[ProjPoint], to: &[ProjPoint]| -> Result<f64, HilbertError> {
        let mut worst = 0.0f64;
        for a in from {
            let mut best = f64::INFINITY;
            for b in to {
                best = best.min(dist(a, b)?);
            }
            worst = worst.max(best);
        }
        Ok(worst)
    };
    let hausdorff_est = directed(&one, &two)?.max(directed(&two, &one)?);

    let mut cell = 0.0f64;
    for w in one.windows(2).chain(two.windows(2)) {
        cell = cell.max(dist(&w[0], &w[1])?);
    }
    let sampling_slack = 2.0 * cell;

    let bound = dist(p1, p2)?.max(dist(q1, q2)?);
    Ok(HausdorffCheck {
        hausdorff_est,
        bound,
        sampling_slack,
        ok: hausdorff_est <= bound + sampling_slack,
    })
}

/// Polar dual: facets become vertices and vice versa. The dual chart is
/// evaluation at the interior witness of the primal.
pub fn dual_domain(p: &Polytope) -> Result<Polytope, HilbertError> {
    Polytope::new(p.witness.clone(), p.vertices.clone()).map_err(|_| HilbertError::UnboundedDual)
}

/// Convex hull of a point cloud in the affine chart {chart = 1}, asserted
/// chart-independent by recomputation in a second valid chart.
pub fn convex_hull_chart(
    points: &[ProjPoint],
    chart: &DVector<f64>,
) -> Result<Polytope, HilbertError> {
    if chart.len() != 3 || points.iter().any(|p| p.dim() != 3) {
        return Err(HilbertError::DimMismatch);
    }
    if points.len() < 3 {
        return Err(HilbertError::BadDomain("hull needs >= 3 points".into()));
    }
    let chart = &(chart / chart.norm());

    // sign-fix representatives toward positive chart pairing
    let mut lifts: Vec<DVector<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if p.field() != Field::Real {
            return Err(HilbertError::RealFieldRequired);
        }
        let mut v = DVector::from_iterator(3, p.vector().iter().map(|z| z.re));
        let pairing = chart.dot(&v);
        if pairing.abs() <= 1e-9 {
            return Err(HilbertError::ChartVanishes);
        }
        if pairing < 0.0 {
            v = -v;
        }
        lifts.push(v);
    }

    let first = hull_in_chart(&lifts, chart)?;

    // second chart: tilt toward a chart-plane direction, small enough to
    // stay positive on every representative
    let (u1, _) = chart_plane_basis(chart);
    let min_pair = lifts
        .iter()
        .map(|v| chart.dot(v) / v.norm())
        .fold(f64::INFINITY, f64::min);
    let max_u1 = lifts
        .iter()
        .map(|v| u1.dot(v).abs() / v.norm())
        .fold(0.0f64, f64::max);
    let delta = 0.5 * min_pair / (max_u1 + 1e-12);
    let second_chart = chart + u1 * delta;
    let second = hull_in_chart(&lifts, &(&second_chart / second_chart.norm()))?;

    if !vertex_sets_match(&first.vertices, &second.vertices, 1e-7) {
        return Err(HilbertError::HullChartMismatch);
    }
    Ok(first)
}

fn hull_in_chart(lifts: &[DVector<f64>], chart: &DVector<f64>) -> Result<Polytope, HilbertError> {
    let (u1, u2) = chart_plane_basis(chart);
    let pts: Vec<(f64, f64)> = lifts
        .iter()
        .map(|v| {
            let s = chart.dot(v);
            (u1.dot(v) / s, u2.dot(v) / s)
        })
        .collect();
    let hull = planar_hull(&pts);
    if hull.len() < 3 {
        return Err(HilbertError::BadDomain("hull is degenerate".into()));
    }
    // counterclockwise edge (A, B): interior is left of A->B
    let mut facets = Vec::with_capacity(hull.len());
    for e in 0..hull.len() {
        let (ax, ay) = pts[hull[e]];
        let (bx, by) = pts[hull[(e + 1) % hull.len()]];
        let (nx, ny) = (ay - by, bx - ax);
        let off = nx * ax + ny * ay;
        facets.push(&u1 * nx + &u2 * ny - chart * off);
    }
    Polytope::new(chart.clone(), facets)
}

/// Monotone-chain hull; returns indices, counterclockwise. Collinear points
/// are dropped so every edge is a genuine facet.
fn planar_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].partial_cmp(&pts[b]).unwrap());
    idx.dedup_by(|&mut a, &mut b| {
        (pts[a].0 - pts[b].0).abs() < 1e-12 && (pts[a].1 - pts[b].1).abs() < 1e-12
    });
    if idx.len() < 3 {
        return idx;
    }
    let scale = pts
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(1.0f64, f64::max);
    let eps = 1e-12 * scale * scale;
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (pts[a].0 - pts[o].0) * (pts[b].1 - pts[o].1)
            - (pts[a].1 - pts[o].1) * (pts[b].0 - pts[o].0)
    };
    let chain = |iter: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for p in iter {
            while out.len() >= 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= eps {
                out.pop();
            }
            out.push(p);
        }
        out
    };
    let mut lower = chain(&mut idx.iter().copied());
    let mut upper = chain(&mut idx.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn vertex_sets_match(a: &[DVector<f64>], b: &[DVector<f64>], tol: f64) -> bool {
    // chordal metric: agrees with the angle to first order, but has no
    // acos conditioning floor near zero
    let proj_dist = |v: &DVector<f64>, w: &DVector<f64>| {
        let vn = v / v.norm();
        let wn = w / w.norm();
        (&vn - &wn).norm().min((vn + wn).norm())
    };
    a.len() == b.len()
        && a.iter().all(|v| b.iter().any(|w| proj_dist(v, w) < tol))
        && b.iter().all(|w| a.iter().any(|v| proj_dist(v, w) < tol))
}

/// Unique supporting hyperplane at a boundary point of an ellipsoid: the
/// polar covector Qx, signed positive at the interior witness.
pub fn support_data(dom: &ConvexDomain, x: &ProjPoint) -> Result<DVector<f64>, HilbertError> {
    let ConvexDomain::Ellipsoid(e) = dom else {
        return Err(HilbertError::NotSmooth);
    };
    let v = real_unit_lift(dom, x)?;
    if e.eval(&v).abs() > INTERIOR_MARGIN {
        return Err(HilbertError::NotOnBoundary);
    }
    let mut cov = &e.q * &v;
    cov /= cov.norm();
    let margin = cov.dot(&e.witness);
    if margin.abs() <= 1e-12 {
        return Err(HilbertError::BadDomain("degenerate tangent covector".into()));
    }
    if margin < 0.0 {
        cov = -cov;
    }
    Ok(cov)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PositivityReport {
    /// min over distinct ordered pairs (x, y) of cov_y(vec_x)
    pub min_pairing: f64,
    pub ok: bool,
}

/// Positivity of lifts: every covector must pair positively with every
/// other point's vector. Inputs are normalized defensively; the diagonal
/// is excluded. With fewer than two pairs the min is vacuous (+inf, ok).
pub fn positivity_check(pairs: &[(DVector<f64>, DVector<f64>)]) -> PositivityReport {
    let n = pairs.len();
    if n < 2 {
        return PositivityReport {
            min_pairing: f64::INFINITY,
            ok: true,
        };
    }
    let normalized: Vec<(DVector<f64>, DVector<f64>)> = pairs
        .iter()
        .map(|(v, f)| (v / v.norm(), f / f.norm()))
        .collect();
    let min_pairing = par::fold_min(n * n, |idx| {
        let (i, j) = (idx / n, idx % n);
        if i == j {
            f64::INFINITY
        } else {
            normalized[j].1.dot(&normalized[i].0)
        }
    });
    PositivityReport {
        min_pairing,
        ok: min_pairing > 0.0,
    }
}

/// Segment with endpoints in the closure of a domain; the open part must be
/// interior, verified at 64 sample points.
pub struct ProjSegment {
    pub p: ProjPoint,
    pub q: ProjPoint,
}

impl ProjSegment {
    pub fn new(dom: &ConvexDomain, p: ProjPoint, q: ProjPoint) -> Result<Self, HilbertError> {
        let vp = real_unit_lift(dom, &p)?;
        let vq = real_unit_lift(dom, &q)?;
        let sp = dom.chart_covector().dot(&vp);
        let sq = dom.chart_covector().dot(&vq);
        if sp <= 1e-12 || sq <= 1e-12 {
            return Err(HilbertError::PointNotInterior);
        }
        let (vp, vq) = (vp / sp, vq / sq);
        for i in 1..=64 {
            let s = i as f64 / 65.0;
            let v = &vp * (1.0 - s) + &vq * s;
            let mid = ProjPoint::from_real_slice(v.as_slice())
                .map_err(|_| HilbertError::PointNotInterior)?;
            if dom.interior_margin(&mid)? < INTERIOR_MARGIN {
                return Err(HilbertError::PointNotInterior);
            }
        }
        Ok(Self { p, q })
    }
}

#[cfg(test)]
mod tests;
