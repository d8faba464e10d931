//! Projective space, Grassmannians and partial flags F_{k,d-k} with their
//! angle metrics; transversality gaps; the strongly-dynamics-preserving test;
//! and the singular-subspace perturbation bound.

mod json;
mod sdp;

pub use sdp::{bps_gap_bound_check, sdp_test, BpsCheck, SdpIndexRow, SdpReport, SdpTols};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::matgeo::{CMat, Field, MatError, SquareMatrix, DEFAULT_GAP_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlagError {
    #[error("dimension mismatch")]
    DimMismatch,
    #[error("zero vector does not define a projective point")]
    ZeroVector,
    #[error("frame is rank-deficient")]
    RankDeficient,
    #[error("frame is not orthonormal within 1e-10")]
    NotOrthonormal,
    #[error("complex data passed for a real-field object")]
    FieldMismatch,
    #[error("inner subspace is not contained in outer within 1e-9")]
    NotNested,
    #[error("matrix is not P_{0}-proximal")]
    NotProximal(usize),
    #[error("invariant splitting is numerically degenerate")]
    DegenerateSplitting,
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("bad flag JSON: {0}")]
    BadJson(String),
}

fn acos_clamped(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}

/// Point of P(K^d): a unit vector with the phase of its largest entry
/// normalized away, so equal lines get equal representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    field: Field,
    v: DVector<Complex64>,
}

impl ProjPoint {
    pub fn new(v: DVector<Complex64>, field: Field) -> Result<Self, FlagError> {
        let n = v.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(FlagError::ZeroVector);
        }
        let mut v = v / Complex64::new(n, 0.0);
        // canonical phase: make the largest-modulus entry real positive
        let lead = (0..v.len())
            .max_by(|&i, &j| v[i].norm().partial_cmp(&v[j].norm()).unwrap())
            .unwrap();
        let phase = v[lead] / Complex64::new(v[lead].norm(), 0.0);
        let conj = phase.conj();
        for x in v.iter_mut() {
            *x *= conj;
        }
        if field == Field::Real {
            if v.iter().any(|z| z.im.abs() > 1e-12) {
                return Err(FlagError::ZeroVector);
            }
            for x in v.iter_mut() {
                x.im = 0.0;
            }
        }
        Ok(Self { field, v })
    }

    pub fn from_real_slice(coords: &[f64]) -> Result<Self, FlagError> {
        Self::new(
            DVector::from_iterator(coords.len(), coords.iter().map(|&x| Complex64::new(x, 0.0))),
            Field::Real,
        )
    }

    pub fn standard_basis(d: usize, i: usize, field: Field) -> Self {
        let mut v = DVector::zeros(d);
        v[i] = Complex64::new(1.0, 0.0);
        Self { field, v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn vector(&self) -> &DVector<Complex64> {
        &self.v
    }
}

/// Angle distance cos⁻¹(|⟨v,w⟩| / (‖v‖‖w‖)) on P(K^d), valued in [0, π/2].
pub fn angle_distance_proj(p: &ProjPoint, q: &ProjPoint) -> Result<f64, FlagError> {
    if p.dim() != q.dim() || p.field() != q.field() {
        return Err(FlagError::DimMismatch);
    }
    Ok(acos_clamped(p.v.dotc(&q.v).norm()))
}

/// k-plane in K^d as an orthonormal d×k frame, with the unit Plücker vector
/// cached when the wedge dimension C(d,k) is small (k ≤ 3 or d ≤ 8).
#[derive(Debug, Clone)]
pub struct GrassPoint {
    field: Field,
    frame: CMat,
    pluecker: Option<Vec<Complex64>>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lexicographic k-subsets of 0..n.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn pluecker_of_frame(frame: &CMat) -> Vec<Complex64> {
    let (d, k) = (frame.nrows(), frame.ncols());
    let mut coords: Vec<Complex64> = subsets(d, k)
        .into_iter()
        .map(|rows| {
            let minor = CMat::from_fn(k, k, |i, j| frame[(rows[i], j)]);
            minor.determinant()
        })
        .collect();
    let norm = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in coords.iter_mut() {
            *z /= norm;
        }
    }
    coords
}

impl GrassPoint {
    /// Spanning columns, any rank-k matrix; orthonormalized by QR.
    pub fn from_span(span: CMat, field: Field) -> Result<Self, FlagError> {
        let (d, k) = (span.nrows(), span.ncols());
        if k == 0 || k > d {
            return Err(FlagError::RankDeficient);
        }
        let qr = span.qr();
        let q = qr.q();
        let r = qr.r();
        let scale = (0..k).map(|i| r[(i, i)].norm()).fold(0.0f64, f64::max);
        if scale <= 0.0 {
            return Err(FlagError::RankDeficient);
        }
        for i in 0..k {
            if r[(i, i)].norm() < 1e-12 * scale {
                return Err(FlagError::RankDeficient);
            }
        }
        let mut frame = q.columns(0, k).into_owned();
        // canonical column phases: R's diagonal made real positive
        for j in 0..k {
            let rd = r[(j, j)];
            let phase = rd / Complex64::new(rd.norm(), 0.0);
            for i in 0..d {
                let val = frame[(i, j)] * phase;
                frame[(i, j)] = val;
            }
        }
        if field == Field::Real {
            if frame.iter().any(|z| z.im.abs() > 1e-9) {
                return Err(FlagError::FieldMismatch);
            }
            frame = frame.map(|z| Complex64::new(z.re, 0.0));
        }
        Ok(Self::from_orthonormal_unchecked(frame, field))
    }

    pub fn from_real_span(span: nalgebra::DMatrix<f64>) -> Result<Self, FlagError> {
        Self::from_span(span.map(|x| Complex64::new(x, 0.0)), Field::Real)
    }

    pub fn from_orthonormal(frame: CMat, field: Field) -> Result<Self, FlagError> {
        let k = frame.ncols();
        let gram = frame.adjoint() * &frame;
        if (gram - CMat::identity(k, k)).norm() > 1e-10 {
            return Err(FlagError::NotOrthonormal);
        }
        Ok(Self::from_orthonormal_unchecked(frame, field))
    }

    fn from_orthonormal_unchecked(frame: CMat, field: Field) -> Self {
        let (d, k) = (frame.nrows(), frame.ncols());
        let pluecker = (k <= 3 || d <= 8).then(|| pluecker_of_frame(&frame));
        Self {
            field,
            frame,
            pluecker,
        }
    }

    pub fn span_of_basis(d: usize, cols: &[usize], field: Field) -> Self {
        let mut frame = CMat::zeros(d, cols.len());
        for (j, &i) in cols.iter().enumerate() {
            frame[(i, j)] = Complex64::new(1.0, 0.0);
        }
        Self::from_orthonormal_unchecked(frame, field)
    }

    pub fn from_proj_point(p: &ProjPoint) -> Self {
        let frame = CMat::from_fn(p.dim(), 1, |i, _| p.vector()[i]);
        Self::from_orthonormal_unchecked(frame, p.field())
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn k(&self) -> usize {
        self.frame.ncols()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn pluecker(&self) -> Option<&[Complex64]> {
        self.pluecker.as_deref()
    }

    /// The line spanned, when k = 1.
    pub fn as_proj_point(&self) -> Option<ProjPoint> {
        (self.k() == 1)
            .then(|| ProjPoint::new(self.frame.column(0).clone_owned(), self.field).unwrap())
    }
}

/// Angle distance on P(⋀^k K^d) restricted to the Grassmannian. The Plücker
/// pairing ⟨⋀F₁, ⋀F₂⟩ equals det(F₁ᴴF₂) (Cauchy–Binet), so no wedge vector
/// is materialized regardless of C(d,k).
pub fn grassmann_distance(v: &GrassPoint, w: &GrassPoint) -> Result<f64, FlagError> {
    if v.dim() != w.dim() || v.k() != w.k() || v.field() != w.field() {
        return Err(FlagError::DimMismatch);
    }
    // d(V,V) = 0 exactly; acos of the computed overlap cannot resolve
    // distances below ~1e-8, so equal frames take the exact path.
    if v.frame == w.frame {
        return Ok(0.0);
    }
    let overlap = (v.frame.adjoint() * &w.frame).determinant().norm();
    Ok(acos_clamped(overlap))
}

/// |det[frame_V | frame_W]| ∈ [0,1]; zero exactly at non-transversality.
pub fn transversality_gap(v: &GrassPoint, w: &GrassPoint) -> Result<f64, FlagError> {
    let d = v.dim();
    if w.dim() != d || v.k() + w.k() != d || v.field() != w.field() {
        return Err(FlagError::DimMismatch);
    }
    let mut m = CMat::zeros(d, d);
    m.columns_mut(0, v.k()).copy_from(&v.frame);
    m.columns_mut(v.k(), w.k()).copy_from(&w.frame);
    Ok(m.determinant().norm().min(1.0))
}

/// g·V, re-orthonormalized.
pub fn act(g: &SquareMatrix, v: &GrassPoint) -> Result<GrassPoint, FlagError> {
    if g.dim() != v.dim() {
        return Err(FlagError::DimMismatch);
    }
    let field = match (g.field(), v.field()) {
        (Field::Real, Field::Real) => Field::Real,
        _ => Field::Complex,
    };
    GrassPoint::from_span(g.data() * &v.frame, field)
}

pub fn act_proj(g: &SquareMatrix, p: &ProjPoint) -> Result<ProjPoint, FlagError> {
    if g.dim() != p.dim() {
        return Err(FlagError::DimMismatch);
    }
    let field = match (g.field(), p.field()) {
        (Field::Real, Field::Real) => Field::Real,
        _ => Field::Complex,
    };
    ProjPoint::new(g.data() * p.vector(), field)
}

/// Partial flag; for F_{k,d-k} configurations `nested` asserts inner ⊂ outer.
#[derive(Debug, Clone)]
pub struct FlagPoint {
    pub inner: GrassPoint,
    pub outer: GrassPoint,
    pub nested: bool,
}

impl FlagPoint {
    pub fn new(inner: GrassPoint, outer: GrassPoint, nested: bool) -> Result<Self, FlagError> {
        if inner.dim() != outer.dim() || inner.field() != outer.field() {
            return Err(FlagError::DimMismatch);
        }
        if nested {
            // containment: inner minus its projection onto outer must vanish
            let proj = outer.frame() * (outer.frame().adjoint() * inner.frame());
            if (inner.frame() - proj).norm() > 1e-9 {
                return Err(FlagError::NotNested);
            }
        }
        Ok(Self {
            inner,
            outer,
            nested,
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }
}

/// dist_F = dist on inner factors + dist on outer factors.
pub fn flag_distance(a: &FlagPoint, b: &FlagPoint) -> Result<f64, FlagError> {
    Ok(grassmann_distance(&a.inner, &b.inner)? + grassmann_distance(&a.outer, &b.outer)?)
}

#[derive(Debug, Clone)]
pub struct ProximalFixedData {
    pub attracting: GrassPoint,
    pub repelling: GrassPoint,
    /// |det[attracting | repelling]|; positive iff the splitting spans.
    pub splitting_gap: f64,
}

/// Attracting k-plane and repelling (d-k)-plane of a P_k-proximal g.
pub fn proximal_fixed_data(g: &SquareMatrix, k: usize) -> Result<ProximalFixedData, FlagError> {
    let prox = g.is_proximal(k, DEFAULT_GAP_TOL)?;
    if !prox.proximal {
        return Err(FlagError::NotProximal(k));
    }
    let (att_c, rep_c) = g.invariant_frames(k)?;
    let (attracting, repelling) = match g.field() {
        Field::Complex => (
            GrassPoint::from_span(att_c, Field::Complex)?,
            GrassPoint::from_span(rep_c, Field::Complex)?,
        ),
        Field::Real => (
            GrassPoint::from_real_span(crate::matgeo::realify_frame(&att_c)?)?,
            GrassPoint::from_real_span(crate::matgeo::realify_frame(&rep_c)?)?,
        ),
    };
    let splitting_gap = transversality_gap(&attracting, &repelling)?;
    if splitting_gap <= 0.0 {
        return Err(FlagError::DegenerateSplitting);
    }
    Ok(ProximalFixedData {
        attracting,
        repelling,
        splitting_gap,
    })
}

/// U_k(g) as a GrassPoint (Plücker-normalized k-plane).
pub fn cartan_attractor_point(g: &SquareMatrix, k: usize) -> Result<GrassPoint, FlagError> {
    let frame = g.cartan_attractor(k)?;
    match g.field() {
        Field::Complex => Ok(GrassPoint::from_span(frame, Field::Complex)?),
        // singular frames of a real matrix are real up to phase; Jacobi on
        // exactly-real input keeps them exactly real
        Field::Real => Ok(GrassPoint::from_span(frame, Field::Real)?),
    }
}
