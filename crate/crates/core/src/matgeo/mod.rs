//! Cartan and Jordan diagnostics for elements of SL(d,K): singular values
//! μ_k with their left frames U_k, eigenvalue moduli λ_k, proximality and
//! weak unipotence, and the symmetric-space distance
//! dist(gK, hK) = sqrt(Σ_j (log μ_j(g⁻¹h))²).
//!
//! Real matrices run through the same complex code path with zero imaginary
//! parts; arithmetic on exact-real inputs stays exactly real.

mod eigen;
mod json;
mod svd;

pub use eigen::{power_iteration_top, realify_frame};
pub use svd::jacobi_svd;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const DEFAULT_DET_TOL: f64 = 1e-9;
pub const DEFAULT_GAP_TOL: f64 = 1e-6;
pub const MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatError {
    #[error("matrix is not square")]
    NonSquare,
    #[error("dimension {0} outside supported range 2..={MAX_DIM}")]
    DimOutOfRange(usize),
    #[error("matrix contains non-finite entries")]
    NonFiniteEntries,
    #[error("|det - 1| = {dist:.3e} exceeds det_tol {tol:.3e}")]
    DeterminantNotUnit { dist: f64, tol: f64 },
    #[error("imaginary entries in a matrix declared real")]
    ComplexEntriesInRealField,
    #[error("one-sided Jacobi SVD did not converge")]
    SvdFailure,
    #[error("Schur iteration did not converge")]
    EigenFailure,
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("no singular-value gap at k = {0}")]
    NoSingularGap(usize),
    #[error("no eigenvalue-modulus gap at k = {0}")]
    NoModulusGap(usize),
    #[error("dimension mismatch")]
    DimMismatch,
    #[error("index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("invariant subspace is not the complexification of a real subspace")]
    FrameNotReal,
    #[error("bad matrix JSON: {0}")]
    BadJson(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Singular values of g, descending, with the unitary frames of g = U Σ V^H
/// and the set of k where μ_k/μ_{k+1} exceeds 1 + gap_tol.
#[derive(Debug, Clone)]
pub struct SingularData {
    pub mu: Vec<f64>,
    pub left: CMat,
    pub right: CMat,
    pub gap_tol: f64,
    pub gap_indices: Vec<usize>,
}

impl SingularData {
    /// μ_k / μ_{k+1}, 1-based k < d. Infinite when μ_{k+1} = 0.
    pub fn gap(&self, k: usize) -> f64 {
        let lo = self.mu[k];
        if lo == 0.0 {
            if self.mu[k - 1] == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.mu[k - 1] / lo
        }
    }

    pub fn has_gap(&self, k: usize) -> bool {
        self.gap_indices.contains(&k)
    }

    /// U_k(g): the d×k frame of the k largest singular axes.
    pub fn left_frame(&self, k: usize) -> CMat {
        self.left.columns(0, k).into_owned()
    }
}

pub fn gap_indices(mu: &[f64], gap_tol: f64) -> Vec<usize> {
    (1..mu.len())
        .filter(|&k| {
            let hi = mu[k - 1];
            let lo = mu[k];
            lo == 0.0 && hi > 0.0 || lo > 0.0 && hi / lo > 1.0 + gap_tol
        })
        .collect()
}

/// Element of SL(d,K) (or a projective map when constructed with
/// `projective`). SVD and eigenvalue caches fill on first use and are
/// write-once, so values share freely across threads.
#[derive(Debug, Clone)]
pub struct SquareMatrix {
    field: Field,
    data: CMat,
    projective_only: bool,
    svd_cache: OnceLock<Result<SingularData, MatError>>,
    eig_cache: OnceLock<Result<Vec<f64>, MatError>>,
}

impl PartialEq for SquareMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.data == other.data
    }
}

impl SquareMatrix {
    pub fn new(data: CMat, field: Field) -> Result<Self, MatError> {
        Self::with_options(data, field, DEFAULT_DET_TOL, false)
    }

    /// Skips the unit-determinant check; for matrices used only as
    /// projective maps.
    pub fn projective(data: CMat, field: Field) -> Result<Self, MatError> {
        Self::with_options(data, field, DEFAULT_DET_TOL, true)
    }

    pub fn with_options(
        data: CMat,
        field: Field,
        det_tol: f64,
        projective_only: bool,
    ) -> Result<Self, MatError> {
        if data.nrows() != data.ncols() {
            return Err(MatError::NonSquare);
        }
        let d = data.nrows();
        if !(2..=MAX_DIM).contains(&d) {
            return Err(MatError::DimOutOfRange(d));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatError::NonFiniteEntries);
        }
        if field == Field::Real && data.iter().any(|z| z.im != 0.0) {
            return Err(MatError::ComplexEntriesInRealField);
        }
        if !projective_only {
            let dist = (data.determinant() - Complex64::new(1.0, 0.0)).norm();
            if dist > det_tol {
                return Err(MatError::DeterminantNotUnit { dist, tol: det_tol });
            }
        }
        Ok(Self {
            field,
            data,
            projective_only,
            svd_cache: OnceLock::new(),
            eig_cache: OnceLock::new(),
        })
    }

    fn from_parts(data: CMat, field: Field, projective_only: bool) -> Self {
        Self {
            field,
            data,
            projective_only,
            svd_cache: OnceLock::new(),
            eig_cache: OnceLock::new(),
        }
    }

    pub fn from_real(data: RMat) -> Result<Self, MatError> {
        Self::new(data.map(|x| Complex64::new(x, 0.0)), Field::Real)
    }

    pub fn projective_from_real(data: RMat) -> Result<Self, MatError> {
        Self::projective(data.map(|x| Complex64::new(x, 0.0)), Field::Real)
    }

    pub fn identity(d: usize, field: Field) -> Self {
        Self::from_parts(CMat::identity(d, d), field, false)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_projective_only(&self) -> bool {
        self.projective_only
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    /// Real part view; meaningful only when field = Real.
    pub fn real_data(&self) -> RMat {
        self.data.map(|z| z.re)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatError> {
        if self.dim() != other.dim() {
            return Err(MatError::DimMismatch);
        }
        let field = match (self.field, other.field) {
            (Field::Real, Field::Real) => Field::Real,
            _ => Field::Complex,
        };
        Ok(Self::from_parts(
            &self.data * &other.data,
            field,
            self.projective_only || other.projective_only,
        ))
    }

    pub fn inverse(&self) -> Result<Self, MatError> {
        let inv = self
            .data
            .clone()
            .try_inverse()
            .ok_or(MatError::SingularMatrix)?;
        Ok(Self::from_parts(inv, self.field, self.projective_only))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.data.adjoint(), self.field, self.projective_only)
    }

    /// (g⁻¹)ᵀ, the action on covectors.
    pub fn inverse_transpose(&self) -> Result<Self, MatError> {
        let inv = self
            .data
            .clone()
            .try_inverse()
            .ok_or(MatError::SingularMatrix)?;
        Ok(Self::from_parts(
            inv.transpose(),
            self.field,
            self.projective_only,
        ))
    }

    /// Binary powering; exact on integer matrices while entries stay below
    /// 2^53.
    pub fn pow(&self, n: u64) -> Self {
        let d = self.dim();
        let mut acc = CMat::identity(d, d);
        let mut base = self.data.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Self::from_parts(acc, self.field, self.projective_only)
    }

    /// Realifies a complex d×d matrix as the real 2d×2d matrix acting on
    /// (Re, Im) pairs; SL(d,C) lands in SL(2d,R).
    pub fn realified(&self) -> Result<Self, MatError> {
        let d = self.dim();
        if 2 * d > MAX_DIM {
            return Err(MatError::DimOutOfRange(2 * d));
        }
        let mut out = RMat::zeros(2 * d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                let z = self.data[(i, j)];
                out[(2 * i, 2 * j)] = z.re;
                out[(2 * i, 2 * j + 1)] = -z.im;
                out[(2 * i + 1, 2 * j)] = z.im;
                out[(2 * i + 1, 2 * j + 1)] = z.re;
            }
        }
        Ok(Self::from_parts(
            out.map(|x| Complex64::new(x, 0.0)),
            Field::Real,
            self.projective_only,
        ))
    }

    /// Cached SVD with the default gap tolerance.
    pub fn singular_values(&self) -> Result<&SingularData, MatError> {
        self.svd_cache
            .get_or_init(|| {
                let (mu, left, right) = svd::jacobi_svd(&self.data)?;
                let gaps = gap_indices(&mu, DEFAULT_GAP_TOL);
                Ok(SingularData {
                    mu,
                    left,
                    right,
                    gap_tol: DEFAULT_GAP_TOL,
                    gap_indices: gaps,
                })
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// U_k(g) as an orthonormal d×k frame; defined only across a μ-gap.
    pub fn cartan_attractor(&self, k: usize) -> Result<CMat, MatError> {
        let d = self.dim();
        if k == 0 || k >= d {
            return Err(MatError::IndexOutOfRange(k, d));
        }
        let sd = self.singular_values()?;
        if !sd.has_gap(k) {
            return Err(MatError::NoSingularGap(k));
        }
        Ok(sd.left_frame(k))
    }

    /// |λ_1| ≥ … ≥ |λ_d|, cached.
    pub fn eigenvalue_moduli(&self) -> Result<&[f64], MatError> {
        self.eig_cache
            .get_or_init(|| eigen::eigenvalue_moduli(&self.data))
            .as_ref()
            .map(|v| v.as_slice())
            .map_err(|e| e.clone())
    }

    /// P_k-proximality: λ_k/λ_{k+1} > 1 + gap_tol.
    pub fn is_proximal(&self, k: usize, gap_tol: f64) -> Result<Proximality, MatError> {
        let d = self.dim();
        if k == 0 || k >= d {
            return Err(MatError::IndexOutOfRange(k, d));
        }
        let lam = self.eigenvalue_moduli()?;
        let gap = if lam[k] == 0.0 {
            if lam[k - 1] == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            lam[k - 1] / lam[k]
        };
        Ok(Proximality {
            proximal: gap > 1.0 + gap_tol,
            gap,
        })
    }

    /// True iff every eigenvalue modulus is within `tol` of 1.
    pub fn is_weakly_unipotent(&self, tol: f64) -> Result<bool, MatError> {
        Ok(self
            .eigenvalue_moduli()?
            .iter()
            .all(|&l| (l - 1.0).abs() <= tol))
    }

    /// Frames of the invariant splitting across the modulus gap at k:
    /// (span of eigenvectors for λ_1..λ_k, invariant complement).
    pub fn invariant_frames(&self, k: usize) -> Result<(CMat, CMat), MatError> {
        let d = self.dim();
        if k == 0 || k >= d {
            return Err(MatError::IndexOutOfRange(k, d));
        }
        let lam = self.eigenvalue_moduli()?;
        if lam[k - 1] <= lam[k] {
            return Err(MatError::NoModulusGap(k));
        }
        let att = eigen::invariant_frame(&self.data, k, true)?;
        let rep = eigen::invariant_frame(&self.data, d - k, false)?;
        Ok((att, rep))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.data * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proximality {
    pub proximal: bool,
    pub gap: f64,
}

/// dist_M(gK, hK) = sqrt(Σ_j (log μ_j(g⁻¹h))²) on SL(d)/SO(d) resp. SU(d).
pub fn symmetric_space_distance(g: &SquareMatrix, h: &SquareMatrix) -> Result<f64, MatError> {
    if g.dim() != h.dim() {
        return Err(MatError::DimMismatch);
    }
    let rel = g.inverse()?.mul(h)?;
    let sd = rel.singular_values()?;
    Ok(sd
        .mu
        .iter()
        .map(|&m| {
            let l = m.ln();
            l * l
        })
        .sum::<f64>()
        .sqrt())
}
