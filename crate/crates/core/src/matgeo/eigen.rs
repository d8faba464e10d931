//! Eigenvalue moduli and ordered invariant subspaces via the complex Schur
//! form. Eigenvectors themselves are never extracted; sorted Schur frames are
//! all the proximal dynamics need.

use nalgebra::DVector;
use num_complex::Complex64;

use super::svd::CMat;
use super::MatError;

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 200_000;

fn schur(a: &CMat) -> Result<(CMat, CMat), MatError> {
    nalgebra::linalg::Schur::try_new(a.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .map(|s| s.unpack())
        .ok_or(MatError::EigenFailure)
}

/// |λ_1| ≥ … ≥ |λ_d|.
pub fn eigenvalue_moduli(a: &CMat) -> Result<Vec<f64>, MatError> {
    let (_, t) = schur(a)?;
    let mut m: Vec<f64> = (0..a.nrows()).map(|i| t[(i, i)].norm()).collect();
    m.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(m)
}

/// Orthonormal frame of the invariant subspace spanned by the eigenvectors of
/// the `k` eigenvalues largest (`descending = true`) or smallest in modulus.
pub fn invariant_frame(a: &CMat, k: usize, descending: bool) -> Result<CMat, MatError> {
    let d = a.nrows();
    assert!(k >= 1 && k < d);
    let (mut q, mut t) = schur(a)?;

    // bubble-sort the Schur diagonal by modulus with unitary swaps
    loop {
        let mut swapped = false;
        for i in 0..d - 1 {
            let lo = t[(i, i)].norm();
            let hi = t[(i + 1, i + 1)].norm();
            let out_of_order = if descending { hi > lo } else { hi < lo };
            if out_of_order {
                swap_adjacent(&mut q, &mut t, i);
                swapped = true;
            }
        }
        if !swapped {
            break;
        }
    }

    Ok(q.columns(0, k).into_owned())
}

/// Swap diagonal entries i, i+1 of upper-triangular `t` by a unitary
/// similarity, accumulating into `q`.
fn swap_adjacent(q: &mut CMat, t: &mut CMat, i: usize) {
    let t11 = t[(i, i)];
    let t12 = t[(i, i + 1)];
    let t22 = t[(i + 1, i + 1)];

    // eigenvector of [[t11,t12],[0,t22]] for t22 is (t12, t22-t11)
    let v1 = t12;
    let v2 = t22 - t11;
    let n = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    let (g11, g21) = if n == 0.0 {
        // equal diagonal, zero coupling: swap is a no-op on values
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        (v1 / n, v2 / n)
    };
    // second column completes a 2x2 unitary
    let g12 = -g21.conj();
    let g22 = g11.conj();

    let d = t.nrows();
    // t <- G^H t (rows i, i+1)
    for c in 0..d {
        let a = t[(i, c)];
        let b = t[(i + 1, c)];
        t[(i, c)] = g11.conj() * a + g21.conj() * b;
        t[(i + 1, c)] = g12.conj() * a + g22.conj() * b;
    }
    // t <- t G (cols i, i+1)
    for r in 0..d {
        let a = t[(r, i)];
        let b = t[(r, i + 1)];
        t[(r, i)] = a * g11 + b * g21;
        t[(r, i + 1)] = a * g12 + b * g22;
    }
    t[(i + 1, i)] = Complex64::new(0.0, 0.0);
    // q <- q G
    for r in 0..q.nrows() {
        let a = q[(r, i)];
        let b = q[(r, i + 1)];
        q[(r, i)] = a * g11 + b * g21;
        q[(r, i + 1)] = a * g12 + b * g22;
    }
}

/// Orthonormal real frame spanning the same subspace as a conjugation-closed
/// complex frame (d×k); errors when the span is not the complexification of a
/// real subspace.
pub fn realify_frame(frame: &CMat) -> Result<nalgebra::DMatrix<f64>, MatError> {
    let d = frame.nrows();
    let k = frame.ncols();
    let mut stacked = nalgebra::DMatrix::<f64>::zeros(d, 2 * k);
    for j in 0..k {
        for i in 0..d {
            stacked[(i, j)] = frame[(i, j)].re;
            stacked[(i, k + j)] = frame[(i, j)].im;
        }
    }
    let qr = stacked.col_piv_qr();
    let qmat = qr.q();
    let rmat = qr.r();
    let scale = rmat[(0, 0)].abs().max(1e-300);
    let mut rank = 0;
    for i in 0..k.min(rmat.nrows()) {
        if rmat[(i, i)].abs() > 1e-10 * scale {
            rank += 1;
        }
    }
    if rank != k {
        return Err(MatError::FrameNotReal);
    }
    let real = qmat.columns(0, k).into_owned();
    // confirm the real span reproduces the complex one
    let real_c = real.map(|x| Complex64::new(x, 0.0));
    let resid = (frame - &real_c * (real_c.adjoint() * frame)).norm();
    if resid > 1e-8 * (1.0 + frame.norm()) {
        return Err(MatError::FrameNotReal);
    }
    Ok(real)
}

/// Power iteration estimate of μ₁ = ‖a‖₂; test oracle, exported for reuse.
pub fn power_iteration_top(a: &CMat, iters: usize) -> f64 {
    let d = a.nrows();
    let ata = a.adjoint() * a;
    let mut v = DVector::<Complex64>::from_fn(d, |i, _| {
        Complex64::new(1.0 + (i as f64) * 0.37, 0.11 * (i as f64 + 1.0))
    });
    v /= Complex64::new(v.norm(), 0.0);
    let mut lam = 0.0;
    for _ in 0..iters {
        let w = &ata * &v;
        lam = w.norm();
        if lam == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(lam, 0.0);
    }
    lam.sqrt()
}
