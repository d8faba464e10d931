//! One-sided Jacobi SVD over C.
//!
//! Chosen over bidiagonalization because the small singular values of
//! near-unipotent powers (mu_d of u(0,N)^k and friends) must come out with
//! high *relative* accuracy; Jacobi rotations only ever combine columns and
//! never subtract nearly equal quantities of the original matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::MatError;

pub type CMat = DMatrix<Complex64>;

const SWEEP_LIMIT: usize = 64;
/// Off-diagonal Gram entries below `JACOBI_EPS * sqrt(alpha*beta)` count as
/// annihilated.
const JACOBI_EPS: f64 = 1e-15;

/// Full SVD `a = u * diag(sigma) * v^H`, singular values descending.
pub fn jacobi_svd(a: &CMat) -> Result<(Vec<f64>, CMat, CMat), MatError> {
    let d = a.nrows();
    let mut w = a.clone();
    let mut v = CMat::identity(d, d);

    let mut converged = false;
    for _ in 0..SWEEP_LIMIT {
        let mut rotated = false;
        for i in 0..d {
            for j in (i + 1)..d {
                if rotate_pair(&mut w, &mut v, i, j) {
                    rotated = true;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(MatError::SvdFailure);
    }

    let mut sigma: Vec<f64> = (0..d).map(|i| w.column(i).norm()).collect();
    let mut u = w;
    for i in 0..d {
        if sigma[i] > 0.0 {
            let inv = Complex64::new(1.0 / sigma[i], 0.0);
            u.column_mut(i).apply(|x| *x *= inv);
        }
    }
    complete_zero_columns(&mut u, &sigma);

    // descending sort, stable in the original column index
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).unwrap().then(x.cmp(&y)));
    let perm_u = CMat::from_columns(&order.iter().map(|&i| u.column(i)).collect::<Vec<_>>());
    let perm_v = CMat::from_columns(&order.iter().map(|&i| v.column(i)).collect::<Vec<_>>());
    sigma = order.iter().map(|&i| sigma[i]).collect();
    u = perm_u;
    v = perm_v;

    Ok((sigma, u, v))
}

/// Orthogonalizes columns i and j of `w` (applying the same unitary to `v`);
/// returns false when the pair was already orthogonal.
fn rotate_pair(w: &mut CMat, v: &mut CMat, i: usize, j: usize) -> bool {
    let alpha = w.column(i).norm_squared();
    let beta = w.column(j).norm_squared();
    let gamma = w.column(i).dotc(&w.column(j));
    let g = gamma.norm();
    if g <= JACOBI_EPS * (alpha * beta).sqrt() || g == 0.0 {
        return false;
    }

    let phase = gamma / g;
    let zeta = (beta - alpha) / (2.0 * g);
    let t = {
        let sg = if zeta >= 0.0 { 1.0 } else { -1.0 };
        sg / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;

    apply_rotation(w, i, j, c, s, phase);
    apply_rotation(v, i, j, c, s, phase);
    true
}

/// col_i <- c*col_i - s*conj(phase)*col_j ; col_j <- s*phase*col_i + c*col_j
fn apply_rotation(m: &mut CMat, i: usize, j: usize, c: f64, s: f64, phase: Complex64) {
    let d = m.nrows();
    let pc = phase.conj();
    for r in 0..d {
        let xi = m[(r, i)];
        let xj = m[(r, j)];
        m[(r, i)] = c * xi - s * (pc * xj);
        m[(r, j)] = s * (phase * xi) + c * xj;
    }
}

/// Replaces columns with sigma = 0 by unit vectors orthogonal to the rest,
/// so `u` is unitary even for rank-deficient input.
fn complete_zero_columns(u: &mut CMat, sigma: &[f64]) {
    let d = u.nrows();
    for i in 0..d {
        if sigma[i] > 0.0 {
            continue;
        }
        let mut best: Option<(f64, nalgebra::DVector<Complex64>)> = None;
        for k in 0..d {
            let mut cand = nalgebra::DVector::<Complex64>::zeros(d);
            cand[k] = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j == i || sigma[j] == 0.0 && j > i {
                    continue;
                }
                let proj = u.column(j).dotc(&cand);
                let col = u.column(j).clone_owned();
                cand -= col * proj;
            }
            let n = cand.norm();
            if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
                best = Some((n, cand));
            }
        }
        let (n, cand) = best.unwrap();
        if n > 0.0 {
            u.set_column(i, &(cand / Complex64::new(n, 0.0)));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(u: &CMat, sigma: &[f64], v: &CMat) -> CMat {
        let d = sigma.len();
        let s = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            sigma.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        u * s * v.adjoint()
    }

    #[test]
    fn reconstructs_random_complex_matrix() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for d in [2usize, 3, 5, 8] {
            let a = CMat::from_fn(d, d, |_, _| Complex64::new(next(), next()));
            let (sigma, u, v) = jacobi_svd(&a).unwrap();
            let err = (reconstruct(&u, &sigma, &v) - &a).norm();
            assert!(err < 1e-12 * (1.0 + a.norm()), "d={d} err={err}");
            assert!((u.adjoint() * &u - CMat::identity(d, d)).norm() < 1e-12);
            assert!((v.adjoint() * &v - CMat::identity(d, d)).norm() < 1e-12);
            for k in 1..d {
                assert!(sigma[k - 1] >= sigma[k]);
            }
        }
    }

    #[test]
    fn tiny_singular_values_keep_relative_accuracy() {
        // columns with wildly different scales: Jacobi must not smear them
        let a = CMat::from_row_slice(
            3,
            3,
            &[
                Complex64::new(1e8, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1e-8, 0.0),
            ],
        );
        let (sigma, _, _) = jacobi_svd(&a).unwrap();
        assert!((sigma[0] - 1e8).abs() / 1e8 < 1e-14);
        assert!((sigma[2] - 1e-8).abs() / 1e-8 < 1e-14);
    }

    #[test]
    fn rank_deficient_input_yields_unitary_u() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let (sigma, u, _) = jacobi_svd(&a).unwrap();
        assert!(sigma[1].abs() < 1e-12);
        assert!((u.adjoint() * &u - CMat::identity(2, 2)).norm() < 1e-10);
    }
}
