//! Deterministic random samples of matrices and directions. All sweeps and
//! certificates seed a ChaCha8 stream explicitly so reruns are byte-stable.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matgeo::{CMat, Field, RMat, SquareMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Random element of SL(d,R): Gaussian entries, determinant normalized to +1.
pub fn random_sl_real(d: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    loop {
        let mut m = RMat::from_fn(d, d, |_, _| normal(rng));
        let det = m.determinant();
        if det.abs() < 1e-6 {
            continue;
        }
        if det < 0.0 {
            m.swap_columns(0, 1);
        }
        let scale = m.determinant().abs().powf(1.0 / d as f64);
        m /= scale;
        if let Ok(g) = SquareMatrix::with_options(
            m.map(|x| Complex64::new(x, 0.0)),
            Field::Real,
            1e-6,
            false,
        ) {
            return g;
        }
    }
}

/// Random element of SL(d,C).
pub fn random_sl_complex(d: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    loop {
        let mut m = CMat::from_fn(d, d, |_, _| Complex64::new(normal(rng), normal(rng)));
        let det = m.determinant();
        if det.norm() < 1e-6 {
            continue;
        }
        // d-th root with principal branch
        let root = Complex64::from_polar(det.norm().powf(1.0 / d as f64), det.arg() / d as f64);
        m /= root;
        if let Ok(g) = SquareMatrix::with_options(m, Field::Complex, 1e-6, false) {
            return g;
        }
    }
}

/// Random special orthogonal matrix via QR of a Gaussian matrix.
pub fn random_rotation(d: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let m = RMat::from_fn(d, d, |_, _| normal(rng));
    let qr = m.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix the sign convention so q is haar-ish and det handled below
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        q.swap_columns(0, 1);
    }
    SquareMatrix::from_real(q).expect("rotation is SL")
}

/// Random hyperbolic element of SL(2,R): conjugated diag(lambda, 1/lambda).
pub fn random_hyperbolic_sl2(rng: &mut ChaCha8Rng, lambda_range: (f64, f64)) -> (SquareMatrix, f64) {
    let lam = rng.gen_range(lambda_range.0..lambda_range.1);
    let h = random_sl_real(2, rng);
    let diag = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![lam, 1.0 / lam]));
    let hd = h.data() * diag.map(|x| Complex64::new(x, 0.0)) * h.inverse().unwrap().data();
    (
        SquareMatrix::with_options(hd, Field::Real, 1e-6, false).expect("conjugate stays SL"),
        lam,
    )
}

/// Random unit vector in R^d (as a complex vector with zero imaginary part).
pub fn random_unit_real(d: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    loop {
        let v = DVector::<f64>::from_fn(d, |_, _| normal(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v.map(|x| Complex64::new(x / n, 0.0));
        }
    }
}

/// Random orthonormal d×k frame.
pub fn random_frame_real(d: usize, k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let m = DMatrix::<f64>::from_fn(d, k, |_, _| normal(rng));
        let qr = m.qr();
        let q = qr.q();
        let r = qr.r();
        if (0..k).all(|i| r[(i, i)].abs() > 1e-8) {
            return q.columns(0, k).into_owned();
        }
    }
}
