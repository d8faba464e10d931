//! Numerical certification of the free-product construction: a biproximal γ
//! and a weakly unipotent group U with transverse limit flags generate, after
//! passing to a power γᴺ and a finite-index U′, a free product acting on the
//! partial flag space F_{1,d-1}.
//!
//! Every certificate here is sampled numerical evidence at a stated net
//! resolution, never a proof; reports carry the margins and the net size so
//! the rigor is assessable.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::flagdyn::{
    act, flag_distance, proximal_fixed_data, transversality_gap, FlagError, FlagPoint, GrassPoint,
};
use crate::matgeo::{CMat, MatError, SquareMatrix, DEFAULT_GAP_TOL};
use crate::par;

#[derive(Debug, Error)]
pub enum PingPongError {
    #[error("gamma must be biproximal: a top eigenvalue gap on both sides")]
    NotBiproximal,
    #[error("generator {0} of U is not weakly unipotent")]
    NotWeaklyUnipotent(usize),
    #[error("iterated U flags did not converge; is the limit set a single flag?")]
    ULimitNotConverged,
    #[error("epsilon {0} must lie in (0, 1)")]
    BadEpsilon(f64),
    #[error("epsilon inadmissible: center separation {min_center_distance:.3e}, cross gap {min_cross_gap:.3e}")]
    EpsilonInadmissible {
        min_center_distance: f64,
        min_cross_gap: f64,
    },
    #[error("no net flags survive the transversality filter")]
    EmptyNet,
    #[error("no power up to {0} certifies the contraction")]
    PowerNotFound(u64),
    #[error("seed flag is not in the good region O")]
    SeedNotInGoodRegion,
    #[error("word must avoid consecutive U letters and must not end in U")]
    NotBoundaryWord,
    #[error("word is not reduced: {0}")]
    NonReducedWord(String),
    #[error("need a nonempty word")]
    EmptyWord,
    #[error("U needs at least one generator")]
    NoGenerators,
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Flag(#[from] FlagError),
}

/// min over the two failure modes of |det[line | hyperplane]|; flags are
/// transverse iff this is positive, and a value > ε certifies flag-metric
/// distance > ε from the non-transverse locus of `b`.
pub fn pair_transversality_gap(a: &FlagPoint, b: &FlagPoint) -> Result<f64, PingPongError> {
    let g1 = transversality_gap(&a.inner, &b.outer)?;
    let g2 = transversality_gap(&b.inner, &a.outer)?;
    Ok(g1.min(g2))
}

/// diam of F_{1,d-1} in the sum-of-angles metric: π/2 per factor.
pub fn flag_space_diameter() -> f64 {
    PI
}

/// g·F with the line re-projected into the image hyperplane, so the result
/// is exactly nested whatever the conditioning of g.
pub fn apply_flag(g: &SquareMatrix, f: &FlagPoint) -> Result<FlagPoint, PingPongError> {
    let inner = act(g, &f.inner)?;
    let outer = act(g, &f.outer)?;
    let projected = outer.frame() * (outer.frame().adjoint() * inner.frame());
    let inner = GrassPoint::from_span(projected, inner.field())?;
    Ok(FlagPoint::new(inner, outer, true)?)
}

// ---------------------------------------------------------------------------
// fixed flags

/// Attracting/repelling flag data: F_γ⁺ = (ℓ_γ⁺, H_γ⁺), F_γ⁻ = (ℓ_γ⁻, H_γ⁻),
/// and the single U-limit flag estimated by iterating the product of the
/// generators until the Cartan flags (U₁, U_{d-1})(uⁿ) stabilize.
pub fn fixed_flag_data(
    gamma: &SquareMatrix,
    u_gens: &[SquareMatrix],
) -> Result<(FlagPoint, FlagPoint, FlagPoint), PingPongError> {
    let biprox = |e: FlagError| match e {
        FlagError::NotProximal(_) => PingPongError::NotBiproximal,
        other => other.into(),
    };
    let fwd = proximal_fixed_data(gamma, 1).map_err(biprox)?;
    let bwd = proximal_fixed_data(&gamma.inverse()?, 1).map_err(biprox)?;
    // ℓ_γ⁺ ⊂ H_γ⁺ (the γ⁻¹-repelling hyperplane) and vice versa.
    let f_plus = FlagPoint::new(fwd.attracting, bwd.repelling, true)?;
    let f_minus = FlagPoint::new(bwd.attracting, fwd.repelling, true)?;

    if u_gens.is_empty() {
        return Err(PingPongError::NoGenerators);
    }
    let mut u = u_gens[0].clone();
    for g in &u_gens[1..] {
        u = u.mul(g)?;
    }
    let f_u = u_limit_flag(&u)?;
    Ok((f_plus, f_minus, f_u))
}

const U_LIMIT_MAX_LEVEL: usize = 13;

/// Squaring u^n is cancellation-free while the products (~‖u^n‖²) stay
/// below 2^53; past this entry scale the subdominant structure is destroyed
/// (the computed u^(2^17) for the shipped Jordan conjugate is exactly zero)
/// and no further samples are usable. Within the safe range the raw Cartan
/// directions converge only like 1/n, far short of the 1e-8 certificate —
/// hence the extrapolation.
const U_SQUARING_BUDGET: f64 = 6.0e7;

/// Limit of (U₁, U_{d-1})(uⁿ) along n = 2^k, accelerated: the dominant
/// singular directions of uⁿ and of (uⁿ)⁻ᴴ = (u⁻ᴴ)ⁿ expand in powers of
/// 1/n, so Richardson extrapolation of the direction samples converges
/// superlinearly where the raw sequence crawls at 1/n. The convergence
/// certificate (successive distances < 1e-8) applies to the accelerated
/// flags. The hyperplane comes from the inverse-adjoint side because the
/// direct σ_{d-1}/σ_d gap of a high power drowns in the eps·σ₁ floor.
fn u_limit_flag(u: &SquareMatrix) -> Result<FlagPoint, PingPongError> {
    let field = u.field();
    let mut fwd = u.clone();
    let mut bwd = u.inverse()?.adjoint();
    let mut lines: Vec<DVector<Complex64>> = Vec::new();
    let mut normals: Vec<DVector<Complex64>> = Vec::new();
    for k in 0..=U_LIMIT_MAX_LEVEL {
        match (fwd.cartan_attractor(1), bwd.cartan_attractor(1)) {
            (Ok(a), Ok(b)) => {
                let mut a = DVector::from_column_slice(a.as_slice());
                let mut b = DVector::from_column_slice(b.as_slice());
                if let Some(prev) = lines.last() {
                    phase_align(&mut a, prev);
                }
                if let Some(prev) = normals.last() {
                    phase_align(&mut b, prev);
                }
                lines.push(a);
                normals.push(b);
            }
            // no singular gap yet: the samples so far stay usable
            (Err(MatError::NoSingularGap(_)), _) | (_, Err(MatError::NoSingularGap(_))) => {
                if !lines.is_empty() {
                    break;
                }
            }
            (Err(e), _) | (_, Err(e)) => return Err(e.into()),
        }
        if k == U_LIMIT_MAX_LEVEL
            || fwd.data().norm() > U_SQUARING_BUDGET
            || bwd.data().norm() > U_SQUARING_BUDGET
        {
            break;
        }
        fwd = fwd.mul(&fwd)?;
        bwd = bwd.mul(&bwd)?;
    }
    let line_diag = richardson_diagonal(&lines);
    let normal_diag = richardson_diagonal(&normals);
    let steps = line_diag.len().min(normal_diag.len());
    let mut prev: Option<FlagPoint> = None;
    for k in 0..steps {
        let flag = flag_from_direction_pair(&line_diag[k], &normal_diag[k], field)?;
        if let Some(p) = &prev {
            if flag_distance(p, &flag)? < 1e-8 {
                return Ok(flag);
            }
        }
        prev = Some(flag);
    }
    Err(PingPongError::ULimitNotConverged)
}

/// Multiplies v by the unit phase making ⟨ref, v⟩ real positive; singular
/// directions are only defined up to phase, and extrapolation needs a
/// consistent representative.
fn phase_align(v: &mut DVector<Complex64>, reference: &DVector<Complex64>) {
    let ip = reference.dotc(v);
    let m = ip.norm();
    if m > 0.0 {
        let phase = (ip / m).conj();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Neville tableau diagonal for samples at h = 2^{-k}: entry k has the
/// polynomial terms through 1/n^k removed.
fn richardson_diagonal(samples: &[DVector<Complex64>]) -> Vec<DVector<Complex64>> {
    let mut rows: Vec<DVector<Complex64>> = Vec::new();
    let mut diag = Vec::new();
    for s in samples {
        let mut current = s.clone();
        for (j, prev) in rows.iter_mut().enumerate() {
            let pow = 2.0f64.powi(j as i32 + 1);
            let next = (&current * Complex64::new(pow, 0.0) - &*prev)
                .unscale(pow - 1.0);
            *prev = std::mem::replace(&mut current, next);
        }
        rows.push(current.clone());
        diag.push(current);
    }
    diag
}

/// Nested flag from a line direction and a hyperplane normal: the line is
/// projected into the hyperplane first, so the pair is exactly nested.
fn flag_from_direction_pair(
    line: &DVector<Complex64>,
    normal: &DVector<Complex64>,
    field: crate::matgeo::Field,
) -> Result<FlagPoint, PingPongError> {
    let w = normal.unscale(normal.norm());
    let mut v = line.clone();
    let ip = w.dotc(&v);
    v -= &w * ip;
    let inner = GrassPoint::from_span(CMat::from_columns(&[v.column(0)]), field)?;
    let outer = GrassPoint::from_span(orthonormal_complement_c(&CMat::from_columns(&[w.column(0)])), field)?;
    Ok(FlagPoint::new(inner, outer, true)?)
}

// ---------------------------------------------------------------------------
// nets

/// Deterministic net on F_{1,d-1}: lines from a Fibonacci sphere (d = 3) or a
/// seeded spherical sample, and for each line a net of hyperplanes through it
/// (normals sweeping the orthogonal complement). Every sample is exactly
/// nested.
#[derive(Debug, Clone)]
pub struct FlagNet {
    pub flags: Vec<FlagPoint>,
    pub requested: usize,
    pub seed: u64,
}

pub fn flag_net(d: usize, net_size: usize, seed: u64) -> Result<FlagNet, PingPongError> {
    let net_size = net_size.max(8);
    // dim P^{d-1} = d-1, fiber S^{d-2}/± has dim d-2: balance the resolutions
    let exponent = (d - 1) as f64 / (2 * d - 3) as f64;
    let n_lines = ((net_size as f64).powf(exponent).round() as usize).max(4);
    let n_fiber = (net_size / n_lines).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flags = Vec::with_capacity(n_lines * n_fiber);
    for i in 0..n_lines {
        let line = if d == 3 {
            fibonacci_sphere_point(i, n_lines)
        } else {
            random_unit(&mut rng, d)
        };
        let basis = orthonormal_complement(&line);
        for j in 0..n_fiber {
            let normal = if d == 3 {
                let t = PI * (j as f64 + 0.5) / n_fiber as f64;
                basis.column(0) * t.cos() + basis.column(1) * t.sin()
            } else {
                let c = random_unit(&mut rng, d - 1);
                &basis * c
            };
            flags.push(flag_from_line_and_normal(&line, &normal)?);
        }
    }
    Ok(FlagNet {
        flags,
        requested: net_size,
        seed,
    })
}

fn fibonacci_sphere_point(i: usize, n: usize) -> DVector<f64> {
    let golden = PI * (3.0 - 5.0f64.sqrt());
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = golden * i as f64;
    DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Hermitian orthocomplement of a unit column (d×(d-1)): Gram–Schmidt on the
/// standard basis with the axis most aligned to v dropped.
fn orthonormal_complement_c(v: &CMat) -> CMat {
    let d = v.nrows();
    let mut skip = 0;
    let mut best = 0.0;
    for i in 0..d {
        let m = v[(i, 0)].norm();
        if m > best {
            best = m;
            skip = i;
        }
    }
    let vcol = v.column(0);
    let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(d - 1);
    for j in 0..d {
        if j == skip {
            continue;
        }
        let mut c = DVector::<Complex64>::zeros(d);
        c[j] = Complex64::new(1.0, 0.0);
        let overlap = vcol.dotc(&c);
        c -= vcol.into_owned() * overlap;
        for prev in &cols {
            let ip = prev.dotc(&c);
            c -= prev * ip;
        }
        let n = c.norm();
        cols.push(c.unscale(n));
    }
    CMat::from_columns(&cols)
}

/// Orthonormal basis of v⊥ (d×(d-1)), v unit: Gram–Schmidt on the standard
/// basis with the axis most aligned to v dropped.
fn orthonormal_complement(v: &DVector<f64>) -> DMatrix<f64> {
    let d = v.len();
    let skip = v.iamax();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    for j in 0..d {
        if j == skip {
            continue;
        }
        let mut c = DVector::zeros(d);
        c[j] = 1.0;
        c -= v * v[j];
        for prev in &cols {
            let dot = prev.dot(&c);
            c -= prev * dot;
        }
        cols.push(c.normalize());
    }
    DMatrix::from_columns(&cols)
}

fn flag_from_line_and_normal(
    line: &DVector<f64>,
    normal: &DVector<f64>,
) -> Result<FlagPoint, PingPongError> {
    let inner = GrassPoint::from_real_span(DMatrix::from_columns(&[line.clone()]))?;
    let outer = GrassPoint::from_real_span(orthonormal_complement(&normal.normalize()))?;
    Ok(FlagPoint::new(inner, outer, true)?)
}

// ---------------------------------------------------------------------------
// admissibility

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdmissibilityReport {
    pub ok: bool,
    /// min pairwise flag distance between the three centers; disjointness of
    /// the 2ε-balls needs > 4ε.
    pub min_center_distance: f64,
    /// min transversality gap over sampled cross-ball flag pairs.
    pub min_cross_gap: f64,
    pub samples_per_ball: usize,
}

/// Disjointness and cross-transversality of the three 2ε-balls, sampled with
/// `net_size` seeded perturbations per ball.
pub fn epsilon_admissible(
    f_u: &FlagPoint,
    f_gamma_plus: &FlagPoint,
    f_gamma_minus: &FlagPoint,
    epsilon: f64,
    net_size: usize,
    seed: u64,
) -> Result<AdmissibilityReport, PingPongError> {
    // any positive ε is testable (huge ones simply come back not ok; the
    // ε < 1 requirement belongs to the εⁿ machinery, not here)
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PingPongError::BadEpsilon(epsilon));
    }
    let centers = [f_u, f_gamma_plus, f_gamma_minus];
    let mut min_center = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            min_center = min_center.min(flag_distance(centers[i], centers[j])?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xadb1_5517);
    let clouds: Vec<Vec<FlagPoint>> = centers
        .iter()
        .map(|c| ball_samples(c, 2.0 * epsilon, net_size, &mut rng))
        .collect::<Result<_, _>>()?;
    let mut min_gap = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let (a, b) = (&clouds[i], &clouds[j]);
            let worst = par::fold_min(a.len(), |ai| {
                let mut local = f64::INFINITY;
                for bj in b {
                    if let Ok(g) = pair_transversality_gap(&a[ai], bj) {
                        local = local.min(g);
                    }
                }
                local
            });
            min_gap = min_gap.min(worst);
        }
    }
    Ok(AdmissibilityReport {
        ok: min_center > 4.0 * epsilon && min_gap > DEFAULT_GAP_TOL,
        min_center_distance: min_center,
        min_cross_gap: min_gap,
        samples_per_ball: net_size,
    })
}

/// Seeded flags within distance `radius` of `center`: small matrix
/// perturbations rescaled until the image lands inside the ball.
fn ball_samples(
    center: &FlagPoint,
    radius: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<FlagPoint>, PingPongError> {
    let d = center.dim();
    let mut out = Vec::with_capacity(count + 1);
    out.push(center.clone());
    while out.len() <= count {
        let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let mut s = radius / 2.0;
        for _ in 0..8 {
            let g = SquareMatrix::projective_from_real(DMatrix::identity(d, d) + &a * s)?;
            let moved = apply_flag(&g, center)?;
            let dist = flag_distance(center, &moved)?;
            if dist <= radius {
                out.push(moved);
                break;
            }
            s *= 0.5 * radius / dist;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// contraction certificates

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContractionCertificate {
    /// max dist(gF₁,gF₂)/dist(F₁,F₂) over sampled near pairs in the region.
    pub lipschitz_est: f64,
    /// max dist(gF, target) over the sampled region.
    pub image_radius: f64,
    pub ok: bool,
    /// flags surviving the ε-transversality filter; the certificate's scale.
    pub net_points: usize,
    pub near_pairs: usize,
    /// smallest transversality gap among the kept flags.
    pub min_region_gap: f64,
}

/// Pairs closer than this feed the Lipschitz estimate; distant pairs say
/// nothing about local stretching.
const NEAR_PAIR_CUTOFF: f64 = 0.3;

/// Sampled version of the contraction lemmas: on the net flags that are
/// ε-far (in transversality gap) from the non-transverse locus of `excluded`,
/// estimate the Lipschitz constant of g and the radius of the image around
/// `target`; ok ⇔ both ≤ ε.
pub fn certify_contraction(
    g: &SquareMatrix,
    excluded: &FlagPoint,
    target: &FlagPoint,
    epsilon: f64,
    net: &FlagNet,
) -> Result<ContractionCertificate, PingPongError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PingPongError::BadEpsilon(epsilon));
    }
    let mut region: Vec<&FlagPoint> = Vec::new();
    let mut min_region_gap = f64::INFINITY;
    for f in &net.flags {
        let gap = pair_transversality_gap(f, excluded)?;
        if gap > epsilon {
            region.push(f);
            min_region_gap = min_region_gap.min(gap);
        }
    }
    let n = region.len();
    if n == 0 {
        return Err(PingPongError::EmptyNet);
    }
    let images: Vec<FlagPoint> = par::map_indexed(n, |i| {
        apply_flag(g, region[i]).expect("region flags stay applicable")
    });
    let image_radius = par::fold_max(n, |i| {
        flag_distance(&images[i], target).expect("matching flag dimensions")
    });

    // (max near-pair ratio, near-pair count) per left index, then combined.
    let per_row: Vec<(f64, usize)> = par::map_indexed(n, |i| {
        let mut worst = f64::NEG_INFINITY;
        let mut count = 0usize;
        for j in (i + 1)..n {
            let src = flag_distance(region[i], region[j]).expect("matching flag dimensions");
            if src > 0.0 && src <= NEAR_PAIR_CUTOFF {
                let img = flag_distance(&images[i], &images[j]).expect("matching flag dimensions");
                worst = worst.max(img / src);
                count += 1;
            }
        }
        (worst, count)
    });
    let mut lipschitz_est = f64::NEG_INFINITY;
    let mut near_pairs = 0usize;
    for (w, c) in &per_row {
        lipschitz_est = lipschitz_est.max(*w);
        near_pairs += c;
    }
    if near_pairs == 0 {
        // degenerate tiny net: fall back to all pairs
        lipschitz_est = par::fold_max(n, |i| {
            let mut worst = f64::NEG_INFINITY;
            for j in (i + 1)..n {
                let src = flag_distance(region[i], region[j]).expect("matching flag dimensions");
                if src > 0.0 {
                    let img =
                        flag_distance(&images[i], &images[j]).expect("matching flag dimensions");
                    worst = worst.max(img / src);
                }
            }
            worst
        });
    }
    Ok(ContractionCertificate {
        lipschitz_est,
        image_radius,
        ok: lipschitz_est <= epsilon && image_radius <= epsilon,
        net_points: n,
        near_pairs,
        min_region_gap,
    })
}

/// Smallest N ≤ n_max such that g^{±N} certifies: g^N contracts
/// F ∖ Z(target_bwd) into B(target_fwd, ε) and g^{-N} the reverse.
/// Deterministic doubling then bisection; ties break toward smaller N.
pub fn choose_power_n(
    g: &SquareMatrix,
    target_fwd: &FlagPoint,
    target_bwd: &FlagPoint,
    epsilon: f64,
    net: &FlagNet,
    n_max: u64,
) -> Result<u64, PingPongError> {
    let g_inv = g.inverse()?;
    let passes = |n: u64| -> Result<bool, PingPongError> {
        let fwd = certify_contraction(&g.pow(n), target_bwd, target_fwd, epsilon, net)?;
        if !fwd.ok {
            return Ok(false);
        }
        let bwd = certify_contraction(&g_inv.pow(n), target_fwd, target_bwd, epsilon, net)?;
        Ok(bwd.ok)
    };
    let mut candidates: Vec<u64> = Vec::new();
    let mut n = 1u64;
    while n < n_max {
        candidates.push(n);
        n *= 2;
    }
    candidates.push(n_max);
    let mut first_pass = None;
    let mut last_fail = 0u64;
    for &c in &candidates {
        if passes(c)? {
            first_pass = Some(c);
            break;
        }
        last_fail = c;
    }
    let Some(hi) = first_pass else {
        return Err(PingPongError::PowerNotFound(n_max));
    };
    let (mut lo, mut hi) = (last_fail + 1, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// the assembled system

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SystemConfig {
    pub epsilon: f64,
    pub net_size: usize,
    /// cap for the γ-power search
    pub n_max: u64,
    /// cap for the U′ power search (unipotent contraction is polynomial in
    /// the power, so this sits much higher than n_max)
    pub u_power_max: u64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            net_size: 4096,
            n_max: 64,
            u_power_max: 4096,
            seed: 0x9e37_79b9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblyReport {
    pub epsilon: f64,
    pub n_power: u64,
    /// U′ = the subgroup generated by the M-th powers of the U generators
    pub u_power: u64,
    pub net_size: usize,
    pub seed: u64,
    pub admissibility: AdmissibilityReport,
    pub gamma_forward: ContractionCertificate,
    pub gamma_backward: ContractionCertificate,
    /// per U′-generator: forward then backward certificate
    pub u_certificates: Vec<ContractionCertificate>,
}

/// A certified system: γᴺ and the U′ generators (M-th powers of the input
/// U generators) with their three limit flags and the admissible ε.
/// Immutable once assembled.
#[derive(Debug, Clone)]
pub struct PingPongSystem {
    gamma: SquareMatrix,
    gamma_n: SquareMatrix,
    gamma_n_inv: SquareMatrix,
    u_gens: Vec<SquareMatrix>,
    u_inverses: Vec<SquareMatrix>,
    pub f_gamma_plus: FlagPoint,
    pub f_gamma_minus: FlagPoint,
    pub f_u: FlagPoint,
    pub epsilon: f64,
    pub n_power: u64,
    pub u_power: u64,
}

impl PingPongSystem {
    /// Full pipeline: fixed flags (from the raw U generators, whose small
    /// entries keep the limit extrapolation inside the squaring budget),
    /// admissibility, the γ-power search, and the U′-power search with a
    /// contraction certificate for every powered generator.
    pub fn assemble(
        gamma: SquareMatrix,
        u_gens: Vec<SquareMatrix>,
        cfg: &SystemConfig,
    ) -> Result<(Self, AssemblyReport), PingPongError> {
        if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) {
            return Err(PingPongError::BadEpsilon(cfg.epsilon));
        }
        if u_gens.is_empty() {
            return Err(PingPongError::NoGenerators);
        }
        for (i, u) in u_gens.iter().enumerate() {
            // computed moduli of a defective eigenvalue are only accurate to
            // (eps·scale)^{1/d}, so the gate must widen with the matrix
            let scale = 1.0 + u.data().norm();
            let tol = 50.0 * (f64::EPSILON * scale).powf(1.0 / u.dim() as f64);
            if !u.is_weakly_unipotent(tol)? {
                return Err(PingPongError::NotWeaklyUnipotent(i));
            }
        }
        let (f_plus, f_minus, f_u) = fixed_flag_data(&gamma, &u_gens)?;
        let samples_per_ball = (cfg.net_size as f64).sqrt().ceil() as usize;
        let admissibility = epsilon_admissible(
            &f_u,
            &f_plus,
            &f_minus,
            cfg.epsilon,
            samples_per_ball,
            cfg.seed,
        )?;
        if !admissibility.ok {
            return Err(PingPongError::EpsilonInadmissible {
                min_center_distance: admissibility.min_center_distance,
                min_cross_gap: admissibility.min_cross_gap,
            });
        }
        let net = flag_net(gamma.dim(), cfg.net_size, cfg.seed)?;
        let n_power = choose_power_n(&gamma, &f_plus, &f_minus, cfg.epsilon, &net, cfg.n_max)?;
        let gamma_n = gamma.pow(n_power);
        let gamma_n_inv = gamma.inverse()?.pow(n_power);
        let gamma_forward = certify_contraction(&gamma_n, &f_minus, &f_plus, cfg.epsilon, &net)?;
        let gamma_backward = certify_contraction(&gamma_n_inv, &f_plus, &f_minus, cfg.epsilon, &net)?;

        // U′ power: searched on the product of the generators, then every
        // generator is certified individually at that power (doubling on a
        // failure, which can only happen with several generators).
        let mut product = u_gens[0].clone();
        for g in &u_gens[1..] {
            product = product.mul(g)?;
        }
        let mut u_power = choose_power_n(&product, &f_u, &f_u, cfg.epsilon, &net, cfg.u_power_max)?;
        let (powered, u_certificates) = loop {
            let mut powered = Vec::new();
            let mut certs = Vec::new();
            let mut all_ok = true;
            for u in &u_gens {
                let up = u.pow(u_power);
                let fwd = certify_contraction(&up, &f_u, &f_u, cfg.epsilon, &net)?;
                let bwd = certify_contraction(&up.inverse()?, &f_u, &f_u, cfg.epsilon, &net)?;
                all_ok = all_ok && fwd.ok && bwd.ok;
                certs.push(fwd);
                certs.push(bwd);
                powered.push(up);
            }
            if all_ok {
                break (powered, certs);
            }
            u_power *= 2;
            if u_power > cfg.u_power_max {
                return Err(PingPongError::PowerNotFound(cfg.u_power_max));
            }
        };
        let u_inverses: Vec<SquareMatrix> = powered
            .iter()
            .map(|u| u.inverse())
            .collect::<Result<_, _>>()?;

        let report = AssemblyReport {
            epsilon: cfg.epsilon,
            n_power,
            u_power,
            net_size: cfg.net_size,
            seed: cfg.seed,
            admissibility,
            gamma_forward,
            gamma_backward,
            u_certificates,
        };
        let system = Self {
            gamma,
            gamma_n,
            gamma_n_inv,
            u_gens: powered,
            u_inverses,
            f_gamma_plus: f_plus,
            f_gamma_minus: f_minus,
            f_u,
            epsilon: cfg.epsilon,
            n_power,
            u_power,
        };
        Ok((system, report))
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn gamma(&self) -> &SquareMatrix {
        &self.gamma
    }

    /// The U′ letter alphabet: the M-th powers of the input U generators.
    pub fn u_gens(&self) -> &[SquareMatrix] {
        &self.u_gens
    }

    /// F lies in O: ε-far in transversality gap from all three limit flags.
    pub fn in_good_region(&self, f: &FlagPoint) -> Result<bool, PingPongError> {
        for c in [&self.f_u, &self.f_gamma_plus, &self.f_gamma_minus] {
            if pair_transversality_gap(f, c)? <= self.epsilon {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Deterministic flag in O: the net sample with the largest worst-case
    /// transversality gap to the three limit flags.
    pub fn default_seed(&self) -> Result<FlagPoint, PingPongError> {
        let net = flag_net(self.dim(), 512, 7)?;
        let mut best: Option<(f64, FlagPoint)> = None;
        for f in net.flags {
            let mut margin = f64::INFINITY;
            for c in [&self.f_u, &self.f_gamma_plus, &self.f_gamma_minus] {
                margin = margin.min(pair_transversality_gap(&f, c)?);
            }
            if best.as_ref().map_or(true, |(m, _)| margin > *m) {
                best = Some((margin, f));
            }
        }
        let (margin, flag) = best.expect("net is nonempty");
        if margin <= self.epsilon {
            return Err(PingPongError::SeedNotInGoodRegion);
        }
        Ok(flag)
    }

    fn letter_matrix(&self, letter: &Letter) -> Result<SquareMatrix, PingPongError> {
        match letter {
            Letter::Gamma => Ok(self.gamma_n.clone()),
            Letter::GammaInv => Ok(self.gamma_n_inv.clone()),
            Letter::Unipotent(word) => {
                let d = self.dim();
                let mut acc = SquareMatrix::identity(d, self.gamma.field());
                for &(idx, k) in word {
                    let base = if k >= 0 {
                        &self.u_gens[idx]
                    } else {
                        &self.u_inverses[idx]
                    };
                    acc = acc.mul(&base.pow(k.unsigned_abs()))?;
                }
                Ok(acc)
            }
        }
    }

    fn check_reduced(&self, word: &ReducedWord) -> Result<(), PingPongError> {
        for l in &word.letters {
            if let Letter::Unipotent(w) = l {
                let m = self.letter_matrix(&Letter::Unipotent(w.clone()))?;
                if identity_residual(&m) < 1e-9 {
                    return Err(PingPongError::NonReducedWord(
                        "a U letter evaluates to the identity".into(),
                    ));
                }
            }
        }
        for pair in word.letters.windows(2) {
            if let (Letter::Unipotent(a), Letter::Unipotent(b)) = (&pair[0], &pair[1]) {
                let merged = self
                    .letter_matrix(&Letter::Unipotent(a.clone()))?
                    .mul(&self.letter_matrix(&Letter::Unipotent(b.clone()))?)?;
                if identity_residual(&merged) < 1e-9 {
                    return Err(PingPongError::NonReducedWord(
                        "adjacent U letters cancel".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// x₁⋯x_n(F_seed) applied rightmost-first, with the geometric-series
    /// error bound εⁿ·diam/(1-ε). If a second seed is supplied, the two
    /// results' distance is reported as `seed_agreement`.
    pub fn boundary_point(
        &self,
        word: &ReducedWord,
        seed: &FlagPoint,
        second_seed: Option<&FlagPoint>,
    ) -> Result<BoundaryPoint, PingPongError> {
        if !word.is_boundary_word() {
            return Err(PingPongError::NotBoundaryWord);
        }
        self.check_reduced(word)?;
        if !self.in_good_region(seed)? {
            return Err(PingPongError::SeedNotInGoodRegion);
        }
        let flag = self.evaluate_on_flag(word, seed)?;
        let error_bound = self.epsilon.powi(word.letters.len() as i32) * flag_space_diameter()
            / (1.0 - self.epsilon);
        let seed_agreement = match second_seed {
            None => None,
            Some(s2) => {
                if !self.in_good_region(s2)? {
                    return Err(PingPongError::SeedNotInGoodRegion);
                }
                let other = self.evaluate_on_flag(word, s2)?;
                Some(flag_distance(&flag, &other)?)
            }
        };
        Ok(BoundaryPoint {
            flag,
            error_bound,
            seed_agreement,
        })
    }

    fn evaluate_on_flag(
        &self,
        word: &ReducedWord,
        seed: &FlagPoint,
    ) -> Result<FlagPoint, PingPongError> {
        let mut f = seed.clone();
        for letter in word.letters.iter().rev() {
            f = apply_flag(&self.letter_matrix(letter)?, &f)?;
        }
        Ok(f)
    }

    /// Applies ρ(w) to a good-region seed and reports which ε-ball received
    /// it; leaving O witnesses w ≠ id.
    pub fn freeness_witness(
        &self,
        word: &ReducedWord,
        seed: &FlagPoint,
    ) -> Result<FreenessWitness, PingPongError> {
        if word.letters.is_empty() {
            return Err(PingPongError::EmptyWord);
        }
        self.check_reduced(word)?;
        if !self.in_good_region(seed)? {
            return Err(PingPongError::SeedNotInGoodRegion);
        }
        let moved = self.evaluate_on_flag(word, seed)?;
        let centers = [
            (BallLabel::GammaPlus, &self.f_gamma_plus),
            (BallLabel::GammaMinus, &self.f_gamma_minus),
            (BallLabel::Unipotent, &self.f_u),
        ];
        let mut moved_to = None;
        let mut best = f64::INFINITY;
        for (label, c) in centers {
            let dist = flag_distance(&moved, c)?;
            if dist <= self.epsilon && dist < best {
                best = dist;
                moved_to = Some(label);
            }
        }
        let is_nontrivial = !self.in_good_region(&moved)?;
        Ok(FreenessWitness {
            moved_to,
            is_nontrivial,
            flag: moved,
        })
    }
}

fn identity_residual(m: &SquareMatrix) -> f64 {
    let d = m.dim();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m.data()[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// words

/// Letter of S = {γᴺ, γ⁻ᴺ} ∪ (U′ ∖ {id}); a unipotent letter is a word in
/// the U′ generators (index, exponent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Letter {
    Gamma,
    GammaInv,
    Unipotent(Vec<(usize, i64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BallLabel {
    GammaPlus,
    GammaMinus,
    Unipotent,
}

/// Reduced word in S: no letter adjacent to its inverse. Structural checks
/// happen here; that no U letter collapses to the identity is checked
/// against a concrete system.
#[derive(Debug, Clone)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self, PingPongError> {
        for pair in letters.windows(2) {
            match (&pair[0], &pair[1]) {
                (Letter::Gamma, Letter::GammaInv) | (Letter::GammaInv, Letter::Gamma) => {
                    return Err(PingPongError::NonReducedWord(
                        "γᴺ adjacent to its inverse".into(),
                    ));
                }
                _ => {}
            }
        }
        for l in &letters {
            if let Letter::Unipotent(w) = l {
                if w.is_empty() || w.iter().any(|&(_, k)| k == 0) {
                    return Err(PingPongError::NonReducedWord(
                        "empty or zero-power U letter".into(),
                    ));
                }
            }
        }
        Ok(Self { letters })
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The two boundary-word conditions: no consecutive U letters, and the
    /// word does not end in U.
    pub fn is_boundary_word(&self) -> bool {
        let no_consecutive = !self
            .letters
            .windows(2)
            .any(|p| matches!((&p[0], &p[1]), (Letter::Unipotent(_), Letter::Unipotent(_))));
        let ends_ok = !matches!(self.letters.last(), Some(Letter::Unipotent(_)));
        no_consecutive && ends_ok
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub flag: FlagPoint,
    pub error_bound: f64,
    pub seed_agreement: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FreenessWitness {
    pub moved_to: Option<BallLabel>,
    pub is_nontrivial: bool,
    pub flag: FlagPoint,
}

// ---------------------------------------------------------------------------
// the shipped default

/// γ = k·diag(4,1,1/4)·k⁻¹ and u = h·J₃·h⁻¹ (J₃ the full Jordan block),
/// with k, h integer unimodular matrices chosen so all three limit flags are
/// pairwise transverse with determinant gaps of 1.
pub fn shipped_default_ingredients() -> (SquareMatrix, SquareMatrix) {
    let k = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);
    let k_inv = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 1.0, -1.0, 1.0]);
    let diag = DMatrix::from_row_slice(3, 3, &[4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
    let gamma = SquareMatrix::from_real(&k * diag * k_inv).expect("unimodular by construction");

    let h = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, -1.0, -1.0]);
    let h_inv = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, -1.0, 0.0, -1.0, 2.0, -1.0]);
    let jordan = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
    let u = SquareMatrix::from_real(&h * jordan * h_inv).expect("unimodular by construction");
    (gamma, u)
}

/// Assembles the default system; the report's `u_power` records the exponent
/// M found for the unipotent generator.
pub fn shipped_default_system(
    cfg: &SystemConfig,
) -> Result<(PingPongSystem, AssemblyReport), PingPongError> {
    let (gamma, u_raw) = shipped_default_ingredients();
    PingPongSystem::assemble(gamma, vec![u_raw], cfg)
}
