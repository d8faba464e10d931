//! The strongly-dynamics-preserving three-clause test and the
//! Benoist–Portilla–Sambarino style singular-subspace perturbation bound.

use serde::{Deserialize, Serialize};

use super::{
    act, cartan_attractor_point, grassmann_distance, transversality_gap, FlagError, FlagPoint,
    GrassPoint,
};
use crate::matgeo::{Field, SquareMatrix};
use crate::par;
use crate::sample;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SdpTols {
    /// clause (a): μ_k/μ_{k+1} must end above this
    pub gap_threshold: f64,
    /// clauses (b), (c): final flag distances must end below this
    pub dist_tol: f64,
    pub transverse_samples: usize,
    /// rejection threshold: sampled V kept only if gap(V, y.outer) ≥ this
    pub rejection_gap: f64,
    pub seed: u64,
}

impl Default for SdpTols {
    fn default() -> Self {
        Self {
            gap_threshold: 1e6,
            dist_tol: 1e-4,
            transverse_samples: 32,
            rejection_gap: 0.1,
            seed: 0x5d9e_a11c,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpIndexRow {
    pub n: usize,
    /// μ_k/μ_{k+1}(g_n)
    pub mu_gap: f64,
    /// k ∈ gap_indices(g_n); when false the distances below are absent
    pub gap_defined: bool,
    pub dist_attracting: Option<f64>,
    pub dist_repelling: Option<f64>,
    pub max_transverse_dist: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpReport {
    pub k: usize,
    pub rows: Vec<SdpIndexRow>,
    /// (a) singular-value gap grows beyond threshold
    pub clause_gap_growth: bool,
    /// (b) U_k(g_n) → x.inner and U_{d−k}(g_n⁻¹) → y.outer
    pub clause_frame_convergence: bool,
    /// (c) g_n·V → x.inner for sampled V transverse to y.outer
    pub clause_transverse_attraction: bool,
    pub all_clauses_agree: bool,
    pub tols: SdpTols,
}

/// Tests the three equivalent characterizations of a strongly
/// dynamics-preserving sequence against the limit flags x (attracting side)
/// and y (repelling side). k is taken from x.inner.
pub fn sdp_test(
    seq: &[SquareMatrix],
    x: &FlagPoint,
    y: &FlagPoint,
    tols: SdpTols,
) -> Result<SdpReport, FlagError> {
    if seq.is_empty() {
        return Err(FlagError::DimMismatch);
    }
    let d = x.dim();
    let k = x.inner.k();
    if y.dim() != d || y.outer.k() != d - k || seq.iter().any(|g| g.dim() != d) {
        return Err(FlagError::DimMismatch);
    }

    // one transverse sample shared by every index, rejection-sampled
    let mut rng = sample::rng(tols.seed);
    let mut transverse: Vec<GrassPoint> = Vec::with_capacity(tols.transverse_samples);
    let mut attempts = 0usize;
    while transverse.len() < tols.transverse_samples && attempts < tols.transverse_samples * 1000 {
        attempts += 1;
        let cand = match x.inner.field() {
            Field::Real => GrassPoint::from_real_span(sample::random_frame_real(d, k, &mut rng))?,
            Field::Complex => {
                let re = sample::random_frame_real(d, k, &mut rng);
                let im = sample::random_frame_real(d, k, &mut rng);
                let span = re.map(|x| num_complex::Complex64::new(x, 0.0))
                    + im.map(|x| num_complex::Complex64::new(0.0, x));
                GrassPoint::from_span(span, Field::Complex)?
            }
        };
        if transversality_gap(&cand, &y.outer)? >= tols.rejection_gap {
            transverse.push(cand);
        }
    }

    let rows: Vec<SdpIndexRow> = par::map_indexed(seq.len(), |n| {
        let g = &seq[n];
        let sd = match g.singular_values() {
            Ok(sd) => sd,
            Err(_) => {
                return SdpIndexRow {
                    n,
                    mu_gap: f64::NAN,
                    gap_defined: false,
                    dist_attracting: None,
                    dist_repelling: None,
                    max_transverse_dist: None,
                }
            }
        };
        let mu_gap = sd.gap(k);
        let gap_defined = sd.has_gap(k);
        if !gap_defined {
            return SdpIndexRow {
                n,
                mu_gap,
                gap_defined,
                dist_attracting: None,
                dist_repelling: None,
                max_transverse_dist: None,
            };
        }
        let dist_attracting = cartan_attractor_point(g, k)
            .and_then(|u| grassmann_distance(&u, &x.inner))
            .ok();
        let dist_repelling = g
            .inverse()
            .map_err(FlagError::from)
            .and_then(|gi| cartan_attractor_point(&gi, d - k))
            .and_then(|u| grassmann_distance(&u, &y.outer))
            .ok();
        let max_transverse_dist = transverse
            .iter()
            .map(|v| {
                act(g, v).and_then(|gv| grassmann_distance(&gv, &x.inner))
            })
            .try_fold(0.0f64, |acc, r| r.map(|x| acc.max(x)))
            .ok();
        SdpIndexRow {
            n,
            mu_gap,
            gap_defined,
            dist_attracting,
            dist_repelling,
            max_transverse_dist,
        }
    });

    let first = rows.first().unwrap();
    let last = rows.last().unwrap();
    let clause_gap_growth =
        last.mu_gap > tols.gap_threshold && (last.mu_gap >= first.mu_gap || first.mu_gap.is_nan());
    let clause_frame_convergence = matches!(
        (last.dist_attracting, last.dist_repelling),
        (Some(a), Some(r)) if a < tols.dist_tol && r < tols.dist_tol
    );
    let clause_transverse_attraction =
        matches!(last.max_transverse_dist, Some(t) if t < tols.dist_tol);
    let all_clauses_agree = clause_gap_growth == clause_frame_convergence
        && clause_frame_convergence == clause_transverse_attraction;

    Ok(SdpReport {
        k,
        rows,
        clause_gap_growth,
        clause_frame_convergence,
        clause_transverse_attraction,
        all_clauses_agree,
        tols,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BpsCheck {
    /// dist(U_k(gh), U_k(g))
    pub lhs: f64,
    /// (μ₁/μ_d)(h) · (μ_{k+1}/μ_k)(g)
    pub rhs: f64,
    pub ratio: f64,
}

/// Perturbation bound on the Cartan attractor:
/// dist(U_k(gh), U_k(g)) ≤ (μ₁/μ_d)(h) · (μ_{k+1}/μ_k)(g).
/// The metric normalization of the quoted bound is unverified, so callers
/// record the empirical ratio instead of asserting ratio ≤ 1.
pub fn bps_gap_bound_check(
    g: &SquareMatrix,
    h: &SquareMatrix,
    k: usize,
) -> Result<BpsCheck, FlagError> {
    let gh = g.mul(h)?;
    let ug = cartan_attractor_point(g, k)?;
    let ugh = cartan_attractor_point(&gh, k)?;
    let lhs = grassmann_distance(&ugh, &ug)?;
    let sd_g = g.singular_values()?;
    let sd_h = h.singular_values()?;
    let d = g.dim();
    let rhs = (sd_h.mu[0] / sd_h.mu[d - 1]) * (sd_g.mu[k] / sd_g.mu[k - 1]);
    Ok(BpsCheck {
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { f64::INFINITY },
    })
}
