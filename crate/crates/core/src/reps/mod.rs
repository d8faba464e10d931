//! The worked representations: SL(2,R) symmetric powers τ_d, the Heisenberg
//! subgroup u(m,n) of SL(3,C) with its cusp-vs-symmetric-space distortion
//! table, the 4-dimensional semisimplification pair on the free group ⟨a,b⟩,
//! and the norm contraction along the diagonal flow.
//!
//! τ_d acts on degree-(d-1) homogeneous polynomials by f ↦ f∘g⁻¹; the
//! monomial basis is ordered so that τ_d(diag(s,1/s)) = diag(s^{d-1},
//! s^{d-3}, …, s^{1-d}), which pins every sign and convention below.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::cuspgraph::{build_horoball, horoball_distance_fast, BaseGroupBall, CuspError, Vertex};
use crate::flagdyn::{act_proj, angle_distance_proj, FlagError, ProjPoint};
use crate::matgeo::{
    symmetric_space_distance, Field, MatError, SquareMatrix, DEFAULT_DET_TOL, MAX_DIM,
};

#[derive(Debug, Error)]
pub enum RepError {
    #[error("determinant {0} is not 1 within 1e-10")]
    NotUnimodular(f64),
    #[error("dimension {0} out of range (need 2..={MAX_DIM})")]
    BadDimension(usize),
    #[error("generator {0:?} must be a single lowercase ascii letter")]
    BadGeneratorName(char),
    #[error("duplicate generator {0:?}")]
    DuplicateGenerator(char),
    #[error("generator images must share one dimension")]
    MixedDims,
    #[error("relation {word:?} sits {residual:.3e} from ±identity")]
    RelationFails { word: String, residual: f64 },
    #[error("letter {0:?} names no generator")]
    UnknownLetter(char),
    #[error("ã must be hyperbolic: |trace| > 2")]
    NotHyperbolic,
    #[error("need a real point of P(R^4)")]
    BadPoint,
    #[error("collapse limit needs x2 ≠ 0 or x4 ≠ 0")]
    DegenerateInput,
    #[error("need at least {0} iterations for a rate fit")]
    TooFewIterations(u64),
    #[error("k_max {0} exceeds 14, the largest desk-sized ℤ² ball 2^k_max")]
    KMaxTooLarge(u32),
    #[error("flow times must be nonnegative and finite, got {0}")]
    BadTime(f64),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Cusp(#[from] CuspError),
    #[error(transparent)]
    Flag(#[from] FlagError),
}

/// Element of SL(2,R): det = 1 within 1e-10, row-major entries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2Element {
    m: [[f64; 2]; 2],
}

/// Trace trichotomy with a 1e-9 band around |tr| = 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sl2Class {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl Sl2Element {
    pub fn new(m: [[f64; 2]; 2]) -> Result<Self, RepError> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if !det.is_finite() || (det - 1.0).abs() > 1e-10 {
            return Err(RepError::NotUnimodular(det));
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self { m: [[1.0, 0.0], [0.0, 1.0]] }
    }

    /// diag(s, 1/s) for s ≠ 0.
    pub fn diag(s: f64) -> Result<Self, RepError> {
        Self::new([[s, 0.0], [0.0, 1.0 / s]])
    }

    pub fn rotation(theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        Self { m: [[cos, -sin], [sin, cos]] }
    }

    pub fn shear(x: f64) -> Self {
        Self { m: [[1.0, x], [0.0, 1.0]] }
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn classify(&self) -> Sl2Class {
        let t = self.trace().abs();
        if t > 2.0 + 1e-9 {
            Sl2Class::Hyperbolic
        } else if t < 2.0 - 1e-9 {
            Sl2Class::Elliptic
        } else {
            Sl2Class::Parabolic
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a = &self.m;
        let b = &other.m;
        Self {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
        }
    }

    /// Adjugate; exact inverse under det = 1.
    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.m;
        Self { m: [[d, -b], [-c, a]] }
    }

    pub fn to_matrix(&self) -> Result<SquareMatrix, RepError> {
        let m = DMatrix::from_row_slice(2, 2, &[self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]);
        Ok(SquareMatrix::from_real(m)?)
    }
}

fn pascal(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for r in 0..=n {
        let mut row = vec![1.0; r + 1];
        for c in 1..r {
            row[c] = rows[r - 1][c - 1] + rows[r - 1][c];
        }
        rows.push(row);
    }
    rows
}

/// The d-dimensional irreducible τ_d(g) on homogeneous polynomials of degree
/// d-1, basis X^j Y^{d-1-j} for j = 0,…,d-1. The unit-determinant check is
/// relaxed by the squared Frobenius norm: det τ_d = 1 exactly, but its f64
/// evaluation drifts with the condition number.
pub fn sl2_symmetric_power(g: &Sl2Element, d: usize) -> Result<SquareMatrix, RepError> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(RepError::BadDimension(d));
    }
    let p = d - 1;
    // τ(g) f = f ∘ g⁻¹, so expand in the entries of the adjugate.
    let [[a, b], [c, dd]] = g.inverse().entries();
    let binom = pascal(p);
    let mut m = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        // (aX + bY)^j (cX + dY)^{p-j}, collected on X^{i+l} Y^{p-i-l}.
        for i in 0..=j {
            for l in 0..=(p - j) {
                let coeff = binom[j][i]
                    * binom[p - j][l]
                    * a.powi(i as i32)
                    * b.powi((j - i) as i32)
                    * c.powi(l as i32)
                    * dd.powi((p - j - l) as i32);
                m[(i + l, j)] += coeff;
            }
        }
    }
    let scale = 1.0 + m.norm_squared();
    Ok(SquareMatrix::with_options(
        m.map(|x| Complex64::new(x, 0.0)),
        Field::Real,
        DEFAULT_DET_TOL * scale,
        false,
    )?)
}

/// u(m,n) = [[1, m, m²/2 + in], [0, 1, m], [0, 0, 1]] in SL(3,C).
/// Entries are exact dyadics while m² stays below 2^53.
pub fn heisenberg(m: i64, n: i64) -> SquareMatrix {
    let mf = m as f64;
    let nf = n as f64;
    let z = |re: f64, im: f64| Complex64::new(re, im);
    let data = DMatrix::from_row_slice(
        3,
        3,
        &[
            z(1.0, 0.0),
            z(mf, 0.0),
            z(mf * mf / 2.0, nf),
            z(0.0, 0.0),
            z(1.0, 0.0),
            z(mf, 0.0),
            z(0.0, 0.0),
            z(0.0, 0.0),
            z(1.0, 0.0),
        ],
    );
    SquareMatrix::new(data, Field::Complex).expect("unit determinant by construction")
}

/// Which singular values enter the symmetric-space displacement: the complex
/// SVD of SL(3,C) directly, or its realification in SL(6,R). The realified
/// displacement is exactly √2 times the complex one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingPath {
    Complex,
    Realified,
}

#[derive(Clone, Copy, Debug)]
pub struct DistortionRow {
    pub k: u32,
    pub n: u32,
    pub cusp_distance: u64,
    pub symspace_displacement: f64,
    /// 2k - 2n - 2, the horoball lower bound; negative values are vacuous.
    pub lower_bound: i64,
}

/// Distortion of the peripheral u(0,2^k): horoball distance from (id, n) to
/// (u(0,2^k), n) against the symmetric-space displacement of u(0,2^k).
/// The cusp column is O(k - n) while the displacement column is O(k): the
/// cusped group is exponentially distorted in SL(3,C).
pub fn heisenberg_distortion_table(
    k_max: u32,
    n_max: u32,
    path: EmbeddingPath,
) -> Result<Vec<DistortionRow>, RepError> {
    if k_max > 14 {
        return Err(RepError::KMaxTooLarge(k_max));
    }
    let k_max = k_max.max(1);
    let n_max = n_max.max(1);
    let base = BaseGroupBall::z2(1 << k_max)?;
    let h = build_horoball(base, n_max.max(k_max) + 1)?;
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let g = heisenberg(0, 1i64 << k);
        let disp = displacement(&g, path)?;
        for n in 1..=n_max {
            let cusp = horoball_distance_fast(
                &h,
                Vertex::new([0, 0], n),
                Vertex::new([0, 1i64 << k], n),
            )?;
            rows.push(DistortionRow {
                k,
                n,
                cusp_distance: cusp,
                symspace_displacement: disp,
                lower_bound: 2 * i64::from(k) - 2 * i64::from(n) - 2,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug)]
pub struct ShortcutRow {
    pub n: u32,
    pub cusp_distance: u64,
    pub symspace_displacement: f64,
}

/// The other §8 family: g_n = u(2^{n-1}, 0) is one horizontal hop away from
/// the identity at level n, while its displacement grows linearly in n.
pub fn heisenberg_shortcut_table(
    n_max: u32,
    path: EmbeddingPath,
) -> Result<Vec<ShortcutRow>, RepError> {
    if n_max > 14 {
        return Err(RepError::KMaxTooLarge(n_max));
    }
    let n_max = n_max.max(1);
    let base = BaseGroupBall::z2(1 << (n_max - 1).max(1))?;
    let h = build_horoball(base, n_max)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let m = 1i64 << (n - 1);
        let cusp =
            horoball_distance_fast(&h, Vertex::new([0, 0], n), Vertex::new([m, 0], n))?;
        let disp = displacement(&heisenberg(m, 0), path)?;
        rows.push(ShortcutRow { n, cusp_distance: cusp, symspace_displacement: disp });
    }
    Ok(rows)
}

fn displacement(g: &SquareMatrix, path: EmbeddingPath) -> Result<f64, RepError> {
    let (id, emb) = match path {
        EmbeddingPath::Complex => (SquareMatrix::identity(g.dim(), Field::Complex), g.clone()),
        EmbeddingPath::Realified => {
            (SquareMatrix::identity(2 * g.dim(), Field::Real), g.realified()?)
        }
    };
    Ok(symmetric_space_distance(&id, &emb)?)
}

/// Finitely many generator images plus words expected to act as ±identity.
/// Generator names are single lowercase letters; an uppercase letter in a
/// word denotes the inverse generator.
#[derive(Clone, Debug)]
pub struct RepresentationTable {
    generators: Vec<(char, SquareMatrix)>,
    relations: Vec<String>,
    dim: usize,
    field: Field,
}

impl RepresentationTable {
    pub fn new(
        generators: Vec<(char, SquareMatrix)>,
        relations: Vec<String>,
    ) -> Result<Self, RepError> {
        let Some(dim) = generators.first().map(|(_, m)| m.dim()) else {
            return Err(RepError::MixedDims);
        };
        let mut field = Field::Real;
        for (i, (name, image)) in generators.iter().enumerate() {
            if !(name.is_ascii_lowercase()) {
                return Err(RepError::BadGeneratorName(*name));
            }
            if generators[..i].iter().any(|(other, _)| other == name) {
                return Err(RepError::DuplicateGenerator(*name));
            }
            if image.dim() != dim {
                return Err(RepError::MixedDims);
            }
            if image.field() == Field::Complex {
                field = Field::Complex;
            }
        }
        let table = Self { generators, relations: Vec::new(), dim, field };
        for word in &relations {
            let residual = table.projective_identity_residual(&table.evaluate(word)?);
            if residual > 1e-8 {
                return Err(RepError::RelationFails { word: word.clone(), residual });
            }
        }
        Ok(Self { relations, ..table })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self, name: char) -> Option<&SquareMatrix> {
        self.generators.iter().find(|(g, _)| *g == name).map(|(_, m)| m)
    }

    pub fn generator_names(&self) -> Vec<char> {
        self.generators.iter().map(|(g, _)| *g).collect()
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    /// Left-to-right product of generator images; empty word gives identity.
    pub fn evaluate(&self, word: &str) -> Result<SquareMatrix, RepError> {
        let mut acc = SquareMatrix::identity(self.dim, self.field);
        for letter in word.chars() {
            if letter.is_whitespace() {
                continue;
            }
            let lower = letter.to_ascii_lowercase();
            let image = self
                .generator(lower)
                .ok_or(RepError::UnknownLetter(letter))?;
            let factor =
                if letter.is_ascii_uppercase() { image.inverse()? } else { image.clone() };
            acc = acc.mul(&factor)?;
        }
        Ok(acc)
    }

    /// max-entry distance to the nearer of ±identity.
    pub fn projective_identity_residual(&self, m: &SquareMatrix) -> f64 {
        let d = m.dim();
        let (mut plus, mut minus) = (0.0f64, 0.0f64);
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                let z = m.data()[(i, j)];
                plus = plus.max((z - target).norm());
                minus = minus.max((z + target).norm());
            }
        }
        plus.min(minus)
    }

    pub fn relation_residuals(&self) -> Result<Vec<f64>, RepError> {
        self.relations
            .iter()
            .map(|w| Ok(self.projective_identity_residual(&self.evaluate(w)?)))
            .collect()
    }
}

fn block_diag2(top: [[f64; 2]; 2], bottom: [[f64; 2]; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = top[i][j];
            m[(i + 2, j + 2)] = bottom[i][j];
        }
    }
    m
}

/// The proposition's pair on the free group ⟨a,b⟩ with b̃ = [[1,1],[0,1]]:
/// ρ(a) = id₂ ⊕ ã, ρ(b) = b̃ ⊕ b̃, and the semisimplification replaces ρ(b)
/// by id₂ ⊕ b̃ while fixing ρ(a). No relations: the group is free.
pub fn semisimplification_pair(
    a_tilde: &Sl2Element,
) -> Result<(RepresentationTable, RepresentationTable), RepError> {
    if a_tilde.classify() != Sl2Class::Hyperbolic {
        return Err(RepError::NotHyperbolic);
    }
    let id2 = Sl2Element::identity().entries();
    let bt = Sl2Element::shear(1.0).entries();
    let at = a_tilde.entries();
    let rho_a = SquareMatrix::from_real(block_diag2(id2, at))?;
    let rho_b = SquareMatrix::from_real(block_diag2(bt, bt))?;
    let ss_b = SquareMatrix::from_real(block_diag2(id2, bt))?;
    let rho = RepresentationTable::new(vec![('a', rho_a.clone()), ('b', rho_b)], vec![])?;
    let rho_ss = RepresentationTable::new(vec![('a', rho_a), ('b', ss_b)], vec![])?;
    Ok((rho, rho_ss))
}

/// `semisimplification_pair` at the default ã = diag(2, 1/2).
pub fn semisimplification_pair_default(
) -> Result<(RepresentationTable, RepresentationTable), RepError> {
    semisimplification_pair(&Sl2Element::diag(2.0)?)
}

#[derive(Clone, Copy, Debug)]
pub struct SsCollapseReport {
    /// Angle distance from ρ(bⁿ)[x] to [x₂:0:x₄:0] at the final n.
    pub limit_distance: f64,
    /// Log-log slope of distance against n, negated; 1 means C/n decay.
    pub fitted_order: f64,
    pub rate_ok: bool,
}

/// Iterates ρ(bⁿ)[x] toward the §11 limit [x₂:0:x₄:0] and fits the decay
/// order on dyadic checkpoints. Exact while n·|x| stays below 2^53.
pub fn ss_collapse_limit_check(x: &ProjPoint, n: u64) -> Result<SsCollapseReport, RepError> {
    if x.dim() != 4 || x.field() != Field::Real {
        return Err(RepError::BadPoint);
    }
    if n < 16 {
        return Err(RepError::TooFewIterations(16));
    }
    let xv = x.vector();
    if xv[1] == Complex64::new(0.0, 0.0) && xv[3] == Complex64::new(0.0, 0.0) {
        return Err(RepError::DegenerateInput);
    }
    let target = ProjPoint::from_real_slice(&[xv[1].re, 0.0, xv[3].re, 0.0])?;
    let bt = Sl2Element::shear(1.0).entries();
    let rho_b = SquareMatrix::from_real(block_diag2(bt, bt))?;

    let mut checkpoints: Vec<u64> = (2..63)
        .map(|j| 1u64 << j)
        .take_while(|&m| m < n)
        .collect();
    checkpoints.push(n);
    let mut pts = Vec::with_capacity(checkpoints.len());
    for &m in &checkpoints {
        let moved = act_proj(&rho_b.pow(m), x)?;
        pts.push((
            (m as f64).ln(),
            angle_distance_proj(&moved, &target)?,
        ));
    }
    let limit_distance = pts.last().expect("nonempty checkpoints").1;
    // Fit on checkpoints with distances safely above the acos floor.
    let fit: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(_, d)| *d > 1e-7)
        .map(|&(ln_n, d)| (ln_n, d.ln()))
        .collect();
    let fitted_order = if fit.len() < 2 { f64::NAN } else { -least_squares_slope(&fit) };
    let rate_ok = (0.8..=1.2).contains(&fitted_order);
    Ok(SsCollapseReport { limit_distance, fitted_order, rate_ok })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[derive(Clone, Copy, Debug)]
pub struct ContractionRow {
    pub k: usize,
    pub t: f64,
    /// Worst sampled ratio(t)/ratio(0) over Y ∈ span(e₁..e_k),
    /// Z ∈ span(e_{k+1}..e_d).
    pub worst_decay: f64,
    /// e^{-λt}; the pair (e_k, e_{k+1}) attains it.
    pub bound: f64,
    pub ok: bool,
    /// Worst relative disagreement between the norm along the conjugated
    /// flow g a_t g⁻¹ (coset representative g·a_t, norm ‖τ(g a_t)⁻¹·‖₂ on the
    /// moved vector τ(g)w) and the diagonal-frame norm ‖τ(a_t)⁻¹w‖₂.
    pub conjugation_gap: f64,
}

#[derive(Clone, Debug)]
pub struct ContractionReport {
    pub d: usize,
    /// log of the consecutive weight gap of τ_d(a₁), from eigenvalue moduli.
    pub lambda: f64,
    pub rows: Vec<ContractionRow>,
    pub all_ok: bool,
}

/// Contraction along a_t = diag(e^{t/2}, e^{-t/2}) in the norms
/// ‖w‖_{g(v₀)} = ‖τ(g)⁻¹w‖₂: checks ratio(t) ≤ e^{-λt}·ratio(0)·(1 + 1e-9)
/// for every splitting index k, and that moving the base point by
/// g ∈ SL(2,R) leaves the norms unchanged.
pub fn equivariant_norm_contraction(
    d: usize,
    t_samples: &[f64],
) -> Result<ContractionReport, RepError> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(RepError::BadDimension(d));
    }
    if let Some(&bad) = t_samples.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(RepError::BadTime(bad));
    }
    let tau_a1 = sl2_symmetric_power(&Sl2Element::diag(1.0f64.exp().sqrt())?, d)?;
    let moduli = tau_a1.eigenvalue_moduli()?;
    let lambda = (1..d)
        .map(|k| (moduli[k - 1] / moduli[k]).ln())
        .fold(f64::INFINITY, f64::min);

    // Deterministic direction samples: extremal axes first, then a fixed
    // well-spread batch of coefficient vectors.
    let combos = [[1.0, 0.0, 0.0], [0.7, -0.4, 0.3], [0.2, 0.9, -0.5], [-0.6, 0.1, 0.8]];
    let conjugators = [
        Sl2Element::rotation(0.7).mul(&Sl2Element::shear(0.35)),
        Sl2Element::shear(-1.2).mul(&Sl2Element::diag(1.5)?),
    ];

    let taus_g: Vec<SquareMatrix> = conjugators
        .iter()
        .map(|g| sl2_symmetric_power(g, d))
        .collect::<Result<_, RepError>>()?;

    let mut rows = Vec::new();
    for k in 1..d {
        let samples = direction_samples(d, k, &combos);
        for &t in t_samples {
            let a_t = Sl2Element::diag((t / 2.0).exp())?;
            let tau_at_inv = sl2_symmetric_power(&a_t.inverse(), d)?;
            let mut worst: f64 = 0.0;
            for (y, z) in &samples {
                let decay = norm_ratio(&tau_at_inv, y, z) / (y.norm() / z.norm());
                worst = worst.max(decay);
            }
            // Equivariance on full-support vectors w = y + z only: sections
            // inside a proper invariant subspace would amplify roundoff by
            // the expanding weight e^{(d-1)t/2}, which says nothing about
            // the norms being wrong.
            let mut conj_gap: f64 = 0.0;
            for (g, tau_g) in conjugators.iter().zip(&taus_g) {
                let tau_gat_inv = sl2_symmetric_power(&g.mul(&a_t).inverse(), d)?;
                for (y, z) in samples.iter().skip(1) {
                    let w = y + z;
                    let diag_norm = real_apply(&tau_at_inv, &w).norm();
                    let moved_norm = real_apply(&tau_gat_inv, &real_apply(tau_g, &w)).norm();
                    conj_gap = conj_gap.max((moved_norm / diag_norm - 1.0).abs());
                }
            }
            let bound = (-lambda * t).exp();
            rows.push(ContractionRow {
                k,
                t,
                worst_decay: worst,
                bound,
                ok: worst <= bound * (1.0 + 1e-9),
                conjugation_gap: conj_gap,
            });
        }
    }
    let all_ok = rows.iter().all(|r| r.ok);
    Ok(ContractionReport { d, lambda, rows, all_ok })
}

fn direction_samples(
    d: usize,
    k: usize,
    combos: &[[f64; 3]],
) -> Vec<(DVector<f64>, DVector<f64>)> {
    let mut out = Vec::new();
    // Extremal pair: slowest-contracting Y axis against fastest Z axis.
    let ek = DVector::from_fn(d, |i, _| if i == k - 1 { 1.0 } else { 0.0 });
    let ek1 = DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 });
    out.push((ek, ek1));
    for cy in combos {
        for cz in combos {
            let y = DVector::from_fn(d, |i, _| if i < k { cy[i % 3] + 0.1 } else { 0.0 });
            let z = DVector::from_fn(d, |i, _| if i >= k { cz[i % 3] + 0.1 } else { 0.0 });
            out.push((y, z));
        }
    }
    out
}

fn real_apply(m: &SquareMatrix, v: &DVector<f64>) -> DVector<f64> {
    &m.real_data() * v
}

fn norm_ratio(m: &SquareMatrix, y: &DVector<f64>, z: &DVector<f64>) -> f64 {
    real_apply(m, y).norm() / real_apply(m, z).norm()
}

#[cfg(test)]
mod tests;
