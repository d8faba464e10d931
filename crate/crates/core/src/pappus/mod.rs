//! Marked-box machinery: incidence-verified point/line configurations, the
//! duality and 3-cycle actions on them, modular-group orbits, and limit-set
//! rendering.
//!
//! Boxes come in two arithmetic flavors. Exact boxes (`BigInt` homogeneous
//! coordinates) make the group relations a³ = d² = 1 checkable as literal
//! equalities with zero residual; float boxes exist for rendering speed and
//! carry their worst incidence residual so drift stays observable.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par;

/// Residual gate for validating externally supplied boxes.
pub const INCIDENCE_TOL: f64 = 1e-9;

/// Orbit enumeration cap; exact coordinates roughly quadruple in bit length
/// per cycle application, so deeper orbits stop being interactive.
pub const MAX_ORBIT_LEN: usize = 12;

#[derive(Debug, Error)]
pub enum PappusError {
    #[error("arguments coincide projectively")]
    CoincidentArguments,
    #[error("a required meet or join degenerated")]
    DegenerateConfiguration,
    #[error("incidence {index} violated (residual {residual:.3e})")]
    IncidenceViolated { index: usize, residual: f64 },
    #[error("not a normal-form word: {0}")]
    BadWord(String),
    #[error("orbit depth {0} exceeds the supported maximum")]
    DepthTooLarge(usize),
    #[error("bad box data: {0}")]
    BadBoxData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coordinate arithmetic a box can run on: exact integers or floats.
pub trait BoxScalar: Clone + PartialEq + fmt::Debug + Send + Sync {
    const EXACT: bool;
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Canonical scaling of a homogeneous triple: gcd-reduced with the first
    /// nonzero coordinate positive (exact), or unit-normalized (float).
    fn normalize(v: &mut [Self; 3]);
    /// Total order on coordinates; fixes the flip representative.
    fn cmp_coord(&self, other: &Self) -> Ordering;
    fn to_f64(&self) -> f64;
}

impl BoxScalar for BigInt {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn normalize(v: &mut [Self; 3]) {
        let mut g = BigInt::from(0);
        for c in v.iter() {
            g = g.gcd(c);
        }
        if Zero::is_zero(&g) {
            return;
        }
        if !g.is_one() {
            for c in v.iter_mut() {
                *c = &*c / &g;
            }
        }
        if v.iter()
            .find(|c| !Zero::is_zero(*c))
            .is_some_and(|c| c.is_negative())
        {
            for c in v.iter_mut() {
                *c = -&*c;
            }
        }
    }

    fn cmp_coord(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::INFINITY)
    }
}

impl BoxScalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn normalize(v: &mut [Self; 3]) {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            return;
        }
        for c in v.iter_mut() {
            *c /= n;
        }
        // sign keyed to the first clearly nonzero coordinate so one-ulp noise
        // near zero cannot flip the representative
        if let Some(c) = v.iter().find(|c| c.abs() > 1e-9) {
            if *c < 0.0 {
                for c in v.iter_mut() {
                    *c = -*c;
                }
            }
        }
    }

    fn cmp_coord(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

fn cross<S: BoxScalar>(u: &[S; 3], v: &[S; 3]) -> [S; 3] {
    [
        u[1].mul(&v[2]).sub(&u[2].mul(&v[1])),
        u[2].mul(&v[0]).sub(&u[0].mul(&v[2])),
        u[0].mul(&v[1]).sub(&u[1].mul(&v[0])),
    ]
}

fn dot<S: BoxScalar>(u: &[S; 3], v: &[S; 3]) -> S {
    u[0].mul(&v[0]).add(&u[1].mul(&v[1])).add(&u[2].mul(&v[2]))
}

/// |⟨l, v⟩| after unit normalization, as a float; exactly 0.0 only when the
/// exact dot vanishes (for exact scalars).
fn incidence_residual<S: BoxScalar>(l: &[S; 3], v: &[S; 3]) -> f64 {
    let d = dot(l, v);
    if d.is_zero() {
        return 0.0;
    }
    let norm = |w: &[S; 3]| {
        let (a, b, c) = (w[0].to_f64(), w[1].to_f64(), w[2].to_f64());
        (a * a + b * b + c * c).sqrt()
    };
    let est = d.to_f64().abs() / (norm(l) * norm(v));
    if est == 0.0 || !est.is_finite() {
        // the exact value is nonzero even when the float estimate degenerates
        f64::MIN_POSITIVE
    } else {
        est
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint<S: BoxScalar> {
    coords: [S; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjLine<S: BoxScalar> {
    coords: [S; 3],
}

impl<S: BoxScalar> ProjPoint<S> {
    pub fn new(mut coords: [S; 3]) -> Option<Self> {
        if coords.iter().all(S::is_zero) {
            return None;
        }
        S::normalize(&mut coords);
        Some(Self { coords })
    }

    pub fn coords(&self) -> &[S; 3] {
        &self.coords
    }

    /// The combination a·p + b·q, staying on the line pq.
    pub fn weighted(a: &S, p: &Self, b: &S, q: &Self) -> Option<Self> {
        Self::new([
            a.mul(&p.coords[0]).add(&b.mul(&q.coords[0])),
            a.mul(&p.coords[1]).add(&b.mul(&q.coords[1])),
            a.mul(&p.coords[2]).add(&b.mul(&q.coords[2])),
        ])
    }
}

impl<S: BoxScalar> ProjLine<S> {
    pub fn new(mut coords: [S; 3]) -> Option<Self> {
        if coords.iter().all(S::is_zero) {
            return None;
        }
        S::normalize(&mut coords);
        Some(Self { coords })
    }

    pub fn coords(&self) -> &[S; 3] {
        &self.coords
    }
}

/// The projective line through two distinct points.
pub fn line_through<S: BoxScalar>(
    p: &ProjPoint<S>,
    q: &ProjPoint<S>,
) -> Result<ProjLine<S>, PappusError> {
    ProjLine::new(cross(&p.coords, &q.coords)).ok_or(PappusError::CoincidentArguments)
}

/// The intersection point of two distinct lines.
pub fn meet<S: BoxScalar>(
    l: &ProjLine<S>,
    m: &ProjLine<S>,
) -> Result<ProjPoint<S>, PappusError> {
    ProjPoint::new(cross(&l.coords, &m.coords)).ok_or(PappusError::CoincidentArguments)
}

pub fn point_on_line<S: BoxScalar>(l: &ProjLine<S>, p: &ProjPoint<S>) -> f64 {
    incidence_residual(&l.coords, &p.coords)
}

// Tuple positions. Points run (p, q, r, s, t, b); lines run (P, Q, R, S, T, B).
pub const PT_P: usize = 0;
pub const PT_Q: usize = 1;
pub const PT_R: usize = 2;
pub const PT_S: usize = 3;
pub const PT_T: usize = 4;
pub const PT_B: usize = 5;
pub const LN_P: usize = 0;
pub const LN_Q: usize = 1;
pub const LN_R: usize = 2;
pub const LN_S: usize = 3;
pub const LN_T: usize = 4;
pub const LN_B: usize = 5;

/// The fourteen incidences of the box figure: (line, point) index pairs.
const INCIDENCES: [(usize, usize); 14] = [
    (LN_T, PT_P),
    (LN_T, PT_T),
    (LN_T, PT_Q),
    (LN_B, PT_S),
    (LN_B, PT_B),
    (LN_B, PT_R),
    (LN_P, PT_S),
    (LN_P, PT_T),
    (LN_Q, PT_T),
    (LN_Q, PT_R),
    (LN_S, PT_P),
    (LN_S, PT_B),
    (LN_R, PT_B),
    (LN_R, PT_Q),
];

/// Flip around the central axis tb: p↔q, r↔s, P↔Q, R↔S.
const FLIP: [usize; 6] = [1, 0, 3, 2, 4, 5];

/// A marked box: six points and six lines satisfying the box incidences,
/// stored as the lexicographically smaller of the tuple and its flip.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedBox<S: BoxScalar> {
    points: [ProjPoint<S>; 6],
    lines: [ProjLine<S>; 6],
    residual: f64,
}

impl<S: BoxScalar> MarkedBox<S> {
    /// Validating constructor for externally supplied data: exact inputs must
    /// satisfy every incidence identically, floats within `INCIDENCE_TOL`.
    pub fn new(
        points: [ProjPoint<S>; 6],
        lines: [ProjLine<S>; 6],
    ) -> Result<Self, PappusError> {
        let bx = Self::assemble(points, lines)?;
        if bx.residual > INCIDENCE_TOL {
            let (index, residual) = bx.worst_incidence();
            return Err(PappusError::IncidenceViolated { index, residual });
        }
        Ok(bx)
    }

    /// Internal constructor for operation outputs: canonicalizes and records
    /// the residual; exact outputs are still required to verify identically.
    fn assemble(
        points: [ProjPoint<S>; 6],
        lines: [ProjLine<S>; 6],
    ) -> Result<Self, PappusError> {
        let mut bx = Self {
            points,
            lines,
            residual: 0.0,
        };
        bx.canonicalize();
        let (index, residual) = bx.worst_incidence();
        bx.residual = residual;
        if S::EXACT && residual != 0.0 {
            return Err(PappusError::IncidenceViolated { index, residual });
        }
        Ok(bx)
    }

    fn worst_incidence(&self) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for (i, &(l, p)) in INCIDENCES.iter().enumerate() {
            let r = point_on_line(&self.lines[l], &self.points[p]);
            if r > worst.1 {
                worst = (i, r);
            }
        }
        worst
    }

    fn canonicalize(&mut self) {
        let flipped = self.flipped_raw();
        if self.tuple_cmp(&flipped) == Ordering::Greater {
            *self = flipped;
        }
    }

    fn tuple_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.coord_iter().zip(other.coord_iter()) {
            let ord = a.cmp_coord(b);
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }

    fn coord_iter(&self) -> impl Iterator<Item = &S> {
        self.points
            .iter()
            .flat_map(|p| p.coords.iter())
            .chain(self.lines.iter().flat_map(|l| l.coords.iter()))
    }

    fn flipped_raw(&self) -> Self {
        Self {
            points: FLIP.map(|i| self.points[i].clone()),
            lines: FLIP.map(|i| self.lines[i].clone()),
            residual: self.residual,
        }
    }

    pub fn points(&self) -> &[ProjPoint<S>; 6] {
        &self.points
    }

    pub fn lines(&self) -> &[ProjLine<S>; 6] {
        &self.lines
    }

    /// Worst incidence residual observed when this box was built; always 0
    /// for exact boxes, and a drift monitor for float ones.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// The duality ι: pure relabeling (s,r,p,q,b,t | R,S,Q,P,B,T), so it is
/// arithmetic-free; ι² is the flip, hence the identity on marked boxes.
pub fn dual_box<S: BoxScalar>(bx: &MarkedBox<S>) -> Result<MarkedBox<S>, PappusError> {
    const PT_PERM: [usize; 6] = [PT_S, PT_R, PT_P, PT_Q, PT_B, PT_T];
    const LN_PERM: [usize; 6] = [LN_R, LN_S, LN_Q, LN_P, LN_B, LN_T];
    MarkedBox::assemble(
        PT_PERM.map(|i| bx.points[i].clone()),
        LN_PERM.map(|i| bx.lines[i].clone()),
    )
}

/// The 3-cycle a: one application of Pappus's theorem followed by duality,
/// landing on (PS, QR, p, q, (qs)(pr), t | qs, pr, Q, P, (QR)(PS), T).
pub fn a_cycle<S: BoxScalar>(bx: &MarkedBox<S>) -> Result<MarkedBox<S>, PappusError> {
    let degen = |_| PappusError::DegenerateConfiguration;
    let ps = meet(&bx.lines[LN_P], &bx.lines[LN_S]).map_err(degen)?;
    let qr = meet(&bx.lines[LN_Q], &bx.lines[LN_R]).map_err(degen)?;
    let qs = line_through(&bx.points[PT_Q], &bx.points[PT_S]).map_err(degen)?;
    let pr = line_through(&bx.points[PT_P], &bx.points[PT_R]).map_err(degen)?;
    let pappus_point = meet(&qs, &pr).map_err(degen)?;
    let pappus_line = line_through(&qr, &ps).map_err(degen)?;
    MarkedBox::assemble(
        [
            ps,
            qr,
            bx.points[PT_P].clone(),
            bx.points[PT_Q].clone(),
            pappus_point,
            bx.points[PT_T].clone(),
        ],
        [
            qs,
            pr,
            bx.lines[LN_Q].clone(),
            bx.lines[LN_P].clone(),
            pappus_line,
            bx.lines[LN_T].clone(),
        ],
    )
}

/// a⁻¹ = a².
pub fn a_cycle_inv<S: BoxScalar>(bx: &MarkedBox<S>) -> Result<MarkedBox<S>, PappusError> {
    a_cycle(&a_cycle(bx)?)
}

/// Distance between float boxes as marked boxes: worst coordinate-triple
/// distance over the tuple, minimized over the flip.
pub fn box_distance(a: &MarkedBox<f64>, b: &MarkedBox<f64>) -> f64 {
    fn tuple_distance(a: &MarkedBox<f64>, b: &MarkedBox<f64>) -> f64 {
        let triple = |x: &[f64; 3], y: &[f64; 3]| {
            let plus: f64 = (0..3).map(|i| (x[i] + y[i]).powi(2)).sum();
            let minus: f64 = (0..3).map(|i| (x[i] - y[i]).powi(2)).sum();
            plus.min(minus).sqrt()
        };
        let mut worst = 0.0f64;
        for i in 0..6 {
            worst = worst.max(triple(&a.points[i].coords, &b.points[i].coords));
            worst = worst.max(triple(&a.lines[i].coords, &b.lines[i].coords));
        }
        worst
    }
    tuple_distance(a, b).min(tuple_distance(a, &b.flipped_raw()))
}

/// The exact standard box: corners of the unit square with t, b the edge
/// midpoints. Every derived line passes its incidences identically.
pub fn standard_box() -> MarkedBox<BigInt> {
    let pt = |coords: [i64; 3]| ProjPoint::new(coords.map(BigInt::from)).expect("nonzero");
    let p = pt([0, 1, 1]);
    let q = pt([1, 1, 1]);
    let r = pt([1, 0, 1]);
    let s = pt([0, 0, 1]);
    let t = pt([1, 2, 2]);
    let b = pt([1, 0, 2]);
    let lines = [
        line_through(&s, &t).expect("distinct"),
        line_through(&t, &r).expect("distinct"),
        line_through(&b, &q).expect("distinct"),
        line_through(&p, &b).expect("distinct"),
        line_through(&p, &q).expect("distinct"),
        line_through(&s, &r).expect("distinct"),
    ];
    MarkedBox::new([p, q, r, s, t, b], lines).expect("standard box is incident")
}

/// Rounds an exact box to floats, revalidating the incidences.
pub fn to_float(bx: &MarkedBox<BigInt>) -> Result<MarkedBox<f64>, PappusError> {
    let conv = |c: &[BigInt; 3]| -> [f64; 3] {
        [
            BoxScalar::to_f64(&c[0]),
            BoxScalar::to_f64(&c[1]),
            BoxScalar::to_f64(&c[2]),
        ]
    };
    let pt = |p: &ProjPoint<BigInt>| {
        ProjPoint::new(conv(&p.coords))
            .ok_or_else(|| PappusError::BadBoxData("coordinate overflow".into()))
    };
    let ln = |l: &ProjLine<BigInt>| {
        ProjLine::new(conv(&l.coords))
            .ok_or_else(|| PappusError::BadBoxData("coordinate overflow".into()))
    };
    let points = [
        pt(&bx.points[0])?,
        pt(&bx.points[1])?,
        pt(&bx.points[2])?,
        pt(&bx.points[3])?,
        pt(&bx.points[4])?,
        pt(&bx.points[5])?,
    ];
    let lines = [
        ln(&bx.lines[0])?,
        ln(&bx.lines[1])?,
        ln(&bx.lines[2])?,
        ln(&bx.lines[3])?,
        ln(&bx.lines[4])?,
        ln(&bx.lines[5])?,
    ];
    MarkedBox::new(points, lines)
}

// ---------------------------------------------------------------------------
// Words in ⟨a, d : a³ = d² = 1⟩

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Syllable {
    A,
    AInv,
    D,
}

impl Syllable {
    fn is_rotation(self) -> bool {
        matches!(self, Syllable::A | Syllable::AInv)
    }

    fn token(self) -> &'static str {
        match self {
            Syllable::A => "a",
            Syllable::AInv => "a'",
            Syllable::D => "d",
        }
    }
}

/// A normal-form word: syllables from {a, a⁻¹, d} with rotation and duality
/// syllables alternating (no aa, aa⁻¹, a⁻¹a, a⁻¹a⁻¹, dd substrings).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoxWord {
    sylls: Vec<Syllable>,
}

impl BoxWord {
    pub fn new(sylls: Vec<Syllable>) -> Result<Self, PappusError> {
        for w in sylls.windows(2) {
            if w[0].is_rotation() == w[1].is_rotation() {
                return Err(PappusError::BadWord(format!(
                    "adjacent syllables {}{} are not normal form",
                    w[0].token(),
                    w[1].token()
                )));
            }
        }
        Ok(Self { sylls })
    }

    pub fn identity() -> Self {
        Self { sylls: Vec::new() }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.sylls
    }

    pub fn len(&self) -> usize {
        self.sylls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sylls.is_empty()
    }

    fn accepts_prefix(&self, s: Syllable) -> bool {
        self.sylls
            .first()
            .is_none_or(|first| first.is_rotation() != s.is_rotation())
    }

    fn prepended(&self, s: Syllable) -> Self {
        let mut sylls = Vec::with_capacity(self.sylls.len() + 1);
        sylls.push(s);
        sylls.extend_from_slice(&self.sylls);
        Self { sylls }
    }

    pub fn parse(text: &str) -> Result<Self, PappusError> {
        let mut sylls = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            match c {
                'a' => {
                    if chars.peek() == Some(&'\'') {
                        chars.next();
                        sylls.push(Syllable::AInv);
                    } else {
                        sylls.push(Syllable::A);
                    }
                }
                'd' => sylls.push(Syllable::D),
                'e' if sylls.is_empty() && chars.peek().is_none() => {}
                ' ' => {}
                other => {
                    return Err(PappusError::BadWord(format!(
                        "unexpected character {other:?}"
                    )))
                }
            }
        }
        Self::new(sylls)
    }
}

impl fmt::Display for BoxWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sylls.is_empty() {
            return f.write_str("e");
        }
        for s in &self.sylls {
            f.write_str(s.token())?;
        }
        Ok(())
    }
}

impl Serialize for BoxWord {
    fn serialize<Sz: serde::Serializer>(&self, serializer: Sz) -> Result<Sz::Ok, Sz::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Applies a single group generator (left action).
pub fn apply_syllable<S: BoxScalar>(
    s: Syllable,
    bx: &MarkedBox<S>,
) -> Result<MarkedBox<S>, PappusError> {
    match s {
        Syllable::A => a_cycle(bx),
        Syllable::AInv => a_cycle_inv(bx),
        Syllable::D => dual_box(bx),
    }
}

/// Evaluates w·B, applying syllables right to left.
pub fn apply_word<S: BoxScalar>(
    w: &BoxWord,
    bx: &MarkedBox<S>,
) -> Result<MarkedBox<S>, PappusError> {
    let mut out = bx.clone();
    for &s in w.sylls.iter().rev() {
        out = apply_syllable(s, &out)?;
    }
    Ok(out)
}

/// All normal-form words of length ≤ max_len, ordered by length then
/// lexicographically with a < a⁻¹ < d.
pub fn normal_form_words(max_len: usize) -> Vec<BoxWord> {
    let mut all = vec![BoxWord::identity()];
    let mut level = vec![BoxWord::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in [Syllable::A, Syllable::AInv, Syllable::D] {
            for w in &level {
                if w.accepts_prefix(s) {
                    next.push(w.prepended(s));
                }
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    all
}

/// The orbit of a box under all normal-form words of length ≤ max_len, one
/// entry per word, in the `normal_form_words` order. Each level reuses the
/// previous level's boxes (w = s·w′ evaluates as s applied to the box of w′)
/// and computes its extensions in parallel.
pub fn orbit<S: BoxScalar>(
    bx: &MarkedBox<S>,
    max_len: usize,
) -> Result<Vec<(BoxWord, MarkedBox<S>)>, PappusError> {
    if max_len > MAX_ORBIT_LEN {
        return Err(PappusError::DepthTooLarge(max_len));
    }
    let mut all = vec![(BoxWord::identity(), bx.clone())];
    let mut level = vec![(BoxWord::identity(), bx.clone())];
    for _ in 0..max_len {
        let mut tasks: Vec<(Syllable, usize)> = Vec::new();
        for s in [Syllable::A, Syllable::AInv, Syllable::D] {
            for (i, (w, _)) in level.iter().enumerate() {
                if w.accepts_prefix(s) {
                    tasks.push((s, i));
                }
            }
        }
        let level_ref = &level;
        let results: Vec<Result<MarkedBox<S>, PappusError>> =
            par::map_indexed(tasks.len(), |k| {
                let (s, i) = tasks[k];
                apply_syllable(s, &level_ref[i].1)
            });
        let mut next = Vec::with_capacity(tasks.len());
        for ((s, i), res) in tasks.iter().zip(results) {
            next.push((level[*i].0.prepended(*s), res?));
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    Ok(all)
}

// ---------------------------------------------------------------------------
// Affine geometry of the convex interior

/// The four corner points p, q, r, s in the affine chart z = 1.
pub fn corner_quad(bx: &MarkedBox<f64>) -> Result<[[f64; 2]; 4], PappusError> {
    let mut out = [[0.0; 2]; 4];
    for (slot, idx) in [PT_P, PT_Q, PT_R, PT_S].iter().enumerate() {
        let c = &bx.points[*idx].coords;
        if c[2].abs() < 1e-9 {
            // the quad reaches the chart's line at infinity
            return Err(PappusError::DegenerateConfiguration);
        }
        out[slot] = [c[0] / c[2], c[1] / c[2]];
    }
    Ok(out)
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Whether the stored cyclic order p→q→r→s already walks a convex polygon.
/// Interior-type boxes do; dual (exterior) boxes cross.
pub fn cyclic_order_is_convex(quad: &[[f64; 2]; 4]) -> bool {
    let signs: Vec<f64> = (0..4)
        .map(|i| orient(quad[i], quad[(i + 1) % 4], quad[(i + 2) % 4]))
        .collect();
    signs.iter().all(|&s| s > 0.0) || signs.iter().all(|&s| s < 0.0)
}

/// The four corners reordered counterclockwise, starting from the
/// lexicographically smallest, so downstream predicates are deterministic.
pub fn hull_cycle(quad: [[f64; 2]; 4]) -> [[f64; 2]; 4] {
    let cx = quad.iter().map(|p| p[0]).sum::<f64>() / 4.0;
    let cy = quad.iter().map(|p| p[1]).sum::<f64>() / 4.0;
    let mut pts = quad;
    pts.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.total_cmp(&tb)
    });
    let start = (0..4)
        .min_by(|&i, &j| {
            pts[i][0]
                .total_cmp(&pts[j][0])
                .then(pts[i][1].total_cmp(&pts[j][1]))
        })
        .unwrap();
    let mut out = [[0.0; 2]; 4];
    for k in 0..4 {
        out[k] = pts[(start + k) % 4];
    }
    out
}

/// Point-in-convex-quad for a counterclockwise cycle; `slack > 0` accepts
/// boundary points, `slack < 0` demands strict interiority.
pub fn hull_contains(hull: &[[f64; 2]; 4], pt: [f64; 2], slack: f64) -> bool {
    (0..4).all(|i| orient(hull[i], hull[(i + 1) % 4], pt) >= -slack)
}

/// Max pairwise corner distance of the convex interior.
pub fn quad_diameter(quad: &[[f64; 2]; 4]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            let d = ((quad[i][0] - quad[j][0]).powi(2) + (quad[i][1] - quad[j][1]).powi(2)).sqrt();
            best = best.max(d);
        }
    }
    best
}

/// Membership in the convex interior. For interior-type boxes that is the
/// open quadrilateral; for dual boxes (crossed cyclic order) the interior is
/// the projective complement of the closed hull — "the exterior".
pub fn interior_contains(bx: &MarkedBox<f64>, pt: [f64; 2]) -> Result<bool, PappusError> {
    let quad = corner_quad(bx)?;
    let hull = hull_cycle(quad);
    if cyclic_order_is_convex(&quad) {
        Ok(hull_contains(&hull, pt, -1e-12))
    } else {
        Ok(!hull_contains(&hull, pt, 1e-12))
    }
}

// ---------------------------------------------------------------------------
// Rendering

const DEPTH_PALETTE: [&str; 13] = [
    "#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b", "#eeca3b", "#b279a2",
    "#ff9da6", "#9d755d", "#bab0ac", "#396ab1", "#da7c30", "#3e9651",
];

/// Renders the orbit's convex interiors as nested SVG quadrilaterals colored
/// by word length, writes the document to `out` (atomically, via a sibling
/// temp file), and returns it. Boxes whose quad touches the line at infinity
/// are skipped.
pub fn render_limit(
    bx: &MarkedBox<BigInt>,
    depth: usize,
    out: &Path,
) -> Result<String, PappusError> {
    let fb = to_float(bx)?;
    let boxes = orbit(&fb, depth)?;
    let mut quads: Vec<(usize, [[f64; 2]; 4])> = Vec::new();
    for (w, b) in &boxes {
        if let Ok(q) = corner_quad(b) {
            quads.push((w.len(), hull_cycle(q)));
        }
    }
    let base = quads.first().ok_or(PappusError::DegenerateConfiguration)?.1;
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in base {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let pad = 0.1 * (xmax - xmin).max(ymax - ymin).max(1e-9);
    let (x0, y0) = (xmin - pad, ymin - pad);
    let (w, h) = (xmax - xmin + 2.0 * pad, ymax - ymin + 2.0 * pad);
    let stroke = 0.004 * w.max(h);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    // svg y grows downward: mirror y and shift the viewBox accordingly
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">\n",
        x0,
        -(y0 + h),
        w,
        h
    ));
    svg.push_str(&format!(
        "<!-- marked-box limit render: depth {}, quads {} -->\n",
        depth,
        quads.len()
    ));
    for (len, quad) in &quads {
        let color = DEPTH_PALETTE[len % DEPTH_PALETTE.len()];
        let pts: Vec<String> = quad
            .iter()
            .map(|p| format!("{:.6},{:.6}", p[0], -p[1]))
            .collect();
        svg.push_str(&format!(
            "<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.55\" stroke=\"#222222\" stroke-width=\"{:.6}\"/>\n",
            pts.join(" "),
            color,
            stroke
        ));
    }
    svg.push_str("</svg>\n");

    let tmp = out.with_extension("svg.tmp");
    std::fs::write(&tmp, &svg)?;
    std::fs::rename(&tmp, out)?;
    Ok(svg)
}

// ---------------------------------------------------------------------------
// JSON representation (exact boxes only; coordinates as decimal strings so
// arbitrary-precision integers survive the round trip)

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxJson {
    pub points: Vec<[String; 3]>,
    pub lines: Vec<[String; 3]>,
}

impl MarkedBox<BigInt> {
    pub fn to_json(&self) -> BoxJson {
        let triple = |c: &[BigInt; 3]| [c[0].to_string(), c[1].to_string(), c[2].to_string()];
        BoxJson {
            points: self.points.iter().map(|p| triple(&p.coords)).collect(),
            lines: self.lines.iter().map(|l| triple(&l.coords)).collect(),
        }
    }

    pub fn from_json(data: &BoxJson) -> Result<Self, PappusError> {
        if data.points.len() != 6 || data.lines.len() != 6 {
            return Err(PappusError::BadBoxData(
                "expected 6 points and 6 lines".into(),
            ));
        }
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| PappusError::BadBoxData(format!("{s:?}: {e}")))
        };
        let mut points = Vec::with_capacity(6);
        for t in &data.points {
            points.push(
                ProjPoint::new([parse(&t[0])?, parse(&t[1])?, parse(&t[2])?])
                    .ok_or_else(|| PappusError::BadBoxData("zero point triple".into()))?,
            );
        }
        let mut lines = Vec::with_capacity(6);
        for t in &data.lines {
            lines.push(
                ProjLine::new([parse(&t[0])?, parse(&t[1])?, parse(&t[2])?])
                    .ok_or_else(|| PappusError::BadBoxData("zero line triple".into()))?,
            );
        }
        let points: [ProjPoint<BigInt>; 6] = points.try_into().expect("length checked");
        let lines: [ProjLine<BigInt>; 6] = lines.try_into().expect("length checked");
        Self::new(points, lines)
    }
}
