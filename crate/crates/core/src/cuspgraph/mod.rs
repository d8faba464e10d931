//! Combinatorial horoballs over word-metric balls in Z and Z²: a BFS oracle
//! on the truncated graph, a closed-form distance from the geodesic template
//! (m ascents, at most three horizontal hops, m descents), and template
//! witnesses.
//!
//! Graphs are implicit — adjacency is generated on demand, never stored;
//! horizontal degree at level n grows like 2ⁿ per axis. BFS marks visits in
//! a dense level-major table, so it is restricted to truncations whose
//! vertex count fits a memory budget; the fast distance needs no table at
//! all and ignores the truncation entirely.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CuspError {
    #[error("radius must be between 1 and 2^31")]
    BadRadius,
    #[error("depth {0} out of range: horizontal reach 2^(depth-1) must fit in 63 bits")]
    DepthOverflow(u32),
    #[error("vertex ({0}, {1}) at level {2} lies outside the truncated horoball")]
    VertexOutOfRange(i64, i64, u32),
    #[error("optimal geodesic template ascends to level {needed}, truncation stops at {depth}")]
    TruncationTooShallow { needed: u32, depth: u32 },
    #[error("BFS table would need {0} entries, over the 2^27 budget")]
    BallTooLarge(u128),
}

/// Base lattice of the horoball: Z with generators ±1, or Z² with ±e₁, ±e₂.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseKind {
    Z,
    Z2,
}

/// Group element as lattice coordinates; Z elements keep the second entry 0.
pub type Element = [i64; 2];

/// Radius-R ball in the word metric of the base lattice. The word length of
/// [x, y] is |x| + |y|, which the standard generators realize exactly.
#[derive(Clone, Copy, Debug)]
pub struct BaseGroupBall {
    kind: BaseKind,
    radius: u32,
}

impl BaseGroupBall {
    pub fn new(kind: BaseKind, radius: u32) -> Result<Self, CuspError> {
        if radius == 0 || radius > 1 << 31 {
            return Err(CuspError::BadRadius);
        }
        Ok(Self { kind, radius })
    }

    pub fn z(radius: u32) -> Result<Self, CuspError> {
        Self::new(BaseKind::Z, radius)
    }

    pub fn z2(radius: u32) -> Result<Self, CuspError> {
        Self::new(BaseKind::Z2, radius)
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn word_length(&self, g: Element) -> u64 {
        g[0].unsigned_abs() + g[1].unsigned_abs()
    }

    pub fn contains(&self, g: Element) -> bool {
        (self.kind == BaseKind::Z2 || g[1] == 0) && self.word_length(g) <= u64::from(self.radius)
    }

    pub fn generators(&self) -> Vec<Element> {
        match self.kind {
            BaseKind::Z => vec![[1, 0], [-1, 0]],
            BaseKind::Z2 => vec![[1, 0], [-1, 0], [0, 1], [0, -1]],
        }
    }
}

/// Horoball vertex: a base element at an integer level n ≥ 1. Level 1 is the
/// boundary of the horoball, deeper levels shrink the word metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub g: Element,
    pub level: u32,
}

impl Vertex {
    pub fn new(g: Element, level: u32) -> Self {
        Self { g, level }
    }
}

/// Truncated combinatorial horoball: vertices (g, n) for g in the base ball
/// and 1 ≤ n ≤ depth, vertical edges (g, n)–(g, n+1), horizontal edges
/// (g, n)–(h, n) whenever the base distance is at most 2^(n-1).
///
/// `delta` is the level from which the up–across–down geodesic template is
/// trusted; defaults to 1 and is only advisory — sweeps report the bound
/// per level rather than asserting a universal constant.
#[derive(Clone, Copy, Debug)]
pub struct HoroballGraph {
    base: BaseGroupBall,
    depth: u32,
    delta: u32,
}

pub fn build_horoball(base: BaseGroupBall, depth: u32) -> Result<HoroballGraph, CuspError> {
    if depth == 0 || depth > 63 {
        return Err(CuspError::DepthOverflow(depth));
    }
    Ok(HoroballGraph { base, depth, delta: 1 })
}

impl HoroballGraph {
    pub fn base(&self) -> &BaseGroupBall {
        &self.base
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn with_delta(mut self, delta: u32) -> Self {
        self.delta = delta.max(1);
        self
    }

    /// Word-metric reach of a horizontal edge at the given level: 2^(level-1).
    pub fn horizontal_reach(&self, level: u32) -> u64 {
        1u64 << (level - 1)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.level >= 1 && v.level <= self.depth && self.base.contains(v.g)
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), CuspError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(CuspError::VertexOutOfRange(v.g[0], v.g[1], v.level))
        }
    }

    /// Explicit neighbor list in deterministic order: down, up, then the
    /// horizontal ball swept coordinate-wise. Desk scales only — the list at
    /// level n holds Θ(2ⁿ) entries per axis.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>, CuspError> {
        self.check_vertex(v)?;
        let mut out = Vec::new();
        self.for_each_neighbor(v, |w| out.push(w));
        Ok(out)
    }

    fn for_each_neighbor<F: FnMut(Vertex)>(&self, v: Vertex, mut f: F) {
        if v.level > 1 {
            f(Vertex::new(v.g, v.level - 1));
        }
        if v.level < self.depth {
            f(Vertex::new(v.g, v.level + 1));
        }
        self.for_each_horizontal(v, |g| f(Vertex::new(g, v.level)));
    }

    fn for_each_horizontal<F: FnMut(Element)>(&self, v: Vertex, mut f: F) {
        let r = i64::from(self.base.radius);
        // Anything farther than 2r in the word metric is outside the ball.
        let reach = self.horizontal_reach(v.level).min(2 * r as u64) as i64;
        match self.base.kind {
            BaseKind::Z => {
                let g = v.g[0];
                for x in (g - reach).max(-r)..=(g + reach).min(r) {
                    if x != g {
                        f([x, 0]);
                    }
                }
            }
            BaseKind::Z2 => {
                let [gx, gy] = v.g;
                for x in (gx - reach).max(-r)..=(gx + reach).min(r) {
                    let slack = reach - (x - gx).abs();
                    let cap = r - x.abs();
                    for y in (gy - slack).max(-cap)..=(gy + slack).min(cap) {
                        if [x, y] != v.g {
                            f([x, y]);
                        }
                    }
                }
            }
        }
    }

    /// Whether the infinite horoball gives this vertex neighbors that the
    /// truncation clips away (vertically at the depth cut, horizontally at
    /// the radius cut).
    fn clipped(&self, v: Vertex) -> bool {
        v.level == self.depth
            || self.base.word_length(v.g) + self.horizontal_reach(v.level)
                > u64::from(self.base.radius)
    }

    fn side(&self) -> u64 {
        2 * u64::from(self.base.radius) + 1
    }

    fn table_len(&self) -> Result<usize, CuspError> {
        let side = u128::from(self.side());
        let per_level = match self.base.kind {
            BaseKind::Z => side,
            BaseKind::Z2 => side * side,
        };
        let len = per_level * u128::from(self.depth);
        if len > 1 << 27 {
            return Err(CuspError::BallTooLarge(len));
        }
        Ok(len as usize)
    }

    fn index(&self, v: Vertex) -> usize {
        let r = i64::from(self.base.radius);
        let side = self.side() as usize;
        let level = (v.level - 1) as usize;
        match self.base.kind {
            BaseKind::Z => (v.g[0] + r) as usize + side * level,
            BaseKind::Z2 => {
                (v.g[0] + r) as usize + side * ((v.g[1] + r) as usize + side * level)
            }
        }
    }
}

/// One BFS answer: exact distance in the truncated graph, plus a flag that
/// is true whenever the search expanded a clipped vertex before settling the
/// target — in that case a shorter route through the cut region may exist.
/// The flag may be true even when the value happens to be exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BfsDistance {
    pub distance: u64,
    pub may_be_overestimate: bool,
}

pub fn bfs_distance(h: &HoroballGraph, u: Vertex, v: Vertex) -> Result<BfsDistance, CuspError> {
    h.check_vertex(u)?;
    h.check_vertex(v)?;
    if u == v {
        return Ok(BfsDistance { distance: 0, may_be_overestimate: false });
    }
    let mut dist = vec![u32::MAX; h.table_len()?];
    let mut queue = VecDeque::new();
    dist[h.index(u)] = 0;
    queue.push_back(u);
    let mut touched = false;
    while let Some(x) = queue.pop_front() {
        if x == v {
            return Ok(BfsDistance {
                distance: u64::from(dist[h.index(x)]),
                may_be_overestimate: touched,
            });
        }
        touched |= h.clipped(x);
        let dx = dist[h.index(x)];
        h.for_each_neighbor(x, |y| {
            let iy = h.index(y);
            if dist[iy] == u32::MAX {
                dist[iy] = dx + 1;
                queue.push_back(y);
            }
        });
    }
    unreachable!("truncated horoball is connected");
}

/// Single-source distance table over the whole truncated horoball.
pub struct DistanceField {
    graph: HoroballGraph,
    dist: Vec<u32>,
    touched: bool,
}

impl DistanceField {
    pub fn distance(&self, v: Vertex) -> Result<u64, CuspError> {
        self.graph.check_vertex(v)?;
        Ok(u64::from(self.dist[self.graph.index(v)]))
    }

    /// Conservative, field-wide flag: true when any vertex of the component
    /// had clipped neighbors. Individual targets may still be exact.
    pub fn may_be_overestimate(&self) -> bool {
        self.touched
    }
}

pub fn bfs_distances_from(h: &HoroballGraph, u: Vertex) -> Result<DistanceField, CuspError> {
    h.check_vertex(u)?;
    let mut dist = vec![u32::MAX; h.table_len()?];
    let mut queue = VecDeque::new();
    dist[h.index(u)] = 0;
    queue.push_back(u);
    let mut touched = false;
    while let Some(x) = queue.pop_front() {
        touched |= h.clipped(x);
        let dx = dist[h.index(x)];
        h.for_each_neighbor(x, |y| {
            let iy = h.index(y);
            if dist[iy] == u32::MAX {
                dist[iy] = dx + 1;
                queue.push_back(y);
            }
        });
    }
    Ok(DistanceField { graph: *h, dist, touched })
}

/// Distance in the untruncated horoball. Minimizes
/// (L - n_u) + (L - n_v) + ⌈d_base / 2^(L-1)⌉ over ascent levels
/// L ≥ max(n_u, n_v); a path can be rearranged up–across–down without
/// getting longer, so the minimum is the exact graph distance.
pub fn horoball_distance_fast(h: &HoroballGraph, u: Vertex, v: Vertex) -> Result<u64, CuspError> {
    h.check_vertex(u)?;
    h.check_vertex(v)?;
    Ok(template_min(u.level, v.level, base_distance(h, u, v)).0)
}

/// Witness for an optimal geodesic of template shape: `m_up` ascents from u,
/// `horizontal` ≤ 3 hops at the apex level, `m_down` descents to v.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeodesicShape {
    pub m_up: u64,
    pub horizontal: u64,
    pub m_down: u64,
    pub total: u64,
}

/// Fails with `TruncationTooShallow` when the unique apex level with at most
/// three hops lies beyond the depth cut.
pub fn geodesic_shape(h: &HoroballGraph, u: Vertex, v: Vertex) -> Result<GeodesicShape, CuspError> {
    h.check_vertex(u)?;
    h.check_vertex(v)?;
    let (total, apex, hops) = template_min(u.level, v.level, base_distance(h, u, v));
    if apex > h.depth {
        return Err(CuspError::TruncationTooShallow { needed: apex, depth: h.depth });
    }
    Ok(GeodesicShape {
        m_up: u64::from(apex - u.level),
        horizontal: hops,
        m_down: u64::from(apex - v.level),
        total,
    })
}

fn base_distance(h: &HoroballGraph, u: Vertex, v: Vertex) -> u64 {
    h.base.word_length([v.g[0] - u.g[0], v.g[1] - u.g[1]])
}

/// Returns (minimal template length, largest minimizing apex, hops there).
/// The cost in L strictly falls while hops ≥ 6, plateaus at 4–5, and strictly
/// rises once hops ≤ 3, so the largest minimizer is the unique one with at
/// most three hops.
fn template_min(nu: u32, nv: u32, dw: u64) -> (u64, u32, u64) {
    let lo = nu.max(nv);
    if dw == 0 {
        return (u64::from(nu.abs_diff(nv)), lo, 0);
    }
    let mut best = (u64::MAX, lo, 0u64);
    let mut level = lo;
    loop {
        let reach = 1u64 << u64::from(level - 1).min(63);
        let hops = dw.div_ceil(reach);
        let total = u64::from(level - nu) + u64::from(level - nv) + hops;
        if total <= best.0 {
            best = (total, level, hops);
        }
        if hops == 1 {
            break;
        }
        level += 1;
    }
    debug_assert!(best.2 <= 3);
    best
}

#[cfg(test)]
mod tests;
