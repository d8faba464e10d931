use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn v(x: i64, y: i64, level: u32) -> Vertex {
    Vertex::new([x, y], level)
}

/// Independent oracle: BFS over the base Cayley graph out to `radius`.
fn cayley_bfs(ball: &BaseGroupBall, radius: u64) -> HashMap<Element, u64> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert([0i64, 0i64], 0u64);
    queue.push_back([0i64, 0i64]);
    while let Some(g) = queue.pop_front() {
        let d = dist[&g];
        if d == radius {
            continue;
        }
        for s in ball.generators() {
            let h = [g[0] + s[0], g[1] + s[1]];
            dist.entry(h).or_insert_with(|| {
                queue.push_back(h);
                d + 1
            });
        }
    }
    dist
}

#[test]
fn word_length_matches_cayley_bfs() {
    let r = 64u64;
    for ball in [BaseGroupBall::z(64).unwrap(), BaseGroupBall::z2(64).unwrap()] {
        let oracle = cayley_bfs(&ball, r);
        for (g, d) in &oracle {
            assert_eq!(ball.word_length(*g), *d, "word length vs BFS at {g:?}");
        }
        let expected = match ball.kind() {
            BaseKind::Z => 2 * r + 1,
            BaseKind::Z2 => 2 * r * r + 2 * r + 1,
        };
        assert_eq!(oracle.len() as u64, expected, "Cayley ball size");
    }
}

#[test]
fn base_ball_basics() {
    let ball = BaseGroupBall::z2(5).unwrap();
    assert_eq!(ball.word_length([0, 0]), 0);
    assert!(ball.contains([2, -3]));
    assert!(!ball.contains([4, 2]));
    for g in ball.generators() {
        assert!(ball.generators().contains(&[-g[0], -g[1]]), "generators symmetric");
    }
    let z = BaseGroupBall::z(5).unwrap();
    assert!(!z.contains([0, 1]), "Z elements live on the first axis");
    assert!(matches!(BaseGroupBall::z(0), Err(CuspError::BadRadius)));
}

#[test]
fn horoball_construction_bounds() {
    let ball = BaseGroupBall::z(4).unwrap();
    assert!(matches!(build_horoball(ball, 0), Err(CuspError::DepthOverflow(0))));
    assert!(matches!(build_horoball(ball, 64), Err(CuspError::DepthOverflow(64))));
    let deep = build_horoball(ball, 63).unwrap();
    assert_eq!(deep.horizontal_reach(63), 1u64 << 62);
    assert_eq!(deep.delta(), 1);
    assert_eq!(deep.with_delta(3).delta(), 3);
}

#[test]
fn neighbor_lists_match_hand_enumeration() {
    // Reach at level 2 is 2, so (0,2) sees ±1, ±2 horizontally plus (0,1).
    let h = build_horoball(BaseGroupBall::z(4).unwrap(), 2).unwrap();
    let got: HashSet<_> = h.neighbors(v(0, 0, 2)).unwrap().into_iter().collect();
    let want: HashSet<_> = [v(0, 0, 1), v(-2, 0, 2), v(-1, 0, 2), v(1, 0, 2), v(2, 0, 2)]
        .into_iter()
        .collect();
    assert_eq!(got, want);

    // Depth 1: only word-adjacent horizontal edges, no vertical ones.
    let flat = build_horoball(BaseGroupBall::z(4).unwrap(), 1).unwrap();
    let got: HashSet<_> = flat.neighbors(v(0, 0, 1)).unwrap().into_iter().collect();
    let want: HashSet<_> = [v(-1, 0, 1), v(1, 0, 1)].into_iter().collect();
    assert_eq!(got, want);

    // Radius clipping: (3,1) at level 3 reaches 4 but the ball ends at 4.
    let h = build_horoball(BaseGroupBall::z(4).unwrap(), 3).unwrap();
    let got = h.neighbors(v(3, 0, 3)).unwrap();
    assert!(got.contains(&v(-1, 0, 3)) && got.contains(&v(4, 0, 3)));
    assert!(!got.iter().any(|w| w.g[0] > 4));
}

#[test]
fn neighbor_relation_is_symmetric() {
    let h = build_horoball(BaseGroupBall::z2(8).unwrap(), 4).unwrap();
    let mut vertices = Vec::new();
    for x in -8i64..=8 {
        for y in -8i64..=8 {
            if x.abs() + y.abs() <= 8 {
                for level in 1..=4 {
                    vertices.push(v(x, y, level));
                }
            }
        }
    }
    let adjacency: HashMap<Vertex, HashSet<Vertex>> = vertices
        .iter()
        .map(|&a| (a, h.neighbors(a).unwrap().into_iter().collect()))
        .collect();
    for (a, nbrs) in &adjacency {
        for b in nbrs {
            assert!(adjacency[b].contains(a), "asymmetric edge {a:?} - {b:?}");
        }
    }
}

#[test]
fn bfs_known_values_and_flags() {
    let h = build_horoball(BaseGroupBall::z(64).unwrap(), 10).unwrap();
    let same = bfs_distance(&h, v(3, 0, 2), v(3, 0, 2)).unwrap();
    assert_eq!(same, BfsDistance { distance: 0, may_be_overestimate: false });
    assert_eq!(bfs_distance(&h, v(0, 0, 1), v(1, 0, 1)).unwrap().distance, 1);

    // Nothing within distance 4 of (0,1) is clipped at radius 64, depth 10,
    // so this answer is certified exact.
    let near = bfs_distance(&h, v(0, 0, 1), v(5, 0, 1)).unwrap();
    assert_eq!(near, BfsDistance { distance: 5, may_be_overestimate: false });

    // Ascending to level 4 and hopping beats the 16 unit steps: 2·3 + 2.
    let far = bfs_distance(&h, v(0, 0, 1), v(16, 0, 1)).unwrap();
    assert_eq!(far.distance, 8);
    assert!((4..=12).contains(&far.distance));

    // A depth-2 cut forces the detour 1 + 8 + 1 and admits it might be long.
    let shallow = build_horoball(BaseGroupBall::z(64).unwrap(), 2).unwrap();
    let cut = bfs_distance(&shallow, v(0, 0, 1), v(16, 0, 1)).unwrap();
    assert_eq!(cut.distance, 10);
    assert!(cut.may_be_overestimate);
    let cut_near = bfs_distance(&shallow, v(0, 0, 1), v(5, 0, 1)).unwrap();
    assert_eq!(cut_near.distance, 5);
    assert!(cut_near.may_be_overestimate, "depth boundary was expanded");

    assert!(matches!(
        bfs_distance(&h, v(0, 0, 1), v(65, 0, 1)),
        Err(CuspError::VertexOutOfRange(65, 0, 1))
    ));
    assert!(matches!(
        bfs_distance(&h, v(0, 0, 11), v(1, 0, 1)),
        Err(CuspError::VertexOutOfRange(0, 0, 11))
    ));
}

#[test]
fn fast_distance_known_values() {
    let h = build_horoball(BaseGroupBall::z(16).unwrap(), 8).unwrap();
    assert_eq!(horoball_distance_fast(&h, v(0, 0, 1), v(0, 0, 5)).unwrap(), 4);
    assert_eq!(horoball_distance_fast(&h, v(0, 0, 1), v(16, 0, 1)).unwrap(), 8);

    // One hop of exactly the reach 2^(n-1) at level n.
    let h2 = build_horoball(BaseGroupBall::z2(2048).unwrap(), 12).unwrap();
    for n in 1..=12u32 {
        let g = 1i64 << (n - 1);
        assert_eq!(horoball_distance_fast(&h2, v(0, 0, n), v(g, 0, n)).unwrap(), 1);
    }
}

#[test]
fn deep_translation_distance_dominates_level_gap() {
    // dist((0,n),(u(0,2^k),n)) is exactly 2k - 2n + 2 for k ≥ n: the apex
    // sits at level k or k+1. The 2k - 2n - 2 lower bound is loose by 4.
    let h = build_horoball(BaseGroupBall::z2(4096).unwrap(), 13).unwrap();
    for k in 1..=12u32 {
        let g = 1i64 << k;
        for n in 1..=k {
            let d = horoball_distance_fast(&h, v(0, 0, n), v(0, g, n)).unwrap();
            assert_eq!(d, u64::from(2 * k - 2 * n + 2));
            assert!(d as i64 >= 2 * i64::from(k) - 2 * i64::from(n) - 2);
        }
    }
}

#[test]
fn fast_equals_bfs_on_small_ball() {
    // Depth 8 clears every apex needed for word gaps up to 64, and template
    // hops stay inside the ball, so BFS is exact on all these pairs.
    let h = build_horoball(BaseGroupBall::z(32).unwrap(), 8).unwrap();
    for lu in 1..=3u32 {
        for x in -32i64..=32 {
            let field = bfs_distances_from(&h, v(x, 0, lu)).unwrap();
            for lv in 1..=3u32 {
                for y in -32i64..=32 {
                    let fast = horoball_distance_fast(&h, v(x, 0, lu), v(y, 0, lv)).unwrap();
                    assert_eq!(field.distance(v(y, 0, lv)).unwrap(), fast, "({x},{lu})-({y},{lv})");
                }
            }
        }
    }
}

#[test]
fn fast_equals_bfs_on_z2_ball() {
    let h = build_horoball(BaseGroupBall::z2(12).unwrap(), 6).unwrap();
    let field = bfs_distances_from(&h, v(0, 0, 1)).unwrap();
    for x in -12i64..=12 {
        for y in -12i64..=12 {
            if x.abs() + y.abs() > 12 {
                continue;
            }
            for level in 1..=6u32 {
                let fast = horoball_distance_fast(&h, v(0, 0, 1), v(x, y, level)).unwrap();
                assert_eq!(field.distance(v(x, y, level)).unwrap(), fast, "(0,1)-({x},{y},{level})");
            }
        }
    }
}

#[test]
fn fast_distance_is_a_metric_on_samples() {
    let h = build_horoball(BaseGroupBall::z2(100).unwrap(), 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e0b_a117);
    let sample = |rng: &mut ChaCha8Rng| loop {
        let x = rng.gen_range(-100i64..=100);
        let y = rng.gen_range(-100i64..=100);
        if x.abs() + y.abs() <= 100 {
            return v(x, y, rng.gen_range(1..=12));
        }
    };
    for _ in 0..200 {
        let (a, b, c) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
        let (ab, ba) = (
            horoball_distance_fast(&h, a, b).unwrap(),
            horoball_distance_fast(&h, b, a).unwrap(),
        );
        assert_eq!(ab, ba, "symmetry {a:?} {b:?}");
        assert_eq!(horoball_distance_fast(&h, a, a).unwrap(), 0);
        assert!(ab == 0 || a != b);
        let (bc, ac) = (
            horoball_distance_fast(&h, b, c).unwrap(),
            horoball_distance_fast(&h, a, c).unwrap(),
        );
        assert!(ac <= ab + bc, "triangle {a:?} {b:?} {c:?}: {ac} > {ab}+{bc}");
    }
}

#[test]
fn same_level_distance_never_increases_with_depth() {
    let h = build_horoball(BaseGroupBall::z(4096).unwrap(), 13).unwrap();
    for g in [1i64, 2, 3, 5, 17, 100, 512, 1000, 2048, 4096] {
        let mut prev = u64::MAX;
        for n in 1..=13u32 {
            let d = horoball_distance_fast(&h, v(0, 0, n), v(g, 0, n)).unwrap();
            assert!(d <= prev, "distance to {g} grew from level {} to {n}", n - 1);
            prev = d;
        }
    }
}

#[test]
fn geodesic_shapes_witness_optimal_paths() {
    let h = build_horoball(BaseGroupBall::z(1024).unwrap(), 12).unwrap();

    let adjacent = geodesic_shape(&h, v(0, 0, 1), v(1, 0, 1)).unwrap();
    assert_eq!(adjacent, GeodesicShape { m_up: 0, horizontal: 1, m_down: 0, total: 1 });

    let vertical = geodesic_shape(&h, v(0, 0, 1), v(0, 0, 6)).unwrap();
    assert_eq!(vertical, GeodesicShape { m_up: 5, horizontal: 0, m_down: 0, total: 5 });

    let same = geodesic_shape(&h, v(7, 0, 3), v(7, 0, 3)).unwrap();
    assert_eq!(same.total, 0);

    // Distant same-level pair: symmetric ascent, ≤ 3 hops, BFS-confirmed.
    let far = geodesic_shape(&h, v(0, 0, 1), v(1000, 0, 1)).unwrap();
    assert_eq!(far.m_up, far.m_down);
    assert!(far.horizontal <= 3);
    assert_eq!(far.m_up + far.horizontal + far.m_down, far.total);
    assert_eq!(far.total, horoball_distance_fast(&h, v(0, 0, 1), v(1000, 0, 1)).unwrap());
    assert_eq!(far.total, bfs_distance(&h, v(0, 0, 1), v(1000, 0, 1)).unwrap().distance);

    // Cross-level witness: apex no lower than either endpoint.
    let cross = geodesic_shape(&h, v(0, 0, 2), v(96, 0, 5)).unwrap();
    assert_eq!(cross.m_up - cross.m_down, 3, "level gap absorbed by the ascent");
    assert_eq!(cross.total, bfs_distance(&h, v(0, 0, 2), v(96, 0, 5)).unwrap().distance);

    let shallow = build_horoball(BaseGroupBall::z(2048).unwrap(), 2).unwrap();
    match geodesic_shape(&shallow, v(0, 0, 1), v(2000, 0, 1)) {
        Err(CuspError::TruncationTooShallow { needed: 11, depth: 2 }) => {}
        other => panic!("expected truncation error, got {other:?}"),
    }
}

#[test]
fn bfs_table_budget_is_enforced() {
    let h = build_horoball(BaseGroupBall::z2(40_000).unwrap(), 20).unwrap();
    assert!(matches!(
        bfs_distance(&h, v(0, 0, 1), v(1, 0, 1)),
        Err(CuspError::BallTooLarge(_))
    ));
    // The closed form is untabulated and still fine at this size.
    assert_eq!(horoball_distance_fast(&h, v(0, 0, 1), v(40_000, 0, 1)).unwrap(), 31);
}

#[test]
fn distance_field_flag_is_conservative() {
    let h = build_horoball(BaseGroupBall::z(64).unwrap(), 10).unwrap();
    let field = bfs_distances_from(&h, v(0, 0, 1)).unwrap();
    // The exhaustive field always reaches the cut, so the flag is on even
    // though nearby values are exact.
    assert!(field.may_be_overestimate());
    assert_eq!(field.distance(v(5, 0, 1)).unwrap(), 5);
    assert!(field.distance(v(99, 0, 1)).is_err());
}
