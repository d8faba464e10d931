use nalgebra::DVector;

use super::*;
use crate::flagdyn::act_proj;
use crate::sample;

fn pt(x: f64, y: f64) -> ProjPoint {
    ProjPoint::from_real_slice(&[x, y, 1.0]).unwrap()
}

fn unit_square() -> ConvexDomain {
    ConvexDomain::polytope(
        DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[-1.0, 0.0, 1.0]),
            DVector::from_column_slice(&[0.0, 1.0, 0.0]),
            DVector::from_column_slice(&[0.0, -1.0, 1.0]),
        ],
    )
    .unwrap()
}

fn symmetric_square() -> ConvexDomain {
    ConvexDomain::polytope(
        DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        vec![
            DVector::from_column_slice(&[1.0, 0.0, 1.0]),
            DVector::from_column_slice(&[-1.0, 0.0, 1.0]),
            DVector::from_column_slice(&[0.0, 1.0, 1.0]),
            DVector::from_column_slice(&[0.0, -1.0, 1.0]),
        ],
    )
    .unwrap()
}

#[test]
fn klein_center_to_half_radius() {
    let ball = ConvexDomain::klein_ball(3);
    let d = hilbert_distance(&ball, &pt(0.0, 0.0), &pt(0.5, 0.0)).unwrap();
    assert!((d - 0.5 * 3.0f64.ln()).abs() < 1e-14);
    assert_eq!(hilbert_distance(&ball, &pt(0.3, 0.1), &pt(0.3, 0.1)).unwrap(), 0.0);
}

#[test]
fn klein_distance_is_arctanh() {
    let ball = ConvexDomain::klein_ball(3);
    let center = pt(0.0, 0.0);
    let mut rng = sample::rng(71);
    for _ in 0..200 {
        let theta = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
        let r = rand::Rng::gen_range(&mut rng, 0.0..0.99);
        let x = pt(r * theta.cos(), r * theta.sin());
        let d = hilbert_distance(&ball, &center, &x).unwrap();
        assert!((d - r.atanh()).abs() < 1e-10, "r = {r}");
    }
}

#[test]
fn klein_distance_higher_dimension() {
    let ball = ConvexDomain::klein_ball(5);
    let center = ProjPoint::from_real_slice(&[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let x = ProjPoint::from_real_slice(&[0.3, -0.2, 0.1, 0.4, 1.0]).unwrap();
    let r = (0.3f64 * 0.3 + 0.2 * 0.2 + 0.1 * 0.1 + 0.4 * 0.4).sqrt();
    let d = hilbert_distance(&ball, &center, &x).unwrap();
    assert!((d - r.atanh()).abs() < 1e-12);
}

#[test]
fn square_distance_from_explicit_boundary() {
    // horizontal chord hits x = 0 and x = 1, so the cross ratio is
    // (0.8 * 0.8) / (0.2 * 0.2) = 16
    let sq = unit_square();
    let d = hilbert_distance(&sq, &pt(0.2, 0.5), &pt(0.8, 0.5)).unwrap();
    assert!((d - 0.5 * 16.0f64.ln()).abs() < 1e-12);
}

#[test]
fn distance_is_symmetric_and_additive_on_chords() {
    for dom in [ConvexDomain::klein_ball(3), unit_square()] {
        let p = pt(0.21, 0.37);
        let q = pt(0.68, 0.55);
        let m = pt(
            0.21 + 0.35 * (0.68 - 0.21),
            0.37 + 0.35 * (0.55 - 0.37),
        );
        let dpq = hilbert_distance(&dom, &p, &q).unwrap();
        let dqp = hilbert_distance(&dom, &q, &p).unwrap();
        assert!((dpq - dqp).abs() < 1e-12);
        let dpm = hilbert_distance(&dom, &p, &m).unwrap();
        let dmq = hilbert_distance(&dom, &m, &q).unwrap();
        assert!((dpm + dmq - dpq).abs() < 1e-9);
    }
}

#[test]
fn distance_is_projectively_invariant() {
    let mut rng = sample::rng(73);
    for dom in [ConvexDomain::klein_ball(3), symmetric_square()] {
        let p = pt(0.2, -0.3);
        let q = pt(-0.4, 0.1);
        let base = hilbert_distance(&dom, &p, &q).unwrap();
        for _ in 0..10 {
            let g = sample::random_sl_real(3, &mut rng);
            let moved = dom.transform(&g).unwrap();
            let gp = act_proj(&g, &p).unwrap();
            let gq = act_proj(&g, &q).unwrap();
            let d = hilbert_distance(&moved, &gp, &gq).unwrap();
            assert!((d - base).abs() < 1e-8, "|{d} - {base}|");
        }
    }
}

#[test]
fn interior_precondition_is_enforced() {
    let ball = ConvexDomain::klein_ball(3);
    assert_eq!(
        hilbert_distance(&ball, &pt(0.0, 0.0), &pt(1.5, 0.0)),
        Err(HilbertError::PointNotInterior)
    );
    let r = 1.0 - 1e-12;
    assert_eq!(
        hilbert_distance(&ball, &pt(0.0, 0.0), &pt(r, 0.0)),
        Err(HilbertError::PointNotInterior)
    );
    // points at the chart's plane at infinity are never interior
    let far = ProjPoint::from_real_slice(&[1.0, 0.0, 0.0]).unwrap();
    assert_eq!(
        hilbert_distance(&ball, &pt(0.0, 0.0), &far),
        Err(HilbertError::PointNotInterior)
    );
}

#[test]
fn hausdorff_identical_segments() {
    let ball = ConvexDomain::klein_ball(3);
    let out = segment_hausdorff_check(
        &ball,
        &pt(-0.5, 0.2),
        &pt(0.5, 0.2),
        &pt(-0.5, 0.2),
        &pt(0.5, 0.2),
        48,
    )
    .unwrap();
    assert_eq!(out.hausdorff_est, 0.0);
    assert_eq!(out.bound, 0.0);
    assert!(out.ok);
}

#[test]
fn hausdorff_parallel_chords() {
    let ball = ConvexDomain::klein_ball(3);
    let out = segment_hausdorff_check(
        &ball,
        &pt(-0.5, 0.2),
        &pt(0.5, 0.2),
        &pt(-0.5, -0.2),
        &pt(0.5, -0.2),
        64,
    )
    .unwrap();
    assert!(out.ok, "est {} bound {}", out.hausdorff_est, out.bound);
    assert!(out.hausdorff_est > 0.0);
}

#[test]
fn hausdorff_shared_endpoint() {
    let sq = symmetric_square();
    let q = pt(0.7, 0.1);
    let out = segment_hausdorff_check(&sq, &pt(-0.6, 0.4), &q, &pt(-0.3, -0.5), &q, 64)
        .unwrap();
    let dp = hilbert_distance(&sq, &pt(-0.6, 0.4), &pt(-0.3, -0.5)).unwrap();
    assert!((out.bound - dp).abs() < 1e-12);
    assert!(out.ok);
}

fn as_polytope(dom: &ConvexDomain) -> &Polytope {
    match dom {
        ConvexDomain::Polytope(p) => p,
        _ => panic!("expected polytope"),
    }
}

#[test]
fn dual_of_square_swaps_vertices_and_facets() {
    let sq = symmetric_square();
    let p = as_polytope(&sq);
    let dual = dual_domain(p).unwrap();
    // vertices of the dual sit at the primal facet covectors
    assert!(vertex_sets_match(&dual.vertices().to_vec(), &p.facets().to_vec(), 1e-8));
    assert!(vertex_sets_match(&dual.facets().to_vec(), &p.vertices().to_vec(), 1e-8));
    assert_eq!(dual.vertices().len(), 4);
}

#[test]
fn dual_is_an_involution() {
    let tri = ConvexDomain::polytope(
        DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.3]),
            DVector::from_column_slice(&[-0.2, 1.0, 0.4]),
            DVector::from_column_slice(&[-0.3, -1.1, 0.5]),
        ],
    )
    .unwrap();
    for dom in [symmetric_square(), tri] {
        let p = as_polytope(&dom);
        let dd = dual_domain(&dual_domain(p).unwrap()).unwrap();
        assert!(vertex_sets_match(&dd.vertices().to_vec(), &p.vertices().to_vec(), 1e-8));
        // a triangle's dual is a triangle: self-dual combinatorics
        assert_eq!(dd.vertices().len(), p.vertices().len());
        assert_eq!(dd.facets().len(), p.facets().len());
    }
}

#[test]
fn dual_is_functorial() {
    let mut rng = sample::rng(79);
    let sq = symmetric_square();
    let p = as_polytope(&sq);
    for _ in 0..5 {
        let g = sample::random_sl_real(3, &mut rng);
        let moved = sq.transform(&g).unwrap();
        let dual_moved = dual_domain(as_polytope(&moved)).unwrap();
        // (g Omega)* = g^-T Omega*
        let expected = ConvexDomain::Polytope(dual_domain(p).unwrap())
            .transform(&g.inverse_transpose().unwrap())
            .unwrap();
        assert!(vertex_sets_match(
            &dual_moved.vertices().to_vec(),
            &as_polytope(&expected).vertices().to_vec(),
            1e-7
        ));
    }
}

#[test]
fn polytope_construction_rejects_bad_input() {
    let quadrant = ConvexDomain::polytope(
        DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        vec![
            DVector::from_column_slice(&[1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0, 0.0]),
            DVector::from_column_slice(&[1.0, 1.0, 0.0]),
        ],
    );
    assert!(matches!(quadrant, Err(HilbertError::BadDomain(_))));

    let not_planar = ConvexDomain::polytope(
        DVector::from_column_slice(&[0.0, 0.0, 0.0, 1.0]),
        vec![DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]); 4],
    );
    assert!(matches!(not_planar, Err(HilbertError::BadDomain(_))));
}

#[test]
fn hull_of_three_points_is_a_triangle() {
    let chart = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let cloud = [pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)];
    let hull = convex_hull_chart(&cloud, &chart).unwrap();
    assert_eq!(hull.vertices().len(), 3);
    assert_eq!(hull.facets().len(), 3);
}

#[test]
fn hull_of_circle_points_is_cyclic_polygon() {
    let chart = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let n = 12;
    let cloud: Vec<ProjPoint> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            pt(t.cos(), t.sin())
        })
        .collect();
    let hull = convex_hull_chart(&cloud, &chart).unwrap();
    assert_eq!(hull.vertices().len(), n);
    let lifts: Vec<DVector<f64>> = cloud
        .iter()
        .map(|p| DVector::from_iterator(3, p.vector().iter().map(|z| z.re)))
        .collect();
    assert!(vertex_sets_match(&hull.vertices().to_vec(), &lifts, 1e-8));
}

// O(nh) wrapping oracle, written independently of the monotone chain.
fn gift_wrap(pts: &[(f64, f64)]) -> Vec<usize> {
    let start = (0..pts.len())
        .min_by(|&a, &b| {
            (pts[a].1, pts[a].0)
                .partial_cmp(&(pts[b].1, pts[b].0))
                .unwrap()
        })
        .unwrap();
    let cross = |o: usize, a: usize, b: usize| -> f64 {
        (pts[a].0 - pts[o].0) * (pts[b].1 - pts[o].1)
            - (pts[a].1 - pts[o].1) * (pts[b].0 - pts[o].0)
    };
    let d2 = |a: usize, b: usize| -> f64 {
        (pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)
    };
    let mut hull = vec![start];
    loop {
        let cur = *hull.last().unwrap();
        let mut next = usize::MAX;
        for cand in 0..pts.len() {
            if cand == cur {
                continue;
            }
            if next == usize::MAX {
                next = cand;
                continue;
            }
            let c = cross(cur, next, cand);
            if c > 1e-12 || (c.abs() <= 1e-12 && d2(cur, cand) > d2(cur, next)) {
                next = cand;
            }
        }
        if next == start || hull.len() > pts.len() {
            break;
        }
        hull.push(next);
    }
    hull
}

#[test]
fn hull_matches_gift_wrapping_oracle() {
    let chart = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let mut rng = sample::rng(83);
    for _ in 0..10 {
        let coords: Vec<(f64, f64)> = (0..25)
            .map(|_| {
                (
                    rand::Rng::gen_range(&mut rng, -1.0..1.0),
                    rand::Rng::gen_range(&mut rng, -1.0..1.0),
                )
            })
            .collect();
        let cloud: Vec<ProjPoint> = coords.iter().map(|&(x, y)| pt(x, y)).collect();
        let hull = convex_hull_chart(&cloud, &chart).unwrap();
        let oracle: Vec<DVector<f64>> = gift_wrap(&coords)
            .into_iter()
            .map(|i| DVector::from_column_slice(&[coords[i].0, coords[i].1, 1.0]))
            .collect();
        assert_eq!(hull.vertices().len(), oracle.len());
        assert!(vertex_sets_match(&hull.vertices().to_vec(), &oracle, 1e-8));
    }
}

#[test]
fn hull_is_equivariant() {
    let chart = DVector::from_column_slice(&[0.0, 0.0, 1.0]);
    let cloud = [
        pt(0.1, 0.1),
        pt(0.9, 0.2),
        pt(0.4, 0.8),
        pt(0.5, 0.4),
        pt(0.2, 0.6),
    ];
    let hull = convex_hull_chart(&cloud, &chart).unwrap();
    let mut rng = sample::rng(89);
    let g = sample::random_rotation(3, &mut rng);
    let moved_cloud: Vec<ProjPoint> = cloud.iter().map(|p| act_proj(&g, p).unwrap()).collect();
    let gchart = g.inverse_transpose().unwrap();
    let moved_chart =
        DVector::from_iterator(3, (gchart.data() * chart.map(|x| num_complex::Complex64::new(x, 0.0))).iter().map(|z| z.re));
    let moved_hull = convex_hull_chart(&moved_cloud, &moved_chart).unwrap();
    let expected = ConvexDomain::Polytope(hull).transform(&g).unwrap();
    assert!(vertex_sets_match(
        &moved_hull.vertices().to_vec(),
        &as_polytope(&expected).vertices().to_vec(),
        1e-7
    ));
}

#[test]
fn hull_rejects_vanishing_chart() {
    let chart = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
    let cloud = [pt(0.0, 0.3), pt(1.0, 0.0), pt(0.5, 1.0)];
    assert!(matches!(
        convex_hull_chart(&cloud, &chart),
        Err(HilbertError::ChartVanishes)
    ));
}

#[test]
fn support_at_klein_boundary() {
    let ball = ConvexDomain::klein_ball(3);
    let x = pt(1.0, 0.0);
    let cov = support_data(&ball, &x).unwrap();
    // tangent hyperplane x_1 = 1
    let expected = DVector::from_column_slice(&[-1.0, 0.0, 1.0]) / 2.0f64.sqrt();
    assert!((cov.dot(&expected).abs() - 1.0).abs() < 1e-12);
    assert!(cov.dot(&DVector::from_column_slice(&[1.0, 0.0, 1.0])).abs() < 1e-12);

    assert_eq!(
        support_data(&ball, &pt(0.5, 0.0)),
        Err(HilbertError::NotOnBoundary)
    );
    assert_eq!(
        support_data(&unit_square(), &pt(0.0, 0.5)),
        Err(HilbertError::NotSmooth)
    );
}

#[test]
fn support_matches_quadratic_gradient() {
    // rotated anisotropic ellipsoid; tangent covector is the homogenized
    // gradient of (x - c)^T M (x - c)
    let (c1, c2) = (0.2, -0.1);
    let rot = 0.7f64;
    let (co, si) = (rot.cos(), rot.sin());
    let r = RMat::from_fn(2, 2, |i, j| [[co, -si], [si, co]][i][j]);
    let m = r.transpose() * RMat::from_fn(2, 2, |i, j| [[2.0, 0.0], [0.0, 0.5]][i][j]) * &r;
    let dom = ConvexDomain::ellipsoid_in_chart(&[c1, c2], m.clone()).unwrap();

    let dir = DVector::from_column_slice(&[0.6, 0.8]);
    let t = 1.0 / (dir.transpose() * &m * &dir)[(0, 0)].sqrt();
    let bx = c1 + t * dir[0];
    let by = c2 + t * dir[1];
    let x = pt(bx, by);
    let cov = support_data(&dom, &x).unwrap();

    let grad = &m * DVector::from_column_slice(&[bx - c1, by - c2]);
    let homog = DVector::from_column_slice(&[grad[0], grad[1], -(grad[0] * bx + grad[1] * by)]);
    let overlap = cov.dot(&homog).abs() / homog.norm();
    assert!((overlap - 1.0).abs() < 1e-10);
}

#[test]
fn support_is_limit_of_secants() {
    let ball = ConvexDomain::klein_ball(3);
    let alpha = 0.3f64;
    let x = pt(alpha.cos(), alpha.sin());
    let cov = support_data(&ball, &x).unwrap();
    let eps = 1e-5;
    let xe = DVector::from_column_slice(&[alpha.cos(), alpha.sin(), 1.0]);
    let ye = DVector::from_column_slice(&[(alpha + eps).cos(), (alpha + eps).sin(), 1.0]);
    let secant = xe.cross(&ye);
    let overlap = cov.dot(&secant).abs() / secant.norm();
    assert!((overlap - 1.0).abs() < 1e-4);
}

#[test]
fn positivity_of_klein_sphere_lifts() {
    let n = 8;
    let s = 0.5f64.sqrt();
    let mut pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..n)
        .map(|i| {
            let t = i as f64 / n as f64 * std::f64::consts::TAU;
            (
                DVector::from_column_slice(&[s * t.cos(), s * t.sin(), s]),
                DVector::from_column_slice(&[-s * t.cos(), -s * t.sin(), s]),
            )
        })
        .collect();
    let report = positivity_check(&pairs);
    assert!(report.ok);
    let expected = 0.5 * (1.0 - (std::f64::consts::TAU / n as f64).cos());
    assert!((report.min_pairing - expected).abs() < 1e-12);

    pairs[3].1 = -pairs[3].1.clone();
    let flipped = positivity_check(&pairs);
    assert!(!flipped.ok);
    assert!(flipped.min_pairing < 0.0);

    let single = positivity_check(&pairs[..1]);
    assert!(single.ok);
    assert_eq!(single.min_pairing, f64::INFINITY);
}

#[test]
fn proj_segment_requires_interior() {
    let ball = ConvexDomain::klein_ball(3);
    assert!(ProjSegment::new(&ball, pt(-0.4, 0.1), pt(0.6, -0.2)).is_ok());
    // endpoints on the boundary are allowed, the open part is interior
    assert!(ProjSegment::new(&ball, pt(1.0, 0.0), pt(0.0, 0.0)).is_ok());
    assert!(ProjSegment::new(&ball, pt(1.5, 0.0), pt(0.0, 0.0)).is_err());
}

#[test]
fn domain_json_roundtrip() {
    let ball = ConvexDomain::klein_ball(3);
    let back = ConvexDomain::from_json_str(&ball.to_json_string()).unwrap();
    let p = pt(0.1, -0.2);
    let q = pt(-0.5, 0.3);
    let d0 = hilbert_distance(&ball, &p, &q).unwrap();
    let d1 = hilbert_distance(&back, &p, &q).unwrap();
    assert!((d0 - d1).abs() < 1e-14);

    let sq = symmetric_square();
    let back = ConvexDomain::from_json_str(&sq.to_json_string()).unwrap();
    assert!(vertex_sets_match(
        &as_polytope(&sq).vertices().to_vec(),
        &as_polytope(&back).vertices().to_vec(),
        1e-10
    ));

    let parsed = ConvexDomain::from_json_str(r#"{"model":"klein","dim":3}"#).unwrap();
    assert!(matches!(parsed, ConvexDomain::Ellipsoid(_)));
    let ell = ConvexDomain::from_json_str(
        r#"{"model":"ellipsoid","dim":3,"center":[0.0,0.0],"shape":[[1.0,0.0],[0.0,1.0]]}"#,
    )
    .unwrap();
    let d = hilbert_distance(&ell, &pt(0.0, 0.0), &pt(0.5, 0.0)).unwrap();
    assert!((d - 0.5 * 3.0f64.ln()).abs() < 1e-12);

    assert!(matches!(
        ConvexDomain::from_json_str("{\"model\":\"klein\"}"),
        Err(HilbertError::BadJson(_))
    ));
    // signature (2,1) is not properly convex
    assert!(matches!(
        ConvexDomain::from_json_str(r#"{"model":"quadric","q":[[1,0,0],[0,1,0],[0,0,-1]]}"#),
        Err(HilbertError::BadDomain(_))
    ));
}

#[test]
fn transform_requires_real_matrices() {
    let ball = ConvexDomain::klein_ball(3);
    let g = SquareMatrix::identity(3, Field::Complex);
    assert!(matches!(
        ball.transform(&g),
        Err(HilbertError::RealFieldRequired)
    ));
}
