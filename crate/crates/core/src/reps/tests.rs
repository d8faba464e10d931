use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::matgeo::SquareMatrix;

fn random_sl2(rng: &mut ChaCha8Rng) -> Sl2Element {
    let rot = Sl2Element::rotation(rng.gen_range(-3.0..3.0));
    let sh = Sl2Element::shear(rng.gen_range(-1.0..1.0));
    let di = Sl2Element::diag(rng.gen_range(0.5..2.0)).unwrap();
    rot.mul(&sh).mul(&di)
}

fn max_entry_diff(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
    let (da, db) = (a.data(), b.data());
    let mut worst = 0.0f64;
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            worst = worst.max((da[(i, j)] - db[(i, j)]).norm());
        }
    }
    worst
}

#[test]
fn sl2_classification_follows_trace() {
    assert_eq!(Sl2Element::identity().classify(), Sl2Class::Parabolic);
    assert_eq!(Sl2Element::shear(1.0).classify(), Sl2Class::Parabolic);
    assert_eq!(Sl2Element::diag(2.0).unwrap().classify(), Sl2Class::Hyperbolic);
    assert_eq!(Sl2Element::rotation(1.0).classify(), Sl2Class::Elliptic);
    assert!(matches!(
        Sl2Element::new([[2.0, 0.0], [0.0, 2.0]]),
        Err(RepError::NotUnimodular(_))
    ));
    let g = Sl2Element::new([[3.0, 1.0], [2.0, 1.0]]).unwrap();
    let gi = g.inverse();
    assert_eq!(g.mul(&gi).entries(), Sl2Element::identity().entries());
}

#[test]
fn symmetric_power_convention_is_pinned() {
    // τ_d(id) = id and τ_d(diag(s,1/s)) = diag(s^{d-1}, …, s^{1-d}).
    for d in 2..=7usize {
        let id = sl2_symmetric_power(&Sl2Element::identity(), d).unwrap();
        assert!(max_entry_diff(&id, &SquareMatrix::identity(d, Field::Real)) < 1e-14);
        let s = 1.7f64;
        let tau = sl2_symmetric_power(&Sl2Element::diag(s).unwrap(), d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { s.powi(d as i32 - 1 - 2 * i as i32) } else { 0.0 };
                let got = tau.data()[(i, j)];
                assert!((got.re - want).abs() <= 1e-12 * want.abs().max(1.0) && got.im == 0.0);
            }
        }
    }
    let tau3 = sl2_symmetric_power(&Sl2Element::diag(2.0).unwrap(), 3).unwrap();
    let want = DMatrix::from_row_slice(3, 3, &[4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
    assert!(max_entry_diff(&tau3, &SquareMatrix::from_real(want).unwrap()) < 1e-14);
    assert!(matches!(sl2_symmetric_power(&Sl2Element::identity(), 1), Err(RepError::BadDimension(1))));
}

#[test]
fn symmetric_power_matches_polynomial_action_pointwise() {
    // Independent oracle: τ(g) applied to the coefficient vector of
    // e_j = X^j Y^{p-j} must evaluate, at sample points, to e_j ∘ g⁻¹.
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a11_54e1);
    for d in [3usize, 4, 6] {
        let p = d - 1;
        for _ in 0..6 {
            let g = random_sl2(&mut rng);
            let tau = sl2_symmetric_power(&g, d).unwrap();
            let [[a, b], [c, dd]] = g.inverse().entries();
            for &(x, y) in &[(0.3f64, 1.0f64), (-0.7, 0.4), (1.3, -0.9), (2.0, 0.1)] {
                for j in 0..d {
                    let lhs: f64 = (0..d)
                        .map(|m| tau.data()[(m, j)].re * x.powi(m as i32) * y.powi((p - m) as i32))
                        .sum();
                    let (gx, gy) = (a * x + b * y, c * x + dd * y);
                    let rhs = gx.powi(j as i32) * gy.powi((p - j) as i32);
                    assert!(
                        (lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0),
                        "d={d} j={j} at ({x},{y}): {lhs} vs {rhs}"
                    );
                }
            }
        }
    }
}

#[test]
fn symmetric_power_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f2c_9b3d);
    for _ in 0..60 {
        let (g, h) = (random_sl2(&mut rng), random_sl2(&mut rng));
        for d in [2usize, 3, 5, 8] {
            let lhs = sl2_symmetric_power(&g.mul(&h), d).unwrap();
            let rhs = sl2_symmetric_power(&g, d).unwrap().mul(&sl2_symmetric_power(&h, d).unwrap()).unwrap();
            let scale = lhs.data().iter().map(|z| z.norm()).fold(1.0f64, f64::max);
            assert!(max_entry_diff(&lhs, &rhs) <= 1e-8 * scale, "d={d}");
        }
    }
}

#[test]
fn symmetric_power_eigenvalue_law() {
    // λ_k(τ_d(g)) = λ₁(g)^{d+1-2k} for hyperbolic g.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5137_00e5);
    let mut tested = 0;
    while tested < 20 {
        let g = random_sl2(&mut rng);
        if g.classify() != Sl2Class::Hyperbolic {
            continue;
        }
        tested += 1;
        let l1 = g.to_matrix().unwrap().eigenvalue_moduli().unwrap()[0];
        for d in [2usize, 4, 5, 8] {
            let moduli = sl2_symmetric_power(&g, d).unwrap().eigenvalue_moduli().unwrap().to_vec();
            for (k, lam) in moduli.iter().enumerate() {
                let want = l1.powi((d as i32) - 1 - 2 * (k as i32));
                assert!(
                    (lam - want).abs() <= 1e-7 * want,
                    "d={d} k={} lam={lam} want={want}",
                    k + 1
                );
            }
        }
    }
}

#[test]
fn heisenberg_group_law_is_exact() {
    assert_eq!(heisenberg(0, 0), SquareMatrix::identity(3, Field::Complex));
    // Bitwise: every entry of the product is an exact dyadic on both sides.
    for m in -10i64..=10 {
        for n in -10i64..=10 {
            for mp in -10i64..=10 {
                for np in [-7i64, 0, 9] {
                    let prod = heisenberg(m, n).mul(&heisenberg(mp, np)).unwrap();
                    assert_eq!(prod.data(), heisenberg(m + mp, n + np).data(), "({m},{n})·({mp},{np})");
                }
            }
        }
    }
    let inv = heisenberg(2, 3).mul(&heisenberg(-2, -3)).unwrap();
    assert_eq!(inv.data(), SquareMatrix::identity(3, Field::Complex).data());
}

#[test]
fn heisenberg_is_weakly_unipotent() {
    for (m, n) in [(0i64, 1i64), (5, -3), (100, 100)] {
        assert!(heisenberg(m, n).is_weakly_unipotent(1e-9).unwrap());
    }
}

#[test]
fn distortion_table_shows_exponential_gap() {
    let rows = heisenberg_distortion_table(12, 12, EmbeddingPath::Complex).unwrap();
    assert_eq!(rows.len(), 12 * 12);
    for row in &rows {
        assert!(row.cusp_distance as i64 >= row.lower_bound, "row ({},{})", row.k, row.n);
        if row.n == row.k {
            assert!(row.cusp_distance <= 2);
        }
        if row.n == 1 {
            assert!(row.cusp_distance as i64 >= 2 * i64::from(row.k) - 4);
        }
    }
    // Displacement is linear in k; the complex-SVD path has slope √2·log 2.
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n == 1 && r.k >= 6)
        .map(|r| (f64::from(r.k), r.symspace_displacement))
        .collect();
    let slope = fit_slope(&pts);
    let want = std::f64::consts::SQRT_2 * 2.0f64.ln();
    assert!((slope - want).abs() <= 0.1 * want, "slope {slope} vs {want}");

    let real_rows = heisenberg_distortion_table(12, 1, EmbeddingPath::Realified).unwrap();
    let pts: Vec<(f64, f64)> = real_rows
        .iter()
        .filter(|r| r.k >= 6)
        .map(|r| (f64::from(r.k), r.symspace_displacement))
        .collect();
    let slope = fit_slope(&pts);
    let want = 2.0 * 2.0f64.ln();
    assert!((slope - want).abs() <= 0.1 * want, "realified slope {slope} vs {want}");

    assert!(matches!(
        heisenberg_distortion_table(15, 3, EmbeddingPath::Complex),
        Err(RepError::KMaxTooLarge(15))
    ));
}

#[test]
fn shortcut_family_is_one_hop_but_diverges_upstairs() {
    let rows = heisenberg_shortcut_table(12, EmbeddingPath::Complex).unwrap();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        assert_eq!(row.cusp_distance, 1, "level {}", row.n);
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().skip(4).map(|r| (f64::from(r.n), r.symspace_displacement)).collect();
    let slope = fit_slope(&pts);
    assert!(slope > 2.0f64.ln(), "displacement slope {slope} not linear");
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

#[test]
fn representation_table_checks_relations() {
    let rot = SquareMatrix::from_real(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
    // Order 4 projectively: r² = -id passes, r alone does not.
    let table = RepresentationTable::new(vec![('r', rot.clone())], vec!["rr".into()]).unwrap();
    assert_eq!(table.relation_residuals().unwrap(), vec![0.0]);
    assert!(matches!(
        RepresentationTable::new(vec![('r', rot.clone())], vec!["r".into()]),
        Err(RepError::RelationFails { .. })
    ));
    assert!(matches!(
        RepresentationTable::new(vec![('R', rot.clone())], vec![]),
        Err(RepError::BadGeneratorName('R'))
    ));
    let table = RepresentationTable::new(vec![('r', rot)], vec![]).unwrap();
    let round = table.evaluate("rR").unwrap();
    assert!(table.projective_identity_residual(&round) < 1e-12);
    assert!(matches!(table.evaluate("x"), Err(RepError::UnknownLetter('x'))));
}

#[test]
fn semisimplification_pair_matches_displays() {
    let (rho, rho_ss) = semisimplification_pair_default().unwrap();
    assert_eq!(rho.dim(), 4);
    // ρ(a) is untouched by the semisimplification.
    assert_eq!(rho.generator('a').unwrap().data(), rho_ss.generator('a').unwrap().data());
    let want_b = DMatrix::from_row_slice(
        4,
        4,
        &[1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
    );
    assert_eq!(rho.generator('b').unwrap().real_data(), want_b);
    let want_ss_b = DMatrix::from_row_slice(
        4,
        4,
        &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0],
    );
    assert_eq!(rho_ss.generator('b').unwrap().real_data(), want_ss_b);

    assert!(rho.generator('b').unwrap().is_weakly_unipotent(1e-12).unwrap());
    // Free group: a generic word is far from ±identity.
    let word = rho.evaluate("abAB").unwrap();
    assert!(rho.projective_identity_residual(&word) > 0.1);

    assert!(matches!(
        semisimplification_pair(&Sl2Element::rotation(0.4)),
        Err(RepError::NotHyperbolic)
    ));
    assert!(matches!(
        semisimplification_pair(&Sl2Element::shear(2.0)),
        Err(RepError::NotHyperbolic)
    ));
}

#[test]
fn ss_collapse_limit_hits_the_displayed_point() {
    let x = ProjPoint::from_real_slice(&[1.0, 1.0, 1.0, 1.0]).unwrap();
    let report = ss_collapse_limit_check(&x, 1 << 16).unwrap();
    assert!(report.limit_distance <= 1.0 / 2.0f64.powi(15), "{}", report.limit_distance);
    assert!(report.rate_ok, "fitted order {}", report.fitted_order);

    // x₂ = 0, x₄ = 1 lands on [0:0:1:0].
    let x = ProjPoint::from_real_slice(&[1.0, 0.0, 0.0, 1.0]).unwrap();
    let report = ss_collapse_limit_check(&x, 1 << 16).unwrap();
    assert!(report.limit_distance <= 1e-4);
    assert!(report.rate_ok);

    let e1 = ProjPoint::from_real_slice(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(matches!(ss_collapse_limit_check(&e1, 1 << 16), Err(RepError::DegenerateInput)));
    let x = ProjPoint::from_real_slice(&[1.0, 1.0, 1.0, 1.0]).unwrap();
    assert!(matches!(ss_collapse_limit_check(&x, 8), Err(RepError::TooFewIterations(_))));
    let p3 = ProjPoint::from_real_slice(&[1.0, 1.0, 1.0]).unwrap();
    assert!(matches!(ss_collapse_limit_check(&p3, 1 << 16), Err(RepError::BadPoint)));
}

#[test]
fn unmodified_rho_has_two_limit_directions() {
    // x₂-dominant and x₄-dominant inputs converge to projectively distinct
    // points, so no single strongly-dynamics-preserving limit exists.
    let (rho, _) = semisimplification_pair_default().unwrap();
    let bn = rho.generator('b').unwrap().pow(1 << 24);
    let from_e2 = act_proj(&bn, &ProjPoint::from_real_slice(&[0.0, 1.0, 0.0, 0.0]).unwrap()).unwrap();
    let from_e4 = act_proj(&bn, &ProjPoint::from_real_slice(&[0.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
    let split = angle_distance_proj(&from_e2, &from_e4).unwrap();
    assert!(split >= 0.5, "limits collapsed: {split}");
}

#[test]
fn ss_is_p1_divergent_along_the_peripheral() {
    let (_, rho_ss) = semisimplification_pair_default().unwrap();
    let b = rho_ss.generator('b').unwrap();
    let mut prev = 0.0;
    for j in 0..=12u32 {
        let mu = b.pow(1u64 << j).singular_values().unwrap().mu.clone();
        let gap = mu[0] / mu[1];
        assert!(gap > prev, "gap not increasing at 2^{j}");
        prev = gap;
    }
}

#[test]
fn norm_contraction_meets_exponential_bound() {
    let ts = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0];
    for d in 2..=6usize {
        let report = equivariant_norm_contraction(d, &ts).unwrap();
        assert!((report.lambda - 1.0).abs() < 1e-9, "λ={} at d={d}", report.lambda);
        assert!(report.all_ok);
        assert_eq!(report.rows.len(), (d - 1) * ts.len());
        for row in &report.rows {
            if row.t == 0.0 {
                assert!((row.worst_decay - 1.0).abs() < 1e-12);
            }
            assert!(row.conjugation_gap < 1e-9, "equivariance gap {}", row.conjugation_gap);
        }
    }
    // d = 2: the single splitting attains the bound exactly at t = 1.
    let report = equivariant_norm_contraction(2, &[1.0]).unwrap();
    let row = &report.rows[0];
    assert!((row.worst_decay - (-report.lambda).exp()).abs() < 1e-12);

    assert!(matches!(equivariant_norm_contraction(2, &[-1.0]), Err(RepError::BadTime(_))));
    assert!(matches!(equivariant_norm_contraction(1, &[1.0]), Err(RepError::BadDimension(1))));
}
