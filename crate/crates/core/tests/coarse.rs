use proptest::prelude::*;

use csrbf::coarse::{build_coarse, chebyshev, sinc, CoarseBasisKind};
use csrbf::linalg::{dot, norm2};
use csrbf::Point;

fn sites_strategy(dim: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(0.0f64..=1.0, dim), 20..80).prop_map(|rows| {
        rows.iter()
            .map(|c| Point::from_slice(c).unwrap())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn columns_are_finite_unit_and_zero_on_polynomial_rows(
        sites in prop_oneof![sites_strategy(2), sites_strategy(3)],
        m in 0usize..=16,
    ) {
        let n = sites.len();
        let l = sites[0].dim() + 1;
        for kind in CoarseBasisKind::ALL {
            let space = build_coarse(kind, m, &sites, l).unwrap();
            let q = space.matrix();
            prop_assert_eq!((q.rows(), q.cols()), (n + l, m));
            for j in 0..m {
                let col = q.col(j);
                prop_assert!(col.iter().all(|v| v.is_finite()), "{} column {}", kind, j);
                prop_assert!((norm2(col) - 1.0).abs() <= 1e-12);
                prop_assert!(col[n..].iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn orthonormalized_columns(sites in sites_strategy(2), m in 1usize..=6) {
        let l = 3;
        let space = build_coarse(CoarseBasisKind::Cosine, m, &sites, l)
            .unwrap()
            .orthonormalized()
            .unwrap();
        let q = space.matrix();
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(q.col(i), q.col(j)) - want).abs() < 1e-10);
            }
            prop_assert!(q.col(i)[sites.len()..].iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn chebyshev_matches_closed_form() {
    for q in 0..=16 {
        for k in 0..=200 {
            let u = -1.0 + 2.0 * k as f64 / 200.0;
            let want = (q as f64 * u.acos()).cos();
            assert!((chebyshev(q, u) - want).abs() <= 1e-10, "q={q} u={u}");
        }
    }
    assert_eq!(chebyshev(2, 0.5), -0.5);
}

#[test]
fn generator_values() {
    assert!((sinc(1e-6) - 1.0).abs() <= 1e-8);
    assert_eq!(sinc(0.0), 1.0);
    assert!(sinc(1.0).abs() < 1e-15);
    let t = 0.3;
    let u = 2.0 * t - 1.0;
    let pi = std::f64::consts::PI;
    let cases = [
        (CoarseBasisKind::Cosine, (2.0 * pi * t).cos()),
        (CoarseBasisKind::Sine, (2.0 * pi * t).sin()),
        (CoarseBasisKind::Tangent, (2.0 * pi * (t - 0.5) * 0.9).tan()),
        (CoarseBasisKind::Sinc, (2.0 * pi * u).sin() / (2.0 * pi * u)),
        (CoarseBasisKind::Exponential, (-2.0 * t).exp()),
        (CoarseBasisKind::Gaussian, (-(2.0 * u) * (2.0 * u)).exp()),
        (CoarseBasisKind::Chebyshev, 2.0 * u * u - 1.0),
    ];
    for (kind, want) in cases {
        assert!((kind.generator(2, t) - want).abs() < 1e-14, "{kind}");
    }
}

#[test]
fn tangent_stays_finite_at_the_edges() {
    for q in 1..=8 {
        for t in [0.0, 1.0, 0.5, 1e-12, 1.0 - 1e-12] {
            assert!(CoarseBasisKind::Tangent.generator(q, t).is_finite());
        }
    }
}

#[test]
fn axis_round_robin() {
    let sites = vec![
        Point::new2(0.0, 1.0),
        Point::new2(0.5, 0.25),
        Point::new2(1.0, 0.0),
    ];
    let q = build_coarse(CoarseBasisKind::Cosine, 3, &sites, 3).unwrap();
    let m = q.matrix();
    // column 0: cos(π x), column 1: cos(π y), column 2: cos(2π x)
    let raw = [[1.0, 0.0, -1.0], [-1.0, (0.25f64 * std::f64::consts::PI).cos(), 1.0], [1.0, -1.0, 1.0]];
    for (j, col) in raw.iter().enumerate() {
        let n = norm2(col);
        for i in 0..3 {
            assert!((m[(i, j)] - col[i] / n).abs() < 1e-15);
        }
    }
}

#[test]
fn names_round_trip() {
    for kind in CoarseBasisKind::ALL {
        assert_eq!(kind.name().parse::<CoarseBasisKind>().unwrap(), kind);
        assert_eq!(kind.name().to_uppercase().parse::<CoarseBasisKind>().unwrap(), kind);
    }
    assert!("wavelet".parse::<CoarseBasisKind>().is_err());
}
