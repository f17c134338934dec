use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use csrbf::assembly::assemble;
use csrbf::imaging::{evaluate_at, pixel_center};
use csrbf::linalg::{dot, LinearOperator};
use csrbf::solvers::direct_solve;
use csrbf::{Error, InterpolationProblem, Point, RadialBasis};

fn random_sites(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Point> {
    (0..n)
        .map(|_| {
            let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            Point::from_slice(&c).unwrap()
        })
        .collect()
}

fn problem(sites: Vec<Point>, radius: f64, rng: &mut ChaCha8Rng) -> InterpolationProblem {
    let values = sites.iter().map(|_| rng.random::<f64>()).collect();
    InterpolationProblem::new(sites, values, RadialBasis::wendland_c2(radius).unwrap()).unwrap()
}

#[test]
fn saddle_operator_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in [2, 3] {
        let sites = random_sites(&mut rng, 150, dim);
        let sys = assemble(&problem(sites, 0.25, &mut rng)).unwrap();
        assert!(sys.phi_block().is_symmetric());
        let n = sys.size();
        for _ in 0..5 {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lhs = dot(&sys.apply_vec(&u), &v);
            let rhs = dot(&u, &sys.apply_vec(&v));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}

#[test]
fn sparsity_on_a_large_grid() {
    let w = 40;
    let sites: Vec<Point> = (0..w * w).map(|i| pixel_center(i % w, i / w, w, w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let radius = 0.1;
    let sys = assemble(&problem(sites.clone(), radius, &mut rng)).unwrap();
    let phi = sys.phi_block();
    let n = sites.len();
    assert_eq!(phi.rows(), n);
    for i in 0..n {
        assert_eq!(phi.get(i, i), 1.0);
    }
    // Interior sites see about π r² N neighbours (including themselves).
    let mean = phi.nnz() as f64 / n as f64;
    let expected = std::f64::consts::PI * radius * radius * n as f64;
    assert!(mean <= expected * 1.05 && mean >= expected * 0.6, "mean row nnz {mean}");
    assert!((phi.nnz() as f64) < 0.05 * (n * n) as f64);
}

#[test]
fn direct_solution_reproduces_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [2, 3] {
        let sites = random_sites(&mut rng, 120, dim);
        let p = problem(sites, 0.3, &mut rng);
        let sys = assemble(&p).unwrap();
        let sol = direct_solve(&sys).unwrap();
        let lambda_moments = sys.poly_block().matvec_transpose(&sol.lambda).unwrap();
        assert!(lambda_moments.iter().all(|m| m.abs() < 1e-10));
        let fitted = evaluate_at(&p, &sol, p.sites()).unwrap();
        for (f, v) in fitted.iter().zip(p.values()) {
            assert!((f - v).abs() < 1e-10);
        }
    }
}

#[test]
fn linear_data_is_reproduced_by_the_polynomial_part() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sites = random_sites(&mut rng, 80, 2);
    let values = sites
        .iter()
        .map(|p| 0.2 + 0.3 * p.coord(0) - 0.1 * p.coord(1))
        .collect();
    let p = InterpolationProblem::new(sites, values, RadialBasis::wendland_c2(0.2).unwrap())
        .unwrap();
    let sol = direct_solve(&assemble(&p).unwrap()).unwrap();
    assert!(sol.lambda.iter().all(|l| l.abs() < 1e-10));
    for (got, want) in sol.c.iter().zip([0.2, 0.3, -0.1]) {
        assert!((got - want).abs() < 1e-10);
    }
}

#[test]
fn duplicate_sites_are_rejected() {
    let sites = vec![
        Point::new2(0.1, 0.1),
        Point::new2(0.5, 0.5),
        Point::new2(0.9, 0.2),
        Point::new2(0.5, 0.5),
    ];
    let p = InterpolationProblem::new(sites, vec![0.0; 4], RadialBasis::wendland_c2(0.3).unwrap())
        .unwrap();
    match assemble(&p) {
        Err(Error::DuplicateSites { first, second, .. }) => assert_eq!((first, second), (1, 3)),
        other => panic!("expected duplicate error, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_is_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, radius in 0.05f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = random_sites(&mut rng, 60, 2);
        let sys = assemble(&problem(sites, radius, &mut rng)).unwrap();
        let n = sys.size();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
        let lhs = sys.apply_saddle(&combo).unwrap();
        let ax = sys.apply_vec(&x);
        let ay = sys.apply_vec(&y);
        for i in 0..n {
            prop_assert!((lhs[i] - (alpha * ax[i] + ay[i])).abs() < 1e-11);
        }
    }

    #[test]
    fn phi_entries_lie_in_unit_interval(seed in any::<u64>(), radius in 0.05f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = random_sites(&mut rng, 50, 3);
        let sys = assemble(&problem(sites.clone(), radius, &mut rng)).unwrap();
        for i in 0..sites.len() {
            let (cols, vals) = sys.phi_block().row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                prop_assert!(v > 0.0 && v <= 1.0);
                prop_assert!(sites[i].distance(&sites[j]) < radius);
            }
        }
    }
}
