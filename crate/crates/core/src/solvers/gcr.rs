use super::{check_rhs, orthogonalize, IterationView, SolveOutcome, SolverConfig, Tracker};
use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm2, LinearOperator};

/// Plain, non-restarted GCR starting from `x0`.
pub fn gcr_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    gcr_solve_monitored(op, b, x0, cfg, &mut |_| {})
}

/// [`gcr_solve`] with a callback invoked after initialization and after every
/// iteration.
///
/// Each iteration uses one product with `A` (`A r_{k+1}`); `A w_{k+1}` is
/// obtained from the same linear combination that builds `w_{k+1}`.
pub fn gcr_solve_monitored<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
    monitor: &mut dyn FnMut(&IterationView),
) -> Result<SolveOutcome> {
    let n = op.dim();
    let b_norm = check_rhs(n, b)?;
    check_len(n, x0.len())?;

    let mut tracker = Tracker::new(cfg, b_norm);
    let mut matvecs = 0;

    let mut chi = x0.to_vec();
    let mut r = op.apply_vec(&chi);
    matvecs += 1;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let initial_ratio = tracker.observe(0, norm2(&r), true);
    let stop = cfg.stop_tolerance();

    let mut directions: Vec<Vec<f64>> = Vec::new();
    let mut a_directions: Vec<Vec<f64>> = Vec::new();
    let mut aw_norms2: Vec<f64> = Vec::new();

    let mut k = 0;
    let mut ratio = initial_ratio;
    if ratio > stop {
        let aw0 = op.apply_vec(&r);
        matvecs += 1;
        aw_norms2.push(dot(&aw0, &aw0));
        directions.push(r.clone());
        a_directions.push(aw0);
    }
    monitor(&IterationView {
        iteration: 0,
        chi: &chi,
        residual: &r,
        aw: &a_directions,
    });

    while ratio > stop && k < cfg.max_iter() {
        let aww = aw_norms2[k];
        if aww == 0.0 {
            return Err(Error::Breakdown { iteration: k });
        }
        let alpha = dot(&r, &a_directions[k]) / aww;
        axpy(alpha, &directions[k], &mut chi);
        axpy(-alpha, &a_directions[k], &mut r);
        k += 1;
        ratio = tracker.observe(k, norm2(&r), true);

        if ratio > stop && k < cfg.max_iter() {
            let ar = op.apply_vec(&r);
            matvecs += 1;
            let (w, aw) = orthogonalize(r.clone(), ar, &directions, &a_directions, &aw_norms2);
            aw_norms2.push(dot(&aw, &aw));
            directions.push(w);
            a_directions.push(aw);
        }
        monitor(&IterationView {
            iteration: k,
            chi: &chi,
            residual: &r,
            aw: &a_directions,
        });
    }

    let true_ratio = true_residual_ratio(op, b, &chi, b_norm);
    matvecs += 1;
    let report = tracker.finish(k, initial_ratio, true_ratio, ratio <= stop, matvecs);
    Ok(SolveOutcome { chi, report })
}

pub(super) fn true_residual_ratio<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    chi: &[f64],
    b_norm: f64,
) -> f64 {
    let ax = op.apply_vec(chi);
    let r: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum();
    r.sqrt() / b_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(tols: &[f64], max_iter: usize) -> SolverConfig {
        SolverConfig::new(tols.to_vec(), max_iter).unwrap()
    }

    #[test]
    fn identity_converges_in_one_step() {
        let a = DenseMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let out = gcr_solve(&a, &b, &[0.0; 5], &cfg(&[1e-10], 10)).unwrap();
        assert_eq!(out.report.iterations, 1);
        assert!(out.report.converged);
        for (x, y) in out.chi.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_start_needs_no_iterations() {
        let a = DenseMatrix::from_row_major(2, 2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let x = [0.3, -0.7];
        let b = a.matvec(&x).unwrap();
        let out = gcr_solve(&a, &b, &x, &cfg(&[1e-3, 1e-6], 10)).unwrap();
        assert_eq!(out.report.iterations, 0);
        assert_eq!(out.report.initial_residual_ratio, 0.0);
        assert_eq!(out.report.iterations_at(1e-6), Some(0));
    }

    #[test]
    fn zero_rhs_rejected() {
        let a = DenseMatrix::identity(3);
        assert!(gcr_solve(&a, &[0.0; 3], &[0.0; 3], &SolverConfig::default()).is_err());
        assert!(gcr_solve(&a, &[1.0; 2], &[0.0; 3], &SolverConfig::default()).is_err());
    }

    #[test]
    fn breakdown_is_reported() {
        // A maps the residual direction to zero: A e1 = 0.
        let a = DenseMatrix::from_row_major(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let err = gcr_solve(&a, &[1.0, 0.0], &[0.0, 0.0], &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Breakdown { iteration: 0 }));
    }

    #[test]
    fn max_iter_gives_unconverged_report() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 20;
        let a = DenseMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 + i as f64
            } else {
                0.0
            }
        });
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.1).collect();
        let out = gcr_solve(&a, &b, &vec![0.0; n], &cfg(&[1e-12], 3)).unwrap();
        assert!(!out.report.converged);
        assert_eq!(out.report.iterations, 3);
        assert_eq!(out.report.residual_history.len(), 4);
        assert_eq!(out.report.iterations_at(1e-12), None);
    }
}
