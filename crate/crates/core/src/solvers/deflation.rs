//! Coarse-space correction for GCR.
//!
//! Given coarse columns `Q`, the residual is kept orthogonal to `range(Q)`
//! through the A-projector `P = I − Q (QᵀAQ)⁻¹ QᵀA` and the initial guess
//! `χ₀ = Q (QᵀAQ)⁻¹ Qᵀ b`.

use super::gcr::true_residual_ratio;
use super::{check_rhs, orthogonalize, IterationView, SolveOutcome, SolverConfig, Tracker};
use crate::error::{check_len, Error, Result};
use crate::linalg::{axpy, dot, norm2, DenseMatrix, LinearOperator, LuFactors};

/// Smallest accepted ratio between the weakest and strongest pivot of `QᵀAQ`.
pub const GRAM_PIVOT_RATIO: f64 = 1e-12;

/// Factorized second-level operator `QᵀAQ` bound to the operator it was built from.
pub struct CoarseOperator<'a, A: LinearOperator + ?Sized> {
    op: &'a A,
    q: DenseMatrix,
    gram: DenseMatrix,
    lu: LuFactors,
}

impl<A: LinearOperator + ?Sized> std::fmt::Debug for CoarseOperator<'_, A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoarseOperator")
            .field("n", &self.q.rows())
            .field("m", &self.q.cols())
            .field("min_pivot_ratio", &self.lu.min_pivot_ratio())
            .finish()
    }
}

/// Normalizes the columns of `q`, forms `QᵀAQ` with `m` operator applications
/// and factorizes it.
pub fn build_coarse_operator<'a, A: LinearOperator + ?Sized>(
    op: &'a A,
    q: &DenseMatrix,
) -> Result<CoarseOperator<'a, A>> {
    let n = op.dim();
    check_len(n, q.rows())?;
    let m = q.cols();
    if m > n {
        return Err(Error::InvalidArgument(format!(
            "coarse space has {m} columns but the system has size {n}"
        )));
    }
    let mut q = q.clone();
    for j in 0..m {
        let col = q.col_mut(j);
        let nrm = norm2(col);
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::RankDeficient {
                columns: m,
                pivot: j,
                ratio: 0.0,
            });
        }
        col.iter_mut().for_each(|v| *v /= nrm);
    }
    let mut gram = DenseMatrix::zeros(m, m);
    for j in 0..m {
        let aq = op.apply_vec(q.col(j));
        for i in 0..m {
            gram[(i, j)] = dot(q.col(i), &aq);
        }
    }
    let lu = LuFactors::new(&gram, GRAM_PIVOT_RATIO)?;
    Ok(CoarseOperator { op, q, gram, lu })
}

impl<'a, A: LinearOperator + ?Sized> CoarseOperator<'a, A> {
    pub fn operator(&self) -> &'a A {
        self.op
    }

    /// Column-normalized coarse basis.
    pub fn basis(&self) -> &DenseMatrix {
        &self.q
    }

    /// `QᵀAQ` for the normalized basis.
    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn coarse_size(&self) -> usize {
        self.q.cols()
    }

    pub fn dim(&self) -> usize {
        self.q.rows()
    }

    pub fn min_pivot_ratio(&self) -> f64 {
        self.lu.min_pivot_ratio()
    }

    /// `(QᵀAQ)⁻¹ v`
    pub fn solve_coarse(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.lu.solve(v)
    }

    /// `P v = v − Q (QᵀAQ)⁻¹ Qᵀ(A v)`, one operator application.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), v.len())?;
        if self.coarse_size() == 0 {
            return Ok(v.to_vec());
        }
        let av = self.op.apply_vec(v);
        let gamma = self.solve_coarse(&self.q.matvec_transpose(&av)?)?;
        let mut out = v.to_vec();
        for (j, &g) in gamma.iter().enumerate() {
            axpy(-g, self.q.col(j), &mut out);
        }
        Ok(out)
    }

    /// `χ₀ = Q (QᵀAQ)⁻¹ Qᵀ b`
    pub fn initial_guess(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), b.len())?;
        let gamma = self.solve_coarse(&self.q.matvec_transpose(b)?)?;
        self.q.matvec(&gamma)
    }
}

pub fn project<A: LinearOperator + ?Sized>(
    coarse: &CoarseOperator<'_, A>,
    v: &[f64],
) -> Result<Vec<f64>> {
    coarse.project(v)
}

pub fn coarse_initial_guess<A: LinearOperator + ?Sized>(
    coarse: &CoarseOperator<'_, A>,
    b: &[f64],
) -> Result<Vec<f64>> {
    coarse.initial_guess(b)
}

/// GCR with coarse-space correction from a zero start.
///
/// With an empty `q` this performs exactly the arithmetic of
/// [`super::gcr_solve`] from `x0 = 0`.
pub fn deflated_gcr_solve<A: LinearOperator + ?Sized>(
    op: &A,
    b: &[f64],
    q: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    let coarse = build_coarse_operator(op, q)?;
    deflated_gcr_solve_monitored(&coarse, b, cfg, &mut |_| {})
}

/// Coarse-corrected GCR on a prebuilt [`CoarseOperator`], reporting every
/// iteration to `monitor`.
///
/// Iterations are numbered from one and convergence is tested on the residual
/// each iteration produces, so at least one iteration runs whenever the
/// coarse initial guess leaves a nonzero residual. Per iteration the solver
/// performs one projection `y_k = P r_k` and one product `A y_k`; the new
/// direction and its image come from the cached `(A w)_i`.
pub fn deflated_gcr_solve_monitored<A: LinearOperator + ?Sized>(
    coarse: &CoarseOperator<'_, A>,
    b: &[f64],
    cfg: &SolverConfig,
    monitor: &mut dyn FnMut(&IterationView),
) -> Result<SolveOutcome> {
    let op = coarse.operator();
    let n = op.dim();
    let b_norm = check_rhs(n, b)?;
    let mut tracker = Tracker::new(cfg, b_norm);
    let stop = cfg.stop_tolerance();
    let with_coarse = coarse.coarse_size() > 0;
    let mut matvecs = coarse.coarse_size();

    let mut chi = coarse.initial_guess(b)?;
    let mut r = op.apply_vec(&chi);
    matvecs += 1;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r0_norm = norm2(&r);
    let initial_ratio = tracker.observe(0, r0_norm, r0_norm == 0.0);

    let mut directions: Vec<Vec<f64>> = Vec::new();
    let mut a_directions: Vec<Vec<f64>> = Vec::new();
    let mut aw_norms2: Vec<f64> = Vec::new();

    if r0_norm > 0.0 {
        let y = coarse.project(&r)?;
        let ay = op.apply_vec(&y);
        matvecs += 1 + usize::from(with_coarse);
        aw_norms2.push(dot(&ay, &ay));
        directions.push(y);
        a_directions.push(ay);
    }
    monitor(&IterationView {
        iteration: 0,
        chi: &chi,
        residual: &r,
        aw: &a_directions,
    });

    let mut k = 0;
    let mut ratio = initial_ratio;
    let mut done = r0_norm == 0.0;
    while !done && k < cfg.max_iter() {
        let aww = aw_norms2[k];
        if aww == 0.0 {
            return Err(Error::Breakdown { iteration: k });
        }
        let zeta = dot(&r, &a_directions[k]) / aww;
        axpy(zeta, &directions[k], &mut chi);
        axpy(-zeta, &a_directions[k], &mut r);
        k += 1;
        ratio = tracker.observe(k, norm2(&r), true);
        done = ratio <= stop;

        if !done && k < cfg.max_iter() {
            let y = coarse.project(&r)?;
            let ay = op.apply_vec(&y);
            matvecs += 1 + usize::from(with_coarse);
            let (w, aw) = orthogonalize(y, ay, &directions, &a_directions, &aw_norms2);
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
