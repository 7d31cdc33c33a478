//! Dense complex-Hermitian SDP solver for
//!
//! ```text
//!   maximize Re tr(C X)  s.t.  X_ii = t_i (or tr X = T),  X ⪰ 0
//!   minimize b^T y       s.t.  Z = A*(y) − C ⪰ 0
//! ```
//!
//! Primal-dual interior point with the HKM search direction and a Mehrotra
//! predictor-corrector. Both iterates start strictly feasible: `X` at the
//! diagonal targets and `y` from a Gershgorin bound, so `Z` is diagonally
//! dominant. Feasibility is then preserved up to roundoff, which the residual
//! terms correct.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, hermitian_part, max_psd_step, re_trace_product, top_eigenpair, CMat, CVec, C64};

/// Relative tolerance on the anti-Hermitian part of an input cost.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SdpConstraint {
    /// `X_ii = t_i`, all `t_i > 0`.
    Diagonal(Vec<f64>),
    /// `tr X = T`, `T > 0`.
    Trace(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagSdpProblem {
    cost: CMat,
    constraint: SdpConstraint,
}

impl DiagSdpProblem {
    pub fn new(cost: &CMat, constraint: SdpConstraint) -> Result<Self> {
        let d = cost.nrows();
        if d == 0 || cost.ncols() != d {
            return Err(Error::Shape(format!("cost must be square and non-empty, got {:?}", cost.shape())));
        }
        if cost.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("cost has non-finite entries".into()));
        }
        if hermitian_defect(cost) > HERMITIAN_TOL {
            return Err(Error::Domain(format!(
                "cost is not Hermitian (relative defect {:.2e})",
                hermitian_defect(cost)
            )));
        }
        match &constraint {
            SdpConstraint::Diagonal(t) => {
                if t.len() != d {
                    return Err(Error::Shape(format!("{} diagonal targets for dimension {d}", t.len())));
                }
                if t.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::Domain("diagonal targets must be positive".into()));
                }
            }
            SdpConstraint::Trace(total) => {
                if !(*total > 0.0 && total.is_finite()) {
                    return Err(Error::Domain(format!("trace target {total} must be positive")));
                }
            }
        }
        Ok(Self { cost: hermitian_part(cost), constraint })
    }

    pub fn diagonal(cost: &CMat, targets: Vec<f64>) -> Result<Self> {
        Self::new(cost, SdpConstraint::Diagonal(targets))
    }

    pub fn trace(cost: &CMat, total: f64) -> Result<Self> {
        Self::new(cost, SdpConstraint::Trace(total))
    }

    pub fn dim(&self) -> usize {
        self.cost.nrows()
    }

    pub fn cost(&self) -> &CMat {
        &self.cost
    }

    pub fn constraint(&self) -> &SdpConstraint {
        &self.constraint
    }

    fn rhs(&self) -> DVector<f64> {
        match &self.constraint {
            SdpConstraint::Diagonal(t) => DVector::from_column_slice(t),
            SdpConstraint::Trace(total) => DVector::from_element(1, *total),
        }
    }

    /// `A(X)`.
    fn apply(&self, x: &CMat) -> DVector<f64> {
        match self.constraint {
            SdpConstraint::Diagonal(_) => DVector::from_iterator(x.nrows(), (0..x.nrows()).map(|i| x[(i, i)].re)),
            SdpConstraint::Trace(_) => DVector::from_element(1, x.trace().re),
        }
    }

    /// `A*(y)`.
    fn adjoint(&self, y: &DVector<f64>) -> CMat {
        let d = self.dim();
        match self.constraint {
            SdpConstraint::Diagonal(_) => CMat::from_diagonal(&y.map(C64::from)),
            SdpConstraint::Trace(_) => CMat::identity(d, d) * C64::from(y[0]),
        }
    }

    /// Schur complement `S_ij = Re tr(A_i X A_j Z^{-1})`.
    fn schur(&self, x: &CMat, zinv: &CMat) -> DMatrix<f64> {
        match self.constraint {
            SdpConstraint::Diagonal(_) => {
                let d = self.dim();
                DMatrix::from_fn(d, d, |i, j| (x[(i, j)] * zinv[(j, i)]).re)
            }
            SdpConstraint::Trace(_) => DMatrix::from_element(1, 1, re_trace_product(x, zinv)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Target duality gap `α`, relative to `1 + |primal|` and to the same
    /// quantity in units of the largest cost entry.
    pub accuracy: f64,
    /// Relative primal and dual residual tolerance.
    pub feasibility: f64,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { accuracy: 1e-7, feasibility: 1e-8, max_iterations: 200, step_fraction: 0.98 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: CMat,
    pub y: DVector<f64>,
    /// Dual slack `A*(y) − C`.
    pub z: CMat,
    pub primal: f64,
    pub dual: f64,
    /// `dual − primal`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        self.gap / (1.0 + self.primal.abs())
    }
}

fn inverse_pd(m: &CMat) -> Option<CMat> {
    m.clone().cholesky().map(|c| c.inverse())
}

struct Iterate {
    x: CMat,
    y: DVector<f64>,
    z: CMat,
}

/// Solves the problem to relative gap `options.accuracy`, so small-valued
/// problems are solved to the same relative accuracy as unit-scale ones.
pub fn solve_diag_sdp(problem: &DiagSdpProblem, options: &SdpOptions) -> Result<SdpSolution> {
    let d = problem.dim();
    let scale = problem.cost.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let c = problem.cost.unscale(scale);
    let b = problem.rhs();
    let b_norm = b.norm();
    let c_norm = c.norm();

    let row_bound: Vec<f64> = (0..d).map(|i| c.row(i).iter().map(|z| z.norm()).sum::<f64>() + 1.0).collect();
    let (x0, y0) = match &problem.constraint {
        SdpConstraint::Diagonal(t) => (
            CMat::from_diagonal(&DVector::from_iterator(d, t.iter().map(|&v| C64::from(v)))),
            DVector::from_vec(row_bound),
        ),
        SdpConstraint::Trace(total) => (
            CMat::identity(d, d) * C64::from(total / d as f64),
            DVector::from_element(1, row_bound.iter().copied().fold(0.0, f64::max)),
        ),
    };
    let z0 = problem.adjoint(&y0) - &c;
    let mut it = Iterate { x: x0, y: y0, z: z0 };

    let summarize = |it: &Iterate, iterations: usize| -> SdpSolution {
        let primal = re_trace_product(&c, &it.x) * scale;
        let dual = b.dot(&it.y) * scale;
        let rp = &b - problem.apply(&it.x);
        let rd = problem.adjoint(&it.y) - &c - &it.z;
        SdpSolution {
            x: it.x.clone(),
            y: &it.y * scale,
            z: &it.z * C64::from(scale),
            primal,
            dual,
            gap: dual - primal,
            primal_residual: rp.norm() / (1.0 + b_norm),
            dual_residual: rd.norm() / (1.0 + c_norm),
            iterations,
        }
    };

    for iter in 0..options.max_iterations {
        let sol = summarize(&it, iter);
        if sol.relative_gap() <= options.accuracy
            && sol.gap <= options.accuracy * (scale + sol.primal.abs())
            && sol.primal_residual <= options.feasibility
            && sol.dual_residual <= options.feasibility
        {
            return Ok(sol);
        }

        let mu = re_trace_product(&it.x, &it.z) / d as f64;
        let rp = &b - problem.apply(&it.x);
        let rd = problem.adjoint(&it.y) - &c - &it.z;
        let Some(zinv) = inverse_pd(&it.z) else {
            break;
        };
        let Some(schur) = problem.schur(&it.x, &zinv).cholesky() else {
            break;
        };
        let x_rd_zinv = &it.x * &rd * &zinv;

        // ΔX = G − X A*(Δy) Z^{-1}, with G = σμZ^{-1} − X − X Rd Z^{-1} − K Z^{-1}.
        let direction = |target: f64, corrector: Option<&CMat>| -> (CMat, DVector<f64>, CMat) {
            let mut g = &zinv * C64::from(target) - &it.x - &x_rd_zinv;
            if let Some(k) = corrector {
                g -= k * &zinv;
            }
            let rhs = problem.apply(&hermitian_part(&g)) - &rp;
            let dy = schur.solve(&rhs);
            let ady = problem.adjoint(&dy);
            let dx = hermitian_part(&(g - &it.x * &ady * &zinv));
            let dz = ady + &rd;
            (dx, dy, dz)
        };

        let (dx_a, _, dz_a) = direction(0.0, None);
        let ap = max_psd_step(&it.x, &dx_a).min(1.0);
        let ad = max_psd_step(&it.z, &dz_a).min(1.0);
        let x_aff = &it.x + &dx_a * C64::from(ap);
        let z_aff = &it.z + &dz_a * C64::from(ad);
        let mu_aff = re_trace_product(&x_aff, &z_aff) / d as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let k = &dx_a * &dz_a;
        let (dx, dy, dz) = direction(sigma * mu, Some(&k));
        let ap = (options.step_fraction * max_psd_step(&it.x, &dx)).min(1.0);
        let ad = (options.step_fraction * max_psd_step(&it.z, &dz)).min(1.0);
        it.x = hermitian_part(&(&it.x + dx * C64::from(ap)));
        it.y += dy * ad;
        it.z = hermitian_part(&(&it.z + dz * C64::from(ad)));
    }

    let best = summarize(&it, options.max_iterations);
    Err(Error::SdpConvergence { iterations: best.iterations, gap: best.relative_gap(), best: Box::new(best) })
}

/// Closed-form optimum of `max Re w^H C w` s.t. `‖w‖² = T`: `w = √T v_max`,
/// value `T λ_max` of the Hermitian part.
pub fn solve_trace_sdp_rank1(cost: &CMat, total: f64) -> Result<(CVec, f64)> {
    if cost.nrows() == 0 || cost.nrows() != cost.ncols() {
        return Err(Error::Shape(format!("cost must be square and non-empty, got {:?}", cost.shape())));
    }
    if !(total >= 0.0 && total.is_finite()) {
        return Err(Error::Domain(format!("trace target {total} must be nonnegative")));
    }
    let (lambda, v) = top_eigenpair(cost);
    Ok((v * C64::from(total.sqrt()), total * lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian_vec, hermitian_eigenvalues};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMat {
        let m = CMat::from_column_slice(d, d, complex_gaussian_vec(rng, d * d).as_slice());
        hermitian_part(&m)
    }

    #[test]
    fn trivial_examples() {
        let opts = SdpOptions::default();
        let c = CMat::from_element(1, 1, C64::new(2.5, 0.0));
        let s = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, vec![1.0]).unwrap(), &opts).unwrap();
        assert!((s.x[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((s.primal - 2.5).abs() < 1e-9);

        let c = CMat::from_diagonal(&CVec::from_vec(vec![C64::from(3.0), C64::from(1.0)]));
        let s = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, vec![1.0, 1.0]).unwrap(), &opts).unwrap();
        assert!((s.primal - 4.0).abs() < 1e-6);
        assert!((&s.x - CMat::identity(2, 2)).norm() < 1e-6);
    }

    #[test]
    fn rejects_non_hermitian_cost() {
        let mut c = CMat::identity(2, 2);
        c[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(DiagSdpProblem::diagonal(&c, vec![1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(DiagSdpProblem::diagonal(&CMat::identity(2, 2), vec![1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn matches_mixing_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..3 {
            let c = random_hermitian(&mut rng, 6);
            let t = vec![1.0; 6];
            let s = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, t.clone()).unwrap(), &SdpOptions::default()).unwrap();
            let oracle = crate::verify::mixing_oracle(&c, &t, 50, &mut rng);
            assert!((s.primal - oracle).abs() <= 1e-5 * oracle.abs(), "{} vs {oracle}", s.primal);
            assert!(s.relative_gap() <= 1e-7);
            assert!(s.primal_residual <= 1e-8);
            let lam = hermitian_eigenvalues(&s.x).min();
            assert!(lam >= -1e-8 * s.x.norm());
        }
    }

    #[test]
    fn accuracy_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_hermitian(&mut rng, 5);
        let t = vec![1.0; 5];
        let unit = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, t.clone()).unwrap(), &SdpOptions::default()).unwrap();
        let tiny = &c * C64::from(1e-4);
        let small = solve_diag_sdp(&DiagSdpProblem::diagonal(&tiny, t).unwrap(), &SdpOptions::default()).unwrap();
        assert!((small.primal * 1e4 - unit.primal).abs() <= 1e-6 * unit.primal.abs());
    }

    #[test]
    fn trace_closed_form_examples() {
        let (_, v) = solve_trace_sdp_rank1(&CMat::identity(3, 3), 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let c = CMat::from_diagonal(&CVec::from_vec(vec![C64::from(5.0), C64::from(1.0)]));
        let (w, v) = solve_trace_sdp_rank1(&c, 1.0).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        assert!((w[0] - C64::from(1.0)).norm() < 1e-12 && w[1].norm() < 1e-12);
    }

    #[test]
    fn trace_mode_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let c = random_hermitian(&mut rng, 8);
            let (_, closed) = solve_trace_sdp_rank1(&c, 3.0).unwrap();
            let s = solve_diag_sdp(&DiagSdpProblem::trace(&c, 3.0).unwrap(), &SdpOptions::default()).unwrap();
            assert!((s.primal - closed).abs() <= 1e-6 * closed.abs());
        }
    }

    #[test]
    fn dominates_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = 5;
        let c = random_hermitian(&mut rng, d);
        let t: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
        let s = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, t.clone()).unwrap(), &SdpOptions::default()).unwrap();
        for _ in 0..100 {
            let r = rng.random_range(1..=d);
            let v = CMat::from_column_slice(d, r, complex_gaussian_vec(&mut rng, d * r).as_slice());
            let mut x = &v * v.adjoint();
            for i in 0..d {
                let f = (t[i] / x[(i, i)].re).sqrt();
                for j in 0..d {
                    x[(i, j)] *= f;
                    x[(j, i)] *= f;
                }
            }
            assert!(re_trace_product(&c, &x) <= s.primal + 1e-9 * s.primal.abs());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn solution_is_feasible_with_small_gap(seed in any::<u64>(), d in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_hermitian(&mut rng, d);
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..3.0)).collect();
            let s = solve_diag_sdp(&DiagSdpProblem::diagonal(&c, t.clone()).unwrap(), &SdpOptions::default()).unwrap();
            prop_assert!(s.gap >= -1e-9 * (1.0 + s.primal.abs()));
            prop_assert!(s.gap <= 1e-7 * (1.0 + s.primal.abs()));
            for i in 0..d {
                prop_assert!((s.x[(i, i)].re - t[i]).abs() <= 1e-8 * t[i].max(1.0));
            }
            prop_assert!(hermitian_eigenvalues(&s.x).min() >= -1e-8 * s.x.norm());
        }
    }
}
