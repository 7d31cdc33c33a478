//! Dense complex helpers shared by the solver and objective code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest `|M - M^H|` entry relative to the largest `|M|` entry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
}

/// Column-major vectorization, `vec(W)`.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

/// Rotates `v` so that its first entry with non-negligible modulus is real
/// and positive.
pub fn normalize_phase(v: &mut CVec) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-12 * peak.max(1e-300)) {
        let rot = z.conj() / z.norm();
        for e in v.iter_mut() {
            *e *= rot;
        }
    }
}

/// Largest eigenvalue of the Hermitian part of `m` with a unit eigenvector.
pub fn top_eigenpair(m: &CMat) -> (f64, CVec) {
    let n = m.nrows();
    assert!(n > 0, "top_eigenpair on an empty matrix");
    let eig = hermitian_part(m).symmetric_eigen();
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let mut v = eig.eigenvectors.column(idx).into_owned();
    let nv = v.norm();
    v.unscale_mut(nv);
    normalize_phase(&mut v);
    (val, v)
}

/// Eigenvalues of a Hermitian matrix (only the Hermitian part is used).
pub fn hermitian_eigenvalues(m: &CMat) -> DVector<f64> {
    hermitian_part(m).symmetric_eigenvalues()
}

/// Circularly-symmetric complex normal sample with `E|z|^2 = variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

/// Random vector with i.i.d. `CN(0, 1)` entries.
pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVec {
    CVec::from_fn(len, |_, _| complex_gaussian(rng, 1.0))
}

/// Re(tr(A B)) without forming the product.
pub fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            let x = a[(i, k)] * b[(k, i)];
            acc += x.re;
        }
    }
    acc
}

/// Re(x^H M x).
pub fn re_quadratic(m: &CMat, x: &CVec) -> f64 {
    x.dotc(&(m * x)).re
}

/// Largest step `a` such that `X + a dX` stays positive semidefinite, assuming
/// `X` is positive definite. Returns `f64::INFINITY` when every step is feasible.
pub fn max_psd_step(x: &CMat, dx: &CMat) -> f64 {
    let min_eig = match x.clone().cholesky() {
        Some(ch) => {
            let l = ch.l();
            let left = l
                .solve_lower_triangular(dx)
                .expect("cholesky factor is nonsingular");
            let m = l
                .solve_lower_triangular(&left.adjoint())
                .expect("cholesky factor is nonsingular");
            hermitian_eigenvalues(&m).min()
        }
        None => {
            // Fall back to the symmetric square-root whitening.
            let eig = hermitian_part(x).symmetric_eigen();
            let floor = eig.eigenvalues.max() * 1e-300;
            let inv_sqrt = DVector::from_iterator(
                eig.eigenvalues.len(),
                eig.eigenvalues.iter().map(|&l| C64::from(1.0 / l.max(floor).sqrt())),
            );
            let u = &eig.eigenvectors;
            let w = u * CMat::from_diagonal(&inv_sqrt) * u.adjoint();
            hermitian_eigenvalues(&(&w * dx * &w)).min()
        }
    };
    if min_eig >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min_eig
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vectorize_is_column_major() {
        let m = CMat::from_row_slice(2, 2, &[ONE, C64::new(2.0, 0.0), C64::new(3.0, 0.0), C64::new(4.0, 0.0)]);
        let v = vectorize(&m);
        assert_eq!(v[1], C64::new(3.0, 0.0));
        assert_eq!(unvectorize(&v, 2, 2), m);
    }

    #[test]
    fn top_eigenpair_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![C64::from(5.0), C64::from(1.0)]));
        let (val, v) = top_eigenpair(&m);
        assert!((val - 5.0).abs() < 1e-12);
        assert!((v[0] - ONE).norm() < 1e-12);
        assert!(v[1].norm() < 1e-12);
    }

    #[test]
    fn max_step_matches_scalar_case() {
        let x = CMat::identity(3, 3);
        let dx = CMat::from_diagonal(&CVec::from_vec(vec![C64::from(-2.0), C64::from(1.0), C64::from(0.5)]));
        assert!((max_psd_step(&x, &dx) - 0.5).abs() < 1e-12);
        assert!(max_psd_step(&x, &CMat::identity(3, 3)).is_infinite());
    }

    #[test]
    fn complex_gaussian_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let var: f64 = (0..n).map(|_| complex_gaussian(&mut rng, 2.5).norm_sqr()).sum::<f64>() / n as f64;
        assert!((var - 2.5).abs() < 0.05);
    }
}
