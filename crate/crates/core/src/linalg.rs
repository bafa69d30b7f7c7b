//! Dense complex linear algebra helpers.
//!
//! Hermitian eigensolves run on `faer` with sequential parallelism, so a
//! fixed input gives bitwise-identical output regardless of the caller's
//! thread pool.

use faer::{Mat, Side};
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = Array2<C64>;
pub type Vector = Array1<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Eigenvalues with |λ| at or below this (relative to the matrix scale) are
/// mapped to +1 by [`hermitian_sign`].
const SIGN_ZERO_TOL: f64 = 1e-13;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> Matrix {
    Array2::from_diag_elem(n, ONE)
}

pub fn dagger(a: &Matrix) -> Matrix {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), ZERO);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = s * b[[k, l]];
                }
            }
        }
    }
    out
}

pub fn trace(a: &Matrix) -> C64 {
    a.diag().iter().copied().sum()
}

/// Largest entrywise deviation `max |a_ij - b_ij|`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(a: &Matrix, tol: f64) -> bool {
    let (r, cdim) = a.dim();
    if r != cdim {
        return false;
    }
    (0..r).all(|i| (i..r).all(|j| (a[[i, j]] - a[[j, i]].conj()).norm() <= tol))
}

pub fn is_real(a: &Matrix) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

/// Complex matrix product. Large products are split into four real GEMMs,
/// which run through the optimized real kernel.
pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (m, k) = a.dim();
    let n = b.ncols();
    if m * k * n <= 1 << 18 {
        return a.dot(b);
    }
    let ar = a.mapv(|z| z.re);
    let ai = a.mapv(|z| z.im);
    let br = b.mapv(|z| z.re);
    let bi = b.mapv(|z| z.im);
    let rr = ar.dot(&br) - ai.dot(&bi);
    let ii = ar.dot(&bi) + ai.dot(&br);
    let mut out = Array2::from_elem((m, n), ZERO);
    ndarray::Zip::from(&mut out)
        .and(&rr)
        .and(&ii)
        .for_each(|o, &re, &im| *o = C64::new(re, im));
    out
}

/// Eigen-decomposition of a real symmetric matrix (lower triangle used).
/// Returns ascending eigenvalues and eigenvectors as columns.
pub fn eigh_real(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!(
            "{}x{} matrix is not square",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("symmetric eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let w = (0..n).map(|i| s[i]).collect();
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
    Ok((w, vecs))
}

/// Eigen-decomposition of a complex Hermitian matrix (lower triangle used).
pub fn eigh_complex(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Shape(format!(
            "{}x{} matrix is not square",
            n,
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::from_elem((0, 0), ZERO)));
    }
    let m = Mat::<C64>::from_fn(n, n, |i, j| a[[i, j]]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("Hermitian eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();
    let w = (0..n).map(|i| s[i].re).collect();
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| u[(i, j)]);
    Ok((w, vecs))
}

/// Hermitian eigensolve that takes the real path when the matrix has no
/// imaginary part.
pub fn eigh(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if is_real(a) {
        let (w, v) = eigh_real(&a.mapv(|z| z.re))?;
        Ok((w, v.mapv(|x| C64::new(x, 0.0))))
    } else {
        eigh_complex(a)
    }
}

pub fn eigvalsh(a: &Matrix) -> Result<Vec<f64>> {
    eigh(a).map(|(w, _)| w)
}

/// `sign(F)` for Hermitian `F`: eigenvalues mapped to ±1, zero eigenvalues to
/// +1. The flag is set when `F` vanishes entirely.
pub fn hermitian_sign(f: &Matrix) -> Result<(Matrix, bool)> {
    let n = f.nrows();
    let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((identity(n), true));
    }
    // Symmetrize away round-off before diagonalizing.
    let herm = (f + &dagger(f)).mapv(|z| z * 0.5);
    let (w, v) = eigh(&herm)?;
    let mut out = Array2::from_elem((n, n), ZERO);
    for (k, &lambda) in w.iter().enumerate() {
        let s = if lambda < -SIGN_ZERO_TOL * scale {
            -1.0
        } else {
            1.0
        };
        let col = v.column(k);
        for i in 0..n {
            let a = col[i] * s;
            for j in 0..n {
                out[[i, j]] += a * col[j].conj();
            }
        }
    }
    Ok((out, false))
}

/// Fix the global phase of a vector so that its first largest-magnitude
/// component is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        let n = z.norm();
        if n > best_norm * (1.0 + 1e-12) + 1e-300 {
            best = i;
            best_norm = n;
        }
    }
    if best_norm <= 0.0 {
        return;
    }
    let phase = v[best].conj() / best_norm;
    for z in v.iter_mut() {
        *z *= phase;
    }
}

pub fn pauli_x() -> Matrix {
    ndarray::arr2(&[[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> Matrix {
    ndarray::arr2(&[[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> Matrix {
    ndarray::arr2(&[[ONE, ZERO], [ZERO, -ONE]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_and_complex_paths_agree() {
        let h = kron(&pauli_x(), &pauli_x()) + kron(&pauli_y(), &pauli_y());
        let (w_real, _) = eigh(&h).unwrap();
        let (w_cplx, v) = eigh_complex(&h).unwrap();
        for (a, b) in w_real.iter().zip(&w_cplx) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((w_cplx[0] + 2.0).abs() < 1e-12);
        assert!((w_cplx[3] - 2.0).abs() < 1e-12);
        // columns are orthonormal
        let g = matmul(&dagger(&v), &v);
        assert!(max_abs_diff(&g, &identity(4)) < 1e-12);
    }

    #[test]
    fn eigenpairs_have_small_residual_at_moderate_size() {
        let n = 300;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            (((i * 7 + j * 13) % 17) + ((j * 7 + i * 13) % 17)) as f64 / 10.0
        });
        let (w, v) = eigh_real(&a).unwrap();
        for k in [0, n / 2, n - 1] {
            let col = v.column(k);
            let r = a.dot(&col) - &col.mapv(|x| x * w[k]);
            assert!(r.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-10);
        }
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn sign_of_definite_matrix_is_identity() {
        let f = identity(2).mapv(|z| z * 3.0) + pauli_x();
        let (s, zero) = hermitian_sign(&f).unwrap();
        assert!(!zero);
        assert!(max_abs_diff(&s, &identity(2)) < 1e-12);
    }

    #[test]
    fn sign_of_zero_flags() {
        let (s, zero) = hermitian_sign(&Array2::from_elem((2, 2), ZERO)).unwrap();
        assert!(zero);
        assert_eq!(s, identity(2));
    }

    #[test]
    fn sign_of_pauli_combination_is_bloch_observable() {
        let f = pauli_x().mapv(|z| z * 0.3) + pauli_z().mapv(|z| z * 0.4);
        let (s, _) = hermitian_sign(&f).unwrap();
        let expect = pauli_x().mapv(|z| z * 0.6) + pauli_z().mapv(|z| z * 0.8);
        assert!(max_abs_diff(&s, &expect) < 1e-12);
    }

    #[test]
    fn large_matmul_matches_small_path() {
        let n = 80;
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            c((i * 3 + j) as f64 % 7.0, (i + 2 * j) as f64 % 5.0)
        });
        let b = Array2::from_shape_fn((n, n), |(i, j)| {
            c((i + j) as f64 % 3.0, (i * j) as f64 % 4.0)
        });
        let fast = matmul(&a, &b);
        let slow = a.dot(&b);
        assert!(max_abs_diff(&fast, &slow) < 1e-9);
    }
}
