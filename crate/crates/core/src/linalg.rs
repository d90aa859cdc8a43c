//! Small dense helpers shared by the operator and integrator modules.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().copied().fold(ZERO, |acc, z| acc + z)
}

/// Largest elementwise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |m - m†|` elementwise.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Largest eigenvalue modulus of a Hermitian matrix.
pub fn spectral_radius_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// The argument is scaled until its 1-norm is at most 1/2, where an 18-term
/// series is accurate far below double precision. Works for defective
/// matrices since no eigendecomposition is involved.
pub fn expm(a: &CMatrix) -> CMatrix {
    const TERMS: usize = 18;
    let n = a.nrows();
    let norm = one_norm(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.scale(scale);

    // Horner evaluation of sum_k x^k / k!.
    let mut acc = CMatrix::identity(n, n);
    for k in (1..=TERMS).rev() {
        acc = CMatrix::identity(n, n) + (&x * &acc).unscale(k as f64);
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Column-stacking vectorization.
pub fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(3, 3);
        assert!(max_abs(&(expm(&z) - CMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-i θ σ_x) = cos θ I - i sin θ σ_x
        let theta = 2.7;
        let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let u = expm(&(sx.clone() * (-I * theta)));
        let expect = CMatrix::identity(2, 2) * C64::from(libm::cos(theta)) - sx * (I * libm::sin(theta));
        assert!(max_abs(&(u - expect)) < 1e-13);
    }

    #[test]
    fn expm_of_nilpotent_jordan_block() {
        // Defective: exp([[0,1],[0,0]] t) = [[1,t],[0,1]]
        let t = 3.5;
        let j = CMatrix::from_row_slice(2, 2, &[ZERO, C64::from(t), ZERO, ZERO]);
        let e = expm(&j);
        let expect = CMatrix::from_row_slice(2, 2, &[ONE, C64::from(t), ZERO, ONE]);
        assert!(max_abs(&(e - expect)) < 1e-13);
    }

    #[test]
    fn expm_large_diagonal_decay() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(alloc::vec![C64::from(-40.0), C64::from(2.0)]));
        let e = expm(&d);
        assert!((e[(0, 0)].re - libm::exp(-40.0)).abs() < 1e-25);
        assert!((e[(1, 1)].re - libm::exp(2.0)).abs() < 1e-12);
    }

    #[test]
    fn vec_roundtrip_is_column_major() {
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64, j as f64));
        let v = vec_of(&m);
        assert_eq!(v[1], m[(1, 0)]);
        assert_eq!(unvec(&v, 3), m);
    }
}
