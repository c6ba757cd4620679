//! Thin LAPACK wrappers for the dense eigenproblems used throughout the crate.
//!
//! Symmetric problems go through `dsyevd` (divide and conquer), which is much
//! faster than the QR path for the 2000-4000 sized matrices the random-matrix
//! experiments use. General matrices go through `dgeev`.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn eigvalsh(a: &Array2<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::DimensionMismatch(format!(
            "eigvalsh needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Array1::zeros(0));
    }
    // LAPACK is column-major; a symmetric matrix is layout-agnostic.
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let mut work = vec![0.0f64; 1];
    let mut iwork = vec![0i32; 1];
    unsafe {
        lapack::dsyevd(
            b'N', b'L', n as i32, &mut buf, n as i32, &mut w, &mut work, -1, &mut iwork, -1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::EigFailure { routine: "dsyevd", info });
    }
    let lwork = work[0] as i32;
    let liwork = iwork[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack::dsyevd(
            b'N', b'L', n as i32, &mut buf, n as i32, &mut w, &mut work, lwork, &mut iwork,
            liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::EigFailure { routine: "dsyevd", info });
    }
    Ok(Array1::from_vec(w))
}

/// Eigenvalues (ascending) and matching eigenvectors (as columns) of a real
/// symmetric matrix.
pub fn eigh(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::DimensionMismatch(format!(
            "eigh needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut buf: Vec<f64> = a.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;
    let mut work = vec![0.0f64; 1];
    let mut iwork = vec![0i32; 1];
    unsafe {
        lapack::dsyevd(
            b'V', b'L', n as i32, &mut buf, n as i32, &mut w, &mut work, -1, &mut iwork, -1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::EigFailure { routine: "dsyevd", info });
    }
    let lwork = work[0] as i32;
    let liwork = iwork[0];
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack::dsyevd(
            b'V', b'L', n as i32, &mut buf, n as i32, &mut w, &mut work, lwork, &mut iwork,
            liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::EigFailure { routine: "dsyevd", info });
    }
    // buf holds eigenvectors column-major; with the row-major input copy the
    // matrix LAPACK saw was a^T = a, so columns of the result are the
    // eigenvectors. Transpose the buffer into an ndarray with vectors as
    // columns.
    let mut vecs = Array2::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            vecs[(i, j)] = buf[j * n + i];
        }
    }
    Ok((Array1::from_vec(w), vecs))
}

/// Eigenvalues of a real general (nonsymmetric) matrix.
pub fn eigvals(a: &Array2<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(CoreError::DimensionMismatch(format!(
            "eigvals needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // Column-major copy (dgeev is layout-sensitive).
    let mut buf = vec![0.0f64; n * n];
    for j in 0..n {
        for i in 0..n {
            buf[j * n + i] = a[(i, j)];
        }
    }
    let mut wr = vec![0.0f64; n];
    let mut wi = vec![0.0f64; n];
    let mut vl = vec![0.0f64; 1];
    let mut vr = vec![0.0f64; 1];
    let mut info = 0i32;
    let mut work = vec![0.0f64; 1];
    unsafe {
        lapack::dgeev(
            b'N', b'N', n as i32, &mut buf, n as i32, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1,
            &mut work, -1, &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::EigFailure { routine: "dgeev", info });
    }
    let lwork = work[0] as i32;
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        lapack::dgeev(
            b'N', b'N', n as i32, &mut buf, n as i32, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1,
            &mut work, lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(CoreError::EigFailure { routine: "dgeev", info });
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}
