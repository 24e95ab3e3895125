//! Thin wrappers around the LAPACK drivers used by the crate.
//!
//! Dense Hermitian problems go through the divide-and-conquer drivers
//! (`dsyevd`/`zheevd`), which are an order of magnitude faster than the
//! QR-iteration ones for the sector sizes we care about. Matrices are
//! nalgebra's column-major `DMatrix`, so no transposition is needed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::os::raw::{c_char, c_int};
use thiserror::Error;

// Pulls in the system OpenBLAS link directives.
extern crate openblas_src as _;

pub type C64 = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix dimension {0} does not fit a LAPACK integer")]
    TooLarge(usize),
    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

fn check_square<T>(a: &DMatrix<T>) -> Result<c_int, LinalgError> {
    if a.nrows() != a.ncols() {
        return Err(LinalgError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    c_int::try_from(a.nrows()).map_err(|_| LinalgError::TooLarge(a.nrows()))
}

fn workspace_len(query: f64) -> c_int {
    query.ceil().max(1.0) as c_int
}

/// Eigen-decomposition of a real symmetric matrix. Only the lower
/// triangle is read. The matrix is consumed and overwritten by the
/// eigenvectors (one per column); eigenvalues are ascending.
pub fn eigh_real(mut a: DMatrix<f64>, vectors: bool) -> Result<(DVector<f64>, DMatrix<f64>), LinalgError> {
    let n = check_square(&a)?;
    let mut w = DVector::zeros(a.nrows());
    if n == 0 {
        return Ok((w, a));
    }
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;
    let mut info: c_int = 0;

    let mut work_query = [0.0f64];
    let mut iwork_query = [0 as c_int];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz,
            &uplo,
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &-1,
            iwork_query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dsyevd", info });
    }
    let lwork = workspace_len(work_query[0]);
    let liwork = iwork_query[0].max(1);
    let mut work = vec![0.0f64; lwork as usize];
    let mut iwork = vec![0 as c_int; liwork as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz,
            &uplo,
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dsyevd", info });
    }
    Ok((w, a))
}

/// Complex Hermitian counterpart of [`eigh_real`].
pub fn eigh_complex(mut a: DMatrix<C64>, vectors: bool) -> Result<(DVector<f64>, DMatrix<C64>), LinalgError> {
    let n = check_square(&a)?;
    let mut w = DVector::zeros(a.nrows());
    if n == 0 {
        return Ok((w, a));
    }
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;
    let mut info: c_int = 0;

    let mut work_query = [C64::new(0.0, 0.0)];
    let mut rwork_query = [0.0f64];
    let mut iwork_query = [0 as c_int];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &n,
            a.as_mut_ptr() as *mut _,
            &n,
            w.as_mut_ptr(),
            work_query.as_mut_ptr() as *mut _,
            &-1,
            rwork_query.as_mut_ptr(),
            &-1,
            iwork_query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zheevd", info });
    }
    let lwork = workspace_len(work_query[0].re);
    let lrwork = workspace_len(rwork_query[0]);
    let liwork = iwork_query[0].max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0f64; lrwork as usize];
    let mut iwork = vec![0 as c_int; liwork as usize];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &n,
            a.as_mut_ptr() as *mut _,
            &n,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "zheevd", info });
    }
    Ok((w, a))
}

/// Eigenvalues of a general real matrix (`dgeev`, no eigenvectors).
pub fn eigvals_general(mut a: DMatrix<f64>) -> Result<Vec<C64>, LinalgError> {
    let n = check_square(&a)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let nu = a.nrows();
    let no = b'N' as c_char;
    let mut wr = vec![0.0f64; nu];
    let mut wi = vec![0.0f64; nu];
    let mut dummy = [0.0f64];
    let one: c_int = 1;
    let mut info: c_int = 0;
    let mut work_query = [0.0f64];
    unsafe {
        lapack_sys::dgeev_(
            &no,
            &no,
            &n,
            a.as_mut_ptr(),
            &n,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            dummy.as_mut_ptr(),
            &one,
            dummy.as_mut_ptr(),
            &one,
            work_query.as_mut_ptr(),
            &-1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dgeev", info });
    }
    let lwork = workspace_len(work_query[0]);
    let mut work = vec![0.0f64; lwork as usize];
    unsafe {
        lapack_sys::dgeev_(
            &no,
            &no,
            &n,
            a.as_mut_ptr(),
            &n,
            wr.as_mut_ptr(),
            wi.as_mut_ptr(),
            dummy.as_mut_ptr(),
            &one,
            dummy.as_mut_ptr(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(LinalgError::Lapack { routine: "dgeev", info });
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| C64::new(re, im)).collect())
}
