//! Dense linear algebra used by the solvers: Cholesky solves, a shifted
//! symmetric solver for regularization paths, and spectrum checks.

use std::os::raw::{c_char, c_int};

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{EigValsh, SolveC, UPLO};

use crate::error::{Error, Result};

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &Array2<f64>) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let w = a.eigvalsh(UPLO::Lower)?;
    Ok(w.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `‖a·x − b‖ / ‖b‖` (or `‖a·x‖` when `b = 0`).
pub fn relative_residual(a: &Array2<f64>, x: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let r = a.dot(x) - b;
    let rn = r.dot(&r).sqrt();
    let bn = b.dot(b).sqrt();
    if bn > 0.0 {
        rn / bn
    } else {
        rn
    }
}

/// Solves `a·x = b` for symmetric positive definite `a` by Cholesky
/// factorization and rejects solutions whose relative residual exceeds
/// `max_residual`.
pub fn cholesky_solve(a: &Array2<f64>, b: &Array1<f64>, max_residual: f64) -> Result<Array1<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let x = a.solvec(b).map_err(|e| Error::Linalg(e.to_string()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cholesky solve"));
    }
    let res = relative_residual(a, &x, b);
    if !(res <= max_residual) {
        return Err(Error::IllConditioned(res));
    }
    Ok(x)
}

fn check_info(routine: &str, info: c_int) -> Result<()> {
    if info != 0 {
        return Err(Error::Linalg(format!("{routine} returned info = {info}")));
    }
    Ok(())
}

/// Householder tridiagonalization `A = Q·T·Qᵀ` of a symmetric matrix,
/// reused to solve `(A + σI)·x = b` for many shifts `σ` at `O(n²)` each.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    n: usize,
    /// Householder reflectors in LAPACK layout (lower triangle).
    reflectors: Vec<f64>,
    tau: Vec<f64>,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl ShiftedSolver {
    pub fn new(a: &Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("shifted solver input"));
        }
        // Symmetric input: the row-major buffer read as column-major is the same matrix.
        let mut reflectors: Vec<f64> = a.iter().copied().collect();
        let mut diag = vec![0.0; n];
        let mut offdiag = vec![0.0; n.max(2) - 1];
        let mut tau = vec![0.0; n.max(2) - 1];
        let nn = n as c_int;
        let mut info: c_int = 0;
        let mut query = [0.0f64];
        let lwork_query: c_int = -1;
        let uplo = b'L' as c_char;
        unsafe {
            lapack_sys::dsytrd_(
                &uplo,
                &nn,
                reflectors.as_mut_ptr(),
                &nn,
                diag.as_mut_ptr(),
                offdiag.as_mut_ptr(),
                tau.as_mut_ptr(),
                query.as_mut_ptr(),
                &lwork_query,
                &mut info,
            );
        }
        check_info("dsytrd (workspace query)", info)?;
        let lwork = (query[0] as c_int).max(1);
        let mut work = vec![0.0; lwork as usize];
        unsafe {
            lapack_sys::dsytrd_(
                &uplo,
                &nn,
                reflectors.as_mut_ptr(),
                &nn,
                diag.as_mut_ptr(),
                offdiag.as_mut_ptr(),
                tau.as_mut_ptr(),
                work.as_mut_ptr(),
                &lwork,
                &mut info,
            );
        }
        check_info("dsytrd", info)?;
        offdiag.truncate(n - 1);
        tau.truncate(n - 1);
        Ok(ShiftedSolver {
            n,
            reflectors,
            tau,
            diag,
            offdiag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Applies `Q` (`transpose = false`) or `Qᵀ` to a vector.
    fn apply_q(&self, v: &mut [f64], transpose: bool) -> Result<()> {
        if self.n == 1 {
            return Ok(());
        }
        let side = b'L' as c_char;
        let uplo = b'L' as c_char;
        let trans = if transpose { b'T' } else { b'N' } as c_char;
        let m = self.n as c_int;
        let ncols: c_int = 1;
        let mut info: c_int = 0;
        let lwork: c_int = 64;
        let mut work = vec![0.0; lwork as usize];
        unsafe {
            lapack_sys::dormtr_(
                &side,
                &uplo,
                &trans,
                &m,
                &ncols,
                self.reflectors.as_ptr(),
                &m,
                self.tau.as_ptr(),
                v.as_mut_ptr(),
                &m,
                work.as_mut_ptr(),
                &lwork,
                &mut info,
            );
        }
        check_info("dormtr", info)
    }

    /// `Qᵀ·b`, to be passed to [`ShiftedSolver::solve_rotated`] for every shift.
    pub fn rotate(&self, b: ArrayView1<f64>) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut v: Vec<f64> = b.iter().copied().collect();
        self.apply_q(&mut v, true)?;
        Ok(v)
    }

    /// Solves `(A + shift·I)·x = b` given `rotated = Qᵀ·b`.
    pub fn solve_rotated(&self, shift: f64, rotated: &[f64]) -> Result<Array1<f64>> {
        let n = self.n as c_int;
        let nrhs: c_int = 1;
        let mut lower = self.offdiag.clone();
        let mut upper = self.offdiag.clone();
        let mut diag: Vec<f64> = self.diag.iter().map(|d| d + shift).collect();
        let mut x = rotated.to_vec();
        let mut info: c_int = 0;
        if lower.is_empty() {
            lower.push(0.0);
            upper.push(0.0);
        }
        unsafe {
            lapack_sys::dgtsv_(
                &n,
                &nrhs,
                lower.as_mut_ptr(),
                diag.as_mut_ptr(),
                upper.as_mut_ptr(),
                x.as_mut_ptr(),
                &n,
                &mut info,
            );
        }
        if info > 0 {
            return Err(Error::IllConditioned(f64::INFINITY));
        }
        check_info("dgtsv", info)?;
        self.apply_q(&mut x, false)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("shifted solve"));
        }
        Ok(Array1::from(x))
    }

    pub fn solve(&self, shift: f64, b: ArrayView1<f64>) -> Result<Array1<f64>> {
        let rotated = self.rotate(b)?;
        self.solve_rotated(shift, &rotated)
    }
}
