//! Dense linear-algebra helpers shared by the solvers.
//!
//! Hermitian eigenproblems go straight to LAPACK's divide-and-conquer drivers
//! (`zheevd`/`dsyevd`); they are several times faster than the QR-based
//! drivers for the matrix sizes used in sweeps (N up to ~1100).

use std::os::raw::{c_char, c_int};

use ndarray::{s, Array1, Array2, ArrayView2, ShapeBuilder};
use ndarray_linalg::{Eig, Inverse};
use num_complex::Complex64;

use crate::error::{ArcError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Conjugate transpose.
pub fn dagger(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Replace `a` by `(a + a†)/2`.
pub fn hermitize(a: &mut Array2<C64>) {
    let n = a.nrows();
    for i in 0..n {
        a[[i, i]].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]].conj());
            a[[i, j]] = avg;
            a[[j, i]] = avg.conj();
        }
    }
}

/// Largest entry of `|a − a†|`.
pub fn hermiticity_error(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Matrix 1-norm (max column sum).
pub fn norm_one(a: &Array2<C64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn diag_matrix(d: &Array1<f64>) -> Array2<C64> {
    let n = d.len();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        out[[i, i]] = C64::new(d[i], 0.0);
    }
    out
}

/// Returns the real part when every imaginary part is exactly zero.
pub fn real_if_real(a: &Array2<C64>) -> Option<Array2<f64>> {
    if a.iter().all(|z| z.im == 0.0) {
        Some(a.mapv(|z| z.re))
    } else {
        None
    }
}

/// Eigendecomposition of a Hermitian matrix, ascending eigenvalues.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    heevd(a, true).map(|(w, v)| (w, v.expect("vectors requested")))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(a: &Array2<C64>) -> Result<Array1<f64>> {
    heevd(a, false).map(|(w, _)| w)
}

fn heevd(a: &Array2<C64>, vectors: bool) -> Result<(Array1<f64>, Option<Array2<C64>>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(ArcError::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if n == 0 {
        return Ok((Array1::zeros(0), vectors.then(|| Array2::zeros((0, 0)))));
    }
    let mut work_mat = Array2::<C64>::zeros((n, n).f());
    work_mat.assign(a);
    let nn = n as c_int;
    let jobz = if vectors { b'V' } else { b'N' } as c_char;
    let uplo = b'L' as c_char;
    let mut w = vec![0.0; n];
    let mut info: c_int = 0;
    let query: c_int = -1;
    let mut wq = [ZERO];
    let mut rq = [0.0];
    let mut iq = [0 as c_int];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &nn,
            work_mat.as_mut_ptr() as *mut _,
            &nn,
            w.as_mut_ptr(),
            wq.as_mut_ptr() as *mut _,
            &query,
            rq.as_mut_ptr(),
            &query,
            iq.as_mut_ptr(),
            &query,
            &mut info,
        );
    }
    if info != 0 {
        return Err(ArcError::Linalg(format!("zheevd workspace query failed ({info})")));
    }
    let lwork = wq[0].re.max(1.0) as c_int;
    let lrwork = rq[0].max(1.0) as c_int;
    let liwork = iq[0].max(1);
    let mut work = vec![ZERO; lwork as usize];
    let mut rwork = vec![0.0; lrwork as usize];
    let mut iwork = vec![0 as c_int; liwork as usize];
    unsafe {
        lapack_sys::zheevd_(
            &jobz,
            &uplo,
            &nn,
            work_mat.as_mut_ptr() as *mut _,
            &nn,
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
        return Err(ArcError::Linalg(format!("zheevd failed ({info})")));
    }
    Ok((Array1::from(w), vectors.then_some(work_mat)))
}

/// Eigendecomposition of a real symmetric matrix, ascending eigenvalues.
pub fn eigh_real(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(ArcError::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    let mut work_mat = Array2::<f64>::zeros((n, n).f());
    work_mat.assign(a);
    let nn = n as c_int;
    let jobz = b'V' as c_char;
    let uplo = b'L' as c_char;
    let mut w = vec![0.0; n];
    let mut info: c_int = 0;
    let query: c_int = -1;
    let mut wq = [0.0];
    let mut iq = [0 as c_int];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz,
            &uplo,
            &nn,
            work_mat.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            wq.as_mut_ptr(),
            &query,
            iq.as_mut_ptr(),
            &query,
            &mut info,
        );
    }
    if info != 0 {
        return Err(ArcError::Linalg(format!("dsyevd workspace query failed ({info})")));
    }
    let lwork = wq[0].max(1.0) as c_int;
    let liwork = iq[0].max(1);
    let mut work = vec![0.0; lwork as usize];
    let mut iwork = vec![0 as c_int; liwork as usize];
    unsafe {
        lapack_sys::dsyevd_(
            &jobz,
            &uplo,
            &nn,
            work_mat.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(ArcError::Linalg(format!("dsyevd failed ({info})")));
    }
    Ok((Array1::from(w), work_mat))
}

/// Right eigendecomposition `a = V Λ V⁻¹` of a general complex matrix,
/// together with `V⁻¹` and a 1-norm condition estimate of `V`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Array1<C64>,
    pub vectors: Array2<C64>,
    pub inverse: Array2<C64>,
    pub condition: f64,
}

impl Eigen {
    pub fn new(a: &Array2<C64>) -> Result<Self> {
        let (values, vectors) = a.eig()?;
        let inverse = match vectors.inv() {
            Ok(inv) => inv,
            Err(_) => {
                return Ok(Eigen {
                    values,
                    inverse: Array2::zeros(vectors.raw_dim()),
                    vectors,
                    condition: f64::INFINITY,
                })
            }
        };
        let condition = norm_one(&vectors) * norm_one(&inverse);
        Ok(Eigen { values, vectors, inverse, condition })
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// `a[rows, :]` for an arbitrary list of row indices.
pub fn select_rows(a: &Array2<C64>, rows: &[usize]) -> Array2<C64> {
    let mut out = Array2::zeros((rows.len(), a.ncols()));
    for (r, &i) in rows.iter().enumerate() {
        out.row_mut(r).assign(&a.row(i));
    }
    out
}

/// Contiguous diagonal block `a[lo..hi, lo..hi]`.
pub fn block(a: &Array2<C64>, lo: usize, hi: usize) -> Array2<C64> {
    a.slice(s![lo..hi, lo..hi]).to_owned()
}
