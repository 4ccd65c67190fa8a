//! Dense and Krylov linear-algebra kernels shared by the physics modules.
//!
//! Everything here is generic numerics: Hermitian eigendecomposition (sorted),
//! a Padé scaling-and-squaring matrix exponential, an Arnoldi-projected
//! exp(A)·v with an a-posteriori residual estimate, tridiagonal solves and
//! small fitting/quadrature helpers.

use nalgebra::{DMatrix, DVector};

use crate::{C64, CoreError};

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// Returns `(values, vectors)` with `vectors.column(k)` the eigenvector of
/// `values[k]`. The input is assumed Hermitian; only its Hermitian part is
/// meaningful to the underlying tridiagonalization.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>), CoreError> {
    assert_eq!(m.nrows(), m.ncols());
    let dim = m.nrows();
    if dim == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or(CoreError::EigenFailure)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

pub fn smallest_eigenvalue(m: &DMatrix<C64>) -> Result<f64, CoreError> {
    Ok(hermitian_eigen(m)?.0[0])
}

pub fn largest_eigenvalue(m: &DMatrix<C64>) -> Result<f64, CoreError> {
    let (vals, _) = hermitian_eigen(m)?;
    Ok(*vals.last().unwrap())
}

/// Matrix 1-norm (max column sum), the scaling estimate for the exponential.
fn one_norm(m: &DMatrix<C64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense matrix exponential by degree-13 Padé approximation with scaling and
/// squaring. Valid for any complex square matrix; exact identity for A = 0.
pub fn expm_dense(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert_eq!(a.nrows(), a.ncols());
    let dim = a.nrows();
    let id = DMatrix::<C64>::identity(dim, dim);
    let norm = one_norm(a);
    if norm == 0.0 {
        return id;
    }

    const THETA_13: f64 = 5.371920351148152;
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a.map(|v| v / C64::new(2f64.powi(s as i32), 0.0));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let c = |k: usize| C64::new(B[k], 0.0);

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let u_inner = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u = &a * (&a6 * u_inner + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1));
    let v_inner = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = &a6 * v_inner + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is singular; matrix norm out of range");

    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// exp(A)·v through an Arnoldi projection, expanding the Krylov space until
/// the standard residual estimate |β·h_{m+1,m}·[e^{H_m}]_{m,1}| drops below
/// `tol`. Returns an error when `max_dim` vectors are not enough.
pub fn krylov_expm_multiply<F>(
    apply: F,
    v: &DVector<C64>,
    tol: f64,
    max_dim: usize,
) -> Result<DVector<C64>, CoreError>
where
    F: Fn(&DVector<C64>) -> DVector<C64>,
{
    let n = v.len();
    let beta = v.norm();
    if beta == 0.0 {
        return Ok(v.clone());
    }
    let max_dim = max_dim.min(n);
    let mut basis: Vec<DVector<C64>> = vec![v / C64::new(beta, 0.0)];
    // Hessenberg entries h[(i, j)] for i ≤ j + 1
    let mut h = DMatrix::<C64>::zeros(max_dim + 1, max_dim);
    let mut best_residual = f64::INFINITY;

    for j in 0..max_dim {
        let mut w = apply(&basis[j]);
        // modified Gram-Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let coeff = q.dotc(&w);
                h[(i, j)] += coeff;
                w -= q * coeff;
            }
        }
        let hnext = w.norm();
        h[(j + 1, j)] = C64::new(hnext, 0.0);

        let m = j + 1;
        let hm = h.view((0, 0), (m, m)).into_owned();
        let em = expm_dense(&hm);
        let residual = beta * hnext * em[(m - 1, 0)].norm();
        best_residual = best_residual.min(residual);
        let happy = hnext < 1e-14 * beta.max(1.0);
        if residual < tol || happy || m == n {
            let mut out = DVector::from_element(n, C64::new(0.0, 0.0));
            for (i, q) in basis.iter().enumerate() {
                out += q * (em[(i, 0)] * C64::new(beta, 0.0));
            }
            return Ok(out);
        }
        basis.push(w / C64::new(hnext, 0.0));
    }
    Err(CoreError::NonConvergence {
        tol,
        max_iter: max_dim,
        residual: best_residual,
    })
}

/// Solve a tridiagonal system in place (Thomas algorithm).
/// `diag` has length n, `lower`/`upper` length n−1.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(n > 0 && lower.len() == n - 1 && upper.len() == n - 1 && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper.first().copied().unwrap_or(0.0) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Least-squares straight line through (x, y): returns (slope, intercept).
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Composite Simpson rule on a uniform grid; `values.len()` must be odd.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson needs an odd point count");
    let mut acc = values[0] + values[n - 1];
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Trapezoid rule on an arbitrary grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}
