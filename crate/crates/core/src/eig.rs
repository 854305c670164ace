//! Dense nonsymmetric eigenvalue utilities.
//!
//! Eigenvalues come from nalgebra's real Schur decomposition applied to a
//! diagonally balanced copy of the matrix. Eigenvectors are recovered by
//! complex inverse iteration. [`ResolventSolver`] reduces a realization to
//! Hessenberg form once so that `C (sI - A)^{-1} B` costs `O(n^2)` per point.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

const RADIX: f64 = 2.0;

/// Diagonal similarity `D^{-1} A D` chosen so that row and column norms match.
#[derive(Debug, Clone)]
pub struct Balanced {
    pub matrix: DMatrix<f64>,
    /// Diagonal of `D`; powers of two, so scaling is exact.
    pub scale: Vec<f64>,
}

pub fn balance(a: &DMatrix<f64>) -> Balanced {
    let n = a.nrows();
    let mut m = a.clone();
    let mut scale = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                let inv = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= inv;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
    Balanced { matrix: m, scale }
}

/// All eigenvalues of a square real matrix, unordered.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            what: "square matrix columns",
            expected: n,
            found: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let balanced = balance(a).matrix;
    let schur = Schur::try_new(balanced, f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::EigenNonConvergence { dim: n })?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Unit-norm eigenvector for a known eigenvalue by complex inverse iteration.
pub fn eigenvector(a: &DMatrix<f64>, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let bal = balance(a);
    let norm = bal.matrix.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let shift = lambda + Complex64::new(norm * 1e-13, norm * 1e-13);
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        let v = Complex64::new(bal.matrix[(i, j)], 0.0);
        if i == j {
            v - shift
        } else {
            v
        }
    });
    let lu = shifted.lu();
    // deterministic start vector with no special structure
    let mut x = nalgebra::DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * ((i * 7919) % 97) as f64, 0.0));
    for _ in 0..3 {
        if !lu.solve_mut(&mut x) {
            return Err(Error::SingularResolvent {
                re: lambda.re,
                im: lambda.im,
            });
        }
        let nrm = x.norm();
        x /= Complex64::new(nrm, 0.0);
    }
    let mut v: Vec<Complex64> = x.iter().zip(&bal.scale).map(|(z, d)| z * d).collect();
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= nrm;
    }
    Ok(v)
}

/// Precomputed Hessenberg form of a realization `(A, B, C)` for repeated
/// evaluation of `C (sI - A)^{-1} B`.
#[derive(Debug, Clone)]
pub struct ResolventSolver {
    h: DMatrix<f64>,
    qt_b: DMatrix<f64>,
    c_q: DMatrix<f64>,
}

impl ResolventSolver {
    pub fn new(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Self {
        let bal = balance(a);
        let n = a.nrows();
        let b_bal = DMatrix::from_fn(n, b.ncols(), |i, j| b[(i, j)] / bal.scale[i]);
        let c_bal = DMatrix::from_fn(c.nrows(), n, |i, j| c[(i, j)] * bal.scale[j]);
        let (q, h) = nalgebra::linalg::Hessenberg::new(bal.matrix).unpack();
        Self {
            qt_b: q.transpose() * b_bal,
            c_q: c_bal * q,
            h,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// Transfer matrix at `s`, row-major `outputs x inputs`.
    pub fn eval(&self, s: Complex64) -> Result<DMatrix<Complex64>> {
        let n = self.h.nrows();
        let m = self.qt_b.ncols();
        // (sI - H) is upper Hessenberg; eliminate the subdiagonal with partial pivoting.
        let mut w = DMatrix::from_fn(n, n, |i, j| {
            let v = Complex64::new(-self.h[(i, j)], 0.0);
            if i == j {
                v + s
            } else {
                v
            }
        });
        let mut rhs = self.qt_b.map(|x| Complex64::new(x, 0.0));
        let scale = self.h.iter().fold(s.norm(), |acc, x| acc.max(x.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n.saturating_sub(1) {
            if w[(k + 1, k)].norm() > w[(k, k)].norm() {
                w.swap_rows(k, k + 1);
                rhs.swap_rows(k, k + 1);
            }
            let piv = w[(k, k)];
            if piv.norm() <= f64::EPSILON * scale * 1e-3 {
                return Err(Error::SingularResolvent { re: s.re, im: s.im });
            }
            let f = w[(k + 1, k)] / piv;
            if f != Complex64::new(0.0, 0.0) {
                for j in k..n {
                    let t = w[(k, j)];
                    w[(k + 1, j)] -= f * t;
                }
                for j in 0..m {
                    let t = rhs[(k, j)];
                    rhs[(k + 1, j)] -= f * t;
                }
            }
        }
        for col in 0..m {
            for i in (0..n).rev() {
                let mut acc = rhs[(i, col)];
                for j in i + 1..n {
                    acc -= w[(i, j)] * rhs[(j, col)];
                }
                let piv = w[(i, i)];
                if piv.norm() <= f64::EPSILON * scale * 1e-3 {
                    return Err(Error::SingularResolvent { re: s.re, im: s.im });
                }
                rhs[(i, col)] = acc / piv;
            }
        }
        let cq = self.c_q.map(|x| Complex64::new(x, 0.0));
        Ok(cq * rhs)
    }
}
