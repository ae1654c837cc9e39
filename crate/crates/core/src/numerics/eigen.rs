//! Small dense eigenvalue routines.
//!
//! Symmetric problems go through a cyclic Jacobi sweep; companion-matrix
//! (upper Hessenberg) spectra go through a complex single-shift QR iteration
//! with Wilkinson shifts. Everything here targets desk-scale matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

const SYMMETRY_TOL: f64 = 1e-12;
const MAX_JACOBI_SWEEPS: usize = 64;

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.frobenius_norm().max(1.0);
    if m.max_asymmetry() > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { tol: SYMMETRY_TOL });
    }
    let n = m.rows();
    let mut a = m.clone();
    // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * scale {
            let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
            eigs.sort_by(|x, y| x.total_cmp(y));
            return Ok(eigs);
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::EPSILON * scale * 1e-3 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn symmetric_max_eigenvalue(m: &Matrix) -> Result<f64> {
    let eigs = symmetric_eigenvalues(m)?;
    Ok(*eigs.last().expect("square matrix has at least one eigenvalue"))
}

/// Largest singular value, computed as `sqrt(lambda_max(A^T A))` (or of
/// `A A^T`, whichever Gram matrix is smaller).
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let gram = if a.rows() < a.cols() {
        a.transpose().gram()
    } else {
        a.gram()
    };
    let lmax = symmetric_max_eigenvalue(&gram)?;
    Ok(lmax.max(0.0).sqrt())
}

/// Companion matrix of `z^K - c[0] z^(K-1) - ... - c[K-1]`: coefficient row
/// on top, identity on the subdiagonal. This is the state matrix of the
/// multi-step recursion `x_{t+1} = c[0] x_t + ... + c[K-1] x_{t-K+1}`.
pub fn companion_matrix(coeffs: &[f64]) -> Result<Matrix> {
    if coeffs.is_empty() {
        return Err(Error::Empty("companion coefficients"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("companion coefficients"));
    }
    let k = coeffs.len();
    let mut m = Matrix::zeros(k, k);
    for (j, &c) in coeffs.iter().enumerate() {
        m[(0, j)] = c;
    }
    for i in 1..k {
        m[(i, i - 1)] = 1.0;
    }
    Ok(m)
}

/// Maximum root modulus of `z^K - c[0] z^(K-1) - ... - c[K-1]`, i.e. the
/// spectral radius of the explicit companion matrix.
pub fn companion_spectral_radius(coeffs: &[f64]) -> Result<f64> {
    let m = companion_matrix(coeffs)?;
    let eigs = hessenberg_eigenvalues(&m)?;
    Ok(eigs.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Eigenvalues of an upper Hessenberg matrix via complex single-shift QR
/// with Wilkinson shifts and bottom-up deflation.
pub fn hessenberg_eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut h = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            if i > j + 1 && m[(i, j)] != 0.0 {
                return Err(Error::invalid(
                    "hessenberg_eigenvalues requires an upper Hessenberg matrix",
                ));
            }
            h[i][j] = Complex64::new(m[(i, j)], 0.0);
        }
    }
    let scale = m.frobenius_norm().max(1.0);
    let tol = f64::EPSILON * scale;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is h[lo..hi][lo..hi]
    let mut iters_since_deflation = 0usize;
    let mut total_iters = 0usize;
    let max_iters = 200 * n.max(1);

    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0][0]);
            break;
        }
        // Deflate converged trailing eigenvalues.
        if subdiag_negligible(&h, hi - 1, tol) {
            eigs.push(h[hi - 1][hi - 1]);
            hi -= 1;
            iters_since_deflation = 0;
            continue;
        }
        if hi >= 2 && (hi == 2 || subdiag_negligible(&h, hi - 2, tol)) {
            // Trailing 2x2 block is isolated: close its eigenvalues directly.
            let (l1, l2) = eig2(h[hi - 2][hi - 2], h[hi - 2][hi - 1], h[hi - 1][hi - 2], h[hi - 1][hi - 1]);
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            iters_since_deflation = 0;
            continue;
        }
        // Restrict to the unreduced block ending at hi.
        let mut lo = hi - 1;
        while lo > 0 && !subdiag_negligible(&h, lo, tol) {
            lo -= 1;
        }

        total_iters += 1;
        if total_iters > max_iters {
            return Err(Error::NoConvergence);
        }
        let shift = if iters_since_deflation > 0 && iters_since_deflation % 12 == 0 {
            // Exceptional shift to break symmetric stall patterns.
            let a = h[hi - 1][hi - 2].norm() + if hi >= 3 { h[hi - 2][hi - 3].norm() } else { 0.0 };
            Complex64::new(a, 0.0) + h[hi - 1][hi - 1]
        } else {
            wilkinson_shift(
                h[hi - 2][hi - 2],
                h[hi - 2][hi - 1],
                h[hi - 1][hi - 2],
                h[hi - 1][hi - 1],
            )
        };
        iters_since_deflation += 1;
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(eigs)
}

fn subdiag_negligible(h: &[Vec<Complex64>], i: usize, tol: f64) -> bool {
    h[i][i - 1].norm() <= tol.max(f64::EPSILON * (h[i][i].norm() + h[i - 1][i - 1].norm()))
}

/// Eigenvalues of a complex 2x2 block.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det * 4.0).sqrt();
    ((tr + disc) * 0.5, (tr - disc) * 0.5)
}

/// Eigenvalue of the trailing 2x2 closest to the bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (l1, l2) = eig2(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One shifted QR step `H <- R Q + sigma I` on the active block `[lo, hi)`,
/// using Givens rotations along the subdiagonal.
fn qr_step(h: &mut [Vec<Complex64>], lo: usize, hi: usize, shift: Complex64) {
    let n = hi - lo;
    if n < 2 {
        return;
    }
    for i in lo..hi {
        h[i][i] -= shift;
    }
    // Left-apply rotations to annihilate the subdiagonal: R = G_{k} ... G_1 H.
    let mut rotations = Vec::with_capacity(n - 1);
    for i in lo..(hi - 1) {
        let a = h[i][i];
        let b = h[i + 1][i];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (a / r, b / r)
        };
        // Rows i, i+1: [c~, s~; -s, c] is unitary and maps (a, b) to (r, 0).
        for j in i..hi {
            let x = h[i][j];
            let y = h[i + 1][j];
            h[i][j] = c.conj() * x + s.conj() * y;
            h[i + 1][j] = -s * x + c * y;
        }
        rotations.push((i, c, s));
    }
    // Right-apply the adjoints: H' = R G_1^H ... G_k^H. Only rows up to
    // i+1 can hold nonzeros in columns i, i+1 of the triangular factor.
    for &(i, c, s) in &rotations {
        for row in h.iter_mut().take((i + 2).min(hi)).skip(lo) {
            let x = row[i];
            let y = row[i + 1];
            row[i] = x * c + y * s;
            row[i + 1] = -x * s.conj() + y * c.conj();
        }
    }
    for i in lo..hi {
        h[i][i] += shift;
    }
}
