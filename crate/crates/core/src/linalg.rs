//! Small dense floating-point linear algebra used for preconditioners and
//! Newton steps. Nothing here is rigorous.

use alloc::vec;
use alloc::vec::Vec;

/// Inverse of a row-major `n x n` matrix by Gauss-Jordan with partial pivoting.
pub fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let w = 2 * n;
    let mut m = vec![0.0; n * w];
    for i in 0..n {
        m[i * w..i * w + n].copy_from_slice(&a[i * n..(i + 1) * n]);
        m[i * w + n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| m[p * w + col].abs().total_cmp(&m[q * w + col].abs()))?;
        let pv = m[pivot * w + col];
        if pv == 0.0 || !pv.is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..w {
                m.swap(pivot * w + k, col * w + k);
            }
        }
        for k in 0..w {
            m[col * w + k] /= pv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r * w + col];
            if factor != 0.0 {
                for k in 0..w {
                    m[r * w + k] -= factor * m[col * w + k];
                }
            }
        }
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n..(i + 1) * n].copy_from_slice(&m[i * w + n..(i + 1) * w]);
    }
    if out.iter().all(|v| v.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Solve `A x = b` (row-major `A`). Returns `None` if `A` is singular.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let inv = invert(a, n)?;
    Some((0..n).map(|i| (0..n).map(|k| inv[i * n + k] * b[k]).sum()).collect())
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eigen_min(a: &[f64], n: usize) -> f64 {
    sym_eigenvalues(a, n).into_iter().fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a symmetric matrix (unsorted).
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    // symmetrize the midpoint
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[i * n + j] + m[j * n + i]);
            m[i * n + j] = s;
            m[j * n + i] = s;
        }
    }
    for _sweep in 0..64 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i * n + j] * m[i * n + j]).sum();
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Row-major product of an `r x k` and a `k x c` matrix.
pub fn matmul(a: &[f64], b: &[f64], r: usize, k: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; r * c];
    for i in 0..r {
        for j in 0..c {
            out[i * c + j] = (0..k).map(|t| a[i * k + t] * b[t * c + j]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_2x2() {
        let inv = invert(&[4.0, 7.0, 2.0, 6.0], 2).unwrap();
        let expect = [0.6, -0.7, -0.2, 0.4];
        for (a, b) in inv.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(invert(&[1.0, 2.0, 2.0, 4.0], 2).is_none());
    }

    #[test]
    fn eigenvalues_of_symmetric() {
        let mut ev = sym_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!((sym_eigen_min(&[5.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 4.0], 3) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn solve_small_system() {
        let x = solve(&[2.0, 0.0, 0.0, 4.0], &[2.0, 2.0], 2).unwrap();
        assert_eq!(x, vec![1.0, 0.5]);
    }
}
