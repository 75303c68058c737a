//! Cyclic Jacobi eigensolver on flat row-major buffers, and the Gaussian
//! 2-Wasserstein distance computed through it alone.

/// Eigendecomposition of a symmetric `d x d` matrix by cyclic Jacobi
/// rotations. Returns `(eigenvalues, v)` with `v` row-major and the
/// eigenvector of `eigenvalues[k]` in column `k`.
pub fn jacobi_eigen(matrix: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(matrix.len(), d * d, "matrix buffer does not match d");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        if off.sqrt() <= 1e-15 * norm.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J with J the rotation in the (p, q) plane.
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    (eigenvalues, v)
}

fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Symmetric square root via the Jacobi solver; negative eigenvalues from
/// rounding are clamped to zero.
pub fn sqrt_spd(matrix: &[f64], d: usize) -> Vec<f64> {
    let (eig, v) = jacobi_eigen(matrix, d);
    let roots: Vec<f64> = eig.iter().map(|&l| l.max(0.0).sqrt()).collect();
    // V diag(roots) V^T
    let mut scaled = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            scaled[i * d + k] = v[i * d + k] * roots[k];
        }
    }
    let mut vt = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            vt[i * d + j] = v[j * d + i];
        }
    }
    mat_mul(&scaled, &vt, d)
}

/// W2 between centered Gaussians with covariances `a` and `b`:
/// sqrt(tr a + tr b - 2 tr((a^1/2 b a^1/2)^1/2)).
pub fn bures_w2(a: &[f64], b: &[f64], d: usize) -> f64 {
    let ra = sqrt_spd(a, d);
    let inner = mat_mul(&mat_mul(&ra, b, d), &ra, d);
    let root = sqrt_spd(&inner, d);
    let cross: f64 = (0..d).map(|i| root[i * d + i]).sum();
    let tra: f64 = (0..d).map(|i| a[i * d + i]).sum();
    let trb: f64 = (0..d).map(|i| b[i * d + i]).sum();
    (tra + trb - 2.0 * cross).max(0.0).sqrt()
}
