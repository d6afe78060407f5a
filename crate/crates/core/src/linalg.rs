//! Dense complex linear algebra kernels.
//!
//! Everything here is self-contained: a cyclic Jacobi eigensolver for
//! Hermitian matrices, an eigendecomposition for normal (in practice
//! unitary) matrices built on top of it, and rank-one Householder
//! preparation operators that apply in O(n) without materializing their
//! matrix. Dimensions stay small enough (a few hundred at most on the
//! eigensolver paths) that Jacobi's robustness beats a LAPACK binding.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub type C64 = Complex64;

pub const ZERO_C: C64 = Complex64::new(0.0, 0.0);
pub const ONE_C: C64 = Complex64::new(1.0, 0.0);

pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// max_ij |a_ij - b_ij|
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// max_ij |m_ij|
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value, computed as sqrt(lambda_max(M^dagger M)).
pub fn spectral_norm(m: &Array2<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = adjoint(m).dot(m);
    let (evals, _) = eigh(&gram).expect("Gram matrix is Hermitian by construction");
    evals.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt()
}

/// Spectral distance between two operators of equal dimension.
pub fn op_distance(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    spectral_norm(&(a - b))
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvector columns. Convergence is quadratic once the off-diagonal
/// mass is small; 60 sweeps is far beyond what any input here needs.
pub fn eigh(h: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(CoreError::DimMismatch { left: n, right: h.ncols() });
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut a = h.clone();
    let mut v: Array2<C64> = Array2::eye(n);
    let scale = max_abs(h).max(1e-300);
    let stop = scale * 1e-15;

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= stop * 1e-2 {
                    continue;
                }
                let u = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Plane rotation J: J[p,p]=c, J[p,q]=s, J[q,p]=-s*conj(u),
                // J[q,q]=c*conj(u); A <- J^dagger A J, V <- V J.
                let (cc, su, csu) = (
                    Complex64::new(c, 0.0),
                    Complex64::new(s, 0.0) * u.conj(),
                    Complex64::new(c, 0.0) * u.conj(),
                );
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cc * akp - su * akq;
                    a[(k, q)] = Complex64::new(s, 0.0) * akp + csu * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cc * apk - su.conj() * aqk;
                    a[(q, k)] = Complex64::new(s, 0.0) * apk + csu.conj() * aqk;
                }
                // Clean the rotated pair to keep the matrix exactly Hermitian.
                a[(p, q)] = ZERO_C;
                a[(q, p)] = ZERO_C;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = cc * vkp - su * vkq;
                    v[(k, q)] = Complex64::new(s, 0.0) * vkp + csu * vkq;
                }
            }
        }
    }

    let mut off = 0.0f64;
    for p in 0..n {
        for q in (p + 1)..n {
            off = off.max(a[(p, q)].norm());
        }
    }
    if off > scale * 1e-10 {
        return Err(CoreError::NumericalFailure(format!(
            "Jacobi eigensolver stalled with off-diagonal residual {off:.3e}"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let evals: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((evals, vectors))
}

/// Eigendecomposition of a normal matrix (unitary in every caller here).
///
/// Splits U into commuting Hermitian parts H = (U + U*)/2 and
/// K = (U - U*)/2i, diagonalizes H, then resolves each degenerate H
/// eigenspace with K. The pair (cos, sin) determines each eigenvalue on
/// the unit circle unambiguously. Returns (eigenvalues, eigenvectors)
/// with orthonormal columns, sorted by phase.
pub fn eig_normal(u: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    let n = u.nrows();
    if n != u.ncols() {
        return Err(CoreError::DimMismatch { left: n, right: u.ncols() });
    }
    let udag = adjoint(u);
    let h = (u + &udag).mapv(|z| z * 0.5);
    let k = (u - &udag).mapv(|z| z * Complex64::new(0.0, -0.5));
    let (hvals, mut w) = eigh(&h)?;

    // Walk clusters of (numerically) equal H eigenvalues.
    let cluster_tol = 1e-7;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (hvals[end] - hvals[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let wc = w.slice(ndarray::s![.., start..end]).to_owned();
            let kc = adjoint(&wc).dot(&k).dot(&wc);
            if max_abs(&kc) > 1e-12 {
                let (_, rot) = eigh(&kc)?;
                let rotated = wc.dot(&rot);
                w.slice_mut(ndarray::s![.., start..end]).assign(&rotated);
            }
        }
        start = end;
    }

    let mut pairs: Vec<(C64, Array1<C64>)> = (0..n)
        .map(|j| {
            let col = w.column(j).to_owned();
            let uc = u.dot(&col);
            let lam: C64 = col.iter().zip(uc.iter()).map(|(a, b)| a.conj() * b).sum();
            (lam, col)
        })
        .collect();
    pairs.sort_by(|a, b| {
        principal_phase(a.0).partial_cmp(&principal_phase(b.0)).unwrap()
    });

    let evals: Vec<C64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = Array2::zeros((n, n));
    for (j, (_, col)) in pairs.iter().enumerate() {
        vectors.column_mut(j).assign(col);
    }

    // The decomposition must reproduce the input; anything else means the
    // matrix was not normal (or the solver misbehaved).
    let recon = reconstruct_normal(&evals, &vectors);
    let defect = max_abs_diff(&recon, u);
    if defect > 1e-8 {
        return Err(CoreError::NumericalFailure(format!(
            "normal-matrix eigendecomposition defect {defect:.3e}"
        )));
    }
    Ok((evals, vectors))
}

/// V diag(lambda) V^dagger
pub fn reconstruct_normal(evals: &[C64], vectors: &Array2<C64>) -> Array2<C64> {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (j, lam) in evals.iter().enumerate() {
        scaled.column_mut(j).mapv_inplace(|z| z * lam);
    }
    scaled.dot(&adjoint(vectors)).into_shape_with_order((n, n)).unwrap()
}

/// Map an on-circle eigenvalue to its phase in (-pi, pi].
pub fn principal_phase(lambda: C64) -> f64 {
    let mut phase = lambda.arg();
    if phase <= -std::f64::consts::PI {
        phase += 2.0 * std::f64::consts::PI;
    }
    phase
}

/// A Householder-based preparation operator: unitary with a prescribed
/// first column, applied in O(n) as a rank-one update.
///
/// For a unit target v the operator is U = -beta (I - 2 w w^dagger) with
/// beta the phase of v_0 (or 1 when v_0 = 0) and w the normalized
/// v + beta e_0; then U e_0 = v with no cancellation for any input.
#[derive(Debug, Clone)]
pub struct PrepUnitary {
    dim: usize,
    w: Array1<C64>,
    beta: C64,
}

impl PrepUnitary {
    pub fn for_target(v: &Array1<C64>) -> Result<Self> {
        let dim = v.len();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(CoreError::ZeroVector { norm });
        }
        let unit = v.mapv(|z| z / norm);
        let beta = if unit[0].norm() > 0.0 { unit[0] / unit[0].norm() } else { ONE_C };
        let mut w = unit;
        w[0] += beta;
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        w.mapv_inplace(|z| z / wn);
        Ok(PrepUnitary { dim, w, beta })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// U x
    pub fn apply(&self, x: &Array1<C64>) -> Array1<C64> {
        let dot: C64 = self.w.iter().zip(x.iter()).map(|(wi, xi)| wi.conj() * xi).sum();
        let mut out = x - &self.w.mapv(|wi| wi * dot * 2.0);
        out.mapv_inplace(|z| z * (-self.beta));
        out
    }

    /// U^dagger x
    pub fn apply_adjoint(&self, x: &Array1<C64>) -> Array1<C64> {
        let dot: C64 = self.w.iter().zip(x.iter()).map(|(wi, xi)| wi.conj() * xi).sum();
        let mut out = x - &self.w.mapv(|wi| wi * dot * 2.0);
        out.mapv_inplace(|z| z * (-self.beta.conj()));
        out
    }

    /// The prepared state U e_0.
    pub fn target(&self) -> Array1<C64> {
        let mut e0 = Array1::zeros(self.dim);
        e0[0] = ONE_C;
        self.apply(&e0)
    }

    /// Materialize the dense matrix (small dimensions / tests).
    pub fn dense(&self) -> Array2<C64> {
        let mut m = Array2::zeros((self.dim, self.dim));
        for j in 0..self.dim {
            let mut e = Array1::zeros(self.dim);
            e[j] = ONE_C;
            m.column_mut(j).assign(&self.apply(&e));
        }
        m
    }
}

#[cfg(test)]
pub(crate) fn expm_reference(a: &Array2<C64>) -> Array2<C64> {
    // Scaling-and-squaring Taylor series; independent oracle for the
    // eigendecomposition-based exponentials used in the crate proper.
    let n = a.nrows();
    let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let b = a.mapv(|z| z / 2f64.powi(s as i32));
    let mut term: Array2<C64> = Array2::eye(n);
    let mut sum: Array2<C64> = Array2::eye(n);
    for k in 1..=24 {
        term = term.dot(&b).mapv(|z| z / k as f64);
        sum = sum + &term;
    }
    let mut result = sum;
    for _ in 0..s {
        result = result.dot(&result);
    }
    result
}
