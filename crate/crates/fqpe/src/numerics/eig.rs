//! Dense Hermitian eigensolver and the thresholded generalized problem.
//!
//! Householder reduction to a complex tridiagonal, a diagonal phase change
//! to make it real, then implicit-shift QL on the real tridiagonal.

use super::dense::CMat;
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Dense complex matrix that passed the Hermiticity check.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMat,
}

pub const HERMITIAN_TOL: f64 = 1e-12;

impl HermitianMatrix {
    /// Validates and symmetrizes. Asymmetry is measured relative to the max entry.
    pub fn new(m: CMat) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", m.rows(), m.cols())));
        }
        if m.rows() == 0 {
            return Err(Error::Invalid("matrix dimension must be at least 1".into()));
        }
        let n = m.rows();
        let scale = m.max_abs();
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        let allowed = HERMITIAN_TOL * scale;
        if asym > allowed {
            return Err(Error::NotHermitian { asymmetry: asym, allowed });
        }
        let sym = CMat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        Ok(HermitianMatrix { m: sym })
    }

    /// Hermitian part of a matrix that is Hermitian up to rounding by construction.
    pub(crate) fn symmetrized(m: &CMat) -> Self {
        let n = m.rows();
        HermitianMatrix { m: CMat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj())) }
    }

    pub fn from_real_diag(d: &[f64]) -> Result<Self> {
        Self::new(CMat::from_real_diag(d))
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    /// Spectral norm via the eigenvalues.
    pub fn spectral_norm(&self) -> Result<f64> {
        let e = hermitian_eig(self)?;
        Ok(e.values.iter().fold(0.0f64, |a, v| a.max(v.abs())))
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column k pairs with `values[k]`.
    pub vectors: CMat,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn hermitian_eig(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut w = a.matrix().clone();
    let mut q = CMat::identity(n);

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let x: Vec<C64> = (k + 1..n).map(|i| w[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vn;
        }
        // trailing block update B <- H B H with H = I - 2 v v^H
        let mut p = vec![C64::new(0.0, 0.0); m];
        for (i, pi) in p.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..m {
                s += w[(k + 1 + i, k + 1 + j)] * v[j];
            }
            *pi = s;
        }
        let beta: C64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let wv: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - beta.re * vi).collect();
        for i in 0..m {
            for j in 0..m {
                let upd = v[i] * wv[j].conj() + wv[i] * v[j].conj();
                w[(k + 1 + i, k + 1 + j)] -= 2.0 * upd;
            }
        }
        w[(k + 1, k)] = alpha;
        w[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            w[(i, k)] = C64::new(0.0, 0.0);
            w[(k, i)] = C64::new(0.0, 0.0);
        }
        for r in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for j in 0..m {
                s += q[(r, k + 1 + j)] * v[j];
            }
            for j in 0..m {
                q[(r, k + 1 + j)] -= 2.0 * s * v[j].conj();
            }
        }
    }

    let mut d: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phi = vec![C64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let ei = w[(i + 1, i)];
        let mag = ei.norm();
        e[i] = mag;
        phi[i + 1] = if mag > 0.0 { phi[i] * ei / mag } else { phi[i] };
    }
    for r in 0..n {
        for (c, ph) in phi.iter().enumerate() {
            q[(r, c)] *= ph;
        }
    }

    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tql(&mut d, &mut e, &mut z, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for r in 0..n {
        for (c_new, &c_old) in order.iter().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                let zk = z[k * n + c_old];
                if zk != 0.0 {
                    s += q[(r, k)] * zk;
                }
            }
            vectors[(r, c_new)] = s;
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Implicit QL on a real symmetric tridiagonal. `e[i]` couples i and i+1.
/// `z` is row-major n x n and accumulates the rotations.
fn tql(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut early = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zi1 = z[k * n + i + 1];
                    let zi = z[k * n + i];
                    z[k * n + i + 1] = s * zi + c * zi1;
                    z[k * n + i] = c * zi - s * zi1;
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Solution of H c = S c E restricted to the well-conditioned part of S.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns normalized so that c^H S c = 1.
    pub vectors: CMat,
    pub retained_rank: usize,
    /// Retained eigenvalues of S, ascending.
    pub s_retained: Vec<f64>,
}

impl GeneralizedEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// Condition number of S on the retained subspace.
    pub fn kappa(&self) -> f64 {
        let lo = self.s_retained.first().copied().unwrap_or(f64::NAN);
        let hi = self.s_retained.last().copied().unwrap_or(f64::NAN);
        hi / lo
    }
}

/// Retained (whitening) basis of S: columns V_r diag(s^{-1/2}).
pub(crate) fn whitening(s: &HermitianMatrix, threshold: f64) -> Result<(CMat, Vec<f64>, CMat)> {
    if !(threshold >= 0.0) {
        return Err(Error::Invalid(format!("threshold must be non-negative, got {threshold}")));
    }
    let es = hermitian_eig(s)?;
    let smax = es.values.last().copied().unwrap_or(0.0);
    let cut = threshold * smax;
    let keep: Vec<usize> = (0..es.values.len()).filter(|&k| es.values[k] > cut && es.values[k] > 0.0).collect();
    if keep.is_empty() || !(smax > 0.0) {
        return Err(Error::EmptySubspace(cut));
    }
    let n = s.dim();
    let vr = CMat::from_fn(n, keep.len(), |i, j| es.vectors[(i, keep[j])]);
    let w = CMat::from_fn(n, keep.len(), |i, j| es.vectors[(i, keep[j])] / es.values[keep[j]].sqrt());
    Ok((w, keep.iter().map(|&k| es.values[k]).collect(), vr))
}

pub fn generalized_hermitian_eig(
    h: &HermitianMatrix,
    s: &HermitianMatrix,
    threshold: f64,
) -> Result<GeneralizedEigen> {
    if h.dim() != s.dim() {
        return Err(Error::DimensionMismatch(format!("H is {}x{}, S is {}x{}", h.dim(), h.dim(), s.dim(), s.dim())));
    }
    let (w, s_retained, _) = whitening(s, threshold)?;
    let hw = w.adjoint().matmul(h.matrix()).matmul(&w);
    let hw = HermitianMatrix::symmetrized(&hw);
    let er = hermitian_eig(&hw)?;
    let mut vectors = w.matmul(&er.vectors);
    for k in 0..vectors.cols() {
        let c = vectors.column(k);
        let norm = super::dense::quad_form(&c, s.matrix(), &c).re;
        if norm > 0.0 {
            let f = 1.0 / norm.sqrt();
            for i in 0..vectors.rows() {
                vectors[(i, k)] *= f;
            }
        }
    }
    Ok(GeneralizedEigen { values: er.values, vectors, retained_rank: s_retained.len(), s_retained })
}

/// Largest singular value of an arbitrary complex matrix.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    let g = HermitianMatrix::symmetrized(&m.adjoint().matmul(m));
    let e = hermitian_eig(&g)?;
    Ok(e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}
