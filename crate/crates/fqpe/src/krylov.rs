//! Krylov subspace diagonalization in Chebyshev or trigonometric bases,
//! assembled exactly from spectral data.

use crate::error::{invalid, Error, Result};
use crate::filter::report::random_hermitian_with_norm;
use crate::filter::{filtered_state_report, normalize_filter, Basis, FilterSeries};
use crate::model::SpectralModel;
use crate::numerics::{generalized_hermitian_eig, hermitian_eig, operator_norm, CMat, HermitianMatrix};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

pub const DEFAULT_THRESHOLD: f64 = 1e-12;
const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KrylovPair {
    basis: Basis,
    n: usize,
    h: HermitianMatrix,
    s: HermitianMatrix,
    energies: Vec<f64>,
    weights: Vec<f64>,
    gap: f64,
}

/// b_k(x) for k = 0..=n.
pub fn basis_values(basis: Basis, n: usize, x: f64) -> Vec<C64> {
    match basis {
        Basis::Chebyshev => {
            let mut t = vec![C64::new(1.0, 0.0); n + 1];
            if n >= 1 {
                t[1] = C64::new(x, 0.0);
            }
            for k in 2..=n {
                t[k] = t[k - 1] * (2.0 * x) - t[k - 2];
            }
            t
        }
        Basis::Trig => {
            let half = (n / 2) as f64;
            (0..=n).map(|k| C64::from_polar(1.0, -PI * (k as f64 - half) * x)).collect()
        }
    }
}

pub fn build_krylov(model: &SpectralModel, basis: Basis, n: usize) -> Result<KrylovPair> {
    if n < 1 {
        return invalid("Krylov order N must be at least 1");
    }
    let dim = n + 1;
    let mut s = CMat::zeros(dim, dim);
    let mut h = CMat::zeros(dim, dim);
    for (&e, &w) in model.energies().iter().zip(model.overlaps_sq()) {
        if w == 0.0 {
            continue;
        }
        let b = basis_values(basis, n, e);
        for k in 0..dim {
            let bk = b[k].conj() * w;
            for l in 0..dim {
                let v = bk * b[l];
                s[(k, l)] += v;
                h[(k, l)] += v * e;
            }
        }
    }
    let pair = KrylovPair {
        basis,
        n,
        h: HermitianMatrix::new(h)?,
        s: HermitianMatrix::new(s)?,
        energies: model.energies().to_vec(),
        weights: model.overlaps_sq().to_vec(),
        gap: model.gap(),
    };
    pair.check_structure()?;
    Ok(pair)
}

impl KrylovPair {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn s(&self) -> &HermitianMatrix {
        &self.s
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn model_gap(&self) -> f64 {
        self.gap
    }

    pub fn check_structure(&self) -> Result<()> {
        let dim = self.n + 1;
        let (s, h) = (self.s.matrix(), self.h.matrix());
        match self.basis {
            Basis::Trig => {
                for k in 1..dim {
                    for l in 1..dim {
                        let ds = (s[(k, l)] - s[(k - 1, l - 1)]).norm();
                        let dh = (h[(k, l)] - h[(k - 1, l - 1)]).norm();
                        if ds > STRUCTURE_TOL || dh > STRUCTURE_TOL {
                            return Err(Error::Invariant(format!("trig Krylov matrices not Toeplitz at ({k}, {l})")));
                        }
                    }
                }
            }
            Basis::Chebyshev => {
                let mut m = vec![0.0; 2 * self.n + 1];
                for (&e, &w) in self.energies.iter().zip(&self.weights) {
                    for (j, t) in basis_values(Basis::Chebyshev, 2 * self.n, e).iter().enumerate() {
                        m[j] += w * t.re;
                    }
                }
                for k in 0..dim {
                    for l in 0..dim {
                        let want = 0.5 * (m[k + l] + m[k.abs_diff(l)]);
                        if (s[(k, l)].re - want).abs() > STRUCTURE_TOL || s[(k, l)].im.abs() > STRUCTURE_TOL {
                            return Err(Error::Invariant(format!("Chebyshev S violates the moment identity at ({k}, {l})")));
                        }
                    }
                }
            }
        }
        for k in 0..dim {
            if !(s[(k, k)].re >= 0.0) || s[(k, k)].im != 0.0 {
                return Err(Error::Invariant(format!("S diagonal entry {k} is not real non-negative")));
            }
        }
        let smin = hermitian_eig(&self.s)?.values[0];
        if smin < -STRUCTURE_TOL {
            return Err(Error::Invariant(format!("S has negative eigenvalue {smin}")));
        }
        Ok(())
    }

    /// Amplitudes of f(H)|phi_0> on the model's eigenbasis, f = sum c_k b_k.
    pub fn state_amplitudes(&self, coeffs: &[C64]) -> Vec<C64> {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| {
                let b = basis_values(self.basis, self.n, e);
                let f: C64 = b.iter().zip(coeffs).map(|(b, c)| b * c).sum();
                f * w.sqrt()
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = |a: &CMat| -> Vec<Vec<[f64; 2]>> {
            (0..a.rows()).map(|i| a.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
        };
        serde_json::json!({
            "basis": self.basis,
            "N": self.n,
            "H": m(self.h.matrix()),
            "S": m(self.s.matrix()),
            "model": {"levels": self.energies.len(), "ground_energy": self.energies[0], "gap": finite_or_null(self.gap)},
        })
    }
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::Null
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrylovSolution {
    #[serde(serialize_with = "ser_complex")]
    pub coeffs: Vec<C64>,
    /// Eigenvalues of the (possibly penalized) pencil, ascending.
    pub krylov_energies: Vec<f64>,
    /// c^H H c with c^H S c = 1.
    pub ground_energy: f64,
    pub lambda: f64,
    pub threshold: f64,
    pub retained_rank: usize,
    pub condition_number: f64,
}

fn ser_complex<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

pub fn solve_ksd(pair: &KrylovPair, threshold: f64) -> Result<KrylovSolution> {
    solve_modified_ksd(pair, 0.0, threshold)
}

/// (H + lambda (N+1) I) c = S c E.
pub fn solve_modified_ksd(pair: &KrylovPair, lambda: f64, threshold: f64) -> Result<KrylovSolution> {
    if !(lambda >= 0.0) {
        return invalid(format!("penalty lambda must be non-negative, got {lambda}"));
    }
    let dim = pair.n + 1;
    let shifted = if lambda == 0.0 {
        pair.h.clone()
    } else {
        let shift = lambda * dim as f64;
        HermitianMatrix::new(pair.h.matrix().add(&CMat::identity(dim).scale(shift)))?
    };
    let g = generalized_hermitian_eig(&shifted, &pair.s, threshold)?;
    let coeffs = g.vector(0);
    let ground_energy = crate::numerics::quad_form(&coeffs, pair.h.matrix(), &coeffs).re;
    Ok(KrylovSolution {
        coeffs,
        krylov_energies: g.values.clone(),
        ground_energy,
        lambda,
        threshold,
        retained_rank: g.retained_rank,
        condition_number: g.kappa(),
    })
}

/// The solution as a normalized filter series (center 0, L = 1).
pub fn krylov_filter(solution: &KrylovSolution, pair: &KrylovPair) -> Result<FilterSeries> {
    if solution.coeffs.len() != pair.n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} coefficients, pair needs {}",
            solution.coeffs.len(),
            pair.n + 1
        )));
    }
    if solution.coeffs.iter().all(|c| c.norm() == 0.0) {
        return invalid("all Krylov coefficients are zero");
    }
    normalize_filter(&FilterSeries::new(pair.basis, solution.coeffs.clone(), 0.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsdRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub e0_err: f64,
    pub e1_err: Option<f64>,
    pub rejection: f64,
    pub overlap: f64,
    pub p_f: f64,
}

pub fn ksd_convergence_sweep(model: &SpectralModel, basis: Basis, n_list: &[usize], threshold: f64) -> Result<Vec<KsdRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("N list must be strictly ascending");
    }
    n_list
        .iter()
        .map(|&n| {
            let pair = build_krylov(model, basis, n)?;
            let sol = solve_ksd(&pair, threshold)?;
            let f = krylov_filter(&sol, &pair)?;
            let r = filtered_state_report(model, &f);
            let e1_err = match (sol.krylov_energies.get(1), model.energies().get(1)) {
                (Some(k1), Some(e1)) => Some(k1 - e1),
                _ => None,
            };
            Ok(KsdRow {
                n,
                e0_err: sol.ground_energy - model.ground_energy(),
                e1_err,
                rejection: r.rejection,
                overlap: r.overlap_f0_sq,
                p_f: r.p_f,
            })
        })
        .collect()
}

/// |<phi_a|phi_b>|^2 for two normalized-on-the-fly amplitude vectors.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    let ab = crate::numerics::dot(a, b).norm_sqr();
    let na = crate::numerics::dot(a, a).re;
    let nb = crate::numerics::dot(b, b).re;
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ab / (na * nb)
}

/// Pseudo-inverse of a PSD matrix keeping eigenvalues above threshold * max.
fn pinv_psd(s: &HermitianMatrix, threshold: f64) -> Result<CMat> {
    let e = hermitian_eig(s)?;
    let n = s.dim();
    let smax = e.values.last().copied().unwrap_or(0.0);
    let cut = threshold * smax;
    let inv: Vec<f64> = e.values.iter().map(|&v| if v > cut && v > 0.0 { 1.0 / v } else { 0.0 }).collect();
    Ok(CMat::from_fn(n, n, |i, j| (0..n).map(|k| e.vectors[(i, k)] * inv[k] * e.vectors[(j, k)].conj()).sum()))
}

fn project_psd(s: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = hermitian_eig(s)?;
    let n = s.dim();
    let v: Vec<f64> = e.values.iter().map(|&x| x.max(0.0)).collect();
    Ok(HermitianMatrix::symmetrized(&CMat::from_fn(n, n, |i, j| {
        (0..n).map(|k| e.vectors[(i, k)] * v[k] * e.vectors[(j, k)].conj()).sum()
    })))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrylovTrial {
    pub fidelity: f64,
    pub delta_norm: f64,
    pub assumption_holds: bool,
    /// 1 - kappa / (Delta_K / ||Delta(S^-1 H)|| - 1), when the assumption holds.
    pub bound: Option<f64>,
    /// Same with the true model gap in place of Delta_K.
    pub bound_true_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrylovPerturbationReport {
    pub eta: f64,
    pub kappa: f64,
    pub krylov_gap: f64,
    pub model_gap: f64,
    pub worst_fidelity: f64,
    /// Smallest bound over trials where the gap assumption held.
    pub worst_bound: Option<f64>,
    pub trials_assumption_held: usize,
    pub bound_violations: usize,
    /// The experiment evaluates ||Delta(S^-1 H)|| from the unperturbed matrices, which a hardware run cannot.
    pub uses_true_matrices: bool,
    pub trials: Vec<KrylovTrial>,
}

fn bound(kappa: f64, gap: f64, delta: f64) -> Option<f64> {
    if delta == 0.0 {
        return Some(1.0);
    }
    if delta < gap {
        Some(1.0 - kappa / (gap / delta - 1.0))
    } else {
        None
    }
}

pub fn krylov_perturbation_experiment(
    pair: &KrylovPair,
    eta: f64,
    trials: usize,
    seed: u64,
    threshold: f64,
) -> Result<KrylovPerturbationReport> {
    if !(eta >= 0.0) {
        return invalid(format!("eta must be non-negative, got {eta}"));
    }
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let base = solve_ksd(pair, threshold)?;
    let kappa = base.condition_number;
    let krylov_gap = match base.krylov_energies.get(1) {
        Some(e1) => e1 - base.krylov_energies[0],
        None => f64::INFINITY,
    };
    let phi = pair.state_amplitudes(&base.coeffs);
    let sh = pinv_psd(&pair.s, threshold)?.matmul(pair.h.matrix());
    let dim = pair.n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (ht, st) = if eta == 0.0 {
            (pair.h.clone(), pair.s.clone())
        } else {
            let dh = random_hermitian_with_norm(dim, eta, &mut rng)?;
            let ds = random_hermitian_with_norm(dim, eta, &mut rng)?;
            let ht = HermitianMatrix::new(pair.h.matrix().add(&dh))?;
            let st = project_psd(&HermitianMatrix::new(pair.s.matrix().add(&ds))?)?;
            (ht, st)
        };
        let g = generalized_hermitian_eig(&ht, &st, threshold)?;
        let phit = pair.state_amplitudes(&g.vector(0));
        let fid = fidelity(&phi, &phit);
        let delta_norm = if eta == 0.0 { 0.0 } else { operator_norm(&pinv_psd(&st, threshold)?.matmul(ht.matrix()).sub(&sh))? };
        let b = bound(kappa, krylov_gap, delta_norm);
        out.push(KrylovTrial {
            fidelity: fid,
            delta_norm,
            assumption_holds: b.is_some(),
            bound: b,
            bound_true_gap: bound(kappa, pair.gap, delta_norm),
        });
    }
    let held: Vec<&KrylovTrial> = out.iter().filter(|t| t.assumption_holds).collect();
    let worst_bound = held.iter().filter_map(|t| t.bound).min_by(f64::total_cmp);
    let bound_violations = held.iter().filter(|t| t.fidelity < t.bound.unwrap_or(f64::NEG_INFINITY) - 1e-12).count();
    Ok(KrylovPerturbationReport {
        eta,
        kappa,
        krylov_gap,
        model_gap: pair.gap,
        worst_fidelity: out.iter().map(|t| t.fidelity).fold(1.0, f64::min),
        worst_bound,
        trials_assumption_held: held.len(),
        bound_violations,
        uses_true_matrices: true,
        trials: out,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DavisKahan {
    pub exact: f64,
    pub bound: f64,
    pub gap: f64,
    pub perturbation_norm: f64,
}

/// Spectral projector onto eigenvectors l..=r (ascending order).
fn projector(a: &HermitianMatrix, l: usize, r: usize) -> Result<(CMat, Vec<f64>)> {
    let e = hermitian_eig(a)?;
    let n = a.dim();
    let p = CMat::from_fn(n, n, |i, j| (l..=r).map(|k| e.vectors[(i, k)] * e.vectors[(j, k)].conj()).sum());
    Ok((p, e.values))
}

pub fn davis_kahan_check(a: &HermitianMatrix, a_tilde: &HermitianMatrix, l: usize, r: usize) -> Result<DavisKahan> {
    if a.dim() != a_tilde.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", a.dim(), a_tilde.dim())));
    }
    if l > r || r >= a.dim() {
        return invalid(format!("index range {l}..={r} invalid for dimension {}", a.dim()));
    }
    let (p, lam) = projector(a, l, r)?;
    let (pt, _) = projector(a_tilde, l, r)?;
    let left = if l == 0 { f64::INFINITY } else { lam[l] - lam[l - 1] };
    let right = if r + 1 == lam.len() { f64::INFINITY } else { lam[r + 1] - lam[r] };
    let gap = left.min(right);
    let pert = operator_norm(&a_tilde.matrix().sub(a.matrix()))?;
    if pert >= gap {
        return Err(Error::Invalid(format!("gap assumption violated: ||A~ - A|| = {pert} >= gap {gap}")));
    }
    let bound = if pert == 0.0 { 0.0 } else { 1.0 / (gap / pert - 1.0) };
    let exact = operator_norm(&pt.sub(&p))?;
    if exact > bound * (1.0 + 1e-10) + 1e-13 {
        return Err(Error::Invariant(format!("projector difference {exact} exceeds bound {bound}")));
    }
    Ok(DavisKahan { exact, bound, gap, perturbation_norm: pert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::synthetic_model;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn single_level_pairs() {
        let m = synthetic_model(vec![0.0], vec![1.0]).unwrap();
        let p = build_krylov(&m, Basis::Trig, 4).unwrap();
        for k in 0..5 {
            for l in 0..5 {
                assert!((p.s().get(k, l) - c(1.0)).norm() < 1e-15);
                assert_eq!(p.h().get(k, l).norm(), 0.0);
            }
        }
        let p = build_krylov(&m, Basis::Chebyshev, 4).unwrap();
        let t0 = [1.0, 0.0, -1.0, 0.0, 1.0];
        for k in 0..5 {
            for l in 0..5 {
                assert!((p.s().get(k, l).re - t0[k] * t0[l]).abs() < 1e-15);
            }
        }
        let sol = solve_ksd(&p, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(sol.ground_energy, 0.0);
        let f = krylov_filter(&sol, &p).unwrap();
        assert!((f.eval(0.0).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_level_entries() {
        let (e, w) = ([-0.4, 0.3], [0.7, 0.3]);
        let m = synthetic_model(e.to_vec(), w.to_vec()).unwrap();
        let p = build_krylov(&m, Basis::Trig, 2).unwrap();
        for k in 0..3 {
            for l in 0..3 {
                let s: C64 = (0..2)
                    .map(|i| w[i] * C64::from_polar(1.0, PI * (k as f64 - 1.0) * e[i]) * C64::from_polar(1.0, -PI * (l as f64 - 1.0) * e[i]))
                    .sum();
                assert!((p.s().get(k, l) - s).norm() < 1e-14);
            }
        }
        let p = build_krylov(&m, Basis::Chebyshev, 2).unwrap();
        let t = |k: usize, x: f64| [1.0, x, 2.0 * x * x - 1.0][k];
        for k in 0..3 {
            for l in 0..3 {
                let h: f64 = (0..2).map(|i| w[i] * e[i] * t(k, e[i]) * t(l, e[i])).sum();
                assert!((p.h().get(k, l).re - h).abs() < 1e-14);
            }
        }
        let rows = ksd_convergence_sweep(&m, Basis::Chebyshev, &[1, 2, 3], DEFAULT_THRESHOLD).unwrap();
        for r in rows {
            assert!(r.rejection < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn exhaustive_subspace_is_exact() {
        let m = crate::model::random_model(6, 3).unwrap();
        for basis in [Basis::Chebyshev, Basis::Trig] {
            let p = build_krylov(&m, basis, 8).unwrap();
            let s = solve_ksd(&p, DEFAULT_THRESHOLD).unwrap();
            assert!((s.ground_energy - m.ground_energy()).abs() < 1e-8);
            let f = krylov_filter(&s, &p).unwrap();
            assert!((filtered_state_report(&m, &f).overlap_f0_sq - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn lambda_zero_matches_plain() {
        let m = crate::model::random_model(12, 9).unwrap();
        let p = build_krylov(&m, Basis::Trig, 6).unwrap();
        let a = solve_ksd(&p, DEFAULT_THRESHOLD).unwrap();
        let b = solve_modified_ksd(&p, 0.0, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(a, b);
        assert!(solve_modified_ksd(&p, -1.0, DEFAULT_THRESHOLD).is_err());
    }

    #[test]
    fn large_lambda_tends_to_dominant_s_vector() {
        let m = synthetic_model(vec![-0.6, 0.1, 0.5], vec![0.3, 0.3, 0.4]).unwrap();
        let p = build_krylov(&m, Basis::Chebyshev, 2).unwrap();
        let es = hermitian_eig(p.s()).unwrap();
        let top = es.vector(2);
        let sol = solve_modified_ksd(&p, 1e6, 0.0).unwrap();
        let cn = crate::numerics::norm(&sol.coeffs);
        let ov = crate::numerics::dot(&top, &sol.coeffs).norm() / cn;
        assert!((ov - 1.0).abs() < 1e-6, "{ov}");
    }

    #[test]
    fn p_f_lower_bound() {
        let m = crate::model::random_model(30, 4).unwrap();
        for basis in [Basis::Chebyshev, Basis::Trig] {
            for lam in [0.0, 1e-4, 1e-2] {
                let p = build_krylov(&m, basis, 10).unwrap();
                let s = solve_modified_ksd(&p, lam, DEFAULT_THRESHOLD).unwrap();
                let f = krylov_filter(&s, &p).unwrap();
                let pf = filtered_state_report(&m, &f).p_f;
                let cc = crate::numerics::dot(&s.coeffs, &s.coeffs).re;
                assert!(pf >= 1.0 / (11.0 * cc) * (1.0 - 1e-9), "{pf}");
            }
        }
    }

    #[test]
    fn zero_perturbation_is_perfect() {
        let m = synthetic_model(vec![-0.5, 0.0, 0.6], vec![0.4, 0.3, 0.3]).unwrap();
        let p = build_krylov(&m, Basis::Trig, 2).unwrap();
        let r = krylov_perturbation_experiment(&p, 0.0, 3, 0, DEFAULT_THRESHOLD).unwrap();
        assert!((r.worst_fidelity - 1.0).abs() < 1e-12);
        assert_eq!(r.worst_bound, Some(1.0));
    }

    #[test]
    fn well_conditioned_bound_holds() {
        let m = synthetic_model(vec![-0.5, 0.0, 0.6], vec![0.4, 0.3, 0.3]).unwrap();
        let p = build_krylov(&m, Basis::Trig, 2).unwrap();
        let r = krylov_perturbation_experiment(&p, 1e-8, 50, 1, DEFAULT_THRESHOLD).unwrap();
        assert!(r.trials_assumption_held > 0);
        assert_eq!(r.bound_violations, 0);
    }

    #[test]
    fn ill_conditioning_costs_fidelity() {
        let well = synthetic_model(vec![-0.5, 0.0, 0.6], vec![0.4, 0.3, 0.3]).unwrap();
        let pw = build_krylov(&well, Basis::Trig, 2).unwrap();
        let ill = synthetic_model(vec![-0.5, -0.49996, 0.6], vec![0.4, 0.3, 0.3]).unwrap();
        let pi = build_krylov(&ill, Basis::Trig, 2).unwrap();
        let rw = krylov_perturbation_experiment(&pw, 1e-6, 20, 2, 0.0).unwrap();
        let ri = krylov_perturbation_experiment(&pi, 1e-10, 20, 2, 0.0).unwrap();
        assert!(ri.kappa >= 1e8, "{}", ri.kappa);
        assert!(1.0 - ri.worst_fidelity > 1.0 - rw.worst_fidelity);
    }

    #[test]
    fn davis_kahan_two_by_two() {
        let a = HermitianMatrix::from_real_diag(&[0.0, 1.0]).unwrap();
        let d = davis_kahan_check(&a, &a, 0, 0).unwrap();
        assert_eq!((d.exact, d.bound), (0.0, 0.0));
        let mut m = a.matrix().clone();
        m[(0, 1)] = c(0.1);
        m[(1, 0)] = c(0.1);
        let at = HermitianMatrix::new(m).unwrap();
        let d = davis_kahan_check(&a, &at, 0, 0).unwrap();
        let theta = 0.5 * 0.2f64.atan();
        assert!((d.exact - theta.sin()).abs() < 1e-12);
        assert!((d.bound - 1.0 / 9.0).abs() < 1e-12);
        let mut m = a.matrix().clone();
        m[(0, 1)] = c(1.0);
        m[(1, 0)] = c(1.0);
        assert!(davis_kahan_check(&a, &HermitianMatrix::new(m).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn json_shape() {
        let m = synthetic_model(vec![-0.5, 0.2], vec![0.5, 0.5]).unwrap();
        let p = build_krylov(&m, Basis::Chebyshev, 2).unwrap();
        let j = p.to_json();
        assert_eq!(j["N"], 2);
        assert_eq!(j["H"].as_array().unwrap().len(), 3);
        assert_eq!(j["basis"], "chebyshev");
    }
}
