use super::series::{Basis, FilterSeries};
use crate::error::{invalid, Error, Result};
use crate::model::SpectralModel;
use crate::numerics::{bessel_j_all, hermitian_eig, operator_norm, CMat, HermitianMatrix};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterReport {
    pub p_f: f64,
    pub overlap_f0_sq: f64,
    /// +inf when the ground component is annihilated.
    pub rejection: f64,
    pub f_at_e0_sq: f64,
    pub f_at_e1_sq: f64,
    pub amplification: f64,
    pub ground_rejected: bool,
}

pub fn report_from_values(weights: &[f64], f_sq: &[f64]) -> FilterReport {
    let p_f: f64 = weights.iter().zip(f_sq).map(|(w, f)| w * f).sum();
    let ground = weights[0] * f_sq[0];
    let excited: f64 = weights.iter().zip(f_sq).skip(1).map(|(w, f)| w.abs() * f).sum();
    let f1 = f_sq.get(1).copied().unwrap_or(0.0);
    if ground == 0.0 {
        return FilterReport {
            p_f,
            overlap_f0_sq: 0.0,
            rejection: f64::INFINITY,
            f_at_e0_sq: f_sq[0],
            f_at_e1_sq: f1,
            amplification: 0.0,
            ground_rejected: true,
        };
    }
    let rejection = excited / ground;
    let overlap = 1.0 / (1.0 + rejection);
    FilterReport {
        p_f,
        overlap_f0_sq: overlap,
        rejection,
        f_at_e0_sq: f_sq[0],
        f_at_e1_sq: f1,
        amplification: overlap / weights[0],
        ground_rejected: false,
    }
}

pub fn filtered_state_report(model: &SpectralModel, f: &FilterSeries) -> FilterReport {
    let f_sq: Vec<f64> = model.energies().iter().map(|&e| f.eval(e).norm_sqr()).collect();
    report_from_values(model.overlaps_sq(), &f_sq)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzBounds {
    pub series_bound: f64,
    pub numeric: f64,
}

pub fn lipschitz_bounds(f: &FilterSeries) -> LipschitzBounds {
    let l = f.half_period();
    let series_bound = match f.basis() {
        Basis::Trig => {
            PI / l * f.coeffs().iter().enumerate().map(|(k, c)| (f.frequency(k).unsigned_abs() as f64) * c.norm()).sum::<f64>()
        }
        Basis::Chebyshev => {
            f.coeffs().iter().enumerate().map(|(k, c)| (k * k) as f64 * c.norm()).sum::<f64>() / l
        }
    };
    LipschitzBounds { series_bound, numeric: f.derivative().sup_norm() }
}

/// 2 eps_Pi + 1/(Delta/eps_H - 1) for the projector-like accepted set {|f(E_i)| >= 1/2}.
pub fn projector_kappa_bound(model: &SpectralModel, f: &FilterSeries, eps_h: f64) -> Result<f64> {
    if !(eps_h >= 0.0) {
        return invalid(format!("eps_H must be non-negative, got {eps_h}"));
    }
    let e = model.energies();
    let vals: Vec<C64> = e.iter().map(|&x| f.eval(x)).collect();
    let accepted: Vec<usize> = (0..e.len()).filter(|&i| vals[i].norm() >= 0.5).collect();
    let (l, r) = match (accepted.first(), accepted.last()) {
        (Some(&l), Some(&r)) => (l, r),
        _ => return invalid("filter accepts no level; not projector-like"),
    };
    if r - l + 1 != accepted.len() {
        return invalid("accepted set {i : |f(E_i)| >= 1/2} is not contiguous; filter is not projector-like");
    }
    let left = if l == 0 { f64::INFINITY } else { e[l] - e[l - 1] };
    let right = if r + 1 == e.len() { f64::INFINITY } else { e[r + 1] - e[r] };
    let gap = left.min(right);
    if eps_h >= gap {
        return Err(Error::Invalid(format!("gap assumption violated: eps_H {eps_h} >= boundary gap {gap}")));
    }
    let eps_pi = vals
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let ind = if (l..=r).contains(&i) { 1.0 } else { 0.0 };
            (v - C64::new(ind, 0.0)).norm()
        })
        .fold(0.0, f64::max);
    Ok(2.0 * eps_pi + 1.0 / (gap / eps_h - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub lipschitz_series_bound: f64,
    pub lipschitz_numeric: f64,
    pub projector_bound: Option<f64>,
    pub empirical_max_deviation: f64,
    pub eps_h: f64,
    pub levels_used: usize,
    pub within_series_bound: bool,
}

pub const PERTURBATION_LEVEL_CAP: usize = 64;

/// Keep the `cap` heaviest levels (ground level always kept), renormalized, in energy order.
pub fn subsample_levels(model: &SpectralModel, cap: usize) -> (Vec<f64>, Vec<f64>) {
    let n = model.len();
    let mut idx: Vec<usize> = (1..n).collect();
    idx.sort_by(|&a, &b| model.overlaps_sq()[b].total_cmp(&model.overlaps_sq()[a]).then(a.cmp(&b)));
    idx.truncate(cap.saturating_sub(1));
    idx.push(0);
    idx.sort_unstable();
    let e: Vec<f64> = idx.iter().map(|&i| model.energies()[i]).collect();
    let mut w: Vec<f64> = idx.iter().map(|&i| model.overlaps_sq()[i]).collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|x| *x /= s);
    }
    (e, w)
}

pub fn random_hermitian_with_norm(n: usize, norm: f64, rng: &mut ChaCha8Rng) -> Result<CMat> {
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        g[(i, i)] = C64::new(d, 0.0);
        for j in i + 1..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let z = C64::new(re, im) / 2f64.sqrt();
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    let current = HermitianMatrix::new(g.clone())?.spectral_norm()?;
    if current == 0.0 {
        return Ok(g);
    }
    Ok(g.scale(norm / current))
}

/// Matrix function f(A) = V diag(f(lambda)) V^H.
pub fn matrix_function(a: &HermitianMatrix, f: &FilterSeries) -> Result<CMat> {
    let e = hermitian_eig(a)?;
    let n = a.dim();
    let fv: Vec<C64> = e.values.iter().map(|&x| f.eval(x)).collect();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..n {
                s += e.vectors[(i, k)] * fv[k] * e.vectors[(j, k)].conj();
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

pub fn perturbation_experiment(
    model: &SpectralModel,
    f: &FilterSeries,
    eps_h: f64,
    trials: usize,
    seed: u64,
    allow_subsample: bool,
) -> Result<RobustnessReport> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    if !(eps_h >= 0.0) {
        return invalid("eps_H must be non-negative");
    }
    if model.len() > PERTURBATION_LEVEL_CAP && !allow_subsample {
        return invalid(format!(
            "model has {} levels (> {PERTURBATION_LEVEL_CAP}); enable subsampling to run the experiment",
            model.len()
        ));
    }
    let (energies, weights) = subsample_levels(model, PERTURBATION_LEVEL_CAP);
    let n = energies.len();
    let h = HermitianMatrix::from_real_diag(&energies)?;
    let fh = CMat::from_fn(n, n, |i, j| if i == j { f.eval(energies[i]) } else { C64::new(0.0, 0.0) });
    let lip = lipschitz_bounds(f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        if eps_h == 0.0 {
            break;
        }
        let p = random_hermitian_with_norm(n, eps_h, &mut rng)?;
        let hp = HermitianMatrix::new(h.matrix().add(&p))?;
        let fhp = matrix_function(&hp, f)?;
        worst = worst.max(operator_norm(&fhp.sub(&fh))?);
    }
    let sub = crate::model::synthetic_model(energies, weights)?;
    let projector_bound = projector_kappa_bound(&sub, f, eps_h).ok();
    Ok(RobustnessReport {
        lipschitz_series_bound: lip.series_bound,
        lipschitz_numeric: lip.numeric,
        projector_bound,
        empirical_max_deviation: worst,
        eps_h,
        levels_used: n,
        within_series_bound: worst <= lip.series_bound * eps_h * (1.0 + 1e-6) + 1e-300,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiAngerTruncation {
    pub n: usize,
    pub tail: f64,
}

/// Smallest N with 2 sum_{k>N} |J_k(t)| <= eps.
pub fn jacobi_anger_truncation(t: f64, eps: f64) -> Result<JacobiAngerTruncation> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps_HE must lie in (0, 1), got {eps}"));
    }
    let mut kmax = t.abs().ceil() as usize + 40;
    loop {
        let j = bessel_j_all(kmax, t);
        let far: f64 = 2.0 * j[kmax - 10..].iter().map(|v| v.abs()).sum::<f64>();
        if far > 1e-3 * eps && kmax < 100_000 {
            kmax *= 2;
            continue;
        }
        let mut tail = 0.0;
        let mut tails = vec![0.0; kmax + 1];
        for k in (0..=kmax).rev() {
            tails[k] = tail;
            tail += 2.0 * j[k].abs();
        }
        let n = (0..=kmax).find(|&k| tails[k] <= eps).unwrap_or(kmax);
        return Ok(JacobiAngerTruncation { n, tail: tails[n] });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::design::{design_cheb_minimax_trig, design_gaussian_trig};
    use crate::model::synthetic_model;

    #[test]
    fn two_level_reports() {
        let m = synthetic_model(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let r = report_from_values(m.overlaps_sq(), &[1.0, 0.0]);
        assert_eq!((r.p_f, r.overlap_f0_sq, r.rejection), (0.5, 1.0, 0.0));
        let one = FilterSeries::from_real(Basis::Trig, &[1.0], 0.0).unwrap();
        let r = filtered_state_report(&m, &one);
        assert!((r.p_f - 1.0).abs() < 1e-15 && (r.overlap_f0_sq - 0.5).abs() < 1e-15);
        assert!((r.amplification - 1.0).abs() < 1e-15);
        let r = report_from_values(&[0.04, 0.96], &[1.0, 0.01]);
        assert!((r.p_f - 0.0496).abs() < 1e-15);
        assert!((r.overlap_f0_sq - 1.0 / 1.24).abs() < 1e-15);
        assert!((r.overlap_f0_sq - 0.80645).abs() < 1e-5);
    }

    #[test]
    fn annihilated_ground_is_flagged() {
        let r = report_from_values(&[0.3, 0.7], &[0.0, 0.4]);
        assert!(r.ground_rejected && r.rejection.is_infinite() && r.overlap_f0_sq == 0.0);
    }

    #[test]
    fn lipschitz_simple_cases() {
        let t1 = FilterSeries::from_real(Basis::Chebyshev, &[0.0, 1.0], 0.0).unwrap();
        let b = lipschitz_bounds(&t1);
        assert!((b.series_bound - 1.0).abs() < 1e-15 && (b.numeric - 1.0).abs() < 1e-9);
        let c = FilterSeries::from_real(Basis::Trig, &[0.0, 0.7, 0.0], 0.0).unwrap();
        let b = lipschitz_bounds(&c);
        assert_eq!((b.series_bound, b.numeric), (0.0, 0.0));
        let d = design_cheb_minimax_trig(0.2, 16).unwrap();
        let b = lipschitz_bounds(&d.series);
        assert!(b.numeric <= b.series_bound + 1e-8);
    }

    #[test]
    fn projector_bound_cases() {
        let m = synthetic_model(vec![-0.8, -0.2, 0.4], vec![0.2, 0.3, 0.5]).unwrap();
        // indicator-like Chebyshev filter: exact on the three levels via interpolation
        let target = [1.0, 0.0, 0.0];
        let e = m.energies();
        let lag = |x: f64| -> f64 {
            (0..3)
                .map(|i| {
                    let mut p = target[i];
                    for j in 0..3 {
                        if i != j {
                            p *= (x - e[j]) / (e[i] - e[j]);
                        }
                    }
                    p
                })
                .sum()
        };
        let c = crate::filter::design::chebyshev_coefficients(lag, 2, 8);
        let f = FilterSeries::from_real(Basis::Chebyshev, &c, 0.0).unwrap();
        let b = projector_kappa_bound(&m, &f, 0.3).unwrap();
        assert!((b - 1.0).abs() < 1e-10);
        let small = projector_kappa_bound(&m, &f, 1e-12).unwrap();
        assert!(small < 1e-9);
        assert!(projector_kappa_bound(&m, &f, 0.7).is_err());
        let bump = FilterSeries::from_real(Basis::Chebyshev, &[0.5, 0.0, -0.5], 0.0).unwrap();
        // |f| = 1 - y^2 style: accepts middle only -> contiguous
        assert!(projector_kappa_bound(&m, &bump, 0.01).is_ok());
        let edges = synthetic_model(vec![-0.9, 0.0, 0.9], vec![0.3, 0.4, 0.3]).unwrap();
        let cup = FilterSeries::from_real(Basis::Chebyshev, &[0.5, 0.0, 0.5], 0.0).unwrap();
        assert!(projector_kappa_bound(&edges, &cup, 0.01).is_err());
    }

    #[test]
    fn perturbation_trivial_cases() {
        let m = crate::model::random_model(16, 2).unwrap();
        let d = design_gaussian_trig(m.ground_energy(), m.ground_energy(), m.ground_energy() + 0.3, 0.0, 0.05).unwrap();
        let r = perturbation_experiment(&m, &d.series, 0.0, 5, 1, false).unwrap();
        assert_eq!(r.empirical_max_deviation, 0.0);
        let c = FilterSeries::from_real(Basis::Trig, &[0.0, 0.4, 0.0], 0.0).unwrap();
        let r = perturbation_experiment(&m, &c, 1e-3, 5, 1, false).unwrap();
        assert!(r.empirical_max_deviation < 1e-14);
    }

    #[test]
    fn perturbation_trig_within_unitary_bound() {
        let m = crate::model::random_model(16, 5).unwrap();
        let d = design_cheb_minimax_trig(0.3, 6).unwrap();
        for eps in [1e-4, 1e-2] {
            let r = perturbation_experiment(&m, &d.series, eps, 100, 3, false).unwrap();
            assert!(r.within_series_bound, "{r:?}");
            assert!(r.empirical_max_deviation > 0.0);
        }
    }

    #[test]
    fn perturbation_subsampling_consent() {
        let m = crate::model::random_model(100, 1).unwrap();
        let f = FilterSeries::from_real(Basis::Trig, &[0.5, 0.5], 0.0).unwrap();
        assert!(perturbation_experiment(&m, &f, 1e-3, 2, 0, false).is_err());
        let r = perturbation_experiment(&m, &f, 1e-3, 2, 0, true).unwrap();
        assert_eq!(r.levels_used, 64);
    }

    #[test]
    fn jacobi_anger() {
        assert_eq!(jacobi_anger_truncation(0.0, 1e-6).unwrap().n, 0);
        let r = jacobi_anger_truncation(PI, 1e-10).unwrap();
        let j = bessel_j_all(200, PI);
        let tail = |n: usize| 2.0 * j[n + 1..].iter().map(|v| v.abs()).sum::<f64>();
        assert!(tail(r.n) <= 1e-10 && tail(r.n - 1) > 1e-10);
        let a = jacobi_anger_truncation(PI, 1e-2).unwrap().n;
        let b = jacobi_anger_truncation(PI, 1e-4).unwrap().n;
        assert!(b >= a && b - a <= 8);
    }
}
