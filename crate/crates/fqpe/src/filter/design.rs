//! Filter constructions: Gaussian (trig and Chebyshev), minimax
//! (Chebyshev polynomial and Dolph-Chebyshev trig) and Kaiser windows.

use super::series::{normalize_filter, Basis, FilterSeries};
use crate::error::{invalid, Error, Result};
use crate::numerics::{bessel_i0_scaled, chebyshev_t};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::{E, PI};

pub const VERIFY_GRID: usize = 2001;

/// Target Gaussian parameters shared by both bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTarget {
    pub center: f64,
    pub sigma: f64,
    pub eps_g: f64,
}

impl GaussianTarget {
    pub fn new(tilde_e0: f64, tilde_e1: f64, eps_prime: f64, eps_g: f64) -> Result<Self> {
        if !(eps_g > 0.0 && eps_g < 1.0) {
            return invalid(format!("eps_g must lie in (0, 1), got {eps_g}"));
        }
        if !(tilde_e1 > tilde_e0) {
            return invalid(format!("need tilde_E1 > tilde_E0, got {tilde_e1} <= {tilde_e0}"));
        }
        if !(0.0..1.0).contains(&eps_prime) {
            return invalid(format!("eps_prime must lie in [0, 1), got {eps_prime}"));
        }
        let width = (1.0 - eps_prime) * (tilde_e1 - tilde_e0);
        Ok(GaussianTarget { center: tilde_e0, sigma: width / (2.0 * (1.0 / eps_g).ln()).sqrt(), eps_g })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = (x - self.center) / self.sigma;
        (-0.5 * d * d).exp()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussianDesign {
    pub series: FilterSeries,
    pub target: GaussianTarget,
    /// Circuit-relevant order: N of the series (trig: 2 * max frequency).
    pub order: usize,
    pub max_deviation: f64,
}

pub fn verify_grid() -> Vec<f64> {
    (0..VERIFY_GRID).map(|j| -1.0 + 2.0 * j as f64 / (VERIFY_GRID - 1) as f64).collect()
}

fn max_deviation(f: &FilterSeries, target: &GaussianTarget, grid: &[f64]) -> f64 {
    grid.iter().map(|&x| (f.eval(x) - C64::new(target.eval(x), 0.0)).norm()).fold(0.0, f64::max)
}

fn bounded(f: FilterSeries) -> Result<FilterSeries> {
    if f.sup_norm() > 1.0 {
        normalize_filter(&f)
    } else {
        Ok(f)
    }
}

/// Truncated Fourier series of a periodized Gaussian, max frequency `kmax`, series center `mu`.
pub fn gaussian_trig_series(mu: f64, center: f64, sigma: f64, kmax: usize) -> Result<FilterSeries> {
    let l = 1.0 + mu.abs();
    let amp = (2.0 * PI).sqrt() * sigma / (2.0 * l);
    let coeffs = (0..=2 * kmax)
        .map(|j| {
            let m = j as f64 - kmax as f64;
            let a = amp * (-(PI * m * sigma / l).powi(2) / 2.0).exp();
            a * C64::from_polar(1.0, -PI * m * (mu - center) / l)
        })
        .collect();
    FilterSeries::new(Basis::Trig, coeffs, mu)
}

pub fn design_gaussian_trig(mu: f64, tilde_e0: f64, tilde_e1: f64, eps_prime: f64, eps_g: f64) -> Result<GaussianDesign> {
    let target = GaussianTarget::new(tilde_e0, tilde_e1, eps_prime, eps_g)?;
    if !(mu.abs() <= 1.0) {
        return invalid(format!("center {mu} outside [-1, 1]"));
    }
    let l = 1.0 + tilde_e0.abs().max(mu.abs());
    let k0 = ((2f64.sqrt() * l / (PI * target.sigma)) * (1.0 / eps_g).ln().sqrt()).ceil().max(1.0) as usize;
    let grid = verify_grid();
    let mut k = k0;
    let mut last = f64::NAN;
    while k <= 4 * k0 {
        let f = bounded(gaussian_trig_series(mu, tilde_e0, target.sigma, k)?)?;
        let dev = max_deviation(&f, &target, &grid);
        if dev <= eps_g {
            return Ok(GaussianDesign { order: f.order(), series: f, target, max_deviation: dev });
        }
        last = dev;
        k = (k + 1).max((k as f64 * 1.25).ceil() as usize);
    }
    Err(Error::Invalid(format!("Gaussian trig design failed: deviation {last:.3e} > eps_g {eps_g:.3e} after 4x growth")))
}

/// Chebyshev coefficients of h on [-1, 1] from `nodes` first-kind nodes.
pub fn chebyshev_coefficients(h: impl Fn(f64) -> f64, degree: usize, nodes: usize) -> Vec<f64> {
    let vals: Vec<(f64, f64)> = (0..nodes)
        .map(|j| {
            let th = PI * (j as f64 + 0.5) / nodes as f64;
            (th, h(th.cos()))
        })
        .collect();
    (0..=degree)
        .map(|k| {
            let s: f64 = vals.iter().map(|(th, v)| v * (k as f64 * th).cos()).sum();
            let a = 2.0 * s / nodes as f64;
            if k == 0 {
                a / 2.0
            } else {
                a
            }
        })
        .collect()
}

pub fn design_gaussian_cheb(mu: f64, tilde_e0: f64, tilde_e1: f64, eps_prime: f64, eps_g: f64) -> Result<GaussianDesign> {
    let target = GaussianTarget::new(tilde_e0, tilde_e1, eps_prime, eps_g)?;
    if !(mu.abs() <= 1.0) {
        return invalid(format!("center {mu} outside [-1, 1]"));
    }
    let l = 1.0 + mu.abs();
    let grid = verify_grid();
    let h = |y: f64| target.eval(mu + l * y);
    let spread = (1.0 - 3.0 * eps_prime).max(0.05) * (tilde_e1 - tilde_e0);
    let start = ((5.0 * E / (2.0 * spread)) * (4.0 / eps_g).ln()).ceil().max(8.0) as usize;
    let mut nmax = start;
    let mut last = f64::NAN;
    while nmax <= 4 * start {
        let full = chebyshev_coefficients(h, nmax, 4 * nmax);
        let build = |n: usize| -> Result<(FilterSeries, f64)> {
            let f = bounded(FilterSeries::from_real(Basis::Chebyshev, &full[..=n], mu)?)?;
            let d = max_deviation(&f, &target, &grid);
            Ok((f, d))
        };
        let (top, dtop) = build(nmax)?;
        if dtop <= eps_g {
            let (mut lo, mut hi) = (0usize, nmax);
            let mut best = (top, dtop);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                let (f, d) = build(mid)?;
                if d <= eps_g {
                    hi = mid;
                    best = (f, d);
                } else {
                    lo = mid;
                }
            }
            let (series, dev) = best;
            return Ok(GaussianDesign { order: series.order(), series, target, max_deviation: dev });
        }
        last = dtop;
        nmax *= 2;
    }
    Err(Error::Invalid(format!("Gaussian Chebyshev design failed: deviation {last:.3e} > eps_g {eps_g:.3e}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimaxDesign {
    pub series: FilterSeries,
    pub delta: f64,
    pub n: usize,
    pub eps_n: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

pub fn minimax_poly_eps(delta: f64, n: usize) -> f64 {
    1.0 / chebyshev_t(n, 1.0 + 2.0 / (delta.powi(-2) - 1.0))
}

pub fn minimax_trig_eps(delta: f64, n: usize) -> f64 {
    1.0 / chebyshev_t(n, 1.0 + 2.0 * (PI * delta / 2.0).tan().powi(2))
}

/// f(x) = eps_N T_N((delta^2 + 1 - 2x^2) / (1 - delta^2)), a degree 2N polynomial with f(0) = 1.
pub fn design_cheb_minimax_poly(delta: f64, n: usize) -> Result<MinimaxDesign> {
    check_delta(delta)?;
    if n == 0 {
        return invalid("minimax order must be at least 1");
    }
    let eps_n = minimax_poly_eps(delta, n);
    let d2 = delta * delta;
    let f = |x: f64| eps_n * chebyshev_t(n, (d2 + 1.0 - 2.0 * x * x) / (1.0 - d2));
    let c = chebyshev_coefficients(f, 2 * n, 4 * n + 2);
    let c: Vec<f64> = c.iter().enumerate().map(|(k, v)| if k % 2 == 1 { 0.0 } else { *v }).collect();
    Ok(MinimaxDesign { series: FilterSeries::from_real(Basis::Chebyshev, &c, 0.0)?, delta, n, eps_n })
}

/// Dolph-Chebyshev: f(x) = eps_N T_N(1 + 2 (cos(pi x) - cos(pi delta)) / (1 + cos(pi delta))).
pub fn design_cheb_minimax_trig(delta: f64, n: usize) -> Result<MinimaxDesign> {
    check_delta(delta)?;
    if n == 0 {
        return invalid("minimax order must be at least 1");
    }
    let eps_n = minimax_trig_eps(delta, n);
    let cd = (PI * delta).cos();
    let f = |x: f64| eps_n * chebyshev_t(n, 1.0 + 2.0 * ((PI * x).cos() - cd) / (1.0 + cd));
    let p = 4 * n + 1;
    let samples: Vec<(f64, f64)> = (0..p)
        .map(|j| {
            let x = -1.0 + 2.0 * j as f64 / p as f64;
            (x, f(x))
        })
        .collect();
    let mut coeffs = Vec::with_capacity(2 * n + 1);
    for j in 0..=2 * n {
        let m = j as f64 - n as f64;
        let s: f64 = samples.iter().map(|(x, v)| v * (PI * m * x).cos()).sum();
        coeffs.push(s / p as f64);
    }
    // symmetrize against rounding so the series is exactly even
    for j in 0..n {
        let avg = 0.5 * (coeffs[j] + coeffs[2 * n - j]);
        coeffs[j] = avg;
        coeffs[2 * n - j] = avg;
    }
    Ok(MinimaxDesign { series: FilterSeries::from_real(Basis::Trig, &coeffs, 0.0)?, delta, n, eps_n })
}

pub fn kaiser_beta(delta: f64, n: usize) -> f64 {
    (PI * delta * n as f64 / 2.0).max(0.0)
}

pub fn kaiser_with_beta(beta: f64, n: usize) -> Result<FilterSeries> {
    if n == 0 {
        return invalid("Kaiser order must be at least 1");
    }
    let i0b = bessel_i0_scaled(beta);
    let w: Vec<f64> = (0..=n)
        .map(|k| {
            let r = 2.0 * k as f64 / n as f64 - 1.0;
            let s = (1.0 - r * r).max(0.0).sqrt();
            bessel_i0_scaled(beta * s) / i0b * (beta * (s - 1.0)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    let c: Vec<f64> = w.iter().map(|v| v / total).collect();
    FilterSeries::from_real(Basis::Trig, &c, 0.0)
}

pub fn design_kaiser_trig(delta: f64, n: usize) -> Result<FilterSeries> {
    check_delta(delta)?;
    kaiser_with_beta(kaiser_beta(delta, n), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reject_band_scan(f: &FilterSeries, delta: f64, points: usize) -> Vec<(f64, f64)> {
        (0..=points)
            .map(|j| {
                let x = delta + (1.0 - delta) * j as f64 / points as f64;
                (x, f.eval(x).re)
            })
            .collect()
    }

    fn alternations(scan: &[(f64, f64)], eps: f64) -> usize {
        let mut count = 0;
        let mut last_sign = 0.0;
        for &(_, v) in scan {
            if (v.abs() - eps).abs() <= 1e-8 && v.signum() != last_sign {
                count += 1;
                last_sign = v.signum();
            }
        }
        count
    }

    #[test]
    fn gaussian_trig_example() {
        let d = design_gaussian_trig(0.0, 0.0, 0.5, 0.0, 0.01).unwrap();
        let f0 = d.series.eval(0.0).norm();
        assert!((f0 - 1.0).abs() <= 0.01);
        assert!(d.series.eval(0.5).norm() <= 0.02 && d.series.eval(-0.5).norm() <= 0.02);
        for dx in [0.05, 0.2, 0.37, 0.8] {
            assert!((d.series.eval(dx).norm() - d.series.eval(-dx).norm()).abs() < 1e-10);
        }
        assert!(d.max_deviation <= 0.01);
        assert!((d.target.eval(0.0) - 1.0).abs() == 0.0);
    }

    #[test]
    fn gaussian_trig_shifted_center() {
        let d = design_gaussian_trig(-0.4, -0.4, -0.35, 0.1, 0.005).unwrap();
        assert_eq!(d.series.half_period(), 1.4);
        assert!(d.max_deviation <= 0.005);
        assert!(d.series.sup_norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn gaussian_rejects_bad_params() {
        assert!(design_gaussian_trig(0.0, 0.0, 0.5, 0.0, 1.0).is_err());
        assert!(design_gaussian_trig(0.0, 0.0, -0.5, 0.0, 0.1).is_err());
        assert!(design_gaussian_cheb(0.0, 0.0, 0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn gaussian_cheb_example_and_parity() {
        let d = design_gaussian_cheb(0.0, 0.0, 0.5, 0.0, 0.01).unwrap();
        assert!((d.series.eval(0.0).norm() - 1.0).abs() <= 0.01);
        assert!(d.series.eval(0.5).norm() <= 0.02);
        for (k, c) in d.series.coeffs().iter().enumerate() {
            if k % 2 == 1 {
                assert!(c.norm() < 1e-12);
            }
        }
        let bound = ((5.0 * E / (2.0 * 0.5)) * (4.0f64 / 0.01).ln()).ceil() as usize;
        assert!(d.order <= bound, "{} > {bound}", d.order);
        // one degree less fails verification
        let full = chebyshev_coefficients(|y| d.target.eval(y), d.order, 4 * d.order);
        let shorter = FilterSeries::from_real(Basis::Chebyshev, &full[..d.order - 1], 0.0).unwrap();
        assert!(max_deviation(&shorter, &d.target, &verify_grid()) > 0.01);
    }

    #[test]
    fn minimax_closed_forms() {
        assert!((minimax_poly_eps(0.5f64.sqrt(), 1) - 1.0 / 3.0).abs() < 1e-14);
        assert!((minimax_trig_eps(0.5, 1) - 1.0 / 3.0).abs() < 1e-14);
        assert!((minimax_trig_eps(0.5, 2) - 1.0 / 17.0).abs() < 1e-14);
        assert!(design_cheb_minimax_poly(1.0, 3).is_err());
        assert!(design_cheb_minimax_trig(0.0, 3).is_err());
    }

    #[test]
    fn minimax_unit_peak() {
        for &(d, n) in &[(0.3, 8usize), (0.1, 3), (0.6, 5)] {
            let p = design_cheb_minimax_poly(d, n).unwrap();
            assert!((p.series.eval(0.0).re - 1.0).abs() < 1e-10);
            let t = design_cheb_minimax_trig(d, n).unwrap();
            assert!((t.series.eval(0.0).re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn poly_minimax_equioscillates() {
        let d = design_cheb_minimax_poly(0.3, 8).unwrap();
        let scan = reject_band_scan(&d.series, 0.3, 20000);
        let peak = scan.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        assert!((peak - d.eps_n).abs() < 1e-8);
        assert!(alternations(&scan, d.eps_n) >= 9);
    }

    #[test]
    fn dolph_symmetric_coefficients_and_unit_sup() {
        let d = design_cheb_minimax_trig(0.2, 8).unwrap();
        let c = d.series.coeffs();
        for k in 0..c.len() {
            assert!((c[k] - c[c.len() - 1 - k]).norm() < 1e-12);
            assert!(c[k].im.abs() < 1e-12);
        }
        assert!((d.series.sup_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kaiser_window_properties() {
        let r = kaiser_with_beta(0.0, 10).unwrap();
        let c0 = r.coeffs()[0];
        assert!(r.coeffs().iter().all(|c| (c - c0).norm() < 1e-15));
        let k = design_kaiser_trig(0.2, 32).unwrap();
        assert!((k.eval(0.0).re - 1.0).abs() < 1e-12);
        let rect = kaiser_with_beta(0.0, 32).unwrap();
        let side = |f: &FilterSeries| (0..=4000).map(|j| f.eval(0.2 + 0.8 * j as f64 / 4000.0).norm()).fold(0.0, f64::max);
        assert!(side(&k) < side(&rect));
    }
}
