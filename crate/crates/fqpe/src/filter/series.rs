use crate::error::{invalid, Error, Result};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Chebyshev,
    Trig,
}

impl Basis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "chebyshev" | "cheb" | "poly" => Ok(Basis::Chebyshev),
            "trig" | "trigonometric" => Ok(Basis::Trig),
            _ => invalid(format!("unknown basis '{s}'")),
        }
    }
}

/// A filter f(x) on [-1, 1] expanded in a finite basis.
///
/// Chebyshev: f(x) = sum c_k T_k((x - mu) / L).
/// Trig:      f(x) = sum c_k exp(-i pi (k - floor(N/2)) (x - mu) / L).
/// In both cases L = 1 + |mu|.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSeries {
    basis: Basis,
    coeffs: Vec<C64>,
    center: f64,
    half_period: f64,
    sup_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct FilterSeriesJson {
    basis: Basis,
    coeffs: Vec<[f64; 2]>,
    center: f64,
    #[serde(rename = "L")]
    half_period: f64,
    sup_norm: f64,
}

impl Serialize for FilterSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FilterSeriesJson {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
            center: self.center,
            half_period: self.half_period,
            sup_norm: self.sup_norm,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FilterSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FilterSeriesJson::deserialize(d)?;
        let coeffs = j.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect();
        let f = FilterSeries::new(j.basis, coeffs, j.center).map_err(serde::de::Error::custom)?;
        if (f.half_period - j.half_period).abs() > 1e-12 {
            return Err(serde::de::Error::custom("L must equal 1 + |center|"));
        }
        Ok(f)
    }
}

pub const SUPNORM_TOL: f64 = 1e-10;

impl FilterSeries {
    pub fn new(basis: Basis, coeffs: Vec<C64>, center: f64) -> Result<Self> {
        let mut f = Self::unmeasured(basis, coeffs, center)?;
        f.sup_norm = f.measure_sup_norm(SUPNORM_TOL);
        Ok(f)
    }

    pub(crate) fn unmeasured(basis: Basis, coeffs: Vec<C64>, center: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return invalid("filter needs at least one coefficient");
        }
        if !(center.abs() <= 1.0) {
            return invalid(format!("center {center} outside [-1, 1]"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return invalid("non-finite filter coefficient");
        }
        Ok(FilterSeries { basis, coeffs, center, half_period: 1.0 + center.abs(), sup_norm: f64::NAN })
    }

    pub fn from_real(basis: Basis, coeffs: &[f64], center: f64) -> Result<Self> {
        Self::new(basis, coeffs.iter().map(|&c| C64::new(c, 0.0)).collect(), center)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// N: the index of the last coefficient.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Signed frequency of coefficient k (trig basis).
    pub fn frequency(&self, k: usize) -> i64 {
        k as i64 - (self.order() / 2) as i64
    }

    pub fn eval(&self, x: f64) -> C64 {
        match self.basis {
            Basis::Chebyshev => clenshaw(&self.coeffs, (x - self.center) / self.half_period),
            Basis::Trig => {
                let u = PI * (x - self.center) / self.half_period;
                let z = C64::from_polar(1.0, -u);
                let mut acc = C64::new(0.0, 0.0);
                for c in self.coeffs.iter().rev() {
                    acc = acc * z + c;
                }
                acc * C64::from_polar(1.0, u * (self.order() / 2) as f64)
            }
        }
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn scaled(&self, s: f64) -> FilterSeries {
        FilterSeries {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            center: self.center,
            half_period: self.half_period,
            sup_norm: self.sup_norm * s.abs(),
        }
    }

    /// Derivative df/dx as a series in the same basis.
    pub fn derivative(&self) -> FilterSeries {
        let coeffs = match self.basis {
            Basis::Trig => self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * C64::new(0.0, -PI * self.frequency(k) as f64 / self.half_period))
                .collect(),
            Basis::Chebyshev => {
                let n = self.order();
                if n == 0 {
                    vec![C64::new(0.0, 0.0)]
                } else {
                    let mut d = vec![C64::new(0.0, 0.0); n + 1];
                    for k in (1..=n).rev() {
                        let next = if k < n { d[k + 1] } else { C64::new(0.0, 0.0) };
                        d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
                    }
                    d[0] *= 0.5;
                    d.truncate(n);
                    d.iter().map(|c| c / self.half_period).collect()
                }
            }
        };
        let mut f = FilterSeries {
            basis: self.basis,
            coeffs,
            center: self.center,
            half_period: self.half_period,
            sup_norm: f64::NAN,
        };
        f.sup_norm = f.measure_sup_norm(SUPNORM_TOL);
        f
    }

    /// Dense grid values (x, f(x)) covering [-1, 1] with at least 8(N+1)+1 points.
    pub(crate) fn dense_grid(&self) -> Vec<(f64, C64)> {
        let n = self.order();
        let target = 8 * (n + 1) + 1;
        let mut pts = if n < 48 { self.direct_grid(target) } else { self.fft_grid(target) };
        for x in [-1.0, 1.0] {
            pts.push((x, self.eval(x)));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    }

    fn direct_grid(&self, g: usize) -> Vec<(f64, C64)> {
        (0..g)
            .map(|j| {
                let x = -(PI * j as f64 / (g - 1) as f64).cos();
                (x, self.eval(x))
            })
            .collect()
    }

    fn fft_grid(&self, target: usize) -> Vec<(f64, C64)> {
        let n = self.order();
        let scale = self.half_period;
        let mut planner = FftPlanner::<f64>::new();
        match self.basis {
            Basis::Trig => {
                // u_j = -pi + 2 pi j / P over the full period; keep points inside [-1,1].
                let p = ((target as f64 * scale).ceil() as usize).max(n + 1).next_power_of_two();
                let mut buf = vec![C64::new(0.0, 0.0); p];
                for (k, c) in self.coeffs.iter().enumerate() {
                    buf[k] = if k % 2 == 0 { *c } else { -c };
                }
                planner.plan_fft_forward(p).process(&mut buf);
                let h = (n / 2) as f64;
                let mut out = Vec::with_capacity(p);
                for (j, v) in buf.iter().enumerate() {
                    let u = -PI + 2.0 * PI * j as f64 / p as f64;
                    let x = self.center + scale * u / PI;
                    if (-1.0..=1.0).contains(&x) {
                        out.push((x, v * C64::from_polar(1.0, h * u)));
                    }
                }
                out
            }
            Basis::Chebyshev => {
                // y_j = cos(pi j / M), j = 0..M, via an even extension of length 2M.
                let m = ((target as f64 * scale).ceil() as usize).max(n + 1).next_power_of_two();
                let mut buf = vec![C64::new(0.0, 0.0); 2 * m];
                for (k, c) in self.coeffs.iter().enumerate() {
                    buf[k] = *c;
                    if k > 0 {
                        buf[2 * m - k] = *c;
                    }
                }
                planner.plan_fft_forward(2 * m).process(&mut buf);
                let c0 = self.coeffs[0];
                let mut out = Vec::with_capacity(m + 1);
                for (j, v) in buf.iter().enumerate().take(m + 1) {
                    let y = (PI * j as f64 / m as f64).cos();
                    let x = self.center + scale * y;
                    if (-1.0..=1.0).contains(&x) {
                        out.push((x, 0.5 * (v + c0)));
                    }
                }
                out
            }
        }
    }

    /// max |f| over [-1, 1]: dense grid, then golden-section refinement of the top 3 local maxima.
    pub fn measure_sup_norm(&self, tol: f64) -> f64 {
        let grid = self.dense_grid();
        let mags: Vec<f64> = grid.iter().map(|(_, v)| v.norm()).collect();
        let mut best = mags.iter().cloned().fold(0.0, f64::max);
        let mut peaks: Vec<usize> = (0..grid.len())
            .filter(|&j| {
                let left = j == 0 || mags[j] >= mags[j - 1];
                let right = j + 1 == grid.len() || mags[j] >= mags[j + 1];
                left && right
            })
            .collect();
        peaks.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
        for &j in peaks.iter().take(3) {
            let lo = grid[j.saturating_sub(1)].0;
            let hi = grid[(j + 1).min(grid.len() - 1)].0;
            let v = golden_max(|x| self.eval(x).norm(), lo, hi, tol);
            best = best.max(v);
        }
        best
    }
}

/// Clenshaw evaluation of sum c_k T_k(y).
pub fn clenshaw(c: &[C64], y: f64) -> C64 {
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * y * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + y * b1 - b2
}

pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = f(a).max(f(b)).max(fc).max(fd);
    let xtol = tol.sqrt().max(1e-13);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
            best = best.max(fd);
        }
    }
    best
}

/// Divide by the sup norm so that max |f| = 1.
pub fn normalize_filter(f: &FilterSeries) -> Result<FilterSeries> {
    let s = f.sup_norm();
    if !(s > 0.0) {
        return Err(Error::Invalid("cannot normalize an identically zero filter".into()));
    }
    let mut g = f.scaled(1.0 / s);
    g.sup_norm = 1.0;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(f: &FilterSeries, x: f64) -> C64 {
        let l = f.half_period();
        let y = (x - f.center()) / l;
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| match f.basis() {
                Basis::Chebyshev => c * crate::numerics::chebyshev_t(k, y),
                Basis::Trig => c * C64::from_polar(1.0, -PI * f.frequency(k) as f64 * y),
            })
            .sum()
    }

    fn random_series(basis: Basis, n: usize, center: f64, seed: u64) -> FilterSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        FilterSeries::new(basis, c, center).unwrap()
    }

    #[test]
    fn t1_at_half() {
        let f = FilterSeries::from_real(Basis::Chebyshev, &[0.0, 1.0], 0.0).unwrap();
        assert!((f.eval(0.5) - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((f.sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_frequency_term_is_constant() {
        let f = FilterSeries::from_real(Basis::Trig, &[0.0, 0.0, 1.0, 0.0, 0.0], 0.0).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.77] {
            assert!((f.eval(x) - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let g = FilterSeries::from_real(Basis::Chebyshev, &[0.3], 0.0).unwrap();
        assert!((g.sup_norm() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn matches_naive_sum() {
        for (i, basis) in [Basis::Chebyshev, Basis::Trig].into_iter().enumerate() {
            for center in [0.0, 0.4, -0.7] {
                let f = random_series(basis, 8, center, 7 + i as u64);
                for j in 0..20 {
                    let x = -1.0 + 2.0 * j as f64 / 19.0;
                    assert!((f.eval(x) - naive(&f, x)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fft_grid_matches_direct_evaluation() {
        for basis in [Basis::Chebyshev, Basis::Trig] {
            for center in [0.0, 0.35] {
                let f = random_series(basis, 81, center, 5);
                let grid = f.fft_grid(8 * 82 + 1);
                assert!(grid.len() >= 8 * 82 / 2);
                for (x, v) in grid.iter().step_by(17) {
                    assert!((f.eval(*x) - v).norm() < 1e-10, "{basis:?} x={x}");
                }
            }
        }
    }

    #[test]
    fn sup_norm_refinement_beats_fine_scan() {
        for basis in [Basis::Chebyshev, Basis::Trig] {
            for (n, seed) in [(6usize, 1u64), (30, 2), (120, 3)] {
                let f = random_series(basis, n, 0.2, seed);
                let scan = (0..=200_000).map(|j| f.eval(-1.0 + 2.0 * j as f64 / 200_000.0).norm()).fold(0.0, f64::max);
                assert!(f.sup_norm() >= scan - 1e-9, "{basis:?} n={n}");
                assert!(f.sup_norm() <= scan * (1.0 + 1e-6));
            }
        }
    }

    #[test]
    fn normalize_behaviour() {
        let f = FilterSeries::from_real(Basis::Chebyshev, &[2.0, 0.0], 0.0).unwrap();
        let g = normalize_filter(&f).unwrap();
        assert!((g.coeffs()[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        let h = normalize_filter(&g).unwrap();
        assert!(h.coeffs().iter().zip(g.coeffs()).all(|(a, b)| (a - b).norm() < 1e-12));
        let r = normalize_filter(&random_series(Basis::Trig, 12, 0.1, 9)).unwrap();
        let re = r.measure_sup_norm(SUPNORM_TOL);
        assert!((re - 1.0).abs() < 1e-9);
        let z = FilterSeries::from_real(Basis::Trig, &[0.0, 0.0], 0.0).unwrap();
        assert!(normalize_filter(&z).is_err());
    }

    #[test]
    fn derivative_series() {
        let f = FilterSeries::from_real(Basis::Chebyshev, &[0.0, 1.0], 0.0).unwrap();
        assert!((f.derivative().eval(0.3) - C64::new(1.0, 0.0)).norm() < 1e-14);
        for basis in [Basis::Chebyshev, Basis::Trig] {
            let f = random_series(basis, 9, -0.3, 4);
            let d = f.derivative();
            for x in [-0.9, -0.2, 0.5] {
                let h = 1e-5;
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                assert!((d.eval(x) - fd).norm() < 1e-6 * (1.0 + fd.norm()));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = random_series(Basis::Trig, 7, 0.25, 3);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"basis\":\"trig\"") && s.contains("\"L\":1.25"));
        let g: FilterSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(f.coeffs(), g.coeffs());
        assert!((f.sup_norm() - g.sup_norm()).abs() < 1e-15);
    }
}
