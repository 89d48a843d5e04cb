use crate::error::{Error, Result};

/// Principal branch of Lambert W on [0, inf).
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Invalid(format!("lambert_w0 needs a finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0f64.max((1.0 + x).ln()) + 1.0;
    let f = |w: f64| w * w.exp() - x;
    let mut w = (1.0 + x).ln().clamp(lo, hi);
    for _ in 0..200 {
        let fw = f(w);
        if fw == 0.0 {
            return Ok(w);
        }
        if fw > 0.0 {
            hi = w;
        } else {
            lo = w;
        }
        let step = fw / (w.exp() * (1.0 + w));
        let mut next = w - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - w).abs() <= 1e-15 * w.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

/// J_0..=J_kmax at t by Miller's downward recurrence,
/// normalized with J_0 + 2 sum J_{2m} = 1.
pub fn bessel_j_all(kmax: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let at = t.abs();
    let big = (kmax as f64).max(at);
    let mut m = (big + 30.0 + (40.0 * big).sqrt()).ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    let mut jp1 = 0.0f64;
    let mut j = 1e-30f64;
    let mut norm = 0.0f64;
    let mut tmp = vec![0.0; m + 1];
    tmp[m] = j;
    if m % 2 == 0 {
        norm += 2.0 * j;
    }
    for n in (1..=m).rev() {
        let jm1 = (2.0 * n as f64 / at) * j - jp1;
        jp1 = j;
        j = jm1;
        tmp[n - 1] = j;
        let idx = n - 1;
        if idx == 0 {
            norm += j;
        } else if idx % 2 == 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            let s = 1e-250;
            for v in tmp[n - 1..].iter_mut() {
                *v *= s;
            }
            j *= s;
            jp1 *= s;
            norm *= s;
        }
    }
    for k in 0..=kmax {
        let mut v = tmp[k] / norm;
        if t < 0.0 && k % 2 == 1 {
            v = -v;
        }
        out[k] = v;
    }
    out
}

pub fn bessel_j(k: usize, t: f64) -> f64 {
    bessel_j_all(k, t)[k]
}

/// e^{-|x|} I_0(x).
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 30.0 {
        let q = 0.25 * ax * ax;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-ax).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= (2.0 * kf - 1.0).powi(2) / (8.0 * kf * ax);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * ax).sqrt()
    }
}

pub fn bessel_i0(x: f64) -> f64 {
    bessel_i0_scaled(x) * x.abs().exp()
}

/// Chebyshev T_n(x) for any real x.
pub fn chebyshev_t(n: usize, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (n as f64 * x.acos()).cos()
    } else if x > 1.0 {
        (n as f64 * x.acosh()).cosh()
    } else {
        let v = (n as f64 * (-x).acosh()).cosh();
        if n % 2 == 0 {
            v
        } else {
            -v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn bisect_w(x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 50.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambert_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-14);
        let x = 800.0 * PI;
        let w = lambert_w0(x).unwrap();
        assert!((w - bisect_w(x)).abs() < 1e-12);
        assert!((w - 6.0322).abs() < 1e-4);
        assert!(lambert_w0(-1e-3).is_err());
    }

    #[test]
    fn lambert_round_trip_log_grid() {
        for i in 0..=240 {
            let x = 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0);
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-10 * x.max(1.0), "x={x}");
        }
    }

    fn j_series(k: usize, t: f64) -> f64 {
        let mut term = (0.5 * t).powi(k as i32) / (1..=k).map(|i| i as f64).product::<f64>();
        let mut sum = term;
        for m in 1..60 {
            term *= -(0.25 * t * t) / (m as f64 * (m + k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_j_against_series() {
        for &t in &[0.1, 0.5, 2.0, 3.7, 6.0] {
            for k in 0..8 {
                assert!((bessel_j(k, t) - j_series(k, t)).abs() < 1e-12, "k={k} t={t}");
            }
        }
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(1, 0.0), 0.0);
        assert!((bessel_j(3, -2.0) + j_series(3, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn bessel_j_square_sum_identity() {
        let js = bessel_j_all(80, 3.7);
        let s: f64 = js[0] * js[0] + 2.0 * js[1..].iter().map(|j| j * j).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bessel_j_recurrence() {
        for &t in &[0.5, 2.0, 10.0] {
            let js = bessel_j_all(21, t);
            for k in 1..=20 {
                let lhs = js[k - 1] + js[k + 1];
                let rhs = 2.0 * k as f64 / t * js[k];
                assert!((lhs - rhs).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn bessel_j_large_argument() {
        // J_0(100) reference value
        assert!((bessel_j(0, 100.0) - 0.019985850304223122).abs() < 1e-10);
    }

    #[test]
    fn i0_values() {
        assert_eq!(bessel_i0(0.0), 1.0);
        assert_eq!(bessel_i0(2.5), bessel_i0(-2.5));
        let mut s = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            if k > 0 {
                term *= 0.25 / (k as f64 * k as f64);
            }
            s += term;
        }
        assert!((bessel_i0(1.0) - s).abs() < 1e-14);
        assert!((bessel_i0(1.0) - 1.26606588).abs() < 1e-8);
    }

    #[test]
    fn i0_branches_agree() {
        // series and asymptotic forms meet at the switch point
        let below = bessel_i0_scaled(30.0);
        let q = 0.25 * 30.5f64.powi(2);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * k as f64);
            sum += term;
        }
        let above_series = sum * (-30.5f64).exp();
        assert!((bessel_i0_scaled(30.5) - above_series).abs() < 1e-13 * above_series);
        assert!(below > 0.0);
    }

    #[test]
    fn chebyshev_outside_interval() {
        assert!((chebyshev_t(2, 3.0) - 17.0).abs() < 1e-10);
        assert!((chebyshev_t(3, -2.0) - (-26.0)).abs() < 1e-9);
        assert!((chebyshev_t(1, 0.3) - 0.3).abs() < 1e-15);
    }
}
