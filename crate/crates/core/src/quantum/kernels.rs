//! Divided differences of `ln`, which give the integrals
//! `int_0^inf ds / prod_i (l_i + s)` in closed form.

/// `(ln a - ln b) / (a - b)`, equal to `int_0^inf ds / ((a+s)(b+s))`.
pub fn log_dd1(a: f64, b: f64) -> f64 {
    if a == b {
        return 1.0 / a;
    }
    let x = (a - b) / (a + b);
    if x.abs() < 1e-4 {
        let x2 = x * x;
        let r = 1.0 + x2 / 3.0 + x2 * x2 / 5.0 + x2 * x2 * x2 / 7.0;
        2.0 * r / (a + b)
    } else {
        (a.ln() - b.ln()) / (a - b)
    }
}

/// Second divided difference of `ln`.
pub fn log_dd2(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(f64::total_cmp);
    let [lo, mid, hi] = v;
    if hi - lo <= 1e-3 * hi {
        let m = (lo + mid + hi) / 3.0;
        let d = [lo - m, mid - m, hi - m];
        let p: Vec<f64> = (1..=8).map(|i| d.iter().map(|x| x.powi(i)).sum()).collect();
        let mut h = vec![1.0];
        for k in 1..=8usize {
            let s: f64 = (1..=k).map(|i| p[i - 1] * h[k - i]).sum();
            h.push(s / k as f64);
        }
        let mut total = 0.0;
        for (k, hk) in h.iter().enumerate() {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            total += sign * hk / ((k as f64 + 2.0) * m.powi(k as i32 + 2));
        }
        total
    } else {
        (log_dd1(mid, hi) - log_dd1(lo, mid)) / (hi - lo)
    }
}

/// `int_0^inf ds / ((a+s)(b+s)(c+s))`.
pub fn triple_integral(a: f64, b: f64, c: f64) -> f64 {
    -log_dd2(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_half_line;

    #[test]
    fn pair_kernel_against_quadrature() {
        for (a, b) in [(0.3, 0.7), (0.5, 0.5), (0.2, 0.2 + 1e-9), (1e-3, 0.9)] {
            let q = integrate_half_line(&|s| 1.0 / ((a + s) * (b + s)), 1e-13);
            assert!((log_dd1(a, b) - q).abs() < 1e-10 * q, "{a} {b}");
        }
    }

    #[test]
    fn triple_kernel_against_quadrature() {
        for (a, b, c) in [
            (0.1, 0.4, 0.5),
            (0.3, 0.3, 0.3),
            (0.3, 0.3 + 1e-7, 0.3 - 2e-7),
            (0.3, 0.3, 0.6),
            (0.05, 0.05 + 1e-5, 0.9),
        ] {
            let q = integrate_half_line(&|s| 1.0 / ((a + s) * (b + s) * (c + s)), 1e-13);
            assert!((triple_integral(a, b, c) - q).abs() < 1e-10 * q, "{a} {b} {c}");
        }
        assert!((triple_integral(0.5, 0.5, 0.5) - 2.0).abs() < 1e-14);
    }
}
