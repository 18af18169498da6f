//! Zeta values, tails and a bracketing root finder.

pub const ZETA2: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

/// `sum_{y > t} y^{-s}` for `s > 1` by Euler-Maclaurin with the first terms summed directly.
pub fn zeta_tail(s: f64, t: u64) -> f64 {
    let direct_to = t.max(50) + 50;
    let mut sum = 0.0;
    for y in (t + 1)..=direct_to {
        sum += (y as f64).powf(-s);
    }
    let n = direct_to as f64;
    // sum_{y > n} y^{-s} ~ n^{1-s}/(s-1) - n^{-s}/2 + s n^{-s-1}/12 - ...
    sum + n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * n.powf(-s - 5.0) / 30240.0
}

/// `sum_{y >= 1} y^{-2} ln y`, i.e. `-zeta'(2)`.
pub fn neg_zeta_prime_2() -> f64 {
    // Euler-Maclaurin on f(y) = ln y / y^2 past N terms.
    let n_direct = 2000u64;
    let mut s = 0.0;
    for y in 1..=n_direct {
        let yf = y as f64;
        s += yf.ln() / (yf * yf);
    }
    let n = n_direct as f64;
    let ln = n.ln();
    // integral_n^inf ln y / y^2 = (ln n + 1)/n ; f(n)/2 ; -f'(n)/12
    let f = ln / (n * n);
    let fp = (1.0 - 2.0 * ln) / (n * n * n);
    s + (ln + 1.0) / n - 0.5 * f - fp / 12.0
}

/// Bisection on a sign change of `f` over `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
