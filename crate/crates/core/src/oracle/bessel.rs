//! Integer-order Bessel functions of the first and second kind and their zeros.

use std::f64::consts::{FRAC_2_PI, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Above this argument `Y_0`, `Y_1` switch from power series to the Hankel expansion.
const ASYMPTOTIC_FROM: f64 = 25.0;

fn series_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_0(x), …, J_nmax(x)` for `x > 0` by Miller's backward recurrence, normalized
/// by `J_0 + 2ΣJ_{2k} = 1`.
fn j_sequence(nmax: u32, x: f64) -> Vec<f64> {
    let start = 2 * ((nmax.max(x as u32) + 30 + (x.sqrt() * 6.0) as u32) / 2);
    let mut values = vec![0.0; start as usize + 2];
    values[start as usize] = 1e-300;
    let mut norm = 0.0;
    for k in (1..=start as usize).rev() {
        values[k - 1] = 2.0 * k as f64 / x * values[k] - values[k + 1];
        if (k - 1) % 2 == 0 {
            norm += if k == 1 { values[0] } else { 2.0 * values[k - 1] };
        }
        if values[k - 1].abs() > 1e250 {
            values[k - 1..].iter_mut().for_each(|v| *v *= 1e-250);
            norm *= 1e-250;
        }
    }
    values.truncate(start as usize);
    values.iter_mut().for_each(|v| *v /= norm);
    values
}

/// `J_n(x)`: power series for `|x| ≤ 1`, backward recurrence otherwise.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(n, -x);
        return if n % 2 == 1 { -v } else { v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= 1.0 {
        return series_j(n, x);
    }
    j_sequence(n, x)[n as usize]
}

fn hankel_pq(n: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n * n) as f64;
    let (mut p, mut q) = (1.0, (mu - 1.0) / (8.0 * x));
    let mut term = 1.0;
    let mut k = 1;
    loop {
        let a = (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (k as f64 * 8.0 * x);
        term *= a;
        if k % 2 == 0 {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            p += sign * term;
        } else if k > 1 {
            let sign = if (k / 2) % 2 == 1 { -1.0 } else { 1.0 };
            q += sign * term;
        }
        if term.abs() < 1e-17 || k > 40 {
            break;
        }
        k += 1;
    }
    (p, q)
}

fn asymptotic_y(n: u32, x: f64) -> f64 {
    let (p, q) = hankel_pq(n, x);
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    (FRAC_2_PI / x).sqrt() * (p * chi.sin() + q * chi.cos())
}

/// `(Y_0(x), Y_1(x))` from the Neumann series
/// `Y_0 = (2/π)(ln(x/2) + γ)J_0 − (4/π)Σ_{k≥1}(−1)^k J_{2k}/k` and its derivative
/// `Y_1 = −Y_0′`, with Hankel's expansion for large arguments.
fn y01(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_FROM {
        return (asymptotic_y(0, x), asymptotic_y(1, x));
    }
    let j: Vec<f64> = if x <= 1.0 {
        (0..40).map(|n| series_j(n, x)).collect()
    } else {
        j_sequence(0, x)
    };
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let (mut s0, mut s1) = (0.0, 0.0);
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / (2 * k) as f64;
        k += 1;
    }
    let y0 = FRAC_2_PI * log_term * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * (j[0] / x - log_term * j[1]) + 2.0 * FRAC_2_PI * s1;
    (y0, y1)
}

/// `Y_n(x)` for `x > 0`, by forward recurrence from `Y_0` and `Y_1`.
pub fn bessel_y(n: u32, x: f64) -> f64 {
    assert!(x > 0.0, "Y_n is singular at x ≤ 0");
    let (mut a, mut b) = y01(x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * k as f64 / x * b - a;
        a = b;
        b = c;
    }
    b
}

/// `J_n′(x)`.
pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// `Y_n′(x)`.
pub fn bessel_y_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_y(1, x)
    } else {
        0.5 * (bessel_y(n - 1, x) - bessel_y(n + 1, x))
    }
}

/// Root of `f` in a sign-changing bracket, to machine precision.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive zeros of `J_m` below `limit`, ascending.
///
/// Zeros of `J_0` are bracketed on a grid finer than half their spacing; those of
/// `J_m` follow from the interlacing `j_{m−1,k} < j_{m,k} < j_{m−1,k+1}`.
pub fn bessel_j_zeros(m: u32, limit: f64) -> Vec<f64> {
    if m == 0 {
        let step = 0.25;
        let mut zeros = Vec::new();
        let mut x = step;
        let mut fx = bessel_j(0, x);
        while x < limit {
            let xn = x + step;
            let fn_ = bessel_j(0, xn);
            if (fx < 0.0) != (fn_ < 0.0) {
                let z = bisect(|s| bessel_j(0, s), x, xn);
                if z < limit {
                    zeros.push(z);
                }
            }
            x = xn;
            fx = fn_;
        }
        return zeros;
    }
    let lower = bessel_j_zeros(m - 1, limit + PI + 1.0);
    lower
        .windows(2)
        .map(|w| bisect(|s| bessel_j(m, s), w[0], w[1]))
        .filter(|&z| z < limit)
        .collect()
}

/// Positive zeros of `J_m′` below `limit`, ascending. For `m = 0` these are the
/// zeros of `J_1`; the trivial zero at the origin is not included.
pub fn bessel_j_prime_zeros(m: u32, limit: f64) -> Vec<f64> {
    if m == 0 {
        return bessel_j_zeros(1, limit);
    }
    let zeros = bessel_j_zeros(m, limit + PI + 1.0);
    let mut left = m as f64;
    let mut out = Vec::new();
    for &right in &zeros {
        if left >= limit {
            break;
        }
        let z = bisect(|s| bessel_j_prime(m, s), left, right);
        if z < limit {
            out.push(z);
        }
        left = right;
    }
    out
}
