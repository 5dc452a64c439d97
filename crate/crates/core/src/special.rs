//! Bessel functions of integer order for real arguments.

use std::f64::consts::PI;

/// Below this argument the power series is used for `J_n`; above it the
/// Hankel asymptotic expansion (orders 0 and 1) or a recurrence.
const SERIES_MAX: f64 = 12.0;

fn j_series(n: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=n {
        term *= h / i as f64;
    }
    let q = -h * h;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k as f64 > h {
            break;
        }
        if k > 200 {
            break;
        }
    }
    sum
}

fn j_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let (mut p, mut q) = (0.0, 0.0);
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60u32 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        let t = a.abs();
        if t > last {
            break;
        }
        last = t;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if t < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_0(x)`.
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_MAX {
        j_series(0, x)
    } else {
        j_asymptotic(0, x)
    }
}

/// `J_1(x)`.
pub fn j1(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    s * if x <= SERIES_MAX {
        j_series(1, x)
    } else {
        j_asymptotic(1, x)
    }
}

/// `J_n(x)` for integer `n`.
pub fn jn(n: i32, x: f64) -> f64 {
    let parity = |m: i32| if m % 2 == 0 { 1.0 } else { -1.0 };
    if n < 0 {
        return parity(n) * jn(-n, x);
    }
    if x < 0.0 {
        return parity(n) * jn(n, -x);
    }
    match n {
        0 => j0(x),
        1 => j1(x),
        _ if x == 0.0 => 0.0,
        _ if x <= SERIES_MAX => j_series(n as u32, x),
        _ if (n as f64) < x => {
            // forward recurrence is stable while n < x
            let (mut a, mut b) = (j0(x), j1(x));
            for k in 1..n {
                let c = 2.0 * k as f64 / x * b - a;
                a = b;
                b = c;
            }
            b
        }
        _ => miller(n, x),
    }
}

/// Backward recurrence normalised by `J_0`.
fn miller(n: i32, x: f64) -> f64 {
    let start = 2 * ((n.max(x as i32) + 20 + (40.0 * x.max(1.0)).sqrt() as i32) / 2);
    let (mut above, mut cur) = (0.0f64, 1e-300f64);
    let mut want = 0.0;
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * cur - above;
        above = cur;
        cur = below;
        if k - 1 == n {
            want = cur;
        }
        if cur.abs() > 1e250 {
            above *= 1e-250;
            cur *= 1e-250;
            want *= 1e-250;
        }
    }
    want * j0(x) / cur
}

/// `dJ_n/dx`.
pub fn jn_prime(n: i32, x: f64) -> f64 {
    0.5 * (jn(n - 1, x) - jn(n + 1, x))
}

/// Exponentially scaled modified Bessel function `e^x K_n(x)` for `x > 0`.
///
/// Uses `K_n(x) = ∫_0^∞ e^{-x cosh t} cosh(n t) dt` with the trapezoid rule,
/// which converges geometrically for this entire, doubly decaying integrand.
pub fn kn_scaled(n: i32, x: f64) -> f64 {
    assert!(x > 0.0, "kn_scaled needs x > 0");
    let n = n.unsigned_abs() as f64;
    let h = 0.05;
    let mut sum = 0.5;
    let mut i = 1u32;
    loop {
        let t = i as f64 * h;
        let f = (-x * (t.cosh() - 1.0) + n * t).exp() * (1.0 + (-2.0 * n * t).exp()) * 0.5;
        sum += f;
        if f < 1e-18 * sum {
            break;
        }
        i += 1;
    }
    sum * h
}

/// `K_n(x)` for `x > 0`; underflows to 0 for very large `x`.
pub fn kn(n: i32, x: f64) -> f64 {
    kn_scaled(n, x) * (-x).exp()
}

pub fn k0(x: f64) -> f64 {
    kn(0, x)
}

pub fn k1(x: f64) -> f64 {
    kn(1, x)
}

/// `K_n'(x) / K_n(x)`.
pub fn kn_log_derivative(n: i32, x: f64) -> f64 {
    -0.5 * (kn_scaled(n - 1, x) + kn_scaled(n + 1, x)) / kn_scaled(n, x)
}

/// First zero of `J_0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;
