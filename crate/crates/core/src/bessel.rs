//! Integer-order Bessel functions of the first kind via Miller's downward
//! recurrence, normalized with J₀(x) + 2Σ J₂ₖ(x) = 1.

/// J_n(x) for any integer order and real argument.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let (n_abs, order_sign) = if n < 0 {
        (-(n as i64) as u32, if n % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (n as u32, 1.0)
    };
    let (ax, arg_sign) = if x < 0.0 {
        (-x, if n_abs % 2 == 0 { 1.0 } else { -1.0 })
    } else {
        (x, 1.0)
    };

    if ax == 0.0 {
        return if n_abs == 0 { 1.0 } else { 0.0 };
    }
    // Orders far beyond the argument are superexponentially small.
    if n_abs as f64 > 1.8 * ax + 90.0 {
        return 0.0;
    }

    // Start high enough that the downward recurrence has converged by n_abs.
    let mut start = (n_abs.max(ax.ceil() as u32) as i64) + 24 + (2.0 * ax.sqrt()) as i64;
    if start % 2 != 0 {
        start += 1;
    }

    let mut jp = 0.0f64; // J_{k+1}
    let mut j = 1e-30f64; // J_k
    let mut result = if n_abs as i64 == start { j } else { 0.0 };
    let mut even_sum = j; // Σ J_{2m} over 2m >= 2; start is even
    for k in (1..=start).rev() {
        let jm = (2.0 * k as f64 / ax) * j - jp; // J_{k-1}
        jp = j;
        j = jm;
        let km = k - 1;
        if km as u32 == n_abs && km >= n_abs as i64 {
            result = j;
        }
        if km % 2 == 0 && km > 0 {
            even_sum += j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    // j now holds J_0
    let norm = j + 2.0 * even_sum;
    order_sign * arg_sign * result / norm
}
