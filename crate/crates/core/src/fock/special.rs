//! Special functions for displaced number states.

use num_complex::Complex64;

/// Generalized Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence.
///
/// `k` may be negative as long as `k > -n - 1`.
pub fn assoc_laguerre(n: usize, k: i64, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for j in 1..n {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `|<m|D(α)|n>|²` as a function of `s = |α|²`.
///
/// Uses the Laguerre form for `m ≥ n` and the transition symmetry
/// `|<m|D(α)|n>|² = |<n|D(-α)|m>|²` otherwise. Evaluated in log space.
pub fn displaced_population(m: usize, n: usize, s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s == 0.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let (hi, lo) = if m >= n { (m, n) } else { (n, m) };
    let k = hi - lo;
    let lag = assoc_laguerre(lo, k as i64, s);
    if lag == 0.0 {
        return 0.0;
    }
    let ln_p = ln_factorial(lo) - ln_factorial(hi) + k as f64 * s.ln() - s + 2.0 * lag.abs().ln();
    ln_p.exp().min(1.0)
}

/// `e^{s} |<m|D(α)|n>|²`, a polynomial in `s`. Used by quadratures whose
/// weight function already carries the exponential.
pub(crate) fn displaced_population_scaled(m: usize, n: usize, s: f64) -> f64 {
    if s == 0.0 {
        return if m == n { 1.0 } else { 0.0 };
    }
    let (hi, lo) = if m >= n { (m, n) } else { (n, m) };
    let k = hi - lo;
    let lag = assoc_laguerre(lo, k as i64, s);
    if lag == 0.0 {
        return 0.0;
    }
    (ln_factorial(lo) - ln_factorial(hi) + k as f64 * s.ln() + 2.0 * lag.abs().ln()).exp()
}

/// Matrix element `<m|D(α)|n>` of the displacement operator.
pub fn displacement_amplitude(m: usize, n: usize, alpha: Complex64) -> Complex64 {
    let s = alpha.norm_sqr();
    if s == 0.0 {
        return if m == n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    let (hi, lo) = if m >= n { (m, n) } else { (n, m) };
    let k = hi - lo;
    let lag = assoc_laguerre(lo, k as i64, s);
    let magnitude = (0.5 * (ln_factorial(lo) - ln_factorial(hi)) + 0.5 * k as f64 * s.ln() - 0.5 * s).exp() * lag;
    // phase of α^k for m ≥ n, of (-α*)^k for m < n
    let unit = alpha / alpha.norm();
    let phase = if m >= n { unit.powu(k as u32) } else { (-unit.conj()).powu(k as u32) };
    phase * magnitude
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: u64, k: u64) -> i128 {
        if k > n {
            return 0;
        }
        (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
    }

    // explicit sum  Σ_i (-1)^i C(n+k, n-i) x^i / i!  in exact integers for x = num/den
    fn laguerre_sum(n: usize, k: i64, num: i128, den: i128) -> f64 {
        let top = n as i64 + k;
        let fact = |a: usize, b: usize| (a + 1..=b).fold(1i128, |acc, j| acc * j as i128);
        let total: i128 = (0..=n)
            .map(|i| {
                let c = if top < 0 { 0 } else { binomial(top as u64, (n - i) as u64) };
                let sign = if i % 2 == 0 { 1 } else { -1 };
                sign * c * num.pow(i as u32) * den.pow((n - i) as u32) * fact(i, n)
            })
            .sum();
        total as f64 / (den.pow(n as u32) * fact(0, n)) as f64
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(assoc_laguerre(0, 5, 3.7), 1.0);
        assert!((assoc_laguerre(1, 0, 2.0) + 1.0).abs() < 1e-15);
        assert!((laguerre_sum(2, 1, 2, 1) + 1.0).abs() < 1e-12);
        assert!((assoc_laguerre(2, 1, 2.0) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for n in 0..=12 {
            for k in -(n as i64)..=14 {
                for &(num, den) in &[(-20, 1), (-15, 2), (-1, 1), (0, 1), (3, 10), (2, 1), (11, 2), (11, 1), (20, 1)] {
                    let x = num as f64 / den as f64;
                    let a = assoc_laguerre(n, k, x);
                    let b = laguerre_sum(n, k, num, den);
                    let scale = b.abs().max(1.0);
                    assert!((a - b).abs() / scale < 1e-9, "n={n} k={k} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn displaced_population_examples() {
        let p = displaced_population(3, 0, 1.0);
        assert!((p - (-1.0f64).exp() / 6.0).abs() < 1e-14);
        assert!((displaced_population(4, 4, 0.0) - 1.0).abs() < 1e-15);
        assert!((displaced_population(0, 1, 1.0) - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn amplitude_squares_to_population() {
        let alpha = Complex64::new(0.4, -0.7);
        for m in 0..8 {
            for n in 0..8 {
                let a = displacement_amplitude(m, n, alpha).norm_sqr();
                let p = displaced_population(m, n, alpha.norm_sqr());
                assert!((a - p).abs() < 1e-14);
            }
        }
    }
}
