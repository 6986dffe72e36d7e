//! Truncated Fock-space tools.

use num_complex::Complex64;

/// Matrix elements `<m|D(beta)|n>` of the displacement operator for
/// `m, n <= cutoff`, taken from the exact infinite-dimensional expression
/// (associated Laguerre form), so truncation only drops rows and columns.
/// Returned row-major, `(cutoff + 1)^2` entries.
pub fn displacement_matrix(beta: Complex64, cutoff: usize) -> Vec<Complex64> {
    let dim = cutoff + 1;
    let x = beta.norm_sqr();
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=dim).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let envelope = (-x / 2.0).exp();
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for m in 0..dim {
        for n in 0..dim {
            let (lo, hi) = if m >= n { (n, m) } else { (m, n) };
            let order = hi - lo;
            let lag = laguerre(lo, order as f64, x);
            let scale = (0.5 * (ln_fact[lo] - ln_fact[hi])).exp();
            let power = if m >= n { beta.powu(order as u32) } else { (-beta.conj()).powu(order as u32) };
            out[m * dim + n] = power * (scale * envelope * lag);
        }
    }
    out
}

/// Generalised Laguerre polynomial `L_n^{(a)}(x)` by upward recurrence.
fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Thermal occupation probabilities `nbar^n / (nbar + 1)^{n+1}` for
/// `n <= cutoff` (not renormalised; the tail is reported as leakage).
pub fn thermal_populations(nbar: f64, cutoff: usize) -> Vec<f64> {
    let q = nbar / (nbar + 1.0);
    (0..=cutoff).map(|n| (1.0 - q) * q.powi(n as i32)).collect()
}
