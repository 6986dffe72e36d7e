//! Small numerical helpers shared across modules.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

/// Cumulative trapezoid over uniformly spaced samples. Output has the same
/// length as the input and starts at zero.
pub fn cumulative_trapezoid<T>(samples: &[T], dt: f64) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = T::default();
    out.push(acc);
    for w in samples.windows(2) {
        acc = acc + (w[0] + w[1]) * (0.5 * dt);
        out.push(acc);
    }
    out.truncate(samples.len());
    out
}

/// Trapezoid integral of uniformly spaced samples.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = samples[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (samples[0] + samples[n - 1]))
        }
    }
}

/// Trapezoid weights for `n` uniformly spaced nodes.
pub fn trapezoid_weights(n: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; n];
    if n > 0 {
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
    }
    if n == 1 {
        w[0] = 0.0;
    }
    w
}

/// Composite Simpson's rule on `[a, b]` with `intervals` (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Natural log of the binomial coefficient.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// Median of a slice; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 0 { 0.5 * (v[m - 1] + v[m]) } else { v[m] })
}

/// Unnormalized in-place Walsh-Hadamard butterfly on a power-of-two slice.
pub fn fwht<T>(data: &mut [T])
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let a = data[i];
                let b = data[i + h];
                data[i] = a + b;
                data[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Linear interpolation between two complex samples.
pub fn lerp_c(a: Complex64, b: Complex64, s: f64) -> Complex64 {
    a + (b - a) * s
}

/// Double-double float: an unevaluated sum `hi + lo` carrying about 32
/// significant digits. Only the handful of operations needed for
/// high-dynamic-range Walsh-Hadamard sums are provided.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Multiply by an exact power of two.
    pub fn scale_pow2(self, s: f64) -> Self {
        Self { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn mul_dd(self, o: Self) -> Self {
        let (p, e) = Self::two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = Self::quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn mul_f64(self, o: f64) -> Self {
        let (p, e) = Self::two_prod(self.hi, o);
        let e = e + self.lo * o;
        let (hi, lo) = Self::quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn div_f64(self, o: f64) -> Self {
        let q1 = self.hi / o;
        let r = self - Self::new(q1).mul_f64(o);
        let (hi, lo) = Self::quick_two_sum(q1, r.hi / o);
        Self { hi, lo }
    }

    /// `exp(-x)` for `x >= 0` to double-double accuracy.
    ///
    /// Argument reduction by `ln 2` (itself held in double-double) followed
    /// by a Taylor series on the reduced argument.
    pub fn exp_neg(x: Self) -> Self {
        const LN2: DoubleDouble = DoubleDouble {
            hi: std::f64::consts::LN_2,
            lo: 2.319_046_813_846_299_6e-17,
        };
        let y = Self { hi: -x.hi, lo: -x.lo };
        let k = (y.hi / LN2.hi).round();
        // |r| <= ln2 / 2, so the series is done within 40 terms.
        let r = y - LN2.mul_f64(k);
        let mut term = Self::new(1.0);
        let mut sum = Self::new(1.0);
        for i in 1..=40 {
            term = term.mul_dd(r).div_f64(i as f64);
            sum += term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        sum.scale_pow2(2f64.powi(k as i32))
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        let (t, f) = Self::two_sum(self.lo, o.lo);
        let (s, e) = Self::quick_two_sum(s, e + t);
        let (hi, lo) = Self::quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + Self { hi: -o.hi, lo: -o.lo }
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_matches_cumulative_tail() {
        let xs: Vec<f64> = (0..101).map(|i| (i as f64 * 0.01).sin()).collect();
        let cum = cumulative_trapezoid(&xs, 0.01);
        assert!((cum[100] - trapezoid(&xs, 0.01)).abs() < 1e-15);
    }

    #[test]
    fn dd_exp_is_more_accurate_than_f64() {
        // exp(-1) to 32 digits.
        let e = DoubleDouble::exp_neg(DoubleDouble::new(1.0));
        let reference_hi = 0.367_879_441_171_442_3_f64;
        assert!((e.hi - reference_hi).abs() < 1e-16);
        // exp(-a) * exp(-b) == exp(-(a+b))
        let a = DoubleDouble::exp_neg(DoubleDouble::new(0.3));
        let b = DoubleDouble::exp_neg(DoubleDouble::new(0.45));
        let ab = DoubleDouble::exp_neg(DoubleDouble::new(0.75));
        let diff = a.mul_dd(b) - ab;
        assert!(diff.to_f64().abs() < 1e-30);
    }

    #[test]
    fn fwht_twice_scales_by_length() {
        let mut v = vec![1.0, -2.0, 0.5, 3.0];
        fwht(&mut v);
        fwht(&mut v);
        assert_eq!(v, vec![4.0, -8.0, 2.0, 12.0]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
