//! Radix-2 complex FFT, enough for zero-padded 2D convolution.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// In-place iterative Cooley-Tukey transform. `data.len()` must be a power of two.
/// The inverse transform is scaled by `1/n`.
pub(crate) fn fft(data: &mut [Complex], inverse: bool) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            data.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // twiddles computed directly per index to avoid drift from repeated products
        let twiddles: Vec<Complex> = (0..half)
            .map(|k| {
                let a = sign * 2.0 * PI * k as f64 / len as f64;
                Complex::new(math::cos(a), math::sin(a))
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = data[start + k];
                let b = data[start + k + half].mul(twiddles[k]);
                data[start + k] = Complex::new(a.re + b.re, a.im + b.im);
                data[start + k + half] = Complex::new(a.re - b.re, a.im - b.im);
            }
        }
        len <<= 1;
    }
    if inverse {
        let s = 1.0 / n as f64;
        for c in data.iter_mut() {
            c.re *= s;
            c.im *= s;
        }
    }
}

/// 2D transform of a row-major `w x h` buffer (both powers of two).
pub(crate) fn fft2(data: &mut [Complex], w: usize, h: usize, inverse: bool) {
    for row in data.chunks_mut(w) {
        fft(row, inverse);
    }
    let mut col = alloc::vec![Complex::default(); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = data[y * w + x];
        }
        fft(&mut col, inverse);
        for y in 0..h {
            data[y * w + x] = col[y];
        }
    }
}

/// Pointwise product, in place into `a`.
pub(crate) fn multiply(a: &mut [Complex], b: &[Complex]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.mul(*y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_dft() {
        let n = 16;
        let input: Vec<Complex> =
            (0..n).map(|k| Complex::new((k as f64 * 0.37).sin(), (k as f64 * 1.1).cos())).collect();
        let mut fast = input.clone();
        fft(&mut fast, false);
        for (k, got) in fast.iter().enumerate() {
            let mut want = Complex::default();
            for (t, x) in input.iter().enumerate() {
                let a = -2.0 * PI * (k * t) as f64 / n as f64;
                want.re += x.re * a.cos() - x.im * a.sin();
                want.im += x.re * a.sin() + x.im * a.cos();
            }
            assert!((got.re - want.re).abs() < 1e-12 && (got.im - want.im).abs() < 1e-12);
        }
        fft(&mut fast, true);
        for (a, b) in fast.iter().zip(&input) {
            assert!((a.re - b.re).abs() < 1e-14 && (a.im - b.im).abs() < 1e-14);
        }
    }
}
