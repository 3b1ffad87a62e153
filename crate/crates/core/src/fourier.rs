//! Discrete Fourier transforms for position-space wavepacket profiles.
//!
//! Radix-2 Cooley-Tukey for power-of-two lengths, direct evaluation
//! otherwise. Single-threaded and deterministic.

use nalgebra::Complex;

use crate::linalg::phase;
use crate::scalar::{real, Real};

/// Forward DFT: `out[l] = sum_j in[j] e^{-2 pi i j l / n}` (no normalization).
pub fn dft<T: Real>(input: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = input.len();
    if n.is_power_of_two() && n > 1 {
        let mut buf = input.to_vec();
        fft_pow2(&mut buf, false);
        buf
    } else {
        naive_dft(input)
    }
}

fn naive_dft<T: Real>(input: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = input.len();
    let step = real::<T>(-2.0 * std::f64::consts::PI / n as f64);
    (0..n)
        .map(|l| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, v) in input.iter().enumerate() {
                acc += *v * phase(step * real::<T>((j * l % n) as f64));
            }
            acc
        })
        .collect()
}

fn fft_pow2<T: Real>(buf: &mut [Complex<T>], inverse: bool) {
    let n = buf.len();
    // bit reversal
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = real::<T>(sign * 2.0 * std::f64::consts::PI / len as f64);
        let wlen = phase(ang);
        let mut i = 0;
        while i < n {
            let mut w = Complex::new(T::one(), T::zero());
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}
