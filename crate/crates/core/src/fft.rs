//! Multi-axis FFT helpers over hypercubic row-major arrays.

use num_complex::Complex64 as C64;
use rustfft::{FftDirection, FftPlanner};

/// Mode number of FFT index `i` in the band `[-n/2, n/2)`.
#[inline]
pub fn mode_of(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT index of mode `m`, if it lies in the band `[-n/2, n/2)`.
#[inline]
pub fn index_of(m: i64, n: usize) -> Option<usize> {
    let h = (n / 2) as i64;
    if m >= -h && m < h {
        Some(m.rem_euclid(n as i64) as usize)
    } else {
        None
    }
}

/// Unnormalized FFT along the given axes of an array of shape `[n; rank]`.
pub fn fft_axes(data: &mut [C64], n: usize, rank: usize, axes: &[usize], dir: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(rank as u32));
    if axes.is_empty() {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft(n, dir);
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buf: Vec<C64> = Vec::new();
    for &axis in axes {
        assert!(axis < rank);
        let stride = n.pow((rank - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        // Transpose each block so its `stride` lines are contiguous, transform, and transpose back.
        let block = stride * n;
        buf.resize(block, C64::new(0.0, 0.0));
        for chunk in data.chunks_exact_mut(block) {
            for k in 0..n {
                for inner in 0..stride {
                    buf[inner * n + k] = chunk[k * stride + inner];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                for inner in 0..stride {
                    chunk[k * stride + inner] = buf[inner * n + k];
                }
            }
        }
    }
}

/// Decompose a flat index into per-axis indices (row-major, most significant first).
#[inline]
pub fn unravel(mut idx: usize, n: usize, out: &mut [usize]) {
    for o in out.iter_mut().rev() {
        *o = idx % n;
        idx /= n;
    }
}

#[inline]
pub fn ravel(ix: &[usize], n: usize) -> usize {
    ix.iter().fold(0, |acc, &i| acc * n + i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_two_axes() {
        let n = 8;
        let orig: Vec<C64> = (0..n * n * n)
            .map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut d = orig.clone();
        fft_axes(&mut d, n, 3, &[0, 2], FftDirection::Forward);
        fft_axes(&mut d, n, 3, &[0, 2], FftDirection::Inverse);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn axis_matches_direct_dft() {
        let n = 8;
        let orig: Vec<C64> = (0..n * n).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let mut d = orig.clone();
        fft_axes(&mut d, n, 2, &[0], FftDirection::Forward);
        for k in 0..n {
            for c in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for a in 0..n {
                    let th = -2.0 * std::f64::consts::PI * (a * k) as f64 / n as f64;
                    s += orig[a * n + c] * C64::from_polar(1.0, th);
                }
                assert!((s - d[k * n + c]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn modes() {
        assert_eq!(mode_of(5, 8), -3);
        assert_eq!(index_of(-4, 8), Some(4));
        assert_eq!(index_of(4, 8), None);
        let mut ix = [0; 3];
        unravel(ravel(&[1, 2, 3], 4), 4, &mut ix);
        assert_eq!(ix, [1, 2, 3]);
    }
}
