//! Cached 3-D complex FFTs. Forward is unnormalized, inverse carries `1/n^3`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let p = cache.entry(n).or_insert_with(|| {
            PLANNER.with(|planner| {
                let mut planner = planner.borrow_mut();
                Plans {
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                }
            })
        });
        (p.forward.clone(), p.inverse.clone())
    })
}

/// Moves axis `axis` (0 = x, 1 = y) into the fastest position, or back.
fn swap_axis(data: &[Complex64], out: &mut [Complex64], n: usize, axis: usize) {
    match axis {
        0 => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out[(k * n + j) * n + i] = data[(i * n + j) * n + k];
                    }
                }
            }
        }
        1 => {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out[(i * n + k) * n + j] = data[(i * n + j) * n + k];
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

fn transform(data: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n * n, "buffer is not n^3");
    let (fwd, inv) = plans(n);
    let fft = if inverse { inv } else { fwd };
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut tmp = vec![Complex64::default(); data.len()];
    fft.process_with_scratch(data, &mut scratch);
    for axis in [1, 0] {
        swap_axis(data, &mut tmp, n, axis);
        fft.process_with_scratch(&mut tmp, &mut scratch);
        swap_axis(&tmp, data, n, axis);
    }
    if inverse {
        let s = 1.0 / data.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

pub fn forward_in_place(data: &mut [Complex64], n: usize) {
    transform(data, n, false);
}

pub fn inverse_in_place(data: &mut [Complex64], n: usize) {
    transform(data, n, true);
}

pub fn forward(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = data.to_vec();
    forward_in_place(&mut out, n);
    out
}

pub fn inverse(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = data.to_vec();
    inverse_in_place(&mut out, n);
    out
}

pub fn forward_real(data: &[f64], n: usize) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_in_place(&mut out, n);
    out
}

/// Inverse transform keeping only the real part.
pub fn inverse_real(data: &[Complex64], n: usize) -> Vec<f64> {
    inverse(data, n).into_iter().map(|v| v.re).collect()
}

/// Forward transforms of two real fields with one complex FFT.
pub fn forward_real_pair(a: &[f64], b: &[f64], n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    forward_in_place(&mut z, n);
    let len = z.len();
    let mut fa = vec![Complex64::default(); len];
    let mut fb = vec![Complex64::default(); len];
    let neg = |i: usize| if i == 0 { 0 } else { n - i };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = (i * n + j) * n + k;
                let q = (neg(i) * n + neg(j)) * n + neg(k);
                let zc = z[q].conj();
                fa[p] = (z[p] + zc) * 0.5;
                fb[p] = (z[p] - zc) * Complex64::new(0.0, -0.5);
            }
        }
    }
    (fa, fb)
}

/// Hermitian part `(s(xi) + conj(s(-xi))) / 2`: the spectrum of `Re(ifft(s))`.
pub fn hermitian_part(s: &[Complex64], n: usize) -> Vec<Complex64> {
    let neg = |i: usize| if i == 0 { 0 } else { n - i };
    let mut out = vec![Complex64::default(); s.len()];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = (i * n + j) * n + k;
                let q = (neg(i) * n + neg(j)) * n + neg(k);
                out[p] = (s[p] + s[q].conj()) * 0.5;
            }
        }
    }
    out
}

/// Real parts of the inverse transforms of two spectra, with one complex FFT.
pub fn inverse_real_pair(fa: &[Complex64], fb: &[Complex64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let ha = hermitian_part(fa, n);
    let hb = hermitian_part(fb, n);
    let mut z: Vec<Complex64> = ha.iter().zip(&hb).map(|(&x, &y)| x + i * y).collect();
    inverse_in_place(&mut z, n);
    (
        z.iter().map(|v| v.re).collect(),
        z.iter().map(|v| v.im).collect(),
    )
}
