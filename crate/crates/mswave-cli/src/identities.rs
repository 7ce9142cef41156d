//! Operator identity suite. Each check picks a box suited to the identity at
//! the configured resolution.

use crate::report::Check;
use mswave::potentials::{projected_fj, PowerLawMoment, TimeKernelQuadrature};
use mswave::spectral::resample::dilation_spectrum_raw;
use mswave::spectral::{
    curl, dilate, divergence, free_propagator, gradient_real, inverse_laplacian, leray_project,
    mdfm_apply, omega_pow, split_at, Piece, ScalarField, SpectralGrid, VectorField,
};
use mswave::timegrid::{gauss_legendre, gauss_on};
use mswave::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub const MDFM_TOL: f64 = 1e-6;
pub const DILATION_TOL: f64 = 1e-8;
pub const ZERO_MODE_TOL: f64 = 1e-9;
pub const RETARDED_TOL: f64 = 1e-3;
pub const SPLIT_TOL: f64 = 1e-14;
pub const COMMUTATOR_TOL: f64 = 1e-4;

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn gaussian(grid: SpectralGrid, sigma: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y, z| {
        Complex64::new(
            (-0.5 * (x * x + y * y + z * z) / (sigma * sigma)).exp(),
            0.0,
        )
    })
}

/// MDFM against the free propagator at t = 1; the DFT realizes F exactly
/// when L^2 = 2 pi n.
pub fn mdfm_factorization(n: usize) -> Result<f64> {
    let grid = SpectralGrid::new(n, (2.0 * PI * n as f64).sqrt())?;
    let f = gaussian(grid, 1.0);
    let a = mdfm_apply(&f, 1.0, Piece::Mdfm)?;
    Ok(rel_diff(&a.values, &free_propagator(&f, 1.0).values))
}

/// `|omega D_0(2) f| = 2^{1/2} |omega f|` on a Gaussian sized so that both
/// the spatial wrap and the spectral tail are balanced.
pub fn dilation_identity(n: usize) -> Result<f64> {
    let grid = SpectralGrid::new(n, (4.0 * PI * n as f64).sqrt())?;
    let f = gaussian(grid, 1.0);
    let out = dilate(&f, 2.0)?;
    let lhs = omega_pow(&out, 1.0)?.l2();
    let rhs = 2f64.sqrt() * omega_pow(&f, 1.0)?.l2();
    Ok((lhs / rhs - 1.0).abs())
}

/// Largest deviation of the F_0 and F_1 zero modes of a constant moment from
/// m/2 and m/6.
pub fn zero_modes(grid: SpectralGrid, seed: u64, quad: &TimeKernelQuadrature) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
    let src = PowerLawMoment {
        field: VectorField::from_fn(grid, |_, _, _| m),
        exponent: 0.0,
        t_ref: 1.0,
    };
    let mut err: f64 = 0.0;
    for (j, c) in [(0, 0.5), (1, 1.0 / 6.0)] {
        let f = projected_fj(&src, j, 3.0, quad)?;
        for d in 0..3 {
            err = err.max((f.mean()[d] - c * m[d]).abs() / m[d].abs().max(1e-300));
        }
    }
    Ok(err)
}

/// `-int_t^inf K(t - t') t'^{-3-j} D_0(t') P M dt'` by direct quadrature in
/// `t'` from the continuous transform of a static Gaussian moment, against
/// `t^{-1-j} D_0(t) F_j(M)` from the library at t = 2. At t = 2 the dilation
/// maps lattice mode 2m onto m, so no spectral interpolation enters, and
/// the nonlocal F_j field needs no wrap guard.
pub fn retarded_identity(n: usize, j: u32, quad: &TimeKernelQuadrature) -> Result<f64> {
    let sigma = 1.0;
    let grid = SpectralGrid::new(n, (2.0 * PI * n as f64).sqrt())?;
    let t = 2.0;
    let g = gaussian(grid, sigma).re();
    let zeros = vec![0.0; grid.len()];
    let src = PowerLawMoment {
        field: VectorField::new(grid, [zeros.clone(), zeros, g])?,
        exponent: 0.0,
        t_ref: 1.0,
    };
    let fj = projected_fj(&src, j, t, quad)?;
    let scale = t.powi(-1 - j as i32);
    // D_0(t) as in F_j: nonzero modes pick up t^3, the mean is kept
    let lib: Vec<Vec<Complex64>> = fj
        .comps
        .iter()
        .map(|c| {
            let mut s = dilation_spectrum_raw(&ScalarField::from_real(grid, c), t);
            for (p, v) in s.iter_mut().enumerate() {
                *v *= if p == 0 { scale } else { scale * t.powi(3) };
            }
            s
        })
        .collect();

    let nn = grid.n();
    let amp = (nn as f64 / grid.length()).powi(3) * (2.0 * PI * sigma * sigma).powf(1.5);
    let rule = gauss_legendre(16);
    let jj = j as i32;
    let mut oracle = vec![vec![Complex64::default(); grid.len()]; 3];
    for a in 0..nn {
        for b in 0..nn {
            for c in 0..nn {
                let m = [grid.mode(a), grid.mode(b), grid.mode(c)];
                let xi = [grid.wavenumber(a), grid.wavenumber(b), grid.wavenumber(c)];
                let p = grid.index(a, b, c);
                let top = m.iter().map(|v| v.abs()).max().unwrap();
                let sign = if (m[0] + m[1] + m[2]).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                if top == 0 {
                    let jf = j as f64;
                    oracle[2][p] =
                        Complex64::new(amp * scale * (1.0 / (1.0 + jf) - 1.0 / (2.0 + jf)), 0.0);
                    continue;
                }
                // the mode lives while t' |m| < n/2
                let end = nn as f64 / 2.0 / top as f64;
                if end <= t {
                    continue;
                }
                let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                let stop = end.min(10.0 / (r * sigma));
                if stop <= t {
                    continue;
                }
                let h = (0.5 / r).min(0.25);
                let cells = ((stop - t) / h).ceil() as usize;
                let width = (stop - t) / cells as f64;
                let mut acc = 0.0;
                for i in 0..cells {
                    let lo = t + i as f64 * width;
                    for (tp, w) in gauss_on(lo, lo + width, &rule) {
                        // t'^{-3-j} times the t'^3 of the dilated transform
                        acc += w * (r * (tp - t)).sin() / r
                            * tp.powi(-jj)
                            * (-0.5 * (tp * r * sigma).powi(2)).exp();
                    }
                }
                let v = sign * amp * acc;
                for (cc, out) in oracle.iter_mut().enumerate() {
                    let proj = if cc == 2 { 1.0 } else { 0.0 } - xi[cc] * xi[2] / (r * r);
                    out[p] = Complex64::new(proj * v, 0.0);
                }
            }
        }
    }
    let flat = |v: &[Vec<Complex64>]| v.iter().flatten().copied().collect::<Vec<_>>();
    Ok(rel_diff(&flat(&lib), &flat(&oracle)))
}

/// Errors of the retarded identity for 2, 4 and 8 points per panel.
pub fn retarded_refinement(n: usize, j: u32, base: &TimeKernelQuadrature) -> Result<Vec<f64>> {
    [2, 4, 8]
        .iter()
        .map(|&p| {
            retarded_identity(
                n,
                j,
                &TimeKernelQuadrature {
                    points_per_panel: p,
                    ..base.clone()
                },
            )
        })
        .collect()
}

/// Random band-limited field split at a random radius.
pub fn split_reconstruction(grid: SpectralGrid, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut s = vec![Complex64::default(); grid.len()];
    for v in s.iter_mut() {
        *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let f = ScalarField::from_spectrum(grid, s);
    let cutoff = rng.gen_range(0.0..grid.nyquist() * 3f64.sqrt());
    let (short, long) = split_at(&f, cutoff);
    short.add(&long).sub(&f).max_abs() / f.max_abs().max(1.0)
}

/// `sum_j (x_j (P v)_j - P(x_j v)_j) = 2 Delta^{-1} div v` on data with
/// vanishing first moments, compared in the central half of the box.
pub fn commutator(n: usize, seed: u64) -> Result<f64> {
    let grid = SpectralGrid::new(n, 0.375 * n as f64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0);
    let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(0.5..1.5));
    let h = ScalarField::from_fn(grid, |x, y, z| {
        Complex64::new(
            (c[0] * x - c[1] * y) * (-0.5 * (x * x + y * y + z * z)).exp(),
            0.0,
        )
    });
    let a = VectorField::from_fn(grid, |x, y, z| {
        let e = (-0.5 * (x * x + y * y + z * z)).exp();
        [c[2] * y * e, c[3] * z * e, -x * e]
    });
    let v = gradient_real(&h).add(&curl(&a));
    let pv = leray_project(&v);
    let mut lhs = vec![0.0; grid.len()];
    for j in 0..3 {
        let xj = grid.coordinate(j);
        let mut xv = v.clone();
        for comp in xv.comps.iter_mut() {
            for (p, val) in comp.iter_mut().enumerate() {
                *val *= xj[p];
            }
        }
        let pxv = leray_project(&xv);
        for p in 0..grid.len() {
            lhs[p] += xj[p] * pv.comps[j][p] - pxv.comps[j][p];
        }
    }
    let div = ScalarField::from_real(grid, &divergence(&v));
    let rhs = inverse_laplacian(&div)?
        .scale(Complex64::new(2.0, 0.0))
        .re();
    let x = grid.coords();
    let quarter = grid.length() / 4.0;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                if x[i].abs() < quarter && x[jj].abs() < quarter && x[k].abs() < quarter {
                    let p = grid.index(i, jj, k);
                    num += (lhs[p] - rhs[p]).powi(2);
                    den += rhs[p].powi(2);
                }
            }
        }
    }
    Ok((num / den).sqrt())
}

/// The whole suite at resolution `n`.
pub fn run_identities(
    grid: SpectralGrid,
    seed: u64,
    quad: &TimeKernelQuadrature,
) -> Result<Vec<Check>> {
    let n = grid.n();
    let mut checks = vec![
        Check::at_most("mdfm_factorization", mdfm_factorization(n)?, MDFM_TOL),
        Check::at_most("dilation_identity_nu2", dilation_identity(n)?, DILATION_TOL),
        Check::at_most(
            "fj_zero_modes",
            zero_modes(grid, seed, quad)?,
            ZERO_MODE_TOL,
        ),
    ];
    for j in 0..2 {
        let errs = retarded_refinement(n, j, quad)?;
        let stated = retarded_identity(n, j, quad)?;
        checks.push(Check::at_most(
            &format!("retarded_identity_f{j}"),
            stated,
            RETARDED_TOL,
        ));
        let monotone = errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-4) + 1e-12);
        checks.push(Check::flag(
            &format!("retarded_identity_f{j}_refines"),
            monotone,
            format!(
                "errors at 2/4/8 points: {}",
                errs.iter()
                    .map(|e| format!("{e:.2e}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        ));
    }
    checks.push(Check::at_most(
        "split_reconstruction",
        split_reconstruction(grid, seed),
        SPLIT_TOL,
    ));
    checks.push(Check::at_most(
        "commutator_x_leray",
        commutator(n, seed)?,
        COMMUTATOR_TOL,
    ));
    Ok(checks)
}
