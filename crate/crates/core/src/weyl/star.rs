use std::f64::consts::PI;

use rayon::prelude::*;

use super::symbol::Symbol;
use crate::error::{LwError, Result};
use crate::fourier::{centered_dft, dual_axis, fft_all, plan};
use crate::grid::{GridSpec, SampledFunction, C64};

/// Kernel rows whose largest modulus is below this fraction of the global maximum are skipped.
const KERNEL_ROW_CUTOFF: f64 = 1e-18;

/// out(x_i, y_j) = weight · Σ_p e^{iτ y_j x_p} Σ_{j′} k_{i−p}(y_j − y_{j′}) e^{−iτ x_i y_{j′}} g(x_p, y_{j′}).
///
/// `kernel(δ)` returns k_δ(d·h_y) for d = −(N_y−1)..=N_y−1, with δ = i − p the
/// x-index difference. The inner sum is a linear convolution done by FFT.
pub(crate) fn twisted_apply(
    grid: &GridSpec,
    kernel: &(dyn Fn(i64) -> Vec<C64> + Sync),
    g: &[C64],
    tau: f64,
    weight: f64,
) -> Vec<C64> {
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let xs = grid.axis(0).coords();
    let ys = grid.axis(1).coords();
    let m = 2 * n2;
    let fwd = plan(m, false);
    let inv = plan(m, true);

    let deltas: Vec<i64> = (-(n1 as i64 - 1)..=(n1 as i64 - 1)).collect();
    let rows: Vec<(Vec<C64>, f64)> = deltas
        .par_iter()
        .map(|&d| {
            let k = kernel(d);
            let peak = k.iter().fold(0.0f64, |a, v| a.max(v.norm()));
            let mut pad = vec![C64::new(0.0, 0.0); m];
            for (idx, v) in k.into_iter().enumerate() {
                let off = idx as i64 - (n2 as i64 - 1);
                pad[off.rem_euclid(m as i64) as usize] = v;
            }
            fwd.process(&mut pad);
            (pad, peak)
        })
        .collect();
    let global = rows.iter().fold(0.0f64, |a, r| a.max(r.1));
    if global == 0.0 {
        return vec![C64::new(0.0, 0.0); n1 * n2];
    }
    let scale = weight / m as f64;

    let out_rows: Vec<Vec<C64>> = (0..n1)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![C64::new(0.0, 0.0); n2];
            let mut buf = vec![C64::new(0.0, 0.0); m];
            for p in 0..n1 {
                let (kf, peak) = &rows[i + n1 - 1 - p];
                if *peak <= KERNEL_ROW_CUTOFF * global {
                    continue;
                }
                let src = &g[p * n2..(p + 1) * n2];
                if src.iter().all(|v| *v == C64::new(0.0, 0.0)) {
                    continue;
                }
                for (jj, slot) in buf.iter_mut().enumerate() {
                    *slot = if jj < n2 {
                        src[jj] * C64::from_polar(1.0, -tau * xs[i] * ys[jj])
                    } else {
                        C64::new(0.0, 0.0)
                    };
                }
                fwd.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(kf) {
                    *b *= k;
                }
                inv.process(&mut buf);
                for j in 0..n2 {
                    acc[j] += buf[j] * C64::from_polar(scale, tau * ys[j] * xs[p]);
                }
            }
            acc
        })
        .collect();
    out_rows.concat()
}

fn dft_along(values: &[C64], grid: &GridSpec, axis: usize, sign: f64) -> Vec<C64> {
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let mut out = vec![C64::new(0.0, 0.0); values.len()];
    if axis == 0 {
        for j in 0..n2 {
            let line: Vec<C64> = (0..n1).map(|i| values[i * n2 + j]).collect();
            for (i, v) in centered_dft(&line, grid.axis(0), grid.hbar(), sign).into_iter().enumerate() {
                out[i * n2 + j] = v;
            }
        }
    } else {
        for i in 0..n1 {
            let row = centered_dft(&values[i * n2..(i + 1) * n2], grid.axis(1), grid.hbar(), sign);
            out[i * n2..(i + 1) * n2].copy_from_slice(&row);
        }
    }
    out
}

/// Symplectic Fourier transform of a sampled phase-space function.
///
/// F_σa(z) = (2πħ)^{−1}∫e^{−iσ(z,z′)/ħ}a(z′)dz′. The result lives on the dual grid
/// (x-axis dual to the input y-axis and vice versa); applying it twice returns the
/// input grid.
pub fn symplectic_fourier_sampled(a: &SampledFunction) -> Result<SampledFunction> {
    let grid = a.grid();
    grid.ensure_dim(2)?;
    let hbar = grid.hbar();
    // e^{−iσ(z,z′)/ħ} = e^{−i z_y x′/ħ} e^{+i z_x y′/ħ}
    let r = dft_along(&dft_along(a.values(), grid, 0, -1.0), grid, 1, 1.0);
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let out_grid = GridSpec::from_axes(vec![dual_axis(grid.axis(1), hbar)?, dual_axis(grid.axis(0), hbar)?], hbar)?;
    let c = grid.cell_volume() / (2.0 * PI * hbar);
    let mut out = vec![C64::new(0.0, 0.0); n1 * n2];
    // r is indexed [w0 = z_y][w1 = z_x]; the output is [z_x][z_y]
    for w0 in 0..n1 {
        for w1 in 0..n2 {
            out[w1 * n1 + w0] = r[w0 * n2 + w1] * c;
        }
    }
    SampledFunction::new(out_grid, out)
}

/// Symplectic Fourier transform of a symbol sampled on `grid2`.
pub fn symplectic_fourier(a: &Symbol, grid2: &GridSpec) -> Result<Symbol> {
    let sampled = match a {
        Symbol::Sampled(f) if f.grid().matches(grid2) => f.clone(),
        _ => a.sample(grid2)?,
    };
    Symbol::sampled(symplectic_fourier_sampled(&sampled)?)
}

fn sampled_on(s: &Symbol) -> Result<&SampledFunction> {
    match s {
        Symbol::Sampled(f) => Ok(f),
        _ => Err(LwError::UnsupportedSymbol("twisted convolution needs sampled covariant symbols".into())),
    }
}

/// c(z) = (2πħ)^{−1}∫e^{iσ(z,z′)/2ħ}a_σ(z−z′)b_σ(z′)dz′ on the common grid, with a_σ
/// taken as zero off the grid.
pub fn twisted_convolution(a_sig: &Symbol, b_sig: &Symbol) -> Result<Symbol> {
    let (a, b) = (sampled_on(a_sig)?, sampled_on(b_sig)?);
    a.grid().ensure_same(b.grid())?;
    let grid = a.grid();
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let kernel = |d: i64| -> Vec<C64> {
        let i = d + n1 as i64 / 2;
        (-(n2 as i64 - 1)..=(n2 as i64 - 1))
            .map(|e| {
                let j = e + n2 as i64 / 2;
                if (0..n1 as i64).contains(&i) && (0..n2 as i64).contains(&j) {
                    a.values()[i as usize * n2 + j as usize]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    };
    let hbar = grid.hbar();
    let out = twisted_apply(grid, &kernel, b.values(), 1.0 / (2.0 * hbar), grid.cell_volume() / (2.0 * PI * hbar));
    Symbol::sampled(SampledFunction::new(grid.clone(), out)?)
}

/// Weyl symbol of the product of the quantizations of a and b, through covariant
/// symbols: F_σ(F_σa ⋄ F_σb).
pub fn compose_symbols(a: &Symbol, b: &Symbol, grid2: &GridSpec) -> Result<Symbol> {
    let a_sig = symplectic_fourier(a, grid2)?;
    let b_sig = symplectic_fourier(b, grid2)?;
    let c_sig = twisted_convolution(&a_sig, &b_sig)?;
    match c_sig {
        Symbol::Sampled(f) => Symbol::sampled(symplectic_fourier_sampled(&f)?),
        _ => unreachable!("twisted convolution returns a sampled symbol"),
    }
}

/// Moyal product H ⋆ Ψ on the grid of Ψ.
///
/// Ψ is expanded in grid plane waves; H ⋆ e^{ik·z} = H(x − ħk_y/2, y + ħk_x/2)e^{ik·z}
/// holds exactly, so the product is a sum of translated copies of H. Modes with
/// |c_k| below 1e−16 of the largest are dropped.
pub fn moyal_star(h: &Symbol, big_psi: &SampledFunction) -> Result<SampledFunction> {
    let grid = big_psi.grid();
    grid.ensure_dim(2)?;
    let shape = grid.shape();
    let (n1, n2) = (shape[0], shape[1]);
    let hbar = grid.hbar();
    let mut coef = big_psi.values().to_vec();
    fft_all(&mut coef, &shape, false);
    let norm = 1.0 / grid.len() as f64;
    coef.iter_mut().for_each(|v| *v *= norm);
    let peak = coef.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if peak == 0.0 {
        return Ok(SampledFunction::zeros(grid));
    }
    let (k1, k2) = (grid.axis(0).wavenumbers(), grid.axis(1).wavenumbers());
    let modes: Vec<usize> = (0..coef.len()).filter(|&m| coef[m].norm() > 1e-16 * peak).collect();
    let xs = grid.axis(0).coords();
    let ys = grid.axis(1).coords();
    let (l1, l2) = (grid.axis(0).half_extent, grid.axis(1).half_extent);

    let partials: Vec<Vec<C64>> = modes
        .par_chunks(64)
        .map(|chunk| {
            let mut part = vec![C64::new(0.0, 0.0); n1 * n2];
            for &m in chunk {
                let (kx, ky) = (k1[m / n2], k2[m % n2]);
                let sx: Vec<f64> = xs.iter().map(|x| x - hbar * ky / 2.0).collect();
                let sy: Vec<f64> = ys.iter().map(|y| y + hbar * kx / 2.0).collect();
                let hv = h.eval_tensor(&sx, &sy);
                let ex: Vec<C64> = xs.iter().map(|x| C64::from_polar(1.0, kx * (x + l1))).collect();
                let ey: Vec<C64> = ys.iter().map(|y| C64::from_polar(1.0, ky * (y + l2))).collect();
                for i in 0..n1 {
                    let ci = coef[m] * ex[i];
                    for j in 0..n2 {
                        part[i * n2 + j] += hv[i * n2 + j] * ci * ey[j];
                    }
                }
            }
            part
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); n1 * n2];
    for p in &partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    SampledFunction::new(grid.clone(), out)
}
