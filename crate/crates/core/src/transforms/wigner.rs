use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{LwError, Result};
use crate::fourier::{phase_matrix, reversed_line, shift_line, LatticeSampler};
use crate::grid::{GridSpec, PhasePoint, SampledFunction, C64};

fn check_pair(psi: &SampledFunction, phi: &SampledFunction) -> Result<()> {
    psi.grid().ensure_dim(1)?;
    psi.grid().ensure_same(phi.grid())
}

/// W(ψ,φ)(X, Y) on the tensor product of arbitrary X and Y coordinates (X slowest).
///
/// W(ψ,φ)(X,Y) = (πħ)^{−1} ∫ e^{−2iYu/ħ} ψ(X+u) conj(φ(X−u)) du, which is the
/// defining integral after η = 2u. The u-sum runs over the configuration lattice.
pub fn wigner_at(
    psi: &SampledFunction,
    phi: &SampledFunction,
    xs: &[f64],
    ys: &[f64],
) -> Result<Vec<C64>> {
    check_pair(psi, phi)?;
    let grid = psi.grid();
    let ax = *grid.axis(0);
    let h = ax.spacing();
    let hbar = grid.hbar();
    let radius = ax.points as i64;

    let mut sp = LatticeSampler::new(psi.values(), ax);
    let mut sf = LatticeSampler::new(phi.values(), ax);
    for &x in xs {
        sp.prepare(x);
        sf.prepare(x);
    }
    let width = (2 * radius + 1) as usize;
    let rows: Vec<Vec<C64>> = xs
        .par_iter()
        .map(|&x| {
            let a = sp.samples(x, radius, 1);
            let b = sf.samples(x, radius, -1);
            a.iter().zip(&b).map(|(p, q)| p * q.conj()).collect()
        })
        .collect();
    let mut g = DMatrix::<C64>::zeros(xs.len(), width);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            g[(r, c)] = *v;
        }
    }
    let us: Vec<f64> = (-radius..=radius).map(|s| s as f64 * h).collect();
    let p = phase_matrix(&us, ys, -2.0 / hbar);
    let out = g * p;
    let pref = h / (PI * hbar);
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for r in 0..xs.len() {
        for c in 0..ys.len() {
            values.push(out[(r, c)] * pref);
        }
    }
    Ok(values)
}

/// Cross-Wigner transform W(ψ,φ) sampled on a 2-D phase grid.
pub fn cross_wigner(
    psi: &SampledFunction,
    phi: &SampledFunction,
    out_grid: &GridSpec,
) -> Result<SampledFunction> {
    check_pair(psi, phi)?;
    out_grid.ensure_dim(2)?;
    if out_grid.hbar() != psi.grid().hbar() {
        return Err(LwError::GridMismatch("phase grid and configuration grid differ in hbar".into()));
    }
    let xs = out_grid.axis(0).coords();
    let ys = out_grid.axis(1).coords();
    let values = wigner_at(psi, phi, &xs, &ys)?;
    Ok(SampledFunction::from_parts(out_grid.clone(), values))
}

/// Grossmann–Royer reflection Π̂(z₀)ψ(x) = e^{2iy₀(x−x₀)/ħ} ψ(2x₀ − x).
pub fn grossmann_royer(z0: &PhasePoint, psi: &SampledFunction) -> Result<SampledFunction> {
    let grid = psi.grid();
    grid.ensure_dim(1)?;
    if z0.n() != 1 {
        return Err(LwError::Dimension { expected: 2, got: z0.coords().len() });
    }
    let ax = grid.axis(0);
    let (x0, y0) = (z0.x()[0], z0.y()[0]);
    if !ax.contains(x0) {
        return Err(LwError::OutOfExtent(format!("x0 = {x0} outside [-{0}, {0})", ax.half_extent)));
    }
    let rev = reversed_line(psi.values());
    let reflected = shift_line(&rev, ax, -2.0 * x0);
    let hbar = grid.hbar();
    let values = reflected
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::from_polar(1.0, 2.0 * y0 * (ax.coord(i) - x0) / hbar))
        .collect();
    Ok(SampledFunction::from_parts(grid.clone(), values))
}
