use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wigner::wigner_at;
use super::{ScalingParams, Window};
use crate::error::{LwError, Result};
use crate::fourier::{phase_matrix, reversed_line, shift_line};
use crate::grid::{inner_product, GridSpec, SampledFunction, C64};

/// The two candidate normalizations of U_φ^{γ,μ}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WavepacketVariant {
    /// (π|γμ|ħ/2)^{1/2} W(ψ,φ)(γx/2, μy/2); an isometry for every (γ, μ).
    Explicit,
    /// (πħ)^{1/2} W(ψ,φ)(x, y), independent of (γ, μ).
    Unscaled,
}

impl WavepacketVariant {
    pub fn tag(&self) -> &'static str {
        match self {
            WavepacketVariant::Explicit => "explicit",
            WavepacketVariant::Unscaled => "unscaled",
        }
    }
}

fn kappa(params: &ScalingParams, hbar: f64) -> f64 {
    (PI * params.product().abs() * hbar / 2.0).sqrt()
}

fn check_phase_grid(config: &GridSpec, phase: &GridSpec) -> Result<()> {
    config.ensure_dim(1)?;
    phase.ensure_dim(2)?;
    if config.hbar() != phase.hbar() {
        return Err(LwError::GridMismatch("configuration and phase grids differ in hbar".into()));
    }
    Ok(())
}

/// U_φ^{γ,μ}ψ sampled on a phase grid.
pub fn wavepacket(
    psi: &SampledFunction,
    phi: &Window,
    params: ScalingParams,
    out_grid: &GridSpec,
) -> Result<SampledFunction> {
    wavepacket_variant(psi, phi, params, out_grid, WavepacketVariant::Explicit)
}

pub fn wavepacket_variant(
    psi: &SampledFunction,
    phi: &Window,
    params: ScalingParams,
    out_grid: &GridSpec,
    variant: WavepacketVariant,
) -> Result<SampledFunction> {
    let params = ScalingParams::new(params.gamma, params.mu)?;
    check_phase_grid(psi.grid(), out_grid)?;
    let hbar = out_grid.hbar();
    let (sx, sy, c) = match variant {
        WavepacketVariant::Explicit => (params.gamma / 2.0, params.mu / 2.0, kappa(&params, hbar)),
        WavepacketVariant::Unscaled => (1.0, 1.0, (PI * hbar).sqrt()),
    };
    let xs: Vec<f64> = out_grid.axis(0).coords().iter().map(|x| sx * x).collect();
    let ys: Vec<f64> = out_grid.axis(1).coords().iter().map(|y| sy * y).collect();
    let w = wigner_at(psi, phi.func(), &xs, &ys)?;
    Ok(SampledFunction::from_parts(out_grid.clone(), w.into_iter().map(|v| v * c).collect()))
}

/// s ↦ coef · ∬ e^{iμy(s−γx/2)/ħ} win(γx − s) Ψ(x, y) dx dy on the configuration grid.
///
/// Both the adjoint of U_φ^{γ,μ} and the reconstruction with a Grossmann–Royer
/// reflection Π̂(z₀/2)win(s) = e^{iy₀(s−x₀/2)/ħ}win(x₀ − s) reduce to this sum.
fn reflect_integrate(
    big_psi: &SampledFunction,
    win: &SampledFunction,
    params: &ScalingParams,
    coef: f64,
) -> SampledFunction {
    let pg = big_psi.grid();
    let cg = win.grid();
    let hbar = pg.hbar();
    let (gamma, mu) = (params.gamma, params.mu);
    let xs = pg.axis(0).coords();
    let ys = pg.axis(1).coords();
    let ss = cg.axis(0).coords();
    let (nx, ny) = (xs.len(), ys.len());

    // M[b, a] = Ψ(x_a, y_b) e^{−iγμ y_b x_a / 2ħ}
    let m = DMatrix::from_fn(ny, nx, |b, a| {
        big_psi.values()[a * ny + b] * C64::from_polar(1.0, -gamma * mu * ys[b] * xs[a] / (2.0 * hbar))
    });
    let f = phase_matrix(&ss, &ys, mu / hbar) * m;

    // win(γx_a − s_j) as a function of s is the reflected window shifted by −γx_a
    let rev = reversed_line(win.values());
    let cols: Vec<Vec<C64>> = xs.par_iter().map(|&x| shift_line(&rev, cg.axis(0), -gamma * x)).collect();
    let weight = coef * pg.cell_volume();
    let values = (0..ss.len())
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for (a, col) in cols.iter().enumerate() {
                acc += f[(j, a)] * col[j];
            }
            acc * weight
        })
        .collect();
    SampledFunction::from_parts(cg.clone(), values)
}

/// (U_φ)*Ψ for (γ, μ) = (1, 1), on the window's configuration grid.
pub fn wavepacket_adjoint(big_psi: &SampledFunction, phi: &Window) -> Result<SampledFunction> {
    wavepacket_adjoint_scaled(big_psi, phi, ScalingParams::unit())
}

/// (U_φ^{γ,μ})*Ψ(s) = κ(πħ)^{−1}∬e^{iμy(s−γx/2)/ħ}φ(γx − s)Ψ(x,y)dx dy, κ = (π|γμ|ħ/2)^{1/2}.
pub fn wavepacket_adjoint_scaled(
    big_psi: &SampledFunction,
    phi: &Window,
    params: ScalingParams,
) -> Result<SampledFunction> {
    let params = ScalingParams::new(params.gamma, params.mu)?;
    check_phase_grid(phi.func().grid(), big_psi.grid())?;
    let hbar = big_psi.grid().hbar();
    let coef = kappa(&params, hbar) / (PI * hbar);
    Ok(reflect_integrate(big_psi, phi.func(), &params, coef))
}

/// Reconstructs ψ from Ψ = U_φψ with an arbitrary reconstruction window γ_win:
/// ψ = (2πħ)^{−1/2}/(γ_win|φ) ∫ Ψ(z₀) Π̂(z₀/2)γ_win dz₀.
pub fn wavepacket_inverse(
    big_psi: &SampledFunction,
    phi: &Window,
    gamma_win: &SampledFunction,
) -> Result<SampledFunction> {
    gamma_win.grid().ensure_same(phi.func().grid())?;
    check_phase_grid(gamma_win.grid(), big_psi.grid())?;
    let overlap = inner_product(gamma_win, phi.func())?;
    if overlap.norm() <= 1e-6 {
        return Err(LwError::IllConditioned(format!(
            "reconstruction window overlap |(gamma|phi)| = {:.3e}",
            overlap.norm()
        )));
    }
    let hbar = big_psi.grid().hbar();
    let coef = (2.0 * PI * hbar).powf(-0.5);
    let out = reflect_integrate(big_psi, gamma_win, &ScalingParams::unit(), coef);
    Ok(out.scaled(overlap.inv()))
}

/// P_φΨ = U_φ^{γ,μ}(U_φ^{γ,μ})*Ψ, on the grid of Ψ.
pub fn projection(big_psi: &SampledFunction, phi: &Window, params: ScalingParams) -> Result<SampledFunction> {
    let back = wavepacket_adjoint_scaled(big_psi, phi, params)?;
    wavepacket(&back, phi, params, big_psi.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::special::{hermite_fn, landau_eigenfunction};

    fn grids() -> (GridSpec, GridSpec) {
        (make_grid(1, 8.0, 256, 1.0).unwrap(), make_grid(2, 12.0, 192, 1.0).unwrap())
    }

    #[test]
    fn ground_state_image_is_landau_ground_state() {
        let (g, p) = grids();
        let f = hermite_fn(0, &g).unwrap();
        let w = Window::new(f.clone()).unwrap();
        let u = wavepacket(&f, &w, ScalingParams::unit(), &p).unwrap();
        let want = landau_eigenfunction(0, 0, &p).unwrap();
        assert!(u.distance(&want).unwrap() < 1e-12);
    }

    #[test]
    fn isometry_adjoint_and_inverse() {
        let (g, p) = grids();
        let w = Window::new(hermite_fn(0, &g).unwrap()).unwrap();
        let psi = hermite_fn(2, &g).unwrap();
        for params in [ScalingParams::unit(), ScalingParams::new(2.0, 1.0).unwrap()] {
            let u = wavepacket(&psi, &w, params, &p).unwrap();
            assert!((u.norm() - 1.0).abs() < 1e-10);
            let back = wavepacket_adjoint_scaled(&u, &w, params).unwrap();
            assert!(back.distance(&psi).unwrap() < 1e-9);
        }
        let u = wavepacket(&psi, &w, ScalingParams::unit(), &p).unwrap();
        let gw = hermite_fn(0, &g).unwrap().axpy(C64::new(0.5, 0.0), &hermite_fn(1, &g).unwrap()).unwrap();
        let rec = wavepacket_inverse(&u, &w, &gw).unwrap();
        assert!(rec.distance(&psi).unwrap() < 1e-8);
        let orth = hermite_fn(1, &g).unwrap();
        assert!(matches!(wavepacket_inverse(&u, &w, &orth), Err(LwError::IllConditioned(_))));
    }

    #[test]
    fn unscaled_variant_is_not_isometric() {
        let (g, p) = grids();
        let f = hermite_fn(0, &g).unwrap();
        let w = Window::new(f.clone()).unwrap();
        let u = wavepacket_variant(&f, &w, ScalingParams::unit(), &p, WavepacketVariant::Unscaled).unwrap();
        assert!((u.norm().powi(2) - 0.5).abs() < 1e-10);
    }
}
