use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wigner::wigner_at;
use super::{StftConvention, Window};
use crate::error::{LwError, Result};
use crate::fourier::{phase_matrix, resample_1d, reversed_line, shift_line};
use crate::grid::{GridSpec, SampledFunction, C64};

/// V_φψ(x₀, y₀) on the tensor product of arbitrary x₀ and y₀ coordinates (x₀ slowest).
///
/// `phi` is a raw sample vector on the grid of `psi`; it need not be normalized.
pub(crate) fn stft_tensor(
    psi: &SampledFunction,
    phi: &[C64],
    x0s: &[f64],
    y0s: &[f64],
    conv: StftConvention,
) -> Vec<C64> {
    let grid = psi.grid();
    let ax = grid.axis(0);
    let h = ax.spacing();
    let hbar = grid.hbar();
    let xs = ax.coords();

    // rows: ψ(x_j) conj(φ(x_j − x₀))
    let rows: Vec<Vec<C64>> = x0s
        .par_iter()
        .map(|&x0| {
            let win = shift_line(phi, ax, -x0);
            psi.values().iter().zip(&win).map(|(p, w)| p * w.conj()).collect()
        })
        .collect();
    let g = DMatrix::from_fn(x0s.len(), xs.len(), |r, c| rows[r][c]);
    let scale = match conv {
        StftConvention::Tf => 2.0 * PI,
        StftConvention::Hbar => 1.0 / hbar,
    };
    let out = g * phase_matrix(&xs, y0s, scale);
    let mut values = Vec::with_capacity(x0s.len() * y0s.len());
    for (r, &x0) in x0s.iter().enumerate() {
        for (c, &y0) in y0s.iter().enumerate() {
            let mut v = out[(r, c)] * h;
            if conv == StftConvention::Hbar {
                v *= C64::from_polar(1.0, y0 * x0 / (2.0 * hbar));
            }
            values.push(v);
        }
    }
    values
}

fn check_stft_inputs(psi: &SampledFunction, phi: &Window, out_grid: &GridSpec) -> Result<()> {
    psi.grid().ensure_dim(1)?;
    psi.grid().ensure_same(phi.func().grid())?;
    out_grid.ensure_dim(2)
}

/// Short-time Fourier transform V_φψ sampled on a 2-D phase grid.
pub fn stft(
    psi: &SampledFunction,
    phi: &Window,
    out_grid: &GridSpec,
    conv: StftConvention,
) -> Result<SampledFunction> {
    check_stft_inputs(psi, phi, out_grid)?;
    let xs = out_grid.axis(0).coords();
    let ys = out_grid.axis(1).coords();
    let values = stft_tensor(psi, phi.func().values(), &xs, &ys, conv);
    Ok(SampledFunction::from_parts(out_grid.clone(), values))
}

/// V_φψ at scattered phase-space points.
pub fn stft_points(
    psi: &SampledFunction,
    phi: &Window,
    points: &[(f64, f64)],
    conv: StftConvention,
) -> Result<Vec<C64>> {
    psi.grid().ensure_dim(1)?;
    psi.grid().ensure_same(phi.func().grid())?;
    Ok(points
        .iter()
        .map(|&(x0, y0)| stft_tensor(psi, phi.func().values(), &[x0], &[y0], conv)[0])
        .collect())
}

/// Residuals of an identity checked in two forms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationCheck {
    /// Max abs residual of the form derived by substitution from the definitions.
    pub derived: f64,
    /// Max abs residual with the argument scaling z/λ (or z/c) taken at face value.
    pub literal: f64,
    /// Largest modulus of the left-hand side, for scale.
    pub lhs_max: f64,
}

fn dilated(f: &SampledFunction, lambda: f64) -> Vec<C64> {
    let targets: Vec<f64> = f.grid().axis(0).coords().iter().map(|x| lambda * x).collect();
    resample_1d(f, &targets)
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (p, q)| m.max((p - q).norm()))
}

pub(crate) fn default_check_axes(psi: &SampledFunction) -> (Vec<f64>, Vec<f64>) {
    let ax = psi.grid().axis(0);
    let n = 32;
    let step = ax.half_extent / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| -ax.half_extent / 2.0 + i as f64 * step).collect();
    let ys: Vec<f64> = (0..n).map(|i| -2.0 + i as f64 * 4.0 / n as f64).collect();
    (xs, ys)
}

/// Checks V_φ(ψ_λ)(x,y) = |λ|^{−1}V_{φ_{1/λ}}ψ(λx, y/λ) with ψ_λ(x) = ψ(λx), TF kernel.
///
/// The literal residual replaces (λx, y/λ) with (x/λ, y/λ). Both sides are evaluated
/// on the tensor coordinates `xs × ys`.
pub fn rescaled_stft_identity_check(
    psi: &SampledFunction,
    phi: &Window,
    lambda: f64,
    xs: &[f64],
    ys: &[f64],
) -> Result<RelationCheck> {
    psi.grid().ensure_dim(1)?;
    psi.grid().ensure_same(phi.func().grid())?;
    if !lambda.is_finite() || !(0.25..=4.0).contains(&lambda.abs()) {
        return Err(LwError::InvalidParameter(format!(
            "|lambda| must lie in [1/4, 4], got {lambda}"
        )));
    }
    let conv = StftConvention::Tf;
    let psi_l = SampledFunction::from_parts(psi.grid().clone(), dilated(psi, lambda));
    let phi_inv = dilated(phi.func(), 1.0 / lambda);
    let lhs = stft_tensor(&psi_l, phi.func().values(), xs, ys, conv);
    let scale = 1.0 / lambda.abs();
    let ys_d: Vec<f64> = ys.iter().map(|y| y / lambda).collect();
    let xs_d: Vec<f64> = xs.iter().map(|x| lambda * x).collect();
    let xs_l: Vec<f64> = xs.iter().map(|x| x / lambda).collect();
    let rhs: Vec<C64> = stft_tensor(psi, &phi_inv, &xs_d, &ys_d, conv).iter().map(|v| v * scale).collect();
    let lit: Vec<C64> = stft_tensor(psi, &phi_inv, &xs_l, &ys_d, conv).iter().map(|v| v * scale).collect();
    Ok(RelationCheck {
        derived: max_diff(&lhs, &rhs),
        literal: max_diff(&lhs, &lit),
        lhs_max: lhs.iter().fold(0.0, |m, v| m.max(v.norm())),
    })
}

/// Derived-form residual of the rescaling identity on a default 32×32 patch.
pub fn rescaled_stft_identity_residual(psi: &SampledFunction, phi: &Window, lambda: f64) -> Result<f64> {
    let (xs, ys) = default_check_axes(psi);
    Ok(rescaled_stft_identity_check(psi, phi, lambda, &xs, &ys)?.derived)
}

/// Checks W(ψ,φ)(x,y) = (2/πħ)^{1/2} e^{2ixy/ħ} V_{φ̌_c}ψ_c(2x/c, −2y/c), c = √(2πħ), TF kernel.
///
/// Here ψ_c(t) = ψ(ct) and φ̌(t) = φ(−t). The literal residual evaluates V at (x/c, y/c).
pub fn stft_wigner_relation_check(
    psi: &SampledFunction,
    phi: &SampledFunction,
    xs: &[f64],
    ys: &[f64],
) -> Result<RelationCheck> {
    psi.grid().ensure_dim(1)?;
    psi.grid().ensure_same(phi.grid())?;
    let hbar = psi.grid().hbar();
    let c = (2.0 * PI * hbar).sqrt();
    let lhs = wigner_at(psi, phi, xs, ys)?;
    let psi_c = SampledFunction::from_parts(psi.grid().clone(), dilated(psi, c));
    let phi_check = SampledFunction::from_parts(phi.grid().clone(), reversed_line(phi.values()));
    let phi_cc = dilated(&phi_check, c);
    let pref = (2.0 / (PI * hbar)).sqrt();
    let side = |ax: Vec<f64>, ay: Vec<f64>| -> Vec<C64> {
        let v = stft_tensor(&psi_c, &phi_cc, &ax, &ay, StftConvention::Tf);
        let mut out = Vec::with_capacity(v.len());
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                out.push(v[i * ys.len() + j] * C64::from_polar(pref, 2.0 * x * y / hbar));
            }
        }
        out
    };
    let rhs = side(xs.iter().map(|x| 2.0 * x / c).collect(), ys.iter().map(|y| -2.0 * y / c).collect());
    let lit = side(xs.iter().map(|x| x / c).collect(), ys.iter().map(|y| y / c).collect());
    Ok(RelationCheck {
        derived: max_diff(&lhs, &rhs),
        literal: max_diff(&lhs, &lit),
        lhs_max: lhs.iter().fold(0.0, |m, v| m.max(v.norm())),
    })
}

/// Derived-form residual of the STFT–Wigner bridge on a default 32×32 patch.
pub fn stft_wigner_relation_residual(psi: &SampledFunction, phi: &SampledFunction) -> Result<f64> {
    let (xs, ys) = default_check_axes(psi);
    Ok(stft_wigner_relation_check(psi, phi, &xs, &ys)?.derived)
}

/// Truncated weighted modulation norm with its boundary-mass diagnostic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulationNorm {
    pub value: f64,
    pub p: f64,
    pub s: f64,
    pub convention: StftConvention,
    pub boundary_mass: f64,
    /// False when more than 1e−6 of the squared STFT mass sits at the grid edge.
    pub reliable: bool,
}

/// (∫|V_φψ(z)|^p ⟨z⟩^{ps} dz)^{1/p} over the phase grid; `p = ∞` gives the weighted sup.
pub fn modulation_norm(
    psi: &SampledFunction,
    phi: &Window,
    p: f64,
    s: f64,
    out_grid: &GridSpec,
    conv: StftConvention,
) -> Result<ModulationNorm> {
    if !(p >= 1.0) || !(s >= 0.0) || s.is_infinite() {
        return Err(LwError::InvalidParameter(format!("need p >= 1 and finite s >= 0, got p={p}, s={s}")));
    }
    let v = stft(psi, phi, out_grid, conv)?;
    let weight = |i: usize| {
        let z = out_grid.node(i);
        (1.0 + z[0] * z[0] + z[1] * z[1]).powf(s / 2.0)
    };
    let value = if p.is_infinite() {
        v.values().iter().enumerate().fold(0.0f64, |m, (i, c)| m.max(c.norm() * weight(i)))
    } else {
        let sum: f64 = v
            .values()
            .iter()
            .enumerate()
            .map(|(i, c)| (c.norm() * weight(i)).powf(p))
            .sum();
        (sum * out_grid.cell_volume()).powf(1.0 / p)
    };
    let boundary_mass = v.boundary_mass(2);
    Ok(ModulationNorm { value, p, s, convention: conv, boundary_mass, reliable: boundary_mass <= 1e-6 })
}

/// The ħ-Fourier transform Fψ(x) = (2πħ)^{−1/2}∫e^{−ixx′/ħ}ψ(x′)dx′, sampled on the input grid.
pub fn metaplectic_fourier(psi: &SampledFunction) -> Result<SampledFunction> {
    psi.grid().ensure_dim(1)?;
    let ax = psi.grid().axis(0);
    let hbar = psi.grid().hbar();
    let xs = ax.coords();
    let m = phase_matrix(&xs, &xs, -1.0 / hbar);
    let v = nalgebra::DVector::from_column_slice(psi.values());
    let c = ax.spacing() / (2.0 * PI * hbar).sqrt();
    let out: Vec<C64> = (m * v).iter().map(|z| z * c).collect();
    Ok(SampledFunction::from_parts(psi.grid().clone(), out))
}

/// The unitary dilation ψ ↦ |λ|^{1/2}ψ(λx), by band-limited resampling.
pub fn metaplectic_dilation(psi: &SampledFunction, lambda: f64) -> Result<SampledFunction> {
    psi.grid().ensure_dim(1)?;
    if !lambda.is_finite() || !(0.25..=4.0).contains(&lambda.abs()) {
        return Err(LwError::InvalidParameter(format!("|lambda| must lie in [1/4, 4], got {lambda}")));
    }
    let c = lambda.abs().sqrt();
    let values = dilated(psi, lambda).into_iter().map(|v| v * c).collect();
    Ok(SampledFunction::from_parts(psi.grid().clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::special::{hermite_fn, hermite_value};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn window(k: usize, g: &GridSpec) -> Window {
        Window::new(hermite_fn(k, g).unwrap()).unwrap()
    }

    #[test]
    fn stft_at_origin_is_window_norm() {
        let g = make_grid(1, 8.0, 256, 1.0).unwrap();
        let f = hermite_fn(0, &g).unwrap();
        let v = stft_points(&f, &window(0, &g), &[(0.0, 0.0)], StftConvention::Tf).unwrap();
        assert!((v[0] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn stft_matches_closed_form_window_quadrature() {
        // Oracle: the window is evaluated in closed form at x_j − x₀ instead of by FFT shift.
        let g = make_grid(1, 8.0, 256, 1.0).unwrap();
        let psi = hermite_fn(2, &g).unwrap();
        let w = window(0, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<(f64, f64)> = (0..25).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0))).collect();
        let got = stft_points(&psi, &w, &pts, StftConvention::Tf).unwrap();
        let h = g.spacing(0);
        for (k, &(x0, y0)) in pts.iter().enumerate() {
            let want: C64 = g
                .axis(0)
                .coords()
                .iter()
                .map(|&x| C64::from_polar(hermite_value(2, x) * hermite_value(0, x - x0) * h, 2.0 * PI * y0 * x))
                .sum();
            assert!((got[k] - want).norm() < 1e-9, "{k}: {} vs {}", got[k], want);
        }
    }

    #[test]
    fn hbar_convention_at_tf_scale() {
        let g = make_grid(1, 8.0, 256, 1.0 / (2.0 * PI)).unwrap();
        let psi = hermite_fn(1, &g).unwrap();
        let w = window(0, &g);
        let out = make_grid(2, 2.0, 16, g.hbar()).unwrap();
        let a = stft(&psi, &w, &out, StftConvention::Tf).unwrap();
        let b = stft(&psi, &w, &out, StftConvention::Hbar).unwrap();
        for (i, (p, q)) in a.values().iter().zip(b.values()).enumerate() {
            let z = out.node(i);
            let ph = C64::from_polar(1.0, z[0] * z[1] / (2.0 * g.hbar()));
            assert!((p * ph - q).norm() < 1e-12);
        }
    }

    #[test]
    fn rescaling_identity_and_literal_form() {
        let g = make_grid(1, 16.0, 512, 1.0).unwrap();
        let psi = hermite_fn(0, &g).unwrap();
        let w = window(0, &g);
        assert!(rescaled_stft_identity_residual(&psi, &w, 1.0).unwrap() < 1e-13);
        let c = rescaled_stft_identity_check(&psi, &w, 2.0, &[1.0], &[0.0]).unwrap();
        assert!(c.derived < 1e-10);
        assert!(c.literal > 1e-2);
        assert!(rescaled_stft_identity_residual(&psi, &w, 5.0).is_err());
    }

    #[test]
    fn bridge_vanishes_for_zero_input() {
        let g = make_grid(1, 8.0, 256, 1.0).unwrap();
        let zero = SampledFunction::zeros(&g);
        let phi = hermite_fn(0, &g).unwrap();
        assert_eq!(stft_wigner_relation_residual(&zero, &phi).unwrap(), 0.0);
    }

    #[test]
    fn weighted_norm_grows_with_s() {
        let g = make_grid(1, 8.0, 256, 1.0 / (2.0 * PI)).unwrap();
        let out = make_grid(2, 8.0, 64, g.hbar()).unwrap();
        let psi = hermite_fn(0, &g).unwrap();
        let w = window(0, &g);
        let a = modulation_norm(&psi, &w, 1.0, 0.0, &out, StftConvention::Tf).unwrap();
        let b = modulation_norm(&psi, &w, 1.0, 2.0, &out, StftConvention::Tf).unwrap();
        assert!(a.reliable && b.value > a.value);
    }

    #[test]
    fn fourier_of_hermite_is_eigen() {
        let g = make_grid(1, 10.0, 256, 1.0).unwrap();
        for k in 0..4 {
            let f = hermite_fn(k, &g).unwrap();
            let ff = metaplectic_fourier(&f).unwrap();
            let want = f.scaled(C64::new(0.0, -1.0).powu(k as u32));
            assert!(ff.distance(&want).unwrap() < 1e-12);
        }
    }
}
