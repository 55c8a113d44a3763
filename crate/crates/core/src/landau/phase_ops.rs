use crate::error::{LwError, Result};
use crate::fourier::{resample_2d, shift_line, spectral_derivative};
use crate::grid::{PhasePoint, SampledFunction, C64};
use crate::transforms::ScalingParams;

/// Relative squared mass within two cells of the edge above which a phase-space
/// function is treated as not boundary-negligible.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-3;

/// T̃^{γ,μ}(z₀)Ψ(z) = e^{−iγμσ(z,z₀)/2ħ}Ψ(z − z₀).
pub fn landau_translation(z0: &PhasePoint, big_psi: &SampledFunction, params: ScalingParams) -> Result<SampledFunction> {
    let params = ScalingParams::new(params.gamma, params.mu)?;
    let grid = big_psi.grid();
    grid.ensure_dim(2)?;
    if z0.n() != 1 {
        return Err(LwError::Dimension { expected: 2, got: z0.coords().len() });
    }
    let (x0, y0) = (z0.x()[0], z0.y()[0]);
    let (ax, ay) = (grid.axis(0), grid.axis(1));
    if x0.abs() > ax.half_extent || y0.abs() > ay.half_extent {
        return Err(LwError::OutOfExtent(format!(
            "shift ({x0}, {y0}) exceeds half extents ({}, {})",
            ax.half_extent, ay.half_extent
        )));
    }
    let (nx, ny) = (ax.points, ay.points);
    let mut v = big_psi.values().to_vec();
    for i in 0..nx {
        let row = shift_line(&v[i * ny..(i + 1) * ny], ay, -y0);
        v[i * ny..(i + 1) * ny].copy_from_slice(&row);
    }
    for j in 0..ny {
        let col: Vec<C64> = (0..nx).map(|i| v[i * ny + j]).collect();
        for (i, c) in shift_line(&col, ax, -x0).into_iter().enumerate() {
            v[i * ny + j] = c;
        }
    }
    let tau = params.product() / (2.0 * grid.hbar());
    let (xs, ys) = (ax.coords(), ay.coords());
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            // σ(z, z₀) = y·x₀ − x·y₀
            v[i * ny + j] *= C64::from_polar(1.0, -tau * (y * x0 - x * y0));
        }
    }
    Ok(SampledFunction::from_parts(grid.clone(), v))
}

/// S̃^{γ,μ}Ψ(x, y) = |γμ|^{1/2}Ψ(γx, μy), the unitary phase-space dilation.
pub fn metaplectic_rescale(big_psi: &SampledFunction, params: ScalingParams) -> Result<SampledFunction> {
    let params = ScalingParams::new(params.gamma, params.mu)?;
    let grid = big_psi.grid();
    grid.ensure_dim(2)?;
    for s in [params.gamma, params.mu] {
        if !(0.25..=4.0).contains(&s.abs()) {
            return Err(LwError::InvalidParameter(format!("rescaling factor {s} outside [1/4, 4] in modulus")));
        }
    }
    let xs: Vec<f64> = grid.axis(0).coords().iter().map(|x| params.gamma * x).collect();
    let ys: Vec<f64> = grid.axis(1).coords().iter().map(|y| params.mu * y).collect();
    let c = params.product().abs().sqrt();
    let v = resample_2d(big_psi, &xs, &ys).into_iter().map(|v| v * c).collect();
    Ok(SampledFunction::from_parts(grid.clone(), v))
}

/// H_sym = −(ħ²/2m)Δ − iħω_L(y∂_x − x∂_y) + (mω_L²/2)(x² + y²) applied with spectral
/// derivatives.
pub fn magnetic_hamiltonian_apply(big_psi: &SampledFunction, m: f64, omega_l: f64) -> Result<SampledFunction> {
    let grid = big_psi.grid();
    grid.ensure_dim(2)?;
    if !(m > 0.0 && m.is_finite() && omega_l.is_finite()) {
        return Err(LwError::InvalidParameter(format!("mass {m} and Larmor frequency {omega_l}")));
    }
    let edge = big_psi.boundary_mass(2);
    if edge > BOUNDARY_MASS_LIMIT {
        return Err(LwError::IllConditioned(format!("boundary mass {edge:.3e} exceeds {BOUNDARY_MASS_LIMIT:.0e}")));
    }
    let hbar = grid.hbar();
    let dxx = spectral_derivative(big_psi, &[2, 0]);
    let dyy = spectral_derivative(big_psi, &[0, 2]);
    let dx = spectral_derivative(big_psi, &[1, 0]);
    let dy = spectral_derivative(big_psi, &[0, 1]);
    let (xs, ys) = (grid.axis(0).coords(), grid.axis(1).coords());
    let ny = ys.len();
    let kin = -hbar * hbar / (2.0 * m);
    let rot = C64::new(0.0, -hbar * omega_l);
    let pot = m * omega_l * omega_l / 2.0;
    let v = (0..big_psi.values().len())
        .map(|idx| {
            let (x, y) = (xs[idx / ny], ys[idx % ny]);
            (dxx.values()[idx] + dyy.values()[idx]) * kin
                + rot * (dx.values()[idx] * y - dy.values()[idx] * x)
                + big_psi.values()[idx] * (pot * (x * x + y * y))
        })
        .collect();
    Ok(SampledFunction::from_parts(grid.clone(), v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, symplectic_form};
    use crate::special::landau_eigenfunction;

    fn grid() -> crate::grid::GridSpec {
        make_grid(2, 14.0, 112, 1.0).unwrap()
    }

    #[test]
    fn translation_cocycle_and_unitarity() {
        let g = grid();
        let f = landau_eigenfunction(1, 2, &g).unwrap();
        for params in [ScalingParams::unit(), ScalingParams::new(2.0, 1.0).unwrap()] {
            let (z0, z1) = (PhasePoint::xy(0.75, -0.5), PhasePoint::xy(-0.25, 1.0));
            let lhs = landau_translation(&z0.plus(&z1), &f, params).unwrap();
            let step = landau_translation(&z1, &f, params).unwrap();
            let rhs = landau_translation(&z0, &step, params).unwrap();
            let phase = -params.product() * symplectic_form(&z0, &z1).unwrap() / 2.0;
            let rhs = rhs.scaled(C64::from_polar(1.0, phase));
            assert!(lhs.distance(&rhs).unwrap() < 1e-9);
            assert!((lhs.norm() - f.norm()).abs() < 1e-10);
        }
        let same = landau_translation(&PhasePoint::xy(0.0, 0.0), &f, ScalingParams::unit()).unwrap();
        assert_eq!(same.values(), f.values());
        assert!(landau_translation(&PhasePoint::xy(15.0, 0.0), &f, ScalingParams::unit()).is_err());
    }

    #[test]
    fn rescaling_is_unitary_and_invertible() {
        let g = grid();
        let f = landau_eigenfunction(0, 0, &g).unwrap();
        let s = metaplectic_rescale(&f, ScalingParams::new(2.0, 3.0).unwrap()).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-9);
        let p = ScalingParams::new(2.0, 1.0).unwrap();
        let back = metaplectic_rescale(&metaplectic_rescale(&f, p).unwrap(), ScalingParams::new(0.5, 1.0).unwrap()).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-8);
        assert!(metaplectic_rescale(&f, ScalingParams::new(5.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn magnetic_levels_and_free_limit() {
        let g = grid();
        for (j, k) in [(0, 0), (1, 3), (4, 4), (3, 0)] {
            let f = landau_eigenfunction(j, k, &g).unwrap();
            let hf = magnetic_hamiltonian_apply(&f, 1.0, 0.5).unwrap();
            let want = f.scaled(C64::new(j as f64 + 0.5, 0.0));
            assert!(hf.distance(&want).unwrap() < 1e-9, "({j},{k})");
        }
        let f = landau_eigenfunction(1, 1, &g).unwrap();
        let free = magnetic_hamiltonian_apply(&f, 2.0, 0.0).unwrap();
        let lap = spectral_derivative(&f, &[2, 0]).add(&spectral_derivative(&f, &[0, 2])).unwrap();
        assert_eq!(free.values(), lap.scaled(C64::new(-0.25, 0.0)).values());
    }
}
