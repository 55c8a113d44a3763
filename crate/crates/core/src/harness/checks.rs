use std::f64::consts::PI;

use rayon::prelude::*;

use super::report::VerificationReport;
use crate::error::{LwError, Result};
use crate::fourier::fft_all;
use crate::grid::{inner_product, GridSpec, PhasePoint, SampledFunction};
use crate::landau::{landau_translation, lw_operator, LwRoute};
use crate::transforms::{cross_wigner, wavepacket, wavepacket_adjoint_scaled, wavepacket_variant, ScalingParams, Window, WavepacketVariant};
use crate::weyl::{heisenberg_weyl, weyl_quantize, Symbol};

/// Largest configuration grid accepted by the eigen-transfer check.
pub const TRANSFER_NODE_LIMIT: usize = 1024;

/// Fraction of spectral mass at wavenumbers above 80% of the Nyquist value on any axis.
pub fn spectral_tail(f: &SampledFunction) -> f64 {
    let shape = f.grid().shape();
    let mut c = f.values().to_vec();
    fft_all(&mut c, &shape, false);
    let total: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut tail = 0.0;
    for (idx, v) in c.iter().enumerate() {
        let mut rem = idx;
        let mut outer = false;
        for &n in shape.iter().rev() {
            let m = rem % n;
            rem /= n;
            let k = m.min(n - m);
            if 10 * k >= 4 * n {
                outer = true;
            }
        }
        if outer {
            tail += v.norm_sqr();
        }
    }
    tail / total
}

/// Rejects phase grids whose Nyquist band cannot hold Landau functions Φ_{j,k} with
/// j + k ≤ n. Their Fourier transforms decay like |k|^n e^{−k²}, so the band must reach
/// past √(n/2 + 1) by enough for e^{−k²} to fall below 1e−13.
pub fn ensure_landau_resolved(grid2: &GridSpec, n: usize) -> Result<()> {
    grid2.ensure_dim(2)?;
    let need = (n as f64 / 2.0 + 1.0).sqrt() + 5.5;
    for ax in grid2.axes() {
        let band = PI / ax.spacing();
        if band < need {
            return Err(LwError::IllConditioned(format!(
                "grid band {band:.2} cannot resolve Landau functions up to j+k = {n} (needs {need:.2})"
            )));
        }
    }
    Ok(())
}

fn variant_tag(route: LwRoute, variant: WavepacketVariant, params: ScalingParams) -> String {
    format!("route={}; wavepacket={}; gamma={}; mu={}", route.tag(), variant.tag(), params.gamma, params.mu)
}

/// Where U_φ images live and how Ã^{γ,μ} is built.
#[derive(Clone, Debug)]
pub struct IntertwiningSetup {
    pub phase_grid: GridSpec,
    pub route: LwRoute,
    pub variant: WavepacketVariant,
}

/// max_ψ ‖Ã^{γ,μ}U_φψ − U_φAψ‖/‖ψ‖ with A = weyl_quantize(a).
pub fn intertwining_residual(
    a: &Symbol,
    phi: &Window,
    params: ScalingParams,
    test_set: &[SampledFunction],
    setup: &IntertwiningSetup,
) -> Result<VerificationReport> {
    if test_set.is_empty() {
        return Err(LwError::InvalidParameter("intertwining test set is empty".into()));
    }
    let cgrid = phi.func().grid();
    for psi in test_set {
        psi.grid().ensure_same(cgrid)?;
    }
    let op = weyl_quantize(a, cgrid)?;
    let lw = lw_operator(a, &setup.phase_grid, params, setup.route)?;
    let residuals = test_set
        .par_iter()
        .map(|psi| -> Result<f64> {
            let u = wavepacket_variant(psi, phi, params, &setup.phase_grid, setup.variant)?;
            let lhs = lw.apply(&u)?;
            let rhs = wavepacket_variant(&op.apply(psi)?, phi, params, &setup.phase_grid, setup.variant)?;
            Ok(lhs.distance(&rhs)? / psi.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    Ok(VerificationReport::new(
        "intertwining",
        "A~ U_phi = U_phi A",
        "intertwining",
        worst,
        1e-6,
        &variant_tag(setup.route, setup.variant, params),
    ))
}

/// max ‖T̃(z)U_φψ − U_φT(z)ψ‖/‖ψ‖ over the given points, for (γ, μ) = (1, 1).
pub fn translation_intertwining_residual(
    phi: &Window,
    test_set: &[SampledFunction],
    points: &[PhasePoint],
    phase_grid: &GridSpec,
) -> Result<VerificationReport> {
    let unit = ScalingParams::unit();
    let mut worst = 0.0f64;
    for psi in test_set {
        let u = wavepacket(psi, phi, unit, phase_grid)?;
        let r = points
            .par_iter()
            .map(|z| -> Result<f64> {
                let lhs = landau_translation(z, &u, unit)?;
                let rhs = wavepacket(&heisenberg_weyl(z, psi)?, phi, unit, phase_grid)?;
                Ok(lhs.distance(&rhs)? / psi.norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        worst = r.into_iter().fold(worst, f64::max);
    }
    Ok(VerificationReport::new(
        "translation-intertwining",
        "T~(z) U_phi = U_phi T(z)",
        "intertwining",
        worst,
        1e-8,
        "gamma=1; mu=1; wavepacket=explicit",
    ))
}

/// Everything the eigen-transfer check needs besides the symbol.
#[derive(Clone, Debug)]
pub struct TransferSetup {
    pub phi: Window,
    pub params: ScalingParams,
    pub phase_grid: GridSpec,
    pub route: LwRoute,
}

/// Solves A for its lowest eigenpairs and checks both transfer directions:
/// ‖ÃU_φψ_j − λ_jU_φψ_j‖ and ‖AU_φ*Ψ_j − U_φ*ÃΨ_j‖, relative to ‖ψ_j‖, plus the
/// round trip ‖U_φ*U_φψ_j − ψ_j‖ (reported in `extra`).
pub fn eigen_transfer_check(a: &Symbol, n_levels: usize, setup: &TransferSetup) -> Result<VerificationReport> {
    let cgrid = setup.phi.func().grid();
    if cgrid.len() > TRANSFER_NODE_LIMIT {
        return Err(LwError::TooLarge { nodes: cgrid.len(), limit: TRANSFER_NODE_LIMIT });
    }
    if n_levels == 0 {
        return Err(LwError::InvalidParameter("n_levels must be positive".into()));
    }
    let op = weyl_quantize(a, cgrid)?;
    let (values, vectors) = op.hermitian_eigen(n_levels)?;
    let lw = lw_operator(a, &setup.phase_grid, setup.params, setup.route)?;
    let per_level = vectors
        .par_iter()
        .zip(values.par_iter())
        .map(|(psi, &lambda)| -> Result<(f64, f64, f64)> {
            let u = wavepacket(psi, &setup.phi, setup.params, &setup.phase_grid)?;
            let au = lw.apply(&u)?;
            let forward = au.distance(&u.scaled(lambda.into()))? / psi.norm();
            let back = wavepacket_adjoint_scaled(&u, &setup.phi, setup.params)?;
            let lhs = op.apply(&back)?;
            let rhs = wavepacket_adjoint_scaled(&au, &setup.phi, setup.params)?;
            let backward = lhs.distance(&rhs)? / psi.norm();
            let round = back.distance(psi)? / psi.norm();
            Ok((forward, backward, round))
        })
        .collect::<Result<Vec<_>>>()?;
    let fwd = per_level.iter().fold(0.0f64, |m, r| m.max(r.0));
    let bwd = per_level.iter().fold(0.0f64, |m, r| m.max(r.1));
    let rt = per_level.iter().fold(0.0f64, |m, r| m.max(r.2));
    let mut report = VerificationReport::new(
        "eigen-transfer",
        "A psi = lambda psi  <=>  A~ U_phi psi = lambda U_phi psi",
        "eigen",
        fwd.max(bwd),
        1e-5,
        &variant_tag(setup.route, WavepacketVariant::Explicit, setup.params),
    )
    .with_extra("forward", fwd)
    .with_extra("backward", bwd)
    .with_extra("round_trip", rt);
    for (j, l) in values.iter().enumerate() {
        report = report.with_extra(&format!("lambda_{j}"), *l);
    }
    Ok(report)
}

/// max |((W(ψ₁,φ₁)|W(ψ₂,φ₂))) − (2πħ)^{−1}(ψ₁|ψ₂)conj((φ₁|φ₂))| over all quadruples
/// drawn from `fixtures`.
pub fn moyal_identity_residual(fixtures: &[SampledFunction], phase_grid: &GridSpec) -> Result<f64> {
    let n = fixtures.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let ws = pairs
        .par_iter()
        .map(|&(a, b)| cross_wigner(&fixtures[a], &fixtures[b], phase_grid))
        .collect::<Result<Vec<_>>>()?;
    let mut gram = vec![vec![num_complex::Complex64::new(0.0, 0.0); n]; n];
    for a in 0..n {
        for b in 0..n {
            gram[a][b] = inner_product(&fixtures[a], &fixtures[b])?;
        }
    }
    let c = 1.0 / (2.0 * PI * phase_grid.hbar());
    let worst = (0..pairs.len())
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let (j, k) = pairs[p];
            let mut m = 0.0f64;
            for (q, &(l, mm)) in pairs.iter().enumerate() {
                let lhs = inner_product(&ws[p], &ws[q])?;
                let rhs = gram[j][l] * gram[k][mm].conj() * c;
                m = m.max((lhs - rhs).norm());
            }
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}
