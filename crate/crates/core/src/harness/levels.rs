use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::ensure_landau_resolved;
use super::report::{EigenEntry, EigenReport};
use crate::error::{LwError, Result};
use crate::grid::{inner_product, GridSpec, SampledFunction, C64};
use crate::landau::magnetic_hamiltonian_apply;
use crate::special::landau_eigenfunction;

fn require_unit_hbar(grid2: &GridSpec) -> Result<()> {
    if (grid2.hbar() - 1.0).abs() > 1e-12 {
        return Err(LwError::InvalidParameter(format!("the Landau basis is fixed at hbar = 1, grid has {}", grid2.hbar())));
    }
    Ok(())
}

fn basis(grid2: &GridSpec, j_max: usize, k_max: usize) -> Result<Vec<((usize, usize), SampledFunction)>> {
    let labels: Vec<(usize, usize)> = (0..=j_max).flat_map(|j| (0..=k_max).map(move |k| (j, k))).collect();
    labels.into_par_iter().map(|(j, k)| Ok(((j, k), landau_eigenfunction(j, k, grid2)?))).collect()
}

/// Residuals of H_symΦ_{j,k} = (j + ½)Φ_{j,k} (ħ = m = ω = 1, ω_L = ½) for j ≤ j_max,
/// k ≤ k_max, with the Gram deviation of the same family.
pub fn landau_report(grid2: &GridSpec, j_max: usize, k_max: usize) -> Result<EigenReport> {
    require_unit_hbar(grid2)?;
    ensure_landau_resolved(grid2, j_max + k_max)?;
    let fs = basis(grid2, j_max, k_max)?;
    let entries = fs
        .par_iter()
        .map(|((j, k), f)| -> Result<EigenEntry> {
            let level = *j as f64 + 0.5;
            let hf = magnetic_hamiltonian_apply(f, 1.0, 0.5)?;
            let residual = hf.distance(&f.scaled(C64::new(level, 0.0)))? / f.norm();
            Ok(EigenEntry { index: 0, j: Some(*j), k: Some(*k), level, residual, cluster: 0 })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = EigenReport::build(
        entries,
        1e-9,
        format!("phase {}x{} on [-{},{})^2", grid2.axis(0).points, grid2.axis(1).points, grid2.axis(0).half_extent, grid2.axis(0).half_extent),
        "magnetic H_sym (m=1, omega_L=1/2)".into(),
        "magnetic-hamiltonian".into(),
    );
    let funcs: Vec<&SampledFunction> = fs.iter().map(|(_, f)| f).collect();
    report.gram_deviation = Some(gram_deviation(&funcs)?);
    report.boundary_mass = Some(funcs.iter().fold(0.0f64, |m, f| m.max(f.boundary_mass(2))));
    Ok(report)
}

/// Rayleigh quotients (Φ_{j,k}|H_symΦ_{j,k}) for the same family; rows are j.
pub fn landau_rayleigh_quotients(grid2: &GridSpec, j_max: usize, k_max: usize) -> Result<Vec<Vec<f64>>> {
    require_unit_hbar(grid2)?;
    ensure_landau_resolved(grid2, j_max + k_max)?;
    let fs = basis(grid2, j_max, k_max)?;
    let q = fs
        .par_iter()
        .map(|(_, f)| -> Result<f64> {
            let hf = magnetic_hamiltonian_apply(f, 1.0, 0.5)?;
            Ok(inner_product(&hf, f)?.re / f.norm().powi(2))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(q.chunks(k_max + 1).map(|c| c.to_vec()).collect())
}

/// max over entries of |(f_a|f_b) − δ_ab|.
pub fn gram_deviation(fs: &[&SampledFunction]) -> Result<f64> {
    let n = fs.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|a| -> Result<f64> {
            let mut m = 0.0f64;
            for b in 0..n {
                let want = if a == b { 1.0 } else { 0.0 };
                m = m.max((inner_product(fs[a], fs[b])? - want).norm());
            }
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// Coefficients α_{j,k} = (Ψ|Φ_{j,k}) of a phase-space function in the Landau basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTable {
    /// coefficients[j][k]
    pub coefficients: Vec<Vec<Complex64>>,
    pub norm_sq: f64,
    /// 1 − Σ|α|²/‖Ψ‖²: mass outside the truncated basis.
    pub residual_mass: f64,
    /// ‖Ψ − Σ αΦ‖/‖Ψ‖
    pub reconstruction_error: f64,
}

impl ExpansionTable {
    pub fn row_mass(&self, j: usize) -> f64 {
        self.coefficients[j].iter().map(|c| c.norm_sqr()).sum::<f64>() / self.norm_sq
    }

    pub fn column_mass(&self, k: usize) -> f64 {
        self.coefficients.iter().map(|r| r[k].norm_sqr()).sum::<f64>() / self.norm_sq
    }

    /// Share of the captured mass that lies outside row j.
    pub fn off_row_mass(&self, j: usize) -> f64 {
        let total: f64 = self.coefficients.iter().flatten().map(|c| c.norm_sqr()).sum();
        (total - self.coefficients[j].iter().map(|c| c.norm_sqr()).sum::<f64>()) / self.norm_sq
    }

    pub fn off_column_mass(&self, k: usize) -> f64 {
        let total: f64 = self.coefficients.iter().flatten().map(|c| c.norm_sqr()).sum();
        (total - self.coefficients.iter().map(|r| r[k].norm_sqr()).sum::<f64>()) / self.norm_sq
    }
}

pub fn eigenvector_expansion(big_psi: &SampledFunction, j_max: usize, k_max: usize) -> Result<ExpansionTable> {
    let grid2 = big_psi.grid();
    require_unit_hbar(grid2)?;
    ensure_landau_resolved(grid2, j_max + k_max)?;
    let norm_sq = big_psi.norm().powi(2);
    if norm_sq == 0.0 {
        return Err(LwError::InvalidParameter("cannot expand the zero function".into()));
    }
    let fs = basis(grid2, j_max, k_max)?;
    let coefs = fs
        .par_iter()
        .map(|(_, f)| inner_product(big_psi, f))
        .collect::<Result<Vec<C64>>>()?;
    let mut recon = SampledFunction::zeros(grid2);
    for ((_, f), c) in fs.iter().zip(&coefs) {
        recon = recon.axpy(*c, f)?;
    }
    let captured: f64 = coefs.iter().map(|c| c.norm_sqr()).sum();
    Ok(ExpansionTable {
        coefficients: coefs.chunks(k_max + 1).map(|c| c.to_vec()).collect(),
        norm_sq,
        residual_mass: 1.0 - captured / norm_sq,
        reconstruction_error: recon.distance(big_psi)? / norm_sq.sqrt(),
    })
}
