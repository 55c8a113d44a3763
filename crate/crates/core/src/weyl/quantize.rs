use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::symbol::Symbol;
use crate::error::{LwError, Result};
use crate::fourier::{fft_all, fft_inplace, shift_line};
use crate::grid::{GridSpec, PhasePoint, SampledFunction, C64};

/// Largest node count for which a dense operator matrix is assembled.
pub const MATRIX_NODE_LIMIT: usize = 4096;

/// Dense matrix of a discretized operator; quadrature weights are folded into the
/// entries, so `apply` is a plain matrix–vector product.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    grid: GridSpec,
    entries: DMatrix<C64>,
    quadrature_weight: f64,
    descriptor: String,
}

impl OperatorMatrix {
    pub fn new(grid: GridSpec, entries: DMatrix<C64>, descriptor: impl Into<String>) -> Result<Self> {
        let n = grid.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(LwError::Dimension { expected: n, got: entries.nrows() });
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(LwError::NonFinite(i));
        }
        let quadrature_weight = grid.cell_volume();
        Ok(OperatorMatrix { grid, entries, quadrature_weight, descriptor: descriptor.into() })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn quadrature_weight(&self) -> f64 {
        self.quadrature_weight
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.grid.ensure_same(f.grid())?;
        let v = &self.entries * DVector::from_column_slice(f.values());
        Ok(SampledFunction::from_parts(self.grid.clone(), v.iter().copied().collect()))
    }

    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.ensure_same(&other.grid)?;
        Ok(OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries * &other.entries,
            quadrature_weight: self.quadrature_weight,
            descriptor: format!("({})*({})", self.descriptor, other.descriptor),
        })
    }

    /// max |M_ij − conj(M_ji)| / max |M_ij|
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.entries.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.entries.nrows();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        dev / scale
    }

    /// Diagonal sum (the trace of the discretized operator).
    pub fn trace(&self) -> C64 {
        self.entries.diagonal().iter().sum()
    }

    /// Eigenpairs of the Hermitian part, ascending; eigenvectors are L²-normalized
    /// sampled functions. A real solver is used when the matrix is real.
    pub fn hermitian_eigen(&self, count: usize) -> Result<(Vec<f64>, Vec<SampledFunction>)> {
        let n = self.entries.nrows();
        let herm = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        let is_real = herm.iter().all(|v| v.im.abs() <= 1e-14 * (1.0 + v.re.abs()));
        let (vals, vecs): (Vec<f64>, DMatrix<C64>) = if is_real {
            let re = herm.map(|v| v.re);
            let e = nalgebra::SymmetricEigen::new(re);
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors.map(|v| C64::new(v, 0.0)))
        } else {
            let e = nalgebra::SymmetricEigen::new(herm);
            (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
        };
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(LwError::NotConverged("eigensolver returned non-finite values".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let weight = self.grid.cell_volume().sqrt();
        let mut out_vals = Vec::new();
        let mut out_vecs = Vec::new();
        for &k in order.iter().take(count.min(n)) {
            out_vals.push(vals[k]);
            let col: Vec<C64> = vecs.column(k).iter().map(|v| v / weight).collect();
            // fix the global phase so that the largest component is real positive
            let pivot = col.iter().fold(C64::new(0.0, 0.0), |m, v| if v.norm() > m.norm() { *v } else { m });
            let ph = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
            out_vecs.push(SampledFunction::from_parts(self.grid.clone(), col.into_iter().map(|v| v * ph).collect()));
        }
        Ok((out_vals, out_vecs))
    }
}

/// Dual momenta ζ_m = ħk_m for 2N samples in FFT order.
///
/// Sampling ζ at half the natural spacing makes the discrete kernel periodic in the
/// node separation with period 2N, so separations up to N−1 are never aliased onto
/// short ones.
pub(crate) fn dual_momenta(grid: &GridSpec, axis: usize) -> Vec<f64> {
    let ax = grid.axis(axis);
    let n2 = 2 * ax.points;
    let dk = PI / (2.0 * ax.half_extent);
    (0..n2)
        .map(|m| {
            let s = if m < n2 / 2 { m as f64 } else { m as f64 - n2 as f64 };
            grid.hbar() * s * dk
        })
        .collect()
}

/// Discrete Weyl kernel block for the midpoint with index q (coordinate −L + q·h/2):
/// c_q(d) = (1/2N) Σ_m e^{2πimd/2N} b(mid_q, ζ_m), indexed by d mod 2N.
fn weyl_block_1d(grid: &GridSpec, q: usize, zetas: &[f64], eval: &(dyn Fn(f64, &[f64]) -> Vec<C64> + Sync)) -> Vec<C64> {
    let ax = grid.axis(0);
    let mid = -ax.half_extent + q as f64 * ax.spacing() / 2.0;
    let mut block = eval(mid, zetas);
    fft_inplace(&mut block, true);
    let s = 1.0 / block.len() as f64;
    block.iter_mut().for_each(|v| *v *= s);
    block
}

/// Dense discrete Weyl quantization of b(x, ζ) on a 1-D grid.
pub(crate) fn weyl_assemble_1d(
    grid: &GridSpec,
    eval: &(dyn Fn(f64, &[f64]) -> Vec<C64> + Sync),
) -> Result<DMatrix<C64>> {
    grid.ensure_dim(1)?;
    let n = grid.axis(0).points;
    if n > MATRIX_NODE_LIMIT {
        return Err(LwError::TooLarge { nodes: n, limit: MATRIX_NODE_LIMIT });
    }
    let zetas = dual_momenta(grid, 0);
    let blocks: Vec<Vec<C64>> = (0..2 * n - 1).into_par_iter().map(|q| weyl_block_1d(grid, q, &zetas, eval)).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| blocks[i + j][(i + 2 * n - j) % (2 * n)]))
}

/// Block c_q(d₁, d₂) of the 2-D discrete Weyl kernel on the doubled index range, d₁-major.
fn weyl_block_2d(
    grid: &GridSpec,
    q: (usize, usize),
    zetas: &(Vec<f64>, Vec<f64>),
    eval: &(dyn Fn([f64; 2], &[f64], &[f64]) -> Vec<C64> + Sync),
) -> Vec<C64> {
    let (a0, a1) = (grid.axis(0), grid.axis(1));
    let mid = [
        -a0.half_extent + q.0 as f64 * a0.spacing() / 2.0,
        -a1.half_extent + q.1 as f64 * a1.spacing() / 2.0,
    ];
    let mut block = eval(mid, &zetas.0, &zetas.1);
    fft_all(&mut block, &[zetas.0.len(), zetas.1.len()], true);
    let s = 1.0 / block.len() as f64;
    block.iter_mut().for_each(|v| *v *= s);
    block
}

/// Matrix-free 2-D discrete Weyl quantization of b(w, ζ) applied to `values`.
///
/// Each midpoint row q₁ contributes a partial output; partials are summed in
/// index order so the result does not depend on thread scheduling.
pub(crate) fn weyl_apply_2d(
    grid: &GridSpec,
    eval: &(dyn Fn([f64; 2], &[f64], &[f64]) -> Vec<C64> + Sync),
    values: &[C64],
) -> Vec<C64> {
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let (m1, m2) = (2 * n1, 2 * n2);
    let zetas = (dual_momenta(grid, 0), dual_momenta(grid, 1));
    let partials: Vec<Vec<C64>> = (0..2 * n1 - 1)
        .into_par_iter()
        .map(|q1| {
            let mut part = vec![C64::new(0.0, 0.0); n1 * n2];
            let i1_lo = q1.saturating_sub(n1 - 1);
            let i1_hi = q1.min(n1 - 1);
            // rows of Ψ that can contribute to this midpoint row
            let live = (i1_lo..=i1_hi).any(|i1| values[(q1 - i1) * n2..(q1 - i1 + 1) * n2].iter().any(|v| v.norm() > 0.0));
            if !live {
                return part;
            }
            for q2 in 0..2 * n2 - 1 {
                let block = weyl_block_2d(grid, (q1, q2), &zetas, eval);
                let i2_lo = q2.saturating_sub(n2 - 1);
                let i2_hi = q2.min(n2 - 1);
                for i1 in i1_lo..=i1_hi {
                    let j1 = q1 - i1;
                    let d1 = (i1 + m1 - j1) % m1;
                    for i2 in i2_lo..=i2_hi {
                        let j2 = q2 - i2;
                        let d2 = (i2 + m2 - j2) % m2;
                        part[i1 * n2 + i2] += block[d1 * m2 + d2] * values[j1 * n2 + j2];
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
    out
}

/// Dense 2-D discrete Weyl quantization.
pub(crate) fn weyl_assemble_2d(
    grid: &GridSpec,
    eval: &(dyn Fn([f64; 2], &[f64], &[f64]) -> Vec<C64> + Sync),
) -> Result<DMatrix<C64>> {
    let nodes = grid.len();
    if nodes > MATRIX_NODE_LIMIT {
        return Err(LwError::TooLarge { nodes, limit: MATRIX_NODE_LIMIT });
    }
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let (m1, m2) = (2 * n1, 2 * n2);
    let zetas = (dual_momenta(grid, 0), dual_momenta(grid, 1));
    let mut m = DMatrix::<C64>::zeros(nodes, nodes);
    let q1s: Vec<usize> = (0..2 * n1 - 1).collect();
    for chunk in q1s.chunks(rayon::current_num_threads().max(1)) {
        let blocks: Vec<Vec<Vec<C64>>> = chunk
            .par_iter()
            .map(|&q1| (0..2 * n2 - 1).map(|q2| weyl_block_2d(grid, (q1, q2), &zetas, eval)).collect())
            .collect();
        for (&q1, row) in chunk.iter().zip(&blocks) {
            for i1 in q1.saturating_sub(n1 - 1)..=q1.min(n1 - 1) {
                let j1 = q1 - i1;
                let d1 = (i1 + m1 - j1) % m1;
                for (q2, block) in row.iter().enumerate() {
                    for i2 in q2.saturating_sub(n2 - 1)..=q2.min(n2 - 1) {
                        let j2 = q2 - i2;
                        let d2 = (i2 + m2 - j2) % m2;
                        m[(i1 * n2 + i2, j1 * n2 + j2)] = block[d1 * m2 + d2];
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Weyl quantization of a symbol on a 1-D configuration grid.
///
/// The kernel (2πħ)^{−1}∫e^{iy(x−x′)/ħ}a((x+x′)/2, y)dy is discretized with the
/// dual momentum grid, so a ≡ 1 maps to the identity matrix exactly.
pub fn weyl_quantize(a: &Symbol, grid: &GridSpec) -> Result<OperatorMatrix> {
    grid.ensure_dim(1)?;
    let eval = |mid: f64, zetas: &[f64]| a.eval_tensor(&[mid], zetas);
    let m = weyl_assemble_1d(grid, &eval)?;
    OperatorMatrix::new(grid.clone(), m, format!("weyl:{}", a.describe()))
}

/// ∫K_A(x,x)dx from the assembled kernel diagonal.
pub fn weyl_trace(a: &Symbol, grid: &GridSpec) -> Result<C64> {
    Ok(weyl_quantize(a, grid)?.trace())
}

/// T(z₀)ψ(x) = e^{(i/ħ)(y₀x − y₀x₀/2)}ψ(x − x₀).
pub fn heisenberg_weyl(z0: &PhasePoint, psi: &SampledFunction) -> Result<SampledFunction> {
    let grid = psi.grid();
    grid.ensure_dim(1)?;
    if z0.n() != 1 {
        return Err(LwError::Dimension { expected: 2, got: z0.coords().len() });
    }
    let ax = grid.axis(0);
    let (x0, y0) = (z0.x()[0], z0.y()[0]);
    if x0.abs() > ax.half_extent {
        return Err(LwError::OutOfExtent(format!("shift {x0} exceeds half extent {}", ax.half_extent)));
    }
    let hbar = grid.hbar();
    let shifted = shift_line(psi.values(), ax, -x0);
    let values = shifted
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::from_polar(1.0, (y0 * ax.coord(i) - y0 * x0 / 2.0) / hbar))
        .collect();
    Ok(SampledFunction::from_parts(grid.clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::special::hermite_fn;

    #[test]
    fn unit_symbol_is_identity() {
        let g = make_grid(1, 8.0, 64, 1.0).unwrap();
        let m = weyl_quantize(&Symbol::constant(1.0), &g).unwrap();
        let id = DMatrix::<C64>::identity(64, 64);
        assert!((m.entries() - id).norm() < 1e-12);
    }

    #[test]
    fn position_symbol_is_multiplication() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let m = weyl_quantize(&Symbol::x(), &g).unwrap();
        let f = hermite_fn(1, &g).unwrap();
        let got = m.apply(&f).unwrap();
        let want = SampledFunction::from_fn(&g, |x| C64::new(x[0] * crate::special::hermite_value(1, x[0]), 0.0));
        assert!(got.distance(&want).unwrap() < 1e-10);
    }

    #[test]
    fn harmonic_levels() {
        let g = make_grid(1, 10.0, 256, 1.0).unwrap();
        let m = weyl_quantize(&Symbol::harmonic(), &g).unwrap();
        assert!(m.hermitian_deviation() < 1e-12);
        for k in 0..6 {
            let f = hermite_fn(k, &g).unwrap();
            let r = m.apply(&f).unwrap().distance(&f.scaled((k as f64 + 0.5).into())).unwrap();
            assert!(r < 1e-8, "{k}: {r}");
        }
        let (vals, _) = m.hermitian_eigen(4).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert!((v - (k as f64 + 0.5)).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_trace() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let a = Symbol::gaussian(1.0, (0.0, 0.0), (0.5f64.sqrt(), 0.5f64.sqrt())).unwrap();
        assert!((weyl_trace(&a, &g).unwrap() - 0.5).norm() < 1e-8);
    }

    #[test]
    fn weyl_cocycle() {
        let g = make_grid(1, 10.0, 256, 1.0).unwrap();
        let f = hermite_fn(0, &g).unwrap();
        let (z1, z2) = (PhasePoint::xy(0.7, -0.4), PhasePoint::xy(-0.3, 1.1));
        let lhs = heisenberg_weyl(&z1.plus(&z2), &f).unwrap();
        let s = crate::grid::symplectic_form(&z1, &z2).unwrap();
        let rhs = heisenberg_weyl(&z1, &heisenberg_weyl(&z2, &f).unwrap())
            .unwrap()
            .scaled(C64::from_polar(1.0, -s / 2.0));
        assert!(lhs.distance(&rhs).unwrap() < 1e-10);
    }
}
