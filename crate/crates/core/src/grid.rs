//! Uniform tensor grids, sampled functions and the basic quadrature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LwError, Result};

pub type C64 = Complex64;

/// One uniform axis covering `[-half_extent, half_extent)` with `points` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub half_extent: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(half_extent: f64, points: usize) -> Result<Self> {
        if !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(LwError::InvalidGrid(format!(
                "half extent must be positive, got {half_extent}"
            )));
        }
        if points < 8 || !points.is_multiple_of(2) {
            return Err(LwError::InvalidGrid(format!(
                "points must be even and at least 8, got {points}"
            )));
        }
        Ok(Axis { half_extent, points })
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_extent / self.points as f64
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_extent + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    /// True when `t` lies in the left-closed interval covered by the axis.
    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        t >= -self.half_extent - 1e-12 * self.spacing() && t < self.half_extent
    }

    /// Angular wavenumbers in FFT order: m·π/L for m in 0..N/2, then −N/2..−1.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = std::f64::consts::PI / self.half_extent;
        (0..n)
            .map(|i| {
                let m = if i < n / 2 { i } else { i - n };
                m as f64 * dk
            })
            .collect()
    }
}

/// Uniform tensor grid over `dim` axes, carrying the Planck parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
    hbar: f64,
}

impl GridSpec {
    pub fn from_axes(axes: Vec<Axis>, hbar: f64) -> Result<Self> {
        if axes.is_empty() {
            return Err(LwError::InvalidGrid("a grid needs at least one axis".into()));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(LwError::InvalidGrid(format!("hbar must be positive, got {hbar}")));
        }
        for a in &axes {
            Axis::new(a.half_extent, a.points)?;
        }
        Ok(GridSpec { axes, hbar })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn spacing(&self, k: usize) -> f64 {
        self.axes[k].spacing()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Product of the spacings, i.e. the quadrature weight of one node.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<GridSpec> {
        GridSpec::from_axes(self.axes.clone(), hbar)
    }

    /// The phase-space grid built from two copies of every axis of a configuration grid.
    pub fn doubled(&self) -> GridSpec {
        let mut axes = self.axes.clone();
        axes.extend(self.axes.iter().copied());
        GridSpec { axes, hbar: self.hbar }
    }

    /// Coordinates of the node with row-major flat index `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let mut rem = idx;
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].points;
            out[k] = self.axes[k].coord(rem % n);
            rem /= n;
        }
        out
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(LwError::Dimension { expected: dim, got: self.dim() });
        }
        Ok(())
    }

    /// Same shape, and extents and ħ equal to 1e−12 relative.
    pub fn matches(&self, other: &GridSpec) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        self.axes.len() == other.axes.len()
            && close(self.hbar, other.hbar)
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.points == b.points && close(a.half_extent, b.half_extent))
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if !self.matches(other) {
            return Err(LwError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Uniform grid with identical axes; node i ↦ −L + i·2L/N.
pub fn make_grid(dim: usize, half_extent: f64, points: usize, hbar: f64) -> Result<GridSpec> {
    if dim == 0 {
        return Err(LwError::InvalidGrid("dimension must be positive".into()));
    }
    let axis = Axis::new(half_extent, points)?;
    GridSpec::from_axes(vec![axis; dim], hbar)
}

/// Complex samples on a grid, row-major with the first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: GridSpec,
    values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LwError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(LwError::NonFinite(i));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee the invariant.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<C64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SampledFunction { grid, values }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        SampledFunction { values: vec![C64::new(0.0, 0.0); grid.len()], grid: grid.clone() }
    }

    pub fn from_fn<F: Fn(&[f64]) -> C64>(grid: &GridSpec, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
        SampledFunction { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        inner_product_unchecked(&self.values, &self.values, self.grid.cell_volume()).re.sqrt()
    }

    pub fn scaled(&self, c: C64) -> Self {
        let values = self.values.iter().map(|v| v * c).collect();
        SampledFunction { grid: self.grid.clone(), values }
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        SampledFunction { grid: self.grid.clone(), values }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: C64, other: &SampledFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(SampledFunction { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.axpy(C64::new(1.0, 0.0), other)
    }

    /// ‖self − other‖ in the quadrature norm.
    pub fn distance(&self, other: &SampledFunction) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Fraction of the squared norm carried by nodes within `band` cells of any edge.
    pub fn boundary_mass(&self, band: usize) -> f64 {
        let shape = self.grid.shape();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let mut rem = idx;
            let mut near = false;
            for k in (0..shape.len()).rev() {
                let i = rem % shape[k];
                rem /= shape[k];
                if i < band || i + band >= shape[k] {
                    near = true;
                }
            }
            if near {
                edge += v.norm_sqr();
            }
        }
        edge / total
    }
}

/// A phase-space point z = (x, y), stored as 2n coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    coords: Vec<f64>,
}

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(LwError::InvalidParameter(format!(
                "phase point needs an even number of coordinates, got {}",
                coords.len()
            )));
        }
        Ok(PhasePoint { coords })
    }

    /// The point (x, y) for one degree of freedom.
    pub fn xy(x: f64, y: f64) -> Self {
        PhasePoint { coords: vec![x, y] }
    }

    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn x(&self) -> &[f64] {
        &self.coords[..self.n()]
    }

    pub fn y(&self) -> &[f64] {
        &self.coords[self.n()..]
    }

    pub fn scaled(&self, c: f64) -> Self {
        PhasePoint { coords: self.coords.iter().map(|v| v * c).collect() }
    }

    pub fn plus(&self, other: &PhasePoint) -> Self {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        PhasePoint { coords }
    }
}

/// Riemann-sum inner product Σ f·conj(g)·∏spacing.
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<C64> {
    f.grid.ensure_same(&g.grid)?;
    Ok(inner_product_unchecked(&f.values, &g.values, f.grid.cell_volume()))
}

pub(crate) fn inner_product_unchecked(f: &[C64], g: &[C64], weight: f64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (a, b) in f.iter().zip(g) {
        acc += a * b.conj();
    }
    acc * weight
}

/// σ(z, z′) = Jz·z′ with J = [[0, I], [−I, 0]], i.e. y·x′ − x·y′.
pub fn symplectic_form(z: &PhasePoint, z2: &PhasePoint) -> Result<f64> {
    if z.coords.len() != z2.coords.len() {
        return Err(LwError::Dimension { expected: z.coords.len(), got: z2.coords.len() });
    }
    Ok(sigma(z.coords(), z2.coords()))
}

#[inline]
pub(crate) fn sigma(z: &[f64], w: &[f64]) -> f64 {
    let n = z.len() / 2;
    let mut s = 0.0;
    for k in 0..n {
        s += z[n + k] * w[k] - z[k] * w[n + k];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = make_grid(1, 8.0, 256, 1.0).unwrap();
        assert_eq!(g.spacing(0), 0.0625);
        assert_eq!(g.node(0), vec![-8.0]);
        assert_eq!(g.node(255), vec![8.0 - 0.0625]);

        let g2 = make_grid(2, 8.0, 128, 1.0).unwrap();
        assert_eq!(g2.len(), 128 * 128);
        assert_eq!(g2.node(129), vec![-8.0 + 0.125, -8.0 + 0.125]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(make_grid(1, 8.0, 7, 1.0).is_err());
        assert!(make_grid(1, 8.0, 6, 1.0).is_err());
        assert!(make_grid(1, 0.0, 64, 1.0).is_err());
        assert!(make_grid(1, 8.0, 64, 0.0).is_err());
        assert!(make_grid(1, 8.0, 64, -1.0).is_err());
    }

    #[test]
    fn sigma_is_jz_dot_zprime() {
        // Jz = (y, -x), so Jz·z' = y·x' - x·y'.
        let s = symplectic_form(&PhasePoint::xy(1.0, 0.0), &PhasePoint::xy(0.0, 1.0)).unwrap();
        assert_eq!(s, -1.0);
        let s = symplectic_form(&PhasePoint::xy(0.0, 1.0), &PhasePoint::xy(1.0, 0.0)).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn rejects_nonfinite() {
        let g = make_grid(1, 4.0, 8, 1.0).unwrap();
        let mut v = vec![C64::new(0.0, 0.0); 8];
        v[3] = C64::new(f64::NAN, 0.0);
        assert!(matches!(SampledFunction::new(g, v), Err(LwError::NonFinite(3))));
    }
}
