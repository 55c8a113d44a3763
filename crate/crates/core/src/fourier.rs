//! FFT plumbing, spectral differentiation and band-limited resampling.
//!
//! Off-grid evaluation always uses the periodic trigonometric interpolant of
//! the samples (symmetric treatment of the Nyquist mode), with points outside
//! the fundamental interval treated as zero.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{Axis, GridSpec, SampledFunction, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized in-place FFT (forward: e^{−2πi jm/N}).
pub(crate) fn fft_inplace(buf: &mut [C64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// FFT along one axis of a row-major array.
pub(crate) fn fft_axis(data: &mut [C64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let fft = plan(n, inverse);
    if inner == 1 {
        fft.process(data);
        return;
    }
    let mut line = vec![C64::new(0.0, 0.0); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for (m, slot) in line.iter_mut().enumerate() {
                *slot = data[base + m * inner];
            }
            fft.process(&mut line);
            for (m, v) in line.iter().enumerate() {
                data[base + m * inner] = *v;
            }
        }
    }
}

pub(crate) fn fft_all(data: &mut [C64], shape: &[usize], inverse: bool) {
    for axis in 0..shape.len() {
        fft_axis(data, shape, axis, inverse);
    }
}

/// Applies a separable Fourier multiplier ∏_axes m_axis(k) to the samples.
pub(crate) fn apply_multiplier(values: &[C64], grid: &GridSpec, mult: &[Vec<C64>]) -> Vec<C64> {
    let shape = grid.shape();
    let mut data = values.to_vec();
    fft_all(&mut data, &shape, false);
    let total = data.len();
    let mut rem_idx = vec![0usize; shape.len()];
    for (idx, v) in data.iter_mut().enumerate() {
        let mut rem = idx;
        for k in (0..shape.len()).rev() {
            rem_idx[k] = rem % shape[k];
            rem /= shape[k];
        }
        let mut f = C64::new(1.0, 0.0);
        for k in 0..shape.len() {
            f *= mult[k][rem_idx[k]];
        }
        *v *= f;
    }
    fft_all(&mut data, &shape, true);
    let scale = 1.0 / total as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Spectral derivative ∂^{orders} of the samples (Fourier multiplier (ik)^p per axis).
pub fn spectral_derivative(f: &SampledFunction, orders: &[u32]) -> SampledFunction {
    let grid = f.grid();
    assert_eq!(orders.len(), grid.dim(), "one derivative order per axis");
    if orders.iter().all(|&p| p == 0) {
        return f.clone();
    }
    let mult: Vec<Vec<C64>> = grid
        .axes()
        .iter()
        .zip(orders)
        .map(|(ax, &p)| ax.wavenumbers().iter().map(|&k| C64::new(0.0, k).powu(p)).collect())
        .collect();
    SampledFunction::from_parts(grid.clone(), apply_multiplier(f.values(), grid, &mult))
}

/// Samples of the interpolant at x_i + offset, zero where that leaves [−L, L).
pub(crate) fn shift_line(values: &[C64], axis: &Axis, offset: f64) -> Vec<C64> {
    let n = axis.points;
    let h = axis.spacing();
    let steps = offset / h;
    let nearest = steps.round();
    let mut out;
    if (steps - nearest).abs() < 1e-10 {
        let s = nearest as i64;
        out = vec![C64::new(0.0, 0.0); n];
        for (i, slot) in out.iter_mut().enumerate() {
            let j = i as i64 + s;
            if j >= 0 && (j as usize) < n {
                *slot = values[j as usize];
            }
        }
        return out;
    }
    out = values.to_vec();
    fft_inplace(&mut out, false);
    let ks = axis.wavenumbers();
    for (m, v) in out.iter_mut().enumerate() {
        if m == n / 2 {
            *v *= (PI * steps).cos();
        } else {
            *v *= C64::from_polar(1.0, ks[m] * offset);
        }
    }
    fft_inplace(&mut out, true);
    let scale = 1.0 / n as f64;
    for (i, v) in out.iter_mut().enumerate() {
        if axis.contains(axis.coord(i) + offset) {
            *v *= scale;
        } else {
            *v = C64::new(0.0, 0.0);
        }
    }
    out
}

/// Samples of f(−x) on the same axis (node 0 maps to x = L, outside the grid).
pub(crate) fn reversed_line(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 1..n {
        out[i] = values[n - i];
    }
    out
}

/// Periodic cardinal function for even N: sin(πu)/(N tan(πu/N)).
#[inline]
fn cardinal(u: f64, n: usize) -> f64 {
    let r = u.round();
    if (u - r).abs() < 1e-13 {
        let m = (r as i64).rem_euclid(n as i64);
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    (PI * u).sin() / (nf * (PI * u / nf).tan())
}

/// Interpolation weights of the node values for the point t (None if t is outside).
pub(crate) fn interp_weights(axis: &Axis, t: f64) -> Option<Vec<f64>> {
    if !axis.contains(t) {
        return None;
    }
    let h = axis.spacing();
    let u0 = (t + axis.half_extent) / h;
    Some((0..axis.points).map(|j| cardinal(u0 - j as f64, axis.points)).collect())
}

/// Dense interpolation matrix (targets × nodes), zero rows for targets outside the axis.
pub(crate) fn interp_matrix(axis: &Axis, targets: &[f64]) -> DMatrix<f64> {
    let n = axis.points;
    let mut m = DMatrix::<f64>::zeros(targets.len(), n);
    for (r, &t) in targets.iter().enumerate() {
        if let Some(w) = interp_weights(axis, t) {
            for (j, wj) in w.into_iter().enumerate() {
                m[(r, j)] = wj;
            }
        }
    }
    m
}

/// Value of the 1-D interpolant at an arbitrary point.
pub fn interpolate_1d(f: &SampledFunction, t: f64) -> C64 {
    let ax = f.grid().axis(0);
    match interp_weights(ax, t) {
        None => C64::new(0.0, 0.0),
        Some(w) => w.iter().zip(f.values()).map(|(a, v)| v * *a).sum(),
    }
}

/// Resamples a 1-D function at arbitrary points.
pub fn resample_1d(f: &SampledFunction, targets: &[f64]) -> Vec<C64> {
    let m = interp_matrix(f.grid().axis(0), targets);
    let v = nalgebra::DVector::from_column_slice(f.values());
    let mc = m.map(|x| C64::new(x, 0.0));
    (mc * v).iter().copied().collect()
}

/// Values on the tensor grid xs × ys of a 2-D sampled function (row-major, xs slowest).
pub fn resample_2d(f: &SampledFunction, xs: &[f64], ys: &[f64]) -> Vec<C64> {
    let g = f.grid();
    let (nx, ny) = (g.axis(0).points, g.axis(1).points);
    let mx = interp_matrix(g.axis(0), xs).map(|x| C64::new(x, 0.0));
    let my = interp_matrix(g.axis(1), ys).map(|x| C64::new(x, 0.0));
    // samples as an nx × ny matrix
    let s = DMatrix::from_row_slice(nx, ny, f.values());
    let r = mx * s * my.transpose();
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for i in 0..xs.len() {
        for j in 0..ys.len() {
            out.push(r[(i, j)]);
        }
    }
    out
}

/// Provides f(c + s·h) for lattice offsets s, reusing FFT shifts by fractional part.
pub(crate) struct LatticeSampler<'a> {
    values: &'a [C64],
    axis: Axis,
    shifted: HashMap<i64, Vec<C64>>,
}

const FRACTION_KEY: f64 = 1e9;

impl<'a> LatticeSampler<'a> {
    pub fn new(values: &'a [C64], axis: Axis) -> Self {
        LatticeSampler { values, axis, shifted: HashMap::new() }
    }

    fn split(&self, c: f64) -> (i64, i64, f64) {
        let u = (c + self.axis.half_extent) / self.axis.spacing();
        let mut q = u.floor();
        let mut frac = u - q;
        if frac > 1.0 - 1e-10 {
            q += 1.0;
            frac = 0.0;
        }
        if frac < 1e-10 {
            frac = 0.0;
        }
        let key = (frac * FRACTION_KEY).round() as i64;
        (q as i64, key, frac)
    }

    /// Makes the shifted copy needed for centre c available.
    pub fn prepare(&mut self, c: f64) {
        let (_, key, frac) = self.split(c);
        if key != 0 && !self.shifted.contains_key(&key) {
            let h = self.axis.spacing();
            self.shifted.insert(key, shift_line(self.values, &self.axis, frac * h));
        }
    }

    /// f(c + s·h) for s in −radius..=radius; `prepare(c)` must have been called.
    pub fn samples(&self, c: f64, radius: i64, sign: i64) -> Vec<C64> {
        let (q, key, _) = self.split(c);
        let src: &[C64] = if key == 0 { self.values } else { &self.shifted[&key] };
        let n = self.axis.points as i64;
        (-radius..=radius)
            .map(|s| {
                let j = q + sign * s;
                if j >= 0 && j < n {
                    src[j as usize]
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect()
    }
}

/// Dense matrix with entries e^{i·scale·a_r·b_c}.
pub(crate) fn phase_matrix(a: &[f64], b: &[f64], scale: f64) -> DMatrix<C64> {
    DMatrix::from_fn(a.len(), b.len(), |r, c| C64::from_polar(1.0, scale * a[r] * b[c]))
}

/// Dual axis of an FFT on `axis` with Planck parameter ħ: spacing 2πħ/(N·h).
pub(crate) fn dual_axis(axis: &Axis, hbar: f64) -> Result<Axis> {
    Axis::new(PI * hbar / axis.spacing(), axis.points)
}

/// G_k = Σ_j e^{i·sign·w_k·x_j/ħ} f_j, with x on `axis` and w on its dual axis.
pub(crate) fn centered_dft(values: &[C64], axis: &Axis, hbar: f64, sign: f64) -> Vec<C64> {
    let dual = dual_axis(axis, hbar).expect("dual of a valid axis is valid");
    let (l, ld) = (axis.half_extent, dual.half_extent);
    let hd = dual.spacing();
    let mut buf: Vec<C64> = values
        .iter()
        .enumerate()
        .map(|(j, v)| v * C64::from_polar(1.0, sign * (-ld) * axis.coord(j) / hbar))
        .collect();
    fft_inplace(&mut buf, sign > 0.0);
    buf.iter_mut()
        .enumerate()
        .for_each(|(k, v)| *v *= C64::from_polar(1.0, -sign * k as f64 * hd * l / hbar));
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn gauss(g: &GridSpec, c: f64) -> SampledFunction {
        SampledFunction::from_fn(g, |x| C64::new((-(x[0] - c).powi(2)).exp(), 0.0))
    }

    #[test]
    fn shift_matches_closed_form() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let f = gauss(&g, 0.0);
        for &d in &[0.3, -1.37, 0.5, 2.0 * g.spacing(0)] {
            let s = shift_line(f.values(), g.axis(0), d);
            let want = gauss(&g, -d);
            let err = s.iter().zip(want.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "offset {d}: {err}");
        }
    }

    #[test]
    fn interpolation_matches_closed_form() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let f = gauss(&g, 0.4);
        for &t in &[0.0, 0.123, -2.71, 3.3] {
            let v = interpolate_1d(&f, t);
            assert!((v.re - (-(t - 0.4f64).powi(2)).exp()).abs() < 1e-12);
        }
        assert_eq!(interpolate_1d(&f, 9.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let f = gauss(&g, 0.0);
        let d = spectral_derivative(&f, &[2]);
        for (i, v) in d.values().iter().enumerate() {
            let x = g.axis(0).coord(i);
            let want = (4.0 * x * x - 2.0) * (-x * x).exp();
            assert!((v.re - want).abs() < 1e-11 && v.im.abs() < 1e-11);
        }
    }

    #[test]
    fn centered_dft_of_gaussian() {
        // ∫ e^{-iwx} e^{-x²/2} dx = √(2π) e^{-w²/2}
        let g = make_grid(1, 10.0, 128, 1.0).unwrap();
        let ax = g.axis(0);
        let f: Vec<C64> =
            ax.coords().iter().map(|x| C64::new((-x * x / 2.0).exp(), 0.0)).collect();
        let out = centered_dft(&f, ax, 1.0, -1.0);
        let dual = dual_axis(ax, 1.0).unwrap();
        for (k, v) in out.iter().enumerate() {
            let w = dual.coord(k);
            let want = (2.0 * PI).sqrt() * (-w * w / 2.0).exp();
            assert!((v * ax.spacing() - want).norm() < 1e-12);
        }
    }
}
