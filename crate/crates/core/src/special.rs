//! Hermite functions, generalized Laguerre polynomials and the Landau eigenfunctions.

use std::f64::consts::PI;

use crate::error::{LwError, Result};
use crate::grid::{GridSpec, SampledFunction, C64};

/// Largest Hermite index accepted by [`hermite_fn`].
pub const HERMITE_CAP: usize = 64;

/// φ_0..=φ_k at x by the three-term recurrence on normalized functions.
pub fn hermite_values(k: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let p0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(p0);
    if k == 0 {
        return out;
    }
    out.push(2f64.sqrt() * x * p0);
    for m in 1..k {
        let mf = m as f64;
        let next = (2.0 / (mf + 1.0)).sqrt() * x * out[m] - (mf / (mf + 1.0)).sqrt() * out[m - 1];
        out.push(next);
    }
    out
}

/// φ_k(x) = (2^k k! √π)^{−1/2} e^{−x²/2} H_k(x).
pub fn hermite_value(k: usize, x: f64) -> f64 {
    hermite_values(k, x)[k]
}

/// The normalized Hermite function φ_k sampled on a 1-D grid.
pub fn hermite_fn(k: usize, grid: &GridSpec) -> Result<SampledFunction> {
    if k > HERMITE_CAP {
        return Err(LwError::InvalidParameter(format!(
            "Hermite index {k} exceeds cap {HERMITE_CAP}"
        )));
    }
    grid.ensure_dim(1)?;
    Ok(SampledFunction::from_fn(grid, |x| C64::new(hermite_value(k, x[0]), 0.0)))
}

/// Generalized Laguerre polynomial L_j^k(x).
pub fn laguerre_poly(j: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if j == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for m in 2..=j {
        let mf = m as f64;
        let next = ((2.0 * mf - 1.0 + kf - x) * cur - (mf - 1.0 + kf) * prev) / mf;
        prev = cur;
        cur = next;
    }
    cur
}

/// Φ_{a,b}(x, y) for the symmetric-gauge magnetic Hamiltonian with ħ = m = ω = 1.
///
/// With z = x + iy and a ≥ b,
/// Φ_{a,b} = (−1)^b (2π)^{−1/2} (b!/a!)^{1/2} 2^{−(a−b)/2} z̄^{a−b} L_b^{a−b}(|z|²/2) e^{−|z|²/4},
/// and Φ_{a,b} = conj(Φ_{b,a}) for a < b. Φ_{a,b} sits at level a + ½ and equals
/// the wavepacket transform of φ_a with window φ_b.
pub fn landau_value(a: usize, b: usize, x: f64, y: f64) -> C64 {
    if a < b {
        return landau_value(b, a, x, y).conj();
    }
    let r2 = x * x + y * y;
    let zbar = C64::new(x, -y);
    // (b!/a!)^{1/2} 2^{-(a-b)/2} z̄^{a-b}, accumulated factor by factor
    let mut pref = C64::new(1.0, 0.0);
    for m in (b + 1)..=a {
        pref *= zbar / (2.0 * m as f64).sqrt();
    }
    let sign = if b.is_multiple_of(2) { 1.0 } else { -1.0 };
    pref * sign * (2.0 * PI).powf(-0.5) * laguerre_poly(b, a - b, r2 / 2.0) * (-r2 / 4.0).exp()
}

/// Samples Φ_{a,b} on a 2-D phase-space grid; the values do not depend on grid.hbar.
pub fn landau_eigenfunction(a: usize, b: usize, grid2: &GridSpec) -> Result<SampledFunction> {
    grid2.ensure_dim(2)?;
    Ok(SampledFunction::from_fn(grid2, |z| landau_value(a, b, z[0], z[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, make_grid};

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_poly(0, 3, 1.7), 1.0);
        assert_eq!(laguerre_poly(1, 0, 2.0), -1.0);
        assert_eq!(laguerre_poly(2, 1, 0.0), 3.0);
    }

    #[test]
    fn ground_state_closed_form() {
        let g = make_grid(1, 8.0, 256, 1.0).unwrap();
        let f = hermite_fn(0, &g).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            let x = g.axis(0).coord(i);
            assert!((v.re - PI.powf(-0.25) * (-x * x / 2.0).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn hermite_orthonormal_to_20() {
        let g = make_grid(1, 12.0, 512, 1.0).unwrap();
        let fs: Vec<_> = (0..=20).map(|k| hermite_fn(k, &g).unwrap()).collect();
        for j in 0..=20 {
            for k in 0..=20 {
                let ip = inner_product(&fs[j], &fs[k]).unwrap();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10, "({j},{k}) {ip}");
            }
        }
    }

    #[test]
    fn hermite_rejects_over_cap_and_wrong_dim() {
        let g = make_grid(1, 8.0, 64, 1.0).unwrap();
        assert!(hermite_fn(65, &g).is_err());
        let g2 = make_grid(2, 8.0, 16, 1.0).unwrap();
        assert!(hermite_fn(0, &g2).is_err());
    }

    #[test]
    fn landau_ground_row() {
        // Φ_{0,0} = (2π)^{-1/2} e^{-r²/4}; Φ_{0,k} = (k! 2^{k+1} π)^{-1/2} (x+iy)^k e^{-r²/4}
        let (x, y) = (0.7, -1.3);
        let r2 = x * x + y * y;
        let v = landau_value(0, 0, x, y);
        assert!((v.re - (2.0 * PI).powf(-0.5) * (-r2 / 4.0f64).exp()).abs() < 1e-15);
        let mut fact = 1.0;
        for k in 0..6usize {
            if k > 0 {
                fact *= k as f64;
            }
            let z = C64::new(x, y);
            let want = z.powu(k as u32) * (-r2 / 4.0f64).exp()
                / (fact * 2f64.powi(k as i32 + 1) * PI).sqrt();
            assert!((landau_value(0, k, x, y) - want).norm() < 1e-14);
        }
    }
}
