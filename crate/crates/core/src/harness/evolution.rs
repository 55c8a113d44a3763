use rayon::prelude::*;

use crate::error::{LwError, Result};
use crate::grid::{inner_product, GridSpec, SampledFunction, C64};
use crate::landau::LwOperator;
use crate::transforms::{wavepacket, ScalingParams, Window};
use crate::weyl::{weyl_quantize, Symbol};

/// Largest |t| accepted by the evolution routines.
pub const MAX_EVOLUTION_TIME: f64 = 20.0;
/// Largest tolerated mass outside the eigen-expansion.
pub const TRUNCATION_LIMIT: f64 = 1e-8;

/// Full eigen-decomposition of weyl_quantize(a), reused across times.
pub struct Evolver {
    grid: GridSpec,
    values: Vec<f64>,
    vectors: Vec<SampledFunction>,
}

impl Evolver {
    pub fn new(a: &Symbol, grid: &GridSpec) -> Result<Self> {
        if !a.is_real() {
            return Err(LwError::UnsupportedSymbol("evolution needs a real (self-adjoint) symbol".into()));
        }
        let op = weyl_quantize(a, grid)?;
        let (values, vectors) = op.hermitian_eigen(grid.len())?;
        Ok(Evolver { grid: grid.clone(), values, vectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// ψ(t) = Σ_k c_k e^{−iλ_k t/ħ}ψ_k.
    pub fn evolve(&self, psi0: &SampledFunction, t: f64) -> Result<SampledFunction> {
        psi0.grid().ensure_same(&self.grid)?;
        if !t.is_finite() || t.abs() > MAX_EVOLUTION_TIME {
            return Err(LwError::InvalidParameter(format!("|t| must be at most {MAX_EVOLUTION_TIME}, got {t}")));
        }
        let coefs = self
            .vectors
            .par_iter()
            .map(|v| inner_product(psi0, v))
            .collect::<Result<Vec<C64>>>()?;
        let norm_sq = psi0.norm().powi(2);
        if norm_sq > 0.0 {
            let captured: f64 = coefs.iter().map(|c| c.norm_sqr()).sum();
            let lost = (1.0 - captured / norm_sq).abs();
            if lost > TRUNCATION_LIMIT {
                return Err(LwError::NotConverged(format!("eigen-expansion misses {lost:.2e} of the norm")));
            }
        }
        let hbar = self.grid.hbar();
        let mut out = vec![C64::new(0.0, 0.0); self.grid.len()];
        for ((v, c), l) in self.vectors.iter().zip(&coefs).zip(&self.values) {
            let w = c * C64::from_polar(1.0, -l * t / hbar);
            for (o, x) in out.iter_mut().zip(v.values()) {
                *o += w * x;
            }
        }
        SampledFunction::new(self.grid.clone(), out)
    }
}

pub fn evolve_schrodinger(psi0: &SampledFunction, a: &Symbol, t: f64) -> Result<SampledFunction> {
    Evolver::new(a, psi0.grid())?.evolve(psi0, t)
}

/// ‖iħ(Ψ(t+δ) − Ψ(t−δ))/2δ − ÃΨ(t)‖/‖Ψ(t)‖ with Ψ(s) = U_φψ(s).
pub fn lifted_evolution_residual(
    evolver: &Evolver,
    psi0: &SampledFunction,
    t: f64,
    delta: f64,
    phi: &Window,
    params: ScalingParams,
    lw: &LwOperator,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(LwError::InvalidParameter("delta must be positive".into()));
    }
    let lift = |s: f64| -> Result<SampledFunction> { wavepacket(&evolver.evolve(psi0, s)?, phi, params, lw.grid()) };
    let (plus, mid, minus) = (lift(t + delta)?, lift(t)?, lift(t - delta)?);
    let hbar = lw.grid().hbar();
    let dt = plus.sub(&minus)?.scaled(C64::new(0.0, hbar / (2.0 * delta)));
    Ok(dt.distance(&lw.apply(&mid)?)? / mid.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::landau::{lw_operator, LwRoute};
    use crate::special::hermite_fn;

    #[test]
    fn ground_state_rotates_and_revives() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let ev = Evolver::new(&Symbol::harmonic(), &g).unwrap();
        let f0 = hermite_fn(0, &g).unwrap();
        let at = ev.evolve(&f0, 1.3).unwrap();
        assert!(at.distance(&f0.scaled(C64::from_polar(1.0, -0.65))).unwrap() < 1e-10);
        let mix = f0.add(&hermite_fn(3, &g).unwrap()).unwrap();
        let rev = ev.evolve(&mix, 2.0 * std::f64::consts::PI).unwrap();
        assert!(rev.distance(&mix.scaled(C64::new(-1.0, 0.0))).unwrap() < 1e-9);
        assert!(ev.evolve(&mix, 0.0).unwrap().distance(&mix).unwrap() < 1e-12);
        assert!(ev.evolve(&mix, 25.0).is_err());
    }

    #[test]
    fn lifted_equation_holds_for_ground_state() {
        let g = make_grid(1, 8.0, 128, 1.0).unwrap();
        let p = make_grid(2, 10.0, 80, 1.0).unwrap();
        let ev = Evolver::new(&Symbol::harmonic(), &g).unwrap();
        let phi = Window::new(hermite_fn(0, &g).unwrap()).unwrap();
        let lw = lw_operator(&Symbol::harmonic(), &p, ScalingParams::unit(), LwRoute::XyRule).unwrap();
        let r = lifted_evolution_residual(&ev, &hermite_fn(0, &g).unwrap(), 0.3, 1e-4, &phi, ScalingParams::unit(), &lw).unwrap();
        assert!(r < 1e-5, "{r}");
    }
}
