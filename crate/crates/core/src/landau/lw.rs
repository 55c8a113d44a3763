use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LwError, Result};
use crate::fourier::{phase_matrix, spectral_derivative};
use crate::grid::{GridSpec, SampledFunction, C64};
use crate::transforms::ScalingParams;
use crate::weyl::{twisted_apply, weyl_apply_2d, weyl_assemble_2d, GaussianSymbol, Monomial, OperatorMatrix, Symbol, MATRIX_NODE_LIMIT};

/// Highest total degree accepted by the xy substitution rule.
pub const XY_RULE_MAX_DEGREE: u32 = 4;

/// ã^{γ,μ}(z, ζ) = a(γx/2 − ζ_y/μ, μy/2 + ζ_x/γ), the Weyl symbol of Ã^{γ,μ} on R².
#[derive(Clone, Debug)]
pub struct LiftedSymbol {
    base: Symbol,
    params: ScalingParams,
}

impl LiftedSymbol {
    pub fn new(base: Symbol, params: ScalingParams) -> Result<Self> {
        let params = ScalingParams::new(params.gamma, params.mu)?;
        Ok(LiftedSymbol { base, params })
    }

    pub fn base(&self) -> &Symbol {
        &self.base
    }

    pub fn params(&self) -> ScalingParams {
        self.params
    }

    pub fn eval(&self, z: [f64; 2], zeta: [f64; 2]) -> C64 {
        let ScalingParams { gamma, mu } = self.params;
        self.base.eval(gamma * z[0] / 2.0 - zeta[1] / mu, mu * z[1] / 2.0 + zeta[0] / gamma)
    }

    /// Values at fixed z over ζ_x ∈ z1s, ζ_y ∈ z2s, ζ_x-major.
    pub fn eval_block(&self, z: [f64; 2], z1s: &[f64], z2s: &[f64]) -> Vec<C64> {
        let ScalingParams { gamma, mu } = self.params;
        let xs: Vec<f64> = z2s.iter().map(|p| gamma * z[0] / 2.0 - p / mu).collect();
        let ys: Vec<f64> = z1s.iter().map(|p| mu * z[1] / 2.0 + p / gamma).collect();
        let t = self.base.eval_tensor(&xs, &ys);
        let (n1, n2) = (z1s.len(), z2s.len());
        let mut out = vec![C64::new(0.0, 0.0); n1 * n2];
        for m2 in 0..n2 {
            for m1 in 0..n1 {
                out[m1 * n2 + m2] = t[m2 * n1 + m1];
            }
        }
        out
    }
}

/// Construction route for Ã^{γ,μ}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LwRoute {
    /// (2πħ)^{−1}∫a_σ^{γ,μ}(w)T̃^{γ,μ}(w)dw, with a_σ^{γ,μ}(w) = |γμ|a_σ(γw_x, μw_y).
    Integrated,
    /// Discrete Weyl quantization of the lifted symbol on the phase grid.
    Lifted,
    /// Symmetrized substitution x → X^{γ,μ}, y → Y^{γ,μ} in a polynomial symbol.
    XyRule,
}

impl LwRoute {
    pub fn tag(&self) -> &'static str {
        match self {
            LwRoute::Integrated => "integrated",
            LwRoute::Lifted => "lifted",
            LwRoute::XyRule => "xy-rule",
        }
    }
}

/// A Landau–Weyl operator on a phase grid, applied matrix-free.
#[derive(Clone, Debug)]
pub struct LwOperator {
    lifted: LiftedSymbol,
    grid: GridSpec,
    route: LwRoute,
}

/// Builds Ã^{γ,μ} for the given route; fails early if the route cannot handle `a`.
pub fn lw_operator(a: &Symbol, grid2: &GridSpec, params: ScalingParams, route: LwRoute) -> Result<LwOperator> {
    grid2.ensure_dim(2)?;
    let lifted = LiftedSymbol::new(a.clone(), params)?;
    if route == LwRoute::XyRule {
        let ms = a
            .monomials()
            .ok_or_else(|| LwError::UnsupportedSymbol("the xy rule needs a polynomial symbol".into()))?;
        if let Some(m) = ms.iter().find(|m| m.degree() > XY_RULE_MAX_DEGREE) {
            return Err(LwError::UnsupportedSymbol(format!(
                "degree {} exceeds the xy-rule limit {XY_RULE_MAX_DEGREE}",
                m.degree()
            )));
        }
    }
    if let Symbol::Sampled(f) = a {
        f.grid().ensure_dim(2)?;
    }
    Ok(LwOperator { lifted, grid: grid2.clone(), route })
}

/// Ã^{γ,μ} built by substituting X^{γ,μ} = (γ/2)x + (iħ/μ)∂_y and
/// Y^{γ,μ} = (μ/2)y − (iħ/γ)∂_x into a polynomial of degree at most 4.
pub fn lw_operator_from_xy_rule(a: &Symbol, grid2: &GridSpec, params: ScalingParams) -> Result<LwOperator> {
    lw_operator(a, grid2, params, LwRoute::XyRule)
}

impl LwOperator {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn route(&self) -> LwRoute {
        self.route
    }

    pub fn lifted(&self) -> &LiftedSymbol {
        &self.lifted
    }

    pub fn descriptor(&self) -> String {
        let p = self.lifted.params;
        format!("lw[{}; gamma={}, mu={}; {}]", self.route.tag(), p.gamma, p.mu, self.lifted.base.describe())
    }

    pub fn apply(&self, big_psi: &SampledFunction) -> Result<SampledFunction> {
        self.grid.ensure_same(big_psi.grid())?;
        let v = match self.route {
            LwRoute::Lifted => {
                let lifted = &self.lifted;
                let eval = |z: [f64; 2], z1s: &[f64], z2s: &[f64]| lifted.eval_block(z, z1s, z2s);
                weyl_apply_2d(&self.grid, &eval, big_psi.values())
            }
            LwRoute::Integrated => integrated_apply(&self.lifted.base, self.lifted.params, big_psi)?,
            LwRoute::XyRule => {
                let ms = self.lifted.base.monomials().expect("checked at construction");
                xy_rule_apply(&ms, self.lifted.params, big_psi)
            }
        };
        Ok(SampledFunction::from_parts(self.grid.clone(), v))
    }

    /// Dense matrix of the operator (node guard applies).
    pub fn assemble(&self) -> Result<OperatorMatrix> {
        let nodes = self.grid.len();
        if nodes > MATRIX_NODE_LIMIT {
            return Err(LwError::TooLarge { nodes, limit: MATRIX_NODE_LIMIT });
        }
        let entries = match self.route {
            LwRoute::Lifted => {
                let lifted = &self.lifted;
                let eval = |z: [f64; 2], z1s: &[f64], z2s: &[f64]| lifted.eval_block(z, z1s, z2s);
                weyl_assemble_2d(&self.grid, &eval)?
            }
            _ => {
                let cols: Vec<Vec<C64>> = (0..nodes)
                    .into_par_iter()
                    .map(|c| {
                        let mut e = SampledFunction::zeros(&self.grid);
                        e.values_mut()[c] = C64::new(1.0, 0.0);
                        self.apply(&e).map(|r| r.into_values())
                    })
                    .collect::<Result<_>>()?;
                DMatrix::from_fn(nodes, nodes, |r, c| cols[c][r])
            }
        };
        OperatorMatrix::new(self.grid.clone(), entries, self.descriptor())
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Spectral derivatives of Ψ, computed once per order pair.
struct DerivativeCache<'a> {
    base: &'a SampledFunction,
    cache: HashMap<(u32, u32), SampledFunction>,
}

impl<'a> DerivativeCache<'a> {
    fn new(base: &'a SampledFunction) -> Self {
        DerivativeCache { base, cache: HashMap::new() }
    }

    fn get(&mut self, px: u32, py: u32) -> &SampledFunction {
        let base = self.base;
        self.cache.entry((px, py)).or_insert_with(|| spectral_derivative(base, &[px, py]))
    }
}

fn integrated_apply(a: &Symbol, params: ScalingParams, big_psi: &SampledFunction) -> Result<Vec<C64>> {
    match a {
        Symbol::Polynomial(ms) => Ok(integrated_polynomial(ms, params, big_psi)),
        Symbol::Gaussian(g) => Ok(integrated_covariant(&gaussian_covariant(g, big_psi.grid().hbar()), params, big_psi)),
        Symbol::Sampled(f) => {
            let sig = sampled_covariant(f, params, big_psi.grid());
            Ok(apply_covariant_table(&sig, params, big_psi))
        }
        Symbol::Sum(parts) => {
            let mut acc = vec![C64::new(0.0, 0.0); big_psi.values().len()];
            for p in parts {
                for (a, v) in acc.iter_mut().zip(integrated_apply(p, params, big_psi)?) {
                    *a += v;
                }
            }
            Ok(acc)
        }
    }
}

/// For a = x^a y^b the covariant symbol is a derivative of δ, so the integral collapses to
/// ÃΨ = (−iħ/μ)^a (iħ/γ)^b ∂^a_{w_y}∂^b_{w_x}[e^{−iγμσ(z,w)/2ħ}Ψ(z − w)] at w = 0,
/// expanded by Leibniz into products of x^s y^r and spectral derivatives of Ψ.
fn integrated_polynomial(ms: &[Monomial], params: ScalingParams, big_psi: &SampledFunction) -> Vec<C64> {
    let grid = big_psi.grid();
    let hbar = grid.hbar();
    let ScalingParams { gamma, mu } = params;
    let i = C64::new(0.0, 1.0);
    let ex = i * (gamma * mu / (2.0 * hbar)); // ∂_{w_y} of the phase brings down ex·x
    let ey = -i * (gamma * mu / (2.0 * hbar)); // ∂_{w_x} of the phase brings down ey·y
    let (xs, ys) = (grid.axis(0).coords(), grid.axis(1).coords());
    let ny = ys.len();
    let mut cache = DerivativeCache::new(big_psi);
    let mut out = vec![C64::new(0.0, 0.0); big_psi.values().len()];
    for m in ms {
        let (a, b) = (m.px, m.py);
        let pre = m.coeff * (-i * hbar / mu).powu(a) * (i * hbar / gamma).powu(b);
        for s in 0..=a {
            for r in 0..=b {
                let sign = if (a - s + b - r) % 2 == 0 { 1.0 } else { -1.0 };
                let c = pre * ex.powu(s) * ey.powu(r) * (sign * binomial(a, s) * binomial(b, r));
                let d = cache.get(b - r, a - s);
                for (idx, (o, v)) in out.iter_mut().zip(d.values()).enumerate() {
                    *o += c * v * xs[idx / ny].powi(s as i32) * ys[idx % ny].powi(r as i32);
                }
            }
        }
    }
    out
}

/// Closed-form a_σ(w) = (2πħ)^{−1}∫e^{−iσ(w,z′)/ħ}a(z′)dz′ for a Gaussian symbol.
fn gaussian_covariant(g: &GaussianSymbol, hbar: f64) -> impl Fn(f64, f64) -> C64 + Sync {
    let g = *g;
    move |wx: f64, wy: f64| {
        let env = (-(g.sy * g.sy * wx * wx + g.sx * g.sx * wy * wy) / (2.0 * hbar * hbar)).exp();
        // σ(w, c) = w_y c_x − w_x c_y
        g.amp * (g.sx * g.sy / hbar * env) * C64::from_polar(1.0, -(wy * g.cx - wx * g.cy) / hbar)
    }
}

fn integrated_covariant(a_sig: &(dyn Fn(f64, f64) -> C64 + Sync), params: ScalingParams, big_psi: &SampledFunction) -> Vec<C64> {
    let grid = big_psi.grid();
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let (h1, h2) = (grid.spacing(0), grid.spacing(1));
    let ScalingParams { gamma, mu } = params;
    let scale = params.product().abs();
    let table = DMatrix::from_fn(2 * n1 - 1, 2 * n2 - 1, |p, q| {
        let (d1, d2) = (p as f64 - (n1 as f64 - 1.0), q as f64 - (n2 as f64 - 1.0));
        a_sig(gamma * d1 * h1, mu * d2 * h2) * scale
    });
    apply_covariant_table(&table, params, big_psi)
}

/// a_σ^{γ,μ} sampled at all node differences of `grid`, for a sampled symbol, by direct
/// quadrature of the symplectic Fourier integral.
fn sampled_covariant(f: &SampledFunction, params: ScalingParams, grid: &GridSpec) -> DMatrix<C64> {
    let sg = f.grid();
    let hbar = grid.hbar();
    let (n1, n2) = (grid.axis(0).points, grid.axis(1).points);
    let us: Vec<f64> = (0..2 * n1 - 1).map(|p| params.gamma * (p as f64 - (n1 as f64 - 1.0)) * grid.spacing(0)).collect();
    let vs: Vec<f64> = (0..2 * n2 - 1).map(|q| params.mu * (q as f64 - (n2 as f64 - 1.0)) * grid.spacing(1)).collect();
    let (sx, sy) = (sg.axis(0).coords(), sg.axis(1).coords());
    let a = DMatrix::from_row_slice(sx.len(), sy.len(), f.values());
    // e^{−iσ(w,z′)/ħ} = e^{i w_x y′/ħ} e^{−i w_y x′/ħ}
    let mut t = phase_matrix(&us, &sy, 1.0 / hbar) * a.transpose() * phase_matrix(&sx, &vs, -1.0 / hbar);
    let c = params.product().abs() * sg.cell_volume() / (2.0 * PI * hbar);
    // beyond the Nyquist band of the symbol's own grid the quadrature only returns aliases
    let (bu, bv) = (PI * hbar / sg.spacing(1), PI * hbar / sg.spacing(0));
    for (p, u) in us.iter().enumerate() {
        for (q, v) in vs.iter().enumerate() {
            t[(p, q)] = if u.abs() < bu && v.abs() < bv { t[(p, q)] * c } else { C64::new(0.0, 0.0) };
        }
    }
    t
}

/// (2πħ)^{−1}∫a_σ^{γ,μ}(z − u)e^{iγμσ(z,u)/2ħ}Ψ(u)du with a_σ^{γ,μ} tabulated at node
/// differences (row index = x difference + N_x − 1).
fn apply_covariant_table(table: &DMatrix<C64>, params: ScalingParams, big_psi: &SampledFunction) -> Vec<C64> {
    let grid = big_psi.grid();
    let n1 = grid.axis(0).points as i64;
    let hbar = grid.hbar();
    let kernel = |d: i64| -> Vec<C64> { table.row((d + n1 - 1) as usize).iter().copied().collect() };
    let tau = params.product() / (2.0 * hbar);
    twisted_apply(grid, &kernel, big_psi.values(), tau, grid.cell_volume() / (2.0 * PI * hbar))
}

/// Weyl-symmetrized substitution: each monomial x^a y^b becomes the average of all
/// distinct words in a copies of X and b copies of Y.
fn xy_rule_apply(ms: &[Monomial], params: ScalingParams, big_psi: &SampledFunction) -> Vec<C64> {
    let grid = big_psi.grid();
    let hbar = grid.hbar();
    let ScalingParams { gamma, mu } = params;
    let (xs, ys) = (grid.axis(0).coords(), grid.axis(1).coords());
    let ny = ys.len();
    let i = C64::new(0.0, 1.0);
    let apply_x = |f: &SampledFunction| -> SampledFunction {
        let d = spectral_derivative(f, &[0, 1]);
        let v = f
            .values()
            .iter()
            .zip(d.values())
            .enumerate()
            .map(|(idx, (v, dv))| v * (gamma / 2.0 * xs[idx / ny]) + dv * (i * hbar / mu))
            .collect();
        SampledFunction::from_parts(grid.clone(), v)
    };
    let apply_y = |f: &SampledFunction| -> SampledFunction {
        let d = spectral_derivative(f, &[1, 0]);
        let v = f
            .values()
            .iter()
            .zip(d.values())
            .enumerate()
            .map(|(idx, (v, dv))| v * (mu / 2.0 * ys[idx % ny]) - dv * (i * hbar / gamma))
            .collect();
        SampledFunction::from_parts(grid.clone(), v)
    };
    let mut out = vec![C64::new(0.0, 0.0); big_psi.values().len()];
    for m in ms {
        let words = words_with(m.px, m.py);
        let w = m.coeff / words.len() as f64;
        for word in &words {
            let mut cur = big_psi.clone();
            // the rightmost letter acts first
            for &is_x in word.iter().rev() {
                cur = if is_x { apply_x(&cur) } else { apply_y(&cur) };
            }
            for (o, v) in out.iter_mut().zip(cur.values()) {
                *o += v * w;
            }
        }
    }
    out
}

/// All arrangements of a `true`s and b `false`s.
fn words_with(a: u32, b: u32) -> Vec<Vec<bool>> {
    if a == 0 && b == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    if a > 0 {
        for mut w in words_with(a - 1, b) {
            w.insert(0, true);
            out.push(w);
        }
    }
    if b > 0 {
        for mut w in words_with(a, b - 1) {
            w.insert(0, false);
            out.push(w);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::landau::{magnetic_hamiltonian_apply, metaplectic_rescale};
    use crate::special::landau_eigenfunction;

    fn rel(a: &SampledFunction, b: &SampledFunction) -> f64 {
        a.distance(b).unwrap() / b.norm().max(1e-300)
    }

    fn small() -> GridSpec {
        make_grid(2, 10.0, 48, 1.0).unwrap()
    }

    #[test]
    fn unit_symbol_is_identity_on_every_route() {
        let g = small();
        let f = landau_eigenfunction(1, 0, &g).unwrap();
        for route in [LwRoute::Integrated, LwRoute::Lifted, LwRoute::XyRule] {
            let op = lw_operator(&Symbol::constant(1.0), &g, ScalingParams::new(2.0, 1.0).unwrap(), route).unwrap();
            assert!(rel(&op.apply(&f).unwrap(), &f) < 1e-9, "{route:?}");
        }
    }

    #[test]
    fn harmonic_symbol_reproduces_magnetic_hamiltonian() {
        let g = make_grid(2, 12.0, 96, 1.0).unwrap();
        for route in [LwRoute::Integrated, LwRoute::XyRule] {
            let op = lw_operator(&Symbol::harmonic(), &g, ScalingParams::unit(), route).unwrap();
            for (j, k) in [(0, 0), (2, 1), (1, 4)] {
                let f = landau_eigenfunction(j, k, &g).unwrap();
                let want = magnetic_hamiltonian_apply(&f, 1.0, 0.5).unwrap();
                assert!(rel(&op.apply(&f).unwrap(), &want) < 1e-9, "{route:?} ({j},{k})");
                assert!(rel(&op.apply(&f).unwrap(), &f.scaled(C64::new(j as f64 + 0.5, 0.0))) < 1e-9);
            }
        }
    }

    #[test]
    fn routes_agree_on_gaussian_and_cubic_symbols() {
        let g = small();
        let f = landau_eigenfunction(0, 1, &g).unwrap().add(&landau_eigenfunction(1, 0, &g).unwrap()).unwrap();
        let params = ScalingParams::new(2.0, 1.0).unwrap();
        let gauss = Symbol::gaussian(1.0, (0.3, -0.2), (1.0, 0.8)).unwrap();
        let li = lw_operator(&gauss, &g, params, LwRoute::Lifted).unwrap().apply(&f).unwrap();
        let it = lw_operator(&gauss, &g, params, LwRoute::Integrated).unwrap().apply(&f).unwrap();
        assert!(rel(&it, &li) < 1e-6, "{}", rel(&it, &li));
        let sampled = Symbol::sampled(gauss.sample(&make_grid(2, 8.0, 64, 1.0).unwrap()).unwrap()).unwrap();
        let sa = lw_operator(&sampled, &g, params, LwRoute::Integrated).unwrap().apply(&f).unwrap();
        assert!(rel(&sa, &li) < 1e-6, "{}", rel(&sa, &li));

        let cubic = Symbol::Polynomial(vec![Monomial::new(0.3, 2, 1), Monomial::new(-0.2, 0, 3), Monomial::new(1.0, 1, 1)]);
        let ops: Vec<SampledFunction> = [LwRoute::Integrated, LwRoute::Lifted, LwRoute::XyRule]
            .iter()
            .map(|&r| lw_operator(&cubic, &g, params, r).unwrap().apply(&f).unwrap())
            .collect();
        assert!(rel(&ops[0], &ops[1]) < 1e-6 && rel(&ops[2], &ops[1]) < 1e-6);
    }

    #[test]
    fn real_symbol_gives_hermitian_matrix() {
        let g = make_grid(2, 8.0, 24, 1.0).unwrap();
        let gauss = Symbol::gaussian(1.0, (0.3, -0.2), (1.0, 0.8)).unwrap();
        let m = lw_operator(&gauss, &g, ScalingParams::unit(), LwRoute::Lifted).unwrap().assemble().unwrap();
        assert!(m.hermitian_deviation() < 1e-10);
    }

    #[test]
    fn conjugation_by_rescaling() {
        let g = make_grid(2, 12.0, 96, 1.0).unwrap();
        // (½, 1) keeps the stretched intermediate function inside the box
        let params = ScalingParams::new(0.5, 1.0).unwrap();
        let inv = ScalingParams::new(2.0, 1.0).unwrap();
        let f = landau_eigenfunction(1, 1, &g).unwrap();
        let a = Symbol::anharmonic(0.1);
        let direct = lw_operator(&a, &g, params, LwRoute::XyRule).unwrap().apply(&f).unwrap();
        let unit = lw_operator(&a, &g, ScalingParams::unit(), LwRoute::XyRule).unwrap();
        let conj = metaplectic_rescale(&unit.apply(&metaplectic_rescale(&f, inv).unwrap()).unwrap(), params).unwrap();
        assert!(rel(&conj, &direct) < 1e-6, "{}", rel(&conj, &direct));
    }

    #[test]
    fn xy_rule_rejects_unsupported_symbols() {
        let g = small();
        let g5 = Symbol::Polynomial(vec![Monomial::new(1.0, 5, 0)]);
        assert!(matches!(lw_operator_from_xy_rule(&g5, &g, ScalingParams::unit()), Err(LwError::UnsupportedSymbol(_))));
        let gauss = Symbol::gaussian(1.0, (0.0, 0.0), (1.0, 1.0)).unwrap();
        assert!(lw_operator_from_xy_rule(&gauss, &g, ScalingParams::unit()).is_err());
        assert_eq!(words_with(2, 2).len(), 6);
    }
}
