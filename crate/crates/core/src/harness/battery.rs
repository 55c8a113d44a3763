use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    eigen_transfer_check, intertwining_residual, moyal_identity_residual, translation_intertwining_residual, IntertwiningSetup,
    TransferSetup,
};
use super::evolution::{lifted_evolution_residual, Evolver};
use super::levels::{eigenvector_expansion, gram_deviation, landau_rayleigh_quotients, landau_report};
use super::report::VerificationReport;
use crate::error::{LwError, Result};
use crate::grid::{make_grid, symplectic_form, GridSpec, PhasePoint, SampledFunction, C64};
use crate::landau::{landau_translation, lw_operator, metaplectic_rescale, LwRoute};
use crate::special::{hermite_fn, hermite_value, landau_eigenfunction, landau_value};
use crate::transforms::{
    default_check_axes, modulation_norm, projection, rescaled_stft_identity_check, stft_wigner_relation_check, wavepacket,
    wavepacket_adjoint_scaled, wavepacket_inverse, ScalingParams, StftConvention, Window, WavepacketVariant,
};
use crate::weyl::{compose_symbols, heisenberg_weyl, moyal_star, weyl_quantize, weyl_trace, Monomial, Symbol};

/// Half-extent and node count of a square grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub half_extent: f64,
    pub points: usize,
}

impl GridParams {
    pub fn build(&self, dim: usize, hbar: f64) -> Result<GridSpec> {
        make_grid(dim, self.half_extent, self.points, hbar)
    }
}

/// Inputs of the identity battery.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BatteryConfig {
    pub hbar: f64,
    /// 1-D grid for ψ and the Weyl matrices.
    pub config_grid: GridParams,
    /// 2-D grid for wavepacket images and Landau functions.
    pub phase_grid: GridParams,
    /// Smaller 2-D grid for the cases that run the lifted route.
    pub route_grid: GridParams,
    pub gamma: f64,
    pub mu: f64,
    /// Seed of the random phase points.
    pub seed: u64,
    /// Replaces every case tolerance when set.
    pub tolerance: Option<f64>,
    /// Case ids or id prefixes; empty runs everything.
    pub cases: Vec<String>,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            hbar: 1.0,
            config_grid: GridParams { half_extent: 8.0, points: 256 },
            phase_grid: GridParams { half_extent: 12.0, points: 192 },
            route_grid: GridParams { half_extent: 10.0, points: 48 },
            gamma: 2.0,
            mu: 1.0,
            seed: 20_240_917,
            tolerance: None,
            cases: Vec::new(),
        }
    }
}

impl BatteryConfig {
    pub fn params(&self) -> Result<ScalingParams> {
        ScalingParams::new(self.gamma, self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(LwError::InvalidParameter(format!("hbar must be positive, got {}", self.hbar)));
        }
        self.params()?;
        self.config_grid.build(1, self.hbar)?;
        self.phase_grid.build(2, self.hbar)?;
        self.route_grid.build(2, self.hbar)?;
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(LwError::InvalidParameter(format!("tolerance must be positive, got {t}")));
            }
        }
        if !self.cases.is_empty() && selected(&self.cases).is_empty() {
            return Err(LwError::InvalidParameter(format!("no verification case matches {:?}", self.cases)));
        }
        Ok(())
    }
}

struct Outcome {
    residual: f64,
    variant: String,
    extra: Vec<(String, f64)>,
}

impl Outcome {
    fn new(residual: f64, variant: impl Into<String>) -> Self {
        Outcome { residual, variant: variant.into(), extra: Vec::new() }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.push((key.to_string(), value));
        self
    }

    fn from_report(r: VerificationReport) -> Self {
        Outcome { residual: r.residual, variant: r.variant, extra: r.extra.into_iter().collect() }
    }
}

struct Case {
    id: &'static str,
    identity: &'static str,
    tag: &'static str,
    tolerance: f64,
    run: fn(&Context) -> Result<Outcome>,
}

struct Context {
    cfg: BatteryConfig,
    config: GridSpec,
    phase: GridSpec,
    route: GridSpec,
    params: ScalingParams,
    phi0: Window,
    hermite: Vec<SampledFunction>,
}

impl Context {
    fn new(cfg: &BatteryConfig) -> Result<Self> {
        let config = cfg.config_grid.build(1, cfg.hbar)?;
        let hermite = (0..=4).map(|k| hermite_fn(k, &config)).collect::<Result<Vec<_>>>()?;
        Ok(Context {
            cfg: cfg.clone(),
            phase: cfg.phase_grid.build(2, cfg.hbar)?,
            route: cfg.route_grid.build(2, cfg.hbar)?,
            params: cfg.params()?,
            phi0: Window::new(hermite[0].clone())?,
            hermite,
            config,
        })
    }

    fn hbar(&self) -> f64 {
        self.cfg.hbar
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(stream);
        r
    }

    /// The phase grid with ħ = 1, where the Landau basis lives.
    fn landau_grid(&self) -> Result<GridSpec> {
        self.phase.with_hbar(1.0)
    }

    fn window(&self, k: usize) -> Result<Window> {
        Window::new(self.hermite[k].clone())
    }

    fn evolution_start(&self) -> Result<SampledFunction> {
        let moved = heisenberg_weyl(&PhasePoint::xy(0.5, -0.3), &self.hermite[0])?;
        let s = moved.add(&self.hermite[1])?;
        Ok(s.scaled((1.0 / s.norm()).into()))
    }
}

fn rel(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    Ok(a.distance(b)? / b.norm())
}

fn hermite_tensor(a: usize, b: usize, grid2: &GridSpec) -> SampledFunction {
    SampledFunction::from_fn(grid2, |z| C64::new(hermite_value(a, z[0]) * hermite_value(b, z[1]), 0.0))
}

fn conventions(ctx: &Context, extra: &str) -> String {
    format!("hbar={}; {extra}", ctx.hbar())
}

fn self_dual_grid(n: usize, hbar: f64) -> Result<GridSpec> {
    let h = (2.0 * PI * hbar / n as f64).sqrt();
    make_grid(2, h * n as f64 / 2.0, n, hbar)
}

fn harmonic_spectrum(ctx: &Context) -> Result<Outcome> {
    let op = weyl_quantize(&Symbol::harmonic(), &ctx.config)?;
    let (values, _) = op.hermitian_eigen(8)?;
    let worst = values.iter().enumerate().fold(0.0f64, |m, (k, v)| m.max((v - (k as f64 + 0.5) * ctx.hbar()).abs()));
    let mut out = Outcome::new(worst, conventions(ctx, "weyl=discrete-2N-dual"));
    for (k, v) in values.iter().enumerate() {
        out = out.with(&format!("lambda_{k}"), *v);
    }
    Ok(out)
}

fn weyl_self_adjoint(ctx: &Context) -> Result<Outcome> {
    let a = Symbol::anharmonic(0.1);
    let op = weyl_quantize(&a, &ctx.config)?;
    Ok(Outcome::new(op.hermitian_deviation(), conventions(ctx, "symbol=(x^2+y^2)/2+0.1x^4")))
}

fn weyl_cocycle(ctx: &Context) -> Result<Outcome> {
    let mut rng = ctx.rng(1);
    let f = &ctx.hermite[0];
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut pt = || PhasePoint::xy(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let (z1, z2) = (pt(), pt());
        let lhs = heisenberg_weyl(&z1.plus(&z2), f)?;
        let s = symplectic_form(&z1, &z2)?;
        let rhs = heisenberg_weyl(&z1, &heisenberg_weyl(&z2, f)?)?.scaled(C64::from_polar(1.0, -s / (2.0 * ctx.hbar())));
        worst = worst.max(lhs.distance(&rhs)?);
    }
    Ok(Outcome::new(worst, conventions(ctx, "sigma(z,z')=y.x'-x.y'; pairs=20")))
}

fn weyl_composition(ctx: &Context) -> Result<Outcome> {
    let g2 = self_dual_grid(64, ctx.hbar())?;
    let g1 = make_grid(1, 8.0, 128, ctx.hbar())?;
    let a = Symbol::gaussian(1.0, (0.2, 0.0), (1.0, 1.0))?;
    let b = Symbol::gaussian(1.0, (0.0, -0.3), (1.2, 0.9))?;
    let c = compose_symbols(&a, &b, &g2)?;
    let prod = weyl_quantize(&a, &g1)?.compose(&weyl_quantize(&b, &g1)?)?;
    let mc = weyl_quantize(&c, &g1)?;
    let mut worst = 0.0f64;
    for k in 0..5 {
        let f = hermite_fn(k, &g1)?;
        worst = worst.max(mc.apply(&f)?.distance(&prod.apply(&f)?)?);
    }
    Ok(Outcome::new(worst, conventions(ctx, "composition=twisted-convolution")))
}

fn weyl_trace_case(ctx: &Context) -> Result<Outcome> {
    let s = 0.5f64.sqrt();
    let a = Symbol::gaussian(1.0, (0.0, 0.0), (s, s))?;
    let want = 0.5 / ctx.hbar();
    let got = weyl_trace(&a, &ctx.config)?;
    Ok(Outcome::new((got - want).norm(), conventions(ctx, "trace=(2 pi hbar)^-1 int a")).with("trace", got.re))
}

fn moyal_identity(ctx: &Context) -> Result<Outcome> {
    let r = moyal_identity_residual(&ctx.hermite, &ctx.phase)?;
    Ok(Outcome::new(r, conventions(ctx, "fixtures=hermite 0..4")))
}

fn stft_wigner(ctx: &Context) -> Result<Outcome> {
    let (psi, phi) = (&ctx.hermite[2], &ctx.hermite[1]);
    let (xs, ys) = default_check_axes(psi);
    let c = stft_wigner_relation_check(psi, phi, &xs, &ys)?;
    Ok(Outcome::new(c.derived, conventions(ctx, "stft=tf"))
        .with("literal", c.literal)
        .with("lhs_max", c.lhs_max))
}

fn doubled_box(ctx: &Context) -> Result<GridSpec> {
    let ax = ctx.config.axis(0);
    make_grid(1, 2.0 * ax.half_extent, 2 * ax.points, ctx.hbar())
}

fn rescaling_identity(ctx: &Context) -> Result<Outcome> {
    // the dilated copies need twice the configuration box
    let g = doubled_box(ctx)?;
    let psi = hermite_fn(1, &g)?;
    let phi = Window::new(hermite_fn(0, &g)?)?;
    let (xs, ys) = default_check_axes(&hermite_fn(0, &ctx.config)?);
    let mut out = Outcome::new(0.0, conventions(ctx, "stft=tf; lambda in {1/2, 2}"));
    for lambda in [0.5, 2.0] {
        let c = rescaled_stft_identity_check(&psi, &phi, lambda, &xs, &ys)?;
        out.residual = out.residual.max(c.derived);
        out = out.with(&format!("literal_lambda_{lambda}"), c.literal);
    }
    Ok(out)
}

fn modulation_equivalence(ctx: &Context) -> Result<Outcome> {
    let out_grid = make_grid(2, 8.0, 64, ctx.hbar())?;
    let psi = &ctx.hermite[2];
    let conv = StftConvention::Tf;
    let a = modulation_norm(psi, &ctx.phi0, 2.0, 1.0, &out_grid, conv)?;
    let b = modulation_norm(psi, &ctx.window(1)?, 2.0, 1.0, &out_grid, conv)?;
    if !(a.reliable && b.reliable) {
        return Err(LwError::IllConditioned("modulation norm grid truncates the STFT".into()));
    }
    Ok(Outcome::new((a.value / b.value).log10().abs(), conventions(ctx, "stft=tf; p=2; s=1; residual=|log10 ratio|"))
        .with("norm_phi0", a.value)
        .with("norm_phi1", b.value))
}

fn isometry_params() -> Result<Vec<ScalingParams>> {
    [(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (-1.0, 3.0)]
        .iter()
        .map(|&(g, m)| ScalingParams::new(g, m))
        .collect()
}

fn wavepacket_isometry(ctx: &Context) -> Result<Outcome> {
    let params = isometry_params()?;
    let jobs: Vec<(usize, ScalingParams)> = params.iter().flat_map(|&p| (0..ctx.hermite.len()).map(move |k| (k, p))).collect();
    let devs = jobs
        .par_iter()
        .map(|&(k, p)| -> Result<f64> {
            let u = wavepacket(&ctx.hermite[k], &ctx.phi0, p, &ctx.phase)?;
            Ok((u.norm() - ctx.hermite[k].norm()).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Outcome::new(
        devs.into_iter().fold(0.0, f64::max),
        conventions(ctx, "wavepacket=explicit; params=(1,1),(2,1),(1,2),(-1,3)"),
    ))
}

fn wavepacket_adjoint_case(ctx: &Context) -> Result<Outcome> {
    let jobs: Vec<(usize, ScalingParams)> = [ScalingParams::unit(), ctx.params]
        .iter()
        .flat_map(|&p| (0..ctx.hermite.len()).map(move |k| (k, p)))
        .collect();
    let r = jobs
        .par_iter()
        .map(|&(k, p)| -> Result<f64> {
            let psi = &ctx.hermite[k];
            let back = wavepacket_adjoint_scaled(&wavepacket(psi, &ctx.phi0, p, &ctx.phase)?, &ctx.phi0, p)?;
            rel(&back, psi)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Outcome::new(r.into_iter().fold(0.0, f64::max), conventions(ctx, &format!("wavepacket=explicit; params=(1,1),({},{})", ctx.params.gamma, ctx.params.mu))))
}

fn projection_idempotency(ctx: &Context) -> Result<Outcome> {
    // U_φ*Ψ stretches by γ in x, so the adjoint lands on a doubled configuration box
    let wide = doubled_box(ctx)?;
    let phi = Window::new(hermite_fn(0, &wide)?)?;
    // a Gaussian bump that is not in the range of U_φ
    let bump = SampledFunction::from_fn(&ctx.phase, |z| C64::new((-((z[0] - 1.0).powi(2) + (z[1] + 0.5).powi(2))).exp(), 0.0));
    let p1 = projection(&bump, &phi, ctx.params)?;
    let p2 = projection(&p1, &phi, ctx.params)?;
    Ok(Outcome::new(p2.distance(&p1)? / bump.norm(), conventions(ctx, "wavepacket=explicit; configuration box doubled"))
        .with("distance_from_input", p1.distance(&bump)? / bump.norm()))
}

fn wavepacket_inversion(ctx: &Context) -> Result<Outcome> {
    let gw = ctx.hermite[0].axpy(C64::new(0.5, 0.0), &ctx.hermite[1])?;
    let r = ctx
        .hermite
        .par_iter()
        .map(|psi| -> Result<f64> {
            let u = wavepacket(psi, &ctx.phi0, ScalingParams::unit(), &ctx.phase)?;
            rel(&wavepacket_inverse(&u, &ctx.phi0, &gw)?, psi)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Outcome::new(r.into_iter().fold(0.0, f64::max), conventions(ctx, "reconstruction window=phi0+0.5phi1; constant=(2 pi hbar)^-1/2"))
        .with("printed_constant_factor", 2.0 * PI * ctx.hbar()))
}

fn landau_closed_form(ctx: &Context) -> Result<Outcome> {
    let g = ctx.landau_grid()?;
    let cfg1 = ctx.config.with_hbar(1.0)?;
    let hs = (0..=4).map(|k| hermite_fn(k, &cfg1)).collect::<Result<Vec<_>>>()?;
    let labels: Vec<(usize, usize)> = (0..=4).flat_map(|j| (0..=4).map(move |k| (j, k))).collect();
    let r = labels
        .par_iter()
        .map(|&(j, k)| -> Result<f64> {
            let u = wavepacket(&hs[j], &Window::new(hs[k].clone())?, ScalingParams::unit(), &g)?;
            rel(&landau_eigenfunction(j, k, &g)?, &u)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Outcome::new(r.into_iter().fold(0.0, f64::max), "hbar=1; Phi_jk=U_{phi_k}phi_j; j,k<=4"))
}

fn landau_levels(ctx: &Context) -> Result<Outcome> {
    let rep = landau_report(&ctx.landau_grid()?, 4, 4)?;
    Ok(Outcome::new(rep.max_residual(), "hbar=m=omega=1; omega_L=1/2; j,k<=4")
        .with("boundary_mass", rep.boundary_mass.unwrap_or(f64::NAN)))
}

fn landau_degeneracy(ctx: &Context) -> Result<Outcome> {
    let q = landau_rayleigh_quotients(&ctx.landau_grid()?, 4, 4)?;
    let worst = q
        .iter()
        .enumerate()
        .flat_map(|(j, row)| row.iter().map(move |v| (v - (j as f64 + 0.5)).abs()))
        .fold(0.0, f64::max);
    Ok(Outcome::new(worst, "hbar=m=omega=1; rayleigh quotients; j,k<=4").with("clusters", q.len() as f64))
}

fn landau_gram(ctx: &Context) -> Result<Outcome> {
    let g = ctx.landau_grid()?;
    let fs = (0..=4)
        .flat_map(|j| (0..=4).map(move |k| (j, k)))
        .map(|(j, k)| landau_eigenfunction(j, k, &g))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&SampledFunction> = fs.iter().collect();
    Ok(Outcome::new(gram_deviation(&refs)?, "hbar=1; j,k<=4; entrywise"))
}

fn landau_translation_cocycle(ctx: &Context) -> Result<Outcome> {
    let g = ctx.landau_grid()?;
    let f = landau_eigenfunction(1, 2, &g)?;
    let mut rng = ctx.rng(2);
    let mut worst = 0.0f64;
    for params in [ScalingParams::unit(), ctx.params] {
        for _ in 0..5 {
            let mut pt = || PhasePoint::xy(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let (z0, z1) = (pt(), pt());
            let lhs = landau_translation(&z0.plus(&z1), &f, params)?;
            let rhs = landau_translation(&z0, &landau_translation(&z1, &f, params)?, params)?;
            let phase = -params.product() * symplectic_form(&z0, &z1)? / 2.0;
            worst = worst.max(lhs.distance(&rhs.scaled(C64::from_polar(1.0, phase)))?);
            worst = worst.max((lhs.norm() - f.norm()).abs());
        }
    }
    Ok(Outcome::new(worst, format!("hbar=1; params=(1,1),({},{}); phase=exp(-i gamma mu sigma/2hbar)", ctx.params.gamma, ctx.params.mu)))
}

fn landau_expansion(ctx: &Context) -> Result<Outcome> {
    let g = ctx.landau_grid()?;
    let t = eigenvector_expansion(&landau_eigenfunction(2, 3, &g)?, 4, 4)?;
    let single = (1.0 - t.coefficients[2][3].norm()).abs().max(t.off_row_mass(2));
    let moved = landau_translation(&PhasePoint::xy(0.6, -0.4), &landau_eigenfunction(0, 0, &g)?, ScalingParams::unit())?;
    let column = eigenvector_expansion(&moved, 8, 2)?.off_column_mass(0);
    Ok(Outcome::new(single.max(column), "hbar=1; Phi_23 in rows; translated Phi_00 in column 0")
        .with("single_state", single)
        .with("translated_off_column", column))
}

fn intertwining_with(ctx: &Context, params: ScalingParams, unscaled_extra: bool) -> Result<Outcome> {
    let setup = IntertwiningSetup { phase_grid: ctx.phase.clone(), route: LwRoute::XyRule, variant: WavepacketVariant::Explicit };
    let set = &ctx.hermite[..4];
    let r = intertwining_residual(&Symbol::harmonic(), &ctx.phi0, params, set, &setup)?;
    let mut out = Outcome::from_report(r);
    if unscaled_extra {
        let alt = IntertwiningSetup { variant: WavepacketVariant::Unscaled, ..setup };
        out = out.with("unscaled_variant", intertwining_residual(&Symbol::harmonic(), &ctx.phi0, params, set, &alt)?.residual);
    }
    Ok(out)
}

fn intertwining_1_1(ctx: &Context) -> Result<Outcome> {
    intertwining_with(ctx, ScalingParams::unit(), false)
}

fn intertwining_2_1(ctx: &Context) -> Result<Outcome> {
    intertwining_with(ctx, ScalingParams::new(2.0, 1.0)?, true)
}

fn intertwining_routes(ctx: &Context) -> Result<Outcome> {
    let set = &ctx.hermite[..2];
    // (1, 1): the γ = 2 images are too narrow in x for the coarse route grid
    let mut out = Outcome::new(0.0, conventions(ctx, "routes=integrated,lifted,xy-rule; gamma=1; mu=1"));
    for route in [LwRoute::Integrated, LwRoute::Lifted, LwRoute::XyRule] {
        let setup = IntertwiningSetup { phase_grid: ctx.route.clone(), route, variant: WavepacketVariant::Explicit };
        let r = intertwining_residual(&Symbol::harmonic(), &ctx.phi0, ScalingParams::unit(), set, &setup)?.residual;
        out.residual = out.residual.max(r);
        out = out.with(route.tag(), r);
    }
    Ok(out)
}

fn translation_intertwining(ctx: &Context) -> Result<Outcome> {
    let mut rng = ctx.rng(3);
    let points: Vec<PhasePoint> = (0..10).map(|_| PhasePoint::xy(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
    let r = translation_intertwining_residual(&ctx.phi0, &ctx.hermite[..3], &points, &ctx.phase)?;
    Ok(Outcome::from_report(r))
}

fn route_battery_symbols() -> Result<Vec<(&'static str, Symbol)>> {
    Ok(vec![
        ("gaussian", Symbol::gaussian(1.0, (0.3, -0.2), (1.0, 0.8))?),
        ("quadratic", Symbol::quadratic([[1.0, 0.3], [0.3, 2.0]])?),
        (
            "cubic",
            Symbol::Polynomial(vec![Monomial::new(0.3, 2, 1), Monomial::new(-0.2, 0, 3), Monomial::new(1.0, 1, 1)]),
        ),
    ])
}

fn route_equivalence(ctx: &Context) -> Result<Outcome> {
    let g = &ctx.route;
    let vectors = [hermite_tensor(0, 1, g).add(&hermite_tensor(1, 0, g))?, hermite_tensor(2, 1, g)];
    let sample_grid = make_grid(2, 8.0, 64, ctx.hbar())?;
    let mut out = Outcome::new(0.0, conventions(ctx, &format!("gamma={}; mu={}; test vectors=hermite tensors", ctx.params.gamma, ctx.params.mu)));
    for (name, a) in route_battery_symbols()? {
        let lifted = lw_operator(&a, g, ctx.params, LwRoute::Lifted)?;
        let mut others = vec![("integrated", lw_operator(&a, g, ctx.params, LwRoute::Integrated)?)];
        if a.monomials().is_some() {
            others.push(("xy-rule", lw_operator(&a, g, ctx.params, LwRoute::XyRule)?));
        } else {
            let sampled = Symbol::sampled(a.sample(&sample_grid)?)?;
            others.push(("sampled", lw_operator(&sampled, g, ctx.params, LwRoute::Integrated)?));
        }
        let mut worst = 0.0f64;
        for v in &vectors {
            let reference = lifted.apply(v)?;
            for (_, op) in &others {
                worst = worst.max(rel(&op.apply(v)?, &reference)?);
            }
        }
        out.residual = out.residual.max(worst);
        out = out.with(name, worst);
    }
    Ok(out)
}

fn lw_self_adjoint(ctx: &Context) -> Result<Outcome> {
    let g = make_grid(2, 8.0, 24, ctx.hbar())?;
    let a = Symbol::gaussian(1.0, (0.3, -0.2), (1.0, 0.8))?;
    let m = lw_operator(&a, &g, ctx.params, LwRoute::Lifted)?.assemble()?;
    Ok(Outcome::new(m.hermitian_deviation(), conventions(ctx, "route=lifted; grid=24^2 on [-8,8)^2")))
}

fn lw_composition(ctx: &Context) -> Result<Outcome> {
    // the intermediate B~v needs a finer grid than the route grid
    let g = &make_grid(2, 12.0, 96, ctx.hbar())?;
    let a = Symbol::gaussian(1.0, (0.2, 0.0), (1.0, 1.0))?;
    let b = Symbol::gaussian(1.0, (0.0, -0.3), (1.2, 0.9))?;
    let c = compose_symbols(&a, &b, &self_dual_grid(64, ctx.hbar())?)?;
    let (oa, ob) = (lw_operator(&a, g, ctx.params, LwRoute::Integrated)?, lw_operator(&b, g, ctx.params, LwRoute::Integrated)?);
    let oc = lw_operator(&c, g, ctx.params, LwRoute::Integrated)?;
    let v = hermite_tensor(1, 0, g).add(&hermite_tensor(0, 2, g))?;
    let r = rel(&oc.apply(&v)?, &oa.apply(&ob.apply(&v)?)?)?;
    Ok(Outcome::new(r, conventions(ctx, "route=integrated; grid=96^2 on [-12,12)^2; c=a#b via twisted convolution")))
}

fn lw_conjugation(ctx: &Context) -> Result<Outcome> {
    let params = ScalingParams::new(0.5, 1.0)?;
    let inv = ScalingParams::new(2.0, 1.0)?;
    let a = Symbol::anharmonic(0.1);
    let v = hermite_tensor(1, 1, &ctx.phase);
    let direct = lw_operator(&a, &ctx.phase, params, LwRoute::XyRule)?.apply(&v)?;
    let unit = lw_operator(&a, &ctx.phase, ScalingParams::unit(), LwRoute::XyRule)?;
    let conj = metaplectic_rescale(&unit.apply(&metaplectic_rescale(&v, inv)?)?, params)?;
    Ok(Outcome::new(rel(&conj, &direct)?, conventions(ctx, "params=(1/2,1); S=|gamma mu|^1/2 Psi(gamma x, mu y)")))
}

fn star_grid(ctx: &Context) -> Result<GridSpec> {
    make_grid(2, 8.0, 64, ctx.hbar())
}

fn star_ground_state(ctx: &Context) -> Result<Outcome> {
    let g = star_grid(ctx)?;
    let h = ctx.hbar();
    let ground = SampledFunction::from_fn(&g, |z| C64::new((-(z[0] * z[0] + z[1] * z[1]) / h).exp(), 0.0));
    let r = rel(&moyal_star(&Symbol::harmonic(), &ground)?, &ground.scaled((0.5 * h).into()))?;
    let mut out = Outcome::new(r, conventions(ctx, "ground state=exp(-r^2/hbar); level=hbar/2"));
    if (h - 1.0).abs() < 1e-12 {
        let phi00 = SampledFunction::from_fn(&g, |z| landau_value(0, 0, z[0], z[1]));
        out = out.with("literal_phi00", rel(&moyal_star(&Symbol::harmonic(), &phi00)?, &phi00.scaled(0.5.into()))?);
    }
    Ok(out)
}

fn star_lw22(ctx: &Context) -> Result<Outcome> {
    let g = star_grid(ctx)?;
    let h = Symbol::gaussian(1.0, (0.3, 0.0), (1.0, 1.2))?;
    let fixtures = [
        SampledFunction::from_fn(&g, |z| C64::new((-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp(), 0.0)),
        SampledFunction::from_fn(&g, |z| C64::from_polar((-((z[0] - 0.5).powi(2) + 2.0 * z[1] * z[1]) / 2.0).exp(), 0.3 * z[0])),
    ];
    let op22 = lw_operator(&h, &g, ScalingParams::new(2.0, 2.0)?, LwRoute::Integrated)?;
    let op21 = lw_operator(&h, &g, ScalingParams::new(2.0, 1.0)?, LwRoute::Integrated)?;
    let (mut worst, mut literal) = (0.0f64, 0.0f64);
    for f in &fixtures {
        let star = moyal_star(&h, f)?;
        worst = worst.max(rel(&op22.apply(f)?, &star)?);
        literal = literal.max(rel(&op21.apply(f)?, &star)?);
    }
    Ok(Outcome::new(worst, conventions(ctx, "star=A~^{2,2}; route=integrated")).with("literal_2_1", literal))
}

fn eigen_transfer(ctx: &Context) -> Result<Outcome> {
    let setup = TransferSetup { phi: ctx.phi0.clone(), params: ctx.params, phase_grid: ctx.phase.clone(), route: LwRoute::XyRule };
    Ok(Outcome::from_report(eigen_transfer_check(&Symbol::anharmonic(0.1), 4, &setup)?))
}

const EVOLUTION_TIMES: [f64; 3] = [0.3, 1.0, 5.0];

fn evolution_unitarity(ctx: &Context) -> Result<Outcome> {
    let ev = Evolver::new(&Symbol::harmonic(), &ctx.config)?;
    let psi0 = ctx.evolution_start()?;
    let mut worst = 0.0f64;
    for t in EVOLUTION_TIMES.iter().chain(&[2.0 * PI]) {
        worst = worst.max((ev.evolve(&psi0, *t)?.norm() - psi0.norm()).abs());
    }
    Ok(Outcome::new(worst, conventions(ctx, "psi0=T(0.5,-0.3)phi0+phi1 normalized; t in {0.3,1,5,2pi}")))
}

fn evolution_lifted(ctx: &Context) -> Result<Outcome> {
    let ev = Evolver::new(&Symbol::harmonic(), &ctx.config)?;
    let psi0 = ctx.evolution_start()?;
    let lw = lw_operator(&Symbol::harmonic(), &ctx.phase, ScalingParams::unit(), LwRoute::XyRule)?;
    let mut out = Outcome::new(0.0, conventions(ctx, "delta=1e-4; params=(1,1); route=xy-rule"));
    for t in EVOLUTION_TIMES {
        let r = lifted_evolution_residual(&ev, &psi0, t, 1e-4, &ctx.phi0, ScalingParams::unit(), &lw)?;
        out.residual = out.residual.max(r);
        out = out.with(&format!("t_{t}"), r);
    }
    Ok(out)
}

fn evolution_revival(ctx: &Context) -> Result<Outcome> {
    let ev = Evolver::new(&Symbol::harmonic(), &ctx.config)?;
    let psi0 = ctx.evolution_start()?;
    let back = ev.evolve(&psi0, 2.0 * PI)?;
    Ok(Outcome::new(back.distance(&psi0.scaled((-1.0).into()))?, conventions(ctx, "psi(2pi)=-psi0")))
}

const CASES: &[Case] = &[
    Case { id: "harmonic-spectrum", identity: "lambda_k = (k+1/2) hbar, k < 8", tag: "weyl", tolerance: 1e-6, run: harmonic_spectrum },
    Case { id: "weyl-self-adjoint", identity: "real symbol => Hermitian matrix", tag: "weyl", tolerance: 1e-10, run: weyl_self_adjoint },
    Case { id: "weyl-cocycle", identity: "T(z1+z2) = exp(-i sigma/2hbar) T(z1)T(z2)", tag: "weyl", tolerance: 1e-9, run: weyl_cocycle },
    Case { id: "weyl-composition", identity: "Op(a)Op(b) = Op(a#b)", tag: "weyl", tolerance: 1e-6, run: weyl_composition },
    Case { id: "weyl-trace", identity: "Tr Op(a) = (2 pi hbar)^-1 int a", tag: "weyl", tolerance: 1e-8, run: weyl_trace_case },
    Case { id: "moyal-identity", identity: "((W(f1,g1)|W(f2,g2))) = (2 pi hbar)^-1 (f1|f2) conj(g1|g2)", tag: "transforms", tolerance: 1e-8, run: moyal_identity },
    Case { id: "stft-wigner-relation", identity: "W(psi,phi) = (2/pi hbar)^1/2 e^{2ixy/hbar} V psi_c(2x/c,-2y/c)", tag: "transforms", tolerance: 1e-8, run: stft_wigner },
    Case { id: "rescaling-identity", identity: "V(psi_l)(x,y) = |l|^-1 V_{phi_1/l} psi(l x, y/l)", tag: "transforms", tolerance: 1e-8, run: rescaling_identity },
    Case { id: "modulation-equivalence", identity: "M^{2,1} norms with windows phi0, phi1 agree within 10x", tag: "transforms", tolerance: 1.0, run: modulation_equivalence },
    Case { id: "wavepacket-isometry", identity: "||U psi|| = ||psi||", tag: "wavepacket", tolerance: 1e-9, run: wavepacket_isometry },
    Case { id: "wavepacket-adjoint", identity: "U* U = I", tag: "wavepacket", tolerance: 1e-8, run: wavepacket_adjoint_case },
    Case { id: "projection-idempotency", identity: "P^2 = P", tag: "wavepacket", tolerance: 1e-8, run: projection_idempotency },
    Case { id: "wavepacket-inversion", identity: "psi = (2 pi hbar)^-1/2 / (g|phi) int U psi(z) Pi(z/2) g dz", tag: "wavepacket", tolerance: 1e-7, run: wavepacket_inversion },
    Case { id: "landau-closed-form", identity: "Phi_jk = U_{phi_k} phi_j", tag: "landau", tolerance: 1e-9, run: landau_closed_form },
    Case { id: "landau-levels", identity: "H_sym Phi_jk = (j+1/2) Phi_jk", tag: "landau", tolerance: 1e-6, run: landau_levels },
    Case { id: "landau-degeneracy", identity: "(Phi_jk|H_sym Phi_jk) = j+1/2 for every k", tag: "landau", tolerance: 1e-7, run: landau_degeneracy },
    Case { id: "landau-gram", identity: "(Phi_jk|Phi_lm) = delta", tag: "landau", tolerance: 1e-8, run: landau_gram },
    Case { id: "landau-translation-cocycle", identity: "T~(z0+z1) = exp(-i gamma mu sigma/2hbar) T~(z0)T~(z1)", tag: "landau", tolerance: 1e-9, run: landau_translation_cocycle },
    Case { id: "landau-expansion", identity: "Landau-basis expansion concentrates on rows and columns", tag: "landau", tolerance: 1e-6, run: landau_expansion },
    Case { id: "intertwining-harmonic-1-1", identity: "A~ U = U A, (gamma,mu)=(1,1)", tag: "intertwining", tolerance: 1e-6, run: intertwining_1_1 },
    Case { id: "intertwining-harmonic-2-1", identity: "A~ U = U A, (gamma,mu)=(2,1)", tag: "intertwining", tolerance: 1e-6, run: intertwining_2_1 },
    Case { id: "intertwining-routes", identity: "A~ U = U A on every construction route", tag: "intertwining", tolerance: 1e-6, run: intertwining_routes },
    Case { id: "translation-intertwining", identity: "T~(z) U = U T(z)", tag: "intertwining", tolerance: 1e-8, run: translation_intertwining },
    Case { id: "route-equivalence", identity: "integrated = lifted = xy-rule", tag: "lw", tolerance: 1e-6, run: route_equivalence },
    Case { id: "lw-self-adjoint", identity: "real symbol => Hermitian A~", tag: "lw", tolerance: 1e-10, run: lw_self_adjoint },
    Case { id: "lw-composition", identity: "A~ B~ = (a#b)~", tag: "lw", tolerance: 1e-6, run: lw_composition },
    Case { id: "lw-conjugation", identity: "A~^{g,m} = S~^{g,m} A~^{1,1} S~^{1/g,1/m}", tag: "lw", tolerance: 1e-6, run: lw_conjugation },
    Case { id: "star-ground-state", identity: "H star g = (hbar/2) g, g = exp(-r^2/hbar)", tag: "star", tolerance: 1e-7, run: star_ground_state },
    Case { id: "star-lw22", identity: "a star Psi = A~^{2,2} Psi", tag: "star", tolerance: 1e-7, run: star_lw22 },
    Case { id: "eigen-transfer", identity: "A psi = l psi <=> A~ U psi = l U psi", tag: "eigen", tolerance: 1e-5, run: eigen_transfer },
    Case { id: "evolution-unitarity", identity: "||psi(t)|| = ||psi0||", tag: "evolution", tolerance: 1e-9, run: evolution_unitarity },
    Case { id: "evolution-lifted", identity: "i hbar dPsi/dt = A~ Psi, Psi = U psi(t)", tag: "evolution", tolerance: 1e-5, run: evolution_lifted },
    Case { id: "evolution-revival", identity: "psi(2 pi) = -psi0", tag: "evolution", tolerance: 1e-7, run: evolution_revival },
];

/// Ids of every case, in run order.
pub fn case_ids() -> Vec<&'static str> {
    CASES.iter().map(|c| c.id).collect()
}

fn selected(filters: &[String]) -> Vec<&'static Case> {
    CASES
        .iter()
        .filter(|c| filters.is_empty() || filters.iter().any(|f| c.id == f || c.id.starts_with(f.as_str())))
        .collect()
}

/// Runs the selected cases. A case that errors becomes a failed report; the order of
/// the output follows the case table, whatever order the cases finish in.
pub fn run_battery(cfg: &BatteryConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    let ctx = Context::new(cfg)?;
    let cases = selected(&cfg.cases);
    Ok(cases
        .par_iter()
        .map(|c| {
            let report = match (c.run)(&ctx) {
                Ok(o) => {
                    let r = VerificationReport::new(c.id, c.identity, c.tag, o.residual, c.tolerance, &o.variant);
                    o.extra.into_iter().fold(r, |r, (k, v)| r.with_extra(&k, v))
                }
                Err(e) => VerificationReport::failed(c.id, c.identity, c.tag, c.tolerance, e.to_string()),
            };
            match cfg.tolerance {
                Some(t) => report.with_tolerance(t),
                None => report,
            }
        })
        .collect())
}
