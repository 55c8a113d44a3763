use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use lwkit::grid::{GridSpec, SampledFunction};
use lwkit::harness::{
    eigen_transfer_check, landau_report, lifted_evolution_residual, run_battery, BatteryConfig, EigenEntry, EigenReport, Evolver,
    TransferSetup, VerificationReport,
};
use lwkit::io::{sidecar_path, slice_2d, write_binary, write_csv, write_matrix, DumpMeta};
use lwkit::landau::lw_operator;
use lwkit::transforms::{cross_wigner, stft as stft_op, wavepacket as wavepacket_op, wavepacket_variant, wigner_at, ScalingParams, Window};
use lwkit::weyl::{moyal_star, weyl_quantize, OperatorMatrix};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::fixtures::{parse_fixture, parse_symbol};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Physical conventions stamped into every output.
#[derive(Clone, Debug, Serialize)]
pub struct Conventions {
    pub hbar: f64,
    pub gamma: f64,
    pub mu: f64,
    pub stft_convention: String,
    pub wavepacket_variant: String,
    pub lw_route: String,
    pub symplectic_form: &'static str,
    pub heisenberg_weyl: &'static str,
    pub weyl_quantization: &'static str,
    pub landau_basis: &'static str,
    pub index_layout: &'static str,
}

impl Conventions {
    pub fn of(cfg: &RunConfig) -> Self {
        Conventions {
            hbar: cfg.hbar,
            gamma: cfg.gamma,
            mu: cfg.mu,
            stft_convention: cfg.stft_convention.tag().to_string(),
            wavepacket_variant: cfg.wavepacket_variant.tag().to_string(),
            lw_route: cfg.route.tag().to_string(),
            symplectic_form: "sigma(z,z') = y.x' - x.y'",
            heisenberg_weyl: "T(z0)psi(x) = exp(i(y0 x - y0 x0/2)/hbar) psi(x - x0)",
            weyl_quantization: "midpoint kernel, 2N dual momenta per axis",
            landau_basis: "Phi_jk = U_{phi_k} phi_j at hbar = 1, level j + 1/2",
            index_layout: "row-major, first axis slowest",
        }
    }

    fn tags(&self) -> Vec<(&'static str, String)> {
        vec![
            ("hbar", self.hbar.to_string()),
            ("gamma", self.gamma.to_string()),
            ("mu", self.mu.to_string()),
            ("stft_convention", self.stft_convention.clone()),
            ("wavepacket_variant", self.wavepacket_variant.clone()),
            ("lw_route", self.lw_route.clone()),
            ("symplectic_form", self.symplectic_form.into()),
            ("heisenberg_weyl", self.heisenberg_weyl.into()),
            ("weyl_quantization", self.weyl_quantization.into()),
            ("landau_basis", self.landau_basis.into()),
            ("index_layout", self.index_layout.into()),
        ]
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

#[derive(Serialize)]
struct JsonDump<'a> {
    meta: &'a DumpMeta,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn split(values: impl Iterator<Item = Complex64>) -> (Vec<f64>, Vec<f64>) {
    values.map(|v| (v.re, v.im)).unzip()
}

/// Writes `f` in the configured format plus its metadata. Binary 2-D dumps also get a
/// CSV slice along the first axis at the middle node of the second (y = 0).
fn dump(cfg: &RunConfig, stem: &str, f: &SampledFunction, extra: &[(&str, String)]) -> Result<(), CliError> {
    let mut meta = DumpMeta::for_grid(f.grid()).with_tag("kind", stem);
    for (k, v) in Conventions::of(cfg).tags().into_iter().chain(extra.iter().map(|(k, v)| (*k, v.clone()))) {
        meta = meta.with_tag(k, v);
    }
    match cfg.format {
        Format::Bin => {
            write_binary(f, &out_path(cfg, &format!("{stem}.bin")), &meta)?;
            if f.grid().dim() == 2 {
                let mid = f.grid().axis(1).points / 2;
                write_csv(&slice_2d(f, 1, mid)?, &out_path(cfg, &format!("{stem}_slice.csv")))?;
            }
        }
        Format::Csv => {
            write_csv(f, &out_path(cfg, &format!("{stem}.csv")))?;
            write_json(&out_path(cfg, &format!("{stem}.json")), &meta)?;
        }
        Format::Json => {
            let (re, im) = split(f.values().iter().copied());
            write_json(&out_path(cfg, &format!("{stem}.json")), &JsonDump { meta: &meta, re, im })?;
        }
    }
    Ok(())
}

fn print_summary<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

struct Inputs {
    config: GridSpec,
    phase: GridSpec,
    psi: SampledFunction,
    phi: Window,
}

fn inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let config = cfg.config_grid.build(1, cfg.hbar)?;
    let phase = cfg.phase_grid.build(2, cfg.hbar)?;
    let psi = parse_fixture(&cfg.psi, &config)?;
    let phi = Window::normalized(parse_fixture(&cfg.phi, &config)?)?;
    Ok(Inputs { config, phase, psi, phi })
}

fn fixture_tags(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    vec![("psi", cfg.psi.clone()), ("phi", cfg.phi.clone())]
}

pub fn wigner(cfg: &RunConfig) -> Result<bool, CliError> {
    let inp = inputs(cfg)?;
    let phi = parse_fixture(&cfg.phi, &inp.config)?;
    let w = cross_wigner(&inp.psi, &phi, &inp.phase)?;
    dump(cfg, "wigner", &w, &fixture_tags(cfg))?;
    let origin = wigner_at(&inp.psi, &phi, &[0.0], &[0.0])?[0];
    let max_re = w.values().iter().fold(f64::NEG_INFINITY, |m, v| m.max(v.re));
    let min_re = w.values().iter().fold(f64::INFINITY, |m, v| m.min(v.re));
    print_summary(&serde_json::json!({
        "command": "wigner", "origin": [origin.re, origin.im], "max_re": max_re, "min_re": min_re, "max_abs": w.max_abs(),
    }))?;
    Ok(true)
}

pub fn stft(cfg: &RunConfig) -> Result<bool, CliError> {
    let inp = inputs(cfg)?;
    let v = stft_op(&inp.psi, &inp.phi, &inp.phase, cfg.stft_convention)?;
    dump(cfg, "stft", &v, &fixture_tags(cfg))?;
    print_summary(&serde_json::json!({ "command": "stft", "max_abs": v.max_abs(), "norm": v.norm() }))?;
    Ok(true)
}

pub fn wavepacket(cfg: &RunConfig) -> Result<bool, CliError> {
    let inp = inputs(cfg)?;
    let u = wavepacket_variant(&inp.psi, &inp.phi, cfg.params()?, &inp.phase, cfg.wavepacket_variant)?;
    dump(cfg, "wavepacket", &u, &fixture_tags(cfg))?;
    print_summary(&serde_json::json!({ "command": "wavepacket", "norm": u.norm(), "psi_norm": inp.psi.norm() }))?;
    Ok(true)
}

fn dump_matrix(cfg: &RunConfig, op: &OperatorMatrix) -> Result<(), CliError> {
    let normalization = "entries act on samples; quadrature weight folded in";
    let m = op.entries();
    let mut meta = DumpMeta::for_grid(op.grid())
        .with_tag("kind", "quantize")
        .with_tag("symbol", op.descriptor())
        .with_tag("normalization", normalization)
        .with_tag("quadrature_weight", format!("{:e}", op.quadrature_weight()))
        .with_tag("layout", "row-major matrix");
    for (k, v) in Conventions::of(cfg).tags() {
        meta = meta.with_tag(k, v);
    }
    match cfg.format {
        Format::Bin => {
            let path = out_path(cfg, "quantize.bin");
            write_matrix(op, &path, normalization)?;
            // replace the plain sidecar with one that also carries the conventions
            write_json(&sidecar_path(&path), &meta)?;
        }
        Format::Csv => {
            let mut w = std::io::BufWriter::new(fs::File::create(out_path(cfg, "quantize.csv"))?);
            writeln!(w, "row,col,re,im")?;
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    writeln!(w, "{i},{j},{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im)?;
                }
            }
            w.flush()?;
            write_json(&out_path(cfg, "quantize.json"), &meta)?;
        }
        Format::Json => {
            let (re, im) = split((0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])));
            write_json(&out_path(cfg, "quantize.json"), &JsonDump { meta: &meta, re, im })?;
        }
    }
    Ok(())
}

pub fn quantize(cfg: &RunConfig) -> Result<bool, CliError> {
    let grid = cfg.config_grid.build(1, cfg.hbar)?;
    let op = weyl_quantize(&parse_symbol(&cfg.symbol)?, &grid)?;
    dump_matrix(cfg, &op)?;
    let tr = op.trace();
    print_summary(&serde_json::json!({
        "command": "quantize", "symbol": op.descriptor(), "hermitian_deviation": op.hermitian_deviation(), "trace": [tr.re, tr.im],
    }))?;
    Ok(true)
}

pub fn star(cfg: &RunConfig) -> Result<bool, CliError> {
    let inp = inputs(cfg)?;
    let big_psi = wavepacket_op(&inp.psi, &inp.phi, ScalingParams::unit(), &inp.phase)?;
    let out = moyal_star(&parse_symbol(&cfg.symbol)?, &big_psi)?;
    let mut tags = fixture_tags(cfg);
    tags.push(("symbol", cfg.symbol.clone()));
    tags.push(("input", "U_phi psi with (gamma, mu) = (1, 1)".into()));
    dump(cfg, "star", &out, &tags)?;
    print_summary(&serde_json::json!({ "command": "star", "norm": out.norm(), "input_norm": big_psi.norm() }))?;
    Ok(true)
}

#[derive(Serialize)]
struct SpectrumDocument<'a> {
    schema_version: u32,
    conventions: Conventions,
    report: &'a EigenReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    transfer: Option<VerificationReport>,
}

pub fn spectrum(cfg: &RunConfig) -> Result<bool, CliError> {
    let (report, transfer) = if cfg.symbol == "magnetic" {
        let grid = cfg.phase_grid.build(2, cfg.hbar)?;
        (landau_report(&grid, cfg.j_max, cfg.k_max)?, None)
    } else {
        let grid = cfg.config_grid.build(1, cfg.hbar)?;
        let sym = parse_symbol(&cfg.symbol)?;
        let op = weyl_quantize(&sym, &grid)?;
        let (values, vectors) = op.hermitian_eigen(cfg.levels)?;
        let entries = values
            .iter()
            .zip(&vectors)
            .enumerate()
            .map(|(index, (&level, v))| -> Result<EigenEntry, CliError> {
                let residual = op.apply(v)?.distance(&v.scaled(level.into()))? / v.norm();
                Ok(EigenEntry { index, j: None, k: None, level, residual, cluster: 0 })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let report = EigenReport::build(
            entries,
            1e-6,
            format!("{} nodes on [-{},{})", grid.len(), cfg.config_grid.half_extent, cfg.config_grid.half_extent),
            op.descriptor().to_string(),
            "weyl-matrix".into(),
        );
        // only the harmonic symbol has closed-form levels; others get the transfer check
        let transfer = if cfg.symbol == "harmonic" {
            None
        } else {
            let setup = TransferSetup {
                phi: Window::normalized(parse_fixture(&cfg.phi, &grid)?)?,
                params: cfg.params()?,
                phase_grid: cfg.phase_grid.build(2, cfg.hbar)?,
                route: cfg.route,
            };
            Some(eigen_transfer_check(&sym, cfg.levels, &setup)?)
        };
        (report, transfer)
    };
    fs::write(out_path(cfg, "spectrum.csv"), report.to_csv())?;
    let pass = transfer.as_ref().is_none_or(|t| t.pass);
    if let Some(t) = &transfer {
        println!("{}", t.summary_line());
    }
    write_json(
        &out_path(cfg, "spectrum.json"),
        &SpectrumDocument { schema_version: SCHEMA_VERSION, conventions: Conventions::of(cfg), report: &report, transfer },
    )?;
    print_summary(&serde_json::json!({
        "command": "spectrum", "levels": report.eigenvalues(), "clusters": report.clusters.len(), "max_residual": report.max_residual(),
    }))?;
    Ok(pass)
}

pub fn evolve(cfg: &RunConfig) -> Result<bool, CliError> {
    let inp = inputs(cfg)?;
    let sym = parse_symbol(&cfg.symbol)?;
    let ev = Evolver::new(&sym, &inp.config)?;
    let out = ev.evolve(&inp.psi, cfg.time)?;
    let mut tags = fixture_tags(cfg);
    tags.push(("symbol", cfg.symbol.clone()));
    tags.push(("time", cfg.time.to_string()));
    dump(cfg, "evolve", &out, &tags)?;
    let lw = lw_operator(&sym, &inp.phase, ScalingParams::unit(), cfg.route)?;
    let lifted = lifted_evolution_residual(&ev, &inp.psi, cfg.time, 1e-4, &inp.phi, ScalingParams::unit(), &lw)?;
    print_summary(&serde_json::json!({
        "command": "evolve", "time": cfg.time, "norm_deviation": (out.norm() - inp.psi.norm()).abs(), "lifted_residual": lifted,
        "lifted_route": lw.route().tag(),
    }))?;
    Ok(true)
}

#[derive(Serialize)]
struct Summary {
    total: usize,
    passed: usize,
    failed: Vec<String>,
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    schema_version: u32,
    /// Seconds since the Unix epoch; the only field that differs between identical runs.
    timestamp: u64,
    conventions: Conventions,
    config: &'a BatteryConfig,
    summary: Summary,
    reports: &'a [VerificationReport],
}

pub fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    let battery = cfg.battery();
    let reports = run_battery(&battery)?;
    for r in &reports {
        println!("{}", r.summary_line());
    }
    let failed: Vec<String> = reports.iter().filter(|r| !r.pass).map(|r| r.case_id.clone()).collect();
    let pass = failed.is_empty();
    println!("{} of {} cases passed", reports.len() - failed.len(), reports.len());
    let doc = VerifyDocument {
        schema_version: SCHEMA_VERSION,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        conventions: Conventions::of(cfg),
        config: &battery,
        summary: Summary { total: reports.len(), passed: reports.len() - failed.len(), failed },
        reports: &reports,
    };
    write_json(&out_path(cfg, "verify_report.json"), &doc)?;
    Ok(pass)
}
