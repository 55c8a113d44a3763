//! Acceptance criteria 1-12. Prints one PASS/FAIL line per criterion, with diagnostics
//! indented below it.
//!
//! Criteria 1 and 7 are run exactly as stated and fail; see the README section on
//! known failures. The process exits non-zero if any other criterion fails, if the
//! diagnostics that accompany 1 and 7 fail, or (with LWKIT_ACCEPTANCE_STRICT=1) if
//! any criterion fails at all.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use lwkit::grid::{make_grid, GridSpec, SampledFunction, C64};
use lwkit::harness::{landau_report, moyal_identity_residual};
use lwkit::landau::{lw_operator, LwRoute};
use lwkit::special::{hermite_fn, landau_eigenfunction};
use lwkit::transforms::ScalingParams;
use lwkit::weyl::{moyal_star, weyl_quantize, Symbol};
use serde_json::Value;

/// Criteria whose literal statement cannot hold; they are still run and reported.
const KNOWN_UNATTAINABLE: &[u8] = &[1, 7];

struct Outcome {
    number: u8,
    pass: bool,
    summary: String,
    diagnostics: Vec<(bool, String)>,
}

impl Outcome {
    fn new(number: u8, pass: bool, summary: String) -> Self {
        Outcome { number, pass, summary, diagnostics: Vec::new() }
    }

    fn diagnostic(mut self, pass: bool, text: String) -> Self {
        self.diagnostics.push((pass, text));
        self
    }

    fn print(&self) {
        println!("criterion {:>2} {} {}", self.number, status(self.pass), self.summary);
        for (ok, d) in &self.diagnostics {
            println!("    diagnostic {} {d}", status(*ok));
        }
    }
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn rel(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.distance(b).unwrap() / b.norm()
}

fn landau_levels_on(grid: &GridSpec) -> (f64, f64, Option<String>) {
    let t = Instant::now();
    match landau_report(grid, 4, 4) {
        Ok(r) => (r.max_residual(), t.elapsed().as_secs_f64(), None),
        Err(e) => (f64::INFINITY, t.elapsed().as_secs_f64(), Some(e.to_string())),
    }
}

fn criterion_1() -> Outcome {
    let (res, secs, err) = landau_levels_on(&make_grid(2, 8.0, 128, 1.0).unwrap());
    let pass = res < 1e-6 && secs < 10.0;
    let mut summary = format!("Landau levels j,k<=4, 128^2 on [-8,8)^2: max residual {res:.3e} (tol 1e-6), {secs:.2} s (limit 10 s)");
    if let Some(e) = err {
        summary.push_str(&format!("; error: {e}"));
    }
    let (dres, dsecs, _) = landau_levels_on(&make_grid(2, 14.0, 224, 1.0).unwrap());
    Outcome::new(1, pass, summary).diagnostic(
        dres < 1e-6 && dsecs < 10.0,
        format!("same check, 224^2 on [-14,14)^2 where the functions vanish at the edge: {dres:.3e}, {dsecs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let g = make_grid(1, 8.0, 512, 1.0).unwrap();
    let (values, _) = weyl_quantize(&Symbol::harmonic(), &g).unwrap().hermitian_eigen(8).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let err = values.iter().enumerate().fold(0.0f64, |m, (k, v)| m.max((v - (k as f64 + 0.5)).abs()));
    Outcome::new(
        2,
        err < 1e-6 && secs < 30.0,
        format!("harmonic spectrum, 8 levels, 512 nodes on [-8,8): max |lambda_k - (k+1/2)| {err:.3e} (tol 1e-6), {secs:.2} s (limit 30 s)"),
    )
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let g = make_grid(1, 8.0, 256, 1.0).unwrap();
    let fixtures: Vec<_> = (0..=4).map(|k| hermite_fn(k, &g).unwrap()).collect();
    let r = moyal_identity_residual(&fixtures, &make_grid(2, 12.0, 192, 1.0).unwrap()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    Outcome::new(
        3,
        r < 1e-8 && secs < 20.0,
        format!("Moyal identity over Hermite quadruples <= 4: {r:.3e} (tol 1e-8), {secs:.2} s (limit 20 s)"),
    )
}

fn criterion_7() -> Outcome {
    let g = make_grid(2, 8.0, 64, 1.0).unwrap();
    let h = Symbol::harmonic();
    let phi00 = landau_eigenfunction(0, 0, &g).unwrap();
    let ground = rel(&moyal_star(&h, &phi00).unwrap(), &phi00.scaled(C64::new(0.5, 0.0)));

    let gauss = Symbol::gaussian(1.0, (0.3, 0.0), (1.0, 1.2)).unwrap();
    let fixtures = [
        SampledFunction::from_fn(&g, |z| C64::new((-(z[0] * z[0] + z[1] * z[1]) / 2.0).exp(), 0.0)),
        SampledFunction::from_fn(&g, |z| C64::from_polar((-((z[0] - 0.5).powi(2) + 2.0 * z[1] * z[1]) / 2.0).exp(), 0.3 * z[0])),
    ];
    let against = |gamma: f64, mu: f64| -> f64 {
        let p = ScalingParams::new(gamma, mu).unwrap();
        let ops = [
            (&h, lw_operator(&h, &g, p, LwRoute::XyRule).unwrap()),
            (&gauss, lw_operator(&gauss, &g, p, LwRoute::Integrated).unwrap()),
        ];
        let mut worst = 0.0f64;
        for (sym, op) in &ops {
            for f in &fixtures {
                worst = worst.max(rel(&op.apply(f).unwrap(), &moyal_star(sym, f).unwrap()));
            }
        }
        worst
    };
    let literal = against(2.0, 1.0);
    let pass = ground < 1e-7 && literal < 1e-7;

    let star_ground = SampledFunction::from_fn(&g, |z| C64::new((-(z[0] * z[0] + z[1] * z[1])).exp(), 0.0));
    let star_res = rel(&moyal_star(&h, &star_ground).unwrap(), &star_ground.scaled(C64::new(0.5, 0.0)));
    let lw22 = against(2.0, 2.0);
    Outcome::new(
        7,
        pass,
        format!("H star Phi_00 = Phi_00/2: {ground:.3e} (tol 1e-7); star vs A~^(2,1) on Gaussian fixtures: {literal:.3e} (tol 1e-7)"),
    )
    .diagnostic(star_res < 1e-7, format!("H star exp(-r^2) = exp(-r^2)/2: {star_res:.3e}"))
    .diagnostic(lw22 < 1e-7, format!("star vs A~^(2,2) on the same fixtures: {lw22:.3e}"))
}

fn run_verify(out: &Path) -> (Option<i32>, String, f64) {
    let t = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_lwkit"))
        .arg("verify")
        .arg("--out")
        .arg(out)
        .output()
        .expect("lwkit runs");
    let text = std::fs::read_to_string(out.join("verify_report.json")).unwrap_or_default();
    (o.status.code(), text, t.elapsed().as_secs_f64())
}

fn without_timestamp(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\":")).collect::<Vec<_>>().join("\n")
}

struct Cases(BTreeMap<String, Value>);

impl Cases {
    fn parse(text: &str) -> Self {
        let doc: Value = serde_json::from_str(text).unwrap_or(Value::Null);
        let map = doc["reports"]
            .as_array()
            .map(|a| a.iter().map(|r| (r["case_id"].as_str().unwrap_or_default().to_string(), r.clone())).collect())
            .unwrap_or_default();
        Cases(map)
    }

    fn residual(&self, id: &str) -> f64 {
        self.0.get(id).and_then(|r| r["residual"].as_f64()).unwrap_or(f64::INFINITY)
    }

    fn extra(&self, id: &str, key: &str) -> f64 {
        self.0.get(id).and_then(|r| r["extra"][key].as_f64()).unwrap_or(f64::INFINITY)
    }

    /// Checks each (label, value, tolerance) and formats them into one line.
    fn judge(number: u8, title: &str, checks: &[(&str, f64, f64)]) -> Outcome {
        let pass = checks.iter().all(|&(_, v, tol)| v <= tol);
        let parts: Vec<String> = checks.iter().map(|(l, v, tol)| format!("{l} {v:.3e} (<= {tol:.0e})")).collect();
        Outcome::new(number, pass, format!("{title}: {}", parts.join("; ")))
    }
}

fn battery_criteria(c: &Cases) -> Vec<Outcome> {
    vec![
        Cases::judge(
            4,
            "wavepacket algebra",
            &[
                ("isometry", c.residual("wavepacket-isometry"), 1e-9),
                ("U*U=I", c.residual("wavepacket-adjoint"), 1e-8),
                ("P^2=P", c.residual("projection-idempotency"), 1e-8),
                ("inversion", c.residual("wavepacket-inversion"), 1e-7),
            ],
        ),
        Cases::judge(
            5,
            "intertwining",
            &[
                ("harmonic (1,1)", c.residual("intertwining-harmonic-1-1"), 1e-6),
                ("harmonic (2,1)", c.residual("intertwining-harmonic-2-1"), 1e-6),
                ("T~/T at 10 points", c.residual("translation-intertwining"), 1e-8),
            ],
        ),
        Cases::judge(
            6,
            "route equivalence",
            &[
                ("gaussian", c.extra("route-equivalence", "gaussian"), 1e-6),
                ("quadratic", c.extra("route-equivalence", "quadratic"), 1e-6),
                ("cubic", c.extra("route-equivalence", "cubic"), 1e-6),
            ],
        ),
        Cases::judge(
            8,
            "eigenvalue transfer, anharmonic, 4 levels",
            &[
                ("forward", c.extra("eigen-transfer", "forward"), 1e-5),
                ("backward", c.extra("eigen-transfer", "backward"), 1e-5),
            ],
        ),
        Cases::judge(9, "Landau basis Gram matrix", &[("max |G - I|", c.residual("landau-gram"), 1e-8)]),
        Cases::judge(
            10,
            "rescaling and window equivalence",
            &[
                ("rescaling, lambda in {1/2,2}", c.residual("rescaling-identity"), 1e-8),
                ("window norms, |log10 ratio|", c.residual("modulation-equivalence"), 1.0),
            ],
        ),
        Cases::judge(
            11,
            "evolution",
            &[
                ("unitarity", c.residual("evolution-unitarity"), 1e-9),
                ("lifted t=0.3", c.extra("evolution-lifted", "t_0.3"), 1e-5),
                ("lifted t=1", c.extra("evolution-lifted", "t_1"), 1e-5),
                ("lifted t=5", c.extra("evolution-lifted", "t_5"), 1e-5),
                ("revival at 2pi", c.residual("evolution-revival"), 1e-7),
            ],
        ),
    ]
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let (code_a, text_a, secs_a) = run_verify(&dir.path().join("a"));
    let (code_b, text_b, secs_b) = run_verify(&dir.path().join("b"));
    let cases = Cases::parse(&text_a);

    let mut outcomes = vec![criterion_1(), criterion_2(), criterion_3()];
    outcomes.extend(battery_criteria(&cases));
    outcomes.push(criterion_7());
    let identical = !text_a.is_empty() && without_timestamp(&text_a) == without_timestamp(&text_b);
    outcomes.push(
        Outcome::new(12, identical, format!("two verify runs give identical reports apart from the timestamp: {identical}"))
            .diagnostic(code_a == Some(0) && code_b == Some(0), format!("verify exit codes {code_a:?}, {code_b:?}; {secs_a:.1} s and {secs_b:.1} s")),
    );
    outcomes.sort_by_key(|o| o.number);

    for o in &outcomes {
        o.print();
    }
    let strict = std::env::var("LWKIT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed} of {} criteria pass", outcomes.len());
    let mut blocking = Vec::new();
    for o in &outcomes {
        let known = KNOWN_UNATTAINABLE.contains(&o.number);
        if !o.pass && (strict || !known) {
            blocking.push(format!("criterion {}", o.number));
        }
        if o.diagnostics.iter().any(|(ok, _)| !ok) {
            blocking.push(format!("diagnostics of criterion {}", o.number));
        }
    }
    let known_failing: Vec<String> = outcomes.iter().filter(|o| !o.pass && KNOWN_UNATTAINABLE.contains(&o.number)).map(|o| o.number.to_string()).collect();
    if !known_failing.is_empty() {
        println!("known unattainable as stated: criteria {}", known_failing.join(", "));
    }
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("blocking failures: {}", blocking.join(", "));
        ExitCode::FAILURE
    }
}
