use lwkit::grid::{GridSpec, PhasePoint, SampledFunction};
use lwkit::special::{hermite_fn, HERMITE_CAP};
use lwkit::weyl::{heisenberg_weyl, Symbol};

use crate::CliError;

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number '{t}' in {what}"))))
        .collect()
}

/// `hermite:K` is φ_K; `coherent:X,Y` is T(X,Y)φ_0.
pub fn parse_fixture(name: &str, grid: &GridSpec) -> Result<SampledFunction, CliError> {
    let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
    match kind {
        "hermite" => {
            let k: usize = arg
                .parse()
                .map_err(|_| CliError::Usage(format!("fixture '{name}': expected hermite:K with 0 <= K <= {HERMITE_CAP}")))?;
            Ok(hermite_fn(k, grid)?)
        }
        "coherent" => match numbers(arg, name)?.as_slice() {
            &[x, y] => Ok(heisenberg_weyl(&PhasePoint::xy(x, y), &hermite_fn(0, grid)?)?),
            _ => Err(CliError::Usage(format!("fixture '{name}': expected coherent:X,Y"))),
        },
        _ => Err(CliError::Usage(format!("unknown fixture '{name}'; expected hermite:K or coherent:X,Y"))),
    }
}

/// Symbols by name: `harmonic`, `anharmonic[:C]`, `magnetic` (treated as harmonic
/// outside `spectrum`), `constant:C`, `quadratic:A,B,C` for [[A,B],[B,C]], and
/// `gaussian:AMP,X0,Y0,SX,SY`.
pub fn parse_symbol(name: &str) -> Result<Symbol, CliError> {
    let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
    let bad = || CliError::Usage(format!("symbol '{name}' has the wrong number of parameters"));
    let sym = match kind {
        "harmonic" | "magnetic" if arg.is_empty() => Symbol::harmonic(),
        "anharmonic" if arg.is_empty() => Symbol::anharmonic(0.1),
        "anharmonic" => match numbers(arg, name)?.as_slice() {
            &[c] => Symbol::anharmonic(c),
            _ => return Err(bad()),
        },
        "constant" => match numbers(arg, name)?.as_slice() {
            &[c] => Symbol::constant(c),
            _ => return Err(bad()),
        },
        "quadratic" => match numbers(arg, name)?.as_slice() {
            &[a, b, c] => Symbol::quadratic([[a, b], [b, c]])?,
            _ => return Err(bad()),
        },
        "gaussian" => match numbers(arg, name)?.as_slice() {
            &[amp, x0, y0, sx, sy] => Symbol::gaussian(amp, (x0, y0), (sx, sy))?,
            _ => return Err(bad()),
        },
        _ => return Err(CliError::Usage(format!("unknown symbol '{name}'"))),
    };
    Ok(sym)
}
