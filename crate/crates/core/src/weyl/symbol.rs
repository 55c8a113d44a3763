use serde::{Deserialize, Serialize};

use crate::error::{LwError, Result};
use crate::fourier::resample_2d;
use crate::grid::{GridSpec, SampledFunction, C64};

/// coeff · x^px · y^py
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: C64,
    pub px: u32,
    pub py: u32,
}

impl Monomial {
    pub fn new(coeff: f64, px: u32, py: u32) -> Self {
        Monomial { coeff: C64::new(coeff, 0.0), px, py }
    }

    pub fn degree(&self) -> u32 {
        self.px + self.py
    }
}

/// amp · exp(−(x−cx)²/2sx² − (y−cy)²/2sy²)
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSymbol {
    pub amp: C64,
    pub cx: f64,
    pub cy: f64,
    pub sx: f64,
    pub sy: f64,
}

/// A phase-space symbol for one degree of freedom.
#[derive(Clone, Debug)]
pub enum Symbol {
    Polynomial(Vec<Monomial>),
    Gaussian(GaussianSymbol),
    Sum(Vec<Symbol>),
    Sampled(SampledFunction),
}

impl Symbol {
    pub fn constant(c: f64) -> Self {
        Symbol::Polynomial(vec![Monomial::new(c, 0, 0)])
    }

    pub fn x() -> Self {
        Symbol::Polynomial(vec![Monomial::new(1.0, 1, 0)])
    }

    pub fn y() -> Self {
        Symbol::Polynomial(vec![Monomial::new(1.0, 0, 1)])
    }

    /// (x² + y²)/2
    pub fn harmonic() -> Self {
        Symbol::Polynomial(vec![Monomial::new(0.5, 2, 0), Monomial::new(0.5, 0, 2)])
    }

    /// (x² + y²)/2 + c·x⁴
    pub fn anharmonic(c: f64) -> Self {
        Symbol::Polynomial(vec![Monomial::new(0.5, 2, 0), Monomial::new(0.5, 0, 2), Monomial::new(c, 4, 0)])
    }

    /// ½ Mz·z for a symmetric 2×2 matrix M.
    pub fn quadratic(m: [[f64; 2]; 2]) -> Result<Self> {
        if (m[0][1] - m[1][0]).abs() > 1e-12 * (1.0 + m[0][1].abs()) {
            return Err(LwError::InvalidParameter("quadratic form matrix must be symmetric".into()));
        }
        Ok(Symbol::Polynomial(vec![
            Monomial::new(0.5 * m[0][0], 2, 0),
            Monomial::new(m[0][1], 1, 1),
            Monomial::new(0.5 * m[1][1], 0, 2),
        ]))
    }

    pub fn gaussian(amp: f64, center: (f64, f64), widths: (f64, f64)) -> Result<Self> {
        if !(widths.0 > 0.0 && widths.1 > 0.0) {
            return Err(LwError::InvalidParameter("Gaussian widths must be positive".into()));
        }
        Ok(Symbol::Gaussian(GaussianSymbol {
            amp: C64::new(amp, 0.0),
            cx: center.0,
            cy: center.1,
            sx: widths.0,
            sy: widths.1,
        }))
    }

    pub fn sampled(f: SampledFunction) -> Result<Self> {
        f.grid().ensure_dim(2)?;
        Ok(Symbol::Sampled(f))
    }

    pub fn eval(&self, x: f64, y: f64) -> C64 {
        match self {
            Symbol::Polynomial(ms) => ms
                .iter()
                .map(|m| m.coeff * x.powi(m.px as i32) * y.powi(m.py as i32))
                .sum(),
            Symbol::Gaussian(g) => {
                let (dx, dy) = ((x - g.cx) / g.sx, (y - g.cy) / g.sy);
                g.amp * (-0.5 * (dx * dx + dy * dy)).exp()
            }
            Symbol::Sum(parts) => parts.iter().map(|p| p.eval(x, y)).sum(),
            Symbol::Sampled(f) => resample_2d(f, &[x], &[y])[0],
        }
    }

    /// Values on xs × ys (xs slowest).
    pub fn eval_tensor(&self, xs: &[f64], ys: &[f64]) -> Vec<C64> {
        match self {
            Symbol::Sampled(f) => resample_2d(f, xs, ys),
            Symbol::Sum(parts) => {
                let mut acc = vec![C64::new(0.0, 0.0); xs.len() * ys.len()];
                for p in parts {
                    for (a, v) in acc.iter_mut().zip(p.eval_tensor(xs, ys)) {
                        *a += v;
                    }
                }
                acc
            }
            Symbol::Polynomial(ms) => {
                let mut out = vec![C64::new(0.0, 0.0); xs.len() * ys.len()];
                for m in ms {
                    let px: Vec<f64> = xs.iter().map(|x| x.powi(m.px as i32)).collect();
                    let py: Vec<C64> = ys.iter().map(|y| m.coeff * y.powi(m.py as i32)).collect();
                    for (i, a) in px.iter().enumerate() {
                        for (o, b) in out[i * ys.len()..(i + 1) * ys.len()].iter_mut().zip(&py) {
                            *o += b * *a;
                        }
                    }
                }
                out
            }
            _ => {
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for &x in xs {
                    for &y in ys {
                        out.push(self.eval(x, y));
                    }
                }
                out
            }
        }
    }

    pub fn sample(&self, grid2: &GridSpec) -> Result<SampledFunction> {
        grid2.ensure_dim(2)?;
        let v = self.eval_tensor(&grid2.axis(0).coords(), &grid2.axis(1).coords());
        SampledFunction::new(grid2.clone(), v)
    }

    /// Monomials of a polynomial symbol (sums of polynomials are flattened).
    pub fn monomials(&self) -> Option<Vec<Monomial>> {
        match self {
            Symbol::Polynomial(ms) => Some(ms.clone()),
            Symbol::Sum(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.monomials()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Symbol::Polynomial(ms) => ms.iter().all(|m| m.coeff.im == 0.0),
            Symbol::Gaussian(g) => g.amp.im == 0.0,
            Symbol::Sum(parts) => parts.iter().all(|p| p.is_real()),
            Symbol::Sampled(f) => f.values().iter().all(|v| v.im == 0.0),
        }
    }

    /// Short human-readable descriptor used in output metadata.
    pub fn describe(&self) -> String {
        match self {
            Symbol::Polynomial(ms) => {
                let terms: Vec<String> = ms
                    .iter()
                    .map(|m| {
                        let c = if m.coeff.im == 0.0 { format!("{}", m.coeff.re) } else { format!("({})", m.coeff) };
                        format!("{c}*x^{}*y^{}", m.px, m.py)
                    })
                    .collect();
                format!("poly[{}]", terms.join(" + "))
            }
            Symbol::Gaussian(g) => format!(
                "gauss[amp={}, c=({}, {}), s=({}, {})]",
                g.amp, g.cx, g.cy, g.sx, g.sy
            ),
            Symbol::Sum(parts) => {
                let d: Vec<String> = parts.iter().map(|p| p.describe()).collect();
                format!("sum[{}]", d.join(", "))
            }
            Symbol::Sampled(f) => {
                let g = f.grid();
                format!("sampled[{}x{}, L=({}, {})]", g.axis(0).points, g.axis(1).points, g.axis(0).half_extent, g.axis(1).half_extent)
            }
        }
    }
}
