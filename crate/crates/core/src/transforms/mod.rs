//! Time-frequency and phase-space transforms for one degree of freedom.

mod stft;
mod wavepacket;
mod wigner;

use serde::{Deserialize, Serialize};

use crate::error::{LwError, Result};
use crate::grid::SampledFunction;

pub(crate) use stft::default_check_axes;
pub use stft::{
    metaplectic_dilation, metaplectic_fourier, modulation_norm, rescaled_stft_identity_check,
    rescaled_stft_identity_residual, stft, stft_points, stft_wigner_relation_check,
    stft_wigner_relation_residual, ModulationNorm, RelationCheck,
};
pub use wavepacket::{
    projection, wavepacket, wavepacket_adjoint, wavepacket_adjoint_scaled, wavepacket_inverse,
    wavepacket_variant, WavepacketVariant,
};
pub use wigner::{cross_wigner, grossmann_royer, wigner_at};

/// A window: an L²-normalized function used by STFT and wavepacket transforms.
#[derive(Clone, Debug)]
pub struct Window {
    func: SampledFunction,
    norm_check: f64,
}

impl Window {
    pub fn new(func: SampledFunction) -> Result<Self> {
        func.grid().ensure_dim(1)?;
        let norm = func.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(LwError::InvalidParameter(format!("window norm is {norm}, expected 1")));
        }
        Ok(Window { func, norm_check: norm })
    }

    /// Rescales to unit norm before wrapping.
    pub fn normalized(func: SampledFunction) -> Result<Self> {
        let norm = func.norm();
        if norm == 0.0 {
            return Err(LwError::InvalidParameter("zero window".into()));
        }
        Window::new(func.scaled((1.0 / norm).into()))
    }

    pub fn func(&self) -> &SampledFunction {
        &self.func
    }

    pub fn norm_check(&self) -> f64 {
        self.norm_check
    }
}

/// Which STFT kernel is in use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum StftConvention {
    /// e^{(i/2ħ)y₀x₀} ∫ e^{(i/ħ)y₀x} ψ(x) conj(φ(x − x₀)) dx
    Hbar,
    /// ∫ e^{2πi y₀x} ψ(x) conj(φ(x − x₀)) dx
    Tf,
}

impl StftConvention {
    pub fn tag(&self) -> &'static str {
        match self {
            StftConvention::Hbar => "HBAR",
            StftConvention::Tf => "TF",
        }
    }
}

/// The pair (γ, μ) of the quantization family, γμ ≠ 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub gamma: f64,
    pub mu: f64,
}

impl ScalingParams {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        if !(gamma.is_finite() && mu.is_finite()) || gamma * mu == 0.0 {
            return Err(LwError::InvalidParameter(format!(
                "scaling needs finite gamma*mu != 0, got ({gamma}, {mu})"
            )));
        }
        Ok(ScalingParams { gamma, mu })
    }

    pub fn unit() -> Self {
        ScalingParams { gamma: 1.0, mu: 1.0 }
    }

    pub fn product(&self) -> f64 {
        self.gamma * self.mu
    }
}
