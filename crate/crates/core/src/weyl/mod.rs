//! Weyl calculus for one degree of freedom: symbols, quantization, covariant symbols,
//! twisted convolution and the Moyal product.

mod quantize;
mod star;
mod symbol;

pub use quantize::{heisenberg_weyl, weyl_quantize, weyl_trace, OperatorMatrix, MATRIX_NODE_LIMIT};
pub(crate) use quantize::{weyl_apply_2d, weyl_assemble_2d};
pub(crate) use star::twisted_apply;
pub use star::{compose_symbols, moyal_star, symplectic_fourier, symplectic_fourier_sampled, twisted_convolution};
pub use symbol::{GaussianSymbol, Monomial, Symbol};
