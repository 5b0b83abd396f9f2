//! Protocol representations and exact evaluation.
//!
//! Inputs are points of `{-1,1}^n` encoded as bitmasks (see
//! [`crate::hyperfourier`]), so the pointwise product `x ⊙ z` is `x ^ z`.

mod fiber;
mod growth;
mod one_way;
pub mod serial;
mod smp;
mod two_way;

pub use fiber::{xor_fiber, XorFiberTable};
pub use growth::{fourier_growth_report, GrowthReport, GrowthRow, ProtocolRef};
pub use one_way::{random_one_way, OneWayEntangledProtocol};
pub(crate) use smp::check_effect;
pub use smp::{eval_smp, random_smp, SmpQuantumProtocol};
pub use two_way::{
    compile_two_way, eval_two_way, monte_carlo_transcript, random_two_way, CompiledTwoWay,
    transcript_distribution, TranscriptHistogram, TwoWayEntangledProtocol,
};

use crate::error::Result;

/// Anything with a well-defined expected `±1` output on each input pair.
pub trait Protocol: Sync {
    fn n(&self) -> usize;
    fn expected_output(&self, x: usize, y: usize) -> Result<f64>;
}

/// A protocol given directly by its expected-output function.
pub struct FnProtocol<F> {
    n: usize,
    f: F,
}

impl<F: Fn(usize, usize) -> f64 + Sync> FnProtocol<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(usize, usize) -> f64 + Sync> Protocol for FnProtocol<F> {
    fn n(&self) -> usize {
        self.n
    }

    fn expected_output(&self, x: usize, y: usize) -> Result<f64> {
        Ok((self.f)(x, y))
    }
}
