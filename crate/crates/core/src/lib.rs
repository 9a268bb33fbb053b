//! Digit-level arithmetic in four number systems: plain binary (BNS), residue
//! (RNS) over the moduli set `{2^n - 1, 2^n, 2^n + 1}`, signed-digit redundant
//! binary (SD), and signed-digit residue (SD-RNS).
//!
//! Alongside the functional arithmetic, [`cost`] provides a critical-path delay
//! model for comparing the four systems on a workload of `x` additions and `y`
//! multiplications, and [`workload`] derives such workloads from small
//! convolutional network descriptions.
//!
//! Exhaustive and randomized self-checks live in [`verify`]. They run on rayon
//! when the `parallel` feature (on by default) is enabled and fall back to a
//! sequential loop otherwise; see [`exec::Execution`].

pub mod cost;
pub mod error;
pub mod exec;
pub mod numeral;
pub mod rns;
pub mod sd;
pub mod sdrns;
pub mod sweep;
pub mod verify;
pub mod workload;

pub use error::{Error, Result};
pub use numeral::{ModuliSet, ResidueTuple, SdResidueTuple, SdVector};
