//! Statevector simulation and integrated-gradients input attribution for
//! parameterized quantum classifiers.
//!
//! The crate is organized around a dense statevector simulator
//! ([`statevector`]), feature encoders ([`encoding`]), a hardware-efficient
//! classifier model ([`model`]), four gradient backends ([`gradient`]),
//! integrated-gradients attribution ([`attribution`]), dataset tooling
//! ([`datasets`]) and a training loop ([`trainer`]).
//!
//! All stochastic operations take explicit seeds and are bit-reproducible;
//! see [`rng`] for the seed-derivation scheme.

pub mod attribution;
pub mod datasets;
pub mod encoding;
pub mod gradient;
pub mod model;
pub mod rng;
pub mod statevector;
pub mod trainer;

pub use attribution::{AttributionConfig, AttributionMap, AttributionSpace};
pub use encoding::{EncodedInput, EncodingMode, FitPolicy};
pub use gradient::{GradientMethod, GradientVector, Shots};
pub use model::{Activation, AnsatzSpec, ObservableSpec, QuantumModel};
pub use statevector::{Circuit, Control, Gate, GateKind, StateVector};
