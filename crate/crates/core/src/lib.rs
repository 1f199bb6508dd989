//! Coherent and incoherent contributions to the ergotropy of quantum states.
//!
//! The crate splits the maximal unitarily extractable work of a state into
//! the part reachable by reshuffling energy populations and the part that
//! needs energy-basis coherence, together with the relative-entropy bounds
//! that relate the coherent part to the relative entropy of coherence.

pub mod bosonic;
pub mod channels;
pub mod coherence;
pub mod error;
pub mod ergotropy;
pub mod experiments;
pub mod qmat;
pub mod states;

pub use error::{Error, Result};
