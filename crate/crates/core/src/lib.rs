//! Fuzzy emotion-level estimation from keyboard, mouse and touch behaviour.

pub mod classifier;
pub mod cooccurrence;
pub mod emotion;
pub mod features;
pub mod fuzzy;
pub mod model_io;
pub mod rng;
pub mod dataset;
pub mod evaluation;
pub mod io;
pub mod reference;
pub mod synth;
pub mod pipeline;
