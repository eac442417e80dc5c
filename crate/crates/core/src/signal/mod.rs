//! FTN discrete-time signal model.
//!
//! Pulse shaping, ISI taps and Gram matrix, the minimum-phase whitening
//! factor, symbol alphabets and the two receive paths (colored and whitened).

pub mod channel;
pub mod constellation;
pub mod factor;
pub mod isi;
pub mod pulse;

pub use channel::{amplitude, simulate_block, ReceivedBlock};
pub use constellation::{demap_symbols, map_symbols, Constellation, SymbolVector};
pub use factor::{spectral_factorize, SpectralFactor};
pub use isi::{build_isi_model, IsiModel};
pub use pulse::{rrc_pulse, RrcPulse};
