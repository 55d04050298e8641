//! Engine-order analysis and procedural engine sound synthesis.
//!
//! The crate covers the whole analysis / synthesis / annotation pipeline:
//!
//! * [`signal`] and [`wav`]: audio and control-trace containers, frame
//!   segmentation and 16-bit PCM WAV I/O.
//! * [`repitch`]: RPM-driven cubic-spline time warping that holds the
//!   fundamental constant across a frame.
//! * [`analysis`]: frequency-aligned FFT sizing and centroid-based tracking of
//!   128 half-integer engine orders.
//! * [`table`]: (RPM, torque)-indexed timbre tables with bilinear lookup.
//! * [`synth`]: 128-voice additive bank, pink/burst noise and comb resonators.
//! * [`codec`]: RPM/torque annotation channels of the 4-channel interchange
//!   format.
//! * [`dataset`]: plan-driven batch generation and order-distribution maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= lo)` rejects NaN as well

pub mod analysis;
pub mod codec;
pub mod dataset;
pub mod error;
pub mod repitch;
pub mod signal;
pub mod synth;
pub mod table;
pub mod tracefile;
pub mod wav;

pub use analysis::{analyze_frame, AnalysisConfig, OrderAnalyzer, OrderEstimate, OrderFrameResult};
pub use codec::{decode_controls, demux, encode_controls, mux};
pub use error::{Error, ErrorClass, Result};
pub use signal::{segment_frames, AudioBuffer, ControlTrace, FrameSpec};
pub use synth::{synthesize, SynthesisParams};
pub use table::{TableGrid, TimbreTable};
