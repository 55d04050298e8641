//! Harmonic-plus-noise engine synthesis.
//!
//! Signal flow per output channel:
//!
//! ```text
//! x      = additive bank (orders h, freq (h + dev_h) * rpm / 60, amp A_h)
//! turb   = x * (1 - alpha + alpha * pink)
//! s      = dry_mix * x + turbulence_mix * turb + burst_mix * burst
//! y      = s + sum_k g_k * y_k(t - tau_k)         (parallel feedback combs)
//! ```
//!
//! Left and right share `x` and `turb`; the burst noise uses independent
//! random streams per channel and the right channel's comb delays are offset
//! by `stereo_delay_offset_ms`.

mod harmonics;
mod noise;
mod resonator;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use harmonics::{synth_harmonics, HarmonicBank};
pub use noise::{
    synth_burst_noise, synth_pink_modulation, BurstFilter, BurstNoise, OnePoleLowpass, PinkNoise, PINK_ROWS,
};
pub use resonator::{synth_resonators, CombResonator, ResonatorBank};

use crate::error::{Error, Result};
use crate::signal::{AudioBuffer, ControlTrace, OUTPUT_RATE};
use crate::table::TimbreTable;

/// Orders whose oscillations shape the burst-noise envelope.
pub const BURST_ORDERS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

/// Peak level applied when a render would otherwise clip.
pub const NORMALIZE_PEAK_DBFS: f64 = -1.0;

const CLIP_LEVEL: f64 = 32_767.0 / 32_768.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BurstParams {
    /// Gain of the burst path in the mix.
    pub mix: f64,
    pub weights: [f64; 4],
    pub exponents: [f64; 4],
    /// Cutoff of each of the three one-pole low-pass sections.
    pub cutoff_hz: f64,
}

impl Default for BurstParams {
    fn default() -> Self {
        Self { mix: 0.05, weights: [0.25; 4], exponents: [4.0; 4], cutoff_hz: 2000.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorParams {
    pub delay_ms: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisParams {
    pub sample_rate: u32,
    pub seed: u64,
    pub master_gain: f64,
    /// Pink-noise modulation depth `alpha` in `[0, 1]`.
    pub pink_depth: f64,
    /// Gain of the unmodulated harmonic sum.
    pub dry_mix: f64,
    /// Gain of the pink-modulated harmonic sum.
    pub turbulence_mix: f64,
    pub burst: BurstParams,
    pub resonators: Vec<ResonatorParams>,
    pub stereo_delay_offset_ms: f64,
    /// Fade applied when a voice crosses Nyquist.
    pub mute_ramp_ms: f64,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            sample_rate: OUTPUT_RATE,
            seed: 0,
            master_gain: 1.0,
            pink_depth: 0.3,
            dry_mix: 0.0,
            turbulence_mix: 1.0,
            burst: BurstParams::default(),
            resonators: [(4.2, 0.55), (6.7, 0.45), (9.1, 0.40), (13.8, 0.30)]
                .into_iter()
                .map(|(delay_ms, gain)| ResonatorParams { delay_ms, gain })
                .collect(),
            stereo_delay_offset_ms: 0.3,
            mute_ramp_ms: 10.0,
        }
    }
}

impl SynthesisParams {
    /// Harmonics only: no noise, no resonators.
    pub fn dry() -> Self {
        Self {
            pink_depth: 0.0,
            burst: BurstParams { mix: 0.0, weights: [0.0; 4], ..BurstParams::default() },
            resonators: Vec::new(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fs = f64::from(self.sample_rate);
        if self.sample_rate == 0 {
            return Err(Error::parameter("sample_rate must be positive"));
        }
        if !(0.0..=1.0).contains(&self.pink_depth) {
            return Err(Error::parameter(format!("pink_depth {} outside [0, 1]", self.pink_depth)));
        }
        for (name, v) in [
            ("master_gain", self.master_gain),
            ("dry_mix", self.dry_mix),
            ("turbulence_mix", self.turbulence_mix),
            ("burst.mix", self.burst.mix),
        ] {
            if !v.is_finite() {
                return Err(Error::parameter(format!("{name} must be finite")));
            }
        }
        if self.burst.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::parameter("burst weights must be non-negative"));
        }
        if self.burst.exponents.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::parameter("burst exponents must be positive"));
        }
        if !(self.burst.cutoff_hz > 0.0 && self.burst.cutoff_hz < fs / 2.0) {
            return Err(Error::parameter(format!("burst cutoff {} Hz must lie in (0, fs/2)", self.burst.cutoff_hz)));
        }
        if !(self.stereo_delay_offset_ms.is_finite() && self.stereo_delay_offset_ms >= 0.0) {
            return Err(Error::parameter("stereo_delay_offset_ms must be non-negative"));
        }
        if !(self.mute_ramp_ms.is_finite() && self.mute_ramp_ms >= 0.0) {
            return Err(Error::parameter("mute_ramp_ms must be non-negative"));
        }
        for (k, r) in self.resonators.iter().enumerate() {
            if !(r.gain >= 0.0 && r.gain < 1.0) {
                return Err(Error::parameter(format!("resonator {k} gain {} must lie in [0, 1)", r.gain)));
            }
            if !(r.delay_ms.is_finite() && r.delay_ms * fs / 1000.0 >= 1.0) {
                return Err(Error::parameter(format!(
                    "resonator {k} delay {} ms is shorter than one sample",
                    r.delay_ms
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path.as_ref())?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    /// Short stable fingerprint of the parameter set (first 16 hex digits of SHA-256).
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("params serialize"));
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn delays_samples(&self, extra_ms: f64) -> Vec<(f64, f64)> {
        let fs = f64::from(self.sample_rate);
        self.resonators.iter().map(|r| ((r.delay_ms + extra_ms) * fs / 1000.0, r.gain)).collect()
    }
}

/// Independent random stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Everything a render mutates: oscillator phases, noise generators and
/// delay lines. One state drives one render at a time.
#[derive(Debug, Clone)]
pub struct SynthState {
    pub harmonics: HarmonicBank,
    pub pink: PinkNoise,
    pub burst: [BurstNoise; 2],
    pub resonators: [ResonatorBank; 2],
}

impl SynthState {
    pub fn new(params: &SynthesisParams, num_orders: usize) -> Result<Self> {
        params.validate()?;
        let fs = params.sample_rate;
        let burst = |stream| BurstNoise::new(fs, params.burst.cutoff_hz, rng_stream(params.seed, stream));
        Ok(Self {
            harmonics: HarmonicBank::new(num_orders, fs, params.mute_ramp_ms),
            pink: PinkNoise::new(rng_stream(params.seed, 0)),
            burst: [burst(1)?, burst(2)?],
            resonators: [
                ResonatorBank::new(&params.delays_samples(0.0))?,
                ResonatorBank::new(&params.delays_samples(params.stereo_delay_offset_ms))?,
            ],
        })
    }
}

/// A stereo render and the control trace it was rendered against.
#[derive(Debug, Clone)]
pub struct Render {
    pub audio: AudioBuffer,
    /// The control trace at the output rate, aligned sample for sample.
    pub trace: ControlTrace,
    /// Gain applied by peak normalization (1.0 when no clipping was possible).
    pub normalization_gain: f64,
}

pub fn synthesize(trace: &ControlTrace, table: &TimbreTable, params: &SynthesisParams) -> Result<Render> {
    let mut state = SynthState::new(params, table.num_orders())?;
    synthesize_with_state(trace, table, params, &mut state)
}

pub fn synthesize_with_state(
    trace: &ControlTrace,
    table: &TimbreTable,
    params: &SynthesisParams,
    state: &mut SynthState,
) -> Result<Render> {
    params.validate()?;
    let trace = trace.resample_linear(params.sample_rate)?;

    let harmonic = synth_harmonics(&trace, table, &mut state.harmonics)?;
    let turbulence = synth_pink_modulation(&harmonic, params.pink_depth, &mut state.pink)?;
    let core: Vec<f64> = harmonic
        .iter()
        .zip(&turbulence)
        .map(|(&x, &t)| {
            if params.dry_mix == 0.0 {
                params.turbulence_mix * t
            } else {
                params.dry_mix * x + params.turbulence_mix * t
            }
        })
        .collect();

    let mut channels = Vec::with_capacity(2);
    for ch in 0..2 {
        let burst = synth_burst_noise(&trace, &params.burst, &mut state.burst[ch])?;
        let source: Vec<f64> = core.iter().zip(&burst).map(|(&c, &b)| c + params.burst.mix * b).collect();
        let mut out = synth_resonators(&source, &mut state.resonators[ch]);
        if params.master_gain != 1.0 {
            out.iter_mut().for_each(|v| *v *= params.master_gain);
        }
        channels.push(out);
    }

    let peak = channels.iter().flatten().fold(0.0_f64, |m, &v| m.max(v.abs()));
    if !peak.is_finite() {
        return Err(Error::parameter("render diverged"));
    }
    let mut normalization_gain = 1.0;
    if peak > CLIP_LEVEL {
        normalization_gain = 10f64.powf(NORMALIZE_PEAK_DBFS / 20.0) / peak;
        channels.iter_mut().flatten().for_each(|v| *v *= normalization_gain);
    }
    Ok(Render { audio: AudioBuffer::new(params.sample_rate, channels)?, trace, normalization_gain })
}
