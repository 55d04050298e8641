//! Control annotations carried as audio channels.
//!
//! A dataset file is a 4-channel 16-bit WAV:
//!
//! | channel | content                                   |
//! |---------|-------------------------------------------|
//! | 1, 2    | engine audio, left and right              |
//! | 3       | RPM, `code = round(rpm / 10000 * 32767)`  |
//! | 4       | torque, `code = round(nm / 1000 * 32767)` |
//!
//! Codes are signed 16-bit sample words in `[-32767, 32767]`; decoding is
//! `value = code / 32767 * bound`. Rounding is to nearest, halves away from
//! zero. Control sample `n` describes audio sample `n`.

use crate::error::{Error, Result};
use crate::signal::{AudioBuffer, ControlTrace};
use crate::wav::{from_pcm16, to_pcm16};

pub const RPM_BOUND: f64 = 10_000.0;
pub const TORQUE_BOUND: f64 = 1_000.0;
pub const CODE_MAX: i16 = i16::MAX;

pub const RPM_CHANNEL: usize = 2;
pub const TORQUE_CHANNEL: usize = 3;

/// Quantization step of a channel with the given bound.
pub fn step(bound: f64) -> f64 {
    bound / f64::from(CODE_MAX)
}

pub fn encode_value(value: f64, lo: f64, bound: f64) -> Result<i16> {
    if !(value >= lo && value <= bound) {
        return Err(Error::Range(format!("{value} outside [{lo}, {bound}]")));
    }
    // |value / bound| <= 1, so the rounded code fits
    Ok((value / bound * f64::from(CODE_MAX)).round() as i16)
}

pub fn decode_value(code: i16, bound: f64) -> f64 {
    f64::from(code) / f64::from(CODE_MAX) * bound
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedControls {
    pub rpm: Vec<i16>,
    pub torque: Vec<i16>,
}

impl EncodedControls {
    /// The two code streams as audio sample values (`code / 32768`).
    pub fn to_channels(&self) -> [Vec<f64>; 2] {
        [self.rpm.iter().map(|&c| from_pcm16(c)).collect(), self.torque.iter().map(|&c| from_pcm16(c)).collect()]
    }
}

pub fn encode_controls(trace: &ControlTrace) -> Result<EncodedControls> {
    let rpm = trace
        .rpm()
        .iter()
        .enumerate()
        .map(|(i, &v)| encode_value(v, 0.0, RPM_BOUND).map_err(|e| Error::Range(format!("rpm at sample {i}: {e}"))))
        .collect::<Result<_>>()?;
    let torque = trace
        .torque()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            encode_value(v, -TORQUE_BOUND, TORQUE_BOUND).map_err(|e| Error::Range(format!("torque at sample {i}: {e}")))
        })
        .collect::<Result<_>>()?;
    Ok(EncodedControls { rpm, torque })
}

pub fn decode_codes(codes: &EncodedControls, sample_rate: u32) -> Result<ControlTrace> {
    ControlTrace::new(
        sample_rate,
        codes.rpm.iter().map(|&c| decode_value(c, RPM_BOUND)).collect(),
        codes.torque.iter().map(|&c| decode_value(c, TORQUE_BOUND)).collect(),
    )
}

/// Decode channels 3 and 4 of a 4-channel buffer.
pub fn decode_controls(buffer: &AudioBuffer) -> Result<ControlTrace> {
    if buffer.num_channels() != 4 {
        return Err(Error::format(format!("expected 4 channels, found {}", buffer.num_channels())));
    }
    let words = |ch: usize| buffer.channel(ch).iter().map(|&x| to_pcm16(x)).collect();
    decode_codes(&EncodedControls { rpm: words(RPM_CHANNEL), torque: words(TORQUE_CHANNEL) }, buffer.sample_rate())
}

/// Stereo audio plus encoded controls as one 4-channel buffer.
pub fn mux(audio: &AudioBuffer, trace: &ControlTrace) -> Result<AudioBuffer> {
    if audio.num_channels() != 2 {
        return Err(Error::input(format!("expected stereo audio, found {} channels", audio.num_channels())));
    }
    if audio.len() != trace.len() || audio.sample_rate() != trace.sample_rate() {
        return Err(Error::input(format!(
            "audio ({} samples at {} Hz) and trace ({} samples at {} Hz) are not aligned",
            audio.len(),
            audio.sample_rate(),
            trace.len(),
            trace.sample_rate()
        )));
    }
    let [rpm, torque] = encode_controls(trace)?.to_channels();
    let mut channels = audio.channels().to_vec();
    channels.push(rpm);
    channels.push(torque);
    AudioBuffer::new(audio.sample_rate(), channels)
}

pub fn demux(buffer: &AudioBuffer) -> Result<(AudioBuffer, ControlTrace)> {
    let trace = decode_controls(buffer)?;
    let audio = AudioBuffer::new(buffer.sample_rate(), buffer.channels()[..2].to_vec())?;
    Ok((audio, trace))
}
