//! Audio and control-trace containers plus analysis frame segmentation.

use std::ops::Range;

use crate::error::{Error, Result};

/// Sample rate of the analysis pipeline.
pub const ANALYSIS_RATE: u32 = 16_000;
/// Sample rate of synthesized, annotated output.
pub const OUTPUT_RATE: u32 = 48_000;

/// Frames with any sample below this RPM count as "engine off".
pub const ZERO_RPM_THRESHOLD: f64 = 1.0;

/// Multi-channel audio with per-channel sample vectors in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
}

impl AudioBuffer {
    pub const MAX_CHANNELS: usize = 4;

    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::input("sample rate must be positive"));
        }
        if channels.is_empty() || channels.len() > Self::MAX_CHANNELS {
            return Err(Error::input(format!("expected 1 to {} channels, got {}", Self::MAX_CHANNELS, channels.len())));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::input("all channels must have equal length"));
        }
        Ok(Self { sample_rate, channels })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Average of all channels.
    pub fn downmix(&self) -> Vec<f64> {
        if self.channels.len() == 1 {
            return self.channels[0].clone();
        }
        let scale = 1.0 / self.channels.len() as f64;
        (0..self.len()).map(|i| self.channels.iter().map(|c| c[i]).sum::<f64>() * scale).collect()
    }

    pub fn slice(&self, range: Range<usize>) -> AudioBuffer {
        AudioBuffer {
            sample_rate: self.sample_rate,
            channels: self.channels.iter().map(|c| c[range.clone()].to_vec()).collect(),
        }
    }

    pub fn peak(&self) -> f64 {
        self.channels.iter().flat_map(|c| c.iter()).fold(0.0_f64, |m, &x| m.max(x.abs()))
    }
}

/// RPM and torque envelopes sampled at an audio rate.
///
/// Construction only enforces equal lengths and finite values; the fixed
/// annotation bounds are checked by [`crate::codec`] when encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrace {
    sample_rate: u32,
    rpm: Vec<f64>,
    torque: Vec<f64>,
}

impl ControlTrace {
    pub fn new(sample_rate: u32, rpm: Vec<f64>, torque: Vec<f64>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::input("sample rate must be positive"));
        }
        if rpm.len() != torque.len() {
            return Err(Error::input(format!("rpm and torque lengths differ ({} vs {})", rpm.len(), torque.len())));
        }
        if rpm.iter().chain(torque.iter()).any(|v| !v.is_finite()) {
            return Err(Error::input("control trace contains non-finite values"));
        }
        Ok(Self { sample_rate, rpm, torque })
    }

    /// A trace holding both controls fixed for `len` samples.
    pub fn constant(sample_rate: u32, len: usize, rpm: f64, torque: f64) -> Result<Self> {
        Self::new(sample_rate, vec![rpm; len], vec![torque; len])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.rpm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rpm.is_empty()
    }

    pub fn rpm(&self) -> &[f64] {
        &self.rpm
    }

    pub fn torque(&self) -> &[f64] {
        &self.torque
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn mean_rpm(&self) -> f64 {
        mean(&self.rpm)
    }

    pub fn mean_torque(&self) -> f64 {
        mean(&self.torque)
    }

    pub fn slice(&self, range: Range<usize>) -> ControlTrace {
        ControlTrace {
            sample_rate: self.sample_rate,
            rpm: self.rpm[range.clone()].to_vec(),
            torque: self.torque[range].to_vec(),
        }
    }

    /// Linearly interpolates both envelopes onto `sample_rate`.
    ///
    /// The output covers the same time span: `floor((len - 1) * ratio) + 1`
    /// samples, so the last output sample never extrapolates.
    pub fn resample_linear(&self, sample_rate: u32) -> Result<ControlTrace> {
        if sample_rate == 0 {
            return Err(Error::input("sample rate must be positive"));
        }
        if sample_rate == self.sample_rate || self.len() < 2 {
            return Ok(ControlTrace { sample_rate, ..self.clone() });
        }
        let step = f64::from(self.sample_rate) / f64::from(sample_rate);
        let last = (self.len() - 1) as f64;
        let out_len = resampled_len(self.len(), self.sample_rate, sample_rate);
        let interp = |src: &[f64]| -> Vec<f64> {
            (0..out_len)
                .map(|n| {
                    let pos = (n as f64 * step).min(last);
                    let i = (pos.floor() as usize).min(src.len() - 2);
                    let frac = pos - i as f64;
                    src[i] + (src[i + 1] - src[i]) * frac
                })
                .collect()
        };
        Ok(ControlTrace { sample_rate, rpm: interp(&self.rpm), torque: interp(&self.torque) })
    }
}

/// Length of a `len`-sample trace after [`ControlTrace::resample_linear`].
pub fn resampled_len(len: usize, from_rate: u32, to_rate: u32) -> usize {
    if from_rate == to_rate || len < 2 || to_rate == 0 {
        return len;
    }
    let step = f64::from(from_rate) / f64::from(to_rate);
    ((len - 1) as f64 / step).floor() as usize + 1
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    pub frame_length: usize,
    pub analysis_rate: u32,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self { frame_length: 65_536, analysis_rate: ANALYSIS_RATE }
    }
}

impl FrameSpec {
    pub fn new(frame_length: usize, analysis_rate: u32) -> Result<Self> {
        if frame_length == 0 || analysis_rate == 0 {
            return Err(Error::parameter("frame length and analysis rate must be positive"));
        }
        Ok(Self { frame_length, analysis_rate })
    }

    /// Same frame duration as `self`, expressed at another sample rate.
    pub fn at_rate(&self, sample_rate: u32) -> FrameSpec {
        let len = (self.duration_secs() * f64::from(sample_rate)).round() as usize;
        FrameSpec { frame_length: len.max(1), analysis_rate: sample_rate }
    }

    pub fn duration_secs(&self) -> f64 {
        self.frame_length as f64 / f64::from(self.analysis_rate)
    }

    /// Contiguous, non-overlapping frame ranges; a trailing partial frame is dropped.
    pub fn frame_ranges(&self, total: usize) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..total / self.frame_length).map(move |i| i * self.frame_length..(i + 1) * self.frame_length)
    }
}

#[derive(Debug, Clone)]
pub struct Frame {
    /// Position of the frame in the contiguous frame sequence.
    pub index: usize,
    pub audio: AudioBuffer,
    pub trace: ControlTrace,
}

/// Cuts `audio` and `trace` into analysis frames, dropping engine-off frames.
pub fn segment_frames(audio: &AudioBuffer, trace: &ControlTrace, spec: &FrameSpec) -> Result<Vec<Frame>> {
    if audio.len() != trace.len() {
        return Err(Error::input(format!("audio has {} samples but trace has {}", audio.len(), trace.len())));
    }
    if audio.sample_rate() != trace.sample_rate() {
        return Err(Error::input(format!(
            "audio rate {} Hz differs from trace rate {} Hz",
            audio.sample_rate(),
            trace.sample_rate()
        )));
    }
    Ok(spec
        .frame_ranges(audio.len())
        .enumerate()
        .filter(|(_, r)| trace.rpm()[r.clone()].iter().all(|&v| v >= ZERO_RPM_THRESHOLD))
        .map(|(index, r)| Frame { index, audio: audio.slice(r.clone()), trace: trace.slice(r) })
        .collect())
}
