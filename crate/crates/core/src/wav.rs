//! 16-bit PCM RIFF/WAVE input and output.
//!
//! Samples are mapped to floating point by dividing the signed 16-bit word by
//! 32768, and back by multiplying, rounding and saturating. A read followed by
//! a write therefore reproduces every integer sample word exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::AudioBuffer;

pub const BITS_PER_SAMPLE: u16 = 16;
const SCALE: f64 = 32_768.0;

/// Quantizes a sample to the signed 16-bit word written to disk.
pub fn to_pcm16(x: f64) -> i16 {
    (x * SCALE).round().clamp(-32_768.0, 32_767.0) as i16
}

pub fn from_pcm16(word: i16) -> f64 {
    f64::from(word) / SCALE
}

/// Size of the PCM payload (excluding headers) for a 16-bit file.
pub fn pcm16_data_bytes(samples_per_channel: u64, channels: u16) -> u64 {
    samples_per_channel * u64::from(channels) * u64::from(BITS_PER_SAMPLE / 8)
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        other => Error::format(other.to_string()),
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let file = File::open(path.as_ref())?;
    read_wav_from(BufReader::new(file))
}

pub fn read_wav_from<R: Read>(reader: R) -> Result<AudioBuffer> {
    let reader = hound::WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != BITS_PER_SAMPLE {
        return Err(Error::format(format!(
            "unsupported sample format: {:?} {}-bit (expected 16-bit PCM)",
            spec.sample_format, spec.bits_per_sample
        )));
    }
    let channels = usize::from(spec.channels);
    if channels == 0 || channels > AudioBuffer::MAX_CHANNELS {
        return Err(Error::format(format!("unsupported channel count {channels}")));
    }
    let frames = reader.duration() as usize;
    let mut data = vec![Vec::with_capacity(frames); channels];
    for (i, sample) in reader.into_samples::<i16>().enumerate() {
        data[i % channels].push(from_pcm16(sample.map_err(map_hound)?));
    }
    if data.iter().any(|c| c.len() != data[0].len()) {
        return Err(Error::format("truncated sample frame"));
    }
    AudioBuffer::new(spec.sample_rate, data).map_err(|e| Error::format(e.to_string()))
}

pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut writer = BufWriter::new(file);
    write_wav_to(&mut writer, audio)?;
    writer.flush()?;
    Ok(())
}

pub fn write_wav_to<W: Write + Seek>(writer: W, audio: &AudioBuffer) -> Result<()> {
    let spec = hound::WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: BITS_PER_SAMPLE,
        sample_format: hound::SampleFormat::Int,
    };
    let mut wav = hound::WavWriter::new(writer, spec).map_err(map_hound)?;
    {
        let mut words = wav.get_i16_writer((audio.len() * audio.num_channels()) as u32);
        for i in 0..audio.len() {
            for ch in audio.channels() {
                words.write_sample(to_pcm16(ch[i]));
            }
        }
        words.flush().map_err(map_hound)?;
    }
    wav.finalize().map_err(map_hound)
}

/// Encodes `audio` into an in-memory WAV file.
pub fn to_bytes(audio: &AudioBuffer) -> Result<Vec<u8>> {
    let mut cursor = std::io::Cursor::new(Vec::new());
    write_wav_to(&mut cursor, audio)?;
    Ok(cursor.into_inner())
}

/// Header fields of a WAV file, without decoding its samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub channels: u16,
    pub sample_rate: u32,
    pub bits_per_sample: u16,
    pub samples_per_channel: u32,
}

pub fn probe_wav(path: impl AsRef<Path>) -> Result<WavInfo> {
    let reader = hound::WavReader::open(path.as_ref()).map_err(map_hound)?;
    let spec = reader.spec();
    Ok(WavInfo {
        channels: spec.channels,
        sample_rate: spec.sample_rate,
        bits_per_sample: spec.bits_per_sample,
        samples_per_channel: reader.duration(),
    })
}
