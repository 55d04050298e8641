//! Frequency-aligned order analysis.
//!
//! For a frame whose fundamental `f0` has been held constant by
//! [`crate::repitch`], the analysis window spans `P` fundamental periods and is
//! zero-padded by `p`, which puts order `h` at bin `h * P * p`. Each order is
//! then located by a magnitude-weighted centroid inside the region bounded by
//! the midpoints to its neighbouring orders, and its amplitude is read off the
//! spectrum by log-parabolic interpolation around that centroid.

use std::f64::consts::PI;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::repitch;
use crate::signal::{segment_frames, AudioBuffer, ControlTrace, FrameSpec, ANALYSIS_RATE};

/// Number of tracked orders (0.5 to 64 in half-order steps).
pub const NUM_ORDERS: usize = 128;

/// Denominators of the centroid below this are treated as an empty region.
pub const CENTROID_EPSILON: f64 = 1e-12;

const MAX_REFINEMENTS: usize = 16;

/// The default order set `{0.5, 1.0, ..., 64.0}`.
pub fn default_orders() -> Vec<f64> {
    (1..=NUM_ORDERS).map(|i| i as f64 * 0.5).collect()
}

/// Taper applied to the time-domain window before the zero-padded FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisWindow {
    Rectangular,
    #[default]
    BlackmanHarris,
}

impl AnalysisWindow {
    /// Distance from the peak to the first null, in unpadded bins.
    pub fn main_lobe_half_width(self) -> f64 {
        match self {
            AnalysisWindow::Rectangular => f64::INFINITY,
            AnalysisWindow::BlackmanHarris => 4.0,
        }
    }

    fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            AnalysisWindow::Rectangular => vec![1.0; len],
            AnalysisWindow::BlackmanHarris => {
                const A: [f64; 4] = [0.358_75, 0.488_29, 0.141_28, 0.011_68];
                (0..len)
                    .map(|n| {
                        let x = 2.0 * PI * n as f64 / len as f64;
                        A[0] - A[1] * x.cos() + A[2] * (2.0 * x).cos() - A[3] * (3.0 * x).cos()
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Fundamental periods per analysis window (`P`).
    pub periods: u32,
    /// Zero-padding factor (`p`).
    pub padding: u32,
    pub sample_rate: f64,
    pub orders: Vec<f64>,
    /// Tukey taper fraction of the per-order centroid weighting.
    pub taper: f64,
    pub window: AnalysisWindow,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            periods: 20,
            padding: 4,
            sample_rate: f64::from(ANALYSIS_RATE),
            orders: default_orders(),
            taper: 0.5,
            window: AnalysisWindow::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn with_sample_rate(mut self, sample_rate: f64) -> Self {
        self.sample_rate = sample_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.periods == 0 || self.padding == 0 {
            return Err(Error::parameter("periods and padding must be at least 1"));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::parameter("sample rate must be positive"));
        }
        if self.orders.is_empty() || self.orders[0] <= 0.0 {
            return Err(Error::parameter("orders must be non-empty and positive"));
        }
        if self.orders.windows(2).any(|w| (w[1] - w[0] - 0.5).abs() > 1e-12) {
            return Err(Error::parameter("orders must increase in steps of 0.5"));
        }
        if !(0.0..=1.0).contains(&self.taper) {
            return Err(Error::parameter("taper fraction must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Nominal bin of order 1, `P * p`.
    pub fn nominal_order1_bin(&self) -> u64 {
        u64::from(self.periods) * u64::from(self.padding)
    }
}

/// Analysis window length `M = floor(fs / f0 * P)`.
pub fn window_length(f0: f64, cfg: &AnalysisConfig) -> Result<usize> {
    if !(f0 > 0.0 && f0.is_finite()) {
        return Err(Error::Domain(format!("fundamental must be positive, got {f0}")));
    }
    // the relative nudge absorbs rounding in f0 = rpm / 60 at exact multiples
    let m = (cfg.sample_rate / f0 * f64::from(cfg.periods) * (1.0 + 1e-12)).floor();
    if m < 1.0 {
        return Err(Error::Domain(format!("fundamental {f0} Hz yields an empty window")));
    }
    Ok(m as usize)
}

/// Zero-padded FFT length `N = M * p`.
pub fn fft_size(window_len: usize, cfg: &AnalysisConfig) -> usize {
    window_len * cfg.padding as usize
}

/// Bin geometry of one analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FftLayout {
    pub window_len: usize,
    pub fft_len: usize,
    /// Bin spacing in Hz.
    pub bin_spacing: f64,
    /// Nominal order-1 bin `P * p`.
    pub nominal_order1_bin: u64,
    /// Exact fractional bin of `f0`, `f0 * N / fs`; differs from the nominal
    /// bin only through the floor in the window length.
    pub order1_bin: f64,
}

impl FftLayout {
    pub fn new(f0: f64, cfg: &AnalysisConfig) -> Result<Self> {
        let window_len = window_length(f0, cfg)?;
        let fft_len = fft_size(window_len, cfg);
        Ok(Self {
            window_len,
            fft_len,
            bin_spacing: cfg.sample_rate / fft_len as f64,
            nominal_order1_bin: cfg.nominal_order1_bin(),
            order1_bin: f0 * fft_len as f64 / cfg.sample_rate,
        })
    }

    /// Nominal bin of order `h`, `h * P * p`.
    pub fn nominal_bin(&self, order: f64) -> f64 {
        order * self.nominal_order1_bin as f64
    }

    pub fn misalignment(&self) -> f64 {
        self.order1_bin - self.nominal_order1_bin as f64
    }

    /// Highest usable bin (Nyquist).
    pub fn nyquist_bin(&self) -> usize {
        self.fft_len / 2
    }
}

/// Weighted centroid `sum k M[k] w[k] / sum M[k] w[k]` over bins
/// `first_bin..first_bin + magnitudes.len()`.
///
/// Returns `fallback` when the weighted magnitude sum is below
/// [`CENTROID_EPSILON`].
pub fn centroid(first_bin: usize, magnitudes: &[f64], weights: &[f64], fallback: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (&m, &w)) in magnitudes.iter().zip(weights).enumerate() {
        let mw = m * w;
        num += (first_bin + i) as f64 * mw;
        den += mw;
    }
    if den < CENTROID_EPSILON {
        fallback
    } else {
        num / den
    }
}

/// Tukey window evaluated at relative position `x` in `[0, 1]`: unity in the
/// middle, raised-cosine tapers of total fraction `taper`, zero at both edges.
pub fn tukey(x: f64, taper: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    if taper <= 0.0 {
        return 1.0;
    }
    let half = taper / 2.0;
    if x < half {
        0.5 * (1.0 - (PI * x / half).cos())
    } else if x > 1.0 - half {
        0.5 * (1.0 - (PI * (1.0 - x) / half).cos())
    } else {
        1.0
    }
}

/// Magnitude at a peak near bin `k` by three-point parabolic interpolation of
/// log magnitudes. Falls back to `spectrum[k]` when `k` is not a local maximum
/// or a neighbour is missing or zero.
pub fn parabolic_magnitude(spectrum: &[f64], k: usize) -> f64 {
    let center = spectrum[k];
    if k == 0 || k + 1 >= spectrum.len() {
        return center;
    }
    let (left, right) = (spectrum[k - 1], spectrum[k + 1]);
    if left <= 0.0 || right <= 0.0 || center <= 0.0 || left > center || right > center {
        return center;
    }
    let (a, b, g) = (left.ln(), center.ln(), right.ln());
    let curvature = a - 2.0 * b + g;
    if curvature >= 0.0 {
        return center;
    }
    let offset = 0.5 * (a - g) / curvature;
    (b - 0.25 * (a - g) * offset).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub order: f64,
    /// Detected position minus the ideal order, in order units (positive = sharp).
    pub deviation: f64,
    /// Linear amplitude of the partial.
    pub magnitude: f64,
    /// False when the order's region extends past Nyquist; deviation and
    /// magnitude are then zero.
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFrameResult {
    pub rpm_mean: f64,
    pub torque_mean: f64,
    /// Exact fractional order-1 bin used for the deviations.
    pub order1_bin: f64,
    /// `order1_bin - P * p`.
    pub bin_misalignment: f64,
    pub orders: Vec<OrderEstimate>,
}

impl OrderFrameResult {
    pub fn deviations(&self) -> impl Iterator<Item = f64> + '_ {
        self.orders.iter().map(|o| o.deviation)
    }

    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.orders.iter().map(|o| o.magnitude)
    }
}

/// Stateful analyzer that keeps FFT plans across frames.
pub struct OrderAnalyzer {
    cfg: AnalysisConfig,
    planner: FftPlanner<f64>,
    plan: Option<(usize, Arc<dyn Fft<f64>>)>,
    buffer: Vec<Complex<f64>>,
}

impl std::fmt::Debug for OrderAnalyzer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OrderAnalyzer").field("cfg", &self.cfg).finish_non_exhaustive()
    }
}

impl OrderAnalyzer {
    pub fn new(cfg: AnalysisConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, planner: FftPlanner::new(), plan: None, buffer: Vec::new() })
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.cfg
    }

    /// Single-sided amplitude spectrum of the first `M` samples, scaled so a
    /// bin-centred sinusoid of amplitude `A` reads `A`.
    pub fn spectrum(&mut self, frame: &[f64], layout: &FftLayout) -> Vec<f64> {
        let n = layout.fft_len;
        let fft = match &self.plan {
            Some((len, fft)) if *len == n => Arc::clone(fft),
            _ => {
                let fft = self.planner.plan_fft_forward(n);
                self.plan = Some((n, Arc::clone(&fft)));
                fft
            }
        };
        let window = self.cfg.window.coefficients(layout.window_len);
        let gain = 2.0 / window.iter().sum::<f64>();
        self.buffer.clear();
        self.buffer.extend(frame[..layout.window_len].iter().zip(&window).map(|(&x, &w)| Complex::new(x * w, 0.0)));
        self.buffer.resize(n, Complex::new(0.0, 0.0));
        fft.process(&mut self.buffer);
        self.buffer[..=n / 2].iter().map(|c| c.norm() * gain).collect()
    }

    /// Order deviations and magnitudes of a pitch-stabilized mono frame.
    pub fn analyze(&mut self, frame: &[f64], f0: f64, torque_mean: f64) -> Result<OrderFrameResult> {
        let layout = FftLayout::new(f0, &self.cfg)?;
        if frame.len() < layout.window_len {
            return Err(Error::input(format!(
                "frame has {} samples but the analysis window needs {}",
                frame.len(),
                layout.window_len
            )));
        }
        let spectrum = self.spectrum(frame, &layout);
        let b1 = layout.order1_bin;
        let nyquist = layout.nyquist_bin() as f64;
        let orders = &self.cfg.orders;
        let taper = self.cfg.taper;
        let lobe = self.cfg.window.main_lobe_half_width() * f64::from(self.cfg.padding);

        let estimates = orders
            .iter()
            .enumerate()
            .map(|(j, &h)| {
                // Region bounds at the midpoints to neighbouring orders; the
                // lowest order extends halfway to DC, the highest mirrors its
                // lower half-width.
                let below = if j == 0 { h / 2.0 } else { (h - orders[j - 1]) / 2.0 };
                let above = if j + 1 < orders.len() { (orders[j + 1] - h) / 2.0 } else { below };
                let center = h * b1;
                let (lo, hi) = ((h - below) * b1, (h + above) * b1);
                if hi > nyquist {
                    return OrderEstimate { order: h, deviation: 0.0, magnitude: 0.0, in_band: false };
                }
                let region_centroid = |l: f64, r: f64, fallback: f64| -> f64 {
                    let first = l.ceil().max(0.0) as usize;
                    let last = (r.floor() as usize).min(spectrum.len() - 1);
                    if last < first {
                        return fallback;
                    }
                    let weights: Vec<f64> = (first..=last).map(|k| tukey((k as f64 - l) / (r - l), taper)).collect();
                    centroid(first, &spectrum[first..=last], &weights, fallback)
                };

                let mut estimate = region_centroid(lo, hi, f64::NAN);
                if estimate.is_nan() {
                    let k = (center.round() as usize).min(spectrum.len() - 1);
                    return OrderEstimate { order: h, deviation: 0.0, magnitude: spectrum[k], in_band: true };
                }
                // Re-centre a symmetric window on the estimate until it settles.
                // It spans at most the main lobe and never leaves the region,
                // so a strong neighbour cannot pull the estimate away.
                let reach = lobe.min(below * b1).min(above * b1);
                for _ in 0..MAX_REFINEMENTS {
                    let half = reach.min(estimate - lo).min(hi - estimate).max(1.0);
                    let next = region_centroid(estimate - half, estimate + half, estimate).clamp(lo, hi);
                    let done = (next - estimate).abs() < 1e-9;
                    estimate = next;
                    if done {
                        break;
                    }
                }
                let k = (estimate.round() as usize).min(spectrum.len() - 1);
                OrderEstimate {
                    order: h,
                    deviation: estimate / b1 - h,
                    magnitude: parabolic_magnitude(&spectrum, k),
                    in_band: true,
                }
            })
            .collect();

        Ok(OrderFrameResult {
            rpm_mean: f0 * 60.0,
            torque_mean,
            order1_bin: b1,
            bin_misalignment: layout.misalignment(),
            orders: estimates,
        })
    }
}

/// One-shot [`OrderAnalyzer::analyze`].
pub fn analyze_frame(frame: &AudioBuffer, f0: f64, torque_mean: f64, cfg: &AnalysisConfig) -> Result<OrderFrameResult> {
    if frame.num_channels() != 1 {
        return Err(Error::input("analyze_frame expects a mono frame"));
    }
    OrderAnalyzer::new(cfg.clone())?.analyze(frame.channel(0), f0, torque_mean)
}

#[derive(Debug, Clone, Default)]
pub struct RecordingAnalysis {
    pub results: Vec<OrderFrameResult>,
    /// Frame indices that were kept by segmentation but could not be analyzed.
    pub skipped: Vec<(usize, String)>,
    /// Frames dropped by segmentation (partial or engine-off).
    pub excluded: usize,
}

/// Segment, repitch and analyze a recording with a matching control trace.
///
/// Multi-channel audio is downmixed. The analysis sample rate in `cfg` must
/// match the audio.
pub fn analyze_recording(
    audio: &AudioBuffer,
    trace: &ControlTrace,
    spec: &FrameSpec,
    cfg: &AnalysisConfig,
) -> Result<RecordingAnalysis> {
    if (cfg.sample_rate - f64::from(audio.sample_rate())).abs() > 1e-9 {
        return Err(Error::input(format!(
            "analysis rate {} Hz does not match audio rate {} Hz",
            cfg.sample_rate,
            audio.sample_rate()
        )));
    }
    let mono = AudioBuffer::mono(audio.sample_rate(), audio.downmix())?;
    let frames = segment_frames(&mono, trace, spec)?;
    let total = audio.len() / spec.frame_length;
    let mut analyzer = OrderAnalyzer::new(cfg.clone())?;
    let mut out = RecordingAnalysis { excluded: total - frames.len(), ..Default::default() };
    for frame in frames {
        let outcome = repitch::resample_to_frame_mean(&frame.audio, frame.trace.rpm())
            .and_then(|(warped, target)| analyzer.analyze(warped.channel(0), target / 60.0, frame.trace.mean_torque()));
        match outcome {
            Ok(result) => out.results.push(result),
            Err(e) => out.skipped.push((frame.index, e.to_string())),
        }
    }
    Ok(out)
}

/// Writes one JSON record per frame.
pub fn write_results<W: Write>(mut writer: W, results: &[OrderFrameResult]) -> Result<()> {
    for r in results {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_results(path: impl AsRef<Path>, results: &[OrderFrameResult]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path.as_ref())?);
    write_results(&mut w, results)?;
    w.flush()?;
    Ok(())
}

pub fn read_results<R: std::io::Read>(reader: R) -> Result<Vec<OrderFrameResult>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: OrderFrameResult =
            serde_json::from_str(&line).map_err(|e| Error::format(format!("record {}: {e}", n + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<OrderFrameResult>> {
    read_results(std::fs::File::open(path.as_ref())?)
}
