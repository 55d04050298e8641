use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{BurstParams, BURST_ORDERS};
use crate::error::{Error, Result};
use crate::signal::ControlTrace;

/// Number of octave rows in the Voss-McCartney generator.
pub const PINK_ROWS: usize = 12;

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>() * 2.0 - 1.0
}

/// Voss-McCartney pink noise with unit RMS.
///
/// Row `k` is redrawn every `2^(k+1)` samples; a white row is added on top.
#[derive(Debug, Clone)]
pub struct PinkNoise {
    rows: [f64; PINK_ROWS],
    counter: u32,
    rng: ChaCha8Rng,
}

impl PinkNoise {
    pub fn new(mut rng: ChaCha8Rng) -> Self {
        let rows = std::array::from_fn(|_| uniform(&mut rng));
        Self { rows, counter: 0, rng }
    }

    pub fn next_sample(&mut self) -> f64 {
        self.counter = self.counter.wrapping_add(1);
        let k = self.counter.trailing_zeros() as usize;
        if k < PINK_ROWS {
            self.rows[k] = uniform(&mut self.rng);
        }
        let white = uniform(&mut self.rng);
        // each uniform term has variance 1/3
        (self.rows.iter().sum::<f64>() + white) * (3.0 / (PINK_ROWS as f64 + 1.0)).sqrt()
    }
}

/// `x * (1 - alpha + alpha * pink)`.
pub fn synth_pink_modulation(x: &[f64], alpha: f64, pink: &mut PinkNoise) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::parameter(format!("modulation depth {alpha} outside [0, 1]")));
    }
    Ok(x.iter()
        .map(|&v| {
            let n = pink.next_sample();
            if alpha == 0.0 {
                v
            } else {
                v * (1.0 - alpha + alpha * n)
            }
        })
        .collect())
}

/// Trapezoidal (bilinear) one-pole low-pass.
#[derive(Debug, Clone, Copy)]
pub struct OnePoleLowpass {
    coeff: f64,
    state: f64,
}

impl OnePoleLowpass {
    pub fn new(cutoff_hz: f64, sample_rate: f64) -> Self {
        let g = (PI * cutoff_hz / sample_rate).tan();
        Self { coeff: g / (1.0 + g), state: 0.0 }
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        let v = (x - self.state) * self.coeff;
        let y = v + self.state;
        self.state = y + v;
        y
    }
}

/// Three cascaded one-pole sections (18 dB/octave).
#[derive(Debug, Clone, Copy)]
pub struct BurstFilter([OnePoleLowpass; 3]);

impl BurstFilter {
    pub fn new(cutoff_hz: f64, sample_rate: f64) -> Self {
        Self([OnePoleLowpass::new(cutoff_hz, sample_rate); 3])
    }

    #[inline]
    pub fn process(&mut self, x: f64) -> f64 {
        self.0.iter_mut().fold(x, |acc, s| s.process(acc))
    }
}

/// Low-passed white noise gated by `sum_m w_m |sin(phi_m)|^gamma_m`, where
/// `phi_m` follows order `BURST_ORDERS[m]` of the engine speed.
#[derive(Debug, Clone)]
pub struct BurstNoise {
    sample_rate: u32,
    phases: [f64; 4],
    filter: BurstFilter,
    rng: ChaCha8Rng,
}

impl BurstNoise {
    pub fn new(sample_rate: u32, cutoff_hz: f64, rng: ChaCha8Rng) -> Result<Self> {
        let fs = f64::from(sample_rate);
        if !(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
            return Err(Error::parameter(format!("burst cutoff {cutoff_hz} Hz must lie in (0, fs/2)")));
        }
        Ok(Self { sample_rate, phases: [0.0; 4], filter: BurstFilter::new(cutoff_hz, fs), rng })
    }

    pub fn filter(&self) -> BurstFilter {
        self.filter
    }
}

pub fn synth_burst_noise(trace: &ControlTrace, params: &BurstParams, state: &mut BurstNoise) -> Result<Vec<f64>> {
    if trace.sample_rate() != state.sample_rate {
        return Err(Error::input(format!(
            "trace rate {} Hz differs from synthesis rate {} Hz",
            trace.sample_rate(),
            state.sample_rate
        )));
    }
    if params.exponents.iter().any(|g| !(*g > 0.0)) || params.weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::parameter("burst weights must be >= 0 and exponents > 0"));
    }
    let fs = f64::from(state.sample_rate);
    let active: Vec<usize> = (0..4).filter(|&m| params.weights[m] != 0.0).collect();
    let mut out = Vec::with_capacity(trace.len());
    for &rpm in trace.rpm() {
        let noise = state.filter.process(uniform(&mut state.rng));
        let mut env = 0.0;
        for &m in &active {
            let s = state.phases[m].sin().abs();
            let gamma = params.exponents[m];
            env += params.weights[m] * if gamma == 4.0 { (s * s) * (s * s) } else { s.powf(gamma) };
        }
        for (m, phase) in state.phases.iter_mut().enumerate() {
            *phase += TAU * BURST_ORDERS[m] * rpm / 60.0 / fs;
            if *phase >= TAU || *phase < 0.0 {
                *phase = phase.rem_euclid(TAU);
            }
        }
        out.push(if active.is_empty() { 0.0 } else { noise * env });
    }
    Ok(out)
}
