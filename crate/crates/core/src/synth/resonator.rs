use crate::error::{Error, Result};

/// Feedback comb `y[n] = s[n] + g * y[n - D]` with linearly interpolated
/// fractional delay `D >= 1` samples.
#[derive(Debug, Clone)]
pub struct CombResonator {
    buffer: Vec<f64>,
    write: usize,
    whole: usize,
    frac: f64,
    gain: f64,
}

impl CombResonator {
    pub fn new(delay_samples: f64, gain: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gain) {
            return Err(Error::parameter(format!("comb gain {gain} must lie in [0, 1)")));
        }
        if !(delay_samples.is_finite() && delay_samples >= 1.0) {
            return Err(Error::parameter(format!("comb delay {delay_samples} must be at least one sample")));
        }
        let whole = delay_samples.floor() as usize;
        Ok(Self { buffer: vec![0.0; whole + 2], write: 0, whole, frac: delay_samples - whole as f64, gain })
    }

    fn tap(&self, back: usize) -> f64 {
        let len = self.buffer.len();
        self.buffer[(self.write + len - back) % len]
    }

    /// Feed `s[n]`, returning the feedback term `g * y[n - D]`.
    #[inline]
    pub fn tick(&mut self, s: f64) -> f64 {
        let delayed = if self.frac == 0.0 {
            self.tap(self.whole)
        } else {
            (1.0 - self.frac) * self.tap(self.whole) + self.frac * self.tap(self.whole + 1)
        };
        let fb = self.gain * delayed;
        self.buffer[self.write] = s + fb;
        self.write = (self.write + 1) % self.buffer.len();
        fb
    }
}

/// Parallel combs summed onto the dry input.
#[derive(Debug, Clone, Default)]
pub struct ResonatorBank {
    combs: Vec<CombResonator>,
}

impl ResonatorBank {
    /// `(delay_samples, gain)` per comb.
    pub fn new(combs: &[(f64, f64)]) -> Result<Self> {
        Ok(Self { combs: combs.iter().map(|&(d, g)| CombResonator::new(d, g)).collect::<Result<_>>()? })
    }

    pub fn len(&self) -> usize {
        self.combs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combs.is_empty()
    }

    #[inline]
    pub fn process(&mut self, s: f64) -> f64 {
        s + self.combs.iter_mut().map(|c| c.tick(s)).sum::<f64>()
    }
}

pub fn synth_resonators(x: &[f64], bank: &mut ResonatorBank) -> Vec<f64> {
    if bank.is_empty() {
        return x.to_vec();
    }
    x.iter().map(|&s| bank.process(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn impulse_response_decays_geometrically() {
        // 10 ms at 48 kHz, g = 0.9
        let mut bank = ResonatorBank::new(&[(480.0, 0.9)]).unwrap();
        let mut x = vec![0.0; 2000];
        x[0] = 1.0;
        let y = synth_resonators(&x, &mut bank);
        // dry impulse plus comb output
        assert_eq!(y[0], 1.0);
        assert!((y[480] - 0.9).abs() < 1e-12);
        assert!((y[960] - 0.81).abs() < 1e-12);
        assert!((y[1440] - 0.729).abs() < 1e-12);
        let silent = y.iter().enumerate().filter(|(i, _)| i % 480 != 0).all(|(_, v)| *v == 0.0);
        assert!(silent);
    }

    #[test]
    fn zero_gain_is_bypass() {
        let x: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut bank = ResonatorBank::new(&[(10.5, 0.0), (33.0, 0.0)]).unwrap();
        assert_eq!(synth_resonators(&x, &mut bank), x);
    }

    #[test]
    fn fractional_delay_interpolates() {
        let mut c = CombResonator::new(2.5, 0.5).unwrap();
        let out: Vec<f64> = [1.0, 0.0, 0.0, 0.0, 0.0].iter().map(|&s| c.tick(s)).collect();
        assert_eq!(out, vec![0.0, 0.0, 0.25, 0.25, 0.0625]);
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(CombResonator::new(10.0, 1.0), Err(Error::Parameter(_))));
        assert!(matches!(CombResonator::new(10.0, -0.1), Err(Error::Parameter(_))));
        assert!(matches!(CombResonator::new(0.5, 0.5), Err(Error::Parameter(_))));
    }

    proptest! {
        #[test]
        fn bounded_input_gives_bounded_output(
            delays in prop::collection::vec((1.0f64..500.0, 0.0f64..0.95), 1..5),
            x in prop::collection::vec(-1.0f64..1.0, 1..3000),
        ) {
            let bound = 1.0 + delays.iter().map(|(_, g)| g / (1.0 - g)).sum::<f64>();
            let mut bank = ResonatorBank::new(&delays).unwrap();
            for y in synth_resonators(&x, &mut bank) {
                prop_assert!(y.abs() <= bound + 1e-9);
            }
        }
    }
}
