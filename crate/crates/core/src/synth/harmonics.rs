use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::signal::ControlTrace;
use crate::table::TimbreTable;

/// Phase-accumulating additive oscillator bank, one voice per table order.
///
/// Voices whose frequency reaches Nyquist fade to silence over the mute ramp
/// and fade back in when they drop below it again.
#[derive(Debug, Clone)]
pub struct HarmonicBank {
    sample_rate: u32,
    phases: Vec<f64>,
    gains: Vec<f64>,
    ramp_step: f64,
    started: bool,
    deviation: Vec<f64>,
    magnitude: Vec<f64>,
}

impl HarmonicBank {
    pub fn new(num_orders: usize, sample_rate: u32, mute_ramp_ms: f64) -> Self {
        let ramp_samples = mute_ramp_ms * f64::from(sample_rate) / 1000.0;
        Self {
            sample_rate,
            phases: vec![0.0; num_orders],
            gains: vec![0.0; num_orders],
            ramp_step: if ramp_samples >= 1.0 { 1.0 / ramp_samples } else { 1.0 },
            started: false,
            deviation: vec![0.0; num_orders],
            magnitude: vec![0.0; num_orders],
        }
    }

    pub fn reset(&mut self) {
        self.phases.fill(0.0);
        self.gains.fill(0.0);
        self.started = false;
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Render `trace` (which must already be at the bank's rate), appending to `out`.
    #[allow(clippy::needless_range_loop)] // walks several per-order arrays in step
    pub fn render_into(&mut self, trace: &ControlTrace, table: &TimbreTable, out: &mut Vec<f64>) -> Result<()> {
        if trace.sample_rate() != self.sample_rate {
            return Err(Error::input(format!(
                "trace rate {} Hz differs from synthesis rate {} Hz",
                trace.sample_rate(),
                self.sample_rate
            )));
        }
        if table.num_orders() != self.phases.len() {
            return Err(Error::input(format!(
                "table has {} orders, bank has {}",
                table.num_orders(),
                self.phases.len()
            )));
        }
        let fs = f64::from(self.sample_rate);
        let nyquist = fs / 2.0;
        let orders = table.orders();
        out.reserve(trace.len());

        for (&rpm, &torque) in trace.rpm().iter().zip(trace.torque()) {
            let f0 = rpm / 60.0;
            table.lookup_into(rpm, torque, &mut self.deviation, &mut self.magnitude);
            let mut acc = 0.0;
            for j in 0..orders.len() {
                let freq = (orders[j] + self.deviation[j]) * f0;
                let target = if freq < nyquist { 1.0 } else { 0.0 };
                let gain = &mut self.gains[j];
                if !self.started {
                    *gain = target;
                } else if *gain < target {
                    *gain = (*gain + self.ramp_step).min(target);
                } else if *gain > target {
                    *gain = (*gain - self.ramp_step).max(target);
                }
                let amp = self.magnitude[j] * *gain;
                let phase = &mut self.phases[j];
                if amp != 0.0 {
                    acc += amp * phase.sin();
                }
                *phase += TAU * freq / fs;
                if *phase >= TAU || *phase < 0.0 {
                    *phase = phase.rem_euclid(TAU);
                }
            }
            self.started = true;
            out.push(acc);
        }
        Ok(())
    }
}

/// Additive harmonic render of `trace` at the bank's rate.
pub fn synth_harmonics(trace: &ControlTrace, table: &TimbreTable, bank: &mut HarmonicBank) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    bank.render_into(trace, table, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::TableGrid;

    fn single_order_table(order: f64, dev: f64, mag: f64) -> TimbreTable {
        let grid = TableGrid::uniform((0.0, 8000.0, 1000.0), (0.0, 100.0, 100.0)).unwrap();
        TimbreTable::from_fn("one", vec![order], &grid, |_, _, _| (dev, mag)).unwrap()
    }

    fn dominant_freq(x: &[f64], fs: f64) -> f64 {
        // zero-crossing count over an integer number of seconds
        let crossings = x.windows(2).filter(|w| w[0] <= 0.0 && w[1] > 0.0).count();
        crossings as f64 / (x.len() as f64 / fs)
    }

    #[test]
    fn constant_rpm_single_order() {
        // order 1 at 3000 rpm = 50 Hz, amplitude 0.5
        let table = single_order_table(1.0, 0.0, 0.5);
        let trace = ControlTrace::constant(48_000, 48_000, 3000.0, 0.0).unwrap();
        let mut bank = HarmonicBank::new(1, 48_000, 10.0);
        let y = synth_harmonics(&trace, &table, &mut bank).unwrap();
        for (n, v) in y.iter().enumerate().step_by(997) {
            let want = 0.5 * (TAU * 50.0 * n as f64 / 48_000.0).sin();
            assert!((v - want).abs() < 1e-9, "n={n}: {v} vs {want}");
        }
    }

    #[test]
    fn deviation_shifts_frequency() {
        // order 2 with deviation 0.05 at 3000 rpm = 102.5 Hz
        let table = single_order_table(2.0, 0.05, 1.0);
        let trace = ControlTrace::constant(48_000, 96_000, 3000.0, 0.0).unwrap();
        let mut bank = HarmonicBank::new(1, 48_000, 10.0);
        let y = synth_harmonics(&trace, &table, &mut bank).unwrap();
        assert!((dominant_freq(&y, 48_000.0) - 102.5).abs() <= 0.5);
    }

    #[test]
    fn voices_above_nyquist_are_silent() {
        // order 1 at 600 000 rpm would be 10 kHz; fs 16 kHz puts it above Nyquist
        let table = single_order_table(1.0, 0.0, 1.0);
        let trace = ControlTrace::constant(16_000, 1000, 600_000.0, 0.0).unwrap();
        let mut bank = HarmonicBank::new(1, 16_000, 10.0);
        assert!(synth_harmonics(&trace, &table, &mut bank).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn crossing_nyquist_ramps_out() {
        let table = single_order_table(1.0, 0.0, 1.0);
        // 7 kHz then 9 kHz at fs 16 kHz
        let mut rpm = vec![420_000.0; 800];
        rpm.extend(vec![540_000.0; 800]);
        let trace = ControlTrace::new(16_000, rpm, vec![0.0; 1600]).unwrap();
        let mut bank = HarmonicBank::new(1, 16_000, 10.0);
        let y = synth_harmonics(&trace, &table, &mut bank).unwrap();
        let ramp = 160;
        assert!(y[800..800 + ramp - 1].iter().any(|v| v.abs() > 0.0));
        assert!(y[800 + ramp..].iter().all(|&v| v == 0.0));
        // envelope decays linearly, never jumps above the previous bound
        for (i, v) in y[800..800 + ramp].iter().enumerate() {
            assert!(v.abs() <= 1.0 - i as f64 / ramp as f64 + 1e-12);
        }
    }

    #[test]
    fn mismatched_inputs() {
        let table = single_order_table(1.0, 0.0, 1.0);
        let trace = ControlTrace::constant(16_000, 10, 1000.0, 0.0).unwrap();
        assert!(matches!(
            synth_harmonics(&trace, &table, &mut HarmonicBank::new(1, 48_000, 10.0)),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            synth_harmonics(&trace, &table, &mut HarmonicBank::new(2, 16_000, 10.0)),
            Err(Error::Input(_))
        ));
    }
}
