//! Pitch-adaptive resampling.
//!
//! A frame whose fundamental follows an RPM envelope is re-read at warped,
//! fractional source positions through a natural cubic spline so that every
//! engine order sits at a fixed frequency for the whole frame. The target is
//! normally the frame-mean RPM.

use crate::error::{Error, Result};
use crate::signal::AudioBuffer;

/// Fractional source positions at which the original frame is re-read.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedIndex {
    positions: Vec<f64>,
}

impl WarpedIndex {
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn check_rpm(rpm_envelope: &[f64], rpm_target: f64) -> Result<()> {
    if !(rpm_target > 0.0 && rpm_target.is_finite()) {
        return Err(Error::Domain(format!("target RPM must be positive, got {rpm_target}")));
    }
    if let Some((i, v)) = rpm_envelope.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("RPM at sample {i} is {v}; resampling ratio undefined")));
    }
    Ok(())
}

/// Cumulative sum of the local resampling ratio: `t'(n) = sum_{i<=n} target / rpm[i]`.
///
/// The ratio is indexed by the output sample, so `t'(0)` is already one ratio
/// step past the origin.
pub fn compute_warped_index(rpm_envelope: &[f64], rpm_target: f64) -> Result<WarpedIndex> {
    check_rpm(rpm_envelope, rpm_target)?;
    let positions = rpm_envelope
        .iter()
        .scan(0.0, |acc, &rpm| {
            *acc += rpm_target / rpm;
            Some(*acc)
        })
        .collect();
    Ok(WarpedIndex { positions })
}

/// Warped positions with the ratio taken at the current source position.
///
/// `t'(0) = target / rpm(0)` and `t'(n+1) = t'(n) + target / rpm(t'(n))`, with
/// the envelope linearly interpolated between samples. Positions stop at the
/// last source sample. Unlike [`compute_warped_index`], the ratio follows the
/// envelope at the point actually being read, so a ramping fundamental ends
/// up exactly at `target / 60` Hz.
pub fn compute_tracked_index(rpm_envelope: &[f64], rpm_target: f64) -> Result<WarpedIndex> {
    check_rpm(rpm_envelope, rpm_target)?;
    if rpm_envelope.is_empty() {
        return Ok(WarpedIndex { positions: Vec::new() });
    }
    let last = (rpm_envelope.len() - 1) as f64;
    let rpm_at = |t: f64| -> f64 {
        let i = t.floor() as usize;
        if i + 1 >= rpm_envelope.len() {
            return rpm_envelope[rpm_envelope.len() - 1];
        }
        let frac = t - i as f64;
        rpm_envelope[i] + (rpm_envelope[i + 1] - rpm_envelope[i]) * frac
    };
    let mut positions = Vec::with_capacity(rpm_envelope.len());
    let mut t = rpm_target / rpm_envelope[0];
    while t <= last {
        positions.push(t);
        t += rpm_target / rpm_at(t);
    }
    Ok(WarpedIndex { positions })
}

/// Natural cubic spline through samples at integer positions `0..n`.
#[derive(Debug, Clone)]
pub struct NaturalCubicSpline<'a> {
    values: &'a [f64],
    second: Vec<f64>,
}

impl<'a> NaturalCubicSpline<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        let n = values.len();
        let mut second = vec![0.0; n];
        if n >= 3 {
            // Thomas algorithm on m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]),
            // with m[0] = m[n-1] = 0.
            let inner = n - 2;
            let mut diag = vec![4.0; inner];
            let mut rhs: Vec<f64> =
                (1..n - 1).map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1])).collect();
            for i in 1..inner {
                let w = 1.0 / diag[i - 1];
                diag[i] -= w;
                rhs[i] -= w * rhs[i - 1];
            }
            second[inner] = rhs[inner - 1] / diag[inner - 1];
            for i in (0..inner - 1).rev() {
                second[i + 1] = (rhs[i] - second[i + 2]) / diag[i];
            }
        }
        Self { values, second }
    }

    /// Spline value at `t`; positions outside `[0, n-1]` use the end segments.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        match n {
            0 => return 0.0,
            1 => return self.values[0],
            _ => {}
        }
        let i = (t.floor().max(0.0) as usize).min(n - 2);
        let u = t - i as f64;
        let v = 1.0 - u;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        v * y0 + u * y1 + ((v * v * v - v) * m0 + (u * u * u - u) * m1) / 6.0
    }
}

/// Warps a mono frame so its fundamental stays at `rpm_target / 60` Hz.
///
/// The output is truncated where warped positions leave the source range, so
/// it is generally a little shorter or longer than the input.
pub fn resample_to_constant_pitch(frame: &AudioBuffer, rpm_envelope: &[f64], rpm_target: f64) -> Result<AudioBuffer> {
    if frame.num_channels() != 1 {
        return Err(Error::input(format!("expected a mono frame, got {} channels", frame.num_channels())));
    }
    if rpm_envelope.len() != frame.len() {
        return Err(Error::input(format!(
            "RPM envelope has {} samples but frame has {}",
            rpm_envelope.len(),
            frame.len()
        )));
    }
    let index = compute_tracked_index(rpm_envelope, rpm_target)?;
    let spline = NaturalCubicSpline::new(frame.channel(0));
    let out = index.positions().iter().map(|&t| spline.eval(t)).collect();
    AudioBuffer::mono(frame.sample_rate(), out)
}

/// [`resample_to_constant_pitch`] targeting the envelope's mean RPM.
pub fn resample_to_frame_mean(frame: &AudioBuffer, rpm_envelope: &[f64]) -> Result<(AudioBuffer, f64)> {
    if rpm_envelope.is_empty() {
        return Err(Error::input("empty RPM envelope"));
    }
    let target = rpm_envelope.iter().sum::<f64>() / rpm_envelope.len() as f64;
    Ok((resample_to_constant_pitch(frame, rpm_envelope, target)?, target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_rpm_gives_unit_steps() {
        let idx = compute_warped_index(&[3000.0; 5], 3000.0).unwrap();
        assert_eq!(idx.positions(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn double_rpm_gives_half_steps() {
        let idx = compute_warped_index(&[6000.0; 4], 3000.0).unwrap();
        assert_eq!(idx.positions(), &[0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn printed_cumulative_sum_example() {
        let idx = compute_warped_index(&[3000.0, 3000.0, 6000.0], 3000.0).unwrap();
        assert_eq!(idx.positions(), &[1.0, 2.0, 2.5]);
        // the position-tracked form agrees on this envelope (stopping at the last sample)
        let tracked = compute_tracked_index(&[3000.0, 3000.0, 6000.0], 3000.0).unwrap();
        assert_eq!(tracked.positions(), &[1.0, 2.0]);
    }

    #[test]
    fn zero_rpm_is_domain_error() {
        assert!(matches!(compute_warped_index(&[3000.0, 0.0], 3000.0), Err(Error::Domain(_))));
        assert!(matches!(compute_warped_index(&[3000.0], 0.0), Err(Error::Domain(_))));
        assert!(matches!(compute_tracked_index(&[-1.0], 3000.0), Err(Error::Domain(_))));
    }

    #[test]
    fn spline_interpolates_knots_and_is_natural() {
        let y = [0.0, 1.0, 0.0, -1.0, 0.5, 2.0];
        let s = NaturalCubicSpline::new(&y);
        for (i, &v) in y.iter().enumerate() {
            assert_eq!(s.eval(i as f64), v);
        }
        assert_eq!(s.second[0], 0.0);
        assert_eq!(s.second[5], 0.0);
        // continuity of the first derivative at interior knots
        let h = 1e-6;
        for k in 1..5 {
            let left = (s.eval(k as f64) - s.eval(k as f64 - h)) / h;
            let right = (s.eval(k as f64 + h) - s.eval(k as f64)) / h;
            assert!((left - right).abs() < 1e-4, "knot {k}: {left} vs {right}");
        }
    }

    #[test]
    fn spline_reproduces_linear_data() {
        let y: Vec<f64> = (0..20).map(|i| 3.0 - 0.25 * i as f64).collect();
        let s = NaturalCubicSpline::new(&y);
        for k in 0..190 {
            let t = k as f64 * 0.1;
            assert!((s.eval(t) - (3.0 - 0.25 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_warp_reproduces_input() {
        let x: Vec<f64> = (0..4096).map(|n| (0.013 * n as f64).sin() + 0.3 * (0.2 * n as f64).cos()).collect();
        let frame = AudioBuffer::mono(16_000, x.clone()).unwrap();
        let out = resample_to_constant_pitch(&frame, &vec![2750.0; 4096], 2750.0).unwrap();
        assert_eq!(out.len(), 4095);
        for (n, &v) in out.channel(0).iter().enumerate() {
            // t'(0) = 1: the output leads the input by one sample
            assert!((v - x[n + 1]).abs() < 1e-9);
        }
    }

    #[test]
    fn spline_error_below_minus_60_db() {
        let fs = 16_000.0;
        for f in [50.0, 400.0, 1200.0, 1600.0] {
            let x: Vec<f64> = (0..8000).map(|n| (2.0 * PI * f * n as f64 / fs).sin()).collect();
            let s = NaturalCubicSpline::new(&x);
            let (mut err, mut sig) = (0.0, 0.0);
            for k in 1000..7000 {
                let t = k as f64 + 0.37;
                let want = (2.0 * PI * f * t / fs).sin();
                err += (s.eval(t) - want).powi(2);
                sig += want * want;
            }
            let db = 10.0 * (err / sig).log10();
            assert!(db < -60.0, "{f} Hz: {db} dB");
        }
    }

    #[test]
    fn half_rate_warp_halves_frequency() {
        let fs = 16_000.0;
        let x: Vec<f64> = (0..16_000).map(|n| (2.0 * PI * 100.0 * n as f64 / fs).sin()).collect();
        let frame = AudioBuffer::mono(16_000, x).unwrap();
        let out = resample_to_constant_pitch(&frame, &vec![6000.0; 16_000], 3000.0).unwrap();
        assert_eq!(out.len(), 31_998);
        for (n, &v) in out.channel(0).iter().enumerate().step_by(97) {
            let want = (2.0 * PI * 50.0 * (n + 1) as f64 / fs).sin();
            assert!((v - want).abs() < 1e-6);
        }
    }

    #[test]
    fn length_mismatch_and_channels() {
        let frame = AudioBuffer::mono(16_000, vec![0.0; 10]).unwrap();
        assert!(matches!(resample_to_constant_pitch(&frame, &[1000.0; 9], 1000.0), Err(Error::Input(_))));
        let stereo = AudioBuffer::new(16_000, vec![vec![0.0; 10]; 2]).unwrap();
        assert!(matches!(resample_to_constant_pitch(&stereo, &[1000.0; 10], 1000.0), Err(Error::Input(_))));
    }

    proptest! {
        #[test]
        fn warped_index_strictly_increasing(env in proptest::collection::vec(1.0f64..10_000.0, 1..200), target in 1.0f64..10_000.0) {
            let idx = compute_warped_index(&env, target).unwrap();
            prop_assert_eq!(idx.positions()[0], target / env[0]);
            prop_assert!(idx.positions().windows(2).all(|w| w[1] > w[0]));
            let tracked = compute_tracked_index(&env, target).unwrap();
            prop_assert!(tracked.positions().windows(2).all(|w| w[1] > w[0]));
            prop_assert!(tracked.positions().iter().all(|&t| t <= (env.len() - 1) as f64));
        }
    }
}
