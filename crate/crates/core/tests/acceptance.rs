//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};

use ordersynth::analysis::{analyze_recording, default_orders, FftLayout, OrderAnalyzer};
use ordersynth::codec::{self, decode_value, encode_value, RPM_BOUND, TORQUE_BOUND};
use ordersynth::dataset::{self, compare_to_table, order_distribution_map, read_manifest, GenerationPlan, ItemStatus};
use ordersynth::repitch::resample_to_constant_pitch;
use ordersynth::synth::{
    rng_stream, synth_burst_noise, synth_harmonics, synth_pink_modulation, synth_resonators, BurstFilter, BurstNoise,
    BurstParams, CombResonator, HarmonicBank, PinkNoise, ResonatorBank, ResonatorParams,
};
use ordersynth::table::build_table;
use ordersynth::{
    synthesize, wav, AnalysisConfig, AudioBuffer, ControlTrace, FrameSpec, SynthesisParams, TableGrid, TimbreTable,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    println!(
        "[{}] {id}. {name}: {} ({:.2} s, budget {} s{})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", over budget" }
    );
    pass
}

fn power_spectrum(x: &[f64], n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
}

fn hann(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    x.iter().enumerate().map(|(i, v)| v * (0.5 - 0.5 * (TAU * i as f64 / n).cos())).collect()
}

// 1. Every half-integer order sits on an integer bin with order 1 at bin 80.
fn bin_alignment() -> Outcome {
    let cfg = AnalysisConfig::default();
    let mut worst_actual = 0.0_f64;
    for rpm in [2000.0, 3000.0, 4500.0] {
        let layout = match FftLayout::new(rpm / 60.0, &cfg) {
            Ok(l) => l,
            Err(e) => return outcome(false, e.to_string()),
        };
        if layout.nominal_order1_bin != 80 {
            return outcome(false, format!("order-1 bin {} at {rpm} rpm", layout.nominal_order1_bin));
        }
        for &h in &cfg.orders {
            let bin = layout.nominal_bin(h);
            if bin.fract() != 0.0 || bin as usize > layout.nyquist_bin() {
                return outcome(false, format!("order {h} at bin {bin} ({rpm} rpm)"));
            }
        }
        worst_actual = worst_actual.max(layout.misalignment().abs());
    }
    outcome(
        worst_actual < 0.05,
        format!("order-1 bin 80, 128 orders on integer bins; actual b1 within {worst_actual:.4} bin"),
    )
}

// 2. Known partials at constant speed are recovered from one frame.
//
// A voice's SNR is its power against everything else (added noise and the
// leakage of all other partials) inside its own order region of the
// windowed spectrum.
fn analysis_round_trip() -> Outcome {
    let cfg = AnalysisConfig::default();
    let fs = cfg.sample_rate;
    let sigma = 2e-5;
    let mut analyzer = OrderAnalyzer::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_dev, mut worst_mag, mut checked, mut low_snr) = (0.0_f64, 0.0_f64, 0usize, 0usize);
    for _ in 0..30 {
        let rpm: f64 = rng.random_range(1000.0..6000.0);
        let f0 = rpm / 60.0;
        let layout = FftLayout::new(f0, &cfg).unwrap();
        let voices: Vec<(f64, f64, f64, f64)> = cfg
            .orders
            .iter()
            .map(|&h| {
                let dev = rng.random_range(-0.08..0.08);
                let amp = 10f64.powf(rng.random_range(-3.3..-1.5));
                (h, dev, amp, rng.random_range(0.0..TAU))
            })
            .filter(|&(h, d, _, _)| (h + d) * f0 < fs / 2.0)
            .collect();
        let n = 65_536;
        let mut x = vec![0.0; n];
        let mut parts = Vec::with_capacity(voices.len());
        for &(h, d, a, ph) in &voices {
            let w = TAU * (h + d) * f0 / fs;
            let part: Vec<f64> = (0..n).map(|i| a * (w * i as f64 + ph).sin()).collect();
            x.iter_mut().zip(&part).for_each(|(v, p)| *v += p);
            parts.push(part);
        }
        for v in &mut x {
            *v += sigma * 3f64.sqrt() * rng.random_range(-1.0..1.0);
        }
        let result = match analyzer.analyze(&x, f0, 0.0) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        for ((est, &(h, d, a, _)), part) in result.orders.iter().zip(&voices).zip(&parts) {
            if !est.in_band {
                continue;
            }
            let m = layout.window_len;
            let rest: Vec<f64> = x[..m].iter().zip(&part[..m]).map(|(v, p)| v - p).collect();
            let own = analyzer.spectrum(part, &layout);
            let other = analyzer.spectrum(&rest, &layout);
            let lo = ((h - 0.25) * layout.order1_bin).ceil() as usize;
            let hi = ((h + 0.25) * layout.order1_bin).floor() as usize;
            let power = |s: &[f64]| s[lo..=hi].iter().map(|v| v * v).sum::<f64>();
            let snr_db = 10.0 * (power(&own) / power(&other)).log10();
            if snr_db <= 40.0 {
                low_snr += 1;
                continue;
            }
            checked += 1;
            worst_dev = worst_dev.max((est.deviation - d).abs());
            worst_mag = worst_mag.max((est.magnitude - a).abs() / a);
        }
    }
    outcome(
        worst_dev <= 0.005 && worst_mag <= 0.05 && checked > 3000,
        format!(
            "{checked} voices with SNR > 40 dB ({low_snr} below): max |d delta| = {worst_dev:.5}, max amplitude error = {:.3}%",
            worst_mag * 100.0
        ),
    )
}

// 3. A 2400 -> 3600 rpm chirp becomes a steady 50 Hz harmonic series.
fn repitch_stabilization() -> Outcome {
    let fs = 16_000.0;
    let n = 65_536;
    let rpm: Vec<f64> = (0..n).map(|i| 2400.0 + 1200.0 * i as f64 / (n - 1) as f64).collect();
    let mut phase = 0.0;
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[i] = (1..=6).map(|h| (h as f64 * phase).sin() / h as f64).sum();
        phase += TAU * rpm[i] / 60.0 / fs;
    }
    let frame = AudioBuffer::mono(16_000, x).unwrap();
    let out = match resample_to_constant_pitch(&frame, &rpm, 3000.0) {
        Ok(o) => o,
        Err(e) => return outcome(false, e.to_string()),
    };
    let y = out.channel(0);
    let nfft = y.len();
    let p = power_spectrum(&hann(y), nfft);
    let bin_hz = fs / nfft as f64;
    let mut worst = 0.0_f64;
    for h in 1..=6 {
        let expect = h as f64 * 50.0 / bin_hz;
        let lo = (expect - 20.0 / bin_hz) as usize;
        let hi = (expect + 20.0 / bin_hz) as usize;
        let peak = (lo..=hi).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        worst = worst.max((peak as f64 - expect).abs());
    }
    outcome(
        worst <= 1.0,
        format!("6 partials within {worst:.2} bin of h * 50 Hz ({nfft}-point FFT, {bin_hz:.3} Hz bins)"),
    )
}

// 4. Every 16-bit code survives decode/encode and the WAV container; dense
// value sweeps stay within the stated resolution.
fn codec_resolution() -> Outcome {
    let half_rpm = RPM_BOUND / 32_767.0 / 2.0;
    let half_nm = TORQUE_BOUND / 32_767.0 / 2.0;
    let (mut worst_rpm, mut worst_nm, mut unrepresentable) = (0.0_f64, 0.0_f64, Vec::new());
    for word in i16::MIN..=i16::MAX {
        for (bound, lo, worst) in [(RPM_BOUND, 0.0, &mut worst_rpm), (TORQUE_BOUND, -TORQUE_BOUND, &mut worst_nm)] {
            let v = decode_value(word, bound);
            match encode_value(v, lo, bound) {
                Ok(back) => *worst = worst.max((decode_value(back, bound) - v).abs()),
                Err(_) if v < lo || v > bound => {}
                Err(e) => unrepresentable.push(format!("{word}: {e}")),
            }
        }
    }
    // all words through a 4-channel WAV
    let words: Vec<f64> = (i16::MIN..=i16::MAX).map(wav::from_pcm16).collect();
    let buf =
        AudioBuffer::new(48_000, vec![vec![0.0; words.len()], vec![0.0; words.len()], words.clone(), words]).unwrap();
    let back = wav::to_bytes(&buf).and_then(|b| wav::read_wav_from(std::io::Cursor::new(b)));
    let wav_exact = back.map(|b| b == buf).unwrap_or(false);

    let (mut dense_rpm, mut dense_nm) = (0.0_f64, 0.0_f64);
    for i in 0..=1_000_000 {
        let rpm = i as f64 * 0.01;
        dense_rpm = dense_rpm.max((decode_value(encode_value(rpm, 0.0, RPM_BOUND).unwrap(), RPM_BOUND) - rpm).abs());
        let nm = -1000.0 + i as f64 * 0.002;
        let code = encode_value(nm, -TORQUE_BOUND, TORQUE_BOUND).unwrap();
        dense_nm = dense_nm.max((decode_value(code, TORQUE_BOUND) - nm).abs());
    }
    let pass = worst_rpm <= half_rpm
        && worst_nm <= half_nm
        && unrepresentable.is_empty()
        && wav_exact
        && dense_rpm <= 0.31
        && dense_nm <= 0.031;
    outcome(
        pass,
        format!(
            "65536 words exact through WAV: {wav_exact}; code round trip err {worst_rpm:.1e} RPM / {worst_nm:.1e} Nm; dense sweep max err {dense_rpm:.4} RPM / {dense_nm:.5} Nm{}",
            if unrepresentable.is_empty() { String::new() } else { format!("; {}", unrepresentable.join(", ")) }
        ),
    )
}

fn smooth_table(id: &str, grid: &TableGrid, orders: Vec<f64>) -> TimbreTable {
    TimbreTable::from_fn(id, orders, grid, |h, r, t| {
        let shape = 0.03 / h.max(1.0) * (1.0 + 0.5 * (h * 0.9).sin().abs());
        (0.01 * (h * 1.3).sin(), shape * (1.0 + 0.3 * (r - 1000.0) / 5000.0) * (1.0 + 0.2 * t / 300.0))
    })
    .unwrap()
}

// 5. Zero-depth noise and zero-gain resonators are exact bypasses; a comb's
// impulse response is 1, g, g^2, ... at multiples of its delay.
fn component_identities() -> Outcome {
    let fs = 48_000;
    let grid = TableGrid::uniform((500.0, 7000.0, 500.0), (0.0, 300.0, 100.0)).unwrap();
    let table = smooth_table("ref", &grid, default_orders());
    let n = 48_000;
    let trace = ControlTrace::new(
        fs,
        (0..n).map(|i| 900.0 + 4000.0 * i as f64 / n as f64).collect(),
        (0..n).map(|i| 150.0 + 100.0 * (i as f64 / 7000.0).sin()).collect(),
    )
    .unwrap();
    let x = synth_harmonics(&trace, &table, &mut HarmonicBank::new(128, fs, 10.0)).unwrap();

    let pink_bypass = synth_pink_modulation(&x, 0.0, &mut PinkNoise::new(rng_stream(5, 0))).unwrap() == x;
    let burst = BurstParams { weights: [0.0; 4], ..BurstParams::default() };
    let burst_silent = synth_burst_noise(&trace, &burst, &mut BurstNoise::new(fs, 2000.0, rng_stream(5, 1)).unwrap())
        .unwrap()
        .iter()
        .all(|&v| v == 0.0);
    let mut zero_bank = ResonatorBank::new(&[(201.6, 0.0), (321.6, 0.0), (436.8, 0.0), (662.4, 0.0)]).unwrap();
    let comb_bypass = synth_resonators(&x, &mut zero_bank) == x;

    let params = SynthesisParams {
        pink_depth: 0.0,
        burst: BurstParams { mix: 0.3, weights: [0.0; 4], ..BurstParams::default() },
        resonators: [4.2, 6.7, 9.1, 13.8].iter().map(|&delay_ms| ResonatorParams { delay_ms, gain: 0.0 }).collect(),
        ..SynthesisParams::default()
    };
    let render = synthesize(&trace, &table, &params).unwrap();
    let full_bypass = render.audio.channel(0) == &x[..] && render.audio.channel(1) == &x[..];

    let (g, delay) = (0.7, 240usize);
    let mut comb = CombResonator::new(delay as f64, g).unwrap();
    let mut bank_in = vec![0.0; delay * 12];
    bank_in[0] = 1.0;
    let fb: Vec<f64> = bank_in.iter().map(|&s| comb.tick(s)).collect();
    let response: Vec<f64> = bank_in.iter().zip(&fb).map(|(s, f)| s + f).collect();
    let mut worst_ir = 0.0_f64;
    for (i, &v) in response.iter().enumerate() {
        let want = if i % delay == 0 { g.powi((i / delay) as i32) } else { 0.0 };
        worst_ir = worst_ir.max((v - want).abs());
    }
    outcome(
        pink_bypass && burst_silent && comb_bypass && full_bypass && worst_ir <= 1e-6,
        format!(
            "alpha=0 exact: {pink_bypass}; w=0 silent: {burst_silent}; g=0 exact: {comb_bypass}; full render exact: {full_bypass}; impulse response max err {worst_ir:.1e}"
        ),
    )
}

// 6. Pink noise falls 3 dB per octave; the burst low-pass falls 18 dB per octave.
fn noise_spectra() -> Outcome {
    let fs = 48_000.0;
    let seg = 1 << 16;
    let segments = 48;
    let mut pink = PinkNoise::new(rng_stream(6, 0));
    let mut psd = vec![0.0; seg / 2 + 1];
    for _ in 0..segments {
        let x: Vec<f64> = (0..seg).map(|_| pink.next_sample()).collect();
        for (acc, p) in psd.iter_mut().zip(power_spectrum(&hann(&x), seg)) {
            *acc += p;
        }
    }
    // third-octave band averages from 40 Hz to 4 kHz, then a least-squares slope per octave
    let bin = |f: f64| (f * seg as f64 / fs).round() as usize;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut f = 40.0;
    while f * 2f64.powf(1.0 / 3.0) <= 4000.0 * 1.0001 {
        let hi = f * 2f64.powf(1.0 / 3.0);
        let (a, b) = (bin(f), bin(hi));
        let mean = psd[a..b].iter().sum::<f64>() / (b - a) as f64;
        xs.push((f * hi).sqrt().log2());
        ys.push(10.0 * mean.log10());
        f = hi;
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();

    let cutoff = BurstParams::default().cutoff_hz;
    let level = |freq: f64| {
        let mut filt = BurstFilter::new(cutoff, fs);
        let y: Vec<f64> = (0..48_000).map(|i| filt.process((TAU * freq * i as f64 / fs).sin())).collect();
        let tail = &y[24_000..];
        10.0 * (2.0 * tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).log10()
    };
    let drop = level(2.0 * cutoff) - level(4.0 * cutoff);
    outcome(
        (slope + 3.0).abs() <= 0.5 && (drop - 18.0).abs() <= 2.0,
        format!(
            "pink slope {slope:.2} dB/oct over 40 Hz-4 kHz; burst LPF {drop:.2} dB from {} to {} Hz",
            2.0 * cutoff,
            4.0 * cutoff
        ),
    )
}

/// A trace that holds each `(rpm, torque)` point for one frame, ramping to
/// the next point over the last 5% of the frame.
fn stepped_trace(sr: u32, frame: usize, points: &[(f64, f64)]) -> ControlTrace {
    let hold = frame - frame / 20;
    let (mut rpm, mut torque) = (Vec::new(), Vec::new());
    for (k, &(r, t)) in points.iter().enumerate() {
        let (nr, nt) = points.get(k + 1).copied().unwrap_or((r, t));
        for i in 0..frame {
            let a = i.saturating_sub(hold) as f64 / (frame - hold) as f64;
            rpm.push(r + (nr - r) * a);
            torque.push(t + (nt - t) * a);
        }
    }
    ControlTrace::new(sr, rpm, torque).unwrap()
}

// 7. Source recording -> analysis -> table -> resynthesis on an unseen trace
// -> re-analysis reproduces the reference magnitudes.
fn end_to_end() -> Outcome {
    let grid = TableGrid::uniform((1000.0, 6000.0, 500.0), (0.0, 300.0, 100.0)).unwrap();
    let reference = smooth_table("reference", &grid, default_orders());
    let spec = FrameSpec::default();
    let cfg = AnalysisConfig::default();

    // one frame per cell, serpentine over the grid
    let mut points = Vec::new();
    for (i, &r) in grid.rpm_axis.iter().enumerate() {
        let mut row: Vec<(f64, f64)> = grid.torque_axis.iter().map(|&t| (r, t)).collect();
        if i % 2 == 1 {
            row.reverse();
        }
        points.extend(row);
    }
    let source_trace = stepped_trace(16_000, spec.frame_length, &points);
    let dry16 = SynthesisParams { sample_rate: 16_000, ..SynthesisParams::dry() };
    let source = match synthesize(&source_trace, &reference, &dry16) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let analysis = analyze_recording(&source.audio, &source.trace, &spec, &cfg).unwrap();
    let table = match build_table(&analysis.results, &grid, "rebuilt") {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };

    // unseen trace: slow sweeps across the grid at 48 kHz
    let fs = 48_000;
    let secs = 24 * 4;
    let n = secs * fs as usize;
    let unseen = ControlTrace::new(
        fs,
        (0..n).map(|i| 3500.0 - 2300.0 * (TAU * i as f64 / n as f64 / 2.0).cos()).collect(),
        (0..n).map(|i| 150.0 + 120.0 * (TAU * i as f64 / n as f64).sin()).collect(),
    )
    .unwrap();
    let render = match synthesize(&unseen, &table, &SynthesisParams::dry()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let muxed = codec::mux(&render.audio, &render.trace).unwrap();
    let map = order_distribution_map(&[muxed], &grid, &spec, &cfg).unwrap();
    let report = compare_to_table(&map, &reference, 8.0, 1e-9, 0.10);
    let cells = report.orders.first().map_or(0, |o| o.cells);
    outcome(
        report.passed() && report.orders.len() == 16 && render.normalization_gain == 1.0,
        format!(
            "{} source frames -> table; {} resynthesized frames over {cells} cells; orders 0.5-8 max magnitude error {:.2}% (limit 10%)",
            analysis.results.len(),
            map.total_frames(),
            report.worst() * 100.0
        ),
    )
}

// 8. One minute of full-featured 48 kHz synthesis in under a minute.
fn throughput() -> Outcome {
    let grid = TableGrid::default();
    let table = TimbreTable::from_fn("dense", default_orders(), &grid, |h, _, _| (0.005 * h.sin(), 0.02 / h)).unwrap();
    let fs = 48_000;
    let n = 60 * fs as usize;
    let trace = ControlTrace::new(
        fs,
        (0..n).map(|i| 1000.0 + 5000.0 * i as f64 / n as f64).collect(),
        (0..n).map(|i| 300.0 * (i as f64 / 480_000.0).sin()).collect(),
    )
    .unwrap();
    let params = SynthesisParams::default();
    let start = Instant::now();
    let render = synthesize(&trace, &table, &params);
    let secs = start.elapsed().as_secs_f64();
    match render {
        Ok(r) => outcome(
            secs < 60.0 && r.audio.len() == n,
            format!(
                "60 s stereo, 128 voices, pink + burst, {} combs in {secs:.2} s ({:.1}x real time)",
                params.resonators.len(),
                60.0 / secs
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

// 9. The 12-item example plan is reproducible byte for byte with a
// consistent manifest.
fn dataset_determinism() -> Outcome {
    let run = |dir: &Path, jobs: usize| -> ordersynth::Result<dataset::GenerationReport> {
        let plan_path = dataset::write_example_project(dir, false)?;
        dataset::generate(&GenerationPlan::load(&plan_path)?, dir, jobs)
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = match (run(a.path(), 1), run(b.path(), 4)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let plan = GenerationPlan::load(a.path().join("plan.json")).unwrap();
    let mut problems = Vec::new();
    if ra.records.len() != 12 || ra.produced() != 12 {
        problems.push(format!("{} rows, {} produced", ra.records.len(), ra.produced()));
    }
    let manifest_a = std::fs::read(&ra.manifest_path).unwrap();
    if manifest_a != std::fs::read(&rb.manifest_path).unwrap() {
        problems.push("manifests differ".into());
    }
    let rows = read_manifest(&ra.manifest_path).unwrap();
    for (i, row) in rows.iter().enumerate() {
        let (pa, pb) = (ra.output_dir.join(&row.path), rb.output_dir.join(&row.path));
        let bytes = std::fs::read(&pa).unwrap_or_default();
        if bytes.is_empty() || bytes != std::fs::read(&pb).unwrap_or_default() {
            problems.push(format!("{} differs between runs", row.path.display()));
            continue;
        }
        let audio = wav::read_wav(&pa).unwrap();
        let item = &plan.items()[i];
        let source = dataset::load_trace(a.path().join(&plan.traces[item.trace].path))
            .and_then(|t| t.resample_linear(48_000))
            .unwrap();
        let decoded = codec::decode_controls(&audio).unwrap();
        let ctl_err = decoded.rpm().iter().zip(source.rpm()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let consistent = row.index == i
            && row.status == ItemStatus::Ok
            && row.path == item.path
            && row.engine_id == plan.tables[item.table].id
            && row.trace_id == plan.traces[item.trace].id
            && (row.duration_s - audio.duration_secs()).abs() < 1e-6
            && audio.num_channels() == 4
            && decoded.len() == source.len()
            && ctl_err <= RPM_BOUND / 32_767.0 / 2.0;
        if !consistent {
            problems.push(format!("row {i} inconsistent (control error {ctl_err:.3})"));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "12 files and manifest byte-identical across 1 and 4 workers; rows match files, plan and decoded controls"
                .to_string()
        } else {
            problems.join("; ")
        },
    )
}

fn main() {
    let results = [
        criterion(1, "bin alignment", Duration::from_secs(1), bin_alignment),
        criterion(2, "analysis round trip", Duration::from_secs(30), analysis_round_trip),
        criterion(3, "repitch stabilization", Duration::from_secs(5), repitch_stabilization),
        criterion(4, "codec resolution", Duration::from_secs(5), codec_resolution),
        criterion(5, "component identities", Duration::from_secs(5), component_identities),
        criterion(6, "noise spectra", Duration::from_secs(10), noise_spectra),
        criterion(7, "end-to-end self-consistency", Duration::from_secs(120), end_to_end),
        criterion(8, "throughput", Duration::from_secs(60), throughput),
        criterion(9, "dataset determinism", Duration::from_secs(60), dataset_determinism),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
