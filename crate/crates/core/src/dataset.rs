//! Dataset generation and order-distribution maps.
//!
//! A [`GenerationPlan`] crosses timbre tables with control traces, once per
//! named set and variation. Each item is rendered, muxed with its encoded
//! controls and written to `{output_dir}/{set}/{engine}_{trace}_{variant}.wav`.
//! A tab-separated manifest lists every item in plan order.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_recording, default_orders, AnalysisConfig, OrderFrameResult};
use crate::codec::{decode_controls, demux, mux};
use crate::error::{Error, Result};
use crate::signal::{AudioBuffer, ControlTrace, FrameSpec};
use crate::synth::{rng_stream, synthesize, SynthesisParams};
use crate::table::{TableGrid, TimbreTable};
use crate::{tracefile, wav};

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const MANIFEST_HEADER: &str =
    "index\tstatus\tset\tpath\tengine_id\ttrace_id\tvariant\tparams_hash\tduration_s\tmessage";

/// Inclusive-exclusive `[min, max)` draw range, written as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span(pub f64, pub f64);

impl Span {
    fn check(&self, name: &str, lo: f64, hi: f64, hi_inclusive: bool) -> Result<()> {
        let Span(a, b) = *self;
        let upper_ok = if hi_inclusive { b <= hi } else { b < hi };
        if !(a.is_finite() && b.is_finite() && a <= b && a >= lo && upper_ok) {
            return Err(Error::parameter(format!(
                "{name} range [{a}, {b}] must satisfy {lo} <= min <= max within bound {hi}"
            )));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        let Span(a, b) = *self;
        if a == b {
            a
        } else {
            a + (b - a) * rng.random::<f64>()
        }
    }
}

/// Ranges for parameters that vary between items. Unset fields keep the
/// set's base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationSpec {
    pub pink_depth: Option<Span>,
    pub turbulence_mix: Option<Span>,
    pub burst_mix: Option<Span>,
    pub burst_weight: Option<Span>,
    pub burst_exponent: Option<Span>,
    pub burst_cutoff_hz: Option<Span>,
    pub resonator_gain: Option<Span>,
    pub resonator_delay_ms: Option<Span>,
    pub master_gain: Option<Span>,
}

impl VariationSpec {
    pub fn validate(&self) -> Result<()> {
        let inf = f64::INFINITY;
        let checks = [
            ("pink_depth", self.pink_depth, 0.0, 1.0, true),
            ("turbulence_mix", self.turbulence_mix, 0.0, inf, true),
            ("burst_mix", self.burst_mix, 0.0, inf, true),
            ("burst_weight", self.burst_weight, 0.0, inf, true),
            ("burst_exponent", self.burst_exponent, f64::MIN_POSITIVE, inf, true),
            ("burst_cutoff_hz", self.burst_cutoff_hz, f64::MIN_POSITIVE, inf, true),
            ("resonator_gain", self.resonator_gain, 0.0, 1.0, false),
            ("resonator_delay_ms", self.resonator_delay_ms, 0.0, inf, true),
            ("master_gain", self.master_gain, 0.0, inf, true),
        ];
        for (name, span, lo, hi, incl) in checks {
            if let Some(s) = span {
                s.check(name, lo, hi, incl)?;
            }
        }
        Ok(())
    }
}

/// Deterministic draw of item parameters from `(seed, index)`.
///
/// Fields are drawn in a fixed order; the synthesis seed of the result is
/// drawn last.
pub fn sample_variation(
    spec: &VariationSpec,
    base: &SynthesisParams,
    seed: u64,
    index: u64,
) -> Result<SynthesisParams> {
    spec.validate()?;
    let mut rng = rng_stream(seed, index);
    let mut p = base.clone();
    let mut draw = |span: Option<Span>, target: &mut f64| {
        if let Some(s) = span {
            *target = s.draw(&mut rng);
        }
    };
    draw(spec.pink_depth, &mut p.pink_depth);
    draw(spec.turbulence_mix, &mut p.turbulence_mix);
    draw(spec.burst_mix, &mut p.burst.mix);
    draw(spec.burst_cutoff_hz, &mut p.burst.cutoff_hz);
    draw(spec.master_gain, &mut p.master_gain);
    for m in 0..4 {
        draw(spec.burst_weight, &mut p.burst.weights[m]);
        draw(spec.burst_exponent, &mut p.burst.exponents[m]);
    }
    for r in &mut p.resonators {
        draw(spec.resonator_gain, &mut r.gain);
        draw(spec.resonator_delay_ms, &mut r.delay_ms);
    }
    p.seed = rng.random();
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRef {
    pub id: String,
    /// Table JSON, or a CSV / 4-channel WAV trace. Relative to the plan file.
    pub path: PathBuf,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub name: String,
    #[serde(default = "one")]
    pub variations: u32,
    #[serde(default)]
    pub base: SynthesisParams,
    #[serde(default)]
    pub variation: VariationSpec,
    /// Table ids to use; all tables when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables: Option<Vec<String>>,
    /// Trace ids to use; all traces when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traces: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationPlan {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub tables: Vec<SourceRef>,
    pub traces: Vec<SourceRef>,
    pub sets: Vec<SetSpec>,
}

fn check_id(kind: &str, id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '.'))
        && !id.starts_with('.');
    if !ok {
        return Err(Error::parameter(format!("{kind} id {id:?} must be non-empty ASCII letters, digits, '-' or '.'")));
    }
    Ok(())
}

fn check_unique<'a>(kind: &str, ids: impl Iterator<Item = &'a str>) -> Result<HashSet<&'a str>> {
    let mut seen = HashSet::new();
    for id in ids {
        check_id(kind, id)?;
        if !seen.insert(id) {
            return Err(Error::parameter(format!("duplicate {kind} id {id:?}")));
        }
    }
    Ok(seen)
}

/// One planned output file.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanItem {
    pub index: usize,
    pub set: String,
    pub table: usize,
    pub trace: usize,
    pub variant: u32,
    /// Path relative to the output directory.
    pub path: PathBuf,
}

impl GenerationPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text).map_err(|e| Error::format(format!("plan: {e}")))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path.as_ref())?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let tables = check_unique("table", self.tables.iter().map(|t| t.id.as_str()))?;
        let traces = check_unique("trace", self.traces.iter().map(|t| t.id.as_str()))?;
        check_unique("set", self.sets.iter().map(|s| s.name.as_str()))?;
        for set in &self.sets {
            set.base.validate()?;
            set.variation.validate()?;
            for (kind, subset, known) in [("table", &set.tables, &tables), ("trace", &set.traces, &traces)] {
                if let Some(ids) = subset {
                    check_unique(kind, ids.iter().map(String::as_str))?;
                    if let Some(bad) = ids.iter().find(|id| !known.contains(id.as_str())) {
                        return Err(Error::parameter(format!("set {:?} names unknown {kind} {bad:?}", set.name)));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every item in plan order: sets, then tables, then traces, then variants.
    pub fn items(&self) -> Vec<PlanItem> {
        let pick = |subset: &Option<Vec<String>>, refs: &[SourceRef]| -> Vec<usize> {
            match subset {
                None => (0..refs.len()).collect(),
                Some(ids) => (0..refs.len()).filter(|&i| ids.contains(&refs[i].id)).collect(),
            }
        };
        let mut items = Vec::new();
        for set in &self.sets {
            for table in pick(&set.tables, &self.tables) {
                for trace in pick(&set.traces, &self.traces) {
                    for variant in 0..set.variations {
                        let file = format!("{}_{}_{}.wav", self.tables[table].id, self.traces[trace].id, variant);
                        items.push(PlanItem {
                            index: items.len(),
                            set: set.name.clone(),
                            table,
                            trace,
                            variant,
                            path: Path::new(&set.name).join(file),
                        });
                    }
                }
            }
        }
        items
    }
}

/// Load a control trace from CSV or from channels 3-4 of a 4-channel WAV.
pub fn load_trace(path: impl AsRef<Path>) -> Result<ControlTrace> {
    let path = path.as_ref();
    let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        decode_controls(&wav::read_wav(path)?)
    } else {
        tracefile::read_trace_csv(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemStatus {
    Ok,
    Error,
}

impl ItemStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ItemStatus::Ok => "ok",
            ItemStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRecord {
    pub index: usize,
    pub status: ItemStatus,
    pub set: String,
    pub path: PathBuf,
    pub engine_id: String,
    pub trace_id: String,
    pub variant: u32,
    pub params_hash: String,
    pub duration_s: f64,
    pub message: String,
}

fn clean(field: &str) -> String {
    field.replace(['\t', '\n', '\r'], " ")
}

impl ManifestRecord {
    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{}",
            self.index,
            self.status.as_str(),
            clean(&self.set),
            self.path.to_string_lossy().replace('\\', "/"),
            clean(&self.engine_id),
            clean(&self.trace_id),
            self.variant,
            self.params_hash,
            self.duration_s,
            clean(&self.message)
        )
    }

    pub fn parse_tsv_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 10 {
            return Err(Error::format(format!("manifest row has {} fields, expected 10", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::format(format!("bad manifest number {s:?}")));
        Ok(Self {
            index: num(f[0])? as usize,
            status: match f[1] {
                "ok" => ItemStatus::Ok,
                "error" => ItemStatus::Error,
                s => return Err(Error::format(format!("bad manifest status {s:?}"))),
            },
            set: f[2].into(),
            path: f[3].into(),
            engine_id: f[4].into(),
            trace_id: f[5].into(),
            variant: num(f[6])? as u32,
            params_hash: f[7].into(),
            duration_s: num(f[8])?,
            message: f[9].into(),
        })
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(Error::format("manifest header mismatch"));
    }
    lines.map(ManifestRecord::parse_tsv_line).collect()
}

#[derive(Debug, Clone)]
pub struct GenerationReport {
    pub output_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub records: Vec<ManifestRecord>,
}

impl GenerationReport {
    pub fn produced(&self) -> usize {
        self.records.iter().filter(|r| r.status == ItemStatus::Ok).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.produced()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn existing_output_is_valid(path: &Path, sample_rate: u32, frames: usize) -> bool {
    matches!(wav::probe_wav(path), Ok(info)
        if info.channels == 4 && info.sample_rate == sample_rate && info.samples_per_channel as usize == frames)
}

struct Sources {
    tables: Vec<std::result::Result<TimbreTable, String>>,
    traces: Vec<std::result::Result<ControlTrace, String>>,
}

fn load_sources(plan: &GenerationPlan, base_dir: &Path) -> Sources {
    Sources {
        tables: plan
            .tables
            .iter()
            .map(|t| TimbreTable::load(base_dir.join(&t.path)).map_err(|e| e.to_string()))
            .collect(),
        traces: plan.traces.iter().map(|t| load_trace(base_dir.join(&t.path)).map_err(|e| e.to_string())).collect(),
    }
}

fn run_item(plan: &GenerationPlan, sources: &Sources, out_dir: &Path, item: &PlanItem) -> ManifestRecord {
    let set = plan.sets.iter().find(|s| s.name == item.set).expect("item set exists");
    let mut record = ManifestRecord {
        index: item.index,
        status: ItemStatus::Error,
        set: item.set.clone(),
        path: item.path.clone(),
        engine_id: plan.tables[item.table].id.clone(),
        trace_id: plan.traces[item.trace].id.clone(),
        variant: item.variant,
        params_hash: String::new(),
        duration_s: 0.0,
        message: String::new(),
    };
    let outcome = (|| -> Result<String> {
        let params = sample_variation(&set.variation, &set.base, plan.seed, item.index as u64)?;
        record.params_hash = params.fingerprint();
        let table = sources.tables[item.table].as_ref().map_err(|e| Error::input(format!("table: {e}")))?;
        let trace = sources.traces[item.trace].as_ref().map_err(|e| Error::input(format!("trace: {e}")))?;
        let expected = trace.resample_linear(params.sample_rate)?.len();
        record.duration_s = expected as f64 / f64::from(params.sample_rate);
        let path = out_dir.join(&item.path);
        if existing_output_is_valid(&path, params.sample_rate, expected) {
            return Ok("kept existing file".into());
        }
        let render = synthesize(trace, table, &params)?;
        let muxed = mux(&render.audio, &render.trace)?;
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        write_atomic(&path, &wav::to_bytes(&muxed)?)?;
        Ok(if render.normalization_gain < 1.0 {
            format!("normalized by {:.4}", render.normalization_gain)
        } else {
            String::new()
        })
    })();
    match outcome {
        Ok(message) => {
            record.status = ItemStatus::Ok;
            record.message = message;
        }
        Err(e) => record.message = format!("{}: {e}", e.class().as_str()),
    }
    record
}

/// Render every plan item with up to `jobs` workers (0 = one per core).
///
/// Relative paths in the plan resolve against `base_dir`. Item failures are
/// recorded in the manifest; only plan-level problems and an unwritable
/// output directory or manifest return an error. Output bytes do not depend
/// on `jobs`.
pub fn generate(plan: &GenerationPlan, base_dir: &Path, jobs: usize) -> Result<GenerationReport> {
    plan.validate()?;
    let out_dir = base_dir.join(&plan.output_dir);
    std::fs::create_dir_all(&out_dir)?;
    let sources = load_sources(plan, base_dir);
    let items = plan.items();
    let jobs = match jobs {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(items.len().max(1));

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut records = std::thread::scope(|scope| {
        for _ in 0..jobs {
            let tx = tx.clone();
            let (next, items, sources, out_dir) = (&next, &items, &sources, &out_dir);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                if tx.send(run_item(plan, sources, out_dir, item)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        rx.into_iter().collect::<Vec<_>>()
    });
    records.sort_by_key(|r| r.index);

    let mut manifest = String::from(MANIFEST_HEADER);
    manifest.push('\n');
    for r in &records {
        manifest.push_str(&r.to_tsv_line());
        manifest.push('\n');
    }
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_atomic(&manifest_path, manifest.as_bytes())?;
    Ok(GenerationReport { output_dir: out_dir, manifest_path, records })
}

/// Mean order magnitudes over (RPM, torque) cells, aggregated from analyzed frames.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderMap {
    pub orders: Vec<f64>,
    pub grid: TableGrid,
    /// Frames per cell, row-major `r * T + t`.
    pub frames: Vec<u32>,
    rpm_sum: Vec<f64>,
    torque_sum: Vec<f64>,
    /// Per cell and order, `(r * T + t) * H + h`.
    magnitude_sum: Vec<f64>,
    deviation_sum: Vec<f64>,
    in_band: Vec<u32>,
}

/// One occupied `(cell, order)` entry of an [`OrderMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderMapEntry {
    pub order: f64,
    pub rpm_bin: usize,
    pub torque_bin: usize,
    pub frames: u32,
    pub mean_rpm: f64,
    pub mean_torque: f64,
    pub mean_magnitude: f64,
    pub mean_deviation: f64,
}

impl OrderMap {
    pub fn new(orders: Vec<f64>, grid: TableGrid) -> Self {
        let cells = grid.num_cells();
        let n = cells * orders.len();
        Self {
            orders,
            grid,
            frames: vec![0; cells],
            rpm_sum: vec![0.0; cells],
            torque_sum: vec![0.0; cells],
            magnitude_sum: vec![0.0; n],
            deviation_sum: vec![0.0; n],
            in_band: vec![0; n],
        }
    }

    pub fn add(&mut self, result: &OrderFrameResult) -> Result<()> {
        if result.orders.len() != self.orders.len()
            || result.orders.iter().zip(&self.orders).any(|(e, &o)| e.order != o)
        {
            return Err(Error::input("frame result order set differs from the map"));
        }
        let (r, t) = self.grid.cell_of(result.rpm_mean, result.torque_mean);
        let cell = self.grid.cell_index(r, t);
        self.frames[cell] += 1;
        self.rpm_sum[cell] += result.rpm_mean;
        self.torque_sum[cell] += result.torque_mean;
        let h = self.orders.len();
        for (j, est) in result.orders.iter().enumerate() {
            if est.in_band {
                self.magnitude_sum[cell * h + j] += est.magnitude;
                self.deviation_sum[cell * h + j] += est.deviation;
                self.in_band[cell * h + j] += 1;
            }
        }
        Ok(())
    }

    pub fn total_frames(&self) -> u32 {
        self.frames.iter().sum()
    }

    /// Occupied entries ordered by order, then RPM bin, then torque bin.
    pub fn entries(&self) -> Vec<OrderMapEntry> {
        let h = self.orders.len();
        let nt = self.grid.torque_axis.len();
        let mut out = Vec::new();
        for (j, &order) in self.orders.iter().enumerate() {
            for cell in 0..self.frames.len() {
                let k = cell * h + j;
                let count = self.in_band[k];
                if count == 0 {
                    continue;
                }
                let f = f64::from(self.frames[cell]);
                out.push(OrderMapEntry {
                    order,
                    rpm_bin: cell / nt,
                    torque_bin: cell % nt,
                    frames: count,
                    mean_rpm: self.rpm_sum[cell] / f,
                    mean_torque: self.torque_sum[cell] / f,
                    mean_magnitude: self.magnitude_sum[k] / f64::from(count),
                    mean_deviation: self.deviation_sum[k] / f64::from(count),
                });
            }
        }
        out
    }

    /// Tab-separated table with one row per occupied `(order, cell)`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("order\trpm_bin\ttorque_bin\trpm_center\ttorque_center\tframes\tmean_rpm\tmean_torque\tmean_magnitude\tmean_deviation\n");
        for e in self.entries() {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{:.6e}\t{:.6}",
                e.order,
                e.rpm_bin,
                e.torque_bin,
                self.grid.rpm_axis[e.rpm_bin],
                self.grid.torque_axis[e.torque_bin],
                e.frames,
                e.mean_rpm,
                e.mean_torque,
                e.mean_magnitude,
                e.mean_deviation
            );
        }
        s
    }
}

/// Decode controls, analyze every frame and aggregate an [`OrderMap`].
///
/// Inputs must be 4-channel buffers. Each is analyzed at its own rate with
/// the frame duration of `spec`.
pub fn order_distribution_map(
    inputs: &[AudioBuffer],
    grid: &TableGrid,
    spec: &FrameSpec,
    cfg: &AnalysisConfig,
) -> Result<OrderMap> {
    let mut map = OrderMap::new(cfg.orders.clone(), grid.clone());
    for buffer in inputs {
        let (audio, trace) = demux(buffer)?;
        let sr = audio.sample_rate();
        let analysis =
            analyze_recording(&audio, &trace, &spec.at_rate(sr), &cfg.clone().with_sample_rate(f64::from(sr)))?;
        for r in &analysis.results {
            map.add(r)?;
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderComparison {
    pub order: f64,
    pub cells: usize,
    /// Largest `|map - table| / table` over compared cells.
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub tolerance: f64,
    pub orders: Vec<OrderComparison>,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|o| o.max_relative_error <= self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.orders.iter().map(|o| o.max_relative_error).fold(0.0, f64::max)
    }
}

/// Compare map magnitudes with `table` looked up at each cell's mean
/// operating point, for orders up to `max_order`.
///
/// Entries whose reference magnitude is at or below `floor` are skipped.
pub fn compare_to_table(
    map: &OrderMap,
    table: &TimbreTable,
    max_order: f64,
    floor: f64,
    tolerance: f64,
) -> ComparisonReport {
    let mut per_order: BTreeMap<usize, OrderComparison> = BTreeMap::new();
    let mut dev = vec![0.0; table.num_orders()];
    let mut mag = vec![0.0; table.num_orders()];
    for e in map.entries().into_iter().filter(|e| e.order <= max_order) {
        let Some(j) = table.orders().iter().position(|&o| o == e.order) else {
            continue;
        };
        table.lookup_into(e.mean_rpm, e.mean_torque, &mut dev, &mut mag);
        if mag[j] <= floor {
            continue;
        }
        let err = (e.mean_magnitude - mag[j]).abs() / mag[j];
        let slot = per_order.entry(j).or_insert(OrderComparison { order: e.order, cells: 0, max_relative_error: 0.0 });
        slot.cells += 1;
        slot.max_relative_error = slot.max_relative_error.max(err);
    }
    ComparisonReport { tolerance, orders: per_order.into_values().collect() }
}

/// The illustrative parameter regimes shipped with the example plan.
pub fn illustrative_sets() -> Vec<SetSpec> {
    let base = SynthesisParams::default();
    let set = |name: &str, base: SynthesisParams, variation: VariationSpec| SetSpec {
        name: name.into(),
        variations: 1,
        base,
        variation,
        tables: None,
        traces: None,
    };
    vec![
        set("dry", SynthesisParams::dry(), VariationSpec::default()),
        set("default", base.clone(), VariationSpec::default()),
        set(
            "smooth",
            SynthesisParams { pink_depth: 0.1, ..base.clone() },
            VariationSpec { resonator_gain: Some(Span(0.2, 0.4)), ..Default::default() },
        ),
        set(
            "rough",
            SynthesisParams { pink_depth: 0.6, ..base.clone() },
            VariationSpec {
                burst_mix: Some(Span(0.08, 0.2)),
                burst_exponent: Some(Span(2.0, 6.0)),
                ..Default::default()
            },
        ),
        set(
            "short-exhaust",
            base.clone(),
            VariationSpec {
                resonator_delay_ms: Some(Span(1.5, 4.0)),
                resonator_gain: Some(Span(0.3, 0.6)),
                ..Default::default()
            },
        ),
        set(
            "long-exhaust",
            base.clone(),
            VariationSpec {
                resonator_delay_ms: Some(Span(10.0, 25.0)),
                resonator_gain: Some(Span(0.4, 0.7)),
                ..Default::default()
            },
        ),
        set(
            "bright-bursts",
            base.clone(),
            VariationSpec {
                burst_cutoff_hz: Some(Span(3000.0, 6000.0)),
                burst_mix: Some(Span(0.05, 0.12)),
                ..Default::default()
            },
        ),
        set(
            "mixed",
            base,
            VariationSpec {
                pink_depth: Some(Span(0.1, 0.5)),
                burst_mix: Some(Span(0.02, 0.1)),
                resonator_gain: Some(Span(0.2, 0.7)),
                resonator_delay_ms: Some(Span(3.0, 15.0)),
                ..Default::default()
            },
        ),
    ]
}

fn example_table(id: &str, cylinders: f64, brightness: f64, detune: f64) -> Result<TimbreTable> {
    let grid = TableGrid::uniform((500.0, 7000.0, 500.0), (-100.0, 400.0, 100.0))?;
    TimbreTable::from_fn(id, default_orders(), &grid, |h, rpm, torque| {
        let load = 1.0 + (torque + 100.0) / 500.0;
        // firing order (cylinders / 2) and its multiples dominate
        let firing = cylinders / 2.0;
        let peak = (-((h / firing - (h / firing).round()).powi(2)) * 40.0).exp();
        let mag = 0.02 * load * (0.3 + peak) / (1.0 + h / brightness) * (1.0 + rpm / 14_000.0);
        (detune * (h * 1.7).sin() * (rpm / 7000.0), mag)
    })
}

fn example_trace(kind: usize) -> Result<ControlTrace> {
    const RATE: u32 = 1000;
    let n = 2 * RATE as usize + 1;
    let t = |i: usize| i as f64 / f64::from(RATE);
    let (rpm, torque): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|i| match kind {
            0 => (850.0 + 15.0 * (t(i) * 3.0).sin(), 10.0),
            1 => (1500.0 + 1700.0 * t(i), 80.0 + 120.0 * t(i)),
            _ => (5200.0 - 900.0 * t(i), -60.0 + 10.0 * t(i)),
        })
        .unzip();
    ControlTrace::new(RATE, rpm, torque)
}

/// Write four example tables, three CSV traces and a plan into `dir`.
///
/// With `all_sets` the plan uses the eight illustrative regimes; otherwise a
/// single set with one variation (12 items). Returns the plan path.
pub fn write_example_project(dir: &Path, all_sets: bool) -> Result<PathBuf> {
    std::fs::create_dir_all(dir.join("tables"))?;
    std::fs::create_dir_all(dir.join("traces"))?;
    let mut tables = Vec::new();
    for (id, cyl, bright, detune) in
        [("inline4", 4.0, 12.0, 0.004), ("v6", 6.0, 20.0, 0.006), ("v8", 8.0, 16.0, 0.01), ("flat4", 4.0, 8.0, 0.008)]
    {
        let path = PathBuf::from("tables").join(format!("{id}.json"));
        example_table(id, cyl, bright, detune)?.save(dir.join(&path))?;
        tables.push(SourceRef { id: id.into(), path });
    }
    let mut traces = Vec::new();
    for (k, id) in ["idle", "pull", "lift-off"].into_iter().enumerate() {
        let path = PathBuf::from("traces").join(format!("{id}.csv"));
        tracefile::write_trace_csv(dir.join(&path), &example_trace(k)?)?;
        traces.push(SourceRef { id: id.into(), path });
    }
    let sets = if all_sets {
        illustrative_sets()
    } else {
        vec![SetSpec {
            name: "baseline".into(),
            variations: 1,
            base: SynthesisParams::default(),
            variation: VariationSpec {
                pink_depth: Some(Span(0.2, 0.4)),
                resonator_gain: Some(Span(0.3, 0.55)),
                ..Default::default()
            },
            tables: None,
            traces: None,
        }]
    };
    let plan = GenerationPlan { seed: 1, output_dir: "out".into(), tables, traces, sets };
    let plan_path = dir.join("plan.json");
    std::fs::write(&plan_path, plan.to_json_pretty())?;
    Ok(plan_path)
}
